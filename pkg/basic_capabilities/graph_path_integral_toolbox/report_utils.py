"""
CSV report helpers shared by the CLI subcommands.

Every table leaves through write_frame, so numeric output always carries
12 significant digits (config.FLOAT_FORMAT) whether it goes to a file or
to stdout.
"""
import logging
import os
import sys
from typing import Any, Dict, Optional, Sequence

import numpy as np
import pandas as pd

from basic_capabilities.graph_path_integral_toolbox import config

logger = logging.getLogger(__name__)


def format_number(value: Any) -> str:
    if isinstance(value, (bool, np.bool_)):
        return str(bool(value))
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, (float, np.floating)):
        return config.FLOAT_FORMAT % value
    return str(value)


def key_value_frame(values: Dict[str, Any]) -> pd.DataFrame:
    """parameter,value table; floats are pre-formatted so mixed columns keep 12 digits."""
    return pd.DataFrame(
        [(key, format_number(value)) for key, value in values.items()],
        columns=['parameter', 'value'],
    )


def matrix_frame(matrix: np.ndarray, row_labels: Sequence[str], column_labels: Sequence[str]) -> pd.DataFrame:
    df = pd.DataFrame(np.asarray(matrix), columns=list(column_labels))
    df.insert(0, 'row', list(row_labels))
    return df


def vector_frame(values: np.ndarray, labels: Sequence[str], key: str = 'vertex') -> pd.DataFrame:
    return pd.DataFrame({key: list(labels), 'value': np.asarray(values, dtype=float)})


def write_frame(df: pd.DataFrame, out: Optional[str] = None) -> None:
    """
    Writes a DataFrame as CSV.

    Args:
        df: Table to write. Object columns are written as-is.
        out (str, optional): File path; stdout when None or '-'.
    """
    if out in (None, '-'):
        df.to_csv(sys.stdout, index=False, float_format=config.FLOAT_FORMAT, lineterminator='\n')
        return
    directory = os.path.dirname(out)
    if directory:
        os.makedirs(directory, exist_ok=True)
    df.to_csv(out, index=False, float_format=config.FLOAT_FORMAT, lineterminator='\n', encoding='utf-8')
    logger.info(f"wrote {len(df)} rows to {out}")


def write_text(text: str, out: Optional[str] = None) -> None:
    if out in (None, '-'):
        sys.stdout.write(text)
        return
    directory = os.path.dirname(out)
    if directory:
        os.makedirs(directory, exist_ok=True)
    with open(out, 'w', encoding='utf-8', newline='') as f:
        f.write(text)
    logger.info(f"wrote {out}")
