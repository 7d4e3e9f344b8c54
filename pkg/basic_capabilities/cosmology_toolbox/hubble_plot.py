"""
Hubble Diagram Plots.

Two-panel SVG built from residual tables (name, z, observed, predicted,
residual in log10(D_L/Gpc)): log-log D_L against z on the left, distance
modulus against z on the right, data points plus one curve per model.

The SVG bytes depend only on the input tables: the hash salt is fixed and
the date metadata is dropped.
"""
import io
import logging
from typing import Sequence, Tuple

import matplotlib

matplotlib.use('Agg')
import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402
import pandas as pd  # noqa: E402

from basic_capabilities.graph_path_integral_toolbox.errors import DataFormatError  # noqa: E402

logger = logging.getLogger(__name__)

RESIDUAL_COLUMNS = ('name', 'z', 'observed', 'predicted', 'residual')
MODEL_COLOURS = ('tab:blue', 'tab:red', 'tab:green', 'tab:purple', 'tab:orange')
SVG_HASH_SALT = 'theory-x-hubble'


def load_residual_table(path: str) -> pd.DataFrame:
    df = pd.read_csv(path)
    missing = [c for c in RESIDUAL_COLUMNS if c not in df.columns]
    if missing:
        raise DataFormatError(f"{path}: residual table is missing columns {', '.join(missing)}")
    if df.empty:
        raise DataFormatError(f"{path}: residual table has no rows")
    return df


def _mu_from_log_dl(log_dl):
    # D_L in Gpc -> Mpc, then 5 log10 + 25
    return 5.0 * (np.asarray(log_dl) + 3.0) + 25.0


def hubble_diagram_svg(tables: Sequence[Tuple[str, pd.DataFrame]], title: str = "Union2 Hubble diagram") -> str:
    """
    Renders the two-panel Hubble diagram.

    Args:
        tables: (label, residual table) pairs. Data points come from the first
            table; every table contributes its predicted curve.
        title (str): Figure title.

    Returns:
        SVG document as text.
    """
    if not tables:
        raise DataFormatError("no residual tables to plot")
    data = tables[0][1].sort_values('z', kind='mergesort')

    with matplotlib.rc_context({'svg.hashsalt': SVG_HASH_SALT, 'svg.fonttype': 'path'}):
        fig, (ax_log, ax_mu) = plt.subplots(1, 2, figsize=(11, 4.5))
        ax_log.scatter(np.log10(data['z']), data['observed'], s=6, color='0.4', alpha=0.6, label='data')
        ax_mu.scatter(data['z'], _mu_from_log_dl(data['observed']), s=6, color='0.4', alpha=0.6, label='data')

        for i, (label, table) in enumerate(tables):
            curve = table.sort_values('z', kind='mergesort')
            colour = MODEL_COLOURS[i % len(MODEL_COLOURS)]
            ax_log.plot(np.log10(curve['z']), curve['predicted'], color=colour, label=label)
            ax_mu.plot(curve['z'], _mu_from_log_dl(curve['predicted']), color=colour, label=label)

        ax_log.set_xlabel('log10 z')
        ax_log.set_ylabel('log10 (D_L / Gpc)')
        ax_mu.set_xlabel('z')
        ax_mu.set_ylabel('distance modulus mu')
        for ax in (ax_log, ax_mu):
            ax.grid(True, alpha=0.3)
            ax.legend(loc='upper left')
        fig.suptitle(title)

        buffer = io.StringIO()
        fig.savefig(buffer, format='svg', bbox_inches='tight', metadata={'Date': None})
        plt.close(fig)

    logger.debug(f"rendered Hubble diagram with {len(tables)} model curve(s) over {len(data)} points")
    return buffer.getvalue()
