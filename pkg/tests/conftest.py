"""Shared fixtures for the toolbox tests."""
import os
import sys

import numpy as np
import pytest

REPO_ROOT = os.path.abspath(os.path.join(os.path.dirname(__file__), '..'))
if REPO_ROOT not in sys.path:
    sys.path.insert(0, REPO_ROOT)

from basic_capabilities.graph_path_integral_toolbox import config  # noqa: E402
from basic_capabilities.graph_path_integral_toolbox.chain_complex import figure3_complex, load_graph  # noqa: E402
from basic_capabilities.graph_path_integral_toolbox.scc_engine import build_actional  # noqa: E402

DATA_DIR = os.path.join(REPO_ROOT, 'data')

# Boundary operators of the six-vertex example, rows v1..v6 / e1..e7
FIGURE3_D1 = np.array([
    [-1, 0, 0, -1, 0, 0, 0],
    [1, -1, -1, 0, 0, 0, 0],
    [0, 0, 1, 0, 0, 0, -1],
    [0, 0, 0, 1, -1, 0, 0],
    [0, 1, 0, 0, 1, -1, 0],
    [0, 0, 0, 0, 0, 1, 1],
])
FIGURE3_D2 = np.array([
    [-1, 0],
    [-1, 1],
    [0, -1],
    [1, 0],
    [1, 0],
    [0, 1],
    [0, -1],
])
FIGURE3_K = np.array([
    [2, -1, 0, -1, 0, 0],
    [-1, 3, -1, 0, -1, 0],
    [0, -1, 2, 0, 0, -1],
    [-1, 0, 0, 2, -1, 0],
    [0, -1, 0, -1, 3, -1],
    [0, 0, -1, 0, -1, 2],
])


@pytest.fixture
def data_dir():
    return DATA_DIR


@pytest.fixture
def figure3():
    return figure3_complex()


@pytest.fixture
def two_vertex():
    return load_graph(os.path.join(DATA_DIR, 'two_vertex.graph'))


@pytest.fixture
def figure3_ones_actional(figure3):
    return build_actional(figure3, np.ones(7))


@pytest.fixture
def union2_records():
    """Union2 records from UNION2_DATA_PATH; skips when the dataset is not available."""
    from basic_capabilities.cosmology_toolbox.supernova_fit import load_union2

    path = config.get_setting('UNION2_DATA_PATH')
    if not path or not os.path.exists(path):
        pytest.skip("Union2 data not available (set UNION2_DATA_PATH)")
    return load_union2(path)
