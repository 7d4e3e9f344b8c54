"""
Configuration loader using python-dotenv.

Numerical thresholds, Monte-Carlo chunking, cosmology constants and fit
defaults live here so every toolbox module reads the same values.

A .env file in the project root is optional. The only setting read from the
environment is UNION2_DATA_PATH, which points the acceptance tests at a
local copy of the Union2 compilation. The CLI takes everything from flags.
"""
import os
from dotenv import load_dotenv

# Load the .env file from the root of the project (if present)
load_dotenv()

# --- Spectral thresholds ---
# |lambda| < ZERO_EIGENVALUE_RTOL * lambda_max counts as a gauge (null) mode
ZERO_EIGENVALUE_RTOL = 1e-10
# |J_null| <= ROW_SPACE_RTOL * ||J|| means J lies in the row space of K
ROW_SPACE_RTOL = 1e-9

# --- Monte-Carlo oracle ---
MC_MIN_SAMPLES = 10_000
MC_CHUNK_SIZE = 100_000
MC_MAX_WORKERS = 4
# proposal variance is MC_PROPOSAL_SCALE / a_j around each mode's peak
MC_PROPOSAL_SCALE = 2.0

# --- Cosmology ---
SPEED_OF_LIGHT_KMS = 299792.458
MPC_PER_GPC = 1000.0
GCY_PER_GPC = 3.2616
QUAD_EPSREL = 1e-10
QUAD_LIMIT = 200

# Values quoted for the Union2 fits, used only for logged diagnostics
QUOTED_FITS = {
    'eds': {'H0': 60.9, 'sse': 2.68},
    'lcdm': {'H0': 69.2, 'Omega_M': 0.29, 'sse': 1.79},
    'morc': {'H0': 73.9, 'A_inv_gcy': 8.38, 'sse': 1.77},
    'regression': {'correlation': 0.9955, 'sse': 1.95},
}

# --- Fitting ---
FIT_BOUNDS = {
    'eds': {'H0': (40.0, 100.0)},
    'lcdm': {'H0': (40.0, 100.0), 'Omega_M': (0.0, 1.0)},
    'morc': {'H0': (40.0, 100.0), 'A_inv': (0.3, 30.0)},
}
FIT_GRID_POINTS = 8
FIT_XATOL = 1e-6
FIT_FATOL = 1e-12
FIT_MAX_EVALUATIONS = 4000
MU_PLAUSIBLE_RANGE = (10.0, 60.0)

# --- Output ---
FLOAT_FORMAT = "%.12g"


def get_setting(key_name, default=None):
    """
    Get a setting from the environment by key name.

    Args:
        key_name (str): Environment variable name.
        default: Value returned when the variable is unset or empty.

    Returns:
        The variable's value, or default.
    """
    return os.getenv(key_name) or default


UNION2_DATA_PATH = get_setting("UNION2_DATA_PATH")
