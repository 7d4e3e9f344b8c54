"""
Supernova Fitting Utilities.

Loads the Union2 compilation (name, z, mu, sigma_mu), fits EdS, flat LCDM
and MORC-approx by minimizing an unweighted sum of squared residuals, and
runs the log-log linear regression of log10(D_L/Gpc) on log10(z).

Residuals live in log10(D_L/Gpc) space by default. Setting
residual_space='mu' switches to distance-modulus residuals; the chosen space
is carried on every FitResult and written to the fit report.

Fitting recipe: evaluate SSE on a coarse grid (FIT_GRID_POINTS per free
parameter) inside the bounds, then polish the best grid point with bounded
Nelder-Mead in unit-box coordinates.
"""
import itertools
import logging
import math
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np
import pandas as pd
from scipy import optimize, stats
from tqdm import tqdm

from basic_capabilities.graph_path_integral_toolbox import config
from basic_capabilities.graph_path_integral_toolbox.errors import (
    BoundsError,
    DataFormatError,
    DegenerateRegressionError,
    EmptyDatasetError,
    ModelParameterError,
)
from basic_capabilities.cosmology_toolbox.cosmology import (
    FREE_PARAMETERS,
    CosmologyModel,
    distance_modulus,
    gpc_to_gcy,
    luminosity_distances,
)

logger = logging.getLogger(__name__)

RESIDUAL_SPACES = ('log_dl', 'mu')


@dataclass(frozen=True)
class SupernovaRecord:
    name: str
    z: float
    mu: float
    sigma_mu: float

    def __post_init__(self):
        if not (self.z > 0 and math.isfinite(self.z)):
            raise DataFormatError(f"{self.name}: redshift must be positive, got {self.z}")
        if not math.isfinite(self.mu):
            raise DataFormatError(f"{self.name}: distance modulus is not finite")
        if not self.sigma_mu >= 0:
            raise DataFormatError(f"{self.name}: sigma_mu must be >= 0, got {self.sigma_mu}")


@dataclass(frozen=True)
class FitConfig:
    grid_points: int = config.FIT_GRID_POINTS
    xatol: float = config.FIT_XATOL
    fatol: float = config.FIT_FATOL
    max_evaluations: int = config.FIT_MAX_EVALUATIONS
    residual_space: str = 'log_dl'
    show_progress: bool = False


@dataclass
class FitResult:
    kind: str
    parameters: Dict[str, float]
    sse: float
    n_points: int
    evaluations: int = 0
    converged: bool = True
    residual_space: str = 'log_dl'
    correlation: Optional[float] = None
    extras: Dict[str, float] = field(default_factory=dict)

    @property
    def model(self) -> Optional[CosmologyModel]:
        if self.kind not in FREE_PARAMETERS:
            return None
        return CosmologyModel(kind=self.kind, **self.parameters)


# --- Ingestion ---

def parse_union2(text: str) -> List[SupernovaRecord]:
    """
    Parses Union2 text: whitespace/tab separated name, z, mu, sigma_mu.

    Lines starting with '#' are skipped; extra trailing columns are ignored
    with a warning.

    Raises:
        DataFormatError: malformed row (line number reported) or invalid values.
        EmptyDatasetError: no data rows.
    """
    records = []
    extra_column_lines = 0
    low, high = config.MU_PLAUSIBLE_RANGE
    for line_number, raw_line in enumerate(text.splitlines(), start=1):
        line = raw_line.strip()
        if not line or line.startswith('#'):
            continue
        fields = line.split()
        if len(fields) < 4:
            raise DataFormatError(f"expected 4 columns (name z mu sigma_mu), got {len(fields)}", line_number)
        if len(fields) > 4:
            extra_column_lines += 1
        try:
            z, mu, sigma_mu = (float(value) for value in fields[1:4])
        except ValueError as e:
            raise DataFormatError(f"non-numeric value: {e}", line_number) from e
        try:
            record = SupernovaRecord(name=fields[0], z=z, mu=mu, sigma_mu=sigma_mu)
        except DataFormatError as e:
            raise DataFormatError(str(e), line_number) from e
        if not low < mu < high:
            logger.warning(f"line {line_number}: {record.name} has implausible mu = {mu}")
        records.append(record)

    if extra_column_lines:
        logger.warning(f"ignored trailing columns on {extra_column_lines} rows")
    if not records:
        raise EmptyDatasetError("no supernova records found")
    logger.info(f"loaded {len(records)} supernova records")
    return records


def load_union2(path: str) -> List[SupernovaRecord]:
    try:
        with open(path, 'r', encoding='utf-8') as f:
            text = f.read()
    except UnicodeDecodeError as e:
        raise DataFormatError(f"{path}: not UTF-8 text (byte {e.start})") from e
    return parse_union2(text)


def records_to_frame(records: Sequence[SupernovaRecord]) -> pd.DataFrame:
    return pd.DataFrame(
        [(r.name, r.z, r.mu, r.sigma_mu) for r in records],
        columns=['name', 'z', 'mu', 'sigma_mu'],
    )


def log_distance(record: SupernovaRecord) -> float:
    """log10(D_L / Gpc) implied by the record's distance modulus."""
    return (record.mu - 25.0) / 5.0 - 3.0


def _observed(records: Sequence[SupernovaRecord], residual_space: str) -> Tuple[np.ndarray, np.ndarray]:
    if not records:
        raise EmptyDatasetError("no supernova records to fit")
    z = np.array([r.z for r in records])
    mu = np.array([r.mu for r in records])
    observed = mu if residual_space == 'mu' else (mu - 25.0) / 5.0 - 3.0
    return z, observed


def _predicted(model: CosmologyModel, z: np.ndarray, residual_space: str) -> np.ndarray:
    D_L = luminosity_distances(model, z)
    return distance_modulus(D_L) if residual_space == 'mu' else np.log10(D_L)


def model_sse(model: CosmologyModel, records: Sequence[SupernovaRecord], residual_space: str = 'log_dl') -> float:
    """Unweighted sum of squared residuals (pairwise summation, order independent)."""
    if residual_space not in RESIDUAL_SPACES:
        raise ModelParameterError(f"residual space must be one of {RESIDUAL_SPACES}")
    z, observed = _observed(records, residual_space)
    residuals = observed - _predicted(model, z, residual_space)
    return float(np.sum(residuals ** 2))


def residual_table(model: CosmologyModel, records: Sequence[SupernovaRecord]) -> pd.DataFrame:
    """Per-record observed, predicted and residual log10(D_L/Gpc) for plotting."""
    z, observed = _observed(records, 'log_dl')
    predicted = _predicted(model, z, 'log_dl')
    return pd.DataFrame({
        'name': [r.name for r in records],
        'z': z,
        'observed': observed,
        'predicted': predicted,
        'residual': observed - predicted,
    })


def synthesize_records(model: CosmologyModel, z_values: Sequence[float], sigma_mu: float = 0.0) -> List[SupernovaRecord]:
    """Noiseless records whose distance moduli come straight from the model."""
    z = np.asarray(z_values, dtype=float)
    mu = distance_modulus(luminosity_distances(model, z))
    return [SupernovaRecord(name=f"syn{i + 1:04d}", z=float(zi), mu=float(mi), sigma_mu=sigma_mu)
            for i, (zi, mi) in enumerate(zip(z, np.atleast_1d(mu)))]


# --- Fitting ---

def _resolve_bounds(kind: str, bounds: Optional[Dict[str, Tuple[float, float]]]) -> List[Tuple[float, float]]:
    bounds = dict(config.FIT_BOUNDS[kind], **(bounds or {}))
    resolved = []
    for name in FREE_PARAMETERS[kind]:
        lo, hi = bounds[name]
        if not (math.isfinite(lo) and math.isfinite(hi) and lo < hi):
            raise BoundsError(f"bounds for {name} must be finite with lo < hi, got ({lo}, {hi})")
        resolved.append((float(lo), float(hi)))
    return resolved


def fit_model(
    kind: str,
    records: Sequence[SupernovaRecord],
    bounds: Optional[Dict[str, Tuple[float, float]]] = None,
    fit_config: FitConfig = FitConfig(),
    initial: Optional[Sequence[float]] = None,
) -> FitResult:
    """
    Derivative-free SSE minimization over a model's free parameters.

    EdS: (H0,). LCDM: (H0, Omega_M), Omega_L = 1 - Omega_M. MORC-approx:
    (H0, A_inv in Gpc).

    Args:
        kind (str): 'eds', 'lcdm' or 'morc'.
        records: Supernova records.
        bounds (dict, optional): Per-parameter (lo, hi) overriding config.FIT_BOUNDS.
        fit_config (FitConfig): Grid size, tolerances (unit-box coordinates),
            evaluation limit and residual space.
        initial (sequence, optional): Starting point; skips the grid seed.

    Returns:
        FitResult. converged is False when the evaluation limit ran out; the
        best point found so far is returned in that case.
    """
    kind = kind.lower()
    if kind not in FREE_PARAMETERS:
        raise ModelParameterError(f"unknown model kind '{kind}'")
    if fit_config.residual_space not in RESIDUAL_SPACES:
        raise ModelParameterError(f"residual space must be one of {RESIDUAL_SPACES}")
    box = _resolve_bounds(kind, bounds)
    lo = np.array([b[0] for b in box])
    width = np.array([b[1] - b[0] for b in box])
    z, observed = _observed(records, fit_config.residual_space)
    evaluations = 0

    def sse_at(params: np.ndarray) -> float:
        nonlocal evaluations
        evaluations += 1
        try:
            model = CosmologyModel.from_parameters(kind, params)
        except ModelParameterError:
            return math.inf
        residuals = observed - _predicted(model, z, fit_config.residual_space)
        return float(np.sum(residuals ** 2))

    def objective(u: np.ndarray) -> float:
        return sse_at(lo + np.clip(u, 0.0, 1.0) * width)

    if initial is not None:
        start = np.asarray(initial, dtype=float)
        if np.any(start < lo) or np.any(start > lo + width):
            raise BoundsError(f"initial point {start.tolist()} lies outside the bounds {box}")
        u0 = (start - lo) / width
    else:
        axis = np.linspace(0.0, 1.0, fit_config.grid_points)
        grid = list(itertools.product(axis, repeat=len(box)))
        scores = [objective(np.array(u)) for u in tqdm(grid, desc=f"{kind} grid", disable=not fit_config.show_progress)]
        u0 = np.array(grid[int(np.argmin(scores))])

    result = optimize.minimize(
        objective, u0, method='Nelder-Mead', bounds=[(0.0, 1.0)] * len(box),
        options={
            'xatol': fit_config.xatol,
            'fatol': fit_config.fatol,
            'maxfev': fit_config.max_evaluations,
            'initial_simplex': _initial_simplex(u0),
        },
    )
    best = lo + np.clip(result.x, 0.0, 1.0) * width
    converged = bool(result.success)
    if not converged:
        logger.warning(f"{kind} fit stopped before converging: {result.message}")

    fit = FitResult(
        kind=kind,
        parameters=dict(zip(FREE_PARAMETERS[kind], (float(v) for v in best))),
        sse=float(result.fun),
        n_points=len(records),
        evaluations=evaluations,
        converged=converged,
        residual_space=fit_config.residual_space,
    )
    if np.any(np.isclose(result.x, 0.0, atol=1e-9)) or np.any(np.isclose(result.x, 1.0, atol=1e-9)):
        logger.warning(f"{kind} fit landed on a bound: {fit.parameters}")
    _log_against_quoted(fit)
    return fit


def _initial_simplex(u0: np.ndarray, step: float = 0.05) -> np.ndarray:
    """Simplex around u0 that stays inside the unit box."""
    simplex = [u0.copy()]
    for i in range(u0.shape[0]):
        vertex = u0.copy()
        vertex[i] = u0[i] + step if u0[i] + step <= 1.0 else u0[i] - step
        simplex.append(vertex)
    return np.array(simplex)


def _log_against_quoted(fit: FitResult) -> None:
    quoted = config.QUOTED_FITS.get(fit.kind)
    if not quoted or fit.residual_space != 'log_dl':
        return
    if fit.kind == 'morc':
        a_inv_gcy = gpc_to_gcy(fit.parameters['A_inv'])
        fit.extras['A_inv_gcy'] = a_inv_gcy
        logger.info(
            f"MORC-approx: H0 = {fit.parameters['H0']:.2f} (quoted {quoted['H0']}), "
            f"A_inv = {a_inv_gcy:.2f} Gcy (quoted {quoted['A_inv_gcy']}), "
            f"SSE = {fit.sse:.3f} (quoted {quoted['sse']})"
        )
    else:
        logger.info(f"{fit.kind}: parameters {fit.parameters}, SSE = {fit.sse:.3f} (quoted {quoted})")


def loglog_regression(records: Sequence[SupernovaRecord]) -> FitResult:
    """
    Ordinary least squares of log10(D_L/Gpc) on log10(z).

    Returns:
        FitResult with kind 'regression', parameters slope/intercept, the
        Pearson correlation and the SSE of the residuals.
    """
    if len(records) < 3:
        raise DegenerateRegressionError(f"regression needs at least 3 records, got {len(records)}")
    x = np.log10([r.z for r in records])
    y = np.array([log_distance(r) for r in records])
    if np.ptp(x) == 0:
        raise DegenerateRegressionError("all redshifts are equal")
    line = stats.linregress(x, y)
    residuals = y - (line.intercept + line.slope * x)
    return FitResult(
        kind='regression',
        parameters={'slope': float(line.slope), 'intercept': float(line.intercept)},
        sse=float(np.sum(residuals ** 2)),
        n_points=len(records),
        correlation=float(line.rvalue),
    )


def fit_report(result: FitResult) -> pd.DataFrame:
    """Two-column parameter,value table for a fit."""
    rows = [('model', result.model.label if result.model else result.kind)]
    rows += list(result.parameters.items())
    rows += list(result.extras.items())
    if result.correlation is not None:
        rows.append(('correlation', result.correlation))
    rows += [
        ('sse', result.sse),
        ('n_points', result.n_points),
        ('evaluations', result.evaluations),
        ('converged', result.converged),
        ('residual_space', result.residual_space),
    ]
    return pd.DataFrame(rows, columns=['parameter', 'value'])
