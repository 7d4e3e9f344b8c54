"""
Cosmology Distance Utilities.

Luminosity distances and distance moduli for three flat models:

- EdS: matter only, D_p = 2 (c/H0) (1 - 1/sqrt(1+z)), D_L = (1+z) D_p.
- LCDM: D_L = (1+z) (c/H0) int_0^z dz'/sqrt(Om (1+z')^3 + OL), OL = 1 - Om.
- MORC-approx: EdS background with the modified inner product
  D_L = (1+z) sqrt(1 + h11) D_p, h11 = D_p / A_inv (B = 0, so the
  correction vanishes for small D_p).

Distances are in Gpc, H0 in km/s/Mpc, A_inv in Gpc (quoted values in giga
light-years convert with GCY_PER_GPC).
"""
import logging
import math
from dataclasses import dataclass, field
from typing import Dict, Optional, Sequence

import numpy as np
import pandas as pd
from scipy.integrate import quad

from basic_capabilities.graph_path_integral_toolbox import config
from basic_capabilities.graph_path_integral_toolbox.errors import (
    DimensionMismatchError,
    ModelParameterError,
    QuadratureError,
)

logger = logging.getLogger(__name__)

MODEL_KINDS = ('eds', 'lcdm', 'morc')
MODEL_LABELS = {'eds': 'EdS', 'lcdm': 'LCDM', 'morc': 'MORC-approx'}
FREE_PARAMETERS = {'eds': ('H0',), 'lcdm': ('H0', 'Omega_M'), 'morc': ('H0', 'A_inv')}


@dataclass(frozen=True)
class CosmologyModel:
    kind: str
    H0: float
    Omega_M: Optional[float] = None
    A_inv: Optional[float] = None
    Omega_L: Optional[float] = field(default=None)

    def __post_init__(self):
        kind = self.kind.lower()
        object.__setattr__(self, 'kind', kind)
        if kind not in MODEL_KINDS:
            raise ModelParameterError(f"unknown model kind '{self.kind}', expected one of {MODEL_KINDS}")
        if not (self.H0 > 0 and math.isfinite(self.H0)):
            raise ModelParameterError(f"H0 must be positive, got {self.H0}")
        if kind == 'lcdm':
            if self.Omega_M is None:
                raise ModelParameterError("LCDM needs Omega_M")
            omega_l = 1.0 - self.Omega_M if self.Omega_L is None else self.Omega_L
            if self.Omega_M < 0 or omega_l < 0 or abs(self.Omega_M + omega_l - 1.0) > 1e-12:
                raise ModelParameterError(
                    f"flat LCDM needs Omega_M, Omega_L >= 0 summing to 1, got {self.Omega_M}, {omega_l}"
                )
            object.__setattr__(self, 'Omega_L', omega_l)
        if kind == 'morc' and not (self.A_inv is not None and self.A_inv > 0):
            raise ModelParameterError(f"MORC needs A_inv > 0 (Gpc), got {self.A_inv}")

    @property
    def label(self) -> str:
        return MODEL_LABELS[self.kind]

    @property
    def hubble_distance(self) -> float:
        """c/H0 in Gpc."""
        return config.SPEED_OF_LIGHT_KMS / self.H0 / config.MPC_PER_GPC

    def parameters(self) -> Dict[str, float]:
        return {name: float(getattr(self, name)) for name in FREE_PARAMETERS[self.kind]}

    @classmethod
    def from_parameters(cls, kind: str, values: Sequence[float]) -> "CosmologyModel":
        names = FREE_PARAMETERS[kind.lower()]
        if len(values) != len(names):
            raise ModelParameterError(f"{kind} takes parameters {names}, got {len(values)} values")
        return cls(kind=kind, **dict(zip(names, (float(v) for v in values))))


@dataclass(frozen=True)
class DistancePair:
    z: float
    D_p: float
    D_L: float


def gcy_to_gpc(value: float) -> float:
    return value / config.GCY_PER_GPC


def gpc_to_gcy(value: float) -> float:
    return value * config.GCY_PER_GPC


def _check_redshift(z) -> np.ndarray:
    z = np.asarray(z, dtype=float)
    if np.any(~np.isfinite(z)) or np.any(z < 0):
        raise ModelParameterError("redshift must be finite and >= 0")
    return z


def proper_distance_eds(z, H0: float):
    """D_p = 2 (c/H0)(1 - 1/sqrt(1+z)) in Gpc; works on scalars and arrays."""
    z = _check_redshift(z)
    if not H0 > 0:
        raise ModelParameterError(f"H0 must be positive, got {H0}")
    hubble_distance = config.SPEED_OF_LIGHT_KMS / H0 / config.MPC_PER_GPC
    result = 2.0 * hubble_distance * (1.0 - 1.0 / np.sqrt(1.0 + z))
    return float(result) if result.ndim == 0 else result


def h11_correction(D_p, A_inv: float):
    """h11 = A D_p with A = 1/A_inv and B = 0."""
    return np.asarray(D_p, dtype=float) / A_inv


def _lcdm_integrand(z: float, omega_m: float, omega_l: float) -> float:
    return 1.0 / math.sqrt(omega_m * (1.0 + z) ** 3 + omega_l)


def _quad_interval(lo: float, hi: float, omega_m: float, omega_l: float) -> float:
    value, _abserr, info, *message = quad(
        _lcdm_integrand, lo, hi, args=(omega_m, omega_l),
        epsabs=0.0, epsrel=config.QUAD_EPSREL, limit=config.QUAD_LIMIT, full_output=1,
    )
    if message:
        raise QuadratureError(f"quadrature on [{lo}, {hi}] did not converge: {message[0]}")
    return value


def comoving_distance_lcdm(z, H0: float, omega_m: float):
    """
    Flat LCDM line-of-sight comoving distance in Gpc.

    Redshifts are sorted and integrated interval by interval, so N points cost
    N adaptive quadratures on short intervals rather than N from zero.
    """
    z = _check_redshift(z)
    scalar = z.ndim == 0
    flat = np.atleast_1d(z).ravel()
    omega_l = 1.0 - omega_m
    order = np.argsort(flat, kind='stable')
    integrals = np.empty_like(flat)
    running, previous = 0.0, 0.0
    for i in order:
        if flat[i] > previous:
            running += _quad_interval(previous, flat[i], omega_m, omega_l)
            previous = flat[i]
        integrals[i] = running
    result = (config.SPEED_OF_LIGHT_KMS / H0 / config.MPC_PER_GPC) * integrals.reshape(np.atleast_1d(z).shape)
    return float(result[0]) if scalar else result


def luminosity_distances(model: CosmologyModel, z) -> np.ndarray:
    """Vectorized D_L(z) in Gpc for any model kind."""
    z = np.atleast_1d(_check_redshift(z))
    if model.kind == 'eds':
        return (1.0 + z) * proper_distance_eds(z, model.H0)
    if model.kind == 'lcdm':
        return (1.0 + z) * comoving_distance_lcdm(z, model.H0, model.Omega_M)
    D_p = proper_distance_eds(z, model.H0)
    return (1.0 + z) * np.sqrt(1.0 + h11_correction(D_p, model.A_inv)) * D_p


def luminosity_distance(model: CosmologyModel, z: float) -> float:
    """D_L(z) in Gpc for a single redshift."""
    return float(luminosity_distances(model, [z])[0])


def proper_distances(model: CosmologyModel, z) -> np.ndarray:
    """D_p in Gpc: the EdS background for EdS/MORC, the comoving distance for LCDM."""
    z = np.atleast_1d(_check_redshift(z))
    if model.kind == 'lcdm':
        return comoving_distance_lcdm(z, model.H0, model.Omega_M)
    return proper_distance_eds(z, model.H0)


def distance_pair(model: CosmologyModel, z: float) -> DistancePair:
    return DistancePair(z=float(z), D_p=float(proper_distances(model, [z])[0]), D_L=luminosity_distance(model, z))


def distance_modulus(D_L):
    """mu = 5 log10(D_L / Mpc) + 25 for D_L given in Gpc."""
    D_L = np.asarray(D_L, dtype=float)
    if np.any(~(D_L > 0)):
        raise ModelParameterError("distance modulus needs a positive luminosity distance")
    mu = 5.0 * np.log10(D_L * config.MPC_PER_GPC) + 25.0
    return float(mu) if mu.ndim == 0 else mu


def distance_curve(model: CosmologyModel, zmax: float, steps: int) -> pd.DataFrame:
    """Table of z, D_p, D_L and mu on an even grid from zmax/steps to zmax."""
    if steps < 1 or not zmax > 0:
        raise ModelParameterError("distance curve needs zmax > 0 and steps >= 1")
    z = np.linspace(zmax / steps, zmax, steps)
    D_L = luminosity_distances(model, z)
    return pd.DataFrame({
        'z': z,
        'D_p_Gpc': proper_distances(model, z),
        'D_L_Gpc': D_L,
        'mu': distance_modulus(D_L),
    })


def regge_vacuum_action(hinge_areas: Sequence[float], deficit_angles: Sequence[float]) -> float:
    """Hilbert action of a vacuum lattice, (1 / 8 pi) sum_i eps_i A_i."""
    areas = np.asarray(hinge_areas, dtype=float)
    deficits = np.asarray(deficit_angles, dtype=float)
    if areas.shape != deficits.shape:
        raise DimensionMismatchError(
            f"{areas.size} hinge areas but {deficits.size} deficit angles"
        )
    return float(np.sum(areas * deficits) / (8.0 * math.pi))
