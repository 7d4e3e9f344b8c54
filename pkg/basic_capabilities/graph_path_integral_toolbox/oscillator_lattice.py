"""
Coupled Oscillator Lattice.

Two oscillators q1, q2 with potential V = k q1^2/2 + k q2^2/2 + k12 q1 q2,
discretized on n_time time vertices each. The Euclidean action

    sum_links m (dq)^2 / (2 dt) + sum_t (V(q1, q2) - j1 q1 - j2 q2) dt

is the quadratic form Q.K.Q/2 - J.Q with K = oscillator_K(p). At unit
parameters (m/dt = k dt = -k12 dt = 1) K is exactly the graph Laplacian of
the two-chain ladder complex.

Vertex order: oscillator 1 at times 1..n_time, then oscillator 2.
Temporal endpoints are free (no periodic wrap).
"""
import logging
from dataclasses import dataclass
from typing import Dict, Tuple

import numpy as np

from basic_capabilities.graph_path_integral_toolbox.chain_complex import ChainComplex, Link, Plaquette
from basic_capabilities.graph_path_integral_toolbox.errors import DimensionMismatchError, InvalidComplexError
from basic_capabilities.graph_path_integral_toolbox.scc_engine import build_K

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class OscillatorParams:
    m: float
    k: float
    k12: float
    dt: float
    n_time: int

    def __post_init__(self):
        if not self.m > 0:
            raise InvalidComplexError(f"mass m must be positive, got {self.m}")
        if not self.dt > 0:
            raise InvalidComplexError(f"time step dt must be positive, got {self.dt}")
        if not self.k12 < 0:
            raise InvalidComplexError(f"cross-coupling k12 must be negative, got {self.k12}")
        if not self.k >= abs(self.k12):
            raise InvalidComplexError(
                f"k = {self.k} must be at least |k12| = {abs(self.k12)} so no spring constant is negative"
            )
        if self.k == abs(self.k12):
            logger.debug("k == |k12|: the wall springs k1 = k2 vanish")
        if int(self.n_time) != self.n_time or self.n_time < 2:
            raise InvalidComplexError(f"n_time must be an integer >= 2, got {self.n_time}")

    @classmethod
    def unit(cls, n_time: int) -> "OscillatorParams":
        """m/dt = k dt = -k12 dt = 1, where oscillator_K equals the ladder Laplacian."""
        return cls(m=1.0, k=1.0, k12=-1.0, dt=1.0, n_time=n_time)


def spring_constants(p: OscillatorParams) -> Tuple[float, float, float]:
    """(k1, k2, k3) of the two-wall spring picture: k = k1 + k3 = k2 + k3, k12 = -k3."""
    k3 = -p.k12
    return p.k - k3, p.k - k3, k3


def oscillator_potential(q1: float, q2: float, p: OscillatorParams) -> float:
    return 0.5 * p.k * q1 * q1 + 0.5 * p.k * q2 * q2 + p.k12 * q1 * q2


def oscillator_K(p: OscillatorParams) -> np.ndarray:
    """
    2*n_time square difference matrix of the discretized action.

    Each oscillator block is tridiagonal with -m/dt off the diagonal and
    m/dt + k dt (endpoints) or 2m/dt + k dt (interior) on it; k12 dt couples
    the two oscillators at equal times.
    """
    n = int(p.n_time)
    kinetic = p.m / p.dt
    chain = np.zeros((n, n))
    for t in range(n - 1):
        chain[t, t] += kinetic
        chain[t + 1, t + 1] += kinetic
        chain[t, t + 1] -= kinetic
        chain[t + 1, t] -= kinetic
    block = chain + p.k * p.dt * np.eye(n)
    coupling = p.k12 * p.dt * np.eye(n)
    return np.block([[block, coupling], [coupling, block]])


def source_vector(j1, j2, p: OscillatorParams) -> np.ndarray:
    """Stacked (j1 dt, j2 dt); scalars are broadcast over the time chain."""
    n = int(p.n_time)
    j1 = np.broadcast_to(np.asarray(j1, dtype=float), (n,))
    j2 = np.broadcast_to(np.asarray(j2, dtype=float), (n,))
    return np.concatenate([j1, j2]) * p.dt


def lattice_action(q1, q2, j1, j2, p: OscillatorParams) -> float:
    """
    Discretized Euclidean action summed term by term over the lattice.

    Kinetic term per time link: m (q[t+1] - q[t])^2 / (2 dt).
    Potential and source per time vertex: (V(q1, q2) - j1 q1 - j2 q2) dt.
    """
    n = int(p.n_time)
    q1 = np.asarray(q1, dtype=float)
    q2 = np.asarray(q2, dtype=float)
    if q1.shape != (n,) or q2.shape != (n,):
        raise DimensionMismatchError(f"q1 and q2 must have length n_time = {n}")
    j1 = np.broadcast_to(np.asarray(j1, dtype=float), (n,))
    j2 = np.broadcast_to(np.asarray(j2, dtype=float), (n,))

    total = 0.0
    for t in range(n - 1):
        total += 0.5 * p.m * ((q1[t + 1] - q1[t]) / p.dt) ** 2 * p.dt
        total += 0.5 * p.m * ((q2[t + 1] - q2[t]) / p.dt) ** 2 * p.dt
    for t in range(n):
        total += oscillator_potential(q1[t], q2[t], p) * p.dt
        total -= (j1[t] * q1[t] + j2[t] * q2[t]) * p.dt
    return float(total)


def ladder_complex(n_time: int) -> ChainComplex:
    """
    Two parallel time chains joined by rungs, one square plaquette per step.

    Links: chain-1 steps a1..a(n-1), chain-2 steps b1..b(n-1), rungs r1..rn
    (r_t runs from oscillator 1 to oscillator 2 at time t). Plaquette s_t is
    +r_t +b_t -r_(t+1) -a_t, the orientation of p1/p2 in figure3_complex.
    """
    if int(n_time) != n_time or n_time < 2:
        raise InvalidComplexError(f"n_time must be an integer >= 2, got {n_time}")
    n = int(n_time)
    links = [Link(tail=t, head=t + 1, label=f"a{t + 1}") for t in range(n - 1)]
    links += [Link(tail=n + t, head=n + t + 1, label=f"b{t + 1}") for t in range(n - 1)]
    links += [Link(tail=t, head=n + t, label=f"r{t + 1}") for t in range(n)]

    def a(t): return t
    def b(t): return (n - 1) + t
    def r(t): return 2 * (n - 1) + t

    plaquettes = [
        Plaquette(f"s{t + 1}", ((r(t), 1), (b(t), 1), (r(t + 1), -1), (a(t), -1)))
        for t in range(n - 1)
    ]
    return ChainComplex(vertex_count=2 * n, links=tuple(links), plaquettes=tuple(plaquettes))


def correspondence_report(p: OscillatorParams) -> Dict[str, float]:
    """
    Compares oscillator_K with the ladder Laplacian.

    Returns:
        dict with the max entry difference at unit parameters, whether the
        sign/sparsity pattern of oscillator_K(p) matches the Laplacian, and the
        smallest Gershgorin margin (diagonal minus off-diagonal row sum) of
        oscillator_K(p).
    """
    n = int(p.n_time)
    laplacian = build_K(ladder_complex(n), 1.0)
    unit_K = oscillator_K(OscillatorParams.unit(n))
    K = oscillator_K(p)
    off_diagonal = np.abs(K).sum(axis=1) - np.abs(np.diag(K))
    margins = np.diag(K) - off_diagonal
    return {
        'n_time': n,
        'max_abs_difference_unit': float(np.max(np.abs(unit_K - laplacian))),
        'pattern_matches': bool(np.array_equal(np.sign(K), np.sign(laplacian))),
        'symmetric': bool(np.array_equal(K, K.T)),
        'min_gershgorin_margin': float(margins.min()),
    }
