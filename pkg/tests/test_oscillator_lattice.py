import numpy as np
import pytest

from basic_capabilities.graph_path_integral_toolbox.chain_complex import (
    figure3_complex,
    same_complex_up_to_link_order,
    verify_boundary_of_boundary,
)
from basic_capabilities.graph_path_integral_toolbox.errors import DimensionMismatchError, InvalidComplexError
from basic_capabilities.graph_path_integral_toolbox.oscillator_lattice import (
    OscillatorParams,
    correspondence_report,
    ladder_complex,
    lattice_action,
    oscillator_K,
    oscillator_potential,
    source_vector,
    spring_constants,
)
from basic_capabilities.graph_path_integral_toolbox.scc_engine import build_K


class TestOscillatorParams:
    """Parameter validation and the spring picture."""

    def test_unit_parameters(self):
        p = OscillatorParams.unit(4)
        assert (p.m, p.k, p.k12, p.dt, p.n_time) == (1.0, 1.0, -1.0, 1.0, 4)
        assert spring_constants(p) == (0.0, 0.0, 1.0)

    def test_spring_constants(self):
        """k = k1 + k3 and k12 = -k3."""
        k1, k2, k3 = spring_constants(OscillatorParams(m=1.0, k=3.0, k12=-0.5, dt=0.1, n_time=3))
        assert (k1, k2, k3) == (2.5, 2.5, 0.5)

    @pytest.mark.parametrize("kwargs", [
        dict(m=0.0, k=1.0, k12=-1.0, dt=1.0, n_time=3),
        dict(m=1.0, k=1.0, k12=-1.0, dt=0.0, n_time=3),
        dict(m=1.0, k=1.0, k12=0.5, dt=1.0, n_time=3),
        dict(m=1.0, k=0.5, k12=-1.0, dt=1.0, n_time=3),
        dict(m=1.0, k=1.0, k12=-1.0, dt=1.0, n_time=1),
    ])
    def test_invalid_parameters(self, kwargs):
        with pytest.raises(InvalidComplexError):
            OscillatorParams(**kwargs)

    def test_potential(self):
        p = OscillatorParams(m=1.0, k=2.0, k12=-0.5, dt=1.0, n_time=2)
        assert oscillator_potential(1.0, 2.0, p) == pytest.approx(0.5 * 2.0 + 0.5 * 2.0 * 4.0 - 0.5 * 2.0)


class TestLadderComplex:
    """Two time chains joined by rungs."""

    @pytest.mark.parametrize("n_time", range(2, 9))
    def test_counts_and_closure(self, n_time):
        cc = ladder_complex(n_time)
        assert cc.vertex_count == 2 * n_time
        assert cc.link_count == 3 * n_time - 2
        assert cc.plaquette_count == n_time - 1
        assert verify_boundary_of_boundary(cc)[0]

    def test_three_steps_is_the_six_vertex_example(self):
        """n_time = 3 has the links and plaquette orientations of the built-in example."""
        assert same_complex_up_to_link_order(ladder_complex(3), figure3_complex())

    def test_too_short(self):
        with pytest.raises(InvalidComplexError):
            ladder_complex(1)


class TestOscillatorK:
    """Difference matrix of the discretized action."""

    @pytest.mark.parametrize("n_time", range(2, 9))
    def test_unit_parameters_give_ladder_laplacian(self, n_time):
        """m/dt = k dt = -k12 dt = 1 reproduces the ladder Laplacian exactly."""
        K = oscillator_K(OscillatorParams.unit(n_time))
        assert np.array_equal(K, build_K(ladder_complex(n_time), 1.0))

    def test_unit_parameters_scaled_dt(self):
        """m = 2, dt = 2, k = 0.5, k12 = -0.5 also has unit ratios."""
        p = OscillatorParams(m=2.0, k=0.5, k12=-0.5, dt=2.0, n_time=5)
        assert np.array_equal(oscillator_K(p), build_K(ladder_complex(5), 1.0))

    def test_symmetric_positive_definite(self):
        p = OscillatorParams(m=1.3, k=2.0, k12=-0.7, dt=0.1, n_time=6)
        K = oscillator_K(p)
        assert np.array_equal(K, K.T)
        assert np.linalg.eigvalsh(K).min() > 0

    @pytest.mark.parametrize("p", [
        OscillatorParams.unit(4),
        OscillatorParams(m=1.3, k=2.0, k12=-0.7, dt=0.1, n_time=5),
        OscillatorParams(m=0.4, k=5.0, k12=-2.0, dt=0.25, n_time=8),
    ])
    def test_quadratic_form_matches_lattice_sum(self, p):
        """1/2 Q.K.Q - (j dt).Q equals the term-by-term lattice action for 100 random fields."""
        rng = np.random.default_rng(p.n_time)
        K = oscillator_K(p)
        n = p.n_time
        for _ in range(100):
            q1, q2 = rng.normal(size=n), rng.normal(size=n)
            j1, j2 = rng.normal(size=n), rng.normal(size=n)
            Q = np.concatenate([q1, q2])
            quadratic = 0.5 * Q @ K @ Q - source_vector(j1, j2, p) @ Q
            direct = lattice_action(q1, q2, j1, j2, p)
            assert quadratic == pytest.approx(direct, rel=1e-10, abs=1e-12)

    def test_scalar_sources_broadcast(self):
        p = OscillatorParams.unit(3)
        assert source_vector(1.0, -2.0, p).tolist() == [1.0, 1.0, 1.0, -2.0, -2.0, -2.0]

    def test_field_length_mismatch(self):
        with pytest.raises(DimensionMismatchError):
            lattice_action(np.zeros(3), np.zeros(4), 0.0, 0.0, OscillatorParams.unit(3))


class TestCorrespondenceReport:
    """Comparison of oscillator_K with the ladder Laplacian."""

    def test_unit_report(self):
        report = correspondence_report(OscillatorParams.unit(5))
        assert report['n_time'] == 5
        assert report['max_abs_difference_unit'] == 0.0
        assert report['pattern_matches'] is True
        assert report['symmetric'] is True
        assert report['min_gershgorin_margin'] == pytest.approx(0.0)

    def test_general_parameters_keep_the_pattern(self):
        """Positive wall springs make every row strictly diagonally dominant."""
        report = correspondence_report(OscillatorParams(m=1.3, k=2.0, k12=-0.7, dt=0.1, n_time=6))
        assert report['pattern_matches'] is True
        assert report['min_gershgorin_margin'] == pytest.approx((2.0 - 0.7) * 0.1)
