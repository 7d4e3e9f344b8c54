import math
import os

import numpy as np
import pandas as pd
import pytest

from basic_capabilities.cli import run
from basic_capabilities.cosmology_toolbox.cosmology import CosmologyModel
from basic_capabilities.cosmology_toolbox.supernova_fit import synthesize_records
from basic_capabilities.graph_path_integral_toolbox.chain_complex import figure3_complex
from basic_capabilities.graph_path_integral_toolbox.gaussian_partition import partition_function
from basic_capabilities.graph_path_integral_toolbox.oscillator_lattice import ladder_complex
from basic_capabilities.graph_path_integral_toolbox.scc_engine import build_actional, build_K
from conftest import DATA_DIR

FIGURE3_GRAPH = os.path.join(DATA_DIR, 'figure3.graph')
TWO_VERTEX_GRAPH = os.path.join(DATA_DIR, 'two_vertex.graph')
ONES_LINKS = os.path.join(DATA_DIR, 'figure3_links_ones.csv')


def _report(path):
    df = pd.read_csv(path, dtype=str)
    return dict(zip(df['parameter'], df['value']))


def _write_union2(path, model, z):
    lines = [f"{r.name} {r.z!r} {r.mu!r} 0.15" for r in synthesize_records(model, z)]
    path.write_text("# synthetic\n" + "\n".join(lines) + "\n")
    return str(path)


class TestValidate:
    """validate subcommand."""

    def test_figure3_passes(self, capsys):
        assert run(['validate', FIGURE3_GRAPH]) == 0
        assert "∂₁∂₂ = 0: PASS, SCC: PASS" in capsys.readouterr().out

    def test_report_file(self, tmp_path):
        out = tmp_path / "validate.csv"
        assert run(['validate', FIGURE3_GRAPH, '--seed', '3', '--out', str(out)]) == 0
        report = _report(out)
        assert report['euler_characteristic'] == '1'
        assert report['components'] == '1'
        assert report['boundary_of_boundary_zero'] == 'True'
        assert float(report['scc_residual']) <= 1e-12

    def test_disconnected_graph_warns(self, tmp_path, capsys):
        path = tmp_path / "split.graph"
        path.write_text("vertices 4\nlink e1 v1 v2\nlink e2 v3 v4\n")
        assert run(['validate', str(path)]) == 0
        assert "2 connected components" in capsys.readouterr().err

    def test_open_plaquette_reports_module(self, tmp_path, capsys):
        path = tmp_path / "open.graph"
        path.write_text("vertices 3\nlink a v1 v2\nlink b v2 v3\nplaquette p +a +b\n")
        assert run(['validate', str(path)]) == 1
        assert "❌ [chain_complex]" in capsys.readouterr().err


class TestUsageErrors:
    """Exit code 2 for bad invocations."""

    def test_unknown_flag(self):
        assert run(['validate', FIGURE3_GRAPH, '--frobnicate']) == 2

    def test_missing_subcommand(self):
        assert run([]) == 2

    def test_missing_file(self, tmp_path):
        assert run(['validate', str(tmp_path / "absent.graph")]) == 2

    def test_mode_and_vertex_are_exclusive(self):
        assert run(['probability', FIGURE3_GRAPH, '--links', ONES_LINKS,
                    '--mode', '1', '--vertex', '1', '--value', '0']) == 2


class TestGraphSubcommands:
    """partition, probability, classical, oscillator and mc-check."""

    def test_partition_report(self, tmp_path):
        out, modes = tmp_path / "partition.csv", tmp_path / "modes.csv"
        assert run(['partition', FIGURE3_GRAPH, '--links', ONES_LINKS, '--out', str(out), '--modes', str(modes)]) == 0
        report = _report(out)
        expected = partition_function(build_actional(figure3_complex(), np.ones(7)))
        assert report['row_space_modes'] == '5'
        assert float(report['Z']) == pytest.approx(expected.Z, rel=1e-11)
        assert float(report['log_Z']) == pytest.approx(expected.log_Z, rel=1e-11)
        assert 'eigenvalue_5' in report and 'J_tilde_1' in report
        assert len(pd.read_csv(modes)) == 6

    def test_partition_to_stdout_with_twelve_digits(self, tmp_path, capsys):
        links = tmp_path / "links.csv"
        links.write_text("link,value\ne1,1\n")
        assert run(['partition', TWO_VERTEX_GRAPH, '--links', str(links)]) == 0
        out = capsys.readouterr().out
        assert out.startswith("parameter,value\n")
        value = next(line for line in out.splitlines() if line.startswith("Z,")).split(",")[1]
        assert float(value) == pytest.approx(math.sqrt(math.pi) * math.exp(0.5), rel=1e-11)
        assert len(value.replace(".", "").lstrip("0")) <= 12

    def test_probability_mode(self, tmp_path):
        out = tmp_path / "p.csv"
        assert run(['probability', FIGURE3_GRAPH, '--links', ONES_LINKS, '--mode', '1', '--value', '0.25',
                    '--out', str(out)]) == 0
        report = _report(out)
        a = float(report['eigenvalue'])
        Jt = float(report['J_tilde'])
        expected = math.sqrt(a / (2 * math.pi)) * math.exp(-0.5 * 0.25 ** 2 * a + Jt * 0.25 - Jt ** 2 / (2 * a))
        assert float(report['density']) == pytest.approx(expected, rel=1e-10)

    def test_probability_null_mode_fails(self, capsys):
        assert run(['probability', FIGURE3_GRAPH, '--links', ONES_LINKS, '--mode', '6', '--value', '0']) == 1
        assert "❌ [gaussian_partition]" in capsys.readouterr().err

    def test_probability_vertex(self, tmp_path):
        out = tmp_path / "p.csv"
        assert run(['probability', FIGURE3_GRAPH, '--links', ONES_LINKS, '--vertex', '6', '--value', '0.5',
                    '--out', str(out)]) == 0
        assert _report(out)['vertex'] == 'v6'

    def test_classical(self, tmp_path):
        out = tmp_path / "q0.csv"
        assert run(['classical', FIGURE3_GRAPH, '--links', ONES_LINKS, '--out', str(out)]) == 0
        q0 = pd.read_csv(out)
        assert q0['vertex'].tolist() == ['v1', 'v2', 'v3', 'v4', 'v5', 'v6']
        K = build_K(figure3_complex(), 1.0)
        assert K @ q0['value'].to_numpy() == pytest.approx([-2.0, -1.0, 0.0, 0.0, 1.0, 2.0], abs=1e-10)

    def test_bad_link_file_reports_module(self, tmp_path, capsys):
        links = tmp_path / "links.csv"
        links.write_text("link,value\ne1,1\ne9,1\n")
        assert run(['classical', FIGURE3_GRAPH, '--links', str(links)]) == 1
        assert "❌ [scc_engine]" in capsys.readouterr().err

    def test_oscillator_matrix(self, tmp_path):
        out = tmp_path / "K.csv"
        assert run(['oscillator', '--n-time', '4', '--out', str(out)]) == 0
        K = pd.read_csv(out).drop(columns='row').to_numpy()
        assert np.array_equal(K, build_K(ladder_complex(4), 1.0))

    def test_oscillator_invalid_parameters(self):
        assert run(['oscillator', '--n-time', '4', '--k12', '0.5']) == 1

    def test_mc_check(self, tmp_path):
        out = tmp_path / "mc.csv"
        assert run(['mc-check', FIGURE3_GRAPH, '--links', ONES_LINKS, '--samples', '200000', '--seed', '17',
                    '--out', str(out)]) == 0
        report = _report(out)
        assert abs(float(report['z_score'])) <= 3.0
        assert report['seed'] == '17'


class TestCosmoSubcommands:
    """cosmo fit/curve/regress and plot."""

    def test_curve(self, tmp_path):
        out = tmp_path / "curve.csv"
        assert run(['cosmo', 'curve', '--model', 'lcdm', '--params', 'H0=69.2,Omega_M=0.29',
                    '--zmax', '1.5', '--steps', '10', '--out', str(out)]) == 0
        df = pd.read_csv(out)
        assert list(df.columns) == ['z', 'D_p_Gpc', 'D_L_Gpc', 'mu']
        assert len(df) == 10

    def test_curve_bad_params(self):
        assert run(['cosmo', 'curve', '--model', 'morc', '--params', 'H0=70']) == 1

    def test_fit_and_plot(self, tmp_path):
        data = _write_union2(tmp_path / "union2.txt", CosmologyModel('eds', H0=63.0), np.linspace(0.02, 1.3, 40))
        out, residuals = tmp_path / "fit.csv", tmp_path / "residuals.csv"
        assert run(['cosmo', 'fit', '--model', 'eds', '--data', data,
                    '--out', str(out), '--residuals', str(residuals)]) == 0
        report = _report(out)
        assert report['model'] == 'EdS'
        assert float(report['H0']) == pytest.approx(63.0, rel=1e-3)
        assert report['residual_space'] == 'log_dl'

        first, second = tmp_path / "a.svg", tmp_path / "b.svg"
        assert run(['plot', '--in', str(residuals), '--label', 'EdS', '--out', str(first)]) == 0
        assert run(['plot', '--in', str(residuals), '--label', 'EdS', '--out', str(second)]) == 0
        assert first.read_bytes() == second.read_bytes()

    def test_regress(self, tmp_path):
        data = _write_union2(tmp_path / "union2.txt", CosmologyModel('eds', H0=63.0), np.linspace(0.02, 1.3, 40))
        out = tmp_path / "regress.csv"
        assert run(['cosmo', 'regress', '--data', data, '--out', str(out)]) == 0
        assert float(_report(out)['correlation']) > 0.99

    def test_fit_bad_data_line(self, tmp_path, capsys):
        data = tmp_path / "bad.txt"
        data.write_text("sn1 0.1 38.0 0.1\nsn2 0.2\n")
        assert run(['cosmo', 'fit', '--model', 'eds', '--data', str(data)]) == 1
        assert "line 2" in capsys.readouterr().err

    def test_plot_label_count_mismatch(self, tmp_path):
        path = tmp_path / "r.csv"
        pd.DataFrame({'name': ['a'], 'z': [0.1], 'observed': [0.0], 'predicted': [0.0], 'residual': [0.0]}) \
            .to_csv(path, index=False)
        assert run(['plot', '--in', str(path), '--label', 'x', '--label', 'y', '--out', str(tmp_path / "p.svg")]) == 1


class TestBadInputFiles:
    """Malformed input files end in a module-tagged error and exit 1."""

    def test_non_numeric_link_value(self, tmp_path, capsys):
        links = tmp_path / "links.csv"
        links.write_text("link,value\ne1,abc\n")
        assert run(['partition', TWO_VERTEX_GRAPH, '--links', str(links)]) == 1
        err = capsys.readouterr().err
        assert "❌ [scc_engine]" in err and "non-numeric" in err

    def test_empty_link_file(self, tmp_path, capsys):
        links = tmp_path / "links.csv"
        links.write_text("")
        assert run(['classical', FIGURE3_GRAPH, '--links', str(links)]) == 1
        assert "❌ [scc_engine]" in capsys.readouterr().err

    def test_duplicate_link_value(self, tmp_path, capsys):
        links = tmp_path / "links.csv"
        links.write_text("link,value\ne1,1\ne1,2\n")
        assert run(['partition', TWO_VERTEX_GRAPH, '--links', str(links)]) == 1
        assert "more than once" in capsys.readouterr().err

    def test_binary_graph_file(self, tmp_path, capsys):
        path = tmp_path / "binary.graph"
        path.write_bytes(b"vertices 2\nlink e1 v1 v2\n\xff\xfe\n")
        assert run(['validate', str(path)]) == 1
        assert "❌ [chain_complex]" in capsys.readouterr().err

    def test_binary_union2_file(self, tmp_path, capsys):
        path = tmp_path / "union2.txt"
        path.write_bytes(b"sn1 0.1 38.0 0.1\n\xff\n")
        assert run(['cosmo', 'regress', '--data', str(path)]) == 1
        assert "❌ [supernova_fit]" in capsys.readouterr().err

    def test_malformed_plaquette_sign(self, tmp_path, capsys):
        path = tmp_path / "signs.graph"
        path.write_text("vertices 3\nlink a v1 v2\nlink b v2 v3\nlink c v1 v3\nplaquette t +a ++b -c\n")
        assert run(['validate', str(path)]) == 1
        assert "line 5" in capsys.readouterr().err


class TestVertexAndOverflowChecks:
    """validate --vertices and mc-check in log space."""

    def test_validate_with_vertex_file(self, tmp_path, capsys):
        vertices = tmp_path / "vertices.csv"
        vertices.write_text("vertex,value\nv1,0.5\nv2,-1\nv3,2\nv4,0\nv5,3.25\nv6,-0.75\n")
        out = tmp_path / "validate.csv"
        assert run(['validate', FIGURE3_GRAPH, '--vertices', str(vertices), '--out', str(out)]) == 0
        assert "SCC: PASS" in capsys.readouterr().out
        assert float(_report(out)['scc_residual']) <= 1e-12

    def test_validate_with_bad_vertex_file(self, tmp_path):
        vertices = tmp_path / "vertices.csv"
        vertices.write_text("vertex,value\nv1,0\nv7,1\n")
        assert run(['validate', FIGURE3_GRAPH, '--vertices', str(vertices)]) == 1

    def test_mc_check_when_z_overflows(self, tmp_path):
        links = tmp_path / "links.csv"
        links.write_text("link,value\ne1,40\n")
        out = tmp_path / "mc.csv"
        assert run(['mc-check', TWO_VERTEX_GRAPH, '--links', str(links), '--samples', '20000', '--seed', '1',
                    '--out', str(out)]) == 0
        report = _report(out)
        assert report['Z_closed_form'] == 'inf'
        assert float(report['log_Z_closed_form']) == pytest.approx(800.0 + 0.5 * math.log(math.pi))
        assert float(report['log_Z_monte_carlo']) == pytest.approx(float(report['log_Z_closed_form']), rel=1e-3)
        assert abs(float(report['z_score'])) <= 3.0
