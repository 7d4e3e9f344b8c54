"""
Theory X command-line entry point.

Subcommands:
    validate <graph> [--vertices CSV]     boundary-of-boundary and SCC checks
    partition <graph> --links CSV         restricted partition function report
    probability <graph> --links CSV       outcome density for one mode or vertex
    classical <graph> --links CSV         most probable (classical) field Q0
    oscillator --n-time N ...             coupled-oscillator difference matrix
    mc-check <graph> --links CSV          closed-form Z against the Monte-Carlo oracle
    cosmo fit|curve|regress               Union2 supernova fits and distance curves
    plot --in residuals.csv --out FILE    two-panel Hubble diagram (SVG)

Exit codes: 0 success, 1 validation or computation failure, 2 usage error
(bad flags, missing input file). CSV goes to stdout unless --out is given;
logs and status lines go to stderr.
"""
import argparse
import logging
import math
import sys
from typing import Dict, List, Optional, Sequence

import numpy as np

from basic_capabilities.graph_path_integral_toolbox import config
from basic_capabilities.graph_path_integral_toolbox.chain_complex import (
    connected_components,
    euler_characteristic,
    load_graph,
    verify_boundary_of_boundary,
)
from basic_capabilities.graph_path_integral_toolbox.errors import TheoryXError
from basic_capabilities.graph_path_integral_toolbox.gaussian_partition import (
    mc_oracle_log_partition,
    mode_table,
    most_probable_field,
    most_probable_mode_value,
    outcome_probability,
    partition_function,
    spectrum,
    vertex_probability,
)
from basic_capabilities.graph_path_integral_toolbox.oscillator_lattice import (
    OscillatorParams,
    correspondence_report,
    oscillator_K,
)
from basic_capabilities.graph_path_integral_toolbox.report_utils import (
    key_value_frame,
    matrix_frame,
    vector_frame,
    write_frame,
    write_text,
)
from basic_capabilities.graph_path_integral_toolbox.scc_engine import (
    build_actional,
    build_J,
    divergence,
    load_link_values,
    load_vertex_values,
    verify_scc,
)
from basic_capabilities.cosmology_toolbox.cosmology import (
    FREE_PARAMETERS,
    MODEL_KINDS,
    CosmologyModel,
    distance_curve,
)
from basic_capabilities.cosmology_toolbox.hubble_plot import hubble_diagram_svg, load_residual_table
from basic_capabilities.cosmology_toolbox.supernova_fit import (
    RESIDUAL_SPACES,
    FitConfig,
    fit_model,
    fit_report,
    load_union2,
    loglog_regression,
    residual_table,
)

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_FAILURE = 1
EXIT_USAGE = 2

SCC_TOLERANCE = 1e-12


def status(message: str) -> None:
    print(message, file=sys.stderr)


def _common_flags() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--out", type=str, default=None, help="Output path (default: stdout)")
    common.add_argument("--verbose", action="store_true", help="Debug logging and progress bars")
    return common


def _actional_flags() -> argparse.ArgumentParser:
    actional = argparse.ArgumentParser(add_help=False)
    actional.add_argument("graph", type=str, help="Graph file (vertices/link/plaquette lines)")
    actional.add_argument("--links", type=str, required=True, help="CSV with header link,value")
    actional.add_argument("--alpha", type=float, default=1.0, help="Source scale alpha (default: 1)")
    actional.add_argument("--beta", type=float, default=1.0, help="Difference-matrix scale beta (default: 1)")
    return actional


def build_parser() -> argparse.ArgumentParser:
    """Parses command-line arguments."""
    common = _common_flags()
    actional = _actional_flags()
    parser = argparse.ArgumentParser(
        prog="theory_x",
        description="Discrete graphical path integrals and the Union2 cosmology fits.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    validate = sub.add_parser("validate", parents=[common], help="Check d1.d2 = 0 and the SCC identity")
    validate.add_argument("graph", type=str)
    validate.add_argument("--seed", type=int, default=0, help="Seed for the random SCC vertex vector")
    validate.add_argument("--vertices", type=str, default=None,
                          help="CSV with header vertex,value to check instead of a random vector")

    partition = sub.add_parser("partition", parents=[common, actional], help="Row-space restricted partition function")
    partition.add_argument("--modes", type=str, default=None, help="Also write the per-mode table here")

    probability = sub.add_parser("probability", parents=[common, actional], help="Outcome probability density")
    target = probability.add_mutually_exclusive_group(required=True)
    target.add_argument("--mode", type=int, help="1-based eigenmode index (descending eigenvalues)")
    target.add_argument("--vertex", type=int, help="1-based vertex index (marginal density)")
    probability.add_argument("--value", type=float, required=True, help="Outcome value q0")

    sub.add_parser("classical", parents=[common, actional], help="Most probable field Q0 (minimum norm)")

    oscillator = sub.add_parser("oscillator", parents=[common], help="Coupled-oscillator difference matrix")
    oscillator.add_argument("--n-time", dest="n_time", type=int, required=True)
    oscillator.add_argument("--m", type=float, default=1.0)
    oscillator.add_argument("--k", type=float, default=1.0)
    oscillator.add_argument("--k12", type=float, default=-1.0)
    oscillator.add_argument("--dt", type=float, default=1.0)
    oscillator.add_argument("--report", type=str, default=None, help="Also write the correspondence report here")

    mc = sub.add_parser("mc-check", parents=[common, actional], help="Closed-form Z against the MC oracle")
    mc.add_argument("--samples", type=int, default=1_000_000)
    mc.add_argument("--seed", type=int, required=True)
    mc.add_argument("--workers", type=int, default=config.MC_MAX_WORKERS)

    cosmo = sub.add_parser("cosmo", help="Supernova cosmology")
    cosmo_sub = cosmo.add_subparsers(dest="cosmo_command", required=True)

    fit = cosmo_sub.add_parser("fit", parents=[common], help="Fit a model to Union2")
    fit.add_argument("--model", choices=MODEL_KINDS, required=True)
    fit.add_argument("--data", type=str, required=True, help="Union2 text file")
    fit.add_argument("--residuals", type=str, default=None, help="Also write the residual table here")
    fit.add_argument("--residual-space", dest="residual_space", choices=RESIDUAL_SPACES, default="log_dl")
    fit.add_argument("--initial", type=str, default=None, help="Start point, e.g. H0=70,Omega_M=0.3")

    curve = cosmo_sub.add_parser("curve", parents=[common], help="Tabulate D_p, D_L and mu")
    curve.add_argument("--model", choices=MODEL_KINDS, required=True)
    curve.add_argument("--params", type=str, required=True, help="e.g. H0=70,Omega_M=0.3")
    curve.add_argument("--zmax", type=float, default=1.5)
    curve.add_argument("--steps", type=int, default=150)

    regress = cosmo_sub.add_parser("regress", parents=[common], help="log-log regression of D_L on z")
    regress.add_argument("--data", type=str, required=True)

    plot = sub.add_parser("plot", parents=[common], help="Hubble diagram from residual tables")
    plot.add_argument("--in", dest="inputs", action="append", required=True, help="Residual CSV (repeatable)")
    plot.add_argument("--label", dest="labels", action="append", default=None, help="Curve label per --in")
    return parser


def _parse_params(text: str, kind: str) -> List[float]:
    values: Dict[str, float] = {}
    for item in filter(None, (part.strip() for part in text.split(','))):
        if '=' not in item:
            raise TheoryXError(f"parameter '{item}' is not of the form name=value")
        name, value = item.split('=', 1)
        try:
            values[name.strip()] = float(value)
        except ValueError:
            raise TheoryXError(f"parameter {name.strip()} has non-numeric value '{value}'") from None
    names = FREE_PARAMETERS[kind]
    unknown = sorted(set(values) - set(names))
    missing = [name for name in names if name not in values]
    if unknown or missing:
        raise TheoryXError(f"{kind} takes parameters {', '.join(names)} (missing {missing}, unknown {unknown})")
    return [values[name] for name in names]


def _exp_or_inf(log_value: float) -> float:
    try:
        return math.exp(log_value)
    except OverflowError:
        return math.inf


def _load_actional(args):
    cc = load_graph(args.graph)
    e = load_link_values(args.links, cc)
    return cc, build_actional(cc, e, args.alpha, args.beta)


# --- Subcommand handlers ---

def cmd_validate(args) -> int:
    cc = load_graph(args.graph)
    closed, residual = verify_boundary_of_boundary(cc)
    components = connected_components(cc)
    if len(components) > 1:
        logger.warning(f"graph has {len(components)} connected components; K has that many gauge modes")
        status(f"⚠️  {len(components)} connected components")

    rng = np.random.default_rng(args.seed)
    v = rng.uniform(-1.0, 1.0, cc.vertex_count)
    if args.vertices:
        v = load_vertex_values(args.vertices, cc)
    scc_residual = verify_scc(cc, v)
    e = rng.uniform(-1.0, 1.0, cc.link_count)
    J_sum = abs(divergence(build_J(cc, e)))
    scc_ok = (scc_residual <= SCC_TOLERANCE * max(np.max(np.abs(v)), 1.0)
              and J_sum <= SCC_TOLERANCE * max(np.sum(np.abs(e)), 1.0))

    print(f"∂₁∂₂ = 0: {'PASS' if closed else 'FAIL'}, SCC: {'PASS' if scc_ok else 'FAIL'}")
    if args.out:
        write_frame(key_value_frame({
            'vertices': cc.vertex_count,
            'links': cc.link_count,
            'plaquettes': cc.plaquette_count,
            'euler_characteristic': euler_characteristic(cc),
            'components': len(components),
            'boundary_of_boundary_zero': closed,
            'boundary_of_boundary_max_abs': int(np.max(np.abs(residual))) if residual.size else 0,
            'scc_residual': scc_residual,
            'divergence_abs': J_sum,
            'scc_pass': scc_ok,
        }), args.out)
    if not closed:
        status(f"❌ d1.d2 has nonzero entries:\n{residual}")
    return EXIT_OK if closed and scc_ok else EXIT_FAILURE


def cmd_partition(args) -> int:
    _, actional = _load_actional(args)
    result = partition_function(actional)
    report = {'vertices': actional.size, 'row_space_modes': len(result.modes), 'log_Z': result.log_Z, 'Z': result.Z}
    for i, mode in enumerate(result.modes, start=1):
        report[f'eigenvalue_{i}'] = mode.eigenvalue
        report[f'J_tilde_{i}'] = mode.source_component
        report[f'log_contribution_{i}'] = mode.log_contribution
    write_frame(key_value_frame(report), args.out)
    if args.modes:
        write_frame(mode_table(actional), args.modes)
    status(f"📊 Z = {config.FLOAT_FORMAT % result.Z} (log Z = {config.FLOAT_FORMAT % result.log_Z})")
    return EXIT_OK


def cmd_probability(args) -> int:
    cc, actional = _load_actional(args)
    if args.mode is not None:
        k = args.mode - 1
        spec = spectrum(actional.K)
        density = outcome_probability(actional, k, args.value)
        report = {
            'mode': args.mode,
            'eigenvalue': float(spec.eigenvalues[k]),
            'J_tilde': float(spec.to_eigenbasis(actional.J)[k]),
            'most_probable': most_probable_mode_value(actional, k),
            'q0': args.value,
            'density': density,
        }
    else:
        if not 1 <= args.vertex <= cc.vertex_count:
            raise TheoryXError(f"--vertex must be in 1..{cc.vertex_count}, got {args.vertex}")
        report = {
            'vertex': cc.vertex_labels()[args.vertex - 1],
            'most_probable': float(most_probable_field(actional)[args.vertex - 1]),
            'q0': args.value,
            'density': vertex_probability(actional, args.vertex - 1, args.value),
        }
    write_frame(key_value_frame(report), args.out)
    return EXIT_OK


def cmd_classical(args) -> int:
    cc, actional = _load_actional(args)
    q0 = most_probable_field(actional)
    write_frame(vector_frame(q0, cc.vertex_labels()), args.out)
    status("📊 Q0 is the minimum-norm solution of K.Q0 = J; Q0 + c*1 solves it for every c")
    return EXIT_OK


def cmd_oscillator(args) -> int:
    p = OscillatorParams(m=args.m, k=args.k, k12=args.k12, dt=args.dt, n_time=args.n_time)
    K = oscillator_K(p)
    n = p.n_time
    labels = [f"q1_t{t + 1}" for t in range(n)] + [f"q2_t{t + 1}" for t in range(n)]
    write_frame(matrix_frame(K, labels, labels), args.out)
    report = correspondence_report(p)
    for key, value in report.items():
        status(f"📊 {key}: {value}")
    if args.report:
        write_frame(key_value_frame(report), args.report)
    return EXIT_OK


def cmd_mc_check(args) -> int:
    _, actional = _load_actional(args)
    closed_form = partition_function(actional)
    mc = mc_oracle_log_partition(
        actional, args.samples, args.seed, max_workers=args.workers, show_progress=args.verbose,
    )
    z_score = mc.z_score(closed_form.log_Z)
    write_frame(key_value_frame({
        'log_Z_closed_form': closed_form.log_Z,
        'log_Z_monte_carlo': mc.log_estimate,
        'relative_standard_error': mc.relative_standard_error,
        'Z_closed_form': closed_form.Z,
        'Z_monte_carlo': _exp_or_inf(mc.log_estimate),
        'z_score': z_score,
        'samples': args.samples,
        'seed': args.seed,
    }), args.out)
    if abs(z_score) > 3.0:
        status(f"❌ MC estimate is {z_score:.2f} standard errors from the closed form")
        return EXIT_FAILURE
    status(f"✅ MC estimate within {abs(z_score):.2f} standard errors")
    return EXIT_OK


def cmd_cosmo_fit(args) -> int:
    records = load_union2(args.data)
    initial = _parse_params(args.initial, args.model) if args.initial else None
    fit_config = FitConfig(residual_space=args.residual_space, show_progress=args.verbose)
    result = fit_model(args.model, records, fit_config=fit_config, initial=initial)
    write_frame(fit_report(result), args.out)
    if args.residuals:
        write_frame(residual_table(result.model, records), args.residuals)
    status(f"{'✅' if result.converged else '⚠️ '} {result.model.label}: {result.parameters}, SSE = {result.sse:.4f}")
    return EXIT_OK if result.converged else EXIT_FAILURE


def cmd_cosmo_curve(args) -> int:
    model = CosmologyModel.from_parameters(args.model, _parse_params(args.params, args.model))
    write_frame(distance_curve(model, args.zmax, args.steps), args.out)
    return EXIT_OK


def cmd_cosmo_regress(args) -> int:
    result = loglog_regression(load_union2(args.data))
    write_frame(fit_report(result), args.out)
    status(f"📊 correlation = {result.correlation:.4f}, SSE = {result.sse:.4f}")
    return EXIT_OK


def cmd_plot(args) -> int:
    labels = args.labels or []
    if labels and len(labels) != len(args.inputs):
        raise TheoryXError("give one --label per --in, or none")
    tables = [
        (labels[i] if labels else f"model {i + 1}", load_residual_table(path))
        for i, path in enumerate(args.inputs)
    ]
    write_text(hubble_diagram_svg(tables), args.out)
    return EXIT_OK


COMMANDS = {
    'validate': cmd_validate,
    'partition': cmd_partition,
    'probability': cmd_probability,
    'classical': cmd_classical,
    'oscillator': cmd_oscillator,
    'mc-check': cmd_mc_check,
    'plot': cmd_plot,
}
COSMO_COMMANDS = {
    'fit': cmd_cosmo_fit,
    'curve': cmd_cosmo_curve,
    'regress': cmd_cosmo_regress,
}


def _failing_module(error: BaseException) -> str:
    tb = error.__traceback__
    module = __name__
    while tb is not None:
        module = tb.tb_frame.f_globals.get('__name__', module)
        tb = tb.tb_next
    return module.rsplit('.', 1)[-1]


def run(argv: Optional[Sequence[str]] = None) -> int:
    """
    Runs one subcommand and returns its exit code.

    Args:
        argv: Argument list without the program name (default: sys.argv[1:]).
    """
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return EXIT_OK if e.code in (0, None) else EXIT_USAGE

    logging.basicConfig(
        level=logging.DEBUG if getattr(args, 'verbose', False) else logging.INFO,
        format='%(asctime)s - %(levelname)s - %(message)s',
        stream=sys.stderr,
    )
    if getattr(args, 'verbose', False):
        logging.getLogger().setLevel(logging.DEBUG)

    handler = COSMO_COMMANDS[args.cosmo_command] if args.command == 'cosmo' else COMMANDS[args.command]
    try:
        return handler(args)
    except TheoryXError as e:
        status(f"❌ [{_failing_module(e)}] {e}")
        return EXIT_FAILURE
    except (FileNotFoundError, IsADirectoryError, PermissionError) as e:
        status(f"❌ [input] {e}")
        return EXIT_USAGE


def main():
    """Main execution function."""
    sys.exit(run(sys.argv[1:]))


if __name__ == "__main__":
    main()
