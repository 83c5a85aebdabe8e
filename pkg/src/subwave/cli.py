"""Command-line front end: ``subwave {spectrum,evolve,sweep,verify}``.

Exit codes: 0 success, 2 usage, 3 not diagonalizable, 4 method mismatch,
5 verification failure.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import os
import re
import sys
from concurrent.futures import ProcessPoolExecutor
from datetime import datetime, timezone
from pathlib import Path

import numpy as np

from . import __version__
from .checks import run_all
from .coupling import ChainConfig, build_coupling_matrix, determinant_closed_form
from .dynamics import QubitState, evolve_eigen, evolve_ode
from .errors import IllConditioned, NoProtectedSubspace, NotDiagonalizable
from .spectral import SpectralDecomposition, decompose
from .storage import named_state, protected_symmetry

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_NOT_DIAGONALIZABLE = 3
EXIT_METHOD_MISMATCH = 4
EXIT_VERIFY_FAILED = 5

METHOD_TOLERANCE = 1e-5

_ANGLE_RE = re.compile(
    r"\s*(?P<sign>[+-]?)\s*(?P<num>(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?)?\s*\*?\s*(?P<pi>pi)?\s*",
    re.IGNORECASE,
)


def parse_angle_parts(text: str) -> tuple[float, bool]:
    """Split an angle into ``(coefficient, is_pi_multiple)``; ``"2.1pi" -> (2.1, True)``."""
    m = _ANGLE_RE.fullmatch(text)
    if m is None or (m.group("num") is None and m.group("pi") is None):
        raise ValueError(f"cannot parse angle {text!r}; expected <float>, <float>pi or pi")
    coefficient = float(m.group("num")) if m.group("num") is not None else 1.0
    if m.group("sign") == "-":
        coefficient = -coefficient
    return coefficient, m.group("pi") is not None


def parse_angle(text: str) -> float:
    """Angle in radians from ``<float>``, ``<float>pi`` or ``pi``."""
    coefficient, is_pi = parse_angle_parts(text)
    return coefficient * math.pi if is_pi else coefficient


def fmt(x: float) -> str:
    return f"{x:.17g}"


def _complex_json(z) -> dict:
    z = complex(z)
    return {"re": z.real, "im": z.imag}


def _config_json(config: ChainConfig) -> dict:
    return {"n": config.n, "theta": config.theta, "gamma0": config.gamma0}


class UsageError(Exception):
    pass


def _info(args, message: str) -> None:
    if not args.quiet:
        print(message, file=sys.stderr)


def _emit(args, text: str) -> list[str]:
    if args.out is None:
        sys.stdout.write(text)
        return []
    path = Path(args.out)
    if path.parent and not path.parent.exists():
        path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write(text)
    return [str(path)]


def _write_manifest(args, command: str, config: ChainConfig | None, outputs: list[str]) -> None:
    if not outputs:
        return
    skip = {"func", "command"}
    manifest = {
        "command": command,
        "config": _config_json(config) if config is not None else None,
        "options": {k: str(v) for k, v in vars(args).items() if k not in skip},
        "output_paths": outputs,
        "tool_version": __version__,
        "timestamp": datetime.now(timezone.utc).isoformat(),
    }
    path = Path(outputs[0]).with_name(Path(outputs[0]).name + ".manifest.json")
    path.write_text(json.dumps(manifest, indent=2) + "\n", encoding="utf-8")


def _csv_text(header: list[str], rows) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    writer.writerows(rows)
    return buf.getvalue()


def _config_from(args) -> ChainConfig:
    try:
        return ChainConfig(args.n, args.theta, args.gamma0)
    except ValueError as exc:
        raise UsageError(str(exc)) from exc


# --- spectrum -----------------------------------------------------------------


def spectrum_json(decomp: SpectralDecomposition) -> dict:
    return {
        "config": _config_json(decomp.config),
        "eigenvector_condition": decomp.eigenvector_condition,
        "modes": [
            {
                "eigenvalue": _complex_json(m.eigenvalue),
                "decay_rate": m.decay_rate,
                "frequency_shift": m.frequency_shift,
                "symmetry": m.symmetry.value,
                "eigenvector": [_complex_json(c) for c in m.eigenvector],
            }
            for m in decomp.modes
        ],
    }


def spectrum_csv(decomp: SpectralDecomposition) -> str:
    n = decomp.config.n
    header = ["index", "eigenvalue_re", "eigenvalue_im", "decay_rate", "frequency_shift", "symmetry"]
    for j in range(1, n + 1):
        header += [f"v{j}_re", f"v{j}_im"]
    rows = []
    for i, m in enumerate(decomp.modes):
        row = [i, fmt(m.eigenvalue.real), fmt(m.eigenvalue.imag), fmt(m.decay_rate), fmt(m.frequency_shift), m.symmetry.value]
        for c in m.eigenvector:
            row += [fmt(c.real), fmt(c.imag)]
        rows.append(row)
    return _csv_text(header, rows)


def cmd_spectrum(args) -> int:
    config = _config_from(args)
    try:
        decomp = decompose(build_coupling_matrix(config), config)
    except NotDiagonalizable as exc:
        print(f"error: {exc}; run `evolve --method ode` for dynamics at this theta", file=sys.stderr)
        return EXIT_NOT_DIAGONALIZABLE
    if args.format == "csv":
        text = spectrum_csv(decomp)
    else:
        text = json.dumps(spectrum_json(decomp), indent=2) + "\n"
    _write_manifest(args, "spectrum", config, _emit(args, text))
    return EXIT_OK


# --- evolve -------------------------------------------------------------------


def parse_state(spec: str, config: ChainConfig) -> tuple[QubitState, bool]:
    """Build the initial state from a ``--state`` value.

    Returns the state and whether a custom vector had to be renormalized.
    """
    names = {"dicke": "dicke", "alternating": "alternating", "sym-sub": "sym_subradiant", "antisym-sub": "antisym_subradiant"}
    if spec in names:
        try:
            return named_state(names[spec], config), False
        except ValueError as exc:
            raise UsageError(str(exc)) from exc
    if spec.startswith("single:"):
        try:
            index = int(spec.split(":", 1)[1])
            return named_state("single", config, index=index), False
        except ValueError as exc:
            raise UsageError(f"bad single-qubit state {spec!r}: {exc}") from exc
    if spec.startswith("custom:"):
        amps = []
        try:
            for pair in spec.split(":", 1)[1].split(","):
                parts = pair.split(":")
                if len(parts) == 1:
                    amps.append(complex(float(parts[0]), 0.0))
                elif len(parts) == 2:
                    amps.append(complex(float(parts[0]), float(parts[1])))
                else:
                    raise ValueError(pair)
        except ValueError as exc:
            raise UsageError(f"bad custom amplitude list {spec!r}") from exc
        if len(amps) != config.n:
            raise UsageError(f"custom state has {len(amps)} amplitudes, expected {config.n}")
        amps = np.array(amps)
        norm = np.linalg.norm(amps)
        if norm == 0:
            raise UsageError("custom state is the zero vector")
        return QubitState(amps / norm), abs(norm - 1) > 1e-12
    raise UsageError(f"unknown state {spec!r}")


def cmd_evolve(args) -> int:
    config = _config_from(args)
    if args.samples < 1:
        raise UsageError("--samples must be >= 1")
    if not args.tmax > 0:
        raise UsageError("--tmax must be positive")
    state, renormalized = parse_state(args.state, config)
    if renormalized:
        print("warning: custom state was not normalized; normalizing", file=sys.stderr)
    times = args.tmax * np.arange(args.samples + 1) / args.samples
    J = build_coupling_matrix(config)

    eigen_trace = ode_trace = None
    if args.method in ("eigen", "both"):
        try:
            eigen_trace = evolve_eigen(state, decompose(J, config), times)
        except (NotDiagonalizable, IllConditioned) as exc:
            if args.method == "eigen":
                print(f"error: {exc}; use --method ode", file=sys.stderr)
                return EXIT_NOT_DIAGONALIZABLE
            _info(args, f"warning: eigen path unavailable ({exc}); using ODE only")
    if args.method in ("ode", "both"):
        ode_trace = evolve_ode(state, J, config, times)

    exit_code = EXIT_OK
    if eigen_trace is not None and ode_trace is not None:
        deviation = float(np.linalg.norm(eigen_trace.amplitudes - ode_trace.amplitudes, axis=1).max())
        print(f"max eigen/ode amplitude deviation: {deviation:.3e}", file=sys.stderr)
        if deviation > METHOD_TOLERANCE:
            print(f"error: methods disagree by more than {METHOD_TOLERANCE:g}", file=sys.stderr)
            exit_code = EXIT_METHOD_MISMATCH

    trace = eigen_trace if eigen_trace is not None else ode_trace
    if args.format == "json":
        text = json.dumps(
            {
                "config": _config_json(config),
                "state": [_complex_json(a) for a in state.amplitudes],
                "t": trace.times.tolist(),
                "p_total": trace.total_probability.tolist(),
                "p_qubit": trace.per_qubit_probability.T.tolist(),
            },
            indent=2,
        ) + "\n"
    else:
        header = ["t", "p_total"] + [f"p_{j}" for j in range(1, config.n + 1)]
        rows = (
            [fmt(t), fmt(total)] + [fmt(p) for p in per]
            for t, total, per in zip(trace.times, trace.total_probability, trace.per_qubit_probability)
        )
        text = _csv_text(header, rows)
    outputs = _emit(args, text)
    if exit_code == EXIT_OK:
        _write_manifest(args, "evolve", config, outputs)
    return exit_code


# --- sweep --------------------------------------------------------------------

SWEEP_HEADER = ["theta", "min_decay_rate", "max_decay_rate", "det_abs", "protected_max_rate"]


def sweep_point(n: int, theta: float, gamma0: float) -> list[float]:
    config = ChainConfig(n, theta, gamma0)
    det_abs = abs(determinant_closed_form(config))
    try:
        decomp = decompose(build_coupling_matrix(config), config)
    except NotDiagonalizable:
        rates = gamma0 * np.linalg.eigvals(build_coupling_matrix(config)).real
        return [theta, float(rates.min()), float(rates.max()), det_abs, math.nan]
    rates = [m.decay_rate for m in decomp.modes]
    try:
        protected = protected_symmetry(config)
        protected_rates = [m.decay_rate for m in decomp.modes if m.symmetry is protected]
        protected_max = max(protected_rates) if protected_rates else math.nan
    except NoProtectedSubspace:
        protected_max = math.nan
    return [theta, min(rates), max(rates), det_abs, protected_max]


def sweep_grid(theta_min: str, theta_max: str, steps: int) -> np.ndarray:
    """Evenly spaced grid; pi multiples are interpolated before scaling by pi."""
    (a, a_pi), (b, b_pi) = parse_angle_parts(theta_min), parse_angle_parts(theta_max)
    if steps == 1:
        return np.array([a * math.pi if a_pi else a])
    fractions = np.arange(steps) / (steps - 1)
    if a_pi and b_pi:
        return (a + (b - a) * fractions) * math.pi
    lo = a * math.pi if a_pi else a
    hi = b * math.pi if b_pi else b
    return lo + (hi - lo) * fractions


def _sweep_worker(job):
    return sweep_point(*job)


def cmd_sweep(args) -> int:
    if args.format != "csv":
        raise UsageError("sweep only writes CSV")
    if args.steps < 1:
        raise UsageError("--steps must be >= 1")
    try:
        thetas = sweep_grid(args.theta_min, args.theta_max, args.steps)
    except ValueError as exc:
        raise UsageError(str(exc)) from exc
    config = _config_from(argparse.Namespace(n=args.n, theta=float(thetas[0]), gamma0=args.gamma0))
    jobs = [(config.n, float(t), config.gamma0) for t in thetas]
    if args.parallel and args.parallel > 1:
        with ProcessPoolExecutor(max_workers=args.parallel) as pool:
            rows = list(pool.map(_sweep_worker, jobs, chunksize=max(1, len(jobs) // (4 * args.parallel))))
    else:
        rows = [_sweep_worker(job) for job in jobs]
    text = _csv_text(SWEEP_HEADER, ([fmt(x) for x in row] for row in rows))
    _write_manifest(args, "sweep", config, _emit(args, text))
    return EXIT_OK


# --- verify -------------------------------------------------------------------


def cmd_verify(args) -> int:
    if args.format != "json":
        raise UsageError("verify only writes a JSON report")
    seed = args.seed
    if seed is None:
        env = os.environ.get("SUBWAVE_SEED")
        try:
            seed = int(env) if env is not None else 0
        except ValueError as exc:
            raise UsageError(f"SUBWAVE_SEED must be an integer, got {env!r}") from exc
    if args.n_max < 2 or args.trials < 1:
        raise UsageError("--n-max must be >= 2 and --trials >= 1")
    results = run_all(n_max=args.n_max, trials=args.trials, seed=seed)
    report = {
        "n_max": args.n_max,
        "trials": args.trials,
        "seed": seed,
        "passed": all(r.passed for r in results),
        "checks": [r.as_dict() for r in results],
    }
    for r in results:
        _info(args, f"{'PASS' if r.passed else 'FAIL'} {r.name}: {r.worst_residual:.3e} (tol {r.tolerance:g})")
    _write_manifest(args, "verify", None, _emit(args, json.dumps(report, indent=2) + "\n"))
    return EXIT_OK if report["passed"] else EXIT_VERIFY_FAILED


# --- entry point --------------------------------------------------------------


def _angle_arg(text: str) -> float:
    try:
        return parse_angle(text)
    except ValueError as exc:
        raise argparse.ArgumentTypeError(str(exc)) from exc


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--out", default=None, help="output file (default: stdout)")
    common.add_argument("--format", choices=["json", "csv"], default=None)
    common.add_argument("--quiet", action="store_true", help="suppress informational messages")

    parser = argparse.ArgumentParser(prog="subwave", description="Collective decay of qubits in a 1D waveguide.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    def chain_args(p, theta=True):
        p.add_argument("--n", type=int, required=True)
        if theta:
            p.add_argument("--theta", type=_angle_arg, required=True, help="phase, e.g. 0.5, pi, 2.1pi")
        p.add_argument("--gamma0", type=float, default=1.0)

    p = sub.add_parser("spectrum", parents=[common], help="decay modes of the coupling matrix")
    chain_args(p)
    p.set_defaults(func=cmd_spectrum, default_format="json")

    p = sub.add_parser("evolve", parents=[common], help="time evolution of an initial state")
    chain_args(p)
    p.add_argument("--state", default="dicke")
    p.add_argument("--tmax", type=float, default=10.0)
    p.add_argument("--samples", type=int, default=1000)
    p.add_argument("--method", choices=["eigen", "ode", "both"], default="both")
    p.set_defaults(func=cmd_evolve, default_format="csv")

    p = sub.add_parser("sweep", parents=[common], help="spectral quantities across a theta grid")
    chain_args(p, theta=False)
    p.add_argument("--theta-min", required=True)
    p.add_argument("--theta-max", required=True)
    p.add_argument("--steps", type=int, default=101)
    p.add_argument("--parallel", type=int, default=0)
    p.set_defaults(func=cmd_sweep, default_format="csv")

    p = sub.add_parser("verify", parents=[common], help="run the invariant suite")
    p.add_argument("--n-max", type=int, default=10)
    p.add_argument("--trials", type=int, default=100)
    p.add_argument("--seed", type=int, default=None)
    p.set_defaults(func=cmd_verify, default_format="json")
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.format is None:
        args.format = args.default_format
    del args.default_format
    try:
        return args.func(args)
    except UsageError as exc:
        parser.print_usage(sys.stderr)
        print(f"{parser.prog} {args.command}: error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
