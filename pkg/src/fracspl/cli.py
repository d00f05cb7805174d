"""Command-line front end: ``fracspl <subcommand> [--config PATH] [--seed N] [--out DIR]``."""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

import numpy as np

from .config import ConfigError, ScenarioConfig, load_config
from .csvio import format_number, write_csv
from .fracops import TimeGrid
from .mittag import ConvergenceError, MLQuery, mml_series
from .rothe import EstimateLedger, Mesh1D, RotheSolverError, run_solver
from .spectral1d import SpectralConfig, spectral_solve
from .verify import FAULTS, SUITES, format_tap, run_suites

__all__ = ["main", "build_parser"]

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_CONVERGENCE = 2
EXIT_REGRESSION = 3
EXIT_PROPERTY = 4

_NUMERIC_LIST_FLAGS = ("--alphas", "--beta", "--zs")


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    """Reports usage errors with exit code 1 instead of argparse's 2."""

    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        raise SystemExit(EXIT_USAGE)


def _float_list(text: str) -> tuple[float, ...]:
    try:
        values = tuple(float(v) for v in text.split(","))
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}") from exc
    if not values:
        raise argparse.ArgumentTypeError("empty list")
    return values


def build_parser() -> argparse.ArgumentParser:
    common = _Parser(add_help=False)
    common.add_argument("--config", type=Path, help="JSON scenario file")
    common.add_argument("--seed", type=int, default=0, help="RNG seed for property suites")
    common.add_argument("--out", type=Path, help="output directory (overrides the config)")

    parser = _Parser(prog="fracspl", description="Fractional single-phase-lag heat equation toolkit")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    ml = sub.add_parser("ml-eval", parents=[common], help="evaluate a multinomial Mittag-Leffler series")
    ml.add_argument("--alphas", type=_float_list, required=True)
    ml.add_argument("--beta", type=float, required=True)
    ml.add_argument("--zs", type=_float_list, required=True)

    sub.add_parser("spectral", parents=[common], help="truncated mode sum; writes u.csv and dtu.csv")
    sub.add_parser("rothe", parents=[common], help="Rothe scheme; writes trajectory and ledger CSVs")
    sub.add_parser("cross-validate", parents=[common], help="Rothe against spectral; writes error_table.csv")

    verify = sub.add_parser("verify", parents=[common], help="run property suites (TAP output)")
    verify.add_argument("suite", nargs="?", default="all", choices=[*SUITES, "all"])
    verify.add_argument("--inject-fault", choices=FAULTS, help="deliberately break an input to test the suites")
    return parser


def _normalise_argv(argv: list[str]) -> list[str]:
    """Join ``--zs -2,-1`` into ``--zs=-2,-1`` so negative lists are not read as flags."""
    out = []
    i = 0
    while i < len(argv):
        arg = argv[i]
        if arg in _NUMERIC_LIST_FLAGS and i + 1 < len(argv) and argv[i + 1].startswith("-"):
            out.append(f"{arg}={argv[i + 1]}")
            i += 2
            continue
        out.append(arg)
        i += 1
    return out


def _require_config(args) -> ScenarioConfig:
    if args.config is None:
        raise ConfigError(f"{args.command} requires --config PATH")
    return load_config(args.config)


def _out_dir(args, cfg: ScenarioConfig) -> Path:
    return args.out if args.out is not None else cfg.output_dir


def _spectral_config(cfg: ScenarioConfig, what: str) -> SpectralConfig:
    if not cfg.constant_conductivity:
        raise ConfigError("spectral ground truth requires constant conductivity")
    if not cfg.F.is_zero:
        raise ConfigError(f"{what}: the spectral solution covers F = 0 only")
    return SpectralConfig(cfg.L, cfg.k_bar, cfg.params, cfg.n_modes, cfg.quad_points)


def _long_rows(t: np.ndarray, x: np.ndarray, *fields: np.ndarray, x_first: bool = False):
    for i, ti in enumerate(t):
        for j, xj in enumerate(x):
            key = (xj, ti) if x_first else (ti, xj)
            yield (*key, *(f[i, j] for f in fields))


# subcommands ----------------------------------------------------------------


def cmd_ml_eval(args) -> int:
    try:
        query = MLQuery(args.alphas, args.beta, args.zs)
    except ValueError as exc:
        raise UsageError(str(exc)) from exc
    result = mml_series(query)
    print(
        f"{result.value!r} degree={result.degree} tail={result.tail:.3e} "
        f"error_estimate={result.error_estimate:.3e}"
    )
    return EXIT_OK


def cmd_spectral(args) -> int:
    cfg = _require_config(args)
    spec = _spectral_config(cfg, "spectral")
    x = np.linspace(0.0, cfg.L, cfg.eval_points)
    t = np.linspace(0.0, cfg.T, cfg.eval_steps + 1)
    sol = spectral_solve(spec, cfg.U0.function(cfg.L), cfg.V0.function(cfg.L), x, t, workers=1)
    out = _out_dir(args, cfg)
    digits = cfg.precision
    write_csv(out / "u.csv", ("x", "t", "u"), _long_rows(t, x, sol.u, x_first=True), digits)
    write_csv(out / "dtu.csv", ("x", "t", "dtu"), _long_rows(t, x, sol.dtu, x_first=True), digits)
    print(f"wrote {out / 'u.csv'} and {out / 'dtu.csv'} ({t.size} times x {x.size} points)")
    return EXIT_OK


def _mesh(cfg: ScenarioConfig, elements: int) -> Mesh1D:
    k = np.asarray(cfg.conductivity, dtype=float)
    return Mesh1D(cfg.L, elements, k)


def _rothe_run(cfg: ScenarioConfig, steps: int, elements: int):
    return run_solver(
        cfg.params,
        _mesh(cfg, elements),
        TimeGrid(cfg.T, steps),
        cfg.U0.function(cfg.L),
        cfg.V0.function(cfg.L),
        None if cfg.F.is_zero else cfg.source(),
    )


def cmd_rothe(args) -> int:
    cfg = _require_config(args)
    out = _out_dir(args, cfg)
    digits = cfg.precision
    for steps, elements in cfg.refinement_pairs():
        run = _rothe_run(cfg, steps, elements)
        tag = f"n{steps}_M{elements}"
        write_csv(
            out / f"trajectory_{tag}.csv",
            ("t", "x", "u", "delta_u"),
            _long_rows(run.grid.nodes, run.mesh.nodes, run.full_u(), run.full_du()),
            digits,
        )
        write_csv(out / f"ledger_{tag}.csv", ("j", *EstimateLedger.FIELDS), run.ledger.rows(), digits)
        residual = float(run.monitors.residual.max())
        print(f"n={steps} M={elements} max_step_residual={residual:.3e} wrote trajectory_{tag}.csv, ledger_{tag}.csv")
    return EXIT_OK


def cmd_cross_validate(args) -> int:
    cfg = _require_config(args)
    spec = _spectral_config(cfg, "cross-validate")
    out = _out_dir(args, cfg)
    rows = []
    for steps, elements in cfg.refinement_pairs():
        run = _rothe_run(cfg, steps, elements)
        truth = spectral_solve(
            spec,
            cfg.U0.function(cfg.L),
            cfg.V0.function(cfg.L),
            run.mesh.nodes,
            run.grid.nodes,
            workers=1,
            with_derivative=False,
        ).u
        diff = run.u - truth[:, 1:-1]
        error = max(np.sqrt(max(run.system.l2_sq(d), 0.0)) for d in diff)
        rows.append((steps, elements, float(error)))
        print(f"n={steps} M={elements} max_l2_error={format_number(error, 6)}")
    write_csv(out / "error_table.csv", ("n", "M", "max_l2_error"), rows, cfg.precision)
    errors = [r[2] for r in rows]
    if all(b <= a for a, b in zip(errors, errors[1:])):
        return EXIT_OK
    print("error does not decrease along the refinement", file=sys.stderr)
    return EXIT_REGRESSION


def cmd_verify(args) -> int:
    checks = run_suites(args.suite, seed=args.seed, fault=args.inject_fault)
    for line in format_tap(checks):
        print(line)
    return EXIT_OK if all(c.ok for c in checks) else EXIT_PROPERTY


COMMANDS = {
    "ml-eval": cmd_ml_eval,
    "spectral": cmd_spectral,
    "rothe": cmd_rothe,
    "cross-validate": cmd_cross_validate,
    "verify": cmd_verify,
}


def main(argv: list[str] | None = None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = build_parser()
    try:
        args = parser.parse_args(_normalise_argv(argv))
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        return COMMANDS[args.command](args)
    except (ConfigError, UsageError) as exc:
        print(f"fracspl {args.command}: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except ConvergenceError as exc:
        print(f"fracspl {args.command}: convergence failure: {exc}", file=sys.stderr)
        return EXIT_CONVERGENCE
    except RotheSolverError as exc:
        print(f"fracspl {args.command}: solver failure at step {exc.step}: {exc}", file=sys.stderr)
        return EXIT_CONVERGENCE


if __name__ == "__main__":
    sys.exit(main())
