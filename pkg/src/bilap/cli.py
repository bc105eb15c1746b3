"""Command-line front end: ``certify``, ``solve`` and ``validate``.

Exit status: 0 ok, 1 I/O or bad input, 2 certificate refusal,
3 non-convergence, 4 validation failure.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
import time
from pathlib import Path

import numpy as np

from .certify import certify
from .config import ConfigError, RunConfig, load_config
from .oracles import compare_fields, exact_forcing_solution, exact_linear_solution, if_stepper_solve
from .picard import ConvergenceError, SolveReport, WindowError, picard_solve, solve_global
from .spectral import SpaceTimeField, w142_norm
from .validation import run_suite

EXIT_OK, EXIT_IO, EXIT_REFUSED, EXIT_DIVERGED, EXIT_INVALID = 0, 1, 2, 3, 4

log = logging.getLogger("bilap")


def _err(msg: str):
    print(f"bilap: {msg}", file=sys.stderr)


def _write(path: Path, text: str):
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(text, encoding="utf-8")


def write_field_csv(path: Path, u: SpaceTimeField):
    """Rows ``x,t,u`` ordered by t, then x, with 17 significant digits."""
    x = np.tile(u.grid.x, u.timegrid.steps + 1)
    t = np.repeat(u.timegrid.nodes, u.grid.points)
    path.parent.mkdir(parents=True, exist_ok=True)
    np.savetxt(path, np.column_stack([x, t, u.values.ravel()]), fmt="%.17g",
               delimiter=",", header="x,t,u", comments="")


def run_certify(cfg: RunConfig, out: Path) -> int:
    cert = certify(cfg.kernel_spec(), cfg.nonlinearity_spec(), cfg.grid, cfg.a, cfg.b, cfg.T, cfg.eps)
    try:
        _write(out / "certificate.json", cert.to_json() + "\n")
    except OSError as exc:
        _err(f"cannot write certificate: {exc}")
        return EXIT_IO
    if not cert.certified:
        hint = f"; largest certified horizon T_max = {cert.T_max:.7g}" if cert.T_max else "; no horizon is certified"
        _err(f"not a contraction on T = {cfg.T}: q = {cert.q:.6g}{hint}")
        return EXIT_REFUSED
    print(f"certified: q = {cert.q:.6g} < 1 on T = {cfg.T}")
    return EXIT_OK


def _summary(reports: list[SolveReport], u: SpaceTimeField | None, wall: float) -> dict:
    history = [r for rep in reports for r in rep.residual_history]
    summary = {
        "iterations": sum(rep.iterations for rep in reports),
        "residual_history": history,
        "measured_ratio_max": max((rep.measured_ratio_max for rep in reports), default=0.0),
        "certified_q": reports[0].certified_q if reports else None,
        "final_w142_norm": w142_norm(u) if u is not None else None,
        "wall_time_s": wall,
    }
    if len(reports) > 1:
        summary["windows"] = [{"iterations": r.iterations, "residual_history": r.residual_history}
                              for r in reports]
    return summary


def _oracle_row(kind: str, cfg: RunConfig, u: SpaceTimeField):
    grid, params, G, F = cfg.grid, cfg.params, cfg.kernel_spec(), cfg.nonlinearity_spec()
    u0 = cfg.initial_field()
    tg = u.timegrid
    if kind == "linear":
        if F.family != "linear" or np.any(F.h.values):
            raise ValueError("the linear oracle needs linear(kappa=...) without an offset")
        ref = exact_linear_solution(u0, params, G, F.coef, tg)
        return compare_fields("solve_vs_exact_linear", u, ref, 1e-6)
    if kind == "forcing":
        if not F.u_independent:
            raise ValueError("the forcing oracle needs a u-independent nonlinearity")
        ref = exact_forcing_solution(u0, params, G, F.h, tg)
        return compare_fields("solve_vs_exact_forcing", u, ref, 1e-8)
    ref = if_stepper_solve(u0, params, G, F, tg)
    return compare_fields("solve_vs_if_stepper", u, ref, max(1e-5, 10 * cfg.tol))


def run_solve(cfg: RunConfig, out: Path, oracle: str | None = None) -> int:
    grid, params, G, F = cfg.grid, cfg.params, cfg.kernel_spec(), cfg.nonlinearity_spec()
    u0 = cfg.initial_field()
    cert = certify(G, F, grid, cfg.a, cfg.b, cfg.window_T or cfg.T, cfg.eps)
    if not cert.certified and not cfg.override_uncertified:
        _err(f"refusing to solve: q = {cert.q:.6g} >= 1 (set solver.override_uncertified to force)")
        return EXIT_REFUSED

    start = time.perf_counter()
    status = EXIT_OK
    u = None
    try:
        if cfg.window_T and cfg.window_T < cfg.T:
            steps = int(round(cfg.M * cfg.window_T / cfg.T))
            u, reports = solve_global(u0, params, G, F, cfg.T, cfg.window_T, steps, cfg.tol, cfg.max_iter)
        else:
            u, rep = picard_solve(u0, params, G, F, cfg.timegrid, cfg.tol, cfg.max_iter,
                                  override_uncertified=cfg.override_uncertified)
            reports = [rep]
    except ConvergenceError as exc:
        _err(str(exc))
        reports, status = [exc.report], EXIT_DIVERGED
    except WindowError as exc:
        _err(str(exc))
        reports, status = [exc.__cause__.report], EXIT_DIVERGED
    wall = time.perf_counter() - start

    summary = _summary(reports, u, wall)
    if u is not None and oracle:
        try:
            row = _oracle_row(oracle, cfg, u)
        except ValueError as exc:
            _err(str(exc))
            return EXIT_IO
        summary["oracles"] = [row.as_row()]
        if not row.passed:
            status = EXIT_INVALID
    try:
        if cfg.summary:
            _write(out / "summary.json", json.dumps(summary, indent=2) + "\n")
        if cfg.csv and u is not None:
            write_field_csv(out / "field.csv", u)
    except OSError as exc:
        _err(f"cannot write outputs: {exc}")
        return EXIT_IO
    return status


def run_validate(suite: str, seed: int = 0, out: Path | None = None) -> int:
    rows = run_suite(suite, seed)
    report = {"suite": suite, "seed": seed, "passed": all(r.passed for r in rows),
              "results": [r.as_row() for r in rows]}
    text = json.dumps(report, indent=2)
    print(text)
    if out is not None:
        try:
            _write(out / f"validate_{suite}.json", text + "\n")
        except OSError as exc:
            _err(f"cannot write report: {exc}")
            return EXIT_IO
    return EXIT_OK if report["passed"] else EXIT_INVALID


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="bilap", description=__doc__.splitlines()[0])
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("certify", help="evaluate the contraction certificate")
    p.add_argument("--config", required=True, type=Path)
    p.add_argument("--out", type=Path)

    p = sub.add_parser("solve", help="Picard-solve the configured problem")
    p.add_argument("--config", required=True, type=Path)
    p.add_argument("--out", required=True, type=Path)
    p.add_argument("--oracle", choices=("linear", "forcing", "stepper"))

    p = sub.add_parser("validate", help="run a property suite")
    p.add_argument("--suite", required=True, choices=("fourier", "bounds", "contraction", "oracles", "all"))
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", type=Path)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING,
                        format="%(name)s: %(message)s")
    if args.command == "validate":
        return run_validate(args.suite, args.seed, args.out)
    try:
        cfg = load_config(args.config)
    except OSError as exc:
        _err(f"cannot read config: {exc}")
        return EXIT_IO
    except ConfigError as exc:
        _err(f"invalid config: {exc}")
        return EXIT_IO
    if args.command == "certify":
        return run_certify(cfg, args.out or Path(cfg.directory))
    return run_solve(cfg, args.out, args.oracle)


if __name__ == "__main__":
    sys.exit(main())
