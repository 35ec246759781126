"""Command-line front end.

Exit codes:
  0  satisfied / run completed cleanly
  1  usage or I/O error (bad flags, unreadable or malformed model file)
  2  condition violated (witness in the certificate)
  3  condition marginal (face extremum within the witness tolerance of 0)
  4  blow-up during integration
  5  a component went negative (ODE) / spatial minimum went negative (PDE)
  6  nothing to construct (counterexample requested but certificate satisfied)

Text output is human-oriented and unstable; JSON (--format json) is the
stable machine interface (schema 1).  All randomness flows from --seed.
The env var ORTHANT_GUARD_THREADS caps worker count (this build runs the
sweeps sequentially, so it is accepted and ignored beyond validation).
"""

from __future__ import annotations

import argparse
import json
import os
import sys
import time as time_mod

import numpy as np

from . import __version__, conditions, ode, pde, zoo
from .expr import ExprError, eval_ast, parse_expression
from .field import ModelError, load_model, shift_time

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_VIOLATED = 2
EXIT_MARGINAL = 3
EXIT_BLOWUP = 4
EXIT_NEGATIVE = 5
EXIT_NOTHING = 6

_VERDICT_EXIT = {
    "satisfied": EXIT_OK,
    "violated": EXIT_VIOLATED,
    "marginal": EXIT_MARGINAL,
}


def _read_model(path: str):
    try:
        with open(path, "r", encoding="utf-8") as fh:
            return load_model(fh.read())
    except OSError as e:
        raise SystemExit(_usage_error(f"cannot read model file: {e}"))
    except ModelError as e:
        raise SystemExit(_usage_error(f"{path}: {e}"))


def _usage_error(message: str) -> int:
    print(f"error: {message}", file=sys.stderr)
    return EXIT_USAGE


def _emit(doc: dict, args, text_render) -> None:
    if args.format == "json":
        payload = json.dumps(doc, indent=2) + "\n"
    else:
        payload = text_render(doc)
    if getattr(args, "out", None):
        with open(args.out, "w", encoding="utf-8") as fh:
            fh.write(payload)
    else:
        sys.stdout.write(payload)


def _report(args, command: str, result: dict) -> dict:
    return {
        "schema": 1,
        "version": __version__,
        "command": command,
        "seed": getattr(args, "seed", 0),
        "result": result,
    }


def cmd_check(args) -> int:
    model = _read_model(args.model)
    try:
        if args.rectangle:
            if model.rectangle is None:
                return _usage_error("model file has no [rectangle] table")
            cert = conditions.check_rectangle(
                model, model.rectangle, args.clip, args.grid, args.random, args.seed
            )
        elif model.time_dependent:
            cert = conditions.check_nonautonomous(
                model,
                (args.t0, args.t1),
                args.clip,
                args.grid,
                args.random,
                args.seed,
            )
        else:
            cert = conditions.check_quasipositivity(
                model, args.clip, args.grid, args.random, args.seed
            )
    except ValueError as e:
        return _usage_error(str(e))

    doc = _report(args, "check", cert.to_dict())

    def render(doc: dict) -> str:
        res = doc["result"]
        lines = [f"verdict: {res['verdict']}   (kind: {res['kind']})"]
        for rec in res["faces"]:
            lines.append(
                f"  face u_{rec['component']} {rec['side']}: extremum "
                f"{rec['extremum']:.6g} at {rec['location']} -> {rec['verdict']}"
            )
        if res["witness"]:
            w = res["witness"]
            lines.append(
                f"witness: component {w['component']} ({w['side']} face) at "
                f"{w['point']}, value {w['value']:.6g}"
                + (f", time {w['time']:.6g}" if "time" in w else "")
            )
        return "\n".join(lines) + "\n"

    _emit(doc, args, render)
    return _VERDICT_EXIT[cert.verdict]


def _trajectory_exit(traj) -> int:
    if traj.status == "blow_up":
        return EXIT_BLOWUP
    if traj.first_event("went_negative") is not None:
        return EXIT_NEGATIVE
    return EXIT_OK


def cmd_simulate(args) -> int:
    model = _read_model(args.model)
    try:
        u0 = [float(x) for x in args.u0.split(",")]
    except ValueError:
        return _usage_error(f"bad --u0 list: {args.u0!r}")
    if len(u0) != model.n:
        return _usage_error(f"--u0 needs {model.n} components")
    try:
        traj = ode.integrate(model, u0, args.t_end, args.rtol, args.atol)
    except ValueError as e:
        return _usage_error(str(e))

    if args.format == "csv":
        payload = traj.to_csv(model.names)
        if args.out:
            with open(args.out, "w", encoding="utf-8") as fh:
                fh.write(payload)
        else:
            sys.stdout.write(payload)
        return _trajectory_exit(traj)

    doc = _report(args, "simulate", traj.to_dict(model.names))

    def render(doc: dict) -> str:
        res = doc["result"]
        lines = [
            f"status: {res['status']}",
            f"samples: {len(res['times'])}, final t = {res['times'][-1]:.6g}",
            f"final state: {res['states'][-1]}",
        ]
        for e in res["events"]:
            lines.append(
                f"event: component {e['component']} {e['kind']} at t = {e['time']:.6g}"
            )
        return "\n".join(lines) + "\n"

    _emit(doc, args, render)
    return _trajectory_exit(traj)


def cmd_pde(args) -> int:
    model = _read_model(args.model)
    if model.d is None:
        return _usage_error("model has no diffusion coefficients `d`")
    settings = model.pde
    bc = args.bc or (settings.bc if settings else "neumann")
    length = args.length or (settings.length if settings else 1.0)
    cells = args.cells or (settings.cells if settings else 64)
    grid = pde.Grid1D(length, cells, bc)

    ic_sources = args.ic.split(";") if args.ic else ["1"] * model.n
    if len(ic_sources) != model.n:
        return _usage_error(f"--ic needs {model.n} ;-separated expressions")
    nodes = grid.nodes()
    values = np.empty((model.n, cells))
    for i, src in enumerate(ic_sources):
        try:
            ast = parse_expression(src, ["x"])
        except (ExprError, ValueError) as e:
            return _usage_error(f"--ic[{i}]: {e}")
        values[i] = [eval_ast(ast, (x,), 0.0) for x in nodes]

    dt = args.dt
    if dt is None:
        dt = 0.5 * pde.cfl_limit(grid, model.d) if args.scheme == "explicit" else 1e-3
    try:
        traj = pde.simulate_rd(
            model,
            pde.GridState(values, grid, 0.0),
            args.t_end,
            args.scheme,
            dt,
            save_every=args.save_every,
        )
    except ValueError as e:
        return _usage_error(str(e))

    if args.format == "csv":
        payload = traj.to_csv()
        if args.out:
            with open(args.out, "w", encoding="utf-8") as fh:
                fh.write(payload)
        else:
            sys.stdout.write(payload)
    else:
        doc = _report(args, "pde", traj.to_dict())

        def render(doc: dict) -> str:
            res = doc["result"]
            lines = [
                f"status: {res['status']}  bc: {res['bc']}  cells: {res['cells']}"
                f"  dt: {res['dt']:.6g}",
            ]
            last = res["steps"][-1]
            for i, name in enumerate(res["names"]):
                lines.append(
                    f"  {name}: final spatial range "
                    f"[{last['min'][i]:.6g}, {last['max'][i]:.6g}]"
                )
            return "\n".join(lines) + "\n"

        _emit(doc, args, render)

    if traj.status == "blow_up":
        return EXIT_BLOWUP
    initial_min = float(values.min())
    went_negative = initial_min >= 0.0 and any(
        float(mins.min()) < -conditions.TOL_WIT for _, mins in traj.min_history
    )
    return EXIT_NEGATIVE if went_negative else EXIT_OK


def cmd_counterexample(args) -> int:
    model = _read_model(args.model)
    if args.from_t0:
        if not model.time_dependent:
            return _usage_error("--from-t0 only applies to time-dependent models")
        model = shift_time(model, args.from_t0)
    try:
        if model.time_dependent:
            cert = conditions.check_nonautonomous(
                model, (args.t0, args.t1), args.clip, args.grid, args.random, args.seed
            )
        else:
            cert = conditions.check_quasipositivity(
                model, args.clip, args.grid, args.random, args.seed
            )
    except ValueError as e:
        return _usage_error(str(e))
    if cert.verdict != "violated":
        print(
            f"certificate verdict is {cert.verdict}: nothing to construct",
            file=sys.stderr,
        )
        return EXIT_NOTHING

    try:
        u0, traj = ode.find_counterexample(model, cert, args.a, args.t_end)
    except ode.CounterexampleError as e:
        return _usage_error(str(e))
    event = traj.first_event("went_negative")
    result = {
        "u0": [float(x) for x in u0],
        "event": {"component": event.component + 1, "time": event.time},
        "certificate": cert.to_dict(),
        "trajectory": traj.to_dict(model.names),
    }
    doc = _report(args, "counterexample", result)

    def render(doc: dict) -> str:
        res = doc["result"]
        e = res["event"]
        return (
            f"initial data: {res['u0']}\n"
            f"component {e['component']} goes negative at t = {e['time']:.6g}\n"
        )

    _emit(doc, args, render)
    return EXIT_OK


def cmd_zoo(args) -> int:
    if args.export:
        try:
            entry = zoo.get_model(args.export)
        except KeyError as e:
            return _usage_error(str(e.args[0]))
        sys.stdout.write(entry.document)
        return EXIT_OK
    for entry in zoo.list_models():
        rect = f", rectangle {entry.expected_rectangle_verdict}" if entry.expected_rectangle_verdict else ""
        print(f"{entry.name}: {entry.expected_verdict}{rect}  -- {entry.note}")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="orthant-guard",
        description="Positivity and invariant-rectangle verification for "
        "ODE and 1-D reaction-diffusion systems.",
    )
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("model", help="path to a TOML model file")
        p.add_argument("--format", choices=["json", "text", "csv"], default="text")
        p.add_argument("--out", help="write output to this path instead of stdout")
        p.add_argument("--seed", type=int, default=0)

    p = sub.add_parser("check", help="check face conditions")
    common(p)
    p.add_argument("--rectangle", action="store_true", help="use the model's [rectangle]")
    p.add_argument("--clip", type=float, default=conditions.DEFAULT_CLIP)
    p.add_argument("--grid", type=int, default=conditions.DEFAULT_GRID)
    p.add_argument("--random", type=int, default=conditions.DEFAULT_RANDOM)
    p.add_argument("--t0", type=float, default=0.0, help="nonautonomous interval start")
    p.add_argument("--t1", type=float, default=2.0, help="nonautonomous interval end")
    p.set_defaults(func=cmd_check)

    p = sub.add_parser("simulate", help="integrate the ODE system")
    common(p)
    p.add_argument("--u0", required=True, help="comma-separated initial vector")
    p.add_argument("--t-end", type=float, default=10.0)
    p.add_argument("--rtol", type=float, default=1e-8)
    p.add_argument("--atol", type=float, default=1e-10)
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("pde", help="simulate the reaction-diffusion system")
    common(p)
    p.add_argument("--bc", choices=["neumann", "dirichlet"])
    p.add_argument("--cells", type=int)
    p.add_argument("--length", type=float)
    p.add_argument("--scheme", choices=["explicit", "imex"], default="imex")
    p.add_argument("--dt", type=float)
    p.add_argument("--t-end", type=float, default=1.0)
    p.add_argument("--ic", help=";-separated expressions in x, one per species")
    p.add_argument("--save-every", type=int, default=1)
    p.set_defaults(func=cmd_pde)

    p = sub.add_parser("counterexample", help="build a positivity counterexample")
    common(p)
    p.add_argument("--clip", type=float, default=conditions.DEFAULT_CLIP)
    p.add_argument("--grid", type=int, default=conditions.DEFAULT_GRID)
    p.add_argument("--random", type=int, default=conditions.DEFAULT_RANDOM)
    p.add_argument("--a", type=float, default=0.01, help="initial perturbation size")
    p.add_argument("--t-end", type=float, default=10.0)
    p.add_argument("--t0", type=float, default=0.0)
    p.add_argument("--t1", type=float, default=2.0)
    p.add_argument("--from-t0", type=float, default=0.0, help="re-base time at t0")
    p.set_defaults(func=cmd_counterexample)

    p = sub.add_parser("zoo", help="list built-in models or export one")
    p.add_argument("--export", metavar="NAME", help="print the model file for NAME")
    p.set_defaults(func=cmd_zoo)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    threads = os.environ.get("ORTHANT_GUARD_THREADS")
    if threads is not None:
        try:
            if int(threads) < 1:
                raise ValueError
        except ValueError:
            print(f"error: ORTHANT_GUARD_THREADS must be a positive integer, "
                  f"got {threads!r}", file=sys.stderr)
            return EXIT_USAGE
    start = time_mod.perf_counter()
    try:
        code = args.func(args)
    except SystemExit as e:
        return int(e.code) if e.code is not None else EXIT_USAGE
    elapsed = time_mod.perf_counter() - start
    # timing goes to stderr so JSON output stays byte-identical across runs
    print(f"[orthant-guard] {args.command} finished in {elapsed:.3f}s", file=sys.stderr)
    return code


if __name__ == "__main__":
    sys.exit(main())
