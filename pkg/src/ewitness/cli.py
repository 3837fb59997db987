"""Command-line entry point: ``measure``, ``sweep``, ``witness`` and ``selftest``.

Exit codes: 0 on success, 2 for bad input (flags, files, validation),
3 when the solver did not converge (results are still written).
"""

from __future__ import annotations

import argparse
import csv
import io as io_text
import json
import logging
import sys
from pathlib import Path
from typing import Sequence

import numpy as np

from . import io
from .errors import ValidationError
from .measures import full_report
from .partitions import PartitionScheme
from .solver import WitnessProblem, solve
from .states import DensityOperator, maximally_mixed, validate
from . import states
from .witness import e_dw, evaluate

EXIT_OK, EXIT_INPUT, EXIT_NOT_CONVERGED = 0, 2, 3

MEASURE_NAMES = {
    "e_w": "e_w",
    "e_dw": "e_dw",
    "neg": "negativity",
    "rr": "random_robustness",
    "schmidt": "schmidt_product",
}
SWEEP_COLUMNS = ("tri", "cut", "reduced", "dw_cut")

log = logging.getLogger("ewitness")


class InputError(Exception):
    """Bad flags or files; maps to exit code 2."""


# ---------------------------------------------------------------- parsing


def _int_list(text: str) -> list[int]:
    try:
        return [int(t) for t in text.split(",") if t.strip()]
    except ValueError:
        raise InputError(f"expected comma-separated integers, got {text!r}") from None


def load_state(source: str, dims: Sequence[int] | None = None) -> tuple[DensityOperator, str]:
    """Resolve ``--state``: a file path or ``builtin:NAME[:p]``.

    ``dims`` reinterprets the party structure; its product must equal the
    matrix dimension. Returns the state and a label.
    """
    if source.startswith("builtin:"):
        name, _, param = source[len("builtin:") :].partition(":")
        rho = _builtin(name, param, dims)
        label = source[len("builtin:") :]
    else:
        try:
            m, fdims, label = io.read_matrix(source)
        except OSError as exc:
            raise InputError(f"cannot read {source}: {exc.strerror or exc}") from exc
        except ValueError as exc:
            raise ValidationError("format", float("nan"), f"{source}: {exc}") from exc
        rho = validate(m, fdims)
        label = label or Path(source).stem
    if dims is not None and tuple(dims) != rho.dims:
        rho = validate(rho.matrix, dims)
    return rho, label


def _builtin(name: str, param: str, dims) -> DensityOperator:
    fixed = {"bell": states.bell_state, "ghz": states.ghz_state, "w": states.w_state}
    family = {"wghz": states.wghz_mixture, "werner": states.werner_state}
    if name in fixed:
        if param:
            raise InputError(f"builtin {name} takes no parameter")
        return fixed[name]()
    if name in family:
        try:
            p = float(param)
        except ValueError:
            raise InputError(f"builtin {name} needs a parameter, e.g. builtin:{name}:0.5") from None
        try:
            return family[name](p)
        except ValueError as exc:
            raise InputError(str(exc)) from None
    if name == "maxmixed":
        return maximally_mixed(dims or (2, 2))
    known = sorted([*fixed, *family, "maxmixed"])
    raise InputError(f"unknown builtin {name!r}; known: {', '.join(known)}")


def parse_scheme(text: str | None, n: int) -> PartitionScheme:
    """``m=K`` for K-separability blocks, ``cut=I,J,..`` for one bipartition."""
    text = text or "m=1"
    key, _, val = text.partition("=")
    try:
        if key == "m":
            return PartitionScheme.m_separable(n, int(val))
        if key == "cut":
            return PartitionScheme.bipartition(n, _int_list(val))
    except ValueError as exc:
        raise InputError(f"bad scheme {text!r}: {exc}") from None
    raise InputError(f"scheme must look like m=K or cut=I,J; got {text!r}")


def solver_config(args) -> dict:
    cfg = {"restarts": args.restarts, "max_cuts": args.max_cuts, "seed": args.seed}
    if args.eps is not None:
        cfg["eps_feasibility"] = cfg["eps_objective"] = args.eps
    return cfg


def _add_solver_flags(p: argparse.ArgumentParser):
    p.add_argument("--eps", type=float, default=None, help="feasibility and objective tolerance (default 1e-6)")
    p.add_argument("--restarts", type=int, default=20)
    p.add_argument("--max-cuts", type=int, default=5000)
    p.add_argument("--seed", type=int, default=0)


def _add_state_flags(p: argparse.ArgumentParser):
    p.add_argument("--state", required=True, help="state file path or builtin:NAME[:p]")
    p.add_argument("--dims", type=_int_list, default=None, help="local dimensions, e.g. 2,2")
    p.add_argument("--scheme", default=None, help="m=K or cut=I,J,... (default m=1)")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="ewitness", description="Witnessed entanglement of multipartite states.")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    m = sub.add_parser("measure", help="print a JSON report of entanglement measures")
    _add_state_flags(m)
    m.add_argument("--measures", default="e_w", help="comma list of e_w,e_dw,neg,rr,schmidt")
    m.add_argument("--timings", action="store_true", help="include wall times (output no longer reproducible)")
    _add_solver_flags(m)

    s = sub.add_parser("sweep", help="tabulate measures over a one-parameter family")
    s.add_argument("--family", default="wghz")
    s.add_argument("--points", type=int, default=51)
    s.add_argument("--start", type=float, default=0.0)
    s.add_argument("--stop", type=float, default=1.0)
    s.add_argument("--measures", default=",".join(SWEEP_COLUMNS))
    s.add_argument("--out", required=True)
    _add_solver_flags(s)

    w = sub.add_parser("witness", help="write the optimal witness and a JSON sidecar")
    _add_state_flags(w)
    w.add_argument("--out", required=True)
    _add_solver_flags(w)

    t = sub.add_parser("selftest", help="run invariant checks of every module")
    t.add_argument("--quick", action="store_true")
    return parser


# ---------------------------------------------------------------- commands


def cmd_measure(args, out=None) -> int:
    out = out or sys.stdout
    rho, label = load_state(args.state, args.dims)
    scheme = parse_scheme(args.scheme, rho.n)
    names = [t.strip() for t in args.measures.split(",") if t.strip()]
    bad = [t for t in names if t not in MEASURE_NAMES]
    if bad or not names:
        raise InputError(f"unknown measures {bad}; choose from {', '.join(MEASURE_NAMES)}")
    try:
        report = full_report(rho, scheme, solver_config(args), [MEASURE_NAMES[t] for t in names])
    except ValueError as exc:
        if isinstance(exc, ValidationError):
            raise
        raise InputError(str(exc)) from None
    doc = {"state": label, "dims": list(rho.dims), **report.to_dict(args.timings)}
    out.write(json.dumps(doc, indent=2) + "\n")
    return EXIT_OK if report.all_converged else EXIT_NOT_CONVERGED


def point_seed(seed: int, index: int) -> int:
    """Independent per-point solver seed, stable across runs and platforms."""
    return int(np.random.SeedSequence([seed, index]).generate_state(1)[0])


def sweep_rows(
    grid: Sequence[float], columns: Sequence[str], config: dict, results: list | None = None
) -> tuple[list[list[float]], bool]:
    """Rows ``[p, *columns]`` for the W/GHZ family; also reports convergence.

    If ``results`` is given, every ``(WitnessResult, scheme)`` is appended to it.
    """
    config = dict(config)
    seed = config.pop("seed", 0)
    tri = PartitionScheme.m_separable(3, 2)
    cut = PartitionScheme.bipartition(3, (0, 1))
    pair = PartitionScheme.m_separable(2, 1)
    rows, converged = [], True
    for i, p in enumerate(grid):
        rho = states.wghz_mixture(p)
        cfg = {**config, "seed": point_seed(seed, i)}
        row = [float(p)]
        for col in columns:
            if col == "dw_cut":
                row.append(e_dw(rho, (0, 1)))
                continue
            if col == "tri":
                res, scheme = solve(WitnessProblem(rho, tri, **cfg)), tri
            elif col == "cut":
                res, scheme = solve(WitnessProblem(rho, cut, **cfg)), cut
            else:
                res, scheme = solve(WitnessProblem(rho.reduced([0, 1]), pair, **cfg)), pair
            if results is not None:
                results.append((res, scheme))
            converged &= res.converged
            row.append(res.e_w)
        log.info("p=%s %s", p, row[1:])
        rows.append(row)
    return rows, converged


def format_csv(header: Sequence[str], rows) -> str:
    """CSV text with LF line endings and round-trip float reprs."""
    buf = io_text.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    for row in rows:
        writer.writerow([repr(float(v)) for v in row])
    return buf.getvalue()


def write_csv(path, header: Sequence[str], rows) -> None:
    with open(path, "w", encoding="ascii", newline="") as fh:
        fh.write(format_csv(header, rows))


def cmd_sweep(args) -> int:
    if args.family != "wghz":
        raise InputError(f"unknown family {args.family!r}; available: wghz")
    if args.points < 2:
        raise InputError("--points must be at least 2")
    if not 0 <= args.start < args.stop <= 1:
        raise InputError("need 0 <= start < stop <= 1")
    columns = [t.strip() for t in args.measures.split(",") if t.strip()]
    bad = [c for c in columns if c not in SWEEP_COLUMNS]
    if bad or not columns:
        raise InputError(f"unknown sweep columns {bad}; choose from {', '.join(SWEEP_COLUMNS)}")
    try:
        Path(args.out).open("a").close()
    except OSError as exc:
        raise InputError(f"cannot write {args.out}: {exc.strerror or exc}") from exc
    grid = np.linspace(args.start, args.stop, args.points)
    rows, converged = sweep_rows(grid, columns, solver_config(args))
    write_csv(args.out, ["p", *columns], rows)
    return EXIT_OK if converged else EXIT_NOT_CONVERGED


def sidecar_path(out) -> Path:
    out = Path(out)
    return out.with_name(out.stem + ".result.json")


def cmd_witness(args) -> int:
    rho, label = load_state(args.state, args.dims)
    scheme = parse_scheme(args.scheme, rho.n)
    res = solve(WitnessProblem(rho, scheme, **solver_config(args)))
    try:
        io.write_matrix(args.out, res.witness.matrix, rho.dims, f"witness for {label}")
        meta = {
            "state": label,
            "scheme": scheme.describe(),
            "e_w": res.e_w,
            "trace_w_rho": evaluate(res.witness, rho),
            "detected": res.detected,
            "converged": res.converged,
            "cuts_used": res.cuts_used,
            "certificate_value": res.certificate_value,
            "certificate": res.certificate.to_json(),
        }
        with open(sidecar_path(args.out), "w", encoding="ascii", newline="\n") as fh:
            fh.write(json.dumps(meta, indent=2) + "\n")
    except OSError as exc:
        raise InputError(f"cannot write {args.out}: {exc.strerror or exc}") from exc
    return EXIT_OK if res.converged else EXIT_NOT_CONVERGED


def cmd_selftest(args, out=None, partial_transpose=None) -> int:
    out = out or sys.stdout
    from .selftest import format_table, run_selftest

    results = run_selftest(quick=args.quick, partial_transpose=partial_transpose)
    out.write(format_table(results))
    return EXIT_OK if all(r.passed for r in results) else 1


COMMANDS = {"measure": cmd_measure, "sweep": cmd_sweep, "witness": cmd_witness, "selftest": cmd_selftest}


def main(argv: Sequence[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    try:
        return COMMANDS[args.command](args)
    except ValidationError as exc:
        print(f"error: invalid state ({exc.invariant}): {exc}", file=sys.stderr)
    except InputError as exc:
        print(f"error: {exc}", file=sys.stderr)
    return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
