"""Command-line front end.

Exit codes: 0 success, 2 parse error, 3 invalid state or measurement,
4 unknown measurement/chain name, 5 inequality violated (``check`` only).
"""

from __future__ import annotations

import argparse
import json
import logging
import sys

import numpy as np

from . import entropy
from .bounds import (
    MARGIN_TOL,
    BoundReport,
    Inequality,
    OptimizerConfig,
    chi_range,
    general_inequality,
    holevo_chi,
    optimize_accessible_info,
    sequential_report,
    verify_kholevo,
)
from .core import StateError, assemble_xq, fmt, random_ensemble, random_multipartite
from .fileio import ParseError, UnknownNameError, load_experiment
from .measurement import (
    MeasurementError,
    Povm,
    apply_measurement,
    decohere_ancilla,
    neumark_dilate,
    random_projective,
    residual_info,
    sequential_measure,
)

EXIT_OK, EXIT_PARSE, EXIT_STATE, EXIT_REFERENCE, EXIT_VIOLATION = 0, 2, 3, 4, 5

log = logging.getLogger("accessinfo")


class Output:
    """Collects text blocks and a machine record; prints one or the other."""

    def __init__(self, as_json: bool):
        self.as_json = as_json
        self.blocks: list[str] = []
        self.record: dict = {}

    def add(self, key: str, text: str, record) -> None:
        self.blocks.append(text)
        self.record[key] = record

    def emit(self) -> None:
        if self.as_json:
            print(json.dumps(self.record, indent=2, sort_keys=False))
        else:
            print("\n\n".join(self.blocks))


def _require_input(args) -> None:
    if not args.input:
        raise ParseError("--input is required for this command")


def cmd_chi(args, out: Output) -> int:
    _require_input(args)
    exp = load_experiment(args.input)
    e = exp.ensemble
    chi = holevo_chi(e)
    out.add("chi", f"chi = {fmt(chi, '.6f')} bits", chi)
    rng = chi_range(e, args.tolerance)
    out.add("range", rng.to_text(), rng.to_record())
    v = entropy.venn2(assemble_xq(e), "X", "Q")
    out.add("venn_xq", "Entropy diagram of XQ\n" + v.to_text(), v.to_record())
    return EXIT_OK


def _measured(exp, name):
    """Return ``(ensemble, projective measurement, dilated?)`` for a named measurement."""
    m = exp.measurement(name)
    e = exp.ensemble
    if isinstance(m, Povm):
        d = neumark_dilate(m)
        return d.embed_ensemble(e), d.measurement, True
    return e, m, False


def cmd_measure(args, out: Output) -> int:
    _require_input(args)
    exp = load_experiment(args.input)
    e, m, dilated = _measured(exp, args.name)
    report = verify_kholevo(e, m, args.tolerance)
    q = report.quantities
    info, chi = q["I"], q["chi"]
    xq = assemble_xq(e)
    post = apply_measurement(xq, m)
    if args.decohere:
        post = decohere_ancilla(post)
        residual = residual_info(xq, m)
        balance = Inequality("I + S(X':Q'|A') <= S(X:Q)", info + residual, chi, args.tolerance)
        mode = "decohered"
    else:
        residual = q["S(X':Q'|A')"]
        balance = Inequality("I + S(X':Q'|A') = S(X:Q)", info + residual, chi, 1e-8, "=")
        mode = "coherent"
    quantities = {"I": info, "chi": chi, "S(X':Q'|A')": residual, "I + S(X':Q'|A')": info + residual}
    checks = [report.check("I <= chi"), balance]
    summary = BoundReport(f"Measurement {args.name!r} ({mode}{', Neumark dilated' if dilated else ''})",
                          quantities, tuple(checks), args.tolerance)
    out.add("measure", summary.to_text(), summary.to_record())
    table = report.extra["outcomes"]
    out.add("outcomes", _table_text(table), table)
    if args.venn:
        v = entropy.venn3(post, "X", "Q", "A")
        out.add("venn_xqa", "Entropy diagram of X'Q'A'\n" + v.to_text(), v.to_record())
    return EXIT_OK


def _table_text(table: dict) -> str:
    cond = np.array(table["conditional"])
    lines = ["Outcome table  p(a|i)"]
    lines.append(f"  {'i':<4}{'p_i':<9}" + " ".join(f"{'a=' + str(a):<8}" for a in range(cond.shape[1])).rstrip())
    for i, (p, row) in enumerate(zip(table["prior"], cond)):
        lines.append(f"  {i:<4d}{fmt(p, '.6f'):<9}" + " ".join(fmt(v, ".6f") for v in row))
    lines.append(f"  {'p_a':<13}" + " ".join(fmt(v, ".6f") for v in table["marginal"]))
    return "\n".join(lines)


def cmd_venn(args, out: Output) -> int:
    _require_input(args)
    exp = load_experiment(args.input)
    xq = assemble_xq(exp.ensemble)
    v2 = entropy.venn2(xq, "X", "Q")
    out.add("venn_xq", "Entropy diagram of XQ\n" + v2.to_text(), v2.to_record())
    if args.name:
        e, m, _ = _measured(exp, args.name)
        post = apply_measurement(assemble_xq(e), m)
        if args.decohere:
            post = decohere_ancilla(post)
        v3 = entropy.venn3(post, "X", "Q", "A")
        out.add("venn_xqa", f"Entropy diagram of X'Q'A' after {args.name!r}\n" + v3.to_text(),
                v3.to_record())
    return EXIT_OK


def cmd_sequential(args, out: Output) -> int:
    _require_input(args)
    exp = load_experiment(args.input)
    report = sequential_report(exp.ensemble, exp.chain(args.name), args.tolerance)
    out.add("sequential", report.to_text(), report.to_record())
    return EXIT_OK


def cmd_optimize(args, out: Output) -> int:
    _require_input(args)
    exp = load_experiment(args.input)
    cfg = OptimizerConfig(restarts=args.restarts, steps=args.steps, step_size=args.step_size,
                          decay=args.decay, seed=args.seed, povm_outcomes=args.povm_outcomes)
    res = optimize_accessible_info(exp.ensemble, cfg)
    basis = [[[float(z.real), float(z.imag)] for z in col] for col in res.unitary.T]
    lines = [
        "Accessible information search",
        f"  best I        {fmt(res.info)} bits (restart {res.restart})",
        f"  chi           {fmt(res.chi)} bits",
        f"  gap chi - I   {fmt(res.gap)} bits",
        "  basis vectors (columns of U):",
    ]
    for col in res.unitary.T:
        lines.append("    [" + ", ".join(f"{z.real:+.6f}{z.imag:+.6f}j" for z in col) + "]")
    out.add("optimize", "\n".join(lines),
            {"I": res.info, "chi": res.chi, "gap": res.gap, "restart": res.restart, "basis": basis})
    return EXIT_OK


CHECK_NAMES = (
    "holevo: I <= chi",
    "chi range: 0 <= chi",
    "chi range: chi <= H[p]",
    "strong subadditivity: S(A:B|C) >= 0",
    "diagonal vs quantum: H(X:Y) <= S(X:Y)",
    "sequential: sum H(X:A_j|A_<j) <= chi",
)


def run_checks(dims, count: int, seed: int, tol: float = MARGIN_TOL) -> dict[str, np.ndarray]:
    """Randomized inequality sweep; returns the margins per inequality."""
    margins: dict[str, list[float]] = {name: [] for name in CHECK_NAMES}
    for k in range(count):
        rng = np.random.default_rng([seed, k])
        d = int(dims[k % len(dims)])
        e = random_ensemble(d, int(rng.integers(2, 5)), rng)
        m = random_projective(d, rng, int(rng.integers(1, d + 1)))
        rep = verify_kholevo(e, m, tol)
        margins["holevo: I <= chi"].append(rep.check("I <= chi").margin)
        rr = chi_range(e, tol)
        margins["chi range: 0 <= chi"].append(rr.check("0 <= chi").margin)
        margins["chi range: chi <= H[p]"].append(rr.check("chi <= H[p]").margin)
        tri = random_multipartite((2, 2, 2), "ABC", rng, rank=int(rng.integers(1, 9)))
        margins["strong subadditivity: S(A:B|C) >= 0"].append(
            entropy.conditional_mutual(tri, "A", "B", "C"))
        bi = random_multipartite((d, d), "XY", rng, rank=int(rng.integers(1, d * d + 1)))
        g = general_inequality(bi, tol=tol, decompose=False)
        margins["diagonal vs quantum: H(X:Y) <= S(X:Y)"].append(g.checks[0].margin)
        chain = [random_projective(d, rng, int(rng.integers(1, d + 1))) for _ in range(int(rng.integers(2, 4)))]
        res = sequential_measure(assemble_xq(e), chain)
        margins["sequential: sum H(X:A_j|A_<j) <= chi"].append(holevo_chi(e) - res.total)
    return {k: np.array(v) for k, v in margins.items()}


def cmd_check(args, out: Output) -> int:
    if args.input:
        exp = load_experiment(args.input)
        if exp.measurements:
            first = next(iter(exp.measurements.values()))
            rep = verify_kholevo(exp.ensemble, first, args.tolerance)
        else:
            rep = chi_range(exp.ensemble, args.tolerance)
        out.add("input", rep.to_text(), rep.to_record())
    margins = run_checks(args.dims, args.count, args.seed, args.tolerance)
    lines = [f"Randomized inequality suite: {args.count} cases, dims {list(args.dims)}, seed {args.seed}"]
    record = {}
    failed = 0
    for name, m in margins.items():
        bad = int(np.sum(m < -args.tolerance))
        failed += bad
        verdict = "PASS" if bad == 0 else "FAIL"
        lines.append(f"  [{verdict}] {name}: n={m.size} min margin {m.min():+.6e} "
                     f"mean {fmt(m.mean(), '.6f')} violations {bad}")
        record[name] = {"count": int(m.size), "min_margin": float(m.min()), "mean_margin": float(m.mean()),
                        "violations": bad}
    out.add("check", "\n".join(lines), {"tolerance": args.tolerance, "results": record, "ok": failed == 0})
    return EXIT_OK if failed == 0 else EXIT_VIOLATION


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--input", "-i", help="experiment JSON file")
    common.add_argument("--json", action="store_true", help="machine-readable output")
    common.add_argument("--seed", type=int, default=0)
    common.add_argument("--tolerance", type=float, default=MARGIN_TOL, help="inequality margin")

    parser = argparse.ArgumentParser(prog="accessinfo", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("chi", parents=[common], help="Holevo quantity and its range")
    p.set_defaults(func=cmd_chi)

    p = sub.add_parser("measure", parents=[common], help="simulate a named measurement")
    p.add_argument("name")
    p.add_argument("--decohere", action="store_true", help="dephase the ancilla")
    p.add_argument("--venn", action="store_true", help="print the X'Q'A' entropy diagram")
    p.set_defaults(func=cmd_measure)

    p = sub.add_parser("venn", parents=[common], help="entropy diagrams before/after measurement")
    p.add_argument("name", nargs="?")
    p.add_argument("--decohere", action="store_true")
    p.set_defaults(func=cmd_venn)

    p = sub.add_parser("sequential", parents=[common], help="run a named measurement chain")
    p.add_argument("name")
    p.set_defaults(func=cmd_sequential)

    p = sub.add_parser("optimize", parents=[common], help="search for the accessible information")
    defaults = OptimizerConfig()
    p.add_argument("--restarts", type=int, default=defaults.restarts)
    p.add_argument("--steps", type=int, default=defaults.steps)
    p.add_argument("--step-size", type=float, default=defaults.step_size)
    p.add_argument("--decay", type=float, default=defaults.decay)
    p.add_argument("--povm-outcomes", type=int, default=None,
                   help="search rank-one projective measurements on a padded space of this dimension")
    p.set_defaults(func=cmd_optimize)

    p = sub.add_parser("check", parents=[common], help="randomized inequality suite")
    p.add_argument("--dims", type=int, nargs="+", default=[2])
    p.add_argument("--count", type=int, default=1000)
    p.set_defaults(func=cmd_check)
    return parser


def main(argv=None) -> int:
    logging.basicConfig(level=logging.WARNING, format="%(levelname)s: %(message)s", stream=sys.stderr)
    args = build_parser().parse_args(argv)
    out = Output(args.json)
    try:
        code = args.func(args, out)
    except ParseError as err:
        print(f"parse error: {err}", file=sys.stderr)
        return EXIT_PARSE
    except (StateError, MeasurementError) as err:
        print(f"invalid input: {err}", file=sys.stderr)
        return EXIT_STATE
    except UnknownNameError as err:
        print(f"unknown reference: {err}", file=sys.stderr)
        return EXIT_REFERENCE
    except ValueError as err:
        print(f"invalid argument: {err}", file=sys.stderr)
        return EXIT_PARSE
    out.emit()
    return code


if __name__ == "__main__":
    sys.exit(main())
