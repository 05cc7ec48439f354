"""Command line interface: ``nswalloc {solve,gen,check,bench}``.

Exit codes
    0  success
    1  input or output failure (unreadable file, malformed JSON, schema violation)
    2  invalid request (algorithm incompatible with the valuations, bad generator parameters)
    3  exhaustive search refused: ``n**m`` exceeds the oracle limit (``$NSW_ORACLE_LIMIT``)
    4  ``bench`` found a guarantee violated
"""

from __future__ import annotations

import argparse
import json
import math
import sys
import time
from dataclasses import asdict, dataclass, field
from typing import Any, Callable

import numpy as np

from . import instances
from .baselines import naive_repeated_matching, single_matching_fill
from .constagents import GridSearchConfig, const_agents_solve
from .core import Allocation, Instance, welfare
from .exact import OracleLimitError, exact_opt
from .fairness import check_fairness
from .instances import InstanceFileError
from .reprematch import reprematch
from .smatch import IncompatibleValuationError, smatch
from .valuations import ADDITIVE_LIKE, Additive

REPORT_VERSION = 1

EXIT_OK, EXIT_IO, EXIT_INVALID, EXIT_LIMIT, EXIT_BOUND = 0, 1, 2, 3, 4


def _smatch_auto(inst: Instance, args) -> Allocation:
    if all(isinstance(v, Additive) for v in inst.valuations):
        return smatch(inst, "additive")
    if all(isinstance(v, ADDITIVE_LIKE) for v in inst.valuations):
        return smatch(inst, "marginal")
    raise IncompatibleValuationError("smatch requires additive-like valuations")


def _const_agents(inst: Instance, args) -> Allocation:
    cfg = GridSearchConfig(
        delta=getattr(args, "delta", None) or 0.05,
        beta=getattr(args, "beta", None),
        oracle=getattr(args, "oracle", None) or "exact",
        seed=getattr(args, "seed", 0) or 0,
    )
    return const_agents_solve(inst, cfg)


ALGORITHMS: dict[str, Callable[[Instance, Any], Allocation]] = {
    "smatch": _smatch_auto,
    "smatch-marginal": lambda inst, args: smatch(inst, "marginal"),
    "smatch-restricted": lambda inst, args: smatch(inst, "restricted"),
    "reprematch": lambda inst, args: reprematch(inst),
    "single-matching": lambda inst, args: single_matching_fill(inst),
    "naive-rm": lambda inst, args: naive_repeated_matching(inst),
    "exact": lambda inst, args: exact_opt(inst).best,
    "const-agents": _const_agents,
}


@dataclass
class RunReport:
    algorithm: str
    instance: dict
    allocation: list[list[int]]
    values: list[float]
    nsw: float
    log_nsw: float | None
    opt_nsw: float | None = None
    ratio: float | None = None
    fairness: dict | None = None
    seed: int | None = None
    wall_time: float = 0.0
    report_version: int = REPORT_VERSION

    def audit(self, inst: Instance) -> None:
        """Recompute the NSW from the allocation and make sure it matches."""
        w = welfare(inst, Allocation(tuple(frozenset(b) for b in self.allocation)))
        if not math.isclose(w.nsw, self.nsw, rel_tol=1e-12, abs_tol=0.0):
            raise AssertionError(f"report NSW {self.nsw} disagrees with recomputed {w.nsw}")

    def to_json(self) -> str:
        d = asdict(self)
        if d["log_nsw"] is not None and math.isinf(d["log_nsw"]):
            d["log_nsw"] = None  # JSON has no infinity
        return json.dumps(d, indent=2)


def _ratio(opt: float, achieved: float) -> float | None:
    if opt <= 0:
        return 1.0
    return math.inf if achieved <= 0 else opt / achieved


def run(inst: Instance, algo: str, args=None, with_exact: bool = False, fairness: bool = False) -> RunReport:
    """Run one algorithm and package the outcome; raises the module errors unchanged."""
    t0 = time.perf_counter()
    alloc = ALGORITHMS[algo](inst, args)
    elapsed = time.perf_counter() - t0
    w = welfare(inst, alloc)
    report = RunReport(
        algorithm=algo,
        instance={"n": inst.n, "m": inst.m, "weights": list(inst.weights), **(inst.metadata or {})},
        allocation=[sorted(b) for b in alloc.bundles],
        values=list(w.values),
        nsw=w.nsw,
        log_nsw=w.log_nsw,
        seed=getattr(args, "seed", None),
        wall_time=elapsed,
    )
    if with_exact:
        opt = exact_opt(inst)
        report.opt_nsw = opt.opt_nsw
        report.ratio = _ratio(opt.opt_nsw, w.nsw)
    if fairness:
        rep = check_fairness(inst, alloc, pareto=True)
        report.fairness = {"ef1": rep.ef1, "strong_ef1": rep.strong_ef1, "po": rep.po}
    report.audit(inst)
    return report


def _emit(text: str, out: str | None) -> None:
    if out:
        with open(out, "w", encoding="utf-8") as fh:
            fh.write(text + "\n")
    else:
        print(text)


def _fail(code: int, msg: str) -> int:
    print(f"error: {msg}", file=sys.stderr)
    return code


# -- subcommands -------------------------------------------------------------


def cmd_solve(args) -> int:
    try:
        inst = instances.load(args.input)
    except (OSError, InstanceFileError) as exc:
        return _fail(EXIT_IO, str(exc))
    try:
        report = run(inst, args.algo, args, args.with_exact, args.check_fairness)
    except IncompatibleValuationError as exc:
        return _fail(EXIT_INVALID, str(exc))
    except OracleLimitError as exc:
        return _fail(EXIT_LIMIT, str(exc))
    try:
        _emit(report.to_json(), args.out)
    except OSError as exc:
        return _fail(EXIT_IO, str(exc))
    return EXIT_OK


_GEN_INT = ("n", "m", "k", "universe", "per_item", "max_copies")
_GEN_FLOAT = ("M", "W", "eps", "eps_bar", "p", "low", "high")


def cmd_gen(args) -> int:
    params = {k: getattr(args, k) for k in _GEN_INT + _GEN_FLOAT if getattr(args, k) is not None}
    if args.weight_range is not None:
        params["weight_range"] = tuple(args.weight_range)
    try:
        inst = instances.generate(args.family, params, args.seed)
    except (TypeError, ValueError) as exc:
        return _fail(EXIT_INVALID, str(exc))
    try:
        _emit(instances.dumps(inst).rstrip("\n"), args.out)
    except OSError as exc:
        return _fail(EXIT_IO, str(exc))
    return EXIT_OK


def _load_allocation(path: str, n: int) -> Allocation:
    with open(path, encoding="utf-8") as fh:
        d = json.load(fh)
    bundles = d["allocation"] if isinstance(d, dict) else d
    if len(bundles) != n:
        raise ValueError(f"allocation has {len(bundles)} bundles for {n} agents")
    return Allocation(tuple(frozenset(int(j) for j in b) for b in bundles))


def cmd_check(args) -> int:
    try:
        inst = instances.load(args.input)
        alloc = _load_allocation(args.allocation, inst.n)
    except (OSError, InstanceFileError, json.JSONDecodeError, KeyError, ValueError) as exc:
        return _fail(EXIT_IO, str(exc))
    try:
        w = welfare(inst, alloc)
        rep = check_fairness(inst, alloc, pareto=args.pareto)
    except OracleLimitError as exc:
        return _fail(EXIT_LIMIT, str(exc))
    except ValueError as exc:
        return _fail(EXIT_INVALID, str(exc))
    out = {
        "nsw": w.nsw,
        "values": list(w.values),
        "ef1": rep.ef1,
        "strong_ef1": rep.strong_ef1,
        "po": rep.po,
        "witnesses": [list(x) for x in rep.witnesses],
    }
    _emit(json.dumps(out, indent=2), args.out)
    return EXIT_OK


# -- benchmark ---------------------------------------------------------------


@dataclass
class BenchRow:
    family: str
    algorithm: str
    n: int
    m: int
    nsw: float
    opt: float | None
    ratio: float | None
    bound: float | None  # worst-case guarantee on the ratio, when one applies
    gap: float | None = None  # ratio the construction is known to force, when it is a bad case
    ok: bool = True
    time: float = 0.0
    seed: int | None = None
    extra: dict = field(default_factory=dict)


def smatch_bound(n: int) -> float:
    return 2.0 * n


def reprematch_bound(n: int) -> float:
    return 2.0 * n * (math.log2(n) + 2)


def _row(family, algo, inst, opt, bound=None, gap=None, seed=None, opt_alloc=None, **extra) -> BenchRow:
    t0 = time.perf_counter()
    alloc = ALGORITHMS[algo](inst, None)
    elapsed = time.perf_counter() - t0
    value = welfare(inst, alloc).nsw
    ratio = _ratio(opt, value) if opt is not None else None
    ok = True
    if bound is not None and ratio is not None:
        ok &= ratio <= bound * (1 + 1e-9)
    if gap is not None and ratio is not None:
        ok &= ratio >= gap * (1 - 1e-9)
    return BenchRow(family, algo, inst.n, inst.m, value, opt, ratio, bound, gap, ok, elapsed, seed, extra)


def constructed_suite() -> list[BenchRow]:
    rows = []
    ex = instances.example1(20, 20.0, 0.5)
    opt = exact_opt(ex).opt_nsw
    for algo in ("smatch", "naive-rm", "single-matching"):
        rows.append(_row("example1", algo, ex, opt, smatch_bound(2) if algo == "smatch" else None))
    rows.append(_row("example1", "reprematch", ex, opt, reprematch_bound(2)))

    sub = instances.subadditive_gap(8, 10.0)
    rows.append(_row("subadditive_gap", "reprematch", sub, exact_opt(sub).opt_nsw, gap=8 / 2))

    k, M, eps = 10, 100.0, 0.1
    xos = instances.xos_gap(k, M, eps)
    # brute force over 2**20 allocations is affordable here
    rows.append(_row("xos_gap", "reprematch", xos, exact_opt(xos).opt_nsw, gap=k * M / (3 * M + k * eps)))

    asym = instances.asym_tight(4, 2, 100.0)
    opt_asym = welfare(asym, instances.asym_tight_optimum(asym)).nsw
    rows.append(_row("asym_tight", "smatch", asym, opt_asym, smatch_bound(4), opt_source="construction"))

    po = instances.po_gap(0.01)
    row = _row("po_gap", "smatch", po, exact_opt(po).opt_nsw, smatch_bound(2))
    row.extra["pareto_optimal"] = check_fairness(po, smatch(po), pareto=True).po
    rows.append(row)
    return rows


_RANDOM_CELLS = (
    ("random_additive", "smatch", smatch_bound, {"weight_range": (0.5, 3.0)}),
    ("random_ba", "smatch-marginal", smatch_bound, {}),
    ("random_splc", "smatch-marginal", smatch_bound, {}),
    ("random_coverage", "reprematch", reprematch_bound, {}),
    ("random_ba", "reprematch", reprematch_bound, {}),
    ("random_restricted", "smatch-restricted", lambda n: 1.45, {}),
)


def random_suite(trials: int, seed: int) -> list[BenchRow]:
    rng = np.random.default_rng(seed)
    rows = []
    for t in range(trials):
        family, algo, bound, extra = _RANDOM_CELLS[t % len(_RANDOM_CELLS)]
        n = int(rng.integers(2, 4))
        m = int(rng.integers(4, 7))
        s = int(rng.integers(2**31))
        inst = instances.generate(family, {"n": n, "m": m, **extra}, s)
        rows.append(_row(family, algo, inst, exact_opt(inst).opt_nsw, bound(n), seed=s))
    return rows


def _fmt(x) -> str:
    if x is None:
        return "-"
    if isinstance(x, float):
        return f"{x:.4g}"
    return str(x)


def _table(rows: list[BenchRow]) -> str:
    cols = ("family", "algorithm", "n", "m", "nsw", "ratio", "bound", "gap", "ok", "time")
    cells = [cols] + [tuple(_fmt(getattr(r, c)) for c in cols) for r in rows]
    widths = [max(len(row[k]) for row in cells) for k in range(len(cols))]
    return "\n".join("  ".join(c.ljust(w) for c, w in zip(row, widths)) for row in cells)


def cmd_bench(args) -> int:
    try:
        rows = constructed_suite() if args.suite == "paper" else random_suite(args.trials, args.seed)
    except OracleLimitError as exc:
        return _fail(EXIT_LIMIT, str(exc))
    rows.sort(key=lambda r: (r.family, r.algorithm, r.seed if r.seed is not None else -1))
    payload = {"suite": args.suite, "seed": args.seed, "report_version": REPORT_VERSION, "rows": [asdict(r) for r in rows]}
    text = json.dumps(payload, indent=2, default=lambda o: None)
    try:
        if args.out:
            _emit(text, args.out)
        if sys.stdout.isatty() or args.table:
            print(_table(rows))
        elif not args.out:
            print(text)
    except OSError as exc:
        return _fail(EXIT_IO, str(exc))
    bad = [r for r in rows if not r.ok]
    if bad:
        return _fail(EXIT_BOUND, f"{len(bad)} row(s) violate their bound")
    return EXIT_OK


# -- argument parsing --------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="nswalloc", description="Approximate Nash social welfare allocations.")
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("solve", help="run an algorithm on an instance file")
    s.add_argument("input")
    s.add_argument("--algo", choices=sorted(ALGORITHMS), default="smatch")
    s.add_argument("--with-exact", action="store_true", help="also compute the optimum by brute force")
    s.add_argument("--check-fairness", action="store_true", help="report EF1, strong EF1 and Pareto optimality")
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--delta", type=float, default=None, help="grid ratio for const-agents")
    s.add_argument("--beta", type=float, default=None, help="grid floor for const-agents")
    s.add_argument("--oracle", choices=("exact", "rounded"), default=None, help="feasibility oracle for const-agents")
    s.add_argument("--out")
    s.set_defaults(func=cmd_solve)

    g = sub.add_parser("gen", help="generate an instance file")
    g.add_argument("--family", required=True, choices=sorted(instances.FAMILIES))
    for name in _GEN_INT:
        g.add_argument(f"--{name.replace('_', '-')}", dest=name, type=int)
    for name in _GEN_FLOAT:
        g.add_argument(f"--{name.replace('_', '-')}", dest=name, type=float)
    g.add_argument("--weight-range", type=float, nargs=2, metavar=("LO", "HI"))
    g.add_argument("--seed", type=int, default=0)
    g.add_argument("--out")
    g.set_defaults(func=cmd_gen)

    c = sub.add_parser("check", help="evaluate a given allocation")
    c.add_argument("input")
    c.add_argument("allocation", help="JSON list of bundles, or a solve report")
    c.add_argument("--pareto", action="store_true", help="run the exhaustive Pareto check")
    c.add_argument("--out")
    c.set_defaults(func=cmd_check)

    b = sub.add_parser("bench", help="compare algorithms against brute force")
    b.add_argument("--suite", choices=("paper", "random"), default="paper")
    b.add_argument("--trials", type=int, default=60)
    b.add_argument("--seed", type=int, default=0)
    b.add_argument("--table", action="store_true", help="print the text table even when not on a terminal")
    b.add_argument("--out")
    b.set_defaults(func=cmd_bench)
    return p


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    return args.func(args)


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
