"""Command-line front end.

Every subcommand produces a :class:`Report`: a human block followed by a
fenced ``machine`` block of ``key=value`` lines in a fixed key order.  Exit
codes: 0 success, 2 precondition or catalog violation, 3 undecidable at the
requested precision.

A scenario is one JSON document::

    {"field": {"prime": 5},
     "definitions": {"points": {...}, "series": {...}, "subsets": {...},
                     "coverings": {...}, "presentations": {...}},
     "queries": [{"cmd": "eval", "point": "xm", "series": "T",
                  "expect": {"value": "g^(0,-1)"}}]}

Query arguments that are not defined names are parsed as literals.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from dataclasses import dataclass, field
from fractions import Fraction
from importlib import resources
from pathlib import Path
from typing import Any, Callable, Dict, List, Optional, Sequence, Tuple

from .basefield import BaseField
from .errors import AdicError, PreconditionError, UndecidableAtPrecision
from .point import (
    DiscPoint,
    point_from_json,
    pt_classify,
    pt_eval,
    pt_is_continuous,
    spa_affinoid_field_count,
    spa_count_closed_form,
    unit_ball_pod,
)
from .presentation import (
    HuberPresentation,
    pres_analytify,
    pres_complete,
    pres_fiber_product,
    pres_generic_fiber,
    pres_localize,
    pres_special_fiber,
    presentation_from_json,
)
from .series import SeriesElement, render_series, series_from_json
from .sheafcheck import sc_buzver_witness, sc_simple_laurent
from .subset import (
    CoveringSpec,
    RationalSubset,
    cov_reduce_to_simple,
    cov_verify_on_samples,
    rs_member,
)

OUT_ENV = "ADICKIT_OUT"
DEFAULT_PRECISION = (8, 32)
DEFAULT_N_MAX = 8


# ---------------------------------------------------------------------------
# reports


@dataclass
class Report:
    title: str
    human: List[str] = field(default_factory=list)
    machine: List[Tuple[str, str]] = field(default_factory=list)

    def put(self, key: str, value: Any) -> None:
        if isinstance(value, bool):
            value = "true" if value else "false"
        self.machine.append((key, str(value)))

    def say(self, line: str) -> None:
        self.human.append(line)

    def as_dict(self) -> Dict[str, str]:
        return dict(self.machine)

    def render(self) -> str:
        lines = [f"== {self.title} =="] + self.human + ["```machine"]
        lines += [f"{k}={v}" for k, v in self.machine]
        lines.append("```")
        return "\n".join(lines) + "\n"


# ---------------------------------------------------------------------------
# scenario context


@dataclass
class Context:
    field: BaseField
    definitions: Dict[str, Dict[str, Any]] = field(default_factory=dict)
    precision: Tuple[int, int] = DEFAULT_PRECISION
    n_max: int = DEFAULT_N_MAX

    @property
    def prime(self) -> int:
        return self.field.prime

    def _lookup(self, section: str, name):
        if isinstance(name, str) and name in self.definitions.get(section, {}):
            return self.definitions[section][name], True
        return name, False

    def series(self, name, variables: Optional[Sequence[str]] = None) -> SeriesElement:
        obj, _ = self._lookup("series", name)
        if isinstance(obj, SeriesElement):
            return obj
        return series_from_json(obj, self.prime, variables)

    def point(self, name) -> DiscPoint:
        obj, found = self._lookup("points", name)
        if isinstance(obj, str) and not found:
            raise PreconditionError(f"no point named {name!r}")
        return point_from_json(obj, self.prime)

    def subset(self, name) -> RationalSubset:
        obj, found = self._lookup("subsets", name)
        if isinstance(obj, str) and not found:
            if obj in ("whole", "D", "disc"):
                return RationalSubset.whole(self.prime)
            if obj in ("circle", "S"):
                return RationalSubset.circle(self.prime)
            raise PreconditionError(f"no subset named {name!r}")
        return self._subset_from_json(obj)

    def _subset_from_json(self, obj: Dict[str, Any]) -> RationalSubset:
        var = obj.get("variable", "T")
        if obj.get("whole"):
            return RationalSubset.whole(self.prime, (var,))
        if obj.get("circle"):
            return RationalSubset.circle(self.prime, var)
        if "disc" in obj:
            return RationalSubset.disc(self.prime, Fraction(str(obj["disc"])), var)
        if "intersect" in obj:
            parts = [self.subset(n) for n in obj["intersect"]]
            out = parts[0]
            for other in parts[1:]:
                out = out.intersect(other)
            return out
        if "rational" in obj:
            obj = {"numerators": obj["rational"]["num"], "denominator": obj["rational"].get("den", "1")}
        if "numerators" in obj:
            nums = [self.series(s, (var,)) for s in obj["numerators"]]
            den = self.series(obj.get("denominator", "1"), (var,))
            return RationalSubset.of(nums, den)
        raise PreconditionError(f"cannot read subset {obj!r}")

    def covering(self, name):
        obj, found = self._lookup("coverings", name)
        if not found:
            raise PreconditionError(f"no covering named {name!r}")
        if "pieces" in obj:
            return [self.subset(n) for n in obj["pieces"]]
        # short forms {"laurent": [...]}, {"rational": [...]}, {"simple": "t"}
        for short, kind in (("laurent", "standard_laurent"), ("rational", "standard_rational"),
                            ("simple", "simple_laurent")):
            if short in obj:
                gens = obj[short] if isinstance(obj[short], list) else [obj[short]]
                obj = dict(obj, kind=kind, generators=gens)
        var = obj.get("variable", "T")
        gens = tuple(self.series(s, (var,)) for s in obj["generators"])
        kind = obj.get("kind", "standard_rational")
        if kind == "standard_rational":
            cert = obj.get("certificate", "auto")
            if cert != "auto":
                cert = tuple(self.series(s, (var,)) for s in cert)
            return CoveringSpec.standard_rational(gens, cert)
        return CoveringSpec(kind, gens)

    def presentation(self, name, normalize: bool = True) -> HuberPresentation:
        obj, found = self._lookup("presentations", name)
        if isinstance(obj, HuberPresentation):
            return obj
        if isinstance(obj, str) and not found and Path(obj).is_file():
            obj = json.loads(Path(obj).read_text())
            if "definitions" in obj:
                pres = obj["definitions"].get("presentations", {})
                if len(pres) != 1:
                    raise PreconditionError("presentation file must define exactly one presentation")
                obj = next(iter(pres.values()))
        return presentation_from_json(obj, self.prime, normalize)


def load_scenario(obj: Dict[str, Any], precision=DEFAULT_PRECISION, n_max=DEFAULT_N_MAX) -> Context:
    block = obj.get("field", {"prime": 5})
    k = BaseField.from_json(block)
    return Context(k, obj.get("definitions", {}), precision, n_max)


# ---------------------------------------------------------------------------
# commands


def _describe(rep: Report, P: HuberPresentation, prefix: str = "") -> None:
    d = P.describe()
    for key in ("ring", "ring_of_definition", "ideal_of_definition", "plus_ring", "topology"):
        rep.put(prefix + key, d[key])
    rep.put(prefix + "zero_ring", P.zero_ring)
    rep.say(f"{prefix or 'result'}: ({d['ring']}, {d['plus_ring']}), ring of definition "
            f"{d['ring_of_definition']}, ideal {d['ideal_of_definition']}, {d['topology']}")


def cmd_eval(ctx: Context, q: Dict[str, Any]) -> Report:
    x = ctx.point(q["point"])
    f = ctx.series(q["series"], (x.chart,))
    eps = q.get("eps_scale")
    v = pt_eval(x, f, None if eps is None else Fraction(str(eps)))
    rep = Report("eval")
    rep.say(f"|{render_series(f)}({q['point']})| = {v}")
    rep.put("point", q["point"])
    rep.put("series", render_series(f))
    rep.put("value", v)
    return rep


def cmd_classify(ctx: Context, q: Dict[str, Any]) -> Report:
    x = ctx.point(q["point"])
    rep = Report("classify")
    cls = pt_classify(x)
    cont = pt_is_continuous(x, unit_ball_pod(ctx.prime, x.chart))
    rep.say(f"{q['point']}: {cls}, rank {x.rank}, continuous on the unit disc: {cont}")
    rep.put("point", q["point"])
    rep.put("class", cls)
    rep.put("rank", x.rank)
    rep.put("continuous", cont)
    return rep


def cmd_member(ctx: Context, q: Dict[str, Any]) -> Report:
    x = ctx.point(q["point"])
    U = ctx.subset(q["subset"])
    m = rs_member(x, U)
    rep = Report("member")
    rep.say(f"{q['point']} {'in' if m else 'not in'} {q['subset']} = {U}")
    rep.put("point", q["point"])
    rep.put("subset", q["subset"])
    rep.put("member", m)
    return rep


def cmd_cover(ctx: Context, q: Dict[str, Any]) -> Report:
    c = ctx.covering(q["covering"])
    names = list(q["points"])
    report = cov_verify_on_samples(c, [ctx.point(n) for n in names])
    rep = Report("cover")
    rep.put("covering", q["covering"])
    rep.put("mode", report.mode)
    for name, row in zip(names, report.rows):
        where = ",".join(row.containing) or "-"
        rep.say(f"{name}: in {where}" + (f" (argument: {row.argument_piece})" if row.argument_piece else ""))
        rep.put(f"point.{name}", where)
    uncovered = [n for n, row in zip(names, report.rows) if not row.containing]
    rep.put("covered", not uncovered)
    rep.put("uncovered", ",".join(uncovered) or "-")
    rep.say("every sample covered" if not uncovered else "uncovered: " + ", ".join(uncovered))
    return rep


def cmd_reduce(ctx: Context, q: Dict[str, Any]) -> Report:
    c = ctx.covering(q["covering"])
    if isinstance(c, list):
        raise PreconditionError(f"covering {q['covering']!r} is not a standard Laurent covering")
    tree = cov_reduce_to_simple(c)
    leaves = tree.leaves()
    n = len(c.generators)
    rep = Report("reduce")
    rep.say(f"reduction tree of depth {tree.depth()} with {len(leaves)} leaves")
    rep.put("covering", q["covering"])
    rep.put("depth", tree.depth())
    rep.put("leaves", len(leaves))
    for i, leaf in enumerate(leaves):
        pat = "".join("-" if b else "+" for b in leaf.pattern(n))
        rep.put(f"leaf.{i}", pat)
    return rep


def cmd_localize(ctx: Context, q: Dict[str, Any]) -> Report:
    P = ctx.presentation(q["presentation"])
    subset = q["subset"]
    if isinstance(subset, dict) and "numerators" in subset:
        nums = [P.element(s) for s in subset["numerators"]]
        U = RationalSubset.of(nums, P.element(subset.get("denominator", "1")))
    else:
        U = ctx.subset(subset)
    L = pres_localize(P, U)
    rep = Report("localize")
    _describe(rep, L)
    return rep


def cmd_complete(ctx: Context, q: Dict[str, Any]) -> Report:
    P = ctx.presentation(q["presentation"])
    rep = Report("complete")
    _describe(rep, pres_complete(P, ctx.precision))
    return rep


def _family(rep: Report, fam) -> None:
    rep.put("kind", fam.kind)
    rep.put("pieces", len(fam.pieces))
    for i, (lbl, pc) in enumerate(zip(fam.labels, fam.pieces), 1):
        rep.say(f"piece {i}: {lbl} -> {pc.render_ring()}")
        rep.put(f"piece.{i}", pc.render_ring())
    rep.put("union", fam.marker())
    rep.say(fam.marker())


def cmd_generic_fiber(ctx: Context, q: Dict[str, Any]) -> Report:
    P = ctx.presentation(q["presentation"])
    fam = pres_generic_fiber(P, n_max=int(q.get("n_max", ctx.n_max)))
    rep = Report("generic-fiber")
    if fam.kind == "single":
        _describe(rep, fam.pieces[0])
    _family(rep, fam)
    return rep


def cmd_special_fiber(ctx: Context, q: Dict[str, Any]) -> Report:
    P = ctx.presentation(q["presentation"])
    rep = Report("special-fiber")
    _describe(rep, pres_special_fiber(P))
    return rep


def cmd_fiber_product(ctx: Context, q: Dict[str, Any]) -> Report:
    B, C, A = (ctx.presentation(q[k]) for k in ("left", "right", "base"))
    mode = q.get("mode", "adic")
    out = pres_fiber_product(B, C, A, mode, int(q.get("n_max", ctx.n_max)))
    rep = Report("fiber-product")
    rep.put("mode", mode)
    if isinstance(out, HuberPresentation):
        _describe(rep, out)
    else:
        _family(rep, out)
    return rep


def cmd_analytify(ctx: Context, q: Dict[str, Any]) -> Report:
    # the polynomial presentation is taken as written: its relations matter on each disc
    P = ctx.presentation(q["presentation"], normalize=False)
    fam = pres_analytify(P, int(q.get("n_max", ctx.n_max)))
    rep = Report("analytify")
    _family(rep, fam)
    return rep


def cmd_sheaf_check(ctx: Context, q: Dict[str, Any]) -> Report:
    P = ctx.presentation(q["presentation"])
    t = q.get("t", "T")
    r = sc_simple_laurent(P, t, ctx.precision)
    rep = Report("sheaf-check")
    rep.say(f"covering: {r.covering}")
    rep.say(f"precision (N, D) = {r.precision}")
    rep.say(r.verdict)
    rep.put("precision", f"{r.precision[0]},{r.precision[1]}")
    rep.put("injective", r.injective)
    rep.put("middle_exact", r.middle_exact)
    rep.put("surjective", r.surjective)
    rep.put("kernel_witness", r.kernel_witness or "-")
    rep.put("witness_verified", "-" if r.witness_verified is None else r.witness_verified)
    for k, v in r.ranks.items():
        rep.put(k, v)
    for k, v in r.lengths.items():
        rep.put(f"length_{k}", v)
    rep.put("verdict", r.verdict)
    return rep


def cmd_buzver(ctx: Context, q: Dict[str, Any]) -> Report:
    n_max = int(q.get("n_max", ctx.n_max))
    rows = sc_buzver_witness(n_max)
    rep = Report("buzver")
    for row in rows:
        rep.say(f"n={row.n}: {row.in_A0_T} | {row.in_A0_Tinv} | {row.not_in_pnA0}")
        rep.put(f"n.{row.n}", "ok" if row.ok else "FAIL")
    rep.put("all_ok", all(r.ok for r in rows))
    return rep


def cmd_spa_count(ctx: Context, q: Dict[str, Any]) -> Report:
    rk = int(q.get("rank", 1))
    discrete = bool(q.get("discrete", False))
    c = spa_affinoid_field_count(rk, discrete)
    rep = Report("spa-count")
    rep.say(f"rank {rk}, {'discrete' if discrete else 'analytic'}: {c.count} points")
    for lbl in c.chain:
        rep.say(f"  {lbl}")
    rep.put("rank", rk)
    rep.put("discrete", discrete)
    rep.put("count", c.count)
    rep.put("closed_form", spa_count_closed_form(rk, discrete))
    return rep


COMMANDS: Dict[str, Callable[[Context, Dict[str, Any]], Report]] = {
    "eval": cmd_eval,
    "classify": cmd_classify,
    "member": cmd_member,
    "cover": cmd_cover,
    "reduce": cmd_reduce,
    "localize": cmd_localize,
    "complete": cmd_complete,
    "generic-fiber": cmd_generic_fiber,
    "special-fiber": cmd_special_fiber,
    "fiber-product": cmd_fiber_product,
    "analytify": cmd_analytify,
    "sheaf-check": cmd_sheaf_check,
    "buzver": cmd_buzver,
    "spa-count": cmd_spa_count,
}


# ---------------------------------------------------------------------------
# scenarios and the gallery


@dataclass(frozen=True)
class QueryResult:
    scenario: str
    index: int
    cmd: str
    passed: bool
    detail: str
    report: Optional[Report] = None


def run_query(ctx: Context, q: Dict[str, Any], scenario: str = "", index: int = 0) -> QueryResult:
    cmd = q["cmd"]
    expect = q.get("expect", {})
    try:
        rep = COMMANDS[cmd](ctx, q)
    except UndecidableAtPrecision as e:
        ok = expect.get("error") == "undecidable"
        return QueryResult(scenario, index, cmd, ok, f"undecidable: {e}")
    except AdicError as e:
        ok = expect.get("error") == "precondition"
        return QueryResult(scenario, index, cmd, ok, f"precondition: {e}")
    got = rep.as_dict()
    bad = [f"{k}: expected {v!r}, got {got.get(k)!r}" for k, v in expect.items()
           if k != "error" and got.get(k) != _expect_str(v)]
    if "error" in expect:
        bad.append(f"expected error {expect['error']}")
    return QueryResult(scenario, index, cmd, not bad, "; ".join(bad) or "ok", rep)


def _expect_str(v) -> str:
    if isinstance(v, bool):
        return "true" if v else "false"
    return str(v)


def run_scenario(obj: Dict[str, Any], name: str, precision=DEFAULT_PRECISION, n_max=DEFAULT_N_MAX):
    ctx = load_scenario(obj, precision, n_max)
    return [run_query(ctx, q, name, i) for i, q in enumerate(obj.get("queries", []))]


def gallery_scenarios() -> List[Tuple[str, Dict[str, Any]]]:
    root = resources.files("adickit") / "gallery"
    out = []
    for entry in sorted(root.iterdir(), key=lambda e: e.name):
        if entry.name.endswith(".json"):
            out.append((entry.name[:-5], json.loads(entry.read_text())))
    return out


def run_gallery(precision=DEFAULT_PRECISION, scenarios=None) -> List[QueryResult]:
    results = []
    for name, obj in scenarios if scenarios is not None else gallery_scenarios():
        # scenario-level precision overrides are ignored so a rerun at coarser
        # precision really exercises the coarser setting
        results.extend(run_scenario(obj, name, precision))
    return results


def gallery_table(results: Sequence[QueryResult]) -> Report:
    rep = Report("gallery")
    width = max((len(r.scenario) for r in results), default=8)
    for r in results:
        mark = "PASS" if r.passed else "FAIL"
        rep.say(f"{mark}  {r.scenario:<{width}}  #{r.index} {r.cmd}" + ("" if r.passed else f"  {r.detail}"))
        rep.put(f"{r.scenario}.{r.index}", "pass" if r.passed else "fail")
    passed = sum(r.passed for r in results)
    rep.say(f"{passed}/{len(results)} rows pass")
    rep.put("rows", len(results))
    rep.put("passed", passed)
    return rep


# ---------------------------------------------------------------------------
# argument parsing


def _precision(text: str) -> Tuple[int, int]:
    try:
        n, d = (int(x) for x in text.split(","))
    except ValueError:
        raise argparse.ArgumentTypeError(f"precision must be N,D, got {text!r}")
    if n < 1 or d < 0:
        raise argparse.ArgumentTypeError(f"precision needs N >= 1 and D >= 0, got {text!r}")
    return n, d


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--scenario", type=Path, help="scenario JSON supplying the field and named definitions")
    common.add_argument("--prime", type=int, help="residue characteristic when no scenario is given (default 5)")
    common.add_argument("--precision", type=_precision, default=DEFAULT_PRECISION, help="N,D (default 8,32)")
    common.add_argument("--n-max", type=int, default=DEFAULT_N_MAX, help="family length (default 8)")
    common.add_argument("--out", type=Path, help=f"also write the report here (or set ${OUT_ENV})")

    parser = argparse.ArgumentParser(prog="adickit", description="Exact computations with adic spaces over Qp.")
    sub = parser.add_subparsers(dest="cmd", required=True)

    def add(name, help_, *args):
        sp = sub.add_parser(name, parents=[common], help=help_)
        for flag, kw in args:
            sp.add_argument(flag, **kw)
        return sp

    req = lambda h: {"required": True, "help": h}
    add("eval", "evaluate |f(x)|", ("--point", req("point name")), ("--series", req("series name or literal")),
        ("--eps-scale", {"help": "exponent s with epsilon = gamma^s"}))
    add("classify", "classify a point", ("--point", req("point name")))
    add("member", "rational-subset membership", ("--point", req("point name")), ("--subset", req("subset name")))
    add("cover", "check a covering on sample points", ("--covering", req("covering name")),
        ("--points", {"required": True, "nargs": "+", "help": "point names"}))
    add("reduce", "reduce a Laurent covering to simple ones", ("--covering", req("covering name")))
    add("localize", "rational localization", ("--presentation", req("presentation")), ("--subset", req("subset")))
    add("complete", "completion of a presentation", ("--presentation", req("presentation")))
    add("generic-fiber", "generic fiber of a formal model", ("--presentation", req("presentation")))
    add("special-fiber", "special fiber of a formal model", ("--presentation", req("presentation")))
    add("fiber-product", "fiber product", ("--left", req("presentation")), ("--right", req("presentation")),
        ("--base", req("presentation")), ("--mode", {"default": "adic", "choices": ["adic", "ascending"]}))
    add("analytify", "analytification of a polynomial algebra", ("--presentation", req("presentation")))
    add("sheaf-check", "exactness of a simple Laurent covering", ("--presentation", req("presentation or file")),
        ("--t", {"default": "T", "help": "Laurent generator (default T)"}))
    add("buzver", "certificates for the non-sheafy ring")
    add("spa-count", "points of Spa of an affinoid field", ("--rank", {"type": int, "default": 1}),
        ("--discrete", {"action": "store_true"}))
    gal = add("gallery", "run the bundled worked examples")
    gal.add_argument("--skip", nargs="*", default=[], help="scenario names to leave out")
    run = add("run", "run the queries of a scenario file")
    run.set_defaults(needs_scenario=True)
    return parser


def _query_from_args(ns: argparse.Namespace) -> Dict[str, Any]:
    q = {"cmd": ns.cmd, "n_max": ns.n_max}
    for key in ("point", "series", "subset", "covering", "points", "presentation", "left", "right",
                "base", "mode", "t", "rank", "discrete", "eps_scale"):
        val = getattr(ns, key, None)
        if val is not None:
            q[key] = val
    return q


def _emit(text: str, ns: argparse.Namespace) -> None:
    sys.stdout.write(text)
    out = ns.out or (Path(os.environ[OUT_ENV]) if os.environ.get(OUT_ENV) else None)
    if out is not None:
        out.mkdir(parents=True, exist_ok=True)
        (out / f"{ns.cmd}.report").write_text(text)


def main(argv: Optional[Sequence[str]] = None) -> int:
    ns = build_parser().parse_args(argv)
    try:
        if ns.scenario is not None:
            obj = json.loads(ns.scenario.read_text())
        else:
            obj = {"field": {"prime": ns.prime or 5}}
        if ns.prime is not None and ns.scenario is not None and ns.prime != obj.get("field", {}).get("prime"):
            raise PreconditionError("--prime disagrees with the scenario field block")
        if ns.cmd == "gallery":
            scenarios = [(n, o) for n, o in gallery_scenarios() if n not in set(ns.skip)]
            results = run_gallery(ns.precision, scenarios)
            _emit(gallery_table(results).render(), ns)
            return 0
        if ns.cmd == "run":
            if ns.scenario is None:
                raise PreconditionError("run needs --scenario")
            results = run_scenario(obj, ns.scenario.stem, ns.precision, ns.n_max)
            text = "".join(r.report.render() for r in results if r.report is not None)
            _emit(text + gallery_table(results).render(), ns)
            return 0 if all(r.passed for r in results) else 1
        ctx = load_scenario(obj, ns.precision, ns.n_max)
        rep = COMMANDS[ns.cmd](ctx, _query_from_args(ns))
        _emit(rep.render(), ns)
        return 0
    except UndecidableAtPrecision as e:
        sys.stderr.write(f"undecidable at precision: {e}\n")
        return 3
    except (AdicError, json.JSONDecodeError, KeyError, OSError) as e:
        msg = f"missing argument {e}" if isinstance(e, KeyError) else str(e)
        sys.stderr.write(f"precondition violated: {msg}\n")
        return 2


if __name__ == "__main__":
    raise SystemExit(main())
