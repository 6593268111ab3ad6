"""``limitlab`` command line: reproducible reports in text, JSON or CSV."""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys
from dataclasses import asdict, dataclass, field
from fractions import Fraction
from typing import Callable, Optional

from limitlab import convergence as conv
from limitlab import families as fam
from limitlab import oracle, uncertain
from limitlab.errors import LabError
from limitlab.events import EXTENDED_LINE, REAL_LINE, identity_rule, make_rule, parse_event, ray_growth, singleton, singleton_shift
from limitlab.extreal import as_rational, dirac, measure_of_event, tv_distance

SCHEMA_VERSION = 1
FORMATS = ("text", "json", "csv")
# text output abbreviates; json is always complete
TEXT_LIST_LIMIT = 12
TEXT_FRACTION_WIDTH = 24


class UsageError(LabError):
    """Bad flag combination; reported with exit status 2."""


@dataclass
class RunConfig:
    command: str
    q: Fraction = Fraction(1, 2)
    c: Fraction = Fraction(1)
    n: Optional[int] = None
    N: int = 200
    k_max: Optional[int] = None
    trials: int = 100_000
    seed: int = 42
    tol: float = 1e-9
    eps: Optional[float] = None
    format: str = "text"
    output_path: Optional[str] = None
    example: Optional[str] = None
    family: Optional[str] = None
    rule: Optional[str] = None
    event: Optional[str] = None
    params: Optional[str] = None
    prefix: str = "0.7"
    base: int = 10
    b_max: Optional[int] = None
    workers: int = 1
    var: str = "Z"

    def public(self) -> dict:
        """Parameters echoed into reports (stringified for stable JSON)."""
        skip = {"command", "format", "output_path"}
        return {k: (None if v is None else str(v)) for k, v in asdict(self).items() if k not in skip}


@dataclass
class Report:
    command: str
    params: dict
    result: dict
    table: Optional[list[dict]] = field(default=None)
    columns: Optional[tuple[str, ...]] = None

    def to_json(self) -> str:
        doc = {"schema_version": SCHEMA_VERSION, "command": self.command, "params": self.params, "result": self.result}
        return json.dumps(doc, sort_keys=True, indent=2) + "\n"

    def to_text(self) -> str:
        lines = [f"# {self.command}"]
        _text_lines(self.result, lines, 0)
        return "\n".join(lines) + "\n"

    def to_csv(self) -> str:
        if self.table is None:
            raise UsageError(f"{self.command} has no tabular output; use --format text or json")
        buf = io.StringIO()
        cols = self.columns or (tuple(self.table[0]) if self.table else ())
        writer = csv.DictWriter(buf, fieldnames=cols, lineterminator="\n")
        writer.writeheader()
        writer.writerows(self.table)
        return buf.getvalue()


def _text_lines(obj, lines: list, depth: int) -> None:
    pad = "  " * depth
    if isinstance(obj, dict):
        for k, v in obj.items():
            if isinstance(v, (dict, list)) and v:
                lines.append(f"{pad}{k}:")
                _text_lines(v, lines, depth + 1)
            else:
                lines.append(f"{pad}{k}: {_scalar(v)}")
    elif isinstance(obj, list):
        shown = obj if len(obj) <= TEXT_LIST_LIMIT else obj[:TEXT_LIST_LIMIT]
        for item in shown:
            if isinstance(item, dict):
                lines.append(f"{pad}- " + ", ".join(f"{k}={_scalar(v)}" for k, v in item.items()))
            else:
                lines.append(f"{pad}- {_scalar(item)}")
        if len(shown) < len(obj):
            lines.append(f"{pad}... ({len(obj) - len(shown)} more; use --format json for all)")
    else:
        lines.append(f"{pad}{_scalar(obj)}")


def _scalar(v) -> str:
    if isinstance(v, list):
        return "[]"
    if isinstance(v, dict):
        return "{}"
    if v is None:
        return "-"
    text = str(v)
    if isinstance(v, str) and len(text) > TEXT_FRACTION_WIDTH and "/" in text:
        try:
            return f"~{float(Fraction(text)):.15g}"
        except (ValueError, ZeroDivisionError, OverflowError):
            pass
    return text


# ---------------------------------------------------------------------------
# helpers


def _family(cfg: RunConfig, name: Optional[str] = None, **override) -> fam.MeasureFamily:
    name = name or cfg.family
    if not name:
        raise UsageError("--family is required")
    if name not in fam.FAMILIES:
        raise UsageError(f"unknown family {name!r}; choose from {sorted(fam.FAMILIES)}")
    params = json.loads(cfg.params) if cfg.params else {}
    accepted = fam._ACCEPTED[name]
    if "q" in accepted:
        params.setdefault("q", cfg.q)
    if "c" in accepted:
        params.setdefault("c", cfg.c)
    if "k_max" in accepted and cfg.k_max is not None:
        params.setdefault("k_max", cfg.k_max)
    params.update(override)
    return fam.make_family(name, params)


def _measure(m) -> dict:
    return {str(p): conv._num_out(w) for p, w in m.atoms}


def _coincidence(family, rule, cfg) -> dict:
    return conv.coincidence_report(family, rule, cfg.N, cfg.tol).to_dict()


# ---------------------------------------------------------------------------
# examples


def _ex1(cfg):
    f = fam.dirac_walk_family()
    return {
        "description": "point mass walking off to infinity",
        "coincidence": _coincidence(f, singleton_shift(), cfg),
        "escape": conv.escaped_mass(f, tol=cfg.tol).to_dict(),
    }


def _ex2(cfg):
    f = fam.dirac_recip_family()
    rule = identity_rule(parse_event("(-inf,0]"))
    return {
        "description": "point masses at 1/n against the fixed event (-inf,0]",
        "coincidence": _coincidence(f, rule, cfg),
        "weak_limit": conv.verify_weak_limit(f, dirac(0), cfg.N, cfg.tol).to_dict(),
    }


def _ex3(cfg):
    f = fam.dirac_recip_family()
    return {
        "description": "point masses at 1/n against the moving events {n}",
        "coincidence": _coincidence(f, singleton_shift(), cfg),
    }


def _ex4(cfg):
    f = fam.record_index_family(cfg.q)
    n = cfg.N
    m = f(n)
    offsets = [{"k": k, "mass_at_n_minus_k": str(m.mass_at(n - k)), "constant_form": str((1 - cfg.q) * cfg.q**k)} for k in range(1, 6)]
    return {
        "description": "record index mass drifting to +inf",
        "mass_at_n_minus_k": offsets,
        "escape": conv.escaped_mass(f, tol=cfg.tol).to_dict(),
    }


def _ex5(cfg):
    f = fam.record_index_family(cfg.q)
    return {
        "description": "record index against {n} and against (-inf,n)",
        "singleton_events": _coincidence(f, singleton_shift(), cfg),
        "ray_events": _coincidence(f, ray_growth(), cfg),
        "weak_limit_dirac_1": conv.verify_weak_limit(f, dirac(1), cfg.N, cfg.tol).to_dict(),
    }


def _ex6(cfg):
    f = fam.record_index_family(cfg.q)
    eps = cfg.eps if cfg.eps is not None else float(1 - cfg.q)
    verdict = conv.tightness_check(f, eps, cfg.N, cfg.b_max)
    tops = [f(n).mass_at(n) for n in (1, 2, 5, 10, cfg.N)]
    return {
        "description": "record index sequence is not tight",
        "tightness": verdict.to_dict(),
        "mass_at_n": {str(n): str(v) for n, v in zip((1, 2, 5, 10, cfg.N), tops)},
        "floor_1_minus_q": str(1 - cfg.q),
    }


def _ex7(cfg):
    f = fam.bernoulli_family(cfg.q)
    eps = cfg.eps if cfg.eps is not None else 0.1
    return {
        "description": "identically distributed Bernoulli marginals",
        "tightness": conv.tightness_check(f, eps, cfg.N, cfg.b_max).to_dict(),
        "coincidence": _coincidence(f, identity_rule(singleton(0)), cfg),
    }


def _ex8(cfg):
    f = fam.running_max_family(cfg.q)
    eps = cfg.eps if cfg.eps is not None else 0.1
    return {
        "description": "running maximum of Bernoulli trials",
        "tightness": conv.tightness_check(f, eps, cfg.N, cfg.b_max).to_dict(),
        "weak_limit_dirac_1": conv.verify_weak_limit(f, dirac(1), cfg.N, cfg.tol).to_dict(),
        "coincidence": _coincidence(f, identity_rule(singleton(1)), cfg),
    }


def _ex9(cfg):
    f = fam.record_index_family(cfg.q)
    ext = conv.extended_limit(f, cfg.N, cfg.tol)
    return {
        "description": "record index limit on the extended line",
        "extended_limit": None if ext is None else _measure(ext),
        "limit_mass_of_R": None if ext is None else conv._num_out(measure_of_event(ext, REAL_LINE)),
        "limit_mass_of_Rbar": None if ext is None else conv._num_out(measure_of_event(ext, EXTENDED_LINE)),
    }


def _ex10(cfg):
    n = cfg.n or 10
    lam, gam, mu = oracle.enumerate_exact(cfg.q, n, workers=cfg.workers)
    closed = fam.record_index(cfg.q, n)
    return {
        "description": "record index built from Bernoulli trials, checked by enumeration",
        "n": n,
        "record_index_pmf": _measure(mu),
        "matches_closed_form": mu == closed,
        "partition_violations": oracle.check_partition(cfg.q, n),
        "identity_residual": str(oracle.check_identity(cfg.q, n, "oracle")),
    }


def _ex11(cfg):
    rows = []
    limit = fam.poisson_truncated(cfg.c, cfg.k_max)
    for n in (10, 100, 1000):
        p = min(Fraction(1), cfg.c / n)
        d = tv_distance(fam.binomial(n, p, mode="float"), limit)
        rows.append({"n": n, "tv_distance": float(d), "le_cam_bound": float(cfg.c * p)})
    return {"description": "binomial(n, c/n) approaching Poisson(c)", "c": str(cfg.c), "rows": rows}


def _ex13(cfg):
    p = uncertain.DigitPrefix.from_string(cfg.prefix, cfg.base)
    chain = []
    for m in range(1, p.length + 1):
        sub = uncertain.DigitPrefix(p.digits[:m], p.base, p.integer_part)
        chain.append(uncertain.uncertain_interval(sub).to_dict())
    return {"description": "nested intervals from longer digit prefixes", "prefix": str(p), "chain": chain}


def _ex14(cfg):
    p = uncertain.DigitPrefix.from_string(cfg.prefix, cfg.base)
    iv = uncertain.uncertain_interval(p)
    return {
        "description": "a truncated expansion is only the left end of its interval",
        "prefix": str(p),
        "partial_sum": str(iv.lo),
        "interval": iv.to_dict(),
        "float_partial_sum": float(iv.lo),
        "float_is_exact": Fraction(float(iv.lo)) == iv.lo,
    }


def _ex15(cfg):
    p = uncertain.DigitPrefix.from_string(cfg.prefix, cfg.base)
    iv = uncertain.uncertain_interval(p)
    rng = uncertain.transmission_range(p)
    return {
        "description": "transmission probability range for an angle prefix (radians)",
        "theta_interval": iv.to_dict(),
        "probability_range": rng.to_dict(),
        "midpoint_probability": math.cos(float((iv.lo + iv.hi) / 2)) ** 2,
    }


EXAMPLES: dict[str, Callable[[RunConfig], dict]] = {
    "ex1": _ex1, "ex2": _ex2, "ex3": _ex3, "ex4": _ex4, "ex5": _ex5,
    "ex6": _ex6, "ex7": _ex7, "ex8": _ex8, "ex9": _ex9, "ex10": _ex10,
    "ex11": _ex11, "ex13": _ex13, "ex14": _ex14, "ex15": _ex15,
}


# ---------------------------------------------------------------------------
# commands


def cmd_example(cfg: RunConfig) -> Report:
    if cfg.example == "ex12":
        raise UsageError("ex12 is out of scope (continuous measures)")
    if cfg.example not in EXAMPLES:
        raise UsageError(f"unknown example {cfg.example!r}; choose from {', '.join(EXAMPLES)}")
    return Report(f"example {cfg.example}", cfg.public(), EXAMPLES[cfg.example](cfg))


def cmd_demo_inconsistency(cfg: RunConfig) -> Report:
    d = conv.inconsistency_demo(cfg.q, cfg.N, cfg.tol).to_dict()
    rows = d.pop("rows")
    d["rows"] = rows if cfg.format == "json" else rows[:10]
    return Report("demo-inconsistency", cfg.public(), d, rows)


def cmd_oracle(cfg: RunConfig) -> Report:
    n = cfg.n or 3
    exact = oracle.enumerate_exact(cfg.q, n, workers=cfg.workers)
    closed = {
        "X": fam.bernoulli_marginal(cfg.q, n),
        "Y": fam.running_max(cfg.q, n),
        "Z": fam.record_index(cfg.q, n),
    }
    result = {}
    for var, m in zip("XYZ", exact):
        result[var] = {"pmf": _measure(m), "matches_closed_form": m == closed[var]}
    result["partition_violations"] = oracle.check_partition(cfg.q, n)
    result["identity_residual"] = str(oracle.check_identity(cfg.q, n, "oracle"))
    var = _var(cfg)
    table = oracle.pmf_rows(exact["XYZ".index(var)], closed[var])
    return Report("oracle", cfg.public(), result, table, oracle.CSV_FIELDS)


def cmd_simulate(cfg: RunConfig) -> Report:
    n = cfg.n or 3
    sim = oracle.simulate(cfg.q, n, cfg.trials, cfg.seed, cfg.workers)
    closed = {
        "X": fam.bernoulli_marginal(cfg.q, n),
        "Y": fam.running_max(cfg.q, n),
        "Z": fam.record_index(cfg.q, n),
    }
    result = {}
    for var, emp in zip("XYZ", sim):
        rows = oracle.pmf_rows(closed[var], closed[var], emp)
        result[var] = {"counts": emp.to_dict()["counts"], "max_abs_err": max(float(r["abs_err"]) for r in rows)}
    result["trials"] = cfg.trials
    result["seed"] = cfg.seed
    result["workers"] = cfg.workers
    var = _var(cfg)
    table = oracle.pmf_rows(closed[var], closed[var], sim["XYZ".index(var)])
    return Report("simulate", cfg.public(), result, table, oracle.CSV_FIELDS)


def cmd_tightness(cfg: RunConfig) -> Report:
    if cfg.eps is None:
        raise UsageError("--eps is required")
    f = _family(cfg)
    verdict = conv.tightness_check(f, cfg.eps, cfg.N, cfg.b_max)
    return Report("tightness", cfg.public(), {"family": f.describe(), **verdict.to_dict()})


def cmd_converge(cfg: RunConfig) -> Report:
    f = _family(cfg)
    if cfg.rule:
        try:
            rule = make_rule(cfg.rule, cfg.event)
        except ValueError as exc:
            raise UsageError(str(exc)) from exc
        rep = conv.coincidence_report(f, rule, cfg.N, cfg.tol)
        path = rep.path_tail
        table = [{"n": cfg.N - len(path) + i + 1, "probability": conv._num_out(v)} for i, v in enumerate(path)]
        return Report("converge", cfg.public(), {"family": f.describe(), **rep.to_dict()}, table, ("n", "probability"))
    ext = conv.extended_limit(f, cfg.N, cfg.tol)
    on_r = conv.verified_limit_on_R(f, cfg.N, cfg.tol)
    result = {
        "family": f.describe(),
        "limit_on_R": None if on_r is None else _measure(on_r),
        "limit_on_Rbar": None if ext is None else _measure(ext),
        "escape": conv.escaped_mass(f, tol=cfg.tol).to_dict(),
    }
    return Report("converge", cfg.public(), result)


def cmd_uncertain(cfg: RunConfig) -> Report:
    p = uncertain.DigitPrefix.from_string(cfg.prefix, cfg.base)
    iv = uncertain.uncertain_interval(p)
    result = {"prefix": str(p), "digits": list(p.digits), "base": p.base, "interval": str(iv), **iv.to_dict()}
    try:
        result["transmission_range"] = uncertain.transmission_range(p).to_dict()
    except LabError as exc:
        result["transmission_range"] = None
        result["transmission_note"] = str(exc)
    return Report("uncertain", cfg.public(), result)


def _var(cfg: RunConfig) -> str:
    var = cfg.var.upper()
    if var not in ("X", "Y", "Z"):
        raise UsageError("--var must be X, Y or Z")
    return var


COMMANDS = {
    "example": cmd_example,
    "demo-inconsistency": cmd_demo_inconsistency,
    "oracle": cmd_oracle,
    "simulate": cmd_simulate,
    "tightness": cmd_tightness,
    "converge": cmd_converge,
    "uncertain": cmd_uncertain,
}


# ---------------------------------------------------------------------------
# argument parsing


def _rational(text: str) -> Fraction:
    try:
        return as_rational(text)
    except (TypeError, ValueError, ZeroDivisionError):
        raise argparse.ArgumentTypeError(f"not a rational number: {text!r}")


def _count(text: str) -> int:
    try:
        value = int(float(text)) if "e" in text.lower() else int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not an integer: {text!r}")
    return value


def _add_common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--q", type=_rational, default=Fraction(1, 2), help="failure probability, p/q or decimal")
    p.add_argument("--c", type=_rational, default=Fraction(1), help="Poisson rate")
    p.add_argument("--n", type=_count, default=None, help="number of trials")
    p.add_argument("--N", type=_count, default=200, help="scan length")
    p.add_argument("--k-max", dest="k_max", type=_count, default=None)
    p.add_argument("--trials", type=_count, default=100_000)
    p.add_argument("--seed", type=int, default=42)
    p.add_argument("--tol", type=float, default=1e-9)
    p.add_argument("--eps", type=float, default=None)
    p.add_argument("--b-max", dest="b_max", type=_count, default=None)
    p.add_argument("--workers", type=_count, default=1)
    p.add_argument("--format", choices=FORMATS, default="text")
    p.add_argument("--out", dest="output_path", default=None, help="write the report here instead of stdout")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="limitlab", description="Limits of discrete probability measures.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("example", help="reproduce a worked example")
    p.add_argument("example", metavar="ID", help="ex1..ex11, ex13..ex15")
    p.add_argument("--prefix", default="0.7")
    p.add_argument("--base", type=int, default=10)
    _add_common(p)

    p = sub.add_parser("demo-inconsistency", help="side-by-side limits of the trial identity")
    _add_common(p)

    for name in ("oracle", "simulate"):
        p = sub.add_parser(name, help=f"{name} the trial statistics X, Y, Z")
        p.add_argument("--var", default="Z", help="variable for the CSV table (X, Y or Z)")
        _add_common(p)

    p = sub.add_parser("tightness", help="tightness scan of a family")
    p.add_argument("--family", required=True, choices=sorted(fam.FAMILIES))
    p.add_argument("--params", default=None, help="family parameters as JSON")
    _add_common(p)

    p = sub.add_parser("converge", help="limits and coincidence for a family")
    p.add_argument("--family", required=True, choices=sorted(fam.FAMILIES))
    p.add_argument("--params", default=None, help="family parameters as JSON")
    p.add_argument("--rule", default=None, help="event rule: singleton_shift, ray_growth or identity")
    p.add_argument("--event", default=None, help="seed event for the identity rule, e.g. '(-inf,0]'")
    _add_common(p)

    p = sub.add_parser("uncertain", help="interval for a digit prefix")
    p.add_argument("--prefix", required=True)
    p.add_argument("--base", type=int, default=10)
    _add_common(p)
    return parser


def config_from_args(ns: argparse.Namespace) -> RunConfig:
    known = RunConfig.__dataclass_fields__
    return RunConfig(**{k: v for k, v in vars(ns).items() if k in known})


def render(report: Report, fmt: str) -> str:
    if fmt == "json":
        return report.to_json()
    if fmt == "csv":
        return report.to_csv()
    return report.to_text()


def main(argv: Optional[list[str]] = None) -> int:
    parser = build_parser()
    ns = parser.parse_args(argv)
    cfg = config_from_args(ns)
    try:
        report = COMMANDS[cfg.command](cfg)
        text = render(report, cfg.format)
    except UsageError as exc:
        print(f"limitlab: error: {exc}", file=sys.stderr)
        return 2
    except (LabError, ValueError) as exc:
        print(f"limitlab: error: {exc}", file=sys.stderr)
        return 1
    if cfg.output_path:
        with open(cfg.output_path, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    return 0


if __name__ == "__main__":
    sys.exit(main())
