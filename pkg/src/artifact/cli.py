"""Command-line interface: run mechanisms on JSON instances, audit outcomes, verify
witnesses, compute degrees on finite grids and print the summary tables.

Exit codes: 0 success, 1 a witness failed verification, 2 validation error,
3 search budget exceeded (a partial report is still printed).
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import random
import sys
import time
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Any, Sequence

from . import __version__
from .analyzer import BudgetExceeded, DegreeReport, SearchStats, find_manipulation, rat_degree, verify_witness
from .auctions import VARIANTS, AuctionMechanism, AuctionRule, auction_utility
from .catalog import BATTERIES, WitnessEntry, battery, witness_catalog
from .cake import CakeMechanism, PiecewiseConstantDensity, proportionality_audit
from .core import Mechanism, ReportDomain, ValidationError, format_rational, parse_rational
from .goods import GoodsMechanism, bundle_value, ef1_audit
from .matching import PHI, MatchingMechanism, check_order, stability_audit
from .voting import ABSTAIN, ScoreVector, VotingMechanism, check_ballot

EXIT_OK, EXIT_FAILED, EXIT_VALIDATION, EXIT_BUDGET = 0, 1, 2, 3
FORMATS = ("text", "json", "csv")

MECHANISMS: dict[str, tuple[str, ...]] = {
    "auction": VARIANTS,
    "goods": ("utilitarian", "normalized_utilitarian", "round_robin", "mnw1", "mnw2", "mnw3", "volatile"),
    "cake": ("utilitarian", "normalized_utilitarian", "equal_division_fixed", "equal_division_rotating",
             "dubins_spanier", "ortega_segal_halevi", "bu_song_tao", "volatile"),
    "voting": ("positional", "plurality", "borda", "antiplurality"),
    "matching": ("DA", "Boston"),
}


class InstanceError(ValidationError):
    """Validation failure located by a JSON pointer into the instance."""

    def __init__(self, pointer: str, message: str):
        super().__init__(f"{pointer or '/'}: {message}")
        self.pointer = pointer
        self.detail = message


def _ptr(base: str, key: Any) -> str:
    token = str(key).replace("~", "~0").replace("/", "~1")
    return f"{base}/{token}"


# --- instances -------------------------------------------------------------------------

@dataclass(frozen=True)
class Instance:
    domain: str
    mechanism: Mechanism
    profile: tuple
    values: tuple | None = None  # true values when they differ from the reports (auctions)
    analysis: dict = field(default_factory=dict)  # {"k": int, "grid": ReportDomain, "truths": tuple}


def _get(obj: dict, key: str, ptr: str, kind: type | tuple = object, required: bool = True):
    if key not in obj:
        if required:
            raise InstanceError(_ptr(ptr, key), "required field is missing")
        return None
    value = obj[key]
    if not isinstance(value, kind):
        names = kind.__name__ if isinstance(kind, type) else " or ".join(k.__name__ for k in kind)
        raise InstanceError(_ptr(ptr, key), f"expected {names}")
    return value


def _rational(value: Any, ptr: str) -> Fraction:
    try:
        return parse_rational(value)
    except (ValidationError, ValueError, TypeError, ZeroDivisionError) as exc:
        raise InstanceError(ptr, f"malformed rational: {exc}") from None


def _rationals(values: Any, ptr: str) -> tuple:
    if not isinstance(values, list):
        raise InstanceError(ptr, "expected a list of rationals")
    return tuple(_rational(v, _ptr(ptr, k)) for k, v in enumerate(values))


def _name(value: Any, ptr: str, valid: Sequence[str]) -> str:
    if not isinstance(value, str):
        raise InstanceError(ptr, "expected a mechanism name")
    lookup = {v.lower(): v for v in valid}
    if value.lower() not in lookup:
        raise InstanceError(ptr, f"unknown mechanism {value!r}; valid names: {', '.join(valid)}")
    return lookup[value.lower()]


def _wrap(ptr: str, fn, *args, **kwargs):
    try:
        return fn(*args, **kwargs)
    except InstanceError:
        raise
    except ValidationError as exc:
        raise InstanceError(ptr, str(exc)) from None


def _auction(obj: dict) -> tuple[Mechanism, tuple, tuple | None, Any]:
    key = "rule" if "rule" in obj else "mechanism"
    rule_obj = obj.get(key)
    if isinstance(rule_obj, dict):
        variant = _name(_get(rule_obj, "variant", f"/{key}", str), f"/{key}/variant", VARIANTS)
        params = rule_obj
        base = f"/{key}"
    else:
        variant = _name(rule_obj, f"/{key}", VARIANTS)
        params = obj
        base = ""
    t = _rational(params["t"], _ptr(base, "t")) if "t" in params else None
    w = _rational(params["w"], _ptr(base, "w")) if "w" in params else None
    rule = _wrap(base or f"/{key}", AuctionRule, variant, t, w)
    bids = _rationals(_get(obj, "bids", "", list), "/bids")
    values = _rationals(obj["values"], "/values") if "values" in obj else None
    if values is not None and len(values) != len(bids):
        raise InstanceError("/values", "need one value per bidder")
    mech = _wrap("/bids", AuctionMechanism, rule, len(bids))
    parse = lambda x, p: _rational(x, p)
    return mech, bids, values, parse


def _goods(obj: dict):
    kind = _name(obj.get("mechanism"), "/mechanism", MECHANISMS["goods"])
    rows = _get(obj, "valuations", "", list)
    vals = tuple(_rationals(r, _ptr("/valuations", i)) for i, r in enumerate(rows))
    if not vals or not vals[0]:
        raise InstanceError("/valuations", "need at least one agent and one good")
    if any(len(r) != len(vals[0]) for r in vals):
        raise InstanceError("/valuations", "rows must have equal length")
    n, m = len(vals), len(vals[0])
    opts: dict = {}
    if kind.startswith("mnw"):
        opts["variant"] = kind.upper()
        kind = "mnw"
    if kind == "utilitarian":
        opts["r_max"] = _rational(obj["r_max"], "/r_max") if "r_max" in obj else max(max(r) for r in vals)
    if kind == "normalized_utilitarian" and "V" in obj:
        opts["V"] = _rational(obj["V"], "/V")
    if kind == "round_robin":
        for key in ("order", "item_priority"):
            if key in obj:
                seq = _get(obj, key, "", list)
                opts[key] = tuple(seq)
    mech = _wrap("/mechanism", GoodsMechanism, kind, n, m, **opts)
    parse = lambda x, p: _rationals(x, p)
    return mech, vals, None, parse


_CAKE = {
    "utilitarian": dict(kind="utilitarian"),
    "normalized_utilitarian": dict(kind="utilitarian", normalized=True),
    "equal_division_fixed": dict(kind="equal_division", ordering="Fixed"),
    "equal_division_rotating": dict(kind="equal_division", ordering="Rotating"),
    "dubins_spanier": dict(kind="moving_knife", variant="DubinsSpanier"),
    "ortega_segal_halevi": dict(kind="moving_knife", variant="OrtegaSegalHalevi"),
    "bu_song_tao": dict(kind="moving_knife", variant="BuSongTao"),
    "volatile": dict(kind="volatile"),
}


def parse_density(obj: Any, ptr: str) -> PiecewiseConstantDensity:
    if not isinstance(obj, dict):
        raise InstanceError(ptr, "expected a density object")
    xs = _rationals(_get(obj, "breakpoints", ptr, list), _ptr(ptr, "breakpoints"))
    vs = _rationals(_get(obj, "values", ptr, list), _ptr(ptr, "values"))
    return _wrap(ptr, PiecewiseConstantDensity, xs, vs)


def density_to_json(d: PiecewiseConstantDensity) -> dict:
    return {"breakpoints": [format_rational(x) for x in d.breakpoints],
            "values": [format_rational(v) for v in d.values]}


def _cake(obj: dict):
    kind = _name(obj.get("mechanism"), "/mechanism", MECHANISMS["cake"])
    dens = tuple(parse_density(d, _ptr("/densities", i))
                 for i, d in enumerate(_get(obj, "densities", "", list)))
    if not dens:
        raise InstanceError("/densities", "need at least one agent")
    opts = dict(_CAKE[kind])
    if obj.get("allow_zero"):
        opts["allow_zero"] = True
    mech = _wrap("/mechanism", CakeMechanism, n=len(dens), **opts)
    return mech, dens, None, parse_density


def parse_ballot(value: Any, ptr: str, m: int):
    if value == ABSTAIN:
        return ABSTAIN
    if not isinstance(value, list):
        raise InstanceError(ptr, "a ballot is a list of candidates or \"abstain\"")
    out = []
    for k, c in enumerate(value):
        if not (isinstance(c, str) and c.startswith("c") and c[1:].isdigit()):
            raise InstanceError(_ptr(ptr, k), "candidates are named c1, c2, ...")
        out.append(int(c[1:]))
    ballot = tuple(out)
    _wrap(ptr, check_ballot, ballot, m)
    return ballot


def ballot_to_json(ballot) -> Any:
    return ABSTAIN if ballot == ABSTAIN else [f"c{c}" for c in ballot]


def _voting(obj: dict):
    kind = _name(obj.get("mechanism", "positional"), "/mechanism", MECHANISMS["voting"])
    ballots_raw = _get(obj, "ballots", "", list)
    if kind == "positional":
        scores = _wrap("/scores", ScoreVector, _rationals(_get(obj, "scores", "", list), "/scores"))
    else:
        m = _get(obj, "m", "", int)
        builder = {"plurality": ScoreVector.plurality, "borda": ScoreVector.borda,
                   "antiplurality": ScoreVector.antiplurality}[kind]
        scores = _wrap("/m", builder, m)
    ballots = tuple(parse_ballot(b, _ptr("/ballots", i), scores.m) for i, b in enumerate(ballots_raw))
    if not ballots:
        raise InstanceError("/ballots", "need at least one voter")
    mech = VotingMechanism(scores, len(ballots))
    return mech, ballots, None, lambda x, p: parse_ballot(x, p, scores.m)


def _agent_index(name: Any, prefix: str, ptr: str) -> int:
    if not (isinstance(name, str) and name.startswith(prefix) and name[1:].isdigit() and int(name[1:]) >= 1):
        raise InstanceError(ptr, f"expected an agent name like {prefix}1")
    return int(name[1:])


def _order(entries: Any, other_prefix: str, other: int, ptr: str, complete_only: bool) -> tuple:
    """Listed names first; phi after them unless listed; unlisted partners follow phi."""
    if not isinstance(entries, list):
        raise InstanceError(ptr, "expected a preference list")
    seq = []
    for k, e in enumerate(entries):
        seq.append(PHI if e == "phi" else _agent_index(e, other_prefix, _ptr(ptr, k)))
    if len(set(seq)) != len(seq):
        raise InstanceError(ptr, "preference list repeats an entry")
    if PHI not in seq:
        seq.append(PHI)
    seq += [x for x in range(1, other + 1) if x not in seq]
    out = tuple(seq)
    _wrap(ptr, check_order, out, other, complete_only)
    return out


def _matching(obj: dict):
    kind = _name(obj.get("mechanism", "DA"), "/mechanism", MECHANISMS["matching"])
    side = obj.get("proposing", "M")
    if side not in ("M", "W"):
        raise InstanceError("/proposing", "proposing side is \"M\" or \"W\"")
    complete_only = bool(obj.get("complete_only", False))
    men = _get(obj, "M", "", dict)
    women = _get(obj, "W", "", dict)
    p = max([_agent_index(k, "m", _ptr("/M", k)) for k in men] +
            [_agent_index(e, "m", _ptr(_ptr("/W", k), i)) for k, lst in women.items() if isinstance(lst, list)
             for i, e in enumerate(lst) if e != "phi"] + [int(obj.get("p", 1))])
    q = max([_agent_index(k, "w", _ptr("/W", k)) for k in women] +
            [_agent_index(e, "w", _ptr(_ptr("/M", k), i)) for k, lst in men.items() if isinstance(lst, list)
             for i, e in enumerate(lst) if e != "phi"] + [int(obj.get("q", 1))])
    default = [] if not complete_only else None
    profile = []
    for prefix, table, size, other_prefix, other in (("m", men, p, "w", q), ("w", women, q, "m", p)):
        for k in range(1, size + 1):
            key = f"{prefix}{k}"
            ptr = _ptr("/M" if prefix == "m" else "/W", key)
            if key in table:
                profile.append(_order(table[key], other_prefix, other, ptr, complete_only))
            elif complete_only:
                profile.append(tuple(range(1, other + 1)) + (PHI,))
            else:
                profile.append(_order(default, other_prefix, other, ptr, False))
    mech = MatchingMechanism(p, q, kind, side, complete_only)

    def parse(x, ptr, agent=None):
        raise InstanceError(ptr, "matching grids are not supported in instances")
    return mech, tuple(profile), None, parse


_PROFILE_FIELDS = {"auction": "/bids", "goods": "/valuations", "cake": "/densities", "voting": "/ballots"}
_PARSERS = {"auction": _auction, "goods": _goods, "cake": _cake, "voting": _voting, "matching": _matching}


def parse_instance(data: bytes | str) -> Instance:
    """Decode and validate an instance; errors carry a JSON pointer."""
    try:
        text = data.decode("utf-8") if isinstance(data, bytes) else data
    except UnicodeDecodeError as exc:
        raise InstanceError("", f"instance is not UTF-8: {exc}") from None
    try:
        obj = json.loads(text)
    except json.JSONDecodeError as exc:
        raise InstanceError("", f"JSON syntax error at line {exc.lineno} column {exc.colno}: {exc.msg}") from None
    if not isinstance(obj, dict):
        raise InstanceError("", "instance must be a JSON object")
    domain = _get(obj, "domain", "", str)
    if domain not in _PARSERS:
        raise InstanceError("/domain", f"unknown domain {domain!r}; valid: {', '.join(_PARSERS)}")
    mech, profile, values, parse_report = _PARSERS[domain](obj)
    analysis: dict = {}
    if "analysis" in obj:
        block = _get(obj, "analysis", "", dict)
        if "k" in block:
            k = _get(block, "k", "/analysis", int)
            if not 0 <= k < mech.n:
                raise InstanceError("/analysis/k", f"k must lie in 0..{mech.n - 1}")
            analysis["k"] = k
        if "grid" in block:
            grid = tuple(parse_report(x, _ptr("/analysis/grid", i))
                         for i, x in enumerate(_get(block, "grid", "/analysis", list)))
            truths = None
            if "truths" in block:
                truths = tuple(parse_report(x, _ptr("/analysis/truths", i))
                               for i, x in enumerate(_get(block, "truths", "/analysis", list)))
            analysis["grid"] = _wrap("/analysis/grid", ReportDomain, grid, truths)
    field_name = _PROFILE_FIELDS.get(domain)
    if field_name:
        for i, report in enumerate(profile):
            _wrap(_ptr(field_name, i), mech.check_report, i + 1, report)
    return Instance(domain, mech, profile, values, analysis)


# --- reports ---------------------------------------------------------------------------

@dataclass
class Report:
    command: str
    columns: list[str]
    rows: list[dict] = field(default_factory=list)
    meta: dict = field(default_factory=dict)

    def to_json(self) -> dict:
        return {"command": self.command, "columns": list(self.columns), "rows": [dict(r) for r in self.rows],
                "meta": dict(self.meta)}


def parse_report(data: bytes | str) -> Report:
    obj = json.loads(data.decode("utf-8") if isinstance(data, bytes) else data)
    for key in ("command", "columns", "rows", "meta"):
        if key not in obj:
            raise InstanceError(f"/{key}", "required field is missing")
    return Report(obj["command"], list(obj["columns"]), [dict(r) for r in obj["rows"]], dict(obj["meta"]))


def _cell(value: Any) -> str:
    if isinstance(value, bool):
        return "true" if value else "false"
    if value is None:
        return ""
    return str(value)


def format_report(report: Report, fmt: str = "text") -> bytes:
    """Deterministic rendering of a report."""
    if fmt == "json":
        return (json.dumps(report.to_json(), indent=2, sort_keys=False) + "\n").encode("utf-8")
    if fmt == "csv":
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\r\n")
        writer.writerow(report.columns)
        for r in report.rows:
            writer.writerow([_cell(r.get(c)) for c in report.columns])
        return buf.getvalue().encode("utf-8")
    if fmt != "text":
        raise ValidationError(f"unknown format {fmt!r}; valid: {', '.join(FORMATS)}")
    cells = [report.columns] + [[_cell(r.get(c)) for c in report.columns] for r in report.rows]
    widths = [max(len(row[j]) for row in cells) for j in range(len(report.columns))]
    lines = [report.command]
    lines += [f"  {k}: {_cell(v)}" for k, v in report.meta.items()]
    for row in cells[:1] + [["-" * w for w in widths]] + cells[1:]:
        lines.append("  ".join(c.ljust(w) for c, w in zip(row, widths)).rstrip())
    return ("\n".join(lines) + "\n").encode("utf-8")


# --- commands --------------------------------------------------------------------------

def _agent_label(inst: Instance, i: int) -> str:
    if inst.domain == "matching":
        side, k = inst.mechanism.side_of(i)
        return f"{side.lower()}{k}"
    return f"a{i}"


def run_instance(inst: Instance) -> Report:
    mech, profile = inst.mechanism, inst.profile
    outcome = mech.evaluate(profile)
    meta = {"domain": inst.domain, "mechanism": mech.name, "n": mech.n}
    if inst.domain == "auction":
        values = inst.values or profile
        rows = [{"agent": f"a{i}", "bid": format_rational(profile[i - 1]), "wins": outcome.winner == i,
                 "utility": format_rational(auction_utility(outcome, i, values[i - 1]))}
                for i in range(1, mech.n + 1)]
        meta["price"] = format_rational(outcome.price)
        return Report("run", ["agent", "bid", "wins", "utility"], rows, meta)
    if inst.domain == "goods":
        rows = [{"agent": f"a{i}", "bundle": " ".join(f"g{g}" for g in sorted(outcome.bundle(i))),
                 "value": format_rational(bundle_value(profile[i - 1], outcome.bundle(i)))}
                for i in range(1, mech.n + 1)]
        return Report("run", ["agent", "bundle", "value"], rows, meta)
    if inst.domain == "cake":
        rows = [{"agent": f"a{i}", "piece": str(outcome.piece(i)),
                 "value": format_rational(mech.utility(i, profile[i - 1], outcome))}
                for i in range(1, mech.n + 1)]
        return Report("run", ["agent", "piece", "value"], rows, meta)
    if inst.domain == "voting":
        rows = [{"candidate": f"c{c}", "score": format_rational(s), "winner": c in outcome.winners}
                for c, s in enumerate(outcome.scores, 1)]
        return Report("run", ["candidate", "score", "winner"], rows, meta)
    rows = [{"agent": _agent_label(inst, i), "partner": _partner_label(inst, i, outcome)}
            for i in range(1, mech.n + 1)]
    return Report("run", ["agent", "partner"], rows, meta)


def _partner_label(inst: Instance, i: int, outcome) -> str:
    mech = inst.mechanism
    side, _ = mech.side_of(i)
    x = mech.partner(i, outcome)
    if x == PHI:
        return "phi"
    return f"w{x}" if side == "M" else f"m{x}"


def audit_instance(inst: Instance) -> Report:
    mech, profile = inst.mechanism, inst.profile
    outcome = mech.evaluate(profile)
    meta = {"domain": inst.domain, "mechanism": mech.name, "n": mech.n}
    if inst.domain == "goods":
        audit = ef1_audit(profile, outcome)
        meta["ef1"] = audit.is_ef1
        rows = [{"agent": f"a{i}", "other": f"a{j}", "strong": (i, j) in audit.strong_envy_pairs}
                for i, j in audit.envy_pairs]
        return Report("audit", ["agent", "other", "strong"], rows, meta)
    if inst.domain == "cake":
        audit = proportionality_audit(profile, outcome)
        meta["proportional"] = all(r.satisfied for r in audit)
        rows = [{"agent": f"a{r.agent}", "value": format_rational(r.value), "share": format_rational(r.share),
                 "satisfied": r.satisfied} for r in audit]
        return Report("audit", ["agent", "value", "share", "satisfied"], rows, meta)
    if inst.domain == "matching":
        audit = stability_audit(mech.prefs(profile), outcome)
        meta["stable"] = audit.stable
        rows = [{"kind": "blocking_pair", "agents": f"{a} {b}"} for a, b in audit.blocking_pairs]
        rows += [{"kind": "irrational", "agents": a} for a in audit.irrationality_violations]
        return Report("audit", ["kind", "agents"], rows, meta)
    if inst.domain == "auction":
        values = inst.values or profile
        rows = []
        for i in range(1, mech.n + 1):
            u = auction_utility(outcome, i, values[i - 1])
            rows.append({"agent": f"a{i}", "utility": format_rational(u), "individually_rational": u >= 0})
        return Report("audit", ["agent", "utility", "individually_rational"], rows, meta)
    report = run_instance(inst)
    report.command = "audit"
    return report


def _witness_row(entry: WitnessEntry, w, verdict=None) -> dict:
    row = {"name": entry.name, "mechanism": w.mechanism.name, "n": w.mechanism.n, "k": w.k,
           "claim": entry.claim}
    if verdict is not None:
        row.update(profitable=verdict.profitable, safe_on_probe=verdict.safe_on_probe, ok=verdict.ok,
                   evaluations=verdict.evaluations)
    return row


def _select(names: Sequence[str]) -> list[WitnessEntry]:
    catalog = witness_catalog()
    if not names:
        return list(catalog.values())
    out = []
    for name in names:
        matches = [e for key, e in catalog.items() if key == name or key.startswith(name.rstrip("/") + "/")]
        if not matches:
            raise ValidationError(f"unknown witness {name!r}; valid: {', '.join(catalog)}")
        out += matches
    return out


def witness_list(names: Sequence[str] = ()) -> Report:
    rows = []
    for e in _select(names):
        rows.append(_witness_row(e, e.build()))
    return Report("witness list", ["name", "mechanism", "n", "k", "claim"], rows)


def witness_verify(names: Sequence[str] = ()) -> Report:
    rows = []
    for e in _select(names):
        w = e.build()
        rows.append(_witness_row(e, w, verify_witness(w)))
    cols = ["name", "mechanism", "n", "k", "claim", "profitable", "safe_on_probe", "ok", "evaluations"]
    return Report("witness verify", cols, rows, {"all_ok": all(r["ok"] for r in rows)})


DEGREE_COLUMNS = ["mechanism", "n", "k", "verdict", "evaluations", "degree", "claim", "scope"]


def _degree_rows(name: str, rep: DegreeReport, claim: str = "") -> list[dict]:
    rows = [{"mechanism": name, "n": rep.n, "k": v.k, "verdict": v.status, "evaluations": v.evaluations,
             "degree": None, "claim": claim, "scope": None} for v in rep.verdicts]
    status = "degree" if rep.complete else "partial"
    rows.append({"mechanism": name, "n": rep.n, "k": None, "verdict": status, "evaluations": rep.evaluations,
                 "degree": rep.degree if rep.complete else None, "claim": claim,
                 "scope": rep.scope if rep.complete else "search budget exceeded"})
    return rows


def degree_battery(name: str, *, k: int | None = None, budget: int | None = None, threads: int = 1) -> Report:
    """Degrees (or a single-k search) for every mechanism of a battery."""
    entries = battery(name)
    report = Report("degree", list(DEGREE_COLUMNS), [], {"battery": name})
    left = budget
    for e in entries:
        mech = e.mechanism
        try:
            if k is not None:
                if not 0 <= k < mech.n:
                    raise ValidationError(f"k must lie in 0..{mech.n - 1}")
                stats = SearchStats()
                w = find_manipulation(mech, e.domains, k, budget=left, threads=threads, stats=stats)
                report.rows.append({"mechanism": mech.name, "n": mech.n, "k": k,
                                    "verdict": "witness" if w else "exhausted", "evaluations": stats.evaluations,
                                    "degree": None, "claim": e.claim, "scope": None})
                used = stats.evaluations
            else:
                rep = rat_degree(mech, e.domains, budget=left, threads=threads)
                report.rows += _degree_rows(mech.name, rep, e.claim)
                used = rep.evaluations
        except BudgetExceeded as exc:
            if exc.partial is not None:
                report.rows += _degree_rows(mech.name, exc.partial, e.claim)
            else:
                report.rows.append({"mechanism": mech.name, "n": mech.n, "k": k, "verdict": "partial",
                                    "evaluations": exc.evaluations, "degree": None, "claim": e.claim,
                                    "scope": "search budget exceeded"})
            raise BudgetExceeded(exc.evaluations, report) from None
        if left is not None:
            left -= used
    return report


def degree_instance(inst: Instance, *, k: int | None = None, budget: int | None = None, threads: int = 1) -> Report:
    grid = inst.analysis.get("grid")
    if grid is None:
        raise InstanceError("/analysis/grid", "a degree computation needs a report grid")
    domains = [grid] * inst.mechanism.n
    k = inst.analysis.get("k", k)
    report = Report("degree", list(DEGREE_COLUMNS), [], {"domain": inst.domain})
    name = inst.mechanism.name
    try:
        if k is not None:
            stats = SearchStats()
            w = find_manipulation(inst.mechanism, domains, k, budget=budget, threads=threads, stats=stats)
            report.rows.append({"mechanism": name, "n": inst.mechanism.n, "k": k,
                                "verdict": "witness" if w else "exhausted", "evaluations": stats.evaluations,
                                "degree": None, "claim": "", "scope": None})
        else:
            report.rows += _degree_rows(name, rat_degree(inst.mechanism, domains, budget=budget, threads=threads))
    except BudgetExceeded as exc:
        if exc.partial is not None:
            report.rows += _degree_rows(name, exc.partial)
        raise BudgetExceeded(exc.evaluations, report) from None
    return report


TABLE_DOMAINS = {1: "auction", 2: "goods", 3: "cake", 4: "voting"}


def table(number: int, *, budget: int | None = None, threads: int = 1) -> Report:
    """Summary table: computed degrees for auctions, verified witnesses elsewhere."""
    if number not in TABLE_DOMAINS:
        raise ValidationError(f"unknown table {number}; valid: {', '.join(map(str, TABLE_DOMAINS))}")
    cols = ["mechanism", "claim", "k", "verdict"]
    if number == 1:
        deg = degree_battery("auctions", budget=budget, threads=threads)
        rows = [{"mechanism": r["mechanism"], "claim": r["claim"], "k": r["degree"], "verdict": "degree"}
                for r in deg.rows if r["verdict"] == "degree"]
        return Report("table 1", cols, rows, {"n": 3, "grid": "bids 0..3 step 1/4; values and deviations step 1/2"})
    domain = TABLE_DOMAINS[number]
    rows = []
    for e in _select([domain]):
        w = e.build()
        v = verify_witness(w)
        rows.append({"mechanism": e.name.split("/", 1)[1], "claim": e.claim, "k": w.k,
                     "verdict": "witness verified" if v.ok else "witness failed"})
    return Report(f"table {number}", cols, rows)


# --- random instances ------------------------------------------------------------------

def random_instance(domain: str, seed: int, n: int = 3, m: int = 3) -> dict:
    rng = random.Random(seed)
    if domain == "auction":
        return {"domain": "auction", "mechanism": "SecondPrice",
                "bids": [str(rng.randint(0, 12)) + "/4" for _ in range(n)]}
    if domain == "goods":
        return {"domain": "goods", "mechanism": "round_robin",
                "valuations": [[str(rng.randint(0, 5)) for _ in range(m)] for _ in range(n)]}
    if domain == "cake":
        dens = []
        for _ in range(n):
            cut = rng.randint(1, 3)
            dens.append({"breakpoints": ["0", f"{cut}/4", "1"], "values": [str(rng.randint(1, 5)), str(rng.randint(1, 5))]})
        return {"domain": "cake", "mechanism": "dubins_spanier", "densities": dens}
    if domain == "voting":
        ballots = []
        for _ in range(n):
            perm = list(range(1, m + 1))
            rng.shuffle(perm)
            ballots.append([f"c{c}" for c in perm])
        return {"domain": "voting", "mechanism": "borda", "m": m, "ballots": ballots}
    if domain == "matching":
        def pref(prefix, size):
            names = [f"{prefix}{k}" for k in range(1, size + 1)]
            rng.shuffle(names)
            return names[:rng.randint(0, size)] + ["phi"]
        return {"domain": "matching", "mechanism": "DA",
                "M": {f"m{i}": pref("w", m) for i in range(1, n + 1)},
                "W": {f"w{j}": pref("m", n) for j in range(1, m + 1)}}
    raise ValidationError(f"unknown domain {domain!r}; valid: {', '.join(_PARSERS)}")


# --- entry point -----------------------------------------------------------------------

def _build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--format", choices=FORMATS, default="text")
    common.add_argument("--budget", type=int, default=None, help="maximum profile evaluations")
    common.add_argument("--threads", type=int, default=1)
    common.add_argument("--k", type=int, default=None, help="search a single number of known agents")
    common.add_argument("--seed", type=int, default=None, help="seed for --random instances")

    parser = argparse.ArgumentParser(prog="artifact", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)
    for name, help_text in (("run", "evaluate a mechanism on an instance"), ("audit", "audit the outcome")):
        p = sub.add_parser(name, parents=[common], help=help_text)
        p.add_argument("instance", nargs="?", help="instance JSON file, or - for stdin")
        p.add_argument("--random", choices=tuple(_PARSERS), help="generate a random instance instead")
        p.add_argument("--n", type=int, default=3)
        p.add_argument("--m", type=int, default=3)
    w = sub.add_parser("witness", help="list or verify the built-in witnesses")
    wsub = w.add_subparsers(dest="action", required=True)
    for action in ("list", "verify"):
        p = wsub.add_parser(action, parents=[common])
        p.add_argument("names", nargs="*", help="witness names or domain prefixes")
    d = sub.add_parser("degree", parents=[common], help="RAT-degree on a finite grid")
    d.add_argument("target", help=f"battery ({', '.join(BATTERIES)}) or instance file with an analysis grid")
    t = sub.add_parser("table", parents=[common], help="reproduce a summary table")
    t.add_argument("number", type=int, choices=sorted(TABLE_DOMAINS))
    return parser


def _read(path: str | None) -> bytes:
    if path in (None, "-"):
        return sys.stdin.buffer.read()
    with open(path, "rb") as fh:
        return fh.read()


def _load(args) -> Instance:
    if args.random:
        seed = args.seed if args.seed is not None else 0
        return parse_instance(json.dumps(random_instance(args.random, seed, args.n, args.m)))
    if args.instance is None:
        raise ValidationError("an instance file or --random is required")
    return parse_instance(_read(args.instance))


def main(argv: Sequence[str] | None = None) -> int:
    args = _build_parser().parse_args(argv)
    out = sys.stdout.buffer
    start = time.perf_counter()
    try:
        if args.command == "run":
            report = run_instance(_load(args))
        elif args.command == "audit":
            report = audit_instance(_load(args))
        elif args.command == "witness":
            report = witness_list(args.names) if args.action == "list" else witness_verify(args.names)
        elif args.command == "degree":
            if args.target in BATTERIES:
                report = degree_battery(args.target, k=args.k, budget=args.budget, threads=args.threads)
            else:
                report = degree_instance(parse_instance(_read(args.target)), k=args.k, budget=args.budget,
                                         threads=args.threads)
        else:
            report = table(args.number, budget=args.budget, threads=args.threads)
    except InstanceError as exc:
        sys.stderr.write(json.dumps({"error": exc.detail, "pointer": exc.pointer}) + "\n")
        return EXIT_VALIDATION
    except ValidationError as exc:
        sys.stderr.write(json.dumps({"error": str(exc), "pointer": ""}) + "\n")
        return EXIT_VALIDATION
    except OSError as exc:
        sys.stderr.write(json.dumps({"error": str(exc), "pointer": ""}) + "\n")
        return EXIT_VALIDATION
    except BudgetExceeded as exc:
        if isinstance(exc.partial, Report):
            exc.partial.meta["budget_exceeded"] = True
            out.write(format_report(exc.partial, args.format))
        sys.stderr.write(json.dumps({"error": str(exc), "evaluations": exc.evaluations}) + "\n")
        return EXIT_BUDGET
    if args.format == "text":
        report.meta.setdefault("elapsed_ms", round((time.perf_counter() - start) * 1000))
    out.write(format_report(report, args.format))
    if args.command == "witness" and args.action == "verify" and not report.meta.get("all_ok", True):
        return EXIT_FAILED
    return EXIT_OK
