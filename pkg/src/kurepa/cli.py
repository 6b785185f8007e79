"""Command line entry point.

Exit status: 0 on success, 2 when a checked property fails (report printed),
1 on usage errors (bad flags, malformed ordinals, unreadable files).
"""

from __future__ import annotations

import argparse
import csv
import dataclasses
import io
import json
import os
import sys
from dataclasses import dataclass
from pathlib import Path
from typing import Optional

from .csequences import CSequenceFamily, load_family, make_family, validate_family
from .ordinals import Ordinal, OrdinalSyntaxError, format_ordinal, parse_ordinal

CONFIG_ENV = "KUREPA_CONFIG"
EXPERIMENTAL_LEMMAS = ("small_preimage",)


class UsageError(Exception):
    pass


class PropertyViolation(Exception):
    pass


@dataclass
class RunConfig:
    family: str = "f3"
    omega: Optional[str] = None
    bound: Optional[str] = None
    family_file: Optional[str] = None
    cap: int = 4
    depth: int = 0
    seed: int = 0
    format: str = "text"
    validate: bool = True
    validate_bound: str = "w^4"

    def __post_init__(self):
        if self.cap < 1 or self.depth < 0:
            raise UsageError("caps must be positive")
        if self.format not in ("text", "json", "csv", "dot"):
            raise UsageError(f"unknown format {self.format!r}")

    @classmethod
    def from_sources(cls, args: argparse.Namespace) -> "RunConfig":
        data: dict = {}
        path = args.config or os.environ.get(CONFIG_ENV)
        if path:
            try:
                data = json.loads(Path(path).read_text())
            except (OSError, json.JSONDecodeError) as exc:
                raise UsageError(f"cannot read config {path}: {exc}") from exc
            unknown = set(data) - {f.name for f in dataclasses.fields(cls)}
            if unknown:
                raise UsageError(f"unknown config keys: {sorted(unknown)}")
        for f in dataclasses.fields(cls):
            v = getattr(args, f.name, None)
            if v is not None:
                data[f.name] = v
        if getattr(args, "no_validate", False):
            data["validate"] = False
        return cls(**data)

    def build_family(self) -> CSequenceFamily:
        if self.family_file:
            try:
                return load_family(self.family_file)
            except OSError as exc:
                raise UsageError(str(exc)) from exc
        omega = parse_ordinal(self.omega) if self.omega else None
        bound = parse_ordinal(self.bound) if self.bound else None
        try:
            return make_family(self.family, omega, bound)
        except ValueError as exc:
            raise UsageError(str(exc)) from exc


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def _common() -> argparse.ArgumentParser:
    p = _Parser(add_help=False)
    g = p.add_argument_group("run configuration")
    g.add_argument("--config", help=f"JSON config file (default: ${CONFIG_ENV})")
    g.add_argument("--family", choices=["f1", "f2", "f3"])
    g.add_argument("--omega", help="tier parameter for f3, e.g. w^2")
    g.add_argument("--bound", help="family bound")
    g.add_argument("--family-file", dest="family_file", help="family definition file")
    g.add_argument("--cap", type=int, help="max coefficient in sweeps")
    g.add_argument("--depth", type=int, help="exponent nesting depth in sweeps")
    g.add_argument("--seed", type=int)
    g.add_argument("--format", choices=["text", "json", "csv", "dot"])
    g.add_argument("--no-validate", action="store_true", dest="no_validate",
                   help="skip the family check that precedes every computation")
    g.add_argument("--validate-bound", dest="validate_bound", help="sweep bound for that check")
    return p


def build_parser() -> argparse.ArgumentParser:
    common = _common()
    top = _Parser(prog="kurepa", description="Walks on ordinals, rho, and finite forcing conditions.")
    sub = top.add_subparsers(dest="cmd", required=True, parser_class=_Parser)

    def cmd(name, help_):
        return sub.add_parser(name, parents=[common], help=help_)

    c = cmd("rho", "rho(A, B) for A <= B")
    c.add_argument("a")
    c.add_argument("b")
    c = cmd("walk", "upper and lower trace of the walk from B to A")
    c.add_argument("a")
    c.add_argument("b")
    c = cmd("table", "rho on all swept pairs below BOUND")
    c.add_argument("sweep_bound", metavar="BOUND")
    cmd("validate-family", "check the square-sequence clauses on a sweep")
    c = cmd("validate-cond", "validate a condition file")
    c.add_argument("file")
    c.add_argument("--variant", default="Q")
    c.add_argument("--mu")
    c = cmd("compatible", "decide compatibility of two condition files")
    c.add_argument("file1")
    c.add_argument("file2")
    c.add_argument("--variant", default="Q")
    c = cmd("project-qc", "project a condition to Q_c")
    c.add_argument("file")
    c = cmd("project-mu", "project a condition below MU")
    c.add_argument("file")
    c.add_argument("mu")
    c = cmd("delta", "extract a Delta-system from a JSON list of sets or conditions")
    c.add_argument("file")
    c.add_argument("--nu", help="also apply the rho-gap refinement with this nu")
    c = cmd("knaster", "run the Knaster harness on N generated conditions")
    c.add_argument("n", type=int)
    c.add_argument("--variant", default="Q")
    c = cmd("simulate", "build a filter from a requirement script and print its tree")
    c.add_argument("script")
    c.add_argument("--variant", default="Q")
    c.add_argument("--budget", type=int)
    c = cmd("lemmas", "run the rho lemma suite on the sweep below BOUND")
    c.add_argument("sweep_bound", metavar="BOUND")
    return top


# -- helpers -------------------------------------------------------------------

def _ord(text: str) -> Ordinal:
    try:
        return parse_ordinal(text)
    except OrdinalSyntaxError as exc:
        raise UsageError(str(exc)) from exc


def _read(path: str) -> str:
    try:
        return Path(path).read_text()
    except OSError as exc:
        raise UsageError(f"cannot read {path}: {exc}") from exc


def _condition(path: str):
    from .posets import Condition
    try:
        return Condition.from_json(_read(path))
    except (json.JSONDecodeError, KeyError, TypeError) as exc:
        raise UsageError(f"{path}: not a condition file ({exc})") from exc
    except OrdinalSyntaxError as exc:
        raise UsageError(f"{path}: {exc}") from exc


def _variant(name: str, mu: Optional[str] = None):
    from .posets import variant_by_name
    try:
        return variant_by_name(name, _ord(mu) if mu else None)
    except ValueError as exc:
        raise UsageError(str(exc)) from exc


def _emit(cfg: RunConfig, obj, text: Optional[str] = None, out=None) -> None:
    out = out or sys.stdout
    if cfg.format == "json" or text is None:
        out.write(json.dumps(obj, indent=2, sort_keys=True) + "\n")
    else:
        out.write(text.rstrip("\n") + "\n")


def _prepare(cfg: RunConfig, family: CSequenceFamily) -> None:
    if not cfg.validate:
        return
    vb = min(_ord(cfg.validate_bound), family.bound)
    rep = validate_family(family, vb, cfg.cap, cfg.depth)
    if not rep.ok:
        counts: dict[str, int] = {}
        for v in rep.violations:
            counts[v.clause] = counts.get(v.clause, 0) + 1
        first = rep.violations[0]
        sys.stderr.write(f"family check: {counts}; first at {format_ordinal(first.alpha)}: {first.detail}\n")
        raise PropertyViolation(f"family fails {sorted(rep.clauses())}; pass --no-validate to run anyway")


# -- commands --------------------------------------------------------------------

def _cmd_rho(cfg, fam, args):
    from .walks import walker_for
    a, b = _ord(args.a), _ord(args.b)
    if a > b:
        raise UsageError(f"need A <= B, got {a} > {b}")
    r = walker_for(fam).rho(a, b)
    _emit(cfg, {"alpha": args.a, "beta": args.b, "rho": format_ordinal(r)}, format_ordinal(r))


def _cmd_walk(cfg, fam, args):
    from .walks import walk
    a, b = _ord(args.a), _ord(args.b)
    if a > b:
        raise UsageError(f"need A <= B, got {a} > {b}")
    t = walk(a, b, fam)
    d = t.to_dict()
    text = "\n".join([
        f"upper: {' > '.join(d['upper'])}",
        f"lower: {', '.join(d['lower']) or '-'}",
        f"lambda: {', '.join(d['lambdas']) or '-'}",
        f"rho: {d['rho']}",
    ])
    _emit(cfg, d, text)


def _cmd_table(cfg, fam, args):
    from .walks import rho_table
    t = rho_table(_ord(args.sweep_bound), fam, cfg.cap, cfg.depth)
    rows = [(format_ordinal(a), format_ordinal(b), format_ordinal(v)) for a, b, v in t.rows()]
    if cfg.format == "json":
        _emit(cfg, [{"alpha": a, "beta": b, "rho": v} for a, b, v in rows])
        return
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["alpha", "beta", "rho"])
    w.writerows(rows)
    sys.stdout.write(buf.getvalue())


def _cmd_validate_family(cfg, fam, args):
    vb = min(_ord(cfg.validate_bound), fam.bound)
    rep = validate_family(fam, vb, cfg.cap, cfg.depth)
    d = rep.to_dict()
    _emit(cfg, d, f"{'ok' if rep.ok else 'FAIL'}: " + json.dumps(d, sort_keys=True))
    if not rep.ok:
        raise PropertyViolation("family violates " + ", ".join(sorted(rep.clauses())))


def _cmd_validate_cond(cfg, fam, args):
    from .posets import validate_condition
    p = _condition(args.file)
    rep = validate_condition(p, _variant(args.variant, args.mu), fam)
    lines = ["ok" if rep.ok else "invalid"] + [
        f"  {v.clause}: {v.detail}" for v in rep.violations]
    _emit(cfg, rep.to_dict(), "\n".join(lines))
    if not rep.ok:
        raise PropertyViolation("condition invalid")


def _cmd_compatible(cfg, fam, args):
    from .posets import compatible, validate_condition
    v = _variant(args.variant)
    p, q = _condition(args.file1), _condition(args.file2)
    for name, c in ((args.file1, p), (args.file2, q)):
        rep = validate_condition(c, v, fam)
        if not rep.ok:
            _emit(cfg, {"file": name, **rep.to_dict()})
            raise PropertyViolation(f"{name} is not a condition of {v.name}")
    res = compatible(p, q, v, fam)
    d = res.to_dict()
    if res.compatible:
        text = "compatible\nwitness: " + json.dumps(d["witness"])
    else:
        text = "incompatible\ncertificate: " + json.dumps(d["certificate"])
    _emit(cfg, d, text)


def _cmd_project_qc(cfg, fam, args):
    from .posets import ProjectionSearchFailed, Q, Q_c, is_condition, project_to_countable, validate_condition
    q = _condition(args.file)
    if not is_condition(q, Q, fam):
        raise PropertyViolation("input is not a condition of Q")
    try:
        pr = project_to_countable(q, fam)
    except ProjectionSearchFailed as exc:
        _emit(cfg, {"ok": False, "clause": exc.clause, "error": str(exc)}, f"search failed: {exc}")
        raise PropertyViolation("projection search failed") from exc
    if not validate_condition(pr.projected, Q_c, fam).ok:
        raise PropertyViolation("projected condition is not in Q_c")
    _emit(cfg, pr.to_json(), json.dumps(pr.projected.to_json()))


def _cmd_project_mu(cfg, fam, args):
    from .ordinals import sweep
    from .posets import ProjectionSearchFailed, Q, Q_mu, is_condition, project_below
    q = _condition(args.file)
    mu = _ord(args.mu)
    if not is_condition(q, Q, fam):
        raise PropertyViolation("input is not a condition of Q")
    try:
        pr, info = project_below(q, mu, fam, sweep(fam.bound, cfg.cap, cfg.depth))
    except ProjectionSearchFailed as exc:
        _emit(cfg, {"ok": False, "clause": exc.clause, "error": str(exc)}, f"search failed: {exc}")
        raise PropertyViolation("projection search failed") from exc
    if not is_condition(pr.projected, Q_mu(mu), fam):
        raise PropertyViolation("projected condition is not in Q_mu")
    d = pr.to_json()
    if info is not None:
        d["nu_bar"] = format_ordinal(info.nu_bar)
        d["mu0"] = format_ordinal(info.mu0)
    _emit(cfg, d, json.dumps(pr.projected.to_json()))


def _cmd_delta(cfg, fam, args):
    from .deltasys import delta_system_indices, rho_gap_refine
    from .posets import Condition
    try:
        data = json.loads(_read(args.file))
    except json.JSONDecodeError as exc:
        raise UsageError(f"{args.file}: {exc}") from exc
    if isinstance(data, dict) and "conditions" in data:
        items = [Condition.from_json(c) for c in data["conditions"]]
        sets = [c.dom for c in items]
    else:
        raw = data["sets"] if isinstance(data, dict) else data
        sets = [[_ord(x) for x in s] for s in raw]
        items = sets
    root, idx = delta_system_indices(sets)
    out = {"root": [format_ordinal(x) for x in sorted(root)], "members": idx, "size": len(idx)}
    if args.nu:
        ref = rho_gap_refine([items[i] for i in idx], _ord(args.nu), fam)
        kept = [idx[[items[i] for i in idx].index(m)] for m in ref.members]
        out["refined"] = {"members": kept, "size": len(kept), "report": ref.report}
    _emit(cfg, out, json.dumps(out))


def _cmd_knaster(cfg, fam, args):
    from .deltasys import knaster_harness
    if args.n < 2:
        raise UsageError("N must be at least 2")
    rep = knaster_harness(args.n, cfg.seed, _variant(args.variant), fam)
    _emit(cfg, rep.to_dict(), rep.summary())
    if not rep.ok:
        raise PropertyViolation("harness found incompatible pairs or failed amalgamations")


def _cmd_simulate(cfg, fam, args):
    from .generictree import build_filter, check_tree, parse_requirements, tree_of
    try:
        reqs = parse_requirements(_read(args.script))
    except ValueError as exc:
        raise UsageError(f"{args.script}: {exc}") from exc
    v = _variant(args.variant)
    budget = args.budget if args.budget is not None else len(reqs)
    filt = build_filter(reqs, cfg.seed, budget, v, fam)
    tree = tree_of(filt)
    rep = check_tree(tree, fam, v)
    if cfg.format == "dot":
        sys.stdout.write(tree.to_dot() + "\n")
    else:
        d = {"filter": filt.to_dict(), "tree": tree.to_json(), "check": rep.to_dict()}
        lines = [f"met {len(filt.met)}/{len(reqs)} requirements, chain length {len(filt.chain)}"]
        lines += [f"unmet: {r} ({why})" for r, why in filt.unmet]
        for xi, b in tree.branch_map.items():
            lines.append(f"b_{format_ordinal(xi)} = {{{', '.join(tree.label(t) for t in b)}}}")
        lines.append("tree invariants: " + ("ok" if rep.ok else f"{len(rep.violations)} violations"))
        _emit(cfg, d, "\n".join(lines))
    if not rep.ok:
        raise PropertyViolation("tree invariants violated")


def _cmd_lemmas(cfg, fam, args):
    from .lemmas import run_lemma_suite
    results = run_lemma_suite(fam, _ord(args.sweep_bound), cfg.cap, cfg.depth)
    gating = [r for r in results if r.name not in EXPERIMENTAL_LEMMAS]
    passed = sum(r.passed for r in gating)
    d = {
        "passed": passed,
        "failed": len(gating) - passed,
        "experimental": {r.name: r.to_dict() for r in results if r.name in EXPERIMENTAL_LEMMAS},
        "lemmas": [r.to_dict() for r in results],
    }
    lines = []
    for r in results:
        tag = "PASS" if r.passed else "FAIL"
        extra = " (experimental, not gating)" if r.name in EXPERIMENTAL_LEMMAS else ""
        lines.append(f"{tag} {r.name}: {r.checked} checked, {r.violation_count} violations, "
                     f"{r.seconds:.2f}s{extra}")
    lines.append(f"{passed}/{len(gating)} gating lemmas pass")
    _emit(cfg, d, "\n".join(lines))
    if passed != len(gating):
        raise PropertyViolation("lemma violations")


COMMANDS = {
    "rho": _cmd_rho, "walk": _cmd_walk, "table": _cmd_table,
    "validate-family": _cmd_validate_family, "validate-cond": _cmd_validate_cond,
    "compatible": _cmd_compatible, "project-qc": _cmd_project_qc, "project-mu": _cmd_project_mu,
    "delta": _cmd_delta, "knaster": _cmd_knaster, "simulate": _cmd_simulate, "lemmas": _cmd_lemmas,
}
# commands that compute on the family and so are gated on its validation
_GATED = set(COMMANDS) - {"validate-family"}


def run_command(argv: list[str]) -> int:
    try:
        args = build_parser().parse_args(argv)
        cfg = RunConfig.from_sources(args)
        fam = cfg.build_family()
        if args.cmd in _GATED:
            _prepare(cfg, fam)
        COMMANDS[args.cmd](cfg, fam, args)
        return 0
    except UsageError as exc:
        sys.stderr.write(f"kurepa: error: {exc}\n")
        return 1
    except PropertyViolation as exc:
        sys.stderr.write(f"kurepa: {exc}\n")
        return 2
    except OrdinalSyntaxError as exc:
        sys.stderr.write(f"kurepa: error: {exc}\n")
        return 1
    except ValueError as exc:
        # family range errors and similar bad arguments
        sys.stderr.write(f"kurepa: error: {exc}\n")
        return 1


def main() -> None:
    sys.exit(run_command(sys.argv[1:]))


if __name__ == "__main__":
    main()
