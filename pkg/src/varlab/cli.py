"""Batch runner: execute diagnostic, regularity, prox and survey suites on a corpus.

Usage::

    varlab --command all --seed 0 --format text
    varlab --corpus my.json --command diagnose --report out.json

Exit status is 0 when every expectation matches and no battery is
inconsistent, 1 otherwise, 2 on usage errors and 3 when the corpus does not
load.
"""
from __future__ import annotations

import argparse
import json
import sys
import zlib
from dataclasses import dataclass, field

import numpy as np

from . import __version__
from .corpus import CorpusError, CorpusInstance, _num, _vec, builtin_corpus_path, load_corpus
from .diagnostics import (
    ae_strict_proto_survey,
    check_frechet,
    check_semismooth_star,
    check_strict_diff_single,
    check_strict_proto,
    check_strictly_smooth,
    extract_chart,
    graph_residual,
)
from .maps import GraphPoint, PLSingle, Smooth, SumGE
from .prox import (
    attentive_localization,
    check_prox_regular,
    check_strict_proto_subgrad,
    envelope_gradient,
    moreau_envelope,
    prox_map,
    trapezoid_one_point,
    trapezoid_two_point,
)
from .regularity import classify_sum, classify_under_strict_proto
from .subspace import TAU_EQ, using_eq_tolerance

__all__ = ["COMMANDS", "RunConfig", "Report", "run", "main", "REPORT_SCHEMA"]

COMMANDS = ("diagnose", "regularity", "prox", "survey", "all")
REPORT_SCHEMA = "varlab-report/1"

EXIT_OK, EXIT_MISMATCH, EXIT_USAGE, EXIT_CORPUS = 0, 1, 2, 3

CHART_QUERIES = 100
CHART_RESIDUAL_TOL = 1e-9
FD_REL_TOL = 1e-5
PROX_SAMPLES = 200
PROX_RESIDUAL_TOL = 1e-9


@dataclass(frozen=True)
class RunConfig:
    seed: int = 0
    tol_eq: float = TAU_EQ

    def __post_init__(self):
        if not self.tol_eq > 0:
            raise ValueError("tol_eq must be positive")
        if int(self.seed) != self.seed or self.seed < 0:
            raise ValueError("seed must be a non-negative integer")

    def to_json(self) -> dict:
        return {"seed": self.seed, "tol_eq": self.tol_eq}


@dataclass
class Report:
    """Per-instance results plus a summary of mismatches and inconsistencies."""

    command: str
    config: RunConfig
    instances: list = field(default_factory=list)
    mismatches: list = field(default_factory=list)
    inconsistencies: list = field(default_factory=list)
    errors: list = field(default_factory=list)
    checks: int = 0

    @property
    def ok(self) -> bool:
        return not (self.mismatches or self.inconsistencies or self.errors)

    @property
    def exit_code(self) -> int:
        return EXIT_OK if self.ok else EXIT_MISMATCH

    def summary(self) -> dict:
        return {
            "instances": len(self.instances),
            "points": sum(len(i["points"]) for i in self.instances),
            "checks": self.checks,
            "failed": len(self.mismatches),
            "passed": self.checks - len(self.mismatches),
            "mismatches": self.mismatches,
            "inconsistencies": self.inconsistencies,
            "errors": self.errors,
            "ok": self.ok,
        }

    def to_json(self) -> dict:
        return {
            "schema": REPORT_SCHEMA,
            "version": __version__,
            "command": self.command,
            "config": self.config.to_json(),
            "instances": self.instances,
            "summary": self.summary(),
        }

    def dumps(self) -> str:
        return json.dumps(_clean(self.to_json()), sort_keys=True, indent=2) + "\n"

    def text(self) -> str:
        lines = [f"varlab {__version__}  command={self.command}  seed={self.config.seed}", ""]
        header = f"{'instance':<24} {'point':<14} {'check':<24} {'expected':<10} {'actual':<14} status"
        lines += [header, "-" * len(header)]
        for inst in self.instances:
            for p in inst["points"]:
                for name in sorted(p["checks"]):
                    c = p["checks"][name]
                    exp = "-" if c["expected"] is None else _short(c["expected"])
                    status = "ok" if c["match"] is not False else "MISMATCH"
                    lines.append(f"{inst['id']:<24} {p['label']:<14} {name:<24} {exp:<10} "
                                 f"{_short(c['actual']):<14} {status}")
        s = self.summary()
        lines += ["", f"instances {s['instances']}  points {s['points']}  checks {s['checks']}  "
                      f"passed {s['passed']}  failed {s['failed']}  "
                      f"inconsistencies {len(s['inconsistencies'])}  errors {len(s['errors'])}"]
        for m in self.mismatches:
            lines.append(f"mismatch: {m}")
        for m in self.inconsistencies:
            lines.append(f"inconsistent: {m}")
        for m in self.errors:
            lines.append(f"error: {m}")
        return "\n".join(lines) + "\n"


def _short(v) -> str:
    if isinstance(v, float):
        return f"{v:.6g}"
    return str(v)


def _clean(obj):
    """Plain JSON values with floats rounded so reports are stable."""
    if isinstance(obj, dict):
        return {str(k): _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _clean(obj.tolist())
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        x = float(obj)
        if not np.isfinite(x):
            return str(x)
        return float(f"{x:.12g}")
    return obj


def sub_seed(seed: int, instance_id: str, index: int = 0) -> int:
    """Seed of one (instance, point) pair derived from the run seed."""
    ss = np.random.SeedSequence([int(seed), zlib.crc32(instance_id.encode("utf-8")), int(index)])
    return int(ss.generate_state(1)[0])


# ----------------------------------------------------------------- checks


class _PointLog:
    def __init__(self, report: Report, iid: str, label: str, expected: dict):
        self.report, self.iid, self.label, self.expected = report, iid, label, expected
        self.checks: dict = {}

    def record(self, name: str, actual, evidence=None, key: str | None = None):
        """Store a check; compare with the expectation under ``key`` (default name)."""
        key = name if key is None else key
        exp = self.expected.get(key)
        match = None
        if exp is not None:
            want = exp["value"]
            if isinstance(want, float) and not isinstance(want, bool):
                vals = actual if isinstance(actual, list) else [actual]
                match = bool(vals) and all(v is not None and abs(v - want) <= exp["tol"] for v in vals)
            else:
                match = actual == want
            self.report.checks += 1
            if not match:
                self.report.mismatches.append(f"{self.iid}/{self.label}/{name}: expected {want!r}, got {actual!r}")
        self.checks[name] = {"actual": actual, "expected": None if exp is None else exp["value"],
                             "source": None if exp is None else exp["source"], "match": match,
                             "evidence": evidence if evidence is not None else {}}

    def inconsistent(self, what: str):
        self.report.inconsistencies.append(f"{self.iid}/{self.label}: {what}")

    def error(self, name: str, err: Exception):
        self.report.errors.append(f"{self.iid}/{self.label}/{name}: {err}")
        self.checks[name] = {"actual": None, "expected": None, "source": None, "match": False,
                             "evidence": {"error": str(err)}}

    def to_json(self, point: GraphPoint) -> dict:
        return {"label": self.label, "x": point.x.tolist(), "y": point.y.tolist(), "checks": self.checks}


def _verdict_json(v):
    return v.to_json()


def _chart_check(F, p, Z, seed):
    """Residual of the extracted chart on sampled queries and its gradient error."""
    ext = extract_chart(F, p, Z, check=False)
    rng = np.random.default_rng(seed)
    radius = 1e-3
    worst = 0.0
    for _ in range(CHART_QUERIES):
        v = ext.v_bar + radius * rng.uniform(-1.0, 1.0, ext.d)
        worst = max(worst, graph_residual(F, ext.assemble(v)))
    fd = ext.fd_gradient()
    err = float(np.abs(fd - ext.gradient).max() / max(1.0, np.abs(ext.gradient).max())) if ext.d else 0.0
    return {"residual": worst, "gradient": ext.gradient.tolist(), "gradient_rel_err": err,
            "selected": ext.selected.tolist()}


def _diagnose(inst: CorpusInstance, cp, idx: int, log: _PointLog, seed: int):
    F, p = inst.obj, cp.point
    sp = check_strict_proto(F, p)
    log.record("strict_proto", sp.consensus, _verdict_json(sp))
    log.record("chart_dim", sp.dims.get("chart_dim"))
    if sp.consensus == "inconsistent":
        log.inconsistent("strict_proto battery disagrees")
    if sp.consensus is True and not sp.identities_hold:
        log.inconsistent(f"dimension identities fail: {sp.identities}")
    ss = check_strictly_smooth(F, p)
    log.record("strictly_smooth", ss.consensus, _verdict_json(ss))
    if ss.consensus == "inconsistent":
        log.inconsistent("strictly_smooth battery disagrees")
    star = check_semismooth_star(F, p, seed=seed)
    log.record("semismooth_star", star.consensus, _verdict_json(star))
    if ss.consensus is True and star.consensus is not True:
        log.inconsistent("strictly smooth point is not semismooth*")
    if isinstance(F, (PLSingle, Smooth)):
        sd = check_strict_diff_single(F, p.x)
        log.record("strict_diff", sd.consensus, _verdict_json(sd))
        if sd.consensus == "inconsistent":
            log.inconsistent("strict_diff battery disagrees")
        if "frechet" in cp.expected:
            fr = check_frechet(F, p.x, seed=seed)
            log.record("frechet", fr.consensus, _verdict_json(fr))
    if cp.tangent_basis is not None and sp.consensus is True:
        try:
            ev = _chart_check(F, p, cp.tangent_basis, seed)
        except (ValueError, TypeError) as err:
            log.error("chart_extraction", err)
        else:
            ok = ev["residual"] < CHART_RESIDUAL_TOL and ev["gradient_rel_err"] <= FD_REL_TOL
            log.record("chart_extraction", ok, ev)
            if not ok:
                log.inconsistent("extracted chart misses the graph or its gradient")


def _regularity(inst: CorpusInstance, cp, idx: int, log: _PointLog, seed: int):
    F, p = inst.obj, cp.point
    v = classify_under_strict_proto(F, p)
    ev = v.to_json()
    for name in ("smsr", "mr", "smr"):
        log.record(name, getattr(v, name), ev if name == "smsr" else None)
    if v.equivalence_applicable and not (v.smsr == v.mr == v.smr):
        log.inconsistent("regularity notions differ under strict proto-differentiability")
    if isinstance(F, SumGE) and "sum_regular" in cp.expected:
        try:
            s = classify_sum(F.g, F.G, p)
        except ValueError as err:
            log.error("sum_regular", err)
            return
        log.record("sum_regular", s.smsr, s.to_json())
        if not s.evidence.get("agrees_with_direct") or not s.evidence.get("criteria_agree"):
            log.inconsistent("sum rule disagrees with the assembled graph")


def _prox_identities(phi, lam, seed):
    """Round-trip residual of P_lam on graph pairs and envelope-gradient error."""
    rng = np.random.default_rng(seed)
    ub = phi.ref.x + lam * phi.ref.y
    out = {}
    if phi.subgrad_graph is not None:
        r = 0.99 * min(phi.prox_eps, phi.window / np.hypot(1.0, lam))
        pairs = phi.subgrad_graph.sample_near(phi.ref, r, PROX_SAMPLES, rng)
        worst = 0.0
        for q in pairs:
            worst = max(worst, float(np.linalg.norm(prox_map(phi, lam, q.x + lam * q.y) - q.x)))
        out["round_trip_samples"] = len(pairs)
        out["round_trip_residual"] = worst
    worst_fd = 0.0
    for _ in range(20):
        d = rng.standard_normal(phi.n)
        u = ub + 0.9 * phi.window * rng.uniform(0, 1) * d / np.linalg.norm(d)
        g = envelope_gradient(phi, lam, u)
        h = 1e-5 * (1.0 + np.linalg.norm(u))
        fd = np.zeros(phi.n)
        for j in range(phi.n):
            e = np.zeros(phi.n)
            e[j] = h
            fd[j] = (moreau_envelope(phi, lam, u + e) - moreau_envelope(phi, lam, u - e)) / (2 * h)
        worst_fd = max(worst_fd, float(np.linalg.norm(fd - g) / max(1.0, np.linalg.norm(g))))
    out["envelope_gradient_rel_err"] = worst_fd
    return out


def _prox(inst: CorpusInstance, cp, idx: int, log: _PointLog, seed: int):
    phi = inst.obj.with_ref(cp.point)
    lam = inst.options.get("lam")
    loc = attentive_localization(phi, lam)
    lam = loc.lam
    v = check_strict_proto_subgrad(phi, lam)
    log.record("strict_proto_subgrad", v.consensus, _verdict_json(v))
    if v.consensus == "inconsistent":
        log.inconsistent("strict_proto_subgrad battery disagrees")
    if v.consensus is True and not v.identities_hold:
        log.inconsistent(f"subgradient identities fail: {v.identities}")
    ok, worst = check_prox_regular(phi, seed=seed)
    log.record("prox_regular", ok, {"worst_violation": worst})
    ids = _prox_identities(phi, lam, seed)
    ident_ok = (ids.get("round_trip_residual", 0.0) < PROX_RESIDUAL_TOL
                and ids["envelope_gradient_rel_err"] <= FD_REL_TOL)
    log.record("prox_identities", ident_ok, ids)
    if not ident_ok:
        log.inconsistent("prox round trip or envelope gradient fails")
    one = trapezoid_one_point(phi, lam, seed=seed)
    log.record("one_point_decays", one["decays"], one)
    W = cp.witness
    two = trapezoid_two_point(phi, lam, seed=seed, witness=W)
    log.record("two_point_decays", two["decays"], two)
    if W is not None and "two_point_witness" in cp.expected:
        log.record("two_point_witness", two["witness_values"])
    if one["hypothesis_verified"] and not one["decays"]:
        log.inconsistent("one-point rule fails although semismooth* holds")
    if two["hypothesis_verified"] and not two["decays"]:
        log.inconsistent("two-point rule fails although strict proto-differentiability holds")


def _survey(inst: CorpusInstance, log: _PointLog, seed: int):
    s = inst.survey
    center = GraphPoint(_vec(s["x"]), _vec(s["y"]))
    res = ae_strict_proto_survey(inst.obj, center, _num(s["radius"]), int(s["count"]), seed)
    ok = bool(res["fraction"] >= _num(s.get("min_fraction", 1)) and res["inconsistent"] == 0)
    log.expected = {"survey": {"value": True, "source": "analytic", "tol": 0.0}}
    log.record("survey", ok, res)


SUITES = {"diagnose": ("map", _diagnose), "regularity": ("map", _regularity), "prox": ("function", _prox)}


def run(command: str, corpus, config: RunConfig | None = None) -> Report:
    """Execute ``command`` on a list of CorpusInstance and return the report."""
    if command not in COMMANDS:
        raise ValueError(f"unknown command {command!r}; choose from {COMMANDS}")
    config = RunConfig() if config is None else config
    suites = ["diagnose", "regularity", "prox", "survey"] if command == "all" else [command]
    report = Report(command, config)
    with using_eq_tolerance(config.tol_eq):
        for inst in sorted(corpus, key=lambda i: i.id):
            entry = {"id": inst.id, "kind": inst.kind, "points": []}
            logs = []
            for idx, cp in enumerate(inst.points):
                log = _PointLog(report, inst.id, cp.label, cp.expected)
                seed = sub_seed(config.seed, inst.id, idx)
                for name in suites:
                    if name == "survey":
                        continue
                    kind, fn = SUITES[name]
                    if kind != inst.kind:
                        continue
                    try:
                        fn(inst, cp, idx, log, seed)
                    except (ValueError, TypeError, np.linalg.LinAlgError) as err:
                        log.error(name, err)
                logs.append((cp.point, log))
            if "survey" in suites and inst.survey is not None and inst.kind == "map":
                log = _PointLog(report, inst.id, "survey", {})
                try:
                    _survey(inst, log, sub_seed(config.seed, inst.id, len(inst.points)))
                except (ValueError, TypeError) as err:
                    log.error("survey", err)
                logs.append((GraphPoint(_vec(inst.survey["x"]), _vec(inst.survey["y"])), log))
            entry["points"] = [log.to_json(p) for p, log in logs if log.checks]
            if entry["points"]:
                report.instances.append(entry)
    return report


def _parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="varlab", description="Run generalized-derivative diagnostics on a corpus.")
    ap.add_argument("--corpus", metavar="PATH", help="corpus file (default: built-in corpus)")
    ap.add_argument("--command", default="all", choices=COMMANDS)
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--tol-eq", type=float, default=TAU_EQ, help="subspace equality tolerance")
    ap.add_argument("--report", metavar="PATH", help="write the report here instead of stdout")
    ap.add_argument("--format", default="json", choices=("json", "text"))
    ap.add_argument("--version", action="version", version=f"varlab {__version__}")
    return ap


def main(argv=None) -> int:
    ap = _parser()
    args = ap.parse_args(argv)
    try:
        config = RunConfig(args.seed, args.tol_eq)
    except ValueError as err:
        ap.print_usage(sys.stderr)
        print(f"varlab: error: {err}", file=sys.stderr)
        return EXIT_USAGE
    path = args.corpus or builtin_corpus_path()
    try:
        corpus = load_corpus(path)
    except FileNotFoundError:
        print(f"varlab: error: corpus file not found: {path}", file=sys.stderr)
        return EXIT_USAGE
    except CorpusError as err:
        print(f"varlab: corpus error: {err}", file=sys.stderr)
        return EXIT_CORPUS
    report = run(args.command, corpus, config)
    out = report.dumps() if args.format == "json" else report.text()
    if args.report:
        with open(args.report, "w", encoding="utf-8") as fh:
            fh.write(out)
    else:
        sys.stdout.write(out)
    return report.exit_code


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
