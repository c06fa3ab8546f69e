"""Acceptance suite: one test per criterion, each printing a PASS/FAIL line."""
import time

import numpy as np

from varlab.cli import RunConfig, run
from varlab.cones import angular_gap, cones_at, estimate_paratingent
from varlab.corpus import builtin_corpus_path, load_corpus
from varlab.diagnostics import (
    check_semismooth_star,
    check_strict_proto,
    check_strictly_smooth,
    extract_chart,
    graph_residual,
)
from varlab.maps import GraphPoint, SumGE
from varlab.polyhedral import ConeUnion, ConvexCone
from varlab.prox import (
    attentive_derivatives,
    attentive_localization,
    check_strict_proto_subgrad,
    envelope_gradient,
    moreau_envelope,
    prox_map,
    trapezoid_one_point,
    trapezoid_two_point,
)
from varlab.regularity import (
    classify_sum,
    classify_under_strict_proto,
    levy_rockafellar,
    mordukhovich,
    strong_metric_regular,
)
from varlab.subspace import SplitDims, Subspace, adjoint, distance

SIN_2DEG = np.sin(np.radians(2.0))


def map_points(corpus):
    for inst in corpus:
        if inst.kind == "map":
            for cp in inst.points:
                yield inst, cp


def localized_points(corpus):
    """Function fixtures read as subgradient localizations at each reference pair."""
    for inst in corpus:
        if inst.kind == "function":
            for cp in inst.points:
                phi = inst.obj.with_ref(cp.point)
                yield inst, cp, attentive_localization(phi, inst.options.get("lam"))


def union_distance(U: ConeUnion, v) -> float:
    return min(P.distance_to(v) for P in U.pieces)


# ------------------------------------------------------------------ 1


def test_criterion_1_subspace_laws(acceptance):
    rng = np.random.default_rng(1)
    t0 = time.perf_counter()
    worst_inv = worst_iso = 0.0
    dim_ok = True
    for _ in range(1000):
        n, m = rng.integers(1, 5, size=2)
        dims = SplitDims(int(n), int(m))
        k = dims.total
        L1 = Subspace.from_vectors(rng.standard_normal((k, rng.integers(0, k + 1))), k)
        L2 = Subspace.from_vectors(rng.standard_normal((k, rng.integers(0, k + 1))), k)
        A1 = adjoint(dims, L1)
        worst_inv = max(worst_inv, distance(adjoint(dims.transposed(), A1), L1))
        worst_iso = max(worst_iso, abs(distance(A1, adjoint(dims, L2)) - distance(L1, L2)))
        dim_ok &= A1.dim == k - L1.dim
    elapsed = time.perf_counter() - t0
    passed = worst_inv <= 1e-8 and worst_iso <= 1e-8 and dim_ok and elapsed < 5.0
    acceptance(1, "subspace laws", passed,
               f"involution {worst_inv:.1e}, isometry {worst_iso:.1e}, {elapsed:.2f}s")
    assert passed


# ------------------------------------------------------------------ 2


def _bundle_failures(B, label, F=None, p=None):
    out = []
    T, P = B.tangent, B.paratingent
    if not ConeUnion.single(B.clarke_tangent).issubset(T):
        out.append(f"{label}: clarke not in tangent")
    if not T.issubset(P):
        out.append(f"{label}: tangent not in paratingent")
    if not B.regular_normal.equals(T.polar()):
        out.append(f"{label}: regular normal is not the polar of the tangent cone")
    if not B.clarke_tangent.equals(B.limiting_normal.polar()):
        out.append(f"{label}: clarke is not the polar of the limiting normal cone")
    if B.exact:
        if not P.equals(-P):
            out.append(f"{label}: paratingent not symmetric")
    else:
        D = estimate_paratingent(F, p, seed=0)
        worst = max(union_distance(P, d) for d in D[:: max(1, len(D) // 2000)])
        if worst > SIN_2DEG:
            out.append(f"{label}: sampled secants leave the paratingent cone ({worst:.3g})")
        gens = np.vstack([Q.spanning_vectors() for Q in P.pieces])
        if max(union_distance(P, -g / np.linalg.norm(g)) for g in gens) > SIN_2DEG:
            out.append(f"{label}: paratingent not symmetric")
    return out


def test_criterion_2_cone_invariants(corpus, acceptance):
    t0 = time.perf_counter()
    failures, count = [], 0
    for inst, cp in map_points(corpus):
        B = cones_at(inst.obj, cp.point)
        failures += _bundle_failures(B, f"{inst.id}/{cp.label}", inst.obj, cp.point)
        count += 1
    for inst, cp, loc in localized_points(corpus):
        B, _ = attentive_derivatives(loc, cp.point)
        failures += _bundle_failures(B, f"{inst.id}/{cp.label}", loc.as_map, cp.point)
        count += 1
    elapsed = time.perf_counter() - t0
    passed = not failures and elapsed < 30.0
    acceptance(2, "cone invariants", passed, f"{count} points, {len(failures)} failures, {elapsed:.1f}s")
    assert passed, failures


# ------------------------------------------------------------------ 3


def test_criterion_3_tangential_union(corpus_by_id, acceptance):
    inst = corpus_by_id["pm_x2"]
    p = next(cp.point for cp in inst.points if cp.label == "origin")
    gap = angular_gap(estimate_paratingent(inst.obj, p, seed=0))
    B = cones_at(inst.obj, p)
    horizontal = ConvexCone.from_subspace(Subspace.from_vectors([1.0, 0.0]))
    vertical = ConvexCone.from_subspace(Subspace.from_vectors([0.0, 1.0]))
    T_ok = B.tangent.equals(ConeUnion.single(horizontal)) and B.clarke_tangent.equals(horizontal)
    v = check_strictly_smooth(inst.obj, p)
    Pdim = v.dims["paratingent"]
    normal_ok = B.limiting_normal.equals(ConeUnion.single(vertical))
    passed = gap < 10.0 and T_ok and v.consensus is False and Pdim == 2 and normal_ok
    acceptance(3, "tangential union counterexample", passed,
               f"max gap {gap:.2f} deg, paratingent dim {Pdim}, strictly smooth {v.consensus}")
    assert passed


# ------------------------------------------------------------------ 4


def test_criterion_4_battery_consistency(corpus, acceptance):
    instances, points, bad = set(), 0, []
    for inst, cp in map_points(corpus):
        v = check_strict_proto(inst.obj, cp.point)
        instances.add(inst.id)
        points += 1
        if v.consensus == "inconsistent":
            bad.append(f"{inst.id}/{cp.label}: inconsistent")
        if v.consensus is True:
            d, dims = v.dims["chart_dim"], inst.obj.dims
            if not (v.dims["strict"] == d and v.dims["coderivative"] == dims.total - d and v.identities_hold):
                bad.append(f"{inst.id}/{cp.label}: identities {v.identities}")
    for inst, cp, loc in localized_points(corpus):
        v = check_strict_proto(loc.as_map, cp.point)
        instances.add(inst.id)
        points += 1
        if v.consensus == "inconsistent":
            bad.append(f"{inst.id}/{cp.label}: inconsistent")
        if v.consensus is True and not v.identities_hold:
            bad.append(f"{inst.id}/{cp.label}: identities {v.identities}")
    passed = not bad and len(instances) >= 12 and points >= 30
    acceptance(4, "battery consistency", passed, f"{len(instances)} instances, {points} points, {len(bad)} failures")
    assert passed, bad


# ------------------------------------------------------------------ 5


def test_criterion_5_strictly_smooth_implies_semismooth_star(corpus, acceptance):
    checked, violations = 0, []
    for inst, cp in map_points(corpus):
        if check_strictly_smooth(inst.obj, cp.point).consensus is True:
            checked += 1
            if check_semismooth_star(inst.obj, cp.point, seed=0).consensus is not True:
                violations.append(f"{inst.id}/{cp.label}")
    for inst, cp, loc in localized_points(corpus):
        if check_strictly_smooth(loc.as_map, cp.point).consensus is True:
            checked += 1
            if check_semismooth_star(loc.as_map, cp.point, delta0=min(0.1, loc.window), seed=0).consensus is not True:
                violations.append(f"{inst.id}/{cp.label}")
    passed = not violations and checked > 0
    acceptance(5, "strictly smooth implies semismooth*", passed, f"{checked} points, {len(violations)} violations")
    assert passed, violations


# ------------------------------------------------------------------ 6


def test_criterion_6_chart_extraction(corpus, acceptance):
    rng = np.random.default_rng(6)
    checked, bad, worst_res, worst_fd = 0, [], 0.0, 0.0
    for inst, cp in map_points(corpus):
        if cp.tangent_basis is None or check_strictly_smooth(inst.obj, cp.point).consensus is not True:
            continue
        checked += 1
        ext = extract_chart(inst.obj, cp.point, cp.tangent_basis)
        res = max(graph_residual(inst.obj, ext.assemble(ext.v_bar + 1e-3 * rng.uniform(-1, 1, ext.d)))
                  for _ in range(100))
        fd = ext.fd_gradient()
        rel = float(np.abs(fd - ext.gradient).max() / max(1.0, np.abs(ext.gradient).max()))
        worst_res, worst_fd = max(worst_res, res), max(worst_fd, rel)
        if not (res < 1e-9 and rel <= 1e-5):
            bad.append(f"{inst.id}/{cp.label}: residual {res:.2e}, gradient error {rel:.2e}")
    passed = not bad and checked > 0
    acceptance(6, "chart extraction", passed,
               f"{checked} points, worst residual {worst_res:.1e}, worst gradient error {worst_fd:.1e}")
    assert passed, bad


# ------------------------------------------------------------------ 7


def test_criterion_7_regularity_equivalence(corpus_by_id, corpus, acceptance):
    checked, bad = 0, []
    for inst, cp in map_points(corpus):
        F, p = inst.obj, cp.point
        v = check_strict_proto(F, p)
        if v.consensus is not True or v.dims["chart_dim"] != F.dims.m:
            continue
        checked += 1
        rv = classify_under_strict_proto(F, p)
        direct = (levy_rockafellar(F, p)[0], mordukhovich(F, p)[0], strong_metric_regular(F, p)[0])
        if not (rv.smsr == rv.mr == rv.smr) or len(set(direct)) != 1 or direct[0] != rv.smsr:
            bad.append(f"{inst.id}/{cp.label}: {rv.smsr, rv.mr, rv.smr} vs {direct}")
    sub = corpus_by_id["abs_subgrad"]
    o = next(cp.point for cp in sub.points if cp.label == "origin")
    rv = classify_under_strict_proto(sub.obj, o)
    zero_ok = rv.smsr and rv.mr and rv.smr and np.allclose(rv.representation, 0.0, atol=1e-12)
    pm = corpus_by_id["pm_x2"]
    po = next(cp.point for cp in pm.points if cp.label == "origin")
    smr, ev = strong_metric_regular(pm.obj, po)
    pm_ok = smr is False and ev["strict_kernel_witness"] is not None
    passed = not bad and checked > 0 and zero_ok and pm_ok
    acceptance(7, "regularity equivalence", passed,
               f"{checked} points, subgradient origin C = {np.round(rv.representation, 12).tolist()}, "
               f"tangential union smr {smr}")
    assert passed, bad


# ------------------------------------------------------------------ 8


def test_criterion_8_sum_rule(corpus, corpus_by_id, acceptance):
    checked, bad = 0, []
    for inst, cp in map_points(corpus):
        F = inst.obj
        if not isinstance(F, SumGE):
            continue
        q = GraphPoint(cp.point.x, cp.point.y - F.g.value(cp.point.x))
        if check_strict_proto(F.G, q).consensus is not True:
            continue
        checked += 1
        s = classify_sum(F.g, F.G, cp.point)
        d = classify_under_strict_proto(F, cp.point)
        if not (d.equivalence_applicable and (s.smsr, s.mr, s.smr) == (d.smsr, d.mr, d.smr)):
            bad.append(f"{inst.id}/{cp.label}: sum {s.smsr} vs direct {(d.smsr, d.mr, d.smr)}")
    sing = corpus_by_id["sum_singular"]
    s = classify_sum(sing.obj.g, sing.obj.G, sing.points[0].point)
    singular_ok = (s.smsr, s.mr, s.smr) == (False, False, False)
    passed = not bad and checked > 0 and singular_ok
    acceptance(8, "sum rule", passed, f"{checked} sum points agree, singular fixture all false: {singular_ok}")
    assert passed, bad


# ------------------------------------------------------------------ 9


def test_criterion_9_prox_identities(corpus, acceptance):
    rng = np.random.default_rng(9)
    worst_rt = worst_fd = 0.0
    fixtures = 0
    for inst, cp, loc in localized_points(corpus):
        phi, lam = loc.base, loc.lam
        ub = phi.ref.x + lam * phi.ref.y
        fixtures += 1
        for _ in range(200):
            d = rng.standard_normal(phi.n)
            u = ub + 0.99 * phi.window * rng.uniform(0, 1) * d / np.linalg.norm(d)
            x = prox_map(phi, lam, u)
            y = (u - x) / lam
            # the pair (x, (u - x) / lam) must lie on the subgradient graph and map back to u
            on_graph = min(P.violation(np.concatenate([x, y])) for P in phi.subgrad_graph.pieces)
            worst_rt = max(worst_rt, on_graph, float(np.linalg.norm(x + lam * y - u)))
        for _ in range(20):
            d = rng.standard_normal(phi.n)
            u = ub + 0.9 * phi.window * rng.uniform(0, 1) * d / np.linalg.norm(d)
            g = envelope_gradient(phi, lam, u)
            h = 1e-5 * (1.0 + np.linalg.norm(u))
            fd = np.array([(moreau_envelope(phi, lam, u + h * e) - moreau_envelope(phi, lam, u - h * e)) / (2 * h)
                           for e in np.eye(phi.n)])
            worst_fd = max(worst_fd, float(np.linalg.norm(fd - g) / max(1.0, np.linalg.norm(g))))
    passed = worst_rt < 1e-9 and worst_fd <= 1e-5
    acceptance(9, "prox identities", passed,
               f"{fixtures} fixtures, round trip {worst_rt:.1e}, envelope gradient error {worst_fd:.1e}")
    assert passed


# ------------------------------------------------------------------ 10


def test_criterion_10_trapezoid_rules(corpus_by_id, acceptance):
    t0 = time.perf_counter()
    quad_max = 0.0
    for key in ("prox_quadratic", "prox_quadratic_2d"):
        inst = corpus_by_id[key]
        for cp in inst.points:
            phi = inst.obj.with_ref(cp.point)
            for rule in (trapezoid_one_point, trapezoid_two_point):
                quad_max = max(quad_max, max(rule(phi)["shell_max"]))
    inst = corpus_by_id["prox_abs"]
    corner = next(cp for cp in inst.points if cp.label == "corner")
    assert np.allclose(corner.point.z, [0.0, 1.0])
    phi = inst.obj.with_ref(corner.point)
    one = trapezoid_one_point(phi)
    two = trapezoid_two_point(phi, witness=corner.witness)
    wit = two["witness_values"]
    wit_ok = all(abs(w + 0.25) <= 1e-9 for w in wit)
    sp = check_strict_proto_subgrad(phi).consensus
    elapsed = time.perf_counter() - t0
    passed = (quad_max <= 1e-12 and one["slope"] > 0.5 and one["decays"] and wit_ok
              and not two["decays"] and sp is False and elapsed < 60.0)
    acceptance(10, "trapezoidal rules", passed,
               f"quadratic max {quad_max:.1e}, corner slope {one['slope']:.2f}, "
               f"witness {min(wit):.12f}..{max(wit):.12f}, strict proto {sp}, {elapsed:.1f}s")
    assert passed


# ------------------------------------------------------------------ 11


def test_criterion_11_determinism(acceptance):
    corpus = load_corpus(builtin_corpus_path())
    a = run("all", corpus, RunConfig(seed=0))
    b = run("all", load_corpus(builtin_corpus_path()), RunConfig(seed=0))
    same = a.dumps() == b.dumps()
    passed = same and a.ok
    s = a.summary()
    acceptance(11, "determinism", passed,
               f"{len(a.dumps())} bytes identical: {same}, {s['checks']} checks, {s['failed']} failed")
    assert passed
