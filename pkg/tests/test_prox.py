from dataclasses import replace
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from varlab.maps import GraphPoint
from varlab.prox import (
    attentive_localization,
    check_prox_regular,
    check_strict_proto_subgrad,
    decay_verdict,
    envelope_gradient,
    moreau_envelope,
    prox_map,
    trapezoid_one_point,
    trapezoid_two_point,
)


def grid_prox(phi, lam, u, half_width=3.0, steps=600001):
    """Brute-force minimizer and value of phi(x) + (x - u)^2 / (2 lam) on a fine grid."""
    x = np.linspace(u - half_width, u + half_width, steps)
    vals = np.array([phi(t) for t in x]) + (x - u) ** 2 / (2 * lam)
    i = int(np.argmin(vals))
    return x[i], vals[i]


def frac_quotient(a, b, phi):
    """One- or two-point trapezoid quotient of scalar pairs in exact arithmetic."""
    (xa, ya), (xb, yb) = ([Fraction(t) for t in p] for p in (a, b))
    num = phi(xb) - phi(xa) - (ya + yb) * (xb - xa) / 2
    return num / ((xb - xa) ** 2 + (yb - ya) ** 2)


@pytest.fixture
def prox_abs(corpus_by_id):
    return corpus_by_id["prox_abs"].obj


def test_abs_prox_examples_against_grid(prox_abs):
    wide = replace(prox_abs, window=5.0)
    lam = 0.5
    for u, (px, env, grad) in ((2.0, (1.5, 1.75, 1.0)), (0.3, (0.0, 0.09, 0.6)), (-1.0, (-0.5, 0.75, -1.0))):
        assert prox_map(wide, lam, u)[0] == pytest.approx(px, abs=1e-15)
        assert moreau_envelope(wide, lam, u) == pytest.approx(env, abs=1e-15)
        assert envelope_gradient(wide, lam, u)[0] == pytest.approx(grad, abs=1e-15)
        gx, gv = grid_prox(abs, lam, u)
        assert abs(gx - px) <= 1e-5 and abs(gv - env) <= 1e-9


def test_polyhedral_route_matches_closed_form(prox_abs):
    poly = replace(prox_abs, closed_form=None)
    for u in np.linspace(-0.19, 0.19, 21):
        np.testing.assert_allclose(prox_map(poly, 0.5, u), prox_map(prox_abs, 0.5, u), atol=1e-12)


def test_prox_window_and_lambda_guards(prox_abs):
    with pytest.raises(ValueError):
        prox_map(prox_abs, 0.5, 1.0)
    with pytest.raises(ValueError):
        prox_map(prox_abs, -1.0, 0.0)


@given(st.floats(-0.19, 0.19))
def test_localization_round_trip(u):
    from varlab.corpus import builtin_corpus_path, load_corpus

    phi = next(i for i in load_corpus(builtin_corpus_path()) if i.id == "prox_abs").obj
    loc = attentive_localization(phi)
    p = loc.point(u)
    assert loc.as_map.contains(p)
    assert abs(p.x[0] + loc.lam * p.y[0] - u) <= 1e-12


def test_envelope_gradient_matches_difference_quotient(corpus_by_id):
    phi = corpus_by_id["prox_quadratic"].obj
    lam, h = 0.5, 1e-6
    for u in (-0.3, 0.1, 0.4):
        fd = (moreau_envelope(phi, lam, u + h) - moreau_envelope(phi, lam, u - h)) / (2 * h)
        assert envelope_gradient(phi, lam, u)[0] == pytest.approx(fd, abs=1e-8)
        # closed form of the envelope of x^2 is u^2 / (1 + 2 lam)
        assert moreau_envelope(phi, lam, u) == pytest.approx(u * u / (1 + 2 * lam), abs=1e-15)


def test_strict_proto_subgradient(corpus_by_id):
    phi = corpus_by_id["prox_abs"].obj
    assert check_strict_proto_subgrad(phi).consensus is True
    corner = phi.with_ref(GraphPoint([0], [1]))
    v = check_strict_proto_subgrad(corner)
    assert v.consensus is False
    assert check_prox_regular(phi)[0]


def test_abs_origin_one_point_quotient_vanishes_on_grid():
    # near (0, 0) the localized graph is {0} x [-1, 1]; every pair has quotient 0
    lam = 0.5
    vals = []
    for u in np.linspace(-0.1, 0.1, 2001):
        x = float(np.sign(u) * max(abs(u) - lam, 0.0))
        y = (u - x) / lam
        if u != 0:
            vals.append(frac_quotient((0.0, 0.0), (x, y), abs))
    assert max(abs(v) for v in vals) == 0


def test_abs_origin_one_point_estimator(prox_abs):
    out = trapezoid_one_point(prox_abs)
    assert out["exact_zero"] and out["decays"] and out["slope"] == float("inf")


def test_corner_witness_value(corpus_by_id):
    inst = corpus_by_id["prox_abs"]
    cp = next(c for c in inst.points if c.label == "corner")
    for t in (Fraction(1, 10), Fraction(1, 1000)):
        assert frac_quotient((t, 1), (0, 1 - t), abs) == Fraction(-1, 4)
    out = trapezoid_two_point(inst.obj.with_ref(cp.point), witness=cp.witness)
    assert all(abs(w + 0.25) <= 1e-9 for w in out["witness_values"])
    assert out["decays"] is False


def test_corner_one_point_decays(corpus_by_id):
    phi = corpus_by_id["prox_abs"].obj.with_ref(GraphPoint([0], [1]))
    out = trapezoid_one_point(phi)
    assert out["decays"] and out["slope"] > 0.5


def test_quadratic_quotients_are_exact_zeros(corpus_by_id):
    for key, ref in (("prox_quadratic", GraphPoint([0], [0])), ("prox_quadratic", GraphPoint([1], [2])),
                     ("prox_quadratic_2d", GraphPoint([0, 0], [0, 0]))):
        phi = corpus_by_id[key].obj.with_ref(ref)
        for rule in (trapezoid_one_point, trapezoid_two_point):
            out = rule(phi)
            assert max(out["shell_max"]) <= 1e-12, (key, rule.__name__)


def test_decay_verdict_rules():
    r = [2.0 ** -k for k in range(6)]
    assert decay_verdict(r, [0.0] * 6)["slope"] == float("inf")
    assert decay_verdict(r, [x ** 2 for x in r])["decays"]
    assert not decay_verdict(r, [0.25] * 6)["decays"]
    v = decay_verdict(r, [x for x in r])
    # linear decay over five halvings ends at 1/32, above the 2% cutoff
    assert v["slope"] == pytest.approx(1.0) and not v["decays"]
    r9 = [2.0 ** -k for k in range(9)]
    assert decay_verdict(r9, r9)["decays"]
