"""Loading and validation of fixture corpora.

A corpus is a JSON document::

    {"format": "varlab-corpus", "version": 1, "instances": [...]}

Each instance carries an ``id``, exactly one of ``map`` or ``function``, and a
list of reference ``points``.  Numbers may be written as JSON numbers or as
strings such as ``"-3/2"`` or ``"inf"``.  Every expectation is an object
``{"value": ..., "source": ...}`` where ``source`` names how the expected
value was obtained (see SOURCES).
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field
from fractions import Fraction
from importlib import resources
from pathlib import Path

import numpy as np

from .cones import bundle_from_subspaces
from .maps import (
    Charted,
    GraphPoint,
    PLSingle,
    PolyUnion,
    SetValuedMap,
    Smooth,
    SmoothUnion,
    SumGE,
)
from .polyhedral import ConvexPolyhedron
from .prox import CLOSED_FORMS, ProxRegularFunction, check_prox_regular
from .subspace import SplitDims, Subspace

__all__ = [
    "CorpusError",
    "CorpusParseError",
    "CorpusValidationError",
    "CorpusPoint",
    "CorpusInstance",
    "MAP_EXPECTATIONS",
    "FUNCTION_EXPECTATIONS",
    "SOURCES",
    "load_corpus",
    "loads_corpus",
    "builtin_corpus_path",
    "build_map",
]

FORMAT = "varlab-corpus"
VERSION = 1

# analytic: worked out by hand from the definitions
# literature: stated in the reference text for this example
# trivial: immediate from the construction
SOURCES = ("analytic", "literature", "trivial")

MAP_EXPECTATIONS = {
    "strict_proto": bool,
    "strictly_smooth": bool,
    "chart_dim": int,
    "semismooth_star": bool,
    "strict_diff": bool,
    "frechet": bool,
    "smsr": bool,
    "mr": bool,
    "smr": bool,
    "sum_regular": bool,
}

FUNCTION_EXPECTATIONS = {
    "strict_proto_subgrad": bool,
    "prox_regular": bool,
    "one_point_decays": bool,
    "two_point_decays": bool,
    "two_point_witness": float,
}


class CorpusError(ValueError):
    """Base class for corpus problems."""


class CorpusParseError(CorpusError):
    """Malformed document; carries the line and column when known."""

    def __init__(self, message: str, line: int | None = None, column: int | None = None):
        self.line, self.column = line, column
        where = f"line {line}, column {column}: " if line is not None else ""
        super().__init__(where + message)


class CorpusValidationError(CorpusError):
    """Well-formed instance that fails a structural check."""

    def __init__(self, instance_id: str, message: str):
        self.instance_id = instance_id
        super().__init__(f"instance {instance_id!r}: {message}")


@dataclass(frozen=True, eq=False)
class CorpusPoint:
    point: GraphPoint
    expected: dict = field(default_factory=dict)
    tangent_basis: np.ndarray | None = None
    label: str = ""
    witness: tuple | None = None


@dataclass(frozen=True, eq=False)
class CorpusInstance:
    """A parsed fixture: a map or a prox-regular function plus reference points.

    ``obj`` is a SetValuedMap for kind "map" and a ProxRegularFunction for
    kind "function" (whose reference pair is replaced per point).
    """

    id: str
    kind: str
    obj: object
    points: list
    spec: dict
    options: dict = field(default_factory=dict)
    survey: dict | None = None

    @property
    def is_sum(self) -> bool:
        return isinstance(self.obj, SumGE)


# ----------------------------------------------------------------- numbers


def _num(v) -> float:
    if isinstance(v, bool):
        raise ValueError("booleans are not numbers")
    if isinstance(v, (int, float)):
        return float(v)
    if isinstance(v, str):
        s = v.strip().lower()
        if s in ("inf", "+inf", "-inf"):
            return float(s)
        return float(Fraction(s))
    raise ValueError(f"not a number: {v!r}")


def _vec(v) -> np.ndarray:
    if not isinstance(v, list):
        v = [v]
    return np.array([_num(t) for t in v], dtype=float)


def _mat(rows, cols: int) -> np.ndarray:
    if rows is None or rows == []:
        return np.zeros((0, cols))
    if not isinstance(rows, list) or not all(isinstance(r, list) for r in rows):
        raise ValueError("matrices are lists of rows")
    M = np.array([[_num(t) for t in r] for r in rows], dtype=float)
    if M.shape[1] != cols:
        raise ValueError(f"expected {cols} columns, got {M.shape[1]}")
    return M


def _polyhedron(spec: dict, k: int) -> ConvexPolyhedron:
    ineq = _mat(spec.get("ineq"), k)
    eq = _mat(spec.get("eq"), k)
    ineq_rhs = _vec(spec["ineq_rhs"]) if "ineq_rhs" in spec else np.zeros(ineq.shape[0])
    eq_rhs = _vec(spec["eq_rhs"]) if "eq_rhs" in spec else np.zeros(eq.shape[0])
    return ConvexPolyhedron(k, ineq, ineq_rhs, eq, eq_rhs)


def _dims(spec: dict) -> SplitDims:
    return SplitDims(int(spec["n"]), int(spec["m"]))


# ------------------------------------------------------------------- maps


def _smooth(spec: dict) -> Smooth:
    if "exprs" in spec:
        exprs = spec["exprs"]
        return Smooth.from_expressions([exprs] if isinstance(exprs, str) else list(exprs), int(spec["n"]))
    if "matrix" in spec:
        n = int(spec["n"])
        A = _mat(spec["matrix"], n)
        b = _vec(spec["offset"]) if "offset" in spec else None
        return Smooth.linear(A, b)
    raise ValueError("smooth maps need 'exprs' or 'matrix'")


def _subspace_rows(rows, k: int) -> Subspace:
    return Subspace.from_rows(_mat(rows, k), k) if rows else Subspace.zero(k)


def build_map(spec: dict) -> SetValuedMap:
    """SetValuedMap built from a variant-tagged description."""
    variant = spec.get("variant")
    if variant == "poly_union":
        dims = _dims(spec)
        pieces = [_polyhedron(P, dims.total) for P in spec["pieces"]]
        return PolyUnion(dims, pieces)
    if variant == "pl_single":
        dims = _dims(spec)
        cells = []
        for c in spec["cells"]:
            P = _polyhedron(c, dims.n)
            A = _mat(c["matrix"], dims.n)
            b = _vec(c["offset"]) if "offset" in c else np.zeros(dims.m)
            cells.append((P, A, b))
        return PLSingle(dims, cells)
    if variant == "smooth":
        return _smooth(spec)
    if variant == "smooth_union":
        n = int(spec["n"])
        branches = [_smooth({"n": n, "exprs": e}) for e in spec["branches"]]
        dims = branches[0].dims
        bundles = []
        for b in spec.get("point_bundles", []):
            k = dims.total
            z = np.concatenate([_vec(b["x"]), _vec(b["y"])])
            B = bundle_from_subspaces(_subspace_rows(b["tangent"], k), _subspace_rows(b["clarke"], k),
                                      _subspace_rows(b["paratingent"], k), _subspace_rows(b["normal"], k))
            bundles.append((z, B))
        return SmoothUnion(dims, branches, bundles)
    if variant == "charted":
        dims = _dims(spec)
        inner = build_map(spec["inner"])
        offset = _vec(spec["offset"]) if "offset" in spec else None
        return Charted(dims, _mat(spec["matrix"], dims.total), inner, offset)
    if variant == "sum":
        g = _smooth(spec["g"])
        return SumGE(g, build_map(spec["G"]))
    raise ValueError(f"unknown map variant {variant!r}")


# -------------------------------------------------------------- functions


def _function_value(spec: dict):
    """Float and exact rational evaluators of phi; inf outside the domain."""
    import sympy as sp

    n = int(spec["n"])
    syms = sp.symbols(f"x1:{n + 1}", real=True)
    local = {f"x{i + 1}": s for i, s in enumerate(syms)}
    if n == 1:
        local["x"] = syms[0]
    expr = sp.sympify(spec["value"], locals=local)
    f = sp.lambdify([syms], expr, "numpy")
    dom = _polyhedron(spec["domain"], n) if "domain" in spec else None

    def evaluate(x):
        if dom is not None and not dom.contains(x, 1e-12):
            return np.inf
        return float(f(np.atleast_1d(x)))

    def exact(x):
        x = np.atleast_1d(x)
        if dom is not None and not dom.contains(x, 0.0):
            return None
        vals = [Fraction(float(t)) for t in x]
        r = expr.xreplace({s: sp.Rational(v.numerator, v.denominator) for s, v in zip(syms, vals)})
        if not r.is_Rational:
            return None
        return Fraction(int(r.p), int(r.q))

    return evaluate, exact


def _build_function(spec: dict) -> ProxRegularFunction:
    n = int(spec["n"])
    graph = None
    if "subgrad_graph" in spec:
        G = build_map(dict(spec["subgrad_graph"], variant="poly_union", n=n, m=n))
        graph = G
    cf = spec.get("closed_form")
    if cf is not None and cf not in CLOSED_FORMS:
        raise ValueError(f"unknown closed form {cf!r}")
    params = {k: _num(v) for k, v in spec.get("params", {}).items()}
    evaluate, exact = _function_value(spec)
    return ProxRegularFunction(
        n, evaluate, graph, _num(spec.get("prox_r", 0)), _num(spec["prox_eps"]),
        GraphPoint(np.zeros(n), np.zeros(n)), cf, params, _num(spec.get("window", 0.25)),
        spec.get("name", ""), exact)


# ------------------------------------------------------------ expectations


def _expectations(raw: dict, allowed: dict, iid: str) -> dict:
    out = {}
    for key, entry in raw.items():
        if key not in allowed:
            raise CorpusValidationError(iid, f"unknown expectation {key!r}")
        if not isinstance(entry, dict) or "value" not in entry:
            raise CorpusValidationError(iid, f"expectation {key!r} must be an object with 'value'")
        src = entry.get("source")
        if src not in SOURCES:
            raise CorpusValidationError(iid, f"expectation {key!r} has source {src!r}; expected one of {SOURCES}")
        value = entry["value"]
        kind = allowed[key]
        if kind is bool and not isinstance(value, bool):
            raise CorpusValidationError(iid, f"expectation {key!r} must be boolean")
        if kind is int and (isinstance(value, bool) or not isinstance(value, int)):
            raise CorpusValidationError(iid, f"expectation {key!r} must be an integer")
        if kind is float:
            value = _num(value)
        out[key] = {"value": value, "source": src, "tol": _num(entry.get("tol", 1e-9))}
    return out


def _points(raw, dims: SplitDims, allowed: dict, iid: str) -> list[CorpusPoint]:
    pts = []
    for i, p in enumerate(raw):
        x, y = _vec(p["x"]), _vec(p["y"])
        if x.size != dims.n or y.size != dims.m:
            raise CorpusValidationError(iid, f"point {i} has the wrong dimensions")
        Z = None
        if "tangent_basis" in p:
            Z = _mat(p["tangent_basis"], dims.total).T
        W = None
        if "witness" in p:
            W = tuple(tuple(_vec(v) for v in pair) for pair in p["witness"])
            if len(W) != 2 or any(len(pair) != 2 or any(v.size != dims.total for v in pair) for pair in W):
                raise CorpusValidationError(iid, f"point {i}: witness must be two (start, direction) pairs")
        pts.append(CorpusPoint(GraphPoint(x, y), _expectations(p.get("expected", {}), allowed, iid), Z,
                               p.get("label", f"p{i}"), W))
    return pts


# ------------------------------------------------------------------ loader


def _instance(raw: dict, position: int) -> CorpusInstance:
    iid = raw.get("id")
    if not isinstance(iid, str) or not iid:
        raise CorpusValidationError(f"#{position}", "missing string 'id'")
    has_map, has_fn = "map" in raw, "function" in raw
    if has_map == has_fn:
        raise CorpusValidationError(iid, "exactly one of 'map' or 'function' is required")
    try:
        if has_map:
            obj = build_map(raw["map"])
            points = _points(raw.get("points", []), obj.dims, MAP_EXPECTATIONS, iid)
            kind = "map"
        else:
            obj = _build_function(raw["function"])
            points = _points(raw.get("points", []), SplitDims(obj.n, obj.n), FUNCTION_EXPECTATIONS, iid)
            kind = "function"
    except CorpusValidationError:
        raise
    except (KeyError, TypeError, ValueError, ZeroDivisionError) as err:
        raise CorpusValidationError(iid, f"cannot build: {err}") from err
    options = dict(raw.get("options", {}))
    survey = raw.get("survey")
    inst = CorpusInstance(iid, kind, obj, points, raw, options, survey)
    _validate(inst)
    return inst


def _validate(inst: CorpusInstance):
    iid = inst.id
    if isinstance(inst.obj, PLSingle):
        try:
            inst.obj.check_continuity()
        except ValueError as err:
            raise CorpusValidationError(iid, str(err)) from err
    if inst.kind == "map":
        for cp in inst.points:
            if not inst.obj.contains(cp.point):
                raise CorpusValidationError(iid, f"point {cp.label} is not on the graph")
        return
    phi = inst.obj
    for cp in inst.points:
        ref = phi.with_ref(cp.point)
        if phi.subgrad_graph is not None and not phi.subgrad_graph.contains(cp.point):
            raise CorpusValidationError(iid, f"point {cp.label} is not a subgradient pair")
        ok, worst = check_prox_regular(ref)
        if not ok:
            raise CorpusValidationError(iid, f"prox-regularity inequality fails at {cp.label} (violation {worst:.3g})")


def loads_corpus(text: str) -> list[CorpusInstance]:
    """Parse a corpus from a string; an empty document gives an empty list."""
    if not text.strip():
        return []
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as err:
        raise CorpusParseError(err.msg, err.lineno, err.colno) from err
    if isinstance(doc, list):
        raw = doc
    elif isinstance(doc, dict):
        if doc.get("format", FORMAT) != FORMAT:
            raise CorpusParseError(f"unknown format {doc.get('format')!r}")
        if int(doc.get("version", VERSION)) != VERSION:
            raise CorpusParseError(f"unsupported version {doc.get('version')!r}")
        raw = doc.get("instances", [])
    else:
        raise CorpusParseError("top level must be an object or a list")
    out, seen = [], set()
    for i, r in enumerate(raw):
        if not isinstance(r, dict):
            raise CorpusParseError(f"instance #{i} is not an object")
        inst = _instance(r, i)
        if inst.id in seen:
            raise CorpusValidationError(inst.id, "duplicate id")
        seen.add(inst.id)
        out.append(inst)
    return sorted(out, key=lambda inst: inst.id)


def load_corpus(path) -> list[CorpusInstance]:
    """Parse and validate the corpus file at ``path``."""
    return loads_corpus(Path(path).read_text(encoding="utf-8"))


def builtin_corpus_path() -> Path:
    return Path(str(resources.files("varlab") / "data" / "corpus.json"))
