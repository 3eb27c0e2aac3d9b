"""
smoothext.manifold
------------------

Finite-dimensional manifolds with corners, described by finite atlases of
charts into corner cones ``E+ = {x : lambda_k(x) >= 0}``; point
classification, tangent maps of every level, partitions of unity and the
extension of smooth functions from a corner subdomain ``L`` to an open
neighbourhood of ``L``.

Manifold points are given in ambient coordinates; charts are pairs of
:class:`~smoothext.taylor.JetOracle` (forward and inverse), so every
derivative below is computed in jet arithmetic.
"""

from __future__ import annotations

import itertools
import json
import math
from dataclasses import dataclass, field
from importlib import resources
from typing import Callable, Sequence

import numpy as np

from . import taylor as T
from .errors import ConstructionError, ContractViolation, DomainError
from .extend import BoxExtension, extend_box
from .taylor import Box, Jet, JetOracle, jet_compose, smooth_step

INTERIOR, BOUNDARY = "interior", "boundary"
ACTIVE_TOL = 1e-12


# -- cones, charts, atlases ---------------------------------------------------


@dataclass(frozen=True)
class CornerCone:
    """``E+ = {x in R^d : lambda_k(x) >= 0 for all k}``.

    ``functionals`` is an ``(n, d)`` array whose rows are the ``lambda_k``;
    ``n = 0`` gives the whole space.
    """

    functionals: np.ndarray
    dim: int = -1

    def __post_init__(self):
        L = np.array(self.functionals, dtype=float)
        d = self.dim if self.dim >= 0 else (L.shape[1] if L.ndim == 2 and L.size else 0)
        L = L.reshape(-1, d) if L.size else np.zeros((0, d))
        L.flags.writeable = False
        object.__setattr__(self, "functionals", L)
        object.__setattr__(self, "dim", d)

    @classmethod
    def standard(cls, d: int, n: int | None = None) -> "CornerCone":
        """The first ``n`` coordinates non-negative (default all)."""
        n = d if n is None else n
        return cls(np.eye(d)[:n], d)

    @property
    def codim(self) -> int:
        return self.functionals.shape[0]

    def values(self, x) -> np.ndarray:
        return self.functionals @ np.asarray(x, dtype=float)

    def contains(self, x, tol: float = 0.0) -> bool:
        return bool(np.all(self.values(x) >= -tol))

    def interior(self, x, tol: float = 0.0) -> bool:
        return bool(np.all(self.values(x) > tol))

    def active(self, x, tol: float = ACTIVE_TOL) -> frozenset:
        """Indices ``k`` with ``lambda_k(x) = 0`` (to within ``tol``)."""
        return frozenset(int(k) for k in np.flatnonzero(np.abs(self.values(x)) <= tol))


@dataclass(frozen=True)
class CornerChart:
    """A chart ``phi : U -> E+``.

    Parameters
    ----------
    name : str
    domain : callable
        Membership predicate for ``U`` (ambient coordinates).
    forward, inverse : JetOracle
        ``phi`` and ``phi^{-1}`` (vector valued).
    cone : CornerCone
    """

    name: str
    domain: Callable[[np.ndarray], bool]
    forward: JetOracle
    inverse: JetOracle
    cone: CornerCone

    @property
    def dim(self) -> int:
        return self.forward.dim

    def __call__(self, p) -> np.ndarray:
        return np.asarray(self.forward.value(p), dtype=float)

    def inv(self, x) -> np.ndarray:
        return np.asarray(self.inverse.value(x), dtype=float)

    def round_trip_error(self, p) -> float:
        p = np.asarray(p, dtype=float)
        return float(np.max(np.abs(self.inv(self(p)) - p)))


@dataclass(frozen=True)
class CornerManifold:
    """A manifold with corners: atlas, membership and a sampling box."""

    atlas: tuple
    dim: int
    membership: Callable[[np.ndarray], bool]
    bounds: Box
    name: str = ""

    def __post_init__(self):
        object.__setattr__(self, "atlas", tuple(self.atlas))
        if not self.atlas:
            raise ContractViolation("an atlas needs at least one chart")

    @property
    def codim(self) -> int:
        return max(c.cone.codim for c in self.atlas)

    def contains(self, p) -> bool:
        return bool(self.membership(np.asarray(p, dtype=float)))

    def charts_at(self, p) -> list[int]:
        p = np.asarray(p, dtype=float)
        return [i for i, c in enumerate(self.atlas) if self.contains(p) and c.domain(p)]

    def chart_index(self, p) -> int:
        idx = self.charts_at(p)
        if not idx:
            raise DomainError(f"point {np.asarray(p).tolist()} lies in no chart of {self.name!r}")
        return idx[0]

    def sample(self, rng: np.random.Generator, n: int, interior: bool = False) -> np.ndarray:
        out: list[np.ndarray] = []
        for _ in range(200):
            for p in self.bounds.sample(rng, 4 * n):
                if not self.contains(p) or not self.charts_at(p):
                    continue
                if interior and classify_point(self, p).kind != INTERIOR:
                    continue
                out.append(p)
            if len(out) >= n:
                return np.array(out[:n])
        raise DomainError(f"could not sample {n} points of {self.name!r}")

    def transition(self, i: int, j: int) -> JetOracle:
        """Coordinate change ``phi_j o phi_i^{-1}``."""
        a, b = self.atlas[i], self.atlas[j]
        return T.compose_oracles(b.forward, a.inverse, name=f"{b.name}o{a.name}^-1")


@dataclass(frozen=True)
class PointClass:
    kind: str
    active: frozenset
    chart: str


def classify_point(M: CornerManifold, p, chart: int | None = None, tol: float = ACTIVE_TOL) -> PointClass:
    """Interior or boundary, with the vanishing functionals of the chart image.

    Examples
    --------
    >>> M = euclidean_corner(2)
    >>> classify_point(M, [0.0, 0.5]).active
    frozenset({0})
    """
    p = np.asarray(p, dtype=float)
    i = M.chart_index(p) if chart is None else chart
    c = M.atlas[i]
    if not c.domain(p):
        raise DomainError(f"point {p.tolist()} not in chart {c.name!r}")
    x = c(p)
    act = c.cone.active(x, tol)
    if not c.cone.contains(x, tol):
        return PointClass("outside", act, c.name)
    return PointClass(INTERIOR if c.cone.interior(x, tol) else BOUNDARY, act, c.name)


@dataclass(frozen=True)
class InvarianceReport:
    """Outcome of :func:`check_interior_invariance`."""

    checked: int
    violations: tuple
    min_abs_det: float

    @property
    def ok(self) -> bool:
        return not self.violations


def check_interior_invariance(M: CornerManifold, samples: int = 200, seed: int = 0,
                              points=None, det_tol: float = 1e-12) -> InvarianceReport:
    """Sample interior points of each chart overlap and verify that the
    coordinate change has an invertible Jacobian and maps them to interior
    points of the other chart.

    ``points`` overrides sampling; each point is checked for every ordered
    pair of charts containing it.
    """
    rng = np.random.default_rng(seed)
    if points is None:
        points = M.sample(rng, samples, interior=True) if len(M.atlas) > 1 else np.zeros((0, M.dim))
    violations = []
    checked = 0
    min_det = math.inf
    for p in np.asarray(points, dtype=float):
        idx = M.charts_at(p)
        for i, j in itertools.permutations(idx, 2):
            ci, cj = M.atlas[i], M.atlas[j]
            x = ci(p)
            if not ci.cone.interior(x, ACTIVE_TOL):
                continue
            checked += 1
            jac = M.transition(i, j).jet(x, 1)
            J = np.stack([jac.derivative(tuple(np.eye(M.dim, dtype=int)[k])) for k in range(M.dim)], axis=-1)
            det = abs(float(np.linalg.det(J)))
            min_det = min(min_det, det)
            if not det > det_tol or not np.isfinite(np.linalg.cond(J)):
                violations.append((tuple(p), ci.name, cj.name, f"singular Jacobian |det|={det:.3g}"))
            y = np.asarray(jac.value, dtype=float)
            if not cj.cone.interior(y, ACTIVE_TOL):
                violations.append((tuple(p), ci.name, cj.name, f"interior point maps to {y.tolist()}"))
    return InvarianceReport(checked, tuple(violations), min_det)


# -- higher tangent bundles ----------------------------------------------------


def _bits(S: int, n: int) -> tuple:
    return tuple((S >> i) & 1 for i in range(n))


def hyperdual_push(jet_at: Callable[[np.ndarray, int], Jet], components: np.ndarray) -> np.ndarray:
    """Apply ``T^n`` of a map to a point of ``T^n R^d = (R^d)^(2^n)``.

    ``components[S]`` for a bitmask ``S`` of ``{1..n}``; ``components[0]`` is
    the base point.  The map's order-``n`` jet is evaluated on
    ``sum_S x_S prod_{i in S} t_i`` and the square-free coefficients read off.
    """
    comps = np.asarray(components, dtype=float)
    n = int(round(math.log2(comps.shape[0])))
    if 2**n != comps.shape[0]:
        raise ContractViolation("number of components must be a power of two")
    J = jet_at(comps[0], n)
    if n == 0:
        return np.atleast_1d(np.asarray(J.value, dtype=float))[None]
    tpt = np.zeros(n)
    inners = []
    for k in range(comps.shape[1]):
        c = np.zeros((n + 1,) * n)
        for S in range(2**n):
            c[_bits(S, n)] = comps[S, k]
        inners.append(Jet(c, tpt))
    R = jet_compose(J, inners)
    return np.stack([np.atleast_1d(np.asarray(R.coeffs[_bits(S, n)], dtype=float))
                     for S in range(2**n)])


@dataclass(frozen=True)
class HigherTangentPoint:
    """A point of ``T^n M`` in chart ``chart``: ``components[0]`` is the chart
    image of the base point and ``components[S]``, ``S != 0``, the remaining
    ``2^n - 1`` coordinate vectors."""

    chart: int
    components: np.ndarray

    @property
    def level(self) -> int:
        return int(round(math.log2(len(self.components))))


def tangent_point(M: CornerManifold, p, vectors, chart: int | None = None) -> HigherTangentPoint:
    """Build a point of ``T^n M`` from a base point and ``2^n - 1`` vectors."""
    i = M.chart_index(p) if chart is None else chart
    x = M.atlas[i](p)
    comps = np.vstack([x[None], np.atleast_2d(np.asarray(vectors, dtype=float))]) if len(vectors) else x[None]
    return HigherTangentPoint(i, comps)


def change_chart(M: CornerManifold, tp: HigherTangentPoint, j: int) -> HigherTangentPoint:
    """Express ``tp`` in chart ``j`` (the equivalence defining ``T^n M``)."""
    if tp.chart == j:
        return tp
    tr = M.transition(tp.chart, j)
    return HigherTangentPoint(j, hyperdual_push(tr.jet, tp.components))


def base_point(M: CornerManifold, tp: HigherTangentPoint) -> np.ndarray:
    return M.atlas[tp.chart].inv(tp.components[0])


@dataclass(frozen=True)
class SmoothMap:
    """``f : M -> N`` given in ambient coordinates by a vector-valued oracle."""

    source: CornerManifold
    target: CornerManifold
    oracle: JetOracle
    name: str = ""

    def coordinate_jet(self, i: int, j: int, x, order: int) -> Jet:
        """Jet of ``phi_j o f o phi_i^{-1}`` at chart point ``x``."""
        ci, cj = self.source.atlas[i], self.target.atlas[j]
        inv = ci.inverse.jet(x, order)
        p = np.atleast_1d(np.asarray(inv.value, dtype=float))
        fj = jet_compose(self.oracle.jet(p, order), inv)
        q = np.atleast_1d(np.asarray(fj.value, dtype=float))
        return jet_compose(cj.forward.jet(q, order), fj)

    def __call__(self, p):
        return np.atleast_1d(np.asarray(self.oracle.value(p), dtype=float))


def compose_maps(g: SmoothMap, f: SmoothMap) -> SmoothMap:
    return SmoothMap(f.source, g.target, T.compose_oracles(g.oracle, f.oracle),
                     name=f"{g.name}o{f.name}")


def check_interior_preserved(f: SmoothMap, samples: int = 64, seed: int = 0) -> list:
    """Sampled interior points of ``M`` whose image is not interior in ``N``."""
    rng = np.random.default_rng(seed)
    bad = []
    for p in f.source.sample(rng, samples, interior=True):
        q = f(p)
        try:
            cls = classify_point(f.target, q)
        except DomainError:
            bad.append(tuple(p))
            continue
        if cls.kind != INTERIOR:
            bad.append(tuple(p))
    return bad


def tangent_map(f: SmoothMap, n: int = 1, check_samples: int = 64, seed: int = 0):
    """``T^n f``, acting chart-wise on :class:`HigherTangentPoint`.

    Raises
    ------
    ContractViolation
        If a sampled interior point is mapped off the interior of the target.
    """
    if n < 0:
        raise ContractViolation("tangent level must be >= 0")
    if check_samples:
        bad = check_interior_preserved(f, check_samples, seed)
        if bad:
            raise ContractViolation(f"{f.name or 'map'} sends interior points {bad[:3]} off the interior")

    def Tn(tp: HigherTangentPoint, target_chart: int | None = None) -> HigherTangentPoint:
        if tp.level != n:
            raise ContractViolation(f"expected a level-{n} tangent point, got level {tp.level}")
        i = tp.chart
        p = f.source.atlas[i].inv(tp.components[0])
        j = f.target.chart_index(f(p)) if target_chart is None else target_chart
        comps = hyperdual_push(lambda x, order: f.coordinate_jet(i, j, x, order), tp.components)
        return HigherTangentPoint(j, comps)

    return Tn


# -- builders -------------------------------------------------------------------


def affine_chart(name: str, A, b, cone: CornerCone, domain=None) -> CornerChart:
    """``x -> A x + b``."""
    A = np.atleast_2d(np.asarray(A, dtype=float))
    b = np.asarray(b, dtype=float)
    Ainv = np.linalg.inv(A)
    d = A.shape[0]

    def fwd(*xs):
        return Jet.stack([sum(A[r, c] * xs[c] for c in range(d)) + b[r] for r in range(d)])

    def inv(*us):
        return Jet.stack([sum(Ainv[r, c] * (us[c] - b[c]) for c in range(d)) for r in range(d)])

    dom = domain or (lambda p: True)
    return CornerChart(name, dom, JetOracle.from_program(fwd, d, shape=(d,), name=name),
                       JetOracle.from_program(inv, d, shape=(d,), name=name + "^-1"), cone)


def polar_corner_chart(name: str = "polar-corner", center=(0.0, 0.0), angle: float = 0.0) -> CornerChart:
    """Straighten a right-angle corner at ``center`` with arcs of constant radius:
    ``(r, theta) -> (r theta, r (pi/2 - theta))`` with ``theta`` measured from
    direction ``angle``.  Undefined at the corner point itself."""
    c0 = np.asarray(center, dtype=float)
    ca, sa = math.cos(angle), math.sin(angle)

    def fwd(x, y):
        X = ca * (x - c0[0]) + sa * (y - c0[1])
        Y = -sa * (x - c0[0]) + ca * (y - c0[1])
        r = T.sqrt(X * X + Y * Y)
        th = T.atan2(Y, X)
        return Jet.stack([r * th, r * (math.pi / 2 - th)])

    def inv(u, v):
        s = u + v
        r = s * (2.0 / math.pi)
        th = u * (math.pi / 2) / s
        X, Y = r * T.cos(th), r * T.sin(th)
        return Jet.stack([ca * X - sa * Y + c0[0], sa * X + ca * Y + c0[1]])

    def dom(p):
        return bool(np.hypot(p[0] - c0[0], p[1] - c0[1]) > 1e-12)

    return CornerChart(name, dom, JetOracle.from_program(fwd, 2, shape=(2,), name=name),
                       JetOracle.from_program(inv, 2, shape=(2,), name=name + "^-1"),
                       CornerCone.standard(2))


def rational_chart(name: str, A, b, c, d0: float, cone: CornerCone, domain=None) -> CornerChart:
    """Linear-fractional chart ``x -> (A x + b) / (c . x + d0)``.

    The inverse uses the Sherman-Morrison formula, so it stays in jet
    arithmetic.
    """
    A = np.atleast_2d(np.asarray(A, dtype=float))
    b = np.asarray(b, dtype=float)
    c = np.asarray(c, dtype=float)
    n = A.shape[0]
    Ai = np.linalg.inv(A)

    def fwd(*xs):
        den = sum(c[k] * xs[k] for k in range(n)) + d0
        return Jet.stack([(sum(A[r, k] * xs[k] for k in range(n)) + b[r]) / den for r in range(n)])

    def inv(*us):
        # (A - u c^T) x = d0 u - b
        rhs = [d0 * us[k] - b[k] for k in range(n)]
        Ai_u = [sum(Ai[r, k] * us[k] for k in range(n)) for r in range(n)]
        Ai_rhs = [sum(Ai[r, k] * rhs[k] for k in range(n)) for r in range(n)]
        cAu = sum(c[r] * Ai_u[r] for r in range(n))
        cAr = sum(c[r] * Ai_rhs[r] for r in range(n))
        fac = cAr / (1.0 - cAu)
        return Jet.stack([Ai_rhs[r] + Ai_u[r] * fac for r in range(n)])

    dom = domain or (lambda p: abs(float(c @ np.asarray(p)) + d0) > 1e-12)
    return CornerChart(name, dom, JetOracle.from_program(fwd, n, shape=(n,), name=name),
                       JetOracle.from_program(inv, n, shape=(n,), name=name + "^-1"), cone)


def euclidean_corner(d: int) -> CornerManifold:
    """The model cone ``[0, inf)^d`` with its identity chart."""
    cone = CornerCone.standard(d)
    chart = affine_chart("identity", np.eye(d), np.zeros(d), cone)
    return CornerManifold((chart,), d, lambda p: bool(np.all(p >= 0)), Box((0.0,) * d, (2.0,) * d),
                          name=f"R+^{d}")


def euclidean(d: int) -> CornerManifold:
    """``R^d`` without boundary."""
    cone = CornerCone(np.zeros((0, d)), d)
    chart = affine_chart("identity", np.eye(d), np.zeros(d), cone)
    return CornerManifold((chart,), d, lambda p: True, Box((-2.0,) * d, (3.0,) * d), name=f"R^{d}")


def unit_interval() -> CornerManifold:
    """``[0, 1]`` with charts ``x`` on ``[0, 1)`` and ``1 - x`` on ``(0, 1]``."""
    cone = CornerCone.standard(1)
    left = affine_chart("left", [[1.0]], [0.0], cone, domain=lambda p: 0.0 <= p[0] < 1.0)
    right = affine_chart("right", [[-1.0]], [1.0], cone, domain=lambda p: 0.0 < p[0] <= 1.0)
    return CornerManifold((left, right), 1, lambda p: bool(0.0 <= p[0] <= 1.0), Box.unit(1),
                          name="[0,1]")


def quarter_disc(broken: bool = False, radius: float = 1.0) -> CornerManifold:
    """``{x >= 0, y >= 0, x^2 + y^2 < radius^2}`` with a Cartesian chart and
    a polar corner chart.  ``broken=True`` swaps the polar chart for a
    shifted one that sends interior points to faces (negative control)."""
    cone = CornerCone.standard(2)
    cart = affine_chart("cartesian", np.eye(2), np.zeros(2), cone)
    second = (affine_chart("shifted", np.eye(2), [0.0, -0.1], cone) if broken
              else polar_corner_chart())

    def member(p):
        return bool(p[0] >= 0 and p[1] >= 0 and p[0] ** 2 + p[1] ** 2 < radius**2)

    return CornerManifold((cart, second), 2, member, Box((0.0, 0.0), (radius, radius)),
                          name="quarter-disc" + ("-broken" if broken else ""))


# -- atlas files ----------------------------------------------------------------


def _region_predicate(spec: dict) -> Callable:
    kind = spec.get("type", "all")
    if kind == "all":
        return lambda p: True
    if kind == "box":
        lo, hi = np.asarray(spec["lo"], float), np.asarray(spec["hi"], float)
        if spec.get("open", False):
            return lambda p: bool(np.all(p > lo) and np.all(p < hi))
        return lambda p: bool(np.all(p >= lo) and np.all(p <= hi))
    if kind == "quarter_disc":
        r = float(spec.get("radius", 1.0))
        return lambda p: bool(p[0] >= 0 and p[1] >= 0 and p[0] ** 2 + p[1] ** 2 < r * r)
    if kind == "punctured":
        c = np.asarray(spec.get("center", [0.0, 0.0]), float)
        return lambda p: bool(np.linalg.norm(np.asarray(p) - c) > 1e-12)
    raise ContractViolation(f"unknown region type {kind!r}")


def _chart_from_spec(spec: dict, dim: int) -> CornerChart:
    name = spec.get("name", spec["family"])
    cone = CornerCone(np.asarray(spec.get("cone", np.eye(dim)), float).reshape(-1, dim), dim)
    dom = _region_predicate(spec["domain"]) if "domain" in spec else None
    fam = spec["family"]
    if fam == "affine":
        return affine_chart(name, spec.get("matrix", np.eye(dim)), spec.get("offset", np.zeros(dim)), cone, dom)
    if fam == "polar":
        ch = polar_corner_chart(name, spec.get("center", (0.0, 0.0)), float(spec.get("angle", 0.0)))
        return ch if dom is None else CornerChart(name, dom, ch.forward, ch.inverse, ch.cone)
    if fam == "rational":
        return rational_chart(name, spec["matrix"], spec.get("offset", np.zeros(dim)),
                              spec["denominator"], float(spec.get("constant", 1.0)), cone, dom)
    raise ContractViolation(f"unknown chart family {fam!r}")


def manifold_from_dict(spec: dict) -> CornerManifold:
    """Build a manifold from an atlas description.

    Schema::

        {"name": str, "dim": int,
         "region": {"type": "all" | "box" | "quarter_disc", ...},
         "bounds": {"lo": [...], "hi": [...]},
         "charts": [{"name": str, "family": "affine" | "polar" | "rational",
                     "cone": [[...], ...], "domain": {...}, <family parameters>}, ...]}

    Family parameters: affine ``matrix``, ``offset``; polar ``center``,
    ``angle``; rational ``matrix``, ``offset``, ``denominator``, ``constant``.
    """
    try:
        dim = int(spec["dim"])
        charts = tuple(_chart_from_spec(c, dim) for c in spec["charts"])
        member = _region_predicate(spec.get("region", {"type": "all"}))
        b = spec.get("bounds", {"lo": [0.0] * dim, "hi": [1.0] * dim})
        return CornerManifold(charts, dim, member, Box(b["lo"], b["hi"]), name=spec.get("name", ""))
    except (KeyError, TypeError, ValueError) as exc:
        if isinstance(exc, ContractViolation):
            raise
        raise ContractViolation(f"malformed atlas description: {exc!r}") from exc


def load_atlas(path_or_name: str) -> CornerManifold:
    """Load an atlas JSON file, or a bundled one by name (``'quarter_disc'``,
    ``'quarter_disc_broken'``, ``'unit_interval'``, ``'unit_square'``)."""
    try:
        with open(path_or_name) as fh:
            spec = json.load(fh)
    except FileNotFoundError:
        res = resources.files("smoothext") / "atlases" / f"{path_or_name}.json"
        if not res.is_file():
            raise DomainError(f"no atlas file or bundled atlas named {path_or_name!r}") from None
        spec = json.loads(res.read_text())
    except json.JSONDecodeError as exc:
        raise ContractViolation(f"atlas file is not valid JSON: {exc}") from exc
    return manifold_from_dict(spec)


# -- partitions of unity ----------------------------------------------------------


def _box_bump(box: Box, margin: float) -> Callable:
    """Product of smooth steps, positive exactly on ``box`` shrunk by ``margin``."""

    def program(*xs):
        out = None
        for j, x in enumerate(xs):
            for lo, sgn in ((box.lo[j], 1.0), (box.hi[j], -1.0)):
                if not np.isfinite(lo):
                    continue
                f = smooth_step((x - lo) * (sgn / margin) - 1.0)
                out = f if out is None else out * f
        if out is None:
            return Jet.constant(1.0, xs[0].point, xs[0].order)
        return out

    return program


@dataclass(frozen=True)
class PartitionOfUnity:
    """Bumps ``f_i = b_i / sum_j b_j`` subordinate to ``cover``."""

    cover: tuple
    raw: tuple
    margin: float
    bumps: tuple = field(init=False)

    def __post_init__(self):
        d = self.cover[0].dim
        bumps = tuple(JetOracle(self._make(i), d, name=f"bump{i}") for i in range(len(self.cover)))
        object.__setattr__(self, "bumps", bumps)

    def _raw_jets(self, x, order):
        vs = [Jet.variable(x, k, order) for k in range(len(x))]
        return [b(*vs) for b in self.raw]

    def _make(self, i):
        def jet_fn(x, order):
            js = self._raw_jets(x, order)
            total = js[0]
            for j in js[1:]:
                total = total + j
            if float(total.value) <= 0.0:
                raise DomainError(f"point {x.tolist()} is not covered")
            return js[i] * T.reciprocal(total)
        return jet_fn

    def values(self, x) -> np.ndarray:
        return np.array([float(b.value(x)) for b in self.bumps])

    def raw_sum(self, x) -> float:
        return float(sum(j.value for j in self._raw_jets(np.asarray(x, float), 0)))


def partition_of_unity(M: CornerManifold, cover: Sequence[Box], margin: float | None = None,
                       samples: int = 1000, seed: int = 0) -> PartitionOfUnity:
    """Smooth partition of unity on ``M`` subordinate to a finite cover by
    open boxes (bounds may be infinite).

    Each bump is positive exactly on its box shrunk by ``margin`` (default
    2% of the diameter of ``M``'s sampling box), so its support lies inside
    the box.

    Raises
    ------
    DomainError
        If a sampled point of ``M`` is in none of the shrunk boxes.
    """
    cover = tuple(cover)
    if not cover:
        raise DomainError("empty cover")
    if margin is None:
        lo, hi = np.asarray(M.bounds.lo), np.asarray(M.bounds.hi)
        margin = 0.02 * float(np.linalg.norm(hi - lo))
    pu = PartitionOfUnity(cover, tuple(_box_bump(b, margin) for b in cover), margin)
    rng = np.random.default_rng(seed)
    pts = M.bounds.sample(rng, samples)
    for p in pts:
        if M.contains(p) and not pu.raw_sum(p) > 0.0:
            raise DomainError(f"cover does not cover the point {p.tolist()}")
    return pu


# -- extension from a corner subdomain --------------------------------------------


@dataclass(frozen=True)
class CornerDomain:
    """``L = {x : l_j(x) >= 0 for all j}`` for smooth defining functions.

    ``defining`` are jet programs in the ambient variables; ``boundary_sampler``
    draws points of ``dL`` (``rng, n -> (n, d)``).
    """

    defining: tuple
    bounds: Box
    name: str = ""
    boundary_sampler: Callable | None = field(default=None, compare=False)

    @property
    def dim(self) -> int:
        return self.bounds.dim

    def level_jets(self, x, order: int) -> list[Jet]:
        vs = [Jet.variable(x, k, order) for k in range(self.dim)]
        return [l(*vs) for l in self.defining]

    def levels(self, x) -> np.ndarray:
        return np.array([float(j.value) for j in self.level_jets(np.asarray(x, float), 0)])

    def contains(self, x, tol: float = 1e-12, margin: float = 0.0) -> bool:
        return bool(np.all(self.levels(x) >= -tol))

    def interior(self, x) -> bool:
        return bool(np.all(self.levels(x) > 0))

    def sample(self, rng, n: int) -> np.ndarray:
        out: list = []
        while len(out) < n:
            out.extend(p for p in self.bounds.sample(rng, 2 * n) if self.contains(p, 0.0))
        return np.array(out[:n])

    def sample_boundary(self, rng, n: int) -> np.ndarray:
        if self.boundary_sampler is None:
            raise ContractViolation(f"domain {self.name!r} has no boundary sampler")
        return np.asarray(self.boundary_sampler(rng, n), dtype=float)


def unit_square_domain() -> CornerDomain:
    """``[0, 1]^2`` via ``x, 1 - x, y, 1 - y >= 0``."""

    def sampler(rng, n):
        t = rng.random(n)
        side = rng.integers(0, 4, n)
        pts = np.empty((n, 2))
        pts[:, 0] = np.where(side < 2, t, np.where(side == 2, 0.0, 1.0))
        pts[:, 1] = np.where(side >= 2, t, np.where(side == 0, 0.0, 1.0))
        return pts

    return CornerDomain((lambda x, y: x, lambda x, y: 1.0 - x, lambda x, y: y, lambda x, y: 1.0 - y),
                        Box.unit(2), name="unit-square", boundary_sampler=sampler)


@dataclass(frozen=True)
class BoundaryPatch:
    """Data at a boundary point ``m`` of ``L``.

    Attributes
    ----------
    point : ndarray
        ``m`` (ambient coordinates).
    chart : CornerChart
        ``phi_m``, with ``phi_m(L n L_m)`` in the positive orthant and
        ``phi_m(m)`` on its boundary.
    image_box : Box
        A box containing ``phi_m(L n L_m)`` inside which the cube must fit;
        sides through 0 are faces of the orthant.
    chart_box : Box
        Where ``phi_m`` and its inverse may be evaluated (chart coordinates).
    """

    point: np.ndarray
    chart: CornerChart
    image_box: Box
    chart_box: Box
    name: str = ""


@dataclass(frozen=True)
class PatchData:
    """What one patch contributed: cube ``C_m``, open set ``W_m`` and the
    core box on which its bump is positive (chart coordinates)."""

    patch: BoundaryPatch
    eps: float
    center: np.ndarray
    active: tuple
    cube: Box
    window: Box
    core: Box
    extension: BoxExtension = field(repr=False)
    f_m: JetOracle = field(repr=False)


def _fit_eps(patch: BoundaryPatch, x0: np.ndarray, active: np.ndarray) -> float:
    img, cb = patch.image_box, patch.chart_box
    ilo, ihi = np.asarray(img.lo), np.asarray(img.hi)
    clo, chi = np.asarray(cb.lo), np.asarray(cb.hi)
    for j in range(1, 40):
        e = 2.0**-j
        c = np.where(active, e, x0)
        lo, hi = c - e, c + e
        ok_cube = (np.all(hi < ihi) and np.all(np.where(active, lo >= ilo, lo > ilo)))
        wlo = np.where(active, -e, c - e)
        whi = np.where(active, 2 * e, c + e)
        ok_win = np.all(wlo >= clo) and np.all(whi <= chi)
        if ok_cube and ok_win:
            return e
    raise ConstructionError(f"patch {patch.name!r}: no cube fits in the chart image")


@dataclass
class ManifoldExtension:
    """``f_bar`` on ``U = int(L) u V_1 u ... u V_k``.

    ``evaluator`` is the extension (domain ``U``); ``partition(x)`` returns
    the values ``(g, h, h_1, ..., h_k)`` of the partition of unity used.
    """

    domain: CornerDomain
    f: JetOracle
    order: int
    patches: list
    delta: float
    evaluator: JetOracle = field(init=False, repr=False)

    def __post_init__(self):
        d = self.domain.dim
        region = T.Region(self.in_U, Box(tuple(np.asarray(self.domain.bounds.lo) - 1.0),
                                         tuple(np.asarray(self.domain.bounds.hi) + 1.0)), name="U")
        self.U = region
        self.evaluator = JetOracle(self._jet, d, order=self.order, domain=region,
                                   shape=self.f.shape, name="fbar")

    # membership of U: int(L) or some open core
    def in_U(self, x) -> bool:
        x = np.asarray(x, dtype=float)
        if self.domain.interior(x):
            return True
        return any(self._chart_point(pd, x) is not None and pd.core.interior_contains(self._chart_point(pd, x))
                   for pd in self.patches)

    def _chart_point(self, pd: PatchData, x):
        if not pd.patch.chart.domain(x):
            return None
        u = pd.patch.chart(x)
        return u if pd.patch.chart_box.contains(u, tol=0.0) else None

    def _weights(self, x, order: int):
        """Jets of ``psi_g, psi_h`` and ``(index, psi_m)`` for patches whose
        bump does not vanish identically near ``x``."""
        delta = self.delta
        ls = self.domain.level_jets(x, order)
        inner = None
        outer = None
        for l in ls:
            a = smooth_step(l * (1.0 / delta) - 1.0)
            b = smooth_step(l * (1.0 / delta) + 2.0)
            inner = a if inner is None else inner * a
            outer = b if outer is None else outer * b
        psi_h = inner
        psi_g = 1.0 - outer
        ms = []
        for idx, pd in enumerate(self.patches):
            u = self._chart_point(pd, x)
            if u is None or not pd.window.interior_contains(u):
                continue
            uj = pd.patch.chart.forward.jet(x, order)
            mid = (np.asarray(pd.core.lo) + np.asarray(pd.core.hi)) / 2
            half = (np.asarray(pd.core.hi) - np.asarray(pd.core.lo)) / 2
            psi = None
            for k in range(len(mid)):
                z = T.cutoff((uj.component(k) - mid[k]) * (1.0 / half[k]))
                psi = z if psi is None else psi * z
            if np.any(psi.coeffs):
                ms.append((idx, psi))
        return psi_g, psi_h, ms

    def _jet(self, x, order):
        psi_g, psi_h, ms = self._weights(x, order)
        total = psi_g + psi_h
        for _, p in ms:
            total = total + p
        if not float(total.value) > 0.0:
            raise DomainError(f"point {x.tolist()} lies outside U")
        num = None
        if np.any(psi_h.coeffs):
            num = psi_h * self.f.jet(x, order)
        for idx, p in ms:
            term = p * self.patches[idx].f_m.jet(x, order)
            num = term if num is None else num + term
        if num is None:
            return Jet(np.zeros(total.coeffs.shape + tuple(self.f.shape)), x)
        return num * T.reciprocal(total)

    def partition(self, x) -> np.ndarray:
        """``(g, h, h_1, ..., h_k)`` at ``x``; sums to 1 on ``U``."""
        x = np.asarray(x, dtype=float)
        psi_g, psi_h, ms = self._weights(x, 0)
        vals = np.zeros(2 + len(self.patches))
        vals[0], vals[1] = float(psi_g.value), float(psi_h.value)
        for idx, p in ms:
            vals[2 + idx] = float(p.value)
        total = vals.sum()
        if not total > 0.0:
            raise DomainError(f"point {x.tolist()} lies outside U")
        return vals / total

    def __call__(self, x):
        return self.evaluator.value(x)


def _patch_data(patch: BoundaryPatch, f: JetOracle, domain: CornerDomain, N: int,
                face_samples: int) -> PatchData:
    ch = patch.chart
    x0 = ch(patch.point)
    if np.any(x0 < -ACTIVE_TOL):
        raise ConstructionError(f"patch {patch.name!r}: chart image of the point leaves the orthant")
    active = np.abs(x0) <= ACTIVE_TOL
    if not active.any():
        raise ConstructionError(f"patch {patch.name!r}: point is not on the orthant boundary")
    eps = _fit_eps(patch, x0, active)
    center = np.where(active, eps, x0)
    n = len(x0)
    cube = Box(center - eps, center + eps)
    wlo = np.where(active, -eps, center - eps)
    whi = np.where(active, 2 * eps, center + eps)
    window = Box(wlo, whi, closed=False)
    mid, half = (wlo + whi) / 2, (whi - wlo) / 2 * 7.0 / 8.0
    core = Box(mid - half, mid + half, closed=False)
    # the cube must lie in phi(L n L_m)
    grid = np.array(list(itertools.product(*[np.linspace(0, 1, 5)] * n)))
    for s in grid:
        p = ch.inv(center - eps + 2 * eps * s)
        if not domain.contains(p, tol=1e-9):
            raise ConstructionError(f"patch {patch.name!r}: cube point {p.tolist()} is not in L")
    lo = center - eps
    scale = 2.0 * eps

    def src_jet(s, order):
        us = [Jet.variable(s, k, order) * scale + lo[k] for k in range(n)]
        inv = ch.inverse.jet(lo + scale * s, order)
        inv = jet_compose(inv, us)
        p = np.atleast_1d(np.asarray(inv.value, dtype=float))
        return jet_compose(f.jet(p, order), inv)

    src = JetOracle(src_jet, n, order=N, domain=Box.unit(n), shape=f.shape, name=f"f_{patch.name}")
    ext = extend_box(src, N, face_samples=face_samples)

    def fm_jet(x, order):
        u = ch.forward.jet(x, order)
        s = Jet.stack([(u.component(k) - lo[k]) * (1.0 / scale) for k in range(n)])
        sv = np.asarray(s.value, dtype=float)
        return jet_compose(ext.evaluator.jet(sv, order), s)

    fm = JetOracle(fm_jet, n, order=N, shape=f.shape, name=f"fbar_{patch.name}")
    return PatchData(patch, eps, center, tuple(np.flatnonzero(active)), cube, window, core, ext, fm)


def extend_on_manifold(domain: CornerDomain, f: JetOracle, patches: Sequence[BoundaryPatch],
                       N: int = 4, samples: int = 400, seed: int = 0,
                       face_samples: int = 16) -> ManifoldExtension:
    """Extend ``f`` from the corner domain ``L`` to an open ``U`` containing ``L``.

    Parameters
    ----------
    domain : CornerDomain
        ``L``, inside an ambient Euclidean space.
    f : JetOracle
        Source, evaluable with one-sided jets on ``L``.
    patches : sequence of BoundaryPatch
        Finitely many boundary patches; their open sets must cover ``dL``.
    N : int
        Order of the box extensions used on the patches.
    samples : int
        Number of sampled points of ``L`` and of ``dL`` used to validate
        that the partition is positive on ``L``.

    Returns
    -------
    ManifoldExtension
        With ``f_bar == f`` on ``L``.

    Raises
    ------
    ConstructionError
        If a cube does not fit, or the patches leave part of ``dL`` uncovered.
    """
    data = [_patch_data(p, f, domain, N, face_samples) for p in patches]
    delta = (min(pd.eps for pd in data) / 4.0) if data else 1.0
    ext = ManifoldExtension(domain, f, N, data, delta)
    rng = np.random.default_rng(seed)
    pts = [domain.sample(rng, samples)]
    if data:
        pts.append(domain.sample_boundary(rng, samples))
    for p in np.vstack(pts):
        try:
            ext.partition(p)
        except DomainError:
            raise ConstructionError(f"patches do not cover the point {p.tolist()} of L") from None
        if not ext.in_U(p) and not domain.interior(p):
            raise ConstructionError(f"boundary point {p.tolist()} is in no patch core")
    return ext


def square_patches(edge_points: Sequence[float] = (0.2, 0.4, 0.6, 0.8), reach: float = 0.25) -> list:
    """Corner and edge patches for the unit square.

    Corner charts are the reflections ``(x, y), (1-x, y), (x, 1-y), (1-x, 1-y)``
    with image ``[0, 1/2)^2``; edge patches use the chart that puts the edge
    on a coordinate axis, with image reaching ``reach`` along the edge and
    ``1/2`` inward.
    """
    cone = CornerCone.standard(2)
    big = Box((-1.0, -1.0), (2.0, 2.0))
    out = []
    for sx, sy in itertools.product((0, 1), (0, 1)):
        A = np.diag([1.0 - 2 * sx, 1.0 - 2 * sy])
        b = np.array([float(sx), float(sy)])
        ch = affine_chart(f"corner{sx}{sy}", A, b, cone)
        out.append(BoundaryPatch(np.array([float(sx), float(sy)]), ch,
                                 Box((0.0, 0.0), (0.5, 0.5), closed=False), big, ch.name))
    for t in edge_points:
        for axis, side in itertools.product((0, 1), (0, 1)):
            # edge: coordinate `axis` equals `side`; chart puts the edge at u_1 = 0
            p = np.array([t, t])
            p[axis] = float(side)
            A = np.zeros((2, 2))
            A[0, axis] = 1.0 - 2 * side
            A[1, 1 - axis] = 1.0
            b = np.array([float(side), 0.0])
            ch = affine_chart(f"edge{axis}{side}@{t}", A, b, cone)
            img = Box((0.0, max(0.0, t - reach)), (0.5, min(1.0, t + reach)), closed=False)
            out.append(BoundaryPatch(p, ch, img, big, ch.name))
    return out
