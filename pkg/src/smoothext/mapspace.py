"""
smoothext.mapspace
------------------

Maps from a sampled corner domain ``M`` into matrix groups and vector
spaces, stored as grids of jets: pointwise group operations, the
logarithm chart ``phi_*`` of ``C^inf(M, K)``, push-forwards
``f_#(gamma) = f o (id, gamma)`` and their derivatives, and complex
linearity checks of differentials.

The function-space topology is replaced by grid-max norms of jets up to
order ``N``; every check below is a statement about finitely many grid
points.

Matrix functions of jets (``exp``, ``log``) act on the left-multiplication
representation of the truncated jet algebra: a matrix-valued jet ``A`` is
mapped to the block lower-triangular operator ``P -> A P`` on truncated
polynomials, and analytic functions commute with that representation.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np
from scipy.linalg import expm, logm

from . import taylor as T
from .errors import ContractViolation, DomainError
from .taylor import Box, Jet, JetOracle, jet_compose, multi_indices

CHART_RADIUS = 1.0
DPF_STEPS = (1e-2, 1e-3)
DPF_MARGIN = 1e-6


# -- groups -------------------------------------------------------------------------


def _skew(rng, r):
    a = rng.standard_normal((r, r))
    return (a - a.T) / 2


@dataclass(frozen=True)
class MatrixGroup:
    """A matrix group ``K`` in ``GL(r)`` (real matrices; complex groups use
    the realification ``A + iB -> [[A, -B], [B, A]]``).

    Attributes
    ----------
    name : str
    r : int
        Matrix size.
    residual : callable
        ``(..., r, r) -> (...)`` membership residual.
    algebra : callable
        ``rng -> (r, r)`` random element of the Lie algebra with spectral norm 1.
    abelian : bool
    """

    name: str
    r: int
    residual: Callable = field(repr=False)
    algebra: Callable = field(repr=False)
    abelian: bool = False

    def identity(self) -> np.ndarray:
        return np.eye(self.r)

    def random_algebra(self, rng, radius: float = 1.0) -> np.ndarray:
        """Uniform-radius sample in the ball of the given spectral-norm radius."""
        X = self.algebra(rng)
        return X * (radius * rng.random() / np.linalg.norm(X, 2))


def _normalized(f):
    def sample(rng):
        X = f(rng)
        return X / np.linalg.norm(X, 2)
    return sample


def special_orthogonal(r: int = 3) -> MatrixGroup:
    def res(Q):
        Q = np.asarray(Q)
        eye = np.eye(r)
        orth = np.abs(np.swapaxes(Q, -1, -2) @ Q - eye).max(axis=(-1, -2))
        return orth + np.abs(np.linalg.det(Q) - 1.0)
    return MatrixGroup(f"SO({r})", r, res, _normalized(lambda rng: _skew(rng, r)), abelian=(r == 2))


def special_linear(r: int = 2) -> MatrixGroup:
    def res(A):
        return np.abs(np.linalg.det(np.asarray(A)) - 1.0)

    def alg(rng):
        a = rng.standard_normal((r, r))
        return a - np.trace(a) / r * np.eye(r)
    return MatrixGroup(f"SL({r})", r, res, _normalized(alg))


def realify(Z) -> np.ndarray:
    """``A + iB -> [[A, -B], [B, A]]`` (batched)."""
    Z = np.asarray(Z)
    A, B = Z.real, Z.imag
    top = np.concatenate([A, -B], axis=-1)
    bot = np.concatenate([B, A], axis=-1)
    return np.concatenate([top, bot], axis=-2)


def complexify(R) -> np.ndarray:
    R = np.asarray(R)
    r = R.shape[-1] // 2
    return R[..., :r, :r] + 1j * R[..., r:, :r]


def complex_general_linear(r: int = 2) -> MatrixGroup:
    """``GL(r, C)`` realified in ``GL(2r, R)``."""
    def res(R):
        R = np.asarray(R)
        n = R.shape[-1] // 2
        A1, B1 = R[..., :n, :n], R[..., n:, :n]
        s = np.abs(R[..., n:, n:] - A1).max(axis=(-1, -2)) + np.abs(R[..., :n, n:] + B1).max(axis=(-1, -2))
        sing = np.abs(np.linalg.det(complexify(R))) == 0.0
        return s + np.where(sing, np.inf, 0.0)

    def alg(rng):
        return realify(rng.standard_normal((r, r)) + 1j * rng.standard_normal((r, r)))
    return MatrixGroup(f"GL({r},C)", 2 * r, res, _normalized(alg))


def torus() -> MatrixGroup:
    """The circle of rotations inside ``GL(2)`` (abelian)."""
    so2 = special_orthogonal(2)
    return MatrixGroup("T", 2, so2.residual, so2.algebra, abelian=True)


GROUPS = {"SO3": lambda: special_orthogonal(3), "SO2": lambda: special_orthogonal(2),
          "SL2": lambda: special_linear(2), "GL2C": lambda: complex_general_linear(2),
          "torus": torus}


# -- grids and matrix functions of jets ------------------------------------------------


def uniform_grid(n: int = 64, d: int = 1) -> np.ndarray:
    """Uniform grid of ``[0, 1]^d`` as an array of shape ``(d, n^d)``."""
    axes = np.meshgrid(*([np.linspace(0.0, 1.0, n)] * d), indexing="ij")
    return np.stack([a.ravel() for a in axes])


def _regular_rep(coeffs: np.ndarray, d: int) -> tuple[np.ndarray, tuple]:
    """Left-multiplication operator of a matrix-valued jet.

    ``coeffs`` has shape ``(N+1,)*d + batch + (r, r)``; the result has shape
    ``batch + (B r, B r)`` with ``B`` the number of multi-indices.
    """
    N = coeffs.shape[0] - 1
    idx = multi_indices(d, N)
    pos = {a: i for i, a in enumerate(idx)}
    r = coeffs.shape[-1]
    batch = coeffs.shape[d:-2]
    B = len(idx)
    R = np.zeros(batch + (B * r, B * r))
    for beta in idx:
        for gamma in idx:
            diff = tuple(b - g for b, g in zip(beta, gamma))
            if min(diff) < 0:
                continue
            i, j = pos[beta], pos[gamma]
            R[..., i * r:(i + 1) * r, j * r:(j + 1) * r] = coeffs[diff]
    return R, idx


def _from_regular(R: np.ndarray, idx: tuple, d: int, r: int) -> np.ndarray:
    N = max(sum(a) for a in idx)
    batch = R.shape[:-2]
    out = np.zeros((N + 1,) * d + batch + (r, r))
    for i, a in enumerate(idx):
        out[a] = R[..., i * r:(i + 1) * r, 0:r]
    return out


def _batched(fn, R):
    flat = R.reshape((-1,) + R.shape[-2:])
    res = np.stack([fn(m) for m in flat])
    return res.reshape(R.shape)


def _real_logm(m):
    L = logm(m)
    if np.iscomplexobj(L):
        if np.abs(L.imag).max() > 1e-8 * max(1.0, np.abs(L.real).max()):
            raise DomainError("matrix logarithm is not real")
        L = L.real
    return L


def jet_expm(a: Jet) -> Jet:
    """``exp`` of a matrix-valued jet."""
    R, idx = _regular_rep(np.asarray(a.coeffs), a.dim)
    return Jet(_from_regular(_batched(expm, R), idx, a.dim, a.shape[-1]), a.point)


def jet_logm(a: Jet) -> Jet:
    """Principal ``log`` of a matrix-valued jet (values must lie in ``W``)."""
    R, idx = _regular_rep(np.asarray(a.coeffs), a.dim)
    return Jet(_from_regular(_batched(_real_logm, R), idx, a.dim, a.shape[-1]), a.point)


def jet_matinv(a: Jet) -> Jet:
    """Inverse of a matrix-valued jet by the Neumann series
    ``(A0 (I + X))^{-1} = sum_k (-X)^k A0^{-1}``, exact to order ``N``."""
    c = np.asarray(a.coeffs)
    origin = (0,) * a.dim
    A0 = c[origin]
    if np.any(np.abs(np.linalg.det(A0)) == 0.0):
        raise DomainError("singular matrix value")
    A0inv = np.linalg.inv(A0)
    inv0 = Jet.constant(A0inv, a.point, a.order)
    Xc = np.matmul(A0inv, c)
    Xc[origin] = 0.0
    X = Jet(Xc, a.point)
    eye = np.broadcast_to(np.eye(A0.shape[-1]), A0.shape)
    total = Jet.constant(eye, a.point, a.order)
    power = total
    for _ in range(a.order):
        power = -(X @ power)
        total = total + power
    return total @ inv0


# -- grid maps ----------------------------------------------------------------------------


@dataclass(frozen=True)
class GridMap:
    """A map on ``M`` sampled on a grid: ``jet`` is a batched jet at the grid
    points (point shape ``(d, G)``, value shape ``(G,) + value_shape``)."""

    grid: np.ndarray
    jet: Jet

    @property
    def values(self) -> np.ndarray:
        return np.asarray(self.jet.value)

    @property
    def order(self) -> int:
        return self.jet.order

    @property
    def size(self) -> int:
        return self.grid.shape[1]

    @classmethod
    def from_program(cls, program: Callable, grid: np.ndarray, order: int = T.DEFAULT_ORDER) -> "GridMap":
        """Evaluate a jet program (one jet per variable of ``M``) on the grid."""
        grid = np.atleast_2d(np.asarray(grid, dtype=float))
        xs = [Jet.variable(grid, i, order) for i in range(grid.shape[0])]
        out = program(*xs)
        if not isinstance(out, Jet):
            out = Jet.constant(np.broadcast_to(out, (grid.shape[1],)), grid, order)
        G = grid.shape[1]
        vs = out.shape
        if not vs or vs[0] != G:
            c = np.broadcast_to(_expand_batch(out.coeffs, grid.shape[0]), out.coeffs.shape[:grid.shape[0]] + (G,) + vs)
            out = Jet(c, grid)
        return cls(grid, out)


def _expand_batch(c, d):
    return c.reshape(c.shape[:d] + (1,) + c.shape[d:])


def _check_same_grid(a, b):
    if a.grid.shape != b.grid.shape or not np.array_equal(a.grid, b.grid):
        raise ContractViolation("maps live on different grids")
    if a.order != b.order:
        raise ContractViolation(f"maps carry jets of different orders {a.order} and {b.order}")


@dataclass(frozen=True)
class GroupMapElement:
    """``gamma : M -> K`` on a grid, with its jets in the coordinates of ``M``."""

    group: MatrixGroup
    grid: np.ndarray
    jet: Jet

    def __post_init__(self):
        if self.jet.shape[-2:] != (self.group.r, self.group.r):
            raise ContractViolation(f"values must be {self.group.r}x{self.group.r} matrices")

    @property
    def values(self) -> np.ndarray:
        return np.asarray(self.jet.value)

    @property
    def order(self) -> int:
        return self.jet.order

    def membership_residual(self) -> float:
        return float(np.max(self.group.residual(self.values)))

    @classmethod
    def identity(cls, group: MatrixGroup, grid, order: int = T.DEFAULT_ORDER) -> "GroupMapElement":
        grid = np.atleast_2d(np.asarray(grid, dtype=float))
        eye = np.broadcast_to(np.eye(group.r), (grid.shape[1], group.r, group.r))
        return cls(group, grid, Jet.constant(eye, grid, order))

    @classmethod
    def exp_of(cls, group: MatrixGroup, algebra_map: GridMap) -> "GroupMapElement":
        """``m -> exp(X(m))`` for an algebra-valued grid map."""
        return cls(group, algebra_map.grid, jet_expm(algebra_map.jet))

    @classmethod
    def from_program(cls, group: MatrixGroup, program: Callable, grid, order: int = T.DEFAULT_ORDER):
        gm = GridMap.from_program(program, grid, order)
        return cls(group, gm.grid, gm.jet)

    @classmethod
    def random(cls, group: MatrixGroup, grid, rng, order: int = T.DEFAULT_ORDER,
               degree: int = 3, radius: float = 1.0) -> "GroupMapElement":
        """``exp`` of a random algebra-valued polynomial in the grid variables."""
        grid = np.atleast_2d(np.asarray(grid, dtype=float))
        Xs = [group.random_algebra(rng, radius / degree) for _ in range(degree + 1)]

        def prog(*ms):
            m = ms[0]
            acc = None
            p = Jet.constant(np.ones(m.shape), m.point, m.order)
            for X in Xs:
                term = np.asarray(p.coeffs)[..., None, None] * X
                acc = term if acc is None else acc + term
                p = p * m
            return Jet(acc, m.point)
        return cls.exp_of(group, GridMap.from_program(prog, grid, order))


def pointwise_mul(a: GroupMapElement, b: GroupMapElement) -> GroupMapElement:
    """``(ab)(m) = a(m) b(m)`` with the matrix Leibniz rule on jets."""
    _check_same_grid(a, b)
    if a.group.name != b.group.name:
        raise ContractViolation(f"different groups {a.group.name} and {b.group.name}")
    return GroupMapElement(a.group, a.grid, a.jet @ b.jet)


def pointwise_inv(a: GroupMapElement) -> GroupMapElement:
    """``m -> a(m)^{-1}``."""
    return GroupMapElement(a.group, a.grid, jet_matinv(a.jet))


def grid_max_diff(a, b) -> float:
    """Grid-max difference of all jet coefficients."""
    _check_same_grid(a, b)
    return float(np.max(np.abs(np.asarray(a.jet.coeffs) - np.asarray(b.jet.coeffs))))


def in_chart_domain(values) -> np.ndarray:
    """``||k - I||_2 < 1`` per grid point."""
    v = np.asarray(values)
    eye = np.eye(v.shape[-1])
    return np.linalg.norm(v - eye, ord=2, axis=(-2, -1)) < CHART_RADIUS


def chart_transport(a: GroupMapElement) -> GridMap:
    """``phi_*(a) = log o a`` (principal logarithm), as an algebra-valued grid map.

    Raises
    ------
    DomainError
        If some value lies outside ``W = {||k - I|| < 1}``.
    """
    inside = in_chart_domain(a.values)
    if not inside.all():
        bad = np.flatnonzero(~inside)[:3]
        raise DomainError(f"values at grid indices {bad.tolist()} lie outside the chart domain")
    return GridMap(a.grid, jet_logm(a.jet))


def inverse_transport(group: MatrixGroup, X: GridMap) -> GroupMapElement:
    """``exp o X``."""
    return GroupMapElement.exp_of(group, X)


# -- push-forwards --------------------------------------------------------------------------


@dataclass(frozen=True)
class ParamMap:
    """``f : M x U -> R^s`` with ``M`` of dimension ``d``, ``U`` open in ``R^e``.

    ``f`` must be a jet program (``JetOracle.from_program``) so that it can
    be evaluated on a whole grid at once.  ``U`` is a box or a predicate on
    arrays of shape ``(e,)``.
    """

    f: JetOracle
    d: int
    e: int
    U: Box | Callable | None = None
    name: str = ""

    def __post_init__(self):
        if self.f.program is None:
            raise ContractViolation("ParamMap needs an oracle built from a jet program")
        if self.f.dim != self.d + self.e:
            raise ContractViolation(f"oracle has {self.f.dim} variables, expected {self.d + self.e}")

    def in_U(self, u, margin: float = 0.0) -> bool:
        if self.U is None:
            return True
        if isinstance(self.U, Box):
            return self.U.contains(u, tol=0.0, margin=margin) if self.U.closed else \
                bool(np.all(u > np.asarray(self.U.lo) + margin) and np.all(u < np.asarray(self.U.hi) - margin))
        return bool(self.U(np.asarray(u, dtype=float)))

    def jet_at(self, points: np.ndarray, order: int) -> Jet:
        """Batched full jet at points of shape ``(d + e, G)``."""
        xs = [Jet.variable(points, i, order) for i in range(self.d + self.e)]
        return self.f.program(*xs)

    def partial_jet(self, x, y, order: int) -> Jet:
        """Jet of ``y -> f(x, y)`` at ``y``: the ``d_2`` derivatives."""
        x = np.asarray(x, dtype=float)
        y = np.asarray(y, dtype=float)
        xs = [Jet.constant(x[i], y, order) for i in range(self.d)]
        ys = [Jet.variable(y, i, order) for i in range(self.e)]
        return self.f.program(*xs, *ys)


def _components(g: GridMap, e: int) -> list[Jet]:
    c = np.asarray(g.jet.coeffs)
    d = g.grid.shape[0]
    if len(g.jet.shape) == 1 and e == 1:
        return [g.jet]
    return [Jet(c[(slice(None),) * (d + 1) + (k,)], g.grid) for k in range(e)]


def _gamma_values(gamma: GridMap, e: int) -> np.ndarray:
    v = np.asarray(gamma.values, dtype=float)
    return v.reshape(v.shape[0], e)


def _check_in_U(f: ParamMap, vals: np.ndarray, what: str = "gamma"):
    for i, u in enumerate(vals):
        if not f.in_U(u):
            raise DomainError(f"{what} leaves U at grid index {i}: {u.tolist()}")


def pushforward(f: ParamMap, gamma: GridMap) -> GridMap:
    """``f_#(gamma)(m) = f(m, gamma(m))`` with jets propagated through the
    composition."""
    e = f.e
    vals = _gamma_values(gamma, e)
    _check_in_U(f, vals)
    grid = gamma.grid
    pts = np.vstack([grid, vals.T])
    outer = f.jet_at(pts, gamma.order)
    inners = [Jet.variable(grid, i, gamma.order) for i in range(grid.shape[0])] + _components(gamma, e)
    return GridMap(grid, jet_compose(outer, inners))


def tangent_pushforward(f: ParamMap, gamma: GridMap, v) -> tuple[np.ndarray, np.ndarray]:
    """``(Tf)_#(T gamma)`` at tangent vector ``v`` of ``M`` at every grid point:
    returns ``(f(m, gamma(m)), df(m, gamma(m)).(v, d gamma(m).v))``."""
    e, d = f.e, gamma.grid.shape[0]
    v = np.asarray(v, dtype=float)
    vals = _gamma_values(gamma, e)
    grid = gamma.grid
    # T gamma: first-order coefficients times v
    dg = np.zeros_like(vals)
    for i in range(d):
        ei = tuple(1 if k == i else 0 for k in range(d))
        dg = dg + v[i] * np.asarray(gamma.jet.coeffs[ei]).reshape(vals.shape)
    # Tf from a first-order jet of f along the tangent vector (v, d gamma . v)
    t = np.zeros((1, grid.shape[1]))
    line = []
    for i in range(d):
        line.append(Jet(np.stack([grid[i], np.full(grid.shape[1], v[i])]), t))
    for k in range(e):
        line.append(Jet(np.stack([vals[:, k], dg[:, k]]), t))
    outer = f.jet_at(np.vstack([grid, vals.T]), 1)
    J = jet_compose(outer, line)
    return np.asarray(J.coeffs[0]), np.asarray(J.coeffs[1])


def detect_epsilon(f: ParamMap, gamma: GridMap, eta: GridMap, margin: float = DPF_MARGIN,
                   probes: int = 21, jmax: int = 30) -> float:
    """Largest ``2^-j`` with ``gamma + t eta`` in ``U`` (with ``margin``) for
    sampled ``|t| <= 2^-j`` at every grid point.

    Raises
    ------
    DomainError
        If no admissible ``eps`` exists.
    """
    gv = _gamma_values(gamma, f.e)
    ev = _gamma_values(eta, f.e)
    for j in range(0, jmax + 1):
        eps = 2.0**-j
        ts = np.linspace(-eps, eps, probes)
        ok = all(f.in_U(u + t * w, margin) for u, w in zip(gv, ev) for t in ts)
        if ok:
            return eps
    raise DomainError("no admissible epsilon: gamma + t eta leaves U for every tested t")


def _shifted(gamma: GridMap, eta: GridMap, t: float) -> GridMap:
    return GridMap(gamma.grid, Jet(np.asarray(gamma.jet.coeffs) + t * np.asarray(eta.jet.coeffs), gamma.grid))


def d2_pushforward(f: ParamMap, gamma: GridMap, eta: GridMap, n: int) -> np.ndarray:
    """``(d_2^n f)_#(gamma, eta)(m) = d^n_t f(m, gamma(m) + t eta(m))|_{t=0}``
    from partial jets (``m`` held constant)."""
    e = f.e
    gv = _gamma_values(gamma, e)
    ev = _gamma_values(eta, e)
    grid = gamma.grid
    G = grid.shape[1]
    t = np.zeros((1, G))
    line = [Jet.constant(grid[i], t, n) for i in range(grid.shape[0])]
    for k in range(e):
        c = np.zeros((n + 1, G))
        c[0] = gv[:, k]
        if n >= 1:
            c[1] = ev[:, k]
        line.append(Jet(c, t))
    J = jet_compose(f.jet_at(np.vstack([grid, gv.T]), n), line)
    return np.asarray(J.coeffs[n]) * math.factorial(n)


@dataclass(frozen=True)
class DPFReport:
    """Finite differences of ``f_#`` against ``(d_2^n f)_#`` on a grid."""

    n: int
    eps: float
    residual: float
    fd: np.ndarray = field(repr=False)
    exact: np.ndarray = field(repr=False)

    def passes(self, tol: float = 1e-5) -> bool:
        return self.residual <= tol


def verify_dpf(f: ParamMap, gamma: GridMap, eta: GridMap, n: int = 1, steps=DPF_STEPS) -> DPFReport:
    """Compare ``d^n(f_#)(gamma).eta`` by Richardson-extrapolated central
    differences in ``h`` with ``(d_2^n f)_#(gamma, eta)`` from partial jets.

    Raises
    ------
    DomainError
        If the detected ``eps`` is smaller than the difference stencil.
    """
    if n not in (1, 2):
        raise ContractViolation("verify_dpf supports n = 1 and n = 2")
    eps = detect_epsilon(f, gamma, eta)
    h1, h2 = steps
    if n * max(h1, h2) / 2.0 > eps or max(h1, h2) > eps:
        raise DomainError(f"detected eps={eps} leaves no room for steps {steps}")

    def value(t):
        return np.asarray(pushforward(f, _shifted(gamma, eta, t)).values)

    def central(h):
        if n == 1:
            return (value(h) - value(-h)) / (2 * h)
        return (value(h) - 2 * value(0.0) + value(-h)) / h**2

    r = (h1 / h2) ** 2
    fd = (r * central(h2) - central(h1)) / (r - 1.0)
    exact = d2_pushforward(f, gamma, eta, n)
    return DPFReport(n, eps, float(np.max(np.abs(fd - exact))), fd, exact)


def dpf_battery(grid=None, order: int = 4) -> list[tuple[str, ParamMap, GridMap, GridMap]]:
    """Five (f, gamma, eta) triples on ``M = [0, 1]`` used by the checks."""
    grid = uniform_grid(64) if grid is None else grid
    out = []

    def add(name, prog, e, U, g, h):
        pm = ParamMap(JetOracle.from_program(prog, 1 + e, name=name), 1, e, U, name)
        out.append((name, pm, GridMap.from_program(g, grid, order), GridMap.from_program(h, grid, order)))

    one = lambda m: m * 0.0 + 1.0  # noqa: E731
    add("m*u^2", lambda m, u: m * u * u, 1, None, one, one)
    add("u^3", lambda m, u: u * u * u, 1, None, lambda m: T.sin(m * 3.0), lambda m: T.cos(m))
    add("sin(m+u)exp(u)", lambda m, u: T.sin(m + u) * T.exp(u), 1, None,
        lambda m: m * m - 0.5, lambda m: 1.0 + m * 0.5)
    add("1/(1+u^2)cos(mu)", lambda m, u: T.reciprocal(1.0 + u * u) * T.cos(m * u), 1, None,
        lambda m: T.cos(m * 2.0), lambda m: m - 0.3)
    add("log-pair", lambda m, u, w: Jet.stack([T.log(u) * w + m, T.sqrt(u * w)]), 2,
        Box((0.0, 0.0), (np.inf, np.inf), closed=False),
        lambda m: Jet.stack([1.0 + m * m, 2.0 - m]), lambda m: Jet.stack([T.sin(m), m * 0.0 + 1.0]))
    return out


# -- complex linearity ------------------------------------------------------------------------


def times_i(v) -> np.ndarray:
    """Multiplication by ``i`` in paired reals ``(re_1, im_1, re_2, im_2, ...)``."""
    v = np.asarray(v, dtype=float)
    w = np.empty_like(v)
    w[0::2] = -v[1::2]
    w[1::2] = v[0::2]
    return w


@dataclass(frozen=True)
class HolomorphyReport:
    residual: float
    samples: int
    tol: float

    @property
    def passes(self) -> bool:
        return self.residual <= self.tol


def holomorphy_check(f: JetOracle, points, directions=None, seed: int = 0,
                     tol: float = 1e-8) -> HolomorphyReport:
    """Max of ``||df(x)(i v) - i df(x)(v)||`` over sampled points and unit
    directions (complex coordinates as interleaved real pairs)."""
    pts = np.atleast_2d(np.asarray(points, dtype=float))
    rng = np.random.default_rng(seed)
    if directions is None:
        directions = rng.standard_normal(pts.shape)
    dirs = np.atleast_2d(np.asarray(directions, dtype=float))
    worst = 0.0
    for x, v in zip(pts, dirs):
        v = v / np.linalg.norm(v)
        d_v = np.ravel(f.directional_jet(x, v, 1).coeffs[1])
        d_iv = np.ravel(f.directional_jet(x, times_i(v), 1).coeffs[1])
        worst = max(worst, float(np.linalg.norm(d_iv - times_i(d_v))))
    return HolomorphyReport(worst, len(pts), tol)


def _cmul(a, b):
    """Product of complex numbers stored as (re, im) jet pairs."""
    return a[0] * b[0] - a[1] * b[1], a[0] * b[1] + a[1] * b[0]


def holomorphy_battery(r: int = 2) -> dict[str, tuple[JetOracle, bool]]:
    """Named maps on paired reals with their expected verdict."""

    def square(x, y):
        re, im = _cmul((x, y), (x, y))
        return Jet.stack([re, im])

    def cexp(x, y):
        ex = T.exp(x)
        return Jet.stack([ex * T.cos(y), ex * T.sin(y)])

    def conj(x, y):
        return Jet.stack([x, -y])

    def real_part(x, y):
        return Jet.stack([x, y * 0.0])

    def matprod(*zs):
        # two r x r complex matrices, entries row-major as (re, im) pairs
        k = r * r
        A = [(zs[2 * i], zs[2 * i + 1]) for i in range(k)]
        B = [(zs[2 * k + 2 * i], zs[2 * k + 2 * i + 1]) for i in range(k)]
        out = []
        for i in range(r):
            for j in range(r):
                re = im = None
                for l in range(r):
                    pr, pi = _cmul(A[i * r + l], B[l * r + j])
                    re = pr if re is None else re + pr
                    im = pi if im is None else im + pi
                out += [re, im]
        return Jet.stack(out)

    return {
        "z^2": (JetOracle.from_program(square, 2, shape=(2,), name="z^2"), True),
        "exp(z)": (JetOracle.from_program(cexp, 2, shape=(2,), name="exp"), True),
        "matrix product": (JetOracle.from_program(matprod, 4 * r * r, shape=(2 * r * r,), name="matmul"), True),
        "conj(z)": (JetOracle.from_program(conj, 2, shape=(2,), name="conj"), False),
        "Re(z)": (JetOracle.from_program(real_part, 2, shape=(2,), name="Re"), False),
    }


# -- local group axioms -----------------------------------------------------------------------


@dataclass(frozen=True)
class LocalGroupReport:
    samples: int
    product_violations: int
    inverse_violations: int
    conjugation_violations: int
    nonfinite_jets: int

    @property
    def passes(self) -> bool:
        return not (self.product_violations or self.inverse_violations
                    or self.conjugation_violations or self.nonfinite_jets)


def _log_norm(k) -> float:
    return float(np.linalg.norm(_real_logm(k), 2))


def verify_local_group_axioms(group: MatrixGroup, v_radius: float = 0.3, w_radius: float = 0.1,
                              samples: int = 500, seed: int = 0, g=None, order: int = 3
                              ) -> LocalGroupReport:
    """Sampled checks that ``V = exp(ball(v_radius))`` and ``W = exp(ball(w_radius))``
    behave as the local data of a Lie group inside the chart domain ``U``.

    Checks: ``V V`` lies in ``U``; ``V^{-1} = V``; ``g W g^{-1}`` lies in ``U``
    for a fixed ``g``; the jets of multiplication, inversion and conjugation
    along random curves are finite to the given order.
    """
    rng = np.random.default_rng(seed)
    if g is None:
        g = expm(group.random_algebra(rng, 2.0))
    ginv = np.linalg.inv(g)
    prod = inv = conj = nonfinite = 0
    for _ in range(samples):
        X, Y, Z = (group.random_algebra(rng, rad) for rad in (v_radius, v_radius, w_radius))
        a, b, w = expm(X), expm(Y), expm(Z)
        if not in_chart_domain(a @ b):
            prod += 1
        ai = np.linalg.inv(a)
        if not (in_chart_domain(ai) and _log_norm(ai) <= v_radius * (1 + 1e-9) + 1e-12):
            inv += 1
        if not in_chart_domain(g @ w @ ginv):
            conj += 1
        # jets of the three maps along t -> exp(t X) etc.
        t = np.zeros(1)
        ja = jet_expm(Jet(np.stack([np.zeros_like(X), X] + [np.zeros_like(X)] * (order - 1)), t))
        jb = jet_expm(Jet(np.stack([np.zeros_like(Y), Y] + [np.zeros_like(Y)] * (order - 1)), t))
        for j in (ja @ jb, jet_matinv(ja), g @ ja @ ginv):
            if not np.all(np.isfinite(j.coeffs)):
                nonfinite += 1
    return LocalGroupReport(samples, prod, inv, conj, nonfinite)
