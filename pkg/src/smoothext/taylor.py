"""
smoothext.taylor
----------------

Truncated Taylor arithmetic ("jets") in one or several variables.

A :class:`Jet` of order ``N`` in ``d`` variables stores the Taylor-normalized
coefficients ``coeffs[alpha] = (d^alpha f)(x0) / alpha!`` for every
multi-index with ``|alpha| <= N``.  Coefficients live in a dense array of
shape ``(N+1,)*d + value_shape`` whose entries above total degree ``N`` are
kept at zero.  Values may be scalars, vectors or matrices; extra leading
value axes can be used as a batch of base points.

Every derivative claim elsewhere in the package is evaluated through this
module, so products, quotients and compositions are exact up to order ``N``
(floating point rounding aside).

==============================   ==========================================
:class:`Jet`                     truncated Taylor coefficients at a point
:class:`JetOracle`               a function given by "jet at any point"
:func:`jet_add`, :func:`jet_mul` coefficient-wise sum, Cauchy product
:func:`jet_compose`              truncated composition (Faa di Bruno)
:func:`elementary_jets`          exp, sin, cos, polynomial, reciprocal, ...
:func:`bump_zeta_jet`            the fixed cutoff with plateau [-1/2, 1/2]
:func:`xi_power_jet`             powers of ``x * cutoff(x)``
:func:`fd_crosscheck`            jet derivative against finite differences
==============================   ==========================================
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import lru_cache
from itertools import product
from typing import Callable, Iterable, Sequence

import numpy as np
from scipy.special import binom

from .errors import ContractViolation, DomainError

DEFAULT_ORDER = 6
MAX_ORDER = 12

# exp(-1/t) and all its derivatives up to order ~30 are below 1e-200 here
_FLAT = 1.0 / 700.0


class MultiIndex(tuple):
    """Exponent tuple ``alpha``; ``degree`` is ``|alpha|``."""

    def __new__(cls, exponents: Iterable[int]):
        exps = tuple(int(e) for e in exponents)
        if any(e < 0 for e in exps):
            raise ContractViolation(f"negative exponent in {exps}")
        return super().__new__(cls, exps)

    @property
    def degree(self) -> int:
        return sum(self)

    def factorial(self) -> int:
        return math.prod(math.factorial(e) for e in self)


@lru_cache(maxsize=None)
def multi_indices(dim: int, order: int) -> tuple[MultiIndex, ...]:
    """All multi-indices in ``dim`` variables with total degree <= ``order``,
    sorted by degree, then lexicographically."""
    idx = [a for a in product(range(order + 1), repeat=dim) if sum(a) <= order]
    idx.sort(key=lambda a: (sum(a), a))
    return tuple(MultiIndex(a) for a in idx)


@lru_cache(maxsize=None)
def _degree_grid(dim: int, order: int) -> np.ndarray:
    if dim == 0:
        return np.zeros(())
    return np.indices((order + 1,) * dim).sum(axis=0)


@lru_cache(maxsize=None)
def _factorial_grid(dim: int, order: int) -> np.ndarray:
    f = np.array([math.factorial(k) for k in range(order + 1)], dtype=float)
    out = np.ones((order + 1,) * dim)
    for axis in range(dim):
        shape = [1] * dim
        shape[axis] = order + 1
        out = out * f.reshape(shape)
    return out


def _pad_value(coeffs: np.ndarray, dim: int, ndim: int) -> np.ndarray:
    """Insert unit axes between grid and value axes (numpy right alignment)."""
    v = coeffs.ndim - dim
    if v >= ndim:
        return coeffs
    grid = coeffs.shape[:dim]
    return coeffs.reshape(grid + (1,) * (ndim - v) + coeffs.shape[dim:])


def _vmul(tc: np.ndarray, dim: int, c) -> np.ndarray:
    """Multiply scalar-like jet coefficients ``tc`` by values ``c``.

    The value axes of ``tc`` act as leading batch axes of ``c`` when their
    shapes agree; otherwise plain numpy broadcasting applies.
    """
    c = np.asarray(c)
    bv = tc.shape[dim:]
    if c.ndim >= len(bv) and c.shape[: len(bv)] == bv:
        return tc.reshape(tc.shape + (1,) * (c.ndim - len(bv))) * c
    return tc * c


def _mask(coeffs: np.ndarray, dim: int, order: int) -> np.ndarray:
    if dim > 1:
        coeffs[_degree_grid(dim, order) > order] = 0.0
    return coeffs


class Jet:
    """Truncated Taylor coefficients of a function at a base point.

    Parameters
    ----------
    coeffs : array_like
        Array of shape ``(N+1,)*dim + value_shape`` with
        ``coeffs[alpha] = d^alpha f(point) / alpha!``.  Entries of total
        degree above ``N`` are discarded.
    point : array_like
        Base point, shape ``(dim,)`` (a scalar means ``dim = 1``).  Batched
        jets carry extra trailing axes here.

    Notes
    -----
    Jets are immutable; arithmetic returns new objects.
    """

    __slots__ = ("coeffs", "point")
    __array_priority__ = 1000

    def __init__(self, coeffs, point):
        point = np.array(point, dtype=float)
        if point.ndim == 0:
            point = point.reshape(1)
        dim = point.shape[0]
        coeffs = np.array(coeffs, dtype=float)
        if coeffs.ndim < dim or dim == 0:
            raise ContractViolation("coefficient array has fewer axes than variables")
        n1 = coeffs.shape[0]
        if any(s != n1 for s in coeffs.shape[:dim]):
            raise ContractViolation(f"grid axes must agree, got {coeffs.shape[:dim]}")
        _mask(coeffs, dim, n1 - 1)
        if not np.isfinite(coeffs).all():
            raise ContractViolation("jet has non-finite coefficients")
        coeffs.flags.writeable = False
        point.flags.writeable = False
        self.coeffs = coeffs
        self.point = point

    # -- construction -----------------------------------------------------

    @classmethod
    def constant(cls, value, point, order: int = DEFAULT_ORDER) -> "Jet":
        point = np.atleast_1d(np.asarray(point, dtype=float))
        value = np.asarray(value, dtype=float)
        dim = point.shape[0]
        c = np.zeros((order + 1,) * dim + value.shape)
        c[(0,) * dim] = value
        return cls(c, point)

    @classmethod
    def variable(cls, point, index: int = 0, order: int = DEFAULT_ORDER) -> "Jet":
        """Jet of the coordinate function ``x -> x[index]`` at ``point``."""
        point = np.atleast_1d(np.asarray(point, dtype=float))
        dim = point.shape[0]
        batch = point.shape[1:]
        c = np.zeros((order + 1,) * dim + batch)
        c[(0,) * dim] = point[index]
        if order >= 1:
            e = [0] * dim
            e[index] = 1
            c[tuple(e)] = 1.0
        return cls(c, point)

    @classmethod
    def from_raw(cls, derivatives, point) -> "Jet":
        """Build from raw derivatives ``d^alpha f`` (divides by ``alpha!``)."""
        point = np.atleast_1d(np.asarray(point, dtype=float))
        d = np.asarray(derivatives, dtype=float)
        dim = point.shape[0]
        fac = _pad_value(_factorial_grid(dim, d.shape[0] - 1), dim, d.ndim - dim)
        return cls(d / fac, point)

    # -- shape ------------------------------------------------------------

    @property
    def dim(self) -> int:
        return self.point.shape[0]

    @property
    def order(self) -> int:
        return self.coeffs.shape[0] - 1

    @property
    def shape(self) -> tuple[int, ...]:
        return self.coeffs.shape[self.dim:]

    @property
    def value(self):
        return self.coeffs[(0,) * self.dim]

    def __getitem__(self, alpha):
        if isinstance(alpha, (int, np.integer)):
            alpha = (alpha,)
        return self.coeffs[tuple(alpha)]

    def raw(self) -> np.ndarray:
        """Raw derivatives ``d^alpha f`` (coefficients times ``alpha!``)."""
        fac = _factorial_grid(self.dim, self.order)
        return self.coeffs * _pad_value(fac, self.dim, len(self.shape))

    def derivative(self, alpha) -> np.ndarray:
        if isinstance(alpha, (int, np.integer)):
            alpha = (alpha,)
        alpha = MultiIndex(alpha)
        return self.coeffs[tuple(alpha)] * alpha.factorial()

    def items(self) -> dict[MultiIndex, np.ndarray]:
        """Mapping multi-index -> coefficient, one entry per ``|alpha| <= N``."""
        return {a: self.coeffs[tuple(a)] for a in multi_indices(self.dim, self.order)}

    def __repr__(self) -> str:
        pt = self.point if self.point.size > 1 else float(self.point[0])
        if self.dim == 1 and self.shape == ():
            return f"Jet({pt}; {np.array2string(self.coeffs, precision=6)})"
        return f"Jet(point={pt}, order={self.order}, shape={self.shape})"

    # -- structural helpers ----------------------------------------------

    def truncate(self, order: int) -> "Jet":
        if order > self.order:
            raise ContractViolation(f"cannot raise order {self.order} to {order}")
        sl = (slice(0, order + 1),) * self.dim
        return Jet(self.coeffs[sl], self.point)

    def component(self, index) -> "Jet":
        """Jet of one component of a vector/matrix valued function."""
        if not isinstance(index, tuple):
            index = (index,)
        return Jet(self.coeffs[(slice(None),) * self.dim + index], self.point)

    def components(self) -> list["Jet"]:
        if len(self.shape) != 1:
            raise ContractViolation("components() needs a vector-valued jet")
        return [self.component(i) for i in range(self.shape[0])]

    @staticmethod
    def stack(jets: Sequence["Jet"], shape: tuple[int, ...] | None = None) -> "Jet":
        """Assemble scalar jets into a vector (or, with ``shape``, a matrix)."""
        first = jets[0]
        for j in jets[1:]:
            _check_compatible(first, j)
        c = np.stack([j.coeffs for j in jets], axis=-1)
        if shape is not None:
            c = c.reshape(c.shape[:-1] + tuple(shape))
        return Jet(c, first.point)

    def with_coeffs(self, coeffs) -> "Jet":
        return Jet(coeffs, self.point)

    def recenter(self, point) -> "Jet":
        """Re-expand the Taylor polynomial of this jet around ``point``.

        Exact for the polynomial; differs from the true jet of the
        underlying function by the truncated remainder.
        """
        point = np.atleast_1d(np.asarray(point, dtype=float))
        ts = []
        for i in range(self.dim):
            v = Jet.variable(point, i, self.order)
            shift = point[i] - self.point[i]
            c = np.array(v.coeffs)
            c[(0,) * self.dim] = shift
            ts.append(Jet(c, point))
        return _substitute(self.coeffs, self.dim, ts)

    # -- arithmetic -------------------------------------------------------

    def __neg__(self) -> "Jet":
        return Jet(-self.coeffs, self.point)

    def __pos__(self) -> "Jet":
        return self

    def __add__(self, other) -> "Jet":
        if isinstance(other, Jet):
            return jet_add(self, other)
        c = np.array(self.coeffs)
        c = _pad_value(c, self.dim, np.ndim(other)).copy()
        c[(0,) * self.dim] = c[(0,) * self.dim] + other
        return Jet(c, self.point)

    __radd__ = __add__

    def __sub__(self, other) -> "Jet":
        return self + (-other)

    def __rsub__(self, other) -> "Jet":
        return (-self) + other

    def __mul__(self, other) -> "Jet":
        if isinstance(other, Jet):
            return jet_mul(self, other)
        other = np.asarray(other, dtype=float)
        return Jet(_pad_value(self.coeffs, self.dim, other.ndim) * other, self.point)

    __rmul__ = __mul__

    def __truediv__(self, other) -> "Jet":
        if isinstance(other, Jet):
            return jet_mul(self, reciprocal(other))
        return self * (1.0 / np.asarray(other, dtype=float))

    def __rtruediv__(self, other) -> "Jet":
        return reciprocal(self) * other

    def __matmul__(self, other) -> "Jet":
        if isinstance(other, Jet):
            return jet_matmul(self, other)
        other = np.asarray(other, dtype=float)
        return Jet(np.matmul(self.coeffs, other), self.point)

    def __rmatmul__(self, other) -> "Jet":
        other = np.asarray(other, dtype=float)
        return Jet(np.matmul(other, self.coeffs), self.point)

    def __pow__(self, n: int) -> "Jet":
        if int(n) != n or n < 0:
            raise ContractViolation("only non-negative integer powers are supported")
        result = Jet.constant(np.ones(self.shape), self.point, self.order)
        base = self
        n = int(n)
        while n:
            if n & 1:
                result = result * base
            n >>= 1
            if n:
                base = base * base
        return result


def _check_compatible(a: Jet, b: Jet) -> None:
    if a.dim != b.dim or a.order != b.order:
        raise ContractViolation(
            f"jets differ in shape: dim {a.dim}/{b.dim}, order {a.order}/{b.order}"
        )
    if a.point is b.point or np.array_equal(a.point, b.point):
        return
    try:
        same = np.allclose(a.point, b.point, rtol=1e-12, atol=1e-12)
    except ValueError:
        same = False
    if not same:
        raise ContractViolation(f"jets have different base points {a.point} and {b.point}")


def jet_add(a: Jet, b: Jet) -> Jet:
    """Coefficient-wise sum of two jets at the same point and order."""
    _check_compatible(a, b)
    k = max(len(a.shape), len(b.shape))
    return Jet(_pad_value(a.coeffs, a.dim, k) + _pad_value(b.coeffs, b.dim, k), a.point)


def _nonzero_grid(c: np.ndarray, dim: int) -> np.ndarray:
    grid = c.shape[:dim]
    if c.ndim == dim:
        return c != 0
    return np.any(c.reshape(grid + (-1,)) != 0, axis=-1)


def _convolve(a: np.ndarray, b: np.ndarray, dim: int, order: int, op) -> np.ndarray:
    origin = (0,) * dim
    vshape = np.shape(op(a[origin], b[origin]))
    out = np.zeros((order + 1,) * dim + vshape)
    nz = _nonzero_grid(a, dim)
    for alpha in multi_indices(dim, order):
        if not nz[alpha]:
            continue
        aa = a[alpha]
        sl_out = tuple(slice(k, None) for k in alpha)
        sl_b = tuple(slice(0, order + 1 - k) for k in alpha)
        out[sl_out] += op(aa, b[sl_b])
    return _mask(out, dim, order)


def jet_mul(a: Jet, b: Jet) -> Jet:
    """Truncated Cauchy product (the Leibniz rule up to order ``N``)."""
    _check_compatible(a, b)
    k = max(len(a.shape), len(b.shape))
    ca = _pad_value(a.coeffs, a.dim, k)
    cb = _pad_value(b.coeffs, b.dim, k)
    return Jet(_convolve(ca, cb, a.dim, a.order, np.multiply), a.point)


def jet_matmul(a: Jet, b: Jet) -> Jet:
    """Product of matrix-valued jets (matrix Leibniz rule)."""
    _check_compatible(a, b)
    return Jet(_convolve(a.coeffs, b.coeffs, a.dim, a.order, np.matmul), a.point)


def _substitute(coeffs: np.ndarray, outer_dim: int, ts: Sequence[Jet]) -> Jet:
    """Evaluate the polynomial ``sum_alpha coeffs[alpha] * t^alpha`` in jet
    arithmetic; ``ts`` are scalar (possibly batched) jets."""
    t0 = ts[0]
    order = t0.order
    dim = t0.dim
    n_outer = coeffs.shape[0] - 1
    if outer_dim == 1:
        acc = _vmul(Jet.constant(np.ones(t0.shape), t0.point, order).coeffs, dim, coeffs[0])
        power = t0
        for k in range(1, n_outer + 1):
            if k > 1:
                power = power * t0
            acc = acc + _vmul(power.coeffs, dim, coeffs[k])
        return Jet(acc, t0.point)
    one = Jet.constant(np.ones(t0.shape), t0.point, order)
    powers = [[one] for _ in ts]
    for i, t in enumerate(ts):
        for _ in range(n_outer):
            powers[i].append(powers[i][-1] * t)
    cache: dict[tuple, Jet] = {(): one}

    def monomial(alpha: tuple) -> Jet:
        if alpha not in cache:
            head = monomial(alpha[:-1])
            k = alpha[-1]
            cache[alpha] = head * powers[len(alpha) - 1][k] if k else head
        return cache[alpha]

    acc = None
    nz = _nonzero_grid(coeffs, outer_dim)
    for alpha in multi_indices(outer_dim, n_outer):
        if not nz[alpha]:
            continue
        c = coeffs[alpha]
        term = _vmul(monomial(tuple(alpha)).coeffs, dim, c)
        acc = term if acc is None else acc + term
    if acc is None:
        acc = _vmul(one.coeffs, dim, coeffs[(0,) * outer_dim])
    return Jet(acc, t0.point)


def jet_compose(outer: Jet, inner, *, atol: float = 1e-9) -> Jet:
    """Truncated composition ``outer o inner``.

    Parameters
    ----------
    outer : Jet
        Jet of ``g`` at ``y0``, in ``e`` variables.
    inner : Jet or sequence of Jet
        Jet(s) of ``h = (h_1, ..., h_e)`` at ``x0`` with ``h(x0) = y0``.  A
        single vector-valued jet is split into its components.

    Returns
    -------
    Jet
        Jet of ``g o h`` at ``x0`` with the order of ``inner``; exact up to
        that order.
    """
    if isinstance(inner, Jet):
        inners = [inner] if inner.shape == () or outer.dim == 1 else inner.components()
    else:
        inners = list(inner)
    if len(inners) != outer.dim:
        raise ContractViolation(f"outer has {outer.dim} variables, got {len(inners)} inner jets")
    for t in inners[1:]:
        _check_compatible(inners[0], t)
    order = inners[0].order
    if outer.order < order:
        raise ContractViolation(f"outer order {outer.order} below inner order {order}")
    y0 = np.stack([np.asarray(t.value, dtype=float) for t in inners])
    ref = outer.point
    try:
        ok = np.allclose(ref, y0, rtol=atol, atol=atol)
    except ValueError:
        ok = False
    if not ok:
        raise ContractViolation(f"outer base point {ref} != inner value {y0}")
    ts = []
    for t in inners:
        c = np.array(t.coeffs)
        c[(0,) * t.dim] = 0.0
        ts.append(Jet(c, t.point))
    sl = (slice(0, order + 1),) * outer.dim
    return _substitute(outer.coeffs[sl], outer.dim, ts)


# -- elementary functions -------------------------------------------------


def elementary_jets(name: str, point, order: int = DEFAULT_ORDER, poly=None) -> Jet:
    """Exact Taylor coefficients of an elementary function at ``point``.

    Parameters
    ----------
    name : {'exp', 'sin', 'cos', 'polynomial', 'reciprocal', 'log', 'sqrt', 'atan'}
    point : float or ndarray
        Base point(s); arrays give a batched univariate jet.
    order : int
    poly : sequence of float, optional
        Ascending coefficients, required for ``'polynomial'``.
    """
    x = np.asarray(point, dtype=float)
    k = np.arange(order + 1, dtype=float).reshape((-1,) + (1,) * x.ndim)
    fact = np.array([math.factorial(i) for i in range(order + 1)], dtype=float)
    fact = fact.reshape(k.shape)
    if name == "exp":
        c = np.exp(x) / fact * np.ones_like(k)
    elif name == "sin":
        c = np.where(k % 2 == 0, (-1.0) ** (k // 2) * np.sin(x), (-1.0) ** (k // 2) * np.cos(x)) / fact
    elif name == "cos":
        c = np.where(k % 2 == 0, (-1.0) ** (k // 2) * np.cos(x), -((-1.0) ** (k // 2)) * np.sin(x)) / fact
    elif name == "reciprocal":
        if np.any(x == 0):
            raise DomainError("reciprocal at zero")
        c = (-1.0) ** k / x ** (k + 1)
    elif name == "log":
        if np.any(x <= 0):
            raise DomainError("log needs a positive point")
        kk = np.maximum(k, 1)
        c = np.where(k == 0, np.log(x), (-1.0) ** (k + 1) / (kk * x**kk))
    elif name == "sqrt":
        if np.any(x <= 0):
            raise DomainError("sqrt needs a positive point")
        c = binom(0.5, k) * x ** (0.5 - k)
    elif name == "polynomial":
        if poly is None:
            raise ContractViolation("polynomial needs coefficients")
        p = np.asarray(poly, dtype=float)
        c = np.zeros((order + 1,) + x.shape)
        for j, pj in enumerate(p):
            for i in range(min(j, order) + 1):
                c[i] = c[i] + pj * math.comb(j, i) * x ** (j - i)
    elif name == "atan":
        c = np.zeros((order + 1,) + x.shape)
        c[0] = np.arctan(x)
        if order >= 1:
            X = Jet.variable(x[None], 0, order - 1) if x.ndim else Jet.variable(x, 0, order - 1)
            q = reciprocal(1.0 + X * X)
            for i in range(1, order + 1):
                c[i] = q.coeffs[i - 1] / i
    else:
        raise ContractViolation(f"unknown elementary function {name!r}")
    c = np.broadcast_to(c, (order + 1,) + x.shape)
    return Jet(c, x[None] if x.ndim else x)


def _apply(name: str, u: Jet) -> Jet:
    outer = elementary_jets(name, u.value, u.order)
    ts = [u - u.value]
    return _substitute(outer.coeffs, 1, ts)


def exp(u: Jet) -> Jet:
    return _apply("exp", u)


def sin(u: Jet) -> Jet:
    return _apply("sin", u)


def cos(u: Jet) -> Jet:
    return _apply("cos", u)


def log(u: Jet) -> Jet:
    return _apply("log", u)


def sqrt(u: Jet) -> Jet:
    return _apply("sqrt", u)


def atan(u: Jet) -> Jet:
    return _apply("atan", u)


def reciprocal(u: Jet) -> Jet:
    return _apply("reciprocal", u)


def atan2(y: Jet, x: Jet) -> Jet:
    """Polar angle of ``(x, y)``; smooth away from the origin."""
    x0 = np.asarray(x.value)
    y0 = np.asarray(y.value)
    if np.any((x0 == 0) & (y0 == 0)):
        raise DomainError("atan2 at the origin")
    cross = y * x0 - x * y0
    dot = x * x0 + y * y0
    c = np.array(cross.coeffs)
    c[(0,) * cross.dim] = 0.0
    return atan(Jet(c, cross.point) / dot) + np.arctan2(y0, x0)


# -- the fixed cutoff -----------------------------------------------------


def smooth_step(u: Jet) -> Jet:
    """``s(u)``: 0 for ``u <= 0``, 1 for ``u >= 1``, ``p/(p+q)`` in between
    with ``p = exp(-1/u)``, ``q = exp(-1/(1-u))``."""
    u0 = np.asarray(u.value, dtype=float)
    low = u0 <= _FLAT
    high = u0 >= 1.0 - _FLAT
    mid = ~(low | high)
    origin = (0,) * u.dim
    if not mid.any():
        c = np.zeros(u.coeffs.shape)
        c[origin] = high.astype(float)
        return Jet(c, u.point)
    if u0.ndim == 0:
        t = u
    else:
        c = np.array(u.coeffs)
        c[..., ~mid] = 0.0
        c[origin][~mid] = 0.5
        t = Jet(c, u.point)
    p = exp(-reciprocal(t))
    q = exp(-reciprocal(1.0 - t))
    s = p * reciprocal(p + q)
    if u0.ndim == 0:
        return s
    c = np.array(s.coeffs)
    c[..., ~mid] = 0.0
    c[origin][high] = 1.0
    return Jet(c, u.point)


def cutoff(u: Jet) -> Jet:
    """``zeta o u`` where ``zeta`` is 1 on [-1/2, 1/2], 0 outside (-1, 1)."""
    sign = np.sign(np.asarray(u.value, dtype=float))
    return smooth_step(2.0 - 2.0 * (u * sign))


def cutoff_identity(u: Jet) -> Jet:
    """``xi o u`` with ``xi(x) = x * zeta(x)``."""
    return u * cutoff(u)


def bump_zeta_jet(x, order: int = DEFAULT_ORDER) -> Jet:
    """Order-``order`` jet of the cutoff ``zeta`` at ``x``.

    ``zeta`` has support in [-1, 1], equals 1 on [-1/2, 1/2] and takes values
    in [0, 1].  ``x`` may be an array (batched jet).
    """
    x = np.asarray(x, dtype=float)
    return cutoff(Jet.variable(x[None] if x.ndim else x, 0, order))


def xi_power_jet(k: int, x, order: int = DEFAULT_ORDER) -> Jet:
    """Jet of ``xi(x)^k`` where ``xi(x) = x * zeta(x)``."""
    if k < 0:
        raise ContractViolation("k must be non-negative")
    x = np.asarray(x, dtype=float)
    X = Jet.variable(x[None] if x.ndim else x, 0, order)
    return cutoff_identity(X) ** k


# -- domains and oracles --------------------------------------------------


@dataclass(frozen=True)
class Box:
    """Axis-aligned box ``prod [lo_i, hi_i]``; bounds may be infinite.

    With ``closed=False`` membership is strict (an open box).
    """

    lo: tuple
    hi: tuple
    closed: bool = True

    def __post_init__(self):
        object.__setattr__(self, "lo", tuple(float(v) for v in np.atleast_1d(self.lo)))
        object.__setattr__(self, "hi", tuple(float(v) for v in np.atleast_1d(self.hi)))
        if len(self.lo) != len(self.hi):
            raise ContractViolation("box bounds differ in length")

    @classmethod
    def unit(cls, dim: int = 1) -> "Box":
        return cls((0.0,) * dim, (1.0,) * dim)

    @classmethod
    def everywhere(cls, dim: int = 1) -> "Box":
        return cls((-np.inf,) * dim, (np.inf,) * dim, closed=False)

    @property
    def dim(self) -> int:
        return len(self.lo)

    def contains(self, x, tol: float = 1e-12, margin: float = 0.0) -> bool:
        x = np.atleast_1d(np.asarray(x, dtype=float))
        lo = np.asarray(self.lo) + margin
        hi = np.asarray(self.hi) - margin
        if self.closed:
            return bool(np.all(x >= lo - tol) and np.all(x <= hi + tol))
        return bool(np.all(x > lo) and np.all(x < hi))

    def interior_contains(self, x) -> bool:
        x = np.atleast_1d(np.asarray(x, dtype=float))
        return bool(np.all(x > np.asarray(self.lo)) and np.all(x < np.asarray(self.hi)))

    def sample(self, rng: np.random.Generator, n: int) -> np.ndarray:
        lo, hi = np.asarray(self.lo), np.asarray(self.hi)
        if not (np.isfinite(lo).all() and np.isfinite(hi).all()):
            raise DomainError("cannot sample an unbounded box")
        return lo + (hi - lo) * rng.random((n, self.dim))


@dataclass(frozen=True)
class Region:
    """A set given by a membership predicate plus a bounding box for sampling."""

    predicate: Callable[[np.ndarray], bool]
    bounds: Box
    name: str = ""

    @property
    def dim(self) -> int:
        return self.bounds.dim

    def contains(self, x, tol: float = 0.0, margin: float = 0.0) -> bool:
        return bool(self.predicate(np.atleast_1d(np.asarray(x, dtype=float))))

    def sample(self, rng: np.random.Generator, n: int, max_tries: int = 100) -> np.ndarray:
        out = []
        for _ in range(max_tries):
            pts = self.bounds.sample(rng, 4 * n)
            out.extend(p for p in pts if self.contains(p))
            if len(out) >= n:
                return np.array(out[:n])
        raise DomainError(f"could not sample {n} points from region {self.name!r}")


def as_point(x, dim: int) -> np.ndarray:
    x = np.atleast_1d(np.asarray(x, dtype=float))
    if x.shape[0] != dim:
        raise ContractViolation(f"expected a point in R^{dim}, got shape {x.shape}")
    return x


@dataclass
class JetOracle:
    """A smooth map presented as "give me the jet at any point".

    Parameters
    ----------
    jet_fn : callable
        ``jet_fn(x, order) -> Jet`` with ``x`` of shape ``(dim,)``.
    dim : int
        Number of input variables.
    order : int
        Default jet order returned by :meth:`jet`.
    domain : Box or Region, optional
        Where the map may be evaluated; ``None`` means everywhere.
    shape : tuple
        Value shape of the returned jets.
    program : callable, optional
        If the map is written in jet arithmetic, the function taking one jet
        per variable; enables cheap directional jets.
    """

    jet_fn: Callable[[np.ndarray, int], Jet]
    dim: int
    order: int = DEFAULT_ORDER
    domain: Box | Region | None = None
    shape: tuple = ()
    name: str = ""
    program: Callable | None = field(default=None, repr=False)

    @classmethod
    def from_program(cls, program: Callable, dim: int = 1, **kwargs) -> "JetOracle":
        """Wrap a function written in jet arithmetic (one jet per variable)."""

        def jet_fn(x, order):
            return program(*[Jet.variable(x, i, order) for i in range(dim)])

        return cls(jet_fn, dim, program=program, **kwargs)

    def _check(self, x) -> np.ndarray:
        x = as_point(x, self.dim)
        if self.domain is not None and not self.domain.contains(x):
            raise DomainError(f"{self.name or 'oracle'}: point {x} outside the domain")
        return x

    def jet(self, x, order: int | None = None) -> Jet:
        x = self._check(x)
        return self.jet_fn(x, self.order if order is None else order)

    def value(self, x):
        return self.jet(x, 0).value

    __call__ = value

    def directional_jet(self, x, v, order: int | None = None) -> Jet:
        """Univariate jet of ``t -> f(x + t v)`` at ``t = 0``."""
        x = self._check(x)
        v = as_point(v, self.dim)
        order = self.order if order is None else order
        line = [Jet(_line_coeffs(x[i], v[i], order), 0.0) for i in range(self.dim)]
        if self.program is not None:
            return self.program(*line)
        return jet_compose(self.jet_fn(x, order), line)


def _line_coeffs(x0: float, v: float, order: int) -> np.ndarray:
    c = np.zeros(order + 1)
    c[0] = x0
    if order >= 1:
        c[1] = v
    return c


def compose_oracles(outer: JetOracle, inner: JetOracle, name: str = "") -> JetOracle:
    """The oracle of ``outer o inner``; ``inner`` is vector valued (or scalar
    when ``outer.dim == 1``)."""

    def jet_fn(x, order):
        ij = inner.jet(x, order)
        y = np.atleast_1d(np.asarray(ij.value, dtype=float))
        oj = outer.jet(y, order)
        return jet_compose(oj, ij)

    return JetOracle(jet_fn, inner.dim, order=inner.order, domain=inner.domain,
                     shape=outer.shape, name=name or f"{outer.name}o{inner.name}")


# -- finite-difference oracle ---------------------------------------------


def central_difference(g: Callable[[float], np.ndarray], k: int, h: float):
    """Second-order central difference for the ``k``-th derivative of ``g`` at 0."""
    total = 0.0
    for j in range(k + 1):
        total = total + (-1) ** j * math.comb(k, j) * np.asarray(g((k / 2 - j) * h))
    return total / h**k


def richardson_derivative(g: Callable[[float], np.ndarray], k: int, h: float):
    """Central difference at steps ``h`` and ``h/2`` combined to fourth order."""
    return (4.0 * central_difference(g, k, h / 2) - central_difference(g, k, h)) / 3.0


def fd_crosscheck(oracle: JetOracle, point, direction, k: int, h: float = 1e-3):
    """Return ``(jet_prediction, finite_difference)`` for the ``k``-th
    directional derivative of ``oracle`` at ``point`` along ``direction``.

    Raises
    ------
    DomainError
        If the difference stencil leaves the oracle's domain.
    """
    x = as_point(point, oracle.dim)
    v = as_point(direction, oracle.dim)
    reach = max(k / 2, 0.5) * h
    if oracle.domain is not None:
        for s in (-reach, reach):
            if not oracle.domain.contains(x + s * v):
                raise DomainError(f"stencil of half-width {reach} leaves the domain at {x}")
    predicted = oracle.directional_jet(x, v, k).derivative(k)
    fd = richardson_derivative(lambda t: oracle.value(x + t * v), k, h)
    return predicted, fd
