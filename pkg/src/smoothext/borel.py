"""
smoothext.borel
---------------

Realize a prescribed finite jet at the origin as a smooth function on the
whole real line.

Given ``v_0, ..., v_N`` the realization is

    f(x) = sum_k (v_k / k!) * (xi(c_k x) / c_k)^k,      xi(x) = x * zeta(x),

where ``zeta`` is the cutoff of :func:`smoothext.taylor.bump_zeta_jet`.  Term
``k`` equals ``(v_k / k!) x^k`` for ``|x| <= 1 / (2 c_k)`` and is zero for
``|x| >= 1 / c_k``, so ``f^{(n)}(0) = v_n`` and ``f = v_0`` away from
``[-1/2, 1/2]``.

The scales ``c_k`` are powers of two chosen so that every derivative of
order ``n < k`` of term ``k`` is uniformly bounded by ``2^-k``; the
:class:`ScaleCertificate` records the choice together with the sup bounds
``M_{n,k}`` it relied on.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np

from .errors import ContractViolation
from .taylor import Jet, JetOracle, cutoff_identity, xi_power_jet

SUP_SAMPLES = 10_000
SAFETY = 1.1
NORM = "max-abs"


@lru_cache(maxsize=None)
def _sup_table(k: int, max_n: int) -> tuple[float, ...]:
    grid = np.linspace(-1.0, 1.0, SUP_SAMPLES)
    raw = xi_power_jet(k, grid, max_n).raw()
    return tuple(float(v) for v in np.abs(raw).max(axis=1) * SAFETY)


def estimate_sup_bounds(k: int, max_n: int) -> np.ndarray:
    """Upper bounds ``M[n] >= sup_x |(xi^k)^{(n)}(x)|`` for ``n = 0..max_n``.

    The supremum is sampled on 10^4 equispaced points of [-1, 1] (outside of
    which ``xi`` vanishes) and multiplied by a 10% safety factor.

    Examples
    --------
    >>> M = estimate_sup_bounds(1, 0)
    >>> bool(M[0] >= 0.5)
    True
    """
    if k < 1:
        raise ContractViolation("k must be >= 1")
    if max_n < 0:
        raise ContractViolation("max_n must be >= 0")
    return np.array(_sup_table(int(k), int(max_n)))


@dataclass(frozen=True)
class TargetJet:
    """Prescribed derivatives ``v_k = f^{(k)}(0)`` for ``k = 0..N``.

    ``values`` has shape ``(N+1,) + value_shape``.
    """

    values: np.ndarray

    def __post_init__(self):
        v = np.array(self.values, dtype=float)
        if v.ndim == 0 or v.shape[0] < 1:
            raise ContractViolation("a target needs at least v_0")
        if not np.isfinite(v).all():
            raise ContractViolation("target values must be finite")
        v.flags.writeable = False
        object.__setattr__(self, "values", v)

    @property
    def order(self) -> int:
        return self.values.shape[0] - 1

    @property
    def shape(self) -> tuple[int, ...]:
        return self.values.shape[1:]

    @classmethod
    def from_jet(cls, jet: Jet) -> "TargetJet":
        """Target matching the raw derivatives of a univariate jet."""
        if jet.dim != 1:
            raise ContractViolation("from_jet needs a univariate jet")
        return cls(jet.raw())

    def norms(self) -> np.ndarray:
        """``p(v_k)`` with ``p`` the max-abs norm."""
        v = np.abs(self.values)
        return v.reshape(v.shape[0], -1).max(axis=1) if v.ndim > 1 else v

    def coefficient_norms(self) -> np.ndarray:
        """``p(v_k / k!)``: norms of the coefficients multiplying term ``k``."""
        fac = np.array([math.factorial(k) for k in range(self.order + 1)], dtype=float)
        return self.norms() / fac


@dataclass(frozen=True)
class ScaleCertificate:
    """Scales ``c_1..c_N`` with the sup table and norms that justify them.

    Attributes
    ----------
    scales : tuple of float
        ``scales[k-1] = c_k``, powers of two, all >= 2.
    bounds : ndarray
        ``bounds[n, k] = M_{n,k}`` for ``n < k <= N`` (zero elsewhere).
    norms : tuple of float
        Norms of the term coefficients ``p(v_k / k!)``, ``k = 0..N``, that
        the scales were chosen for.
    """

    scales: tuple
    bounds: np.ndarray
    norms: tuple
    norm: str = NORM

    @property
    def order(self) -> int:
        return len(self.scales)

    def scale_array(self) -> np.ndarray:
        """``c_k`` for ``k = 0..N`` (``c_0 = 1`` by convention)."""
        return np.array((1.0,) + tuple(self.scales))

    def violations(self, norms=None) -> list[tuple[int, int, float]]:
        """Recompute every inequality; return ``(n, k, lhs)`` for each failure."""
        p = self.norms if norms is None else norms
        out = []
        for k in range(1, self.order + 1):
            c = self.scales[k - 1]
            if not c > 1:
                out.append((-1, k, c))
            for n in range(k):
                lhs = p[k] * c ** (n - k) * self.bounds[n, k]
                if not lhs < 2.0**-k:
                    out.append((n, k, lhs))
        return out


def _smallest_scale(p: float, M: np.ndarray, k: int) -> float:
    if p == 0.0:
        return 2.0
    j = 1
    for n in range(k):
        need = math.log2(p * M[n]) + k if p * M[n] > 0 else -math.inf
        j = max(j, math.floor(need / (k - n)))
    # floating point check of the strict inequality, stepping up as needed
    while any(not p * (2.0**j) ** (n - k) * M[n] < 2.0**-k for n in range(k)):
        j += 1
    while j > 1 and all(p * (2.0 ** (j - 1)) ** (n - k) * M[n] < 2.0**-k for n in range(k)):
        j -= 1
    return 2.0**j


def certificate_for_norms(norms) -> ScaleCertificate:
    """Scales for prescribed coefficient norms ``p_k``, ``k = 0..N``."""
    p = tuple(float(v) for v in norms)
    N = len(p) - 1
    bounds = np.zeros((N + 1, N + 1))
    scales = []
    for k in range(1, N + 1):
        M = estimate_sup_bounds(k, k - 1)
        bounds[:k, k] = M
        scales.append(_smallest_scale(p[k], M, k))
    bounds.flags.writeable = False
    return ScaleCertificate(tuple(scales), bounds, p)


SCALE_RULES = ("coefficient", "raw")


def choose_scales(target: TargetJet, rule: str = "coefficient") -> ScaleCertificate:
    """Smallest powers of two ``c_k >= 2`` meeting
    ``p_k c_k^{n-k} M_{n,k} < 2^-k`` for every ``n < k``.

    With ``rule="coefficient"`` (default) ``p_k = p(v_k / k!)`` is the norm
    of the coefficient that multiplies term ``k`` in the realization, so the
    inequality bounds each term's derivatives of order ``n < k`` by
    ``2^-k`` uniformly on R.  ``rule="raw"`` uses ``p_k = p(v_k)``, which is
    stricter by ``k!`` and gives larger scales (narrower plateaus).
    """
    if rule == "coefficient":
        return certificate_for_norms(target.coefficient_norms())
    if rule == "raw":
        return certificate_for_norms(target.norms())
    raise ContractViolation(f"unknown scale rule {rule!r}; expected one of {SCALE_RULES}")


def term_jets(scales, x, order: int) -> np.ndarray:
    """Taylor coefficients of ``(xi(c_k x) / c_k)^k`` for ``k = 0..K``.

    Parameters
    ----------
    scales : array_like
        ``c_1..c_K``.
    x : float or ndarray
        Evaluation point(s).
    order : int
        Jet order.

    Returns
    -------
    ndarray
        Shape ``(K+1, order+1) + x.shape``.
    """
    c = np.asarray(scales, dtype=float)
    x = np.asarray(x, dtype=float)
    K = c.shape[0]
    out = np.zeros((K + 1, order + 1) + x.shape)
    out[0, 0] = 1.0
    if K == 0:
        return out
    cb = c.reshape((K,) + (1,) * x.ndim)
    u = np.zeros((order + 1, K) + x.shape)
    u[0] = cb * x
    if order >= 1:
        u[1] = cb * np.ones_like(x)
    xi = cutoff_identity(Jet(u, np.broadcast_to(x, (1, K) + x.shape)))
    power = xi
    for k in range(1, K + 1):
        if k > 1:
            power = power * xi
        out[k] = power.coeffs[:, k - 1] * (cb[k - 1] ** -k)
    return out


@dataclass(frozen=True)
class BorelRealization:
    """A smooth function on R whose jet at 0 is ``target``.

    Calling the object evaluates the function; :meth:`jet` returns its
    jet at any point and ``oracle`` wraps it as a :class:`JetOracle`.
    """

    target: TargetJet
    certificate: ScaleCertificate
    terms: int | None = None
    oracle: JetOracle = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        if self.certificate.order < self.target.order:
            raise ContractViolation(
                f"certificate of order {self.certificate.order} for target of order {self.target.order}"
            )
        oracle = JetOracle(lambda x, order: self.jet(x[0], order), 1,
                           order=self.target.order, domain=None, shape=self.target.shape,
                           name="borel")
        object.__setattr__(self, "oracle", oracle)

    @property
    def order(self) -> int:
        return self.target.order

    @property
    def m(self) -> int:
        return self.order if self.terms is None else self.terms

    def weights(self) -> np.ndarray:
        """``v_k / k!`` for the included terms, shape ``(m+1,) + value_shape``."""
        m = self.m
        fac = np.array([math.factorial(k) for k in range(m + 1)], dtype=float)
        v = self.target.values[: m + 1]
        return v / fac.reshape((-1,) + (1,) * (v.ndim - 1))

    def jet_coeffs(self, x, order: int) -> np.ndarray:
        """Coefficients of the jet at ``x`` (array allowed), shape
        ``(order+1,) + x.shape + value_shape``."""
        x = np.asarray(x, dtype=float)
        T = term_jets(self.certificate.scales[: self.m], x, order)
        return np.tensordot(T, self.weights(), axes=(0, 0))

    def jet(self, x, order: int | None = None) -> Jet:
        order = self.order if order is None else order
        return Jet(self.jet_coeffs(float(x), order), float(x))

    def __call__(self, x):
        """Values at ``x`` (scalar or array)."""
        return self.jet_coeffs(x, 0)[0]

    def partial_sum(self, m: int) -> "BorelRealization":
        """The realization keeping only terms ``k <= m``."""
        if not 0 <= m <= self.order:
            raise ContractViolation(f"m must lie in [0, {self.order}]")
        return BorelRealization(self.target, self.certificate, terms=m)


def realize(target: TargetJet, certificate: ScaleCertificate | None = None) -> BorelRealization:
    """Smooth function on R with ``f^{(k)}(0) = v_k`` for ``k <= N``.

    Parameters
    ----------
    target : TargetJet
    certificate : ScaleCertificate, optional
        Fixed scales to use (the "fixed-certificate" mode that makes
        ``realize`` linear in the target).  Chosen by :func:`choose_scales`
        when omitted.

    Examples
    --------
    >>> f = realize(TargetJet([5.0, 0.0, 0.0]))
    >>> float(f(0.3)), float(f(-2.0))
    (5.0, 5.0)
    """
    if not isinstance(target, TargetJet):
        target = TargetJet(target)
    if certificate is None:
        certificate = choose_scales(target)
    return BorelRealization(target, certificate)


def tail_bound_report(realization: BorelRealization, l: int, m: int) -> float:
    """Certified bound ``sum_{k=m+1}^{N} 2^-k`` on ``|f_N^{(n)} - f_m^{(n)}|``
    for every ``n < l``."""
    N = realization.order
    if not (0 <= m <= N and 0 <= l <= m):
        raise ContractViolation(f"need 0 <= l <= m <= N, got l={l}, m={m}, N={N}")
    return float(sum(2.0**-k for k in range(m + 1, N + 1)))


def realize_everywhere(target: TargetJet) -> JetOracle:
    """Shortcut: the realization's oracle (domain all of R)."""
    return realize(target).oracle
