"""
smoothext.extend
----------------

Smooth extension of functions from ``[0, 1]`` to ``R`` and from ``[0, 1]^d``
to ``R^d``, plus the currying adapter between functions on a product and
families of functions.

On ``[0, 1]`` the extension keeps the source unchanged and glues the Borel
realizations of its boundary jets on either side.  On a box the same
operator is applied one axis at a time: for the axis being extended, the
jets of the previous stage along the face, viewed as functions of the other
coordinates, play the role of the target values.  Outside the box in
several axes at once the result therefore depends on the axis order.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .borel import (
    BorelRealization,
    ScaleCertificate,
    TargetJet,
    certificate_for_norms,
    realize,
    term_jets,
)
from .errors import ContractViolation, DomainError
from .taylor import MAX_ORDER, Box, Jet, JetOracle, _mask, as_point

LEFT, INSIDE, RIGHT = "left", "inside", "right"
STRADDLE_H = 1e-4
FD_STEPS = (1e-2, 1e-3, 1e-4)


def _check_order(N: int) -> int:
    if int(N) != N or not 0 <= N <= MAX_ORDER:
        raise ContractViolation(f"extension order must be an integer in [0, {MAX_ORDER}], got {N}")
    return int(N)


def _branch(t: float) -> str:
    if t < 0.0:
        return LEFT
    if t > 1.0:
        return RIGHT
    return INSIDE


@dataclass(frozen=True)
class ExtensionRecord:
    """What an extension was built from.

    Attributes
    ----------
    order : int
        Jet order ``N`` matched across the seams.
    axis_order : tuple of int
        Axes in the order they were extended.
    certificates : dict
        ``(axis, side) -> ScaleCertificate``, ``side`` in ``{'left', 'right'}``.
    seams : tuple
        ``(axis, face_coordinate)`` for every face glued.
    flags : tuple of str
        Notes such as ``'degenerate-order-0'``.
    """

    order: int
    axis_order: tuple
    certificates: dict
    seams: tuple
    flags: tuple = ()


# -- interval ---------------------------------------------------------------


@dataclass(frozen=True)
class IntervalExtension:
    """Extension of ``source`` from ``[0, 1]`` to ``R``.

    ``evaluator`` equals ``source`` on ``[0, 1]``, ``left`` on ``(-inf, 0)``
    and ``right`` shifted by 1 on ``(1, inf)``.
    """

    source: JetOracle
    order: int
    left: BorelRealization
    right: BorelRealization
    record: ExtensionRecord
    evaluator: JetOracle = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        ev = JetOracle(self._jet, 1, order=self.order, domain=None,
                       shape=self.source.shape, name=f"ext({self.source.name})")
        object.__setattr__(self, "evaluator", ev)

    def branch_jet(self, x: float, branch: str, order: int | None = None) -> Jet:
        """Jet at ``x`` of one piece, regardless of which piece owns ``x``."""
        order = self.order if order is None else order
        x = float(x)
        if branch == INSIDE:
            return self.source.jet(np.array([x]), order)
        if branch == LEFT:
            return self.left.jet(x, order)
        if branch == RIGHT:
            j = self.right.jet(x - 1.0, order)
            return Jet(j.coeffs, x)
        raise ContractViolation(f"unknown branch {branch!r}")

    def _jet(self, x, order):
        return self.branch_jet(x[0], _branch(x[0]), order)

    def __call__(self, x):
        return self.evaluator.value(x)

    def values(self, xs) -> np.ndarray:
        return np.array([self.evaluator.value(np.array([x])) for x in np.ravel(xs)])

    def with_truncated(self, side: str, m: int) -> "IntervalExtension":
        """Copy with one realization cut to terms ``k <= m`` (a negative
        control for the seam checks)."""
        left, right = self.left, self.right
        if side == LEFT:
            left = left.partial_sum(m)
        elif side == RIGHT:
            right = right.partial_sum(m)
        else:
            raise ContractViolation(f"side must be 'left' or 'right', got {side!r}")
        return IntervalExtension(self.source, self.order, left, right, self.record)


def boundary_targets(source: JetOracle, N: int) -> tuple[TargetJet, TargetJet]:
    """Raw derivatives of ``source`` at 0 and 1 (one-sided)."""
    try:
        j0 = source.jet(np.array([0.0]), N)
        j1 = source.jet(np.array([1.0]), N)
    except DomainError as exc:
        raise DomainError(f"source is not evaluable at an endpoint: {exc}") from exc
    return TargetJet(j0.raw()), TargetJet(j1.raw())


def shared_certificates(sources: Sequence[JetOracle], N: int, weights=None):
    """Fixed certificates valid for every ``sum_i w_i f_i`` with
    ``|w_i| <= |weights[i]|`` (norms add up by the triangle inequality)."""
    weights = np.ones(len(sources)) if weights is None else np.abs(np.asarray(weights, float))
    tot = [np.zeros(N + 1), np.zeros(N + 1)]
    for w, f in zip(weights, sources):
        for i, t in enumerate(boundary_targets(f, N)):
            tot[i] = tot[i] + w * t.coefficient_norms()
    return certificate_for_norms(tot[0]), certificate_for_norms(tot[1])


def extend_interval(f: JetOracle, N: int = 6,
                    certificates: tuple[ScaleCertificate, ScaleCertificate] | None = None
                    ) -> IntervalExtension:
    """Extend ``f`` from ``[0, 1]`` to a smooth function on ``R``.

    Parameters
    ----------
    f : JetOracle
        Source, evaluable (with one-sided jets) on the closed interval.
    N : int
        Order of the boundary jets reproduced on both sides.
    certificates : pair of ScaleCertificate, optional
        Fixed scales for the left and right realizations.

    Examples
    --------
    >>> from smoothext.taylor import JetOracle, Jet
    >>> const = JetOracle(lambda x, n: Jet.constant(5.0, x, n), 1)
    >>> e = extend_interval(const, 4)
    >>> float(e(-3.0)), float(e(0.5)), float(e(7.0))
    (5.0, 5.0, 5.0)
    """
    N = _check_order(N)
    if f.dim != 1:
        raise ContractViolation("extend_interval needs a univariate source")
    t0, t1 = boundary_targets(f, N)
    if certificates is None:
        left, right = realize(t0), realize(t1)
    else:
        left, right = realize(t0, certificates[0]), realize(t1, certificates[1])
    record = ExtensionRecord(
        order=N, axis_order=(0,),
        certificates={(0, LEFT): left.certificate, (0, RIGHT): right.certificate},
        seams=((0, 0.0), (0, 1.0)),
        flags=("degenerate-order-0",) if N == 0 else (),
    )
    return IntervalExtension(f, N, left, right, record)


# -- box --------------------------------------------------------------------


class _Stage:
    """One step of the per-axis iteration; stage 0 is the source itself."""

    def __init__(self, prev, axis: int | None, N: int, dim: int, source: JetOracle | None = None,
                 memoize: bool = False):
        self.prev = prev
        self.axis = axis
        self.N = N
        self.dim = dim
        self.source = source
        self.certificates: dict[str, ScaleCertificate] = {}
        self._memo: dict | None = {} if memoize else None

    def jet(self, x: np.ndarray, order: int, force: dict | None = None) -> Jet:
        if self.axis is None:
            return self.source.jet(x, order)
        a = self.axis
        branch = (force or {}).get(a) or _branch(x[a])
        if branch == INSIDE:
            return self.prev.jet(x, order, force)
        face = 0.0 if branch == LEFT else 1.0
        q = np.array(x, dtype=float)
        q[a] = face
        J = self._face_jet(q, self.N + order, force)
        return self._assemble(J, x, x[a] - face, order, self.certificates[branch])

    def _face_jet(self, q, order, force):
        if self._memo is None or force:
            return self.prev.jet(q, order, force)
        key = (tuple(q), order)
        if key not in self._memo:
            self._memo[key] = self.prev.jet(q, order)
        return self._memo[key]

    def _assemble(self, J: Jet, x, t: float, order: int, cert: ScaleCertificate) -> Jet:
        a, N, d = self.axis, self.N, self.dim
        others = (slice(0, order + 1),) * (d - 1)
        slabs = np.take(J.coeffs, np.arange(N + 1), axis=a)      # k moved to axis a
        slabs = np.moveaxis(slabs, a, 0)[(slice(None),) + others]
        T = term_jets(cert.scales[:N], t, order)                  # (N+1, order+1)
        out = np.moveaxis(np.tensordot(T, slabs, axes=(0, 0)), 0, a)
        return Jet(_mask(np.ascontiguousarray(out), d, order), x)

    def face_norms(self, side: str, samples: np.ndarray) -> np.ndarray:
        """Sampled ``max |d_a^k F / k!|`` over the face, ``k = 0..N``."""
        face = 0.0 if side == LEFT else 1.0
        a = self.axis
        p = np.zeros(self.N + 1)
        for y in samples:
            q = np.insert(y, a, face)
            J = self.prev.jet(q, self.N)
            sl = [0] * self.dim
            for k in range(self.N + 1):
                sl[a] = k
                p[k] = max(p[k], float(np.max(np.abs(J.coeffs[tuple(sl)]))))
        return p


def _face_samples(dim: int, extended: Sequence[int], axis: int, n_total: int = 64) -> np.ndarray:
    """Grid on the face ``x_axis = const``; axes already extended are sampled
    over [-1/2, 3/2], which contains every realization term's support."""
    rest = [i for i in range(dim) if i != axis]
    if not rest:
        return np.zeros((1, 0))
    n = max(3, int(round(n_total ** (1.0 / len(rest)))))
    axes = [np.linspace(-0.5, 1.5, 2 * n - 1) if i in extended else np.linspace(0.0, 1.0, n)
            for i in rest]
    mesh = np.meshgrid(*axes, indexing="ij")
    return np.stack([m.ravel() for m in mesh], axis=-1)


@dataclass
class BoxExtension:
    """Extension of ``source`` from ``[0, 1]^d`` to ``R^d``.

    ``evaluator`` is the final stage of the per-axis iteration;
    :meth:`branch_jet` evaluates with chosen pieces forced, which gives
    one-sided jets on the faces.
    """

    source: JetOracle
    order: int
    axis_order: tuple
    record: ExtensionRecord
    _top: _Stage = field(repr=False)
    interval: IntervalExtension | None = field(default=None, repr=False)
    evaluator: JetOracle = field(init=False, repr=False)

    def __post_init__(self):
        if self.interval is not None:
            self.evaluator = self.interval.evaluator
        else:
            self.evaluator = JetOracle(lambda x, n: self._top.jet(x, n), self.source.dim,
                                       order=self.order, shape=self.source.shape,
                                       name=f"ext({self.source.name})")

    @property
    def dim(self) -> int:
        return self.source.dim

    def branch_jet(self, x, force: dict, order: int | None = None) -> Jet:
        """Jet at ``x`` with ``force = {axis: 'left'|'inside'|'right'}``."""
        order = self.order if order is None else order
        x = as_point(x, self.dim)
        if self.interval is not None:
            return self.interval.branch_jet(x[0], force.get(0) or _branch(x[0]), order)
        return self._top.jet(x, order, force)

    def __call__(self, x):
        return self.evaluator.value(x)


def extend_box(f: JetOracle, N: int = 6, axis_order: Sequence[int] | None = None,
               memoize: bool = False, face_samples: int = 64) -> BoxExtension:
    """Extend ``f`` from ``[0, 1]^d`` to a smooth function on ``R^d``.

    Parameters
    ----------
    f : JetOracle
        Source, evaluable on the closed unit box.
    N : int
        Jet order matched across every face.
    axis_order : sequence of int, optional
        Order in which axes are extended (default ascending).
    memoize : bool
        Cache face jets of each stage by exact point (off by default).
    face_samples : int
        Approximate number of face points used to size the scales.

    Notes
    -----
    For ``d = 1`` this returns the interval extension unchanged.
    """
    N = _check_order(N)
    d = f.dim
    if d < 1:
        raise ContractViolation("need at least one variable")
    order = tuple(range(d)) if axis_order is None else tuple(int(a) for a in axis_order)
    if sorted(order) != list(range(d)):
        raise ContractViolation(f"axis_order must be a permutation of 0..{d - 1}, got {order}")
    if d == 1:
        iv = extend_interval(f, N)
        return BoxExtension(f, N, order, iv.record, None, interval=iv)
    stage = _Stage(None, None, N, d, source=f)
    certs = {}
    seams = []
    done: list[int] = []
    for a in order:
        stage = _Stage(stage, a, N, d, memoize=memoize)
        samples = _face_samples(d, done, a, face_samples)
        for side in (LEFT, RIGHT):
            try:
                p = stage.face_norms(side, samples)
            except DomainError as exc:
                raise DomainError(f"source is not evaluable on the face of axis {a}: {exc}") from exc
            cert = certificate_for_norms(p)
            stage.certificates[side] = cert
            certs[(a, side)] = cert
        seams += [(a, 0.0), (a, 1.0)]
        done.append(a)
    record = ExtensionRecord(N, order, certs, tuple(seams),
                             ("degenerate-order-0",) if N == 0 else ())
    return BoxExtension(f, N, order, record, stage)


# -- seam diagnostics ---------------------------------------------------------


def _raw_mismatch(a: Jet, b: Jet, k: int) -> float:
    """Max ``|d^alpha a - d^alpha b|`` over ``|alpha| <= k``."""
    ra = a.truncate(k).raw() if a.order > k else a.raw()
    rb = b.truncate(k).raw() if b.order > k else b.raw()
    return float(np.max(np.abs(ra - rb)))


def seam_smoothness_report(ext, k: int, samples: int = 9) -> dict:
    """Max mismatch of the inside and outside one-sided order-``k`` jets on
    each seam.

    Returns
    -------
    dict
        ``(axis, face) -> mismatch`` (raw derivatives, max over the sampled
        seam points and all ``|alpha| <= k``).
    """
    N = ext.order
    if k > N:
        raise ContractViolation(f"k={k} exceeds the extension order {N}")
    report = {}
    if isinstance(ext, IntervalExtension) or (isinstance(ext, BoxExtension) and ext.interval):
        iv = ext if isinstance(ext, IntervalExtension) else ext.interval
        for face, side in ((0.0, LEFT), (1.0, RIGHT)):
            inside = iv.branch_jet(face, INSIDE, k)
            outside = iv.branch_jet(face, side, k)
            report[(0, face)] = _raw_mismatch(inside, outside, k)
        return report
    d = ext.dim
    grid = np.linspace(0.0, 1.0, samples)
    for a in range(d):
        rest = [i for i in range(d) if i != a]
        mesh = np.meshgrid(*([grid] * len(rest)), indexing="ij")
        pts = np.stack([m.ravel() for m in mesh], axis=-1)
        for face, side in ((0.0, LEFT), (1.0, RIGHT)):
            worst = 0.0
            for y in pts:
                q = np.insert(y, a, face)
                inside = ext.branch_jet(q, {a: INSIDE}, k)
                outside = ext.branch_jet(q, {a: side}, k)
                worst = max(worst, _raw_mismatch(inside, outside, k))
            report[(a, face)] = worst
    return report


def straddle_report(ext: BoxExtension, h: float = STRADDLE_H, samples: int = 5, extra: int = 4) -> dict:
    """Continuity of all partials ``|alpha| <= N`` across faces and corners.

    For every seam point ``q`` (faces sampled on a grid, plus all corners)
    the extension is evaluated at points on both sides at distance ``h``.
    Each jet is taken at order ``N + extra`` and re-expanded at ``q``; the
    reported value is the largest raw-derivative difference between an
    outside point and the inside point of the same group.

    Returns
    -------
    dict
        ``'faces'`` and ``'corners'`` -> max mismatch, ``'worst'`` -> location.
    """
    N = ext.order
    d = ext.dim
    P = N + extra
    worst = {"faces": 0.0, "corners": 0.0, "worst": None}

    def shifted(p, q):
        return ext.evaluator.jet(p, P).recenter(q).truncate(N)

    grid = np.linspace(0.0, 1.0, samples)[1:-1]
    for a in range(d):
        rest = [i for i in range(d) if i != a]
        mesh = np.meshgrid(*([grid] * len(rest)), indexing="ij")
        pts = np.stack([m.ravel() for m in mesh], axis=-1) if rest else np.zeros((1, 0))
        for face, sign in ((0.0, -1.0), (1.0, 1.0)):
            for y in pts:
                q = np.insert(y, a, face)
                e = np.zeros(d)
                e[a] = h
                m = _raw_mismatch(shifted(q - sign * e, q), shifted(q + sign * e, q), N)
                if m > worst["faces"]:
                    worst["faces"] = m
                    worst["faces_at"] = tuple(q)
    for corner in np.array(list(np.ndindex(*(2,) * d)), dtype=float):
        inward = np.where(corner == 0.0, 1.0, -1.0)
        ref = shifted(corner + h * inward, corner)
        for signs in np.ndindex(*(2,) * d):
            s = np.where(np.array(signs) == 0, 1.0, -1.0) * inward
            if np.all(s == inward):
                continue
            m = _raw_mismatch(shifted(corner + h * s, corner), ref, N)
            if m > worst["corners"]:
                worst["corners"] = m
                worst["corners_at"] = tuple(corner)
    worst["worst"] = max(worst["faces"], worst["corners"])
    return worst


def roundoff_floor(values, k: int, h: float) -> float:
    """Worst-case rounding in a ``k``-th central difference at step ``h``
    (2 ulps of the largest stencil value per unit weight)."""
    scale = float(np.max(np.abs(values))) if np.size(values) else 0.0
    return FLOOR_ULPS * np.finfo(float).eps * max(scale, 1.0) * 2.0**k / h**k


RATE_SLACK = 0.05
FLOOR_ULPS = 2.0
KEEP_FLOORS = 2.0
ADAPTIVE_STEPS = 6


def plateau_steps(ext, k: int, seam: float) -> tuple:
    """Steps ``h0 2^-j`` with ``h0`` the plateau half-width ``1 / (2 c)`` of the
    Borel terms ``k+1`` and ``k+2`` on the extended side of ``seam`` (capped
    at ``1e-2``).  Inside that plateau the leading error term of a central
    ``k``-th difference is the one of the true jet."""
    iv = ext.interval if isinstance(ext, BoxExtension) else ext
    side = iv.left if seam == 0.0 else iv.right
    c = side.certificate.scale_array()
    rel = [c[j] for j in (k + 1, k + 2) if j < len(c)]
    h0 = float(min(1e-2, 1.0 / (2.0 * max(rel)))) if rel else 1e-2
    return tuple(h0 * 2.0**-j for j in range(ADAPTIVE_STEPS))


@dataclass(frozen=True)
class FDConvergence:
    """Central differences across a seam at decreasing steps.

    ``rates[i]`` is the observed order between ``steps[i]`` and
    ``steps[i+1]`` (``None`` where the finer error is within
    ``KEEP_FLOORS`` rounding floors).  ``slope`` is the least-squares order
    over the steps whose error exceeds ``KEEP_FLOORS`` floors; it is ``inf``
    when fewer than two remain (``measurable`` is then False and every
    error is at rounding level).
    """

    seam: float
    k: int
    steps: tuple
    errors: tuple
    floors: tuple
    rates: tuple
    slope: float
    predicted: float

    @property
    def measurable(self) -> bool:
        return math.isfinite(self.slope)

    def passes(self, rate: float = 2.0, slack: float = RATE_SLACK) -> bool:
        return self.slope >= rate - slack

    def shortfall(self, rate: float = 2.0) -> float:
        """``max(0, rate - slope)``."""
        return max(0.0, rate - self.slope)


def seam_fd_convergence(ext, k: int, seam: float = 0.0, steps=None,
                        direction=None, point=None, lift: int = 0) -> FDConvergence:
    """Central ``k``-th differences of the evaluator across a seam compared to
    the jet-predicted derivative there.

    For box extensions pass the seam ``point`` and the crossing ``direction``.
    ``steps`` defaults to :func:`plateau_steps` for interval seams and to
    ``FD_STEPS`` otherwise.  With ``lift = l > 0`` the stencil differences
    the ``l``-th directional derivative (taken from one-sided jets) instead
    of values, which lowers the rounding floor from ``eps / h^k`` to
    ``eps / h^(k-l)``.
    """
    if not 0 <= lift < k:
        raise ContractViolation(f"lift must lie in [0, k), got {lift}")
    ev = ext.evaluator
    if steps is None:
        interval = isinstance(ext, IntervalExtension) or getattr(ext, "interval", None) is not None
        steps = plateau_steps(ext, k, seam) if interval and point is None else FD_STEPS
    if point is None:
        point = np.array([seam])
        direction = np.array([1.0])
    point = np.asarray(point, float)
    direction = np.asarray(direction, float)
    predicted = float(np.ravel(ev.directional_jet(point, direction, k).derivative(k))[0])
    errors, floors = [], []
    for h in steps:
        q = k - lift
        pts = [point + (q / 2 - j) * h * direction for j in range(q + 1)]
        if lift:
            vals = [float(np.ravel(ev.directional_jet(x, direction, lift).derivative(lift))[0]) for x in pts]
        else:
            vals = [float(np.ravel(ev.value(x))[0]) for x in pts]
        fd = sum((-1) ** j * math.comb(q, j) * v for j, v in enumerate(vals)) / h**q
        errors.append(abs(fd - predicted))
        floors.append(roundoff_floor(vals, q, h))
    rates = []
    for i in range(len(steps) - 1):
        e0, e1 = errors[i], errors[i + 1]
        if e1 <= KEEP_FLOORS * floors[i + 1]:
            rates.append(None)
        elif e0 == 0.0:
            rates.append(-math.inf)
        else:
            rates.append(math.log(e0 / e1) / math.log(steps[i] / steps[i + 1]))
    keep = [i for i in range(len(steps)) if errors[i] > KEEP_FLOORS * floors[i]]
    if len(keep) >= 2:
        lh = np.log([steps[i] for i in keep])
        le = np.log([errors[i] for i in keep])
        slope = float(np.polyfit(lh, le, 1)[0])
    else:
        slope = math.inf
    return FDConvergence(seam, k, tuple(steps), tuple(errors), tuple(floors), tuple(rates),
                         slope, predicted)


# -- currying -----------------------------------------------------------------


@dataclass(frozen=True)
class CurriedView:
    """``f^(x)(y) = f(x, y)`` for a source on a product, split after the
    first ``split`` variables."""

    source: JetOracle
    split: int

    def __post_init__(self):
        if not 1 <= self.split < self.source.dim:
            raise ContractViolation(f"split must lie in [1, {self.source.dim - 1}], got {self.split}")

    @property
    def remaining(self) -> int:
        return self.source.dim - self.split

    def _domain(self):
        dom = self.source.domain
        if isinstance(dom, Box):
            return Box(dom.lo[self.split:], dom.hi[self.split:], dom.closed)
        return None

    def at(self, x) -> JetOracle:
        """The oracle of ``y -> f(x, y)``."""
        x = as_point(x, self.split)
        src, s = self.source, self.split

        def jet_fn(y, order):
            J = src.jet(np.concatenate([x, y]), order)
            return Jet(J.coeffs[(0,) * s], y)

        return JetOracle(jet_fn, self.remaining, order=src.order, domain=self._domain(),
                         shape=src.shape, name=f"{src.name}^({x.tolist()})")

    def __call__(self, x) -> JetOracle:
        return self.at(x)


def curry(f: JetOracle, split: int = 1) -> CurriedView:
    """View ``f`` on ``X x Y`` as the map ``x -> f(x, .)``."""
    return CurriedView(f, split)


def uncurry(view: CurriedView) -> JetOracle:
    """Back to a function on the product.  Values come from the family of
    oracles; full jets (which mix both factors) from the underlying source."""
    s = view.split

    def jet_fn(z, order):
        if order == 0:
            return Jet(view.at(z[:s]).jet(z[s:], 0).coeffs.reshape((1,) * len(z) + view.source.shape), z)
        return view.source.jet(z, order)

    return JetOracle(jet_fn, view.source.dim, order=view.source.order, domain=view.source.domain,
                     shape=view.source.shape, name=f"uncurry({view.source.name})")
