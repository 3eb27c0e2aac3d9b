"""
smoothext.cli
-------------

Batch driver: runs one construction plus its checks on a named case and
writes a CSV error table with header ``case,check,location,value,bound,status``.

Exit status is 0 when every row passes, 1 when some row fails and 2 on
usage or input errors.

Usage::

    python3 -m smoothext borel --case sin@0 --order 8
    python3 -m smoothext extend --case exp_xy --order 4 --out table.csv
    python3 -m smoothext manifold --atlas unit_square --case x2+y2
    python3 -m smoothext mapspace --case so3-loop

A ``--config FILE`` of ``key=value`` lines may supply the same settings;
explicit flags win over file values.
"""

from __future__ import annotations

import argparse
import csv
import io
import math
import sys
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from . import borel, extend, manifold, mapspace
from . import taylor as T
from .errors import ConstructionError, ContractViolation, DomainError
from .taylor import Box, JetOracle

HEADER = ("case", "check", "location", "value", "bound", "status")
COMMANDS = ("borel", "extend", "manifold", "mapspace")
DEFAULT_SEED = 42


class UsageError(Exception):
    """Bad configuration (exit status 2)."""


# -- configuration -----------------------------------------------------------------


@dataclass(frozen=True)
class ExperimentConfig:
    command: str
    case: str | None = None
    order: int | None = None
    dim: int | None = None
    grid: int | None = None
    tol: float | None = None
    seed: int = DEFAULT_SEED
    out: str | None = None
    atlas: str | None = None
    params: dict = field(default_factory=dict)

    def validate(self) -> "ExperimentConfig":
        if self.command not in COMMANDS:
            raise UsageError(f"unknown command {self.command!r}")
        if self.order is not None and not 1 <= self.order <= T.MAX_ORDER:
            raise UsageError(f"--order must lie in [1, {T.MAX_ORDER}], got {self.order}")
        if self.dim is not None and not 1 <= self.dim <= 4:
            raise UsageError(f"--dim must lie in [1, 4], got {self.dim}")
        if self.grid is not None and self.grid < 2:
            raise UsageError(f"--grid must be at least 2, got {self.grid}")
        if self.tol is not None and not self.tol > 0:
            raise UsageError(f"--tol must be positive, got {self.tol}")
        if self.atlas is not None and self.command != "manifold":
            raise UsageError("--atlas only applies to the manifold command")
        return self


_FIELDS = {"case": str, "order": int, "dim": int, "grid": int, "tol": float, "seed": int,
           "out": str, "atlas": str}


def parse_config_text(text: str) -> dict:
    """``key=value`` lines; ``#`` starts a comment."""
    out = {}
    for n, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        key, sep, val = line.partition("=")
        key, val = key.strip(), val.strip()
        if not sep or not key:
            raise UsageError(f"config line {n}: expected key=value, got {raw!r}")
        if key in _FIELDS:
            try:
                out[key] = _FIELDS[key](val)
            except ValueError:
                raise UsageError(f"config line {n}: bad value for {key}: {val!r}") from None
        else:
            out.setdefault("params", {})[key] = val
    return out


# -- error tables -------------------------------------------------------------------


@dataclass(frozen=True)
class Row:
    case: str
    check: str
    location: str
    value: float
    bound: float

    @property
    def passed(self) -> bool:
        return bool(self.value <= self.bound)


class ErrorTable:
    """Rows of (case, check, location, value, bound, status), sorted on output."""

    def __init__(self):
        self.rows: list[Row] = []

    def add(self, case: str, check: str, location: str, value: float, bound: float) -> None:
        self.rows.append(Row(case, check, location, float(value), float(bound)))

    @property
    def passed(self) -> bool:
        return all(r.passed for r in self.rows)

    def sorted_rows(self) -> list[Row]:
        return sorted(self.rows, key=lambda r: (r.case, r.check, r.location))

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(HEADER)
        for r in self.sorted_rows():
            w.writerow([r.case, r.check, r.location, _fmt(r.value), _fmt(r.bound),
                        "PASS" if r.passed else "FAIL"])
        return buf.getvalue()


def _fmt(v: float) -> str:
    return f"{v:.6e}" if math.isfinite(v) else str(v)


def _loc(p) -> str:
    return "(" + ";".join(f"{float(c):.4f}" for c in np.atleast_1d(p)) + ")"


# -- borel --------------------------------------------------------------------------


def _borel_target(case: str, N: int, rng) -> np.ndarray:
    if case == "zeros":
        return np.zeros(N + 1)
    if case == "random":
        return rng.uniform(-10.0, 10.0, N + 1)
    name, _, at = case.partition("@")
    fns = {"sin": T.sin, "cos": T.cos, "exp": T.exp, "atan": T.atan}
    if name not in fns:
        raise UsageError(f"unknown borel case {case!r}; try sin@0, exp@0.5, zeros, random")
    try:
        x0 = float(at or 0.0)
    except ValueError:
        raise UsageError(f"bad expansion point in {case!r}") from None
    return fns[name](T.Jet.variable(x0, 0, N)).raw()


def run_borel(cfg: ExperimentConfig) -> ErrorTable:
    """Realize a target jet; rows for jet reproduction, certificate and tail bounds."""
    case = cfg.case or "sin@0"
    N = cfg.order or 8
    tol = cfg.tol or 1e-8
    rng = np.random.default_rng(cfg.seed)
    v = _borel_target(case, N, rng)
    f = borel.realize(borel.TargetJet(v))
    raw = f.jet(0.0, N).raw()
    table = ErrorTable()
    for k in range(N + 1):
        table.add(case, "jet_residual", f"k={k:02d}", abs(raw[k] - v[k]), tol)
    table.add(case, "certificate_violations", "all", len(f.certificate.violations()), 0)
    xs = np.linspace(-1.0, 1.0, cfg.grid or 401)
    for m in range(N):
        fm = f.partial_sum(m)
        for l in range(m + 1):
            diff = np.abs(f.jet_coeffs(xs, l)[:l] - fm.jet_coeffs(xs, l)[:l])
            fac = np.array([math.factorial(n) for n in range(l)]).reshape((-1, 1))
            measured = float((diff * fac).max()) if l else 0.0
            table.add(case, "tail_bound", f"l={l:02d};m={m:02d}", measured,
                      borel.tail_bound_report(f, l, m))
    return table


# -- extend -------------------------------------------------------------------------

_INTERVAL_SOURCES: dict[str, Callable] = {
    "sin": lambda x: T.sin(x),
    "exp": lambda x: T.exp(x),
    "runge": lambda x: T.reciprocal(1.0 + 25.0 * x * x),
    "poly5": lambda x: 1.0 + x * (2.0 - x * (3.0 + x * (0.5 - x * (1.5 + 0.7 * x)))),
    "const": lambda x: x * 0.0 + 3.0,
}
_BOX_SOURCES: dict[str, Callable] = {
    "exp_xy": lambda x, y: T.exp(x + y),
    "poly_xy": lambda x, y: x * x * y + 0.5 * y - x * y * y * y,
    "const_xy": lambda x, y: x * 0.0 + 3.0,
}


def run_extend(cfg: ExperimentConfig) -> ErrorTable:
    """Extend a named source from ``[0, 1]`` or ``[0, 1]^2``; rows for the
    restriction identity, seam jets, face/corner straddles and (interval)
    finite-difference convergence across the seams."""
    case = cfg.case or "sin"
    N = cfg.order or 6
    rng = np.random.default_rng(cfg.seed)
    table = ErrorTable()
    if case in _INTERVAL_SOURCES:
        if cfg.dim not in (None, 1):
            raise UsageError(f"case {case!r} is one-dimensional")
        f = JetOracle.from_program(_INTERVAL_SOURCES[case], 1, domain=Box.unit(1), name=case)
        ext = extend.extend_interval(f, N)
        xs = np.concatenate([[0.0, 1.0], rng.random((cfg.grid or 1000) - 2)])
        res = max(abs(float(ext(np.array([x]))) - float(f(np.array([x])))) for x in xs)
        table.add(case, "restriction", "L", res, 0.0)
        for (_, face), mis in extend.seam_smoothness_report(ext, N).items():
            table.add(case, "seam_jet", _loc(face), mis, cfg.tol or 1e-8)
        for face in (0.0, 1.0):
            for k, lift, label in ((1, 0, "k1"), (2, 0, "k2"), (2, 1, "k2_lifted")):
                c = extend.seam_fd_convergence(ext, k, face, lift=lift)
                table.add(case, f"fd_rate_shortfall_{label}", _loc(face), c.shortfall(), extend.RATE_SLACK)
        return table
    if case in _BOX_SOURCES:
        if cfg.dim not in (None, 2):
            raise UsageError(f"case {case!r} is two-dimensional")
        f = JetOracle.from_program(_BOX_SOURCES[case], 2, domain=Box.unit(2), name=case)
        ext = extend.extend_box(f, N)
        pts = rng.random(((cfg.grid or 200), 2))
        res = max(abs(float(ext(p)) - float(f(p))) for p in pts)
        table.add(case, "restriction", "L", res, 0.0)
        for (axis, face), mis in extend.seam_smoothness_report(ext, N, samples=5).items():
            table.add(case, "seam_jet", f"axis{axis}={face:.0f}", mis, 1e-8)
        st = extend.straddle_report(ext)
        table.add(case, "straddle", "faces", st["faces"], cfg.tol or 1e-6)
        table.add(case, "straddle", "corners", st["corners"], cfg.tol or 1e-6)
        return table
    raise UsageError(f"unknown extend case {case!r}; choose from "
                     f"{sorted(_INTERVAL_SOURCES) + sorted(_BOX_SOURCES)}")


# -- manifold -----------------------------------------------------------------------

_SQUARE_SOURCES: dict[str, Callable] = {
    "x2+y2": lambda x, y: x * x + y * y,
    "xy": lambda x, y: x * y,
    "sin": lambda x, y: T.sin(x + 2.0 * y),
}
_SEAM_PROBES = (((0.5, 0.0), (0.0, -1.0)), ((1.0, 0.3), (1.0, 0.0)), ((0.7, 1.0), (0.0, 1.0)),
                ((0.0, 0.6), (-1.0, 0.0)), ((0.0, 0.0), (-1.0, -1.0)), ((1.0, 1.0), (1.0, 1.0)))


def run_manifold(cfg: ExperimentConfig) -> ErrorTable:
    """Interior invariance on an atlas; for the unit-square atlas also the
    manifold extension of a polynomial with restriction, partition and
    seam finite-difference rows."""
    if cfg.atlas is None:
        raise UsageError("manifold needs --atlas (a JSON file or a bundled atlas name)")
    M = manifold.load_atlas(cfg.atlas)
    spec_name = M.name or cfg.atlas
    table = ErrorTable()
    inv = manifold.check_interior_invariance(M, samples=cfg.grid or 200, seed=cfg.seed)
    table.add(spec_name, "interior_classification_violations", "overlaps", len(inv.violations), 0)
    table.add(spec_name, "inverse_min_abs_det", "overlaps",
              1.0 / inv.min_abs_det if inv.min_abs_det > 0 else math.inf, 1e12)
    if M.name != "unit-square-in-plane":
        return table
    case = cfg.case or "x2+y2"
    if case not in _SQUARE_SOURCES:
        raise UsageError(f"unknown manifold case {case!r}; choose from {sorted(_SQUARE_SOURCES)}")
    L = manifold.unit_square_domain()
    prog = _SQUARE_SOURCES[case]
    f = JetOracle.from_program(prog, 2, domain=L, name=case)
    ext = manifold.extend_on_manifold(L, f, manifold.square_patches(), N=cfg.order or 4, seed=cfg.seed)
    rng = np.random.default_rng(cfg.seed)
    pts = L.sample(rng, 1000)
    table.add(case, "restriction", "L", max(abs(float(ext(p)) - float(f(p))) for p in pts),
              cfg.tol or 1e-12)
    near = pts * 1.1 - 0.05
    dev = max(abs(ext.partition(p).sum() - 1.0) for p in near if ext.in_U(p))
    table.add(case, "partition_sum", "U", dev, 1e-10)
    for p, v in _SEAM_PROBES:
        p, v = np.array(p), np.array(v) / np.linalg.norm(v)
        for k in (1, 2):
            pred, fd = T.fd_crosscheck(ext.evaluator, p, v, k, h=1e-4)
            table.add(case, f"seam_fd_k{k}", _loc(p), abs(float(np.ravel(pred)[0] - np.ravel(fd)[0])), 1e-5)
    return table


# -- mapspace -----------------------------------------------------------------------


def run_mapspace(cfg: ExperimentConfig) -> ErrorTable:
    """Group laws and chart round trip for a loop group, local-group axioms,
    the derivative-of-push-forward identity and holomorphy checks."""
    case = cfg.case or "so3-loop"
    table = ErrorTable()
    rng = np.random.default_rng(cfg.seed)
    grid = mapspace.uniform_grid(cfg.grid or 64)
    N = cfg.order or 4
    if case.endswith("-loop"):
        key = case[: -len("-loop")].upper()
        names = {"SO3": "SO3", "SO2": "SO2", "SL2": "SL2", "TORUS": "torus"}
        if key not in names:
            raise UsageError(f"unknown mapspace case {case!r}")
        K = mapspace.GROUPS[names[key]]()
        a, b, c = (mapspace.GroupMapElement.random(K, grid, rng, order=N, radius=0.8) for _ in range(3))
        e = mapspace.GroupMapElement.identity(K, grid, N)
        mul, inv = mapspace.pointwise_mul, mapspace.pointwise_inv
        d = mapspace.grid_max_diff
        table.add(case, "associativity", "grid", d(mul(mul(a, b), c), mul(a, mul(b, c))), 1e-10)
        table.add(case, "identity", "grid", max(d(mul(a, e), a), d(mul(e, a), a)), 1e-10)
        table.add(case, "inverse", "grid", max(d(mul(a, inv(a)), e), d(mul(inv(a), a), e)), 1e-10)
        table.add(case, "membership", "grid",
                  max(x.membership_residual() for x in (a, b, c, mul(a, b), inv(a))), 1e-9)
        table.add(case, "chart_round_trip", "grid",
                  d(mapspace.inverse_transport(K, mapspace.chart_transport(a)), a), 1e-9)
        rep = mapspace.verify_local_group_axioms(K, 0.3, samples=200, seed=cfg.seed)
        for name in ("product", "inverse", "conjugation"):
            table.add(case, "local_group", name, getattr(rep, f"{name}_violations"), 0)
        table.add(case, "local_group", "jets", rep.nonfinite_jets, 0)
        for name, pm, gamma, eta in mapspace.dpf_battery(grid):
            for n in (1, 2):
                r = mapspace.verify_dpf(pm, gamma, eta, n)
                table.add(case, f"dpf_n{n}", name, r.residual, cfg.tol or 1e-5)
        return table
    if case == "holomorphy":
        for name, (f, holo) in mapspace.holomorphy_battery().items():
            pts = rng.standard_normal((cfg.grid or 32, f.dim)) * 0.5
            r = mapspace.holomorphy_check(f, pts, seed=cfg.seed)
            if holo:
                table.add(case, "cr_residual", name, r.residual, cfg.tol or 1e-8)
            else:
                # non-holomorphic control: passes when the residual is at least 0.1
                table.add(case, "cr_detected", name, 0.1 / max(r.residual, 1e-300), 1.0)
        return table
    raise UsageError(f"unknown mapspace case {case!r}; try so3-loop, sl2-loop, torus-loop, holomorphy")


RUNNERS = {"borel": run_borel, "extend": run_extend, "manifold": run_manifold, "mapspace": run_mapspace}


# -- entry point --------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="smoothext", description=__doc__.split("\n\n")[1],
                                formatter_class=argparse.RawDescriptionHelpFormatter)
    sub = p.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        s = sub.add_parser(name, help=RUNNERS[name].__doc__.split("\n")[0])
        s.add_argument("--case")
        s.add_argument("--order", type=int, help="jet order N (1..12)")
        s.add_argument("--dim", type=int, help="dimension (1..4)")
        s.add_argument("--grid", type=int, help="number of sample or grid points")
        s.add_argument("--tol", type=float, help="override the main tolerance")
        s.add_argument("--seed", type=int, help=f"random seed (default {DEFAULT_SEED})")
        s.add_argument("--out", help="CSV output path (default stdout)")
        if name == "manifold":
            s.add_argument("--atlas", help="atlas JSON file or bundled atlas name")
        s.add_argument("--config", help="file of key=value lines")
    return p


def config_from_args(argv=None) -> ExperimentConfig:
    ns = build_parser().parse_args(argv)
    values: dict = {}
    if ns.config:
        try:
            with open(ns.config) as fh:
                values.update(parse_config_text(fh.read()))
        except OSError as exc:
            raise UsageError(f"cannot read config file: {exc}") from None
    for key in _FIELDS:
        v = getattr(ns, key, None)
        if v is not None:
            values[key] = v
    return ExperimentConfig(command=ns.command, **values).validate()


def main(argv=None) -> int:
    try:
        cfg = config_from_args(argv)
    except SystemExit as exc:  # argparse
        return 2 if exc.code else 0
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    try:
        table = RUNNERS[cfg.command](cfg)
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except (DomainError, ContractViolation, ConstructionError, OSError) as exc:
        print(f"input error: {exc}", file=sys.stderr)
        return 2
    text = table.to_csv()
    if cfg.out:
        with open(cfg.out, "w", newline="") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    failed = sum(not r.passed for r in table.rows)
    print(f"{len(table.rows)} rows, {failed} failed", file=sys.stderr)
    return 0 if table.passed else 1


if __name__ == "__main__":
    sys.exit(main())
