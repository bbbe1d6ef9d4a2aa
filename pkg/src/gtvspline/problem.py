"""Grid discretization: dictionary matrix ``G``, null-space matrix ``P`` and constraints.

The continuous problem is restricted to splines whose knots lie on a uniform
grid ``tau_1..tau_N``, which turns it into the finite problem

    min ||a||_1  subject to  G a + P b in C

with ``G[m, n] = <nu_m, rho_L(. - tau_n)>`` and ``P[m, n] = <nu_m, p_n>``.
In measure mode (identity operator) the atoms are Diracs, ``G[m, n]`` is the
density of ``nu_m`` at ``tau_n`` and there is no null-space block.
"""

from __future__ import annotations

import json
import logging
import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .biortho import cross_product_matrix, wellposedness_bound
from .errors import DimensionMismatch, IllPosedNullspace, UnsupportedOperator
from .io import dumps
from .measurements import Functional
from .operators import SplineAdmissibleOperator, from_descriptor, nullspace_basis

log = logging.getLogger(__name__)

__all__ = [
    "ConstraintSet",
    "GridSpec",
    "DiscretizedProblem",
    "Feasibility",
    "build_problem",
    "feasibility_check",
    "FLUSH_TOL",
    "ILL_POSED_B",
]

FLUSH_TOL = 1e-14
ILL_POSED_B = 1e-8
FEAS_TOL = 1e-8


@dataclass(frozen=True)
class ConstraintSet:
    """Data-fidelity set ``C``: a point, a Euclidean ball or a box."""

    kind: str
    y: np.ndarray | None = None
    epsilon: float = 0.0
    lo: np.ndarray | None = None
    hi: np.ndarray | None = None

    @classmethod
    def point(cls, y) -> "ConstraintSet":
        return cls("point", _vec(y))

    @classmethod
    def ball(cls, y, epsilon: float) -> "ConstraintSet":
        eps = float(epsilon)
        if not eps >= 0:
            raise ValueError("ball radius must be nonnegative")
        if eps == 0.0:
            return cls.point(y)
        return cls("ball", _vec(y), eps)

    @classmethod
    def box(cls, lo, hi) -> "ConstraintSet":
        lo, hi = _vec(lo), _vec(hi)
        if lo.shape != hi.shape:
            raise DimensionMismatch("box bounds differ in length")
        if not (np.all(np.isfinite(lo)) and np.all(np.isfinite(hi))):
            raise ValueError("box bounds must be finite")
        if np.any(lo > hi):
            raise ValueError("box needs lo <= hi componentwise")
        return cls("box", None, 0.0, lo, hi)

    @property
    def center(self) -> np.ndarray:
        if self.kind == "box":
            return 0.5 * (self.lo + self.hi)
        return self.y

    def __len__(self):
        return self.center.size

    def contains(self, v, tol: float = FEAS_TOL) -> bool:
        v = np.asarray(v, dtype=float)
        if self.kind == "point":
            return float(np.linalg.norm(v - self.y)) <= tol
        if self.kind == "ball":
            return float(np.linalg.norm(v - self.y)) <= self.epsilon + tol
        return bool(np.all(v >= self.lo - tol) and np.all(v <= self.hi + tol))

    def to_dict(self) -> dict:
        if self.kind == "box":
            return {"kind": "box", "lo": self.lo.tolist(), "hi": self.hi.tolist()}
        d = {"kind": self.kind, "y": self.y.tolist()}
        if self.kind == "ball":
            d["epsilon"] = self.epsilon
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "ConstraintSet":
        kind = d["kind"]
        if kind == "point":
            return cls.point(d["y"])
        if kind == "ball":
            return cls.ball(d["y"], d["epsilon"])
        if kind == "box":
            return cls.box(d["lo"], d["hi"])
        raise ValueError(f"unknown constraint kind {kind!r}")


def _vec(v) -> np.ndarray:
    out = np.array(v, dtype=float).reshape(-1)
    out.flags.writeable = False
    return out


@dataclass(frozen=True)
class GridSpec:
    """Uniform knot grid; unset fields are derived from the measurements.

    Defaults: the grid covers the hull of the measurement supports widened by
    ``margin`` times its span on each side, with ``N = max(10 M, 200)`` points.
    """

    lo: float | None = None
    hi: float | None = None
    n: int | None = None
    margin: float = 0.1

    def resolve(self, measurements: Sequence[Functional]) -> np.ndarray:
        if self.lo is None or self.hi is None:
            sups = [nu.support() for nu in measurements]
            a = min(s[0] for s in sups)
            b = max(s[1] for s in sups)
            pad = self.margin * (b - a) if b > a else 0.5
            lo = a - pad if self.lo is None else self.lo
            hi = b + pad if self.hi is None else self.hi
        else:
            lo, hi = self.lo, self.hi
        n = self.n if self.n is not None else max(10 * len(measurements), 200)
        if not hi > lo or n < 2:
            raise ValueError(f"degenerate grid [{lo}, {hi}] with {n} points")
        return np.linspace(float(lo), float(hi), int(n))


@dataclass(frozen=True, eq=False)
class DiscretizedProblem:
    operator: SplineAdmissibleOperator
    grid: np.ndarray
    G: np.ndarray
    P: np.ndarray
    constraint: ConstraintSet
    measurements: tuple = field(default=(), repr=False)
    bound: float = math.inf

    def __post_init__(self):
        for name in ("grid", "G", "P"):
            arr = np.array(getattr(self, name), dtype=float)
            arr.flags.writeable = False
            object.__setattr__(self, name, arr)
        if self.G.ndim != 2 or self.P.ndim != 2 or self.P.shape[0] != self.G.shape[0]:
            raise DimensionMismatch("G and P must be matrices with one row per measurement")
        if self.grid.shape[0] != self.G.shape[1]:
            raise DimensionMismatch("one grid point per column of G expected")
        if len(self.constraint) != self.G.shape[0]:
            raise DimensionMismatch("constraint size differs from the number of measurements")

    @classmethod
    def from_matrices(cls, G, P=None, y=None, constraint=None, grid=None, operator=None):
        """Problem from raw matrices (no measurement functionals attached)."""
        G = np.atleast_2d(np.asarray(G, dtype=float))
        M, N = G.shape
        if P is None:
            P = np.zeros((M, 0))
        P = np.asarray(P, dtype=float).reshape(M, -1)
        if constraint is None:
            constraint = ConstraintSet.point(y)
        if grid is None:
            grid = np.arange(N, dtype=float)
        if operator is None:
            from .operators import identity

            operator = identity()
        return cls(operator, grid, G, P, constraint, (), wellposedness_bound(P))

    @property
    def y(self) -> np.ndarray:
        return self.constraint.center

    @property
    def mode(self) -> str:
        return "measure" if self.operator.kind == "identity" else "spline"

    @property
    def M(self) -> int:
        return self.G.shape[0]

    @property
    def N(self) -> int:
        return self.G.shape[1]

    @property
    def N0(self) -> int:
        return self.P.shape[1]

    @property
    def step(self) -> float:
        return float(self.grid[1] - self.grid[0]) if self.N > 1 else 0.0

    def forward(self, a, b=None) -> np.ndarray:
        out = self.G @ np.asarray(a, dtype=float)
        if self.N0:
            out = out + self.P @ np.asarray(b, dtype=float)
        return out

    def to_dict(self) -> dict:
        return {
            "operator": self.operator.descriptor(),
            "mode": self.mode,
            "grid": self.grid.tolist(),
            "G": self.G.tolist(),
            "P": self.P.tolist(),
            "y": self.y.tolist(),
            "constraint": self.constraint.to_dict(),
            "B": self.bound,
        }

    def to_json(self) -> str:
        return dumps(self.to_dict())

    @classmethod
    def from_dict(cls, d: dict) -> "DiscretizedProblem":
        G = np.array(d["G"], dtype=float)
        P = np.array(d["P"], dtype=float).reshape(G.shape[0], -1)
        return cls(from_descriptor(d["operator"]), d["grid"], G, P,
                   ConstraintSet.from_dict(d["constraint"]), (), float(d.get("B", math.inf)))

    @classmethod
    def from_json(cls, text: str) -> "DiscretizedProblem":
        return cls.from_dict(json.loads(text))


def build_problem(
    op: SplineAdmissibleOperator,
    measurements: Sequence[Functional],
    y=None,
    constraint: ConstraintSet | None = None,
    grid_spec: GridSpec | None = None,
    strict: bool = False,
) -> DiscretizedProblem:
    """Assemble ``G`` and ``P`` for ``op`` on a uniform grid.

    Parameters
    ----------
    op : SplineAdmissibleOperator
        One-dimensional operator, or the identity for measure mode.
    measurements : sequence of Functional
    y : array_like, optional
        Data; shorthand for ``constraint=ConstraintSet.point(y)``.
    constraint : ConstraintSet, optional
    grid_spec : GridSpec, optional
    strict : bool
        Raise :class:`IllPosedNullspace` instead of warning when the
        well-posedness bound ``B`` falls below ``1e-8``.
    """
    measurements = tuple(measurements)
    M = len(measurements)
    if M == 0:
        raise DimensionMismatch("at least one measurement is required")
    if op.dimension != 1:
        raise UnsupportedOperator(f"grid discretization is one-dimensional; got {op}")
    if constraint is None:
        if y is None:
            raise ValueError("either y or a constraint set is required")
        constraint = ConstraintSet.point(y)
    if len(constraint) != M:
        raise DimensionMismatch(f"{M} measurements but {len(constraint)} data values")
    for nu in measurements:
        nu.check_admissible(op)

    grid = (grid_spec or GridSpec()).resolve(measurements)
    if grid.size <= M:
        raise DimensionMismatch(f"grid of {grid.size} points is not finer than M = {M}")
    G = np.vstack([np.asarray(nu.row(op, grid), dtype=float).reshape(1, -1) for nu in measurements])
    G[np.abs(G) < FLUSH_TOL] = 0.0
    basis = nullspace_basis(op)
    P = cross_product_matrix(measurements, basis) if len(basis) else np.zeros((M, 0))
    P[np.abs(P) < FLUSH_TOL] = 0.0
    B = wellposedness_bound(P)
    if B < ILL_POSED_B:
        msg = f"well-posedness bound B = {B:.3g} < {ILL_POSED_B:g}: null space poorly identified"
        if strict:
            raise IllPosedNullspace(msg)
        log.warning(msg)
    return DiscretizedProblem(op, grid, G, P, constraint, measurements, B)


@dataclass(frozen=True)
class Feasibility:
    """Outcome of :func:`feasibility_check`; truthy when feasible."""

    feasible: bool
    residual: float

    def __bool__(self):
        return self.feasible


def feasibility_check(problem: DiscretizedProblem, tol: float = FEAS_TOL) -> Feasibility:
    """Whether some ``(a, b)`` maps into the constraint set.

    Point and ball sets use the least-squares residual of ``[G P] x = y`` (the
    certificate); box sets run phase one of the simplex.
    """
    c = problem.constraint
    if c.kind == "box":
        from .solvers import box_feasibility_residual

        r = box_feasibility_residual(problem)
        return Feasibility(r <= tol * max(1.0, float(np.max(np.abs(c.center)))), r)
    A = np.hstack([problem.G, problem.P])
    x, *_ = np.linalg.lstsq(A, c.y, rcond=None)
    r = float(np.linalg.norm(c.y - A @ x))
    scale = max(1.0, float(np.linalg.norm(c.y)))
    if c.kind == "point":
        return Feasibility(r <= tol * scale, r)
    return Feasibility(r <= c.epsilon + tol * scale, r)
