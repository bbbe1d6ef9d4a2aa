"""Invariant checks for an operator and its right inverse.

Each check returns a :class:`Check` carrying the measured value, the
threshold it is compared against and the verdict. The CLI prints them as a
table; tests call them directly.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .biortho import (
    BiorthogonalSystem,
    cross_product_matrix,
    wellposedness_bound,
)
from .measure import DiscreteMeasure
from .measurements import IdealSample, point_sample
from .operators import nullspace_basis
from .rightinv import (
    GROWTH_THRESHOLD,
    GaussianTestFunction,
    RightInverse,
    apply_rightinv,
    stability_constant,
    weak_pairing,
)

__all__ = [
    "Check",
    "check_biorthogonality",
    "check_boundary_conditions",
    "check_weak_inverse",
    "check_stability_growth",
    "check_wellposedness_bound",
    "operator_suite",
    "STABILITY_LADDER",
]

#: half-widths of the nested boxes used to detect kernel growth
STABILITY_LADDER = (10.0, 20.0, 40.0, 80.0, 160.0)


@dataclass(frozen=True)
class Check:
    name: str
    value: float
    threshold: float
    passed: bool
    note: str = ""
    skipped: bool = False

    @property
    def verdict(self) -> str:
        if self.skipped:
            return "SKIP"
        return "PASS" if self.passed else "FAIL"

    def to_dict(self) -> dict:
        return {"name": self.name, "value": self.value, "threshold": self.threshold,
                "verdict": self.verdict, "note": self.note}


def _skip(name: str, why: str) -> Check:
    return Check(name, math.nan, math.nan, True, why, skipped=True)


def check_biorthogonality(system: BiorthogonalSystem, tol: float = 1e-12) -> Check:
    n = len(system)
    err = float(np.max(np.abs(system.gram() - np.eye(n)), initial=0.0))
    return Check("biorthogonality", err, tol, err <= tol)


def random_measure(rng: np.random.Generator, dim: int = 1, span: float = 5.0) -> DiscreteMeasure:
    k = int(rng.integers(1, 6))
    shape = (k,) if dim == 1 else (k, dim)
    return DiscreteMeasure(rng.uniform(-span, span, shape), rng.standard_normal(k))


def check_boundary_conditions(ri: RightInverse, trials: int = 100, seed: int = 0,
                              tol: float = 1e-9) -> Check:
    """``max ||phi(L_phi^{-1} w)||_2`` over random discrete measures ``w``."""
    if not len(ri.system):
        return _skip("boundary conditions", "empty null space")
    rng = np.random.default_rng(seed)
    worst = 0.0
    for _ in range(trials):
        w = random_measure(rng, ri.operator.dimension)
        s = apply_rightinv(ri, w)
        worst = max(worst, float(np.linalg.norm(ri.system.evaluate(s))))
    return Check("boundary conditions", worst, tol, worst <= tol)


def random_test_functions(rng: np.random.Generator, count: int = 20):
    out = []
    for _ in range(count):
        deg = int(rng.integers(0, 3))
        out.append(GaussianTestFunction(rng.standard_normal(deg + 1),
                                        float(rng.uniform(-1.5, 1.5)),
                                        float(rng.uniform(0.4, 1.2))))
    return out


def check_weak_inverse(ri: RightInverse, n_psi: int = 20, n_atoms: int = 5, seed: int = 0,
                       tol: float = 1e-6) -> Check:
    """``max |<L_phi^{-1} delta_y, L* psi> - psi(y)|`` over test functions and atoms."""
    if ri.operator.kind not in ("derivative", "exponential"):
        return _skip("weak right inverse", "no closed-form adjoint")
    rng = np.random.default_rng(seed)
    psis = random_test_functions(rng, n_psi)
    ys = rng.uniform(-2.0, 2.0, n_atoms)
    worst = 0.0
    for psi in psis:
        for y in ys:
            worst = max(worst, abs(weak_pairing(ri, float(y), psi) - float(psi(y))))
    return Check("weak right inverse", worst, tol, worst <= tol)


def check_stability_growth(ri: RightInverse, ladder=STABILITY_LADDER, points: int = 201,
                           threshold: float = GROWTH_THRESHOLD) -> Check:
    """Growth of the weighted kernel maximum across nested boxes.

    A kernel obeying ``|g(x, y)| <= C (1 + |x|)^n0`` has a bounded weighted
    maximum, so the ratio between the largest and smallest box stays below
    ``threshold``; a kernel that grows faster than ``|x|^n0`` exceeds it.
    """
    if ri.operator.dimension != 1 or ri.operator.kind == "identity":
        return _skip("stability growth", "one-dimensional operators only")
    vals = []
    for R in ladder:
        step = 2.0 * R / (points - 1)
        vals.append(stability_constant(ri, (-R, R), step).value)
    ratio = vals[-1] / vals[0] if vals[0] > 0 else math.inf
    return Check("stability growth", ratio, threshold, ratio < threshold,
                 f"C_phi >= {vals[-1]:.6g}")


def check_wellposedness_bound(op, n_matrices: int = 20, n_vectors: int = 1000, seed: int = 0,
                              tol: float = 1e-9) -> Check:
    """``B ||c|| <= ||P c|| + tol`` for random unit ``c`` on random measurement matrices."""
    basis = nullspace_basis(op)
    n0 = len(basis)
    if n0 == 0:
        return _skip("well-posedness bound", "empty null space")
    rng = np.random.default_rng(seed)
    worst = -math.inf
    for _ in range(n_matrices):
        M = int(rng.integers(n0, 7))
        if op.dimension == 1:
            ms = [point_sample(op, float(x)) for x in rng.uniform(-2.0, 2.0, M)]
        else:
            ms = [IdealSample(p) for p in rng.uniform(-2.0, 2.0, (M, 2))]
        P = cross_product_matrix(ms, basis)
        B = wellposedness_bound(P)
        c = rng.standard_normal((n_vectors, n0))
        c /= np.linalg.norm(c, axis=1, keepdims=True)
        gap = B - np.linalg.norm(c @ P.T, axis=1)
        worst = max(worst, float(np.max(gap)))
    return Check("well-posedness bound", worst, tol, worst <= tol)


def operator_suite(ri: RightInverse, seed: int = 0) -> list[Check]:
    """All invariant checks for one right inverse."""
    return [
        check_biorthogonality(ri.system),
        check_boundary_conditions(ri, seed=seed),
        check_weak_inverse(ri, seed=seed),
        check_stability_growth(ri),
        check_wellposedness_bound(ri.operator, seed=seed),
    ]
