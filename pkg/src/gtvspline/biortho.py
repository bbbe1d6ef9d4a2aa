"""Biorthogonal systems for the null space of a spline-admissible operator.

A biorthogonal system pairs boundary functionals ``phi_1..phi_N0`` with a
null-space basis ``p_1..p_N0`` so that ``phi_m(p_n) = delta_mn``. It fixes the
"integration constants" of the right inverse and gives every null-space
element the unique expansion ``q = sum_n phi_n(q) p_n``.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .errors import NullspaceNotIdentifiable, SingularNormalEquations, UnsupportedOperator
from .measurements import Combination, DerivativeAtPoint, Functional, IdealSample
from .operators import NullSpaceBasis, SplineAdmissibleOperator, nullspace_basis

log = logging.getLogger(__name__)

RANK_TOL = 1e-10

__all__ = [
    "BiorthogonalSystem",
    "NullSpaceFunction",
    "canonical_system",
    "measurement_system",
    "cross_product_matrix",
    "select_pivot_rows",
    "nullspace_fit",
    "jacobi_eigh",
    "singular_values",
    "wellposedness_bound",
    "project_nullspace",
]


@dataclass(frozen=True)
class BiorthogonalSystem:
    operator: SplineAdmissibleOperator
    functionals: tuple
    basis: NullSpaceBasis
    #: measurement rows the functionals were built from (measurement systems only)
    rows: tuple = ()

    def __len__(self):
        return len(self.basis)

    def gram(self) -> np.ndarray:
        """Matrix ``[m, n] = phi_m(p_n)``; the identity for a valid system."""
        return cross_product_matrix(self.functionals, self.basis)

    def evaluate(self, f) -> np.ndarray:
        """Boundary values ``phi(f)`` of an evaluable ``f``."""
        return np.array([float(phi.apply(f)) for phi in self.functionals])


class NullSpaceFunction:
    """``q = sum_n c_n p_n`` as an evaluable."""

    kinks: tuple = ()

    def __init__(self, coeffs, basis: NullSpaceBasis):
        self.coeffs = np.asarray(coeffs, dtype=float).reshape(-1)
        if self.coeffs.size != len(basis):
            raise ValueError("one coefficient per basis function expected")
        self.basis = basis

    def __call__(self, x):
        x = np.asarray(x, dtype=float)
        if not len(self.basis):
            return np.zeros(x.shape)
        return sum(c * p(x) for c, p in zip(self.coeffs, self.basis))

    def derivative(self, x, order=1):
        x = np.asarray(x, dtype=float)
        out = np.zeros(x.shape)
        for c, p in zip(self.coeffs, self.basis):
            out = out + c * p.derivative(x, order)
        return out


def cross_product_matrix(measurements: Sequence[Functional], basis: Sequence) -> np.ndarray:
    """``P[m, n] = <nu_m, p_n>``, shape ``(M, N0)``."""
    P = np.zeros((len(measurements), len(basis)))
    for m, nu in enumerate(measurements):
        for n, p in enumerate(basis):
            P[m, n] = nu.act_on_null(p)
    return P


def canonical_system(op: SplineAdmissibleOperator) -> BiorthogonalSystem:
    """Canonical boundary functionals anchored at the origin.

    ``D^N``: ``phi_n(f) = f^(n-1)(0)`` against ``p_n = x^(n-1)/(n-1)!``.
    Exponential operators: derivatives at the origin recombined by the inverse
    Wronskian of the exponential-monomial basis. Thin plate: point values at
    ``(0,0), (1,0), (0,1)`` recombined against ``{1, x, y}``.
    """
    basis = nullspace_basis(op)
    if op.kind == "identity":
        return BiorthogonalSystem(op, (), basis)
    if op.kind == "derivative":
        return BiorthogonalSystem(
            op, tuple(DerivativeAtPoint(0.0, n) for n in range(op.order)), basis
        )
    if op.kind == "exponential":
        n = len(basis)
        wronski = np.array([[float(p.derivative(0.0, k)) for p in basis] for k in range(n)])
        inv = np.linalg.inv(wronski)
        derivs = [DerivativeAtPoint(0.0, k) for k in range(n)]
        phis = tuple(Combination(tuple(zip(inv[i], derivs))) for i in range(n))
        return BiorthogonalSystem(op, phis, basis)
    if op.kind == "thinplate":
        anchors = [IdealSample(np.array(a, dtype=float)) for a in ((0, 0), (1, 0), (0, 1))]
        P0 = cross_product_matrix(anchors, basis)
        inv = np.linalg.inv(P0)
        phis = tuple(Combination(tuple(zip(inv[i], anchors))) for i in range(3))
        return BiorthogonalSystem(op, phis, basis)
    raise UnsupportedOperator(
        f"no canonical boundary functionals for {op}; use measurement_system"
    )


def select_pivot_rows(P: np.ndarray, tol: float = RANK_TOL) -> list[int]:
    """Greedy choice of ``N0`` linearly independent rows of ``P``.

    Rows are scanned in index order; each is reduced against the rows already
    kept and accepted when its largest remaining entry (the column pivot)
    exceeds ``tol`` relative to the row scale. Ties between columns go to the
    lowest index.
    """
    P = np.asarray(P, dtype=float)
    n0 = P.shape[1]
    kept: list[int] = []
    reduced: list[tuple[int, np.ndarray]] = []
    for i, row in enumerate(P):
        if len(kept) == n0:
            break
        v = row.copy()
        for c, u in reduced:
            v = v - v[c] * u
        j = int(np.argmax(np.abs(v)))
        scale = max(1.0, float(np.max(np.abs(row))))
        if abs(v[j]) > tol * scale:
            reduced.append((j, v / v[j]))
            kept.append(i)
    return kept


def measurement_system(
    op: SplineAdmissibleOperator, measurements: Sequence[Functional]
) -> BiorthogonalSystem:
    """Boundary functionals ``phi_0 = P0^{-1} nu_0`` built from the measurements.

    ``nu_0`` are ``N0`` measurements whose restriction ``P0`` to the null space
    is invertible, so that ``phi_0(p_n) = e_n``.
    """
    basis = nullspace_basis(op)
    n0 = len(basis)
    if n0 == 0:
        return BiorthogonalSystem(op, (), basis)
    P = cross_product_matrix(measurements, basis)
    rows = select_pivot_rows(P)
    if len(rows) < n0:
        raise NullspaceNotIdentifiable(
            f"measurements span only {len(rows)} of {n0} null-space dimensions"
        )
    P0 = P[rows]
    smin = singular_values(P0)[-1]
    if smin < RANK_TOL:
        raise NullspaceNotIdentifiable(f"sigma_min(P0) = {smin:.3g} below {RANK_TOL:g}")
    inv = np.linalg.inv(P0)
    nu0 = [measurements[i] for i in rows]
    phis = tuple(Combination(tuple(zip(inv[k], nu0))) for k in range(n0))
    return BiorthogonalSystem(op, phis, basis, tuple(rows))


def jacobi_eigh(A: np.ndarray, tol: float = 1e-15, max_sweeps: int = 100):
    """Eigenvalues and eigenvectors of a small symmetric matrix (cyclic Jacobi).

    Returns ``(w, V)`` with ``w`` sorted decreasingly and ``A V = V diag(w)``.
    """
    A = np.array(A, dtype=float)
    n = A.shape[0]
    V = np.eye(n)
    for _ in range(max_sweeps):
        off = math.sqrt(float(np.sum(np.tril(A, -1) ** 2)))
        if off <= tol * max(1.0, float(np.max(np.abs(np.diag(A)), initial=0.0))):
            break
        for p in range(n - 1):
            for q in range(p + 1, n):
                if A[p, q] == 0.0:
                    continue
                diff = A[q, q] - A[p, p]
                if abs(A[p, q]) < 1e-150 * abs(diff):
                    # small-angle limit; theta itself would overflow
                    t = A[p, q] / diff
                else:
                    theta = diff / (2.0 * A[p, q])
                    t = math.copysign(1.0, theta) / (abs(theta) + math.sqrt(theta * theta + 1.0))
                c = 1.0 / math.sqrt(t * t + 1.0)
                s = t * c
                J = np.eye(n)
                J[p, p] = J[q, q] = c
                J[p, q] = s
                J[q, p] = -s
                A = J.T @ A @ J
                V = V @ J
    w = np.diag(A).copy()
    order = np.argsort(-w, kind="stable")
    return w[order], V[:, order]


def singular_values(P: np.ndarray) -> np.ndarray:
    """Singular values of ``P`` (decreasing) from the eigenvalues of ``P^T P``."""
    P = np.asarray(P, dtype=float)
    if P.shape[1] == 0:
        return np.zeros(0)
    w, _ = jacobi_eigh(P.T @ P)
    return np.sqrt(np.clip(w, 0.0, None))


def wellposedness_bound(P: np.ndarray) -> float:
    """``B = sigma_min(P)^2 / sigma_max(P)``.

    ``B ||c||_2 <= ||P c||_2`` for every coefficient vector ``c``. An empty null
    space has no constraint and returns ``inf``.
    """
    P = np.asarray(P, dtype=float)
    if P.ndim != 2 or P.shape[1] == 0:
        log.debug("empty null space: well-posedness bound is +inf")
        return math.inf
    s = singular_values(P)
    if s[0] == 0.0:
        return 0.0
    return float(s[-1] ** 2 / s[0])


def nullspace_fit(P: np.ndarray, y) -> np.ndarray:
    """Least-squares null-space coefficients ``c = (P^T P)^{-1} P^T y``."""
    P = np.asarray(P, dtype=float)
    y = np.asarray(y, dtype=float)
    if P.shape[1] == 0:
        return np.zeros(0)
    s = singular_values(P)
    if s[-1] < RANK_TOL:
        raise SingularNormalEquations(f"sigma_min(P) = {s[-1]:.3g}")
    return np.linalg.solve(P.T @ P, P.T @ y)


def project_nullspace(system: BiorthogonalSystem, f_evaluations) -> NullSpaceFunction:
    """``q = sum_n phi_n(f) p_n`` from the boundary values ``phi(f)``."""
    vals = np.asarray(f_evaluations, dtype=float).reshape(-1)
    if vals.size != len(system.basis):
        raise ValueError(f"expected {len(system.basis)} boundary values, got {vals.size}")
    return NullSpaceFunction(vals, system.basis)
