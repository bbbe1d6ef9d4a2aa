"""Stable right inverse ``L_phi^{-1}`` of a spline-admissible operator.

The kernel is ``g_phi(x, y) = rho(x - y) - sum_n p_n(x) q_n(y)`` with
``q_n(y) = phi_n(rho(. - y))``. The correction term imposes the boundary
conditions ``phi(L_phi^{-1} w) = 0`` and is what keeps the kernel bounded
(after weighting by ``(1 + |x|)^{-n0}``); dropping it gives the plain
shift-invariant inverse ``w -> rho * w``, which is unstable for ``n0 >= 1``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .biortho import BiorthogonalSystem, canonical_system
from .errors import DimensionMismatch
from .measure import DiscreteMeasure
from .measurements import DerivativeAtPoint
from .operators import GreenAtom, SplineAdmissibleOperator, green_eval
from .quadrature import integrate
from .spline import NonuniformSpline

__all__ = [
    "DiscreteMeasure",
    "RightInverse",
    "StabilityEstimate",
    "kernel_eval",
    "stability_constant",
    "growth_ratio",
    "apply_rightinv",
    "solve_ode",
    "GaussianTestFunction",
    "adjoint_apply",
    "weak_pairing",
]

#: grid-max growth factor between nested boxes that flags an unstable kernel
GROWTH_THRESHOLD = 10.0


class RightInverse:
    """``L_phi^{-1}`` for a biorthogonal system.

    With ``shift_invariant=True`` the null-space correction is dropped, which
    yields the conventional (unstable) inverse kept for comparison.
    """

    def __init__(self, system: BiorthogonalSystem, shift_invariant: bool = False):
        self.system = system
        self.operator = system.operator
        self.shift_invariant = bool(shift_invariant)
        self._pointwise = all(phi.pointwise for phi in system.functionals)

    @classmethod
    def canonical(cls, op: SplineAdmissibleOperator, **kw) -> "RightInverse":
        return cls(canonical_system(op), **kw)

    @property
    def has_closed_form(self) -> bool:
        """True for ``D^N`` with the canonical boundary functionals at the origin."""
        op = self.operator
        if op.kind != "derivative" or self.shift_invariant:
            return False
        phis = self.system.functionals
        return len(phis) == op.order and all(
            isinstance(phi, DerivativeAtPoint) and phi.x0 == 0.0 and phi.order == n
            for n, phi in enumerate(phis)
        )

    def q(self, y) -> np.ndarray:
        """``q_n(y) = phi_n(rho(. - y))`` as an array of shape ``(N0,) + y.shape``."""
        y = np.asarray(y, dtype=float)
        n0 = len(self.system)
        # 2-D operators take points as trailing length-2 rows
        shape = y.shape[:-1] if self.operator.dimension == 2 else y.shape
        if n0 == 0 or self.shift_invariant:
            return np.zeros((n0,) + shape)
        if self._pointwise and self.operator.dimension == 1:
            out = [np.broadcast_to(phi.apply(GreenAtom(self.operator, y)), shape)
                   for phi in self.system.functionals]
            return np.array(out, dtype=float)
        flat = y.reshape((-1, 2) if self.operator.dimension == 2 else -1)
        if self.operator.dimension == 1:
            # measurement rows are vectorized over atom locations
            out = np.array([phi.row(self.operator, flat) for phi in self.system.functionals])
            return out.reshape((n0,) + shape)
        out = np.array([[float(phi.apply(GreenAtom(self.operator, t))) for t in flat]
                        for phi in self.system.functionals])
        return out.reshape((n0,) + shape)

    def column(self, y) -> NonuniformSpline:
        """``g_phi(., y)`` as a spline."""
        return apply_rightinv(self, DiscreteMeasure([y], [1.0]))


def _closed_form_kernel(n0: int, x, y):
    fact = math.factorial(n0)
    right = (x >= 0) & (y > 0) & (y <= x)
    left = (x < 0) & (y > x) & (y <= 0)
    val = (x - y) ** n0 / fact
    return np.where(right, val, 0.0) - np.where(left, val, 0.0)


def kernel_eval(ri: RightInverse, x, y, closed_form: bool | None = None):
    """``g_phi(x, y)``, broadcasting over ``x`` and ``y``.

    ``closed_form=None`` uses the compact piecewise expression whenever it is
    available (``D^N`` with canonical functionals); ``False`` forces the
    subtraction formula.
    """
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    use_closed = ri.has_closed_form if closed_form is None else bool(closed_form)
    if use_closed:
        if not ri.has_closed_form:
            raise ValueError("no closed-form kernel for this right inverse")
        out = _closed_form_kernel(ri.operator.order - 1, *np.broadcast_arrays(x, y))
    else:
        xb, yb = np.broadcast_arrays(x, y)
        out = np.asarray(green_eval(ri.operator, xb - yb), dtype=float)
        if not ri.shift_invariant and len(ri.system):
            qs = ri.q(yb)
            for p, qn in zip(ri.system.basis, qs):
                out = out - p(xb) * qn
    return float(out) if out.ndim == 0 else out


@dataclass(frozen=True)
class StabilityEstimate:
    """Grid lower bound on ``C_phi = sup |g(x, y)| (1 + |x|)^{-n0}``."""

    value: float
    analytic: float | None
    box: tuple[float, float]
    step: float
    points: int


def stability_constant(ri: RightInverse, domain=(-10.0, 10.0), grid_step: float = 0.05) -> StabilityEstimate:
    """Max of ``|g_phi(x, y)| (1 + |x|)^{-n0}`` over a square grid on ``domain``.

    The analytic supremum over the box is attached when known (``D^N`` with
    canonical functionals: ``max_x |x|^n0 / n0! / (1 + |x|)^n0``).
    """
    if not grid_step > 0:
        raise ValueError("grid_step must be positive")
    lo, hi = map(float, domain)
    n = int(round((hi - lo) / grid_step)) + 1
    xs = np.linspace(lo, hi, n)
    n0 = max(ri.operator.growth_order, 0)
    weight = (1.0 + np.abs(xs)) ** (-n0)
    best = 0.0
    # row blocks keep memory bounded for fine grids
    for start in range(0, n, 256):
        xb = xs[start:start + 256, None]
        g = np.abs(kernel_eval(ri, xb, xs[None, :], closed_form=False))
        best = max(best, float(np.max(g * weight[start:start + 256, None])))
    analytic = None
    if ri.has_closed_form:
        m = max(abs(lo), abs(hi))
        analytic = m**n0 / math.factorial(n0) / (1.0 + m) ** n0
    return StabilityEstimate(best, analytic, (lo, hi), float(grid_step), n * n)


def growth_ratio(ri: RightInverse, small=(-5.0, 5.0), large=(-10.0, 10.0), grid_step: float = 0.05) -> float:
    """Ratio of the stability grid maxima on a large box and a nested smaller one."""
    a = stability_constant(ri, small, grid_step).value
    b = stability_constant(ri, large, grid_step).value
    return b / a if a > 0 else (math.inf if b > 0 else 1.0)


def apply_rightinv(ri: RightInverse, w: DiscreteMeasure) -> NonuniformSpline:
    """``L_phi^{-1} w = sum_k w_k g_phi(., y_k)`` for a discrete measure.

    The result is returned in spline form: the atoms keep their weights and
    the correction term collapses into null-space coefficients
    ``-sum_k w_k q_n(y_k)``.
    """
    op = ri.operator
    if len(w) == 0:
        return NonuniformSpline(op, (), (), np.zeros(op.nullspace_dim))
    q = ri.q(w.locations)
    b = -(q @ w.weights) if q.size else np.zeros(op.nullspace_dim)
    return NonuniformSpline(op, w.locations, w.weights, b)


def solve_ode(ri: RightInverse, w: DiscreteMeasure, b) -> NonuniformSpline:
    """Unique solution of ``L s = w`` with ``phi(s) = b``: ``L_phi^{-1} w + sum b_n p_n``."""
    b = np.asarray(b, dtype=float).reshape(-1)
    if b.size != len(ri.system):
        raise DimensionMismatch(f"expected {len(ri.system)} boundary values, got {b.size}")
    base = apply_rightinv(ri, w)
    return NonuniformSpline(ri.operator, base.knots, base.weights, base.null_coeffs + b)


# --------------------------------------------------------------------------
# weak verification of L L_phi^{-1} = Id


class GaussianTestFunction:
    """``psi(x) = poly(x - c) exp(-(x - c)^2 / (2 s^2))`` with exact derivatives."""

    def __init__(self, coeffs=(1.0,), center: float = 0.0, width: float = 1.0):
        self.poly = np.polynomial.Polynomial(np.asarray(coeffs, dtype=float))
        self.center = float(center)
        self.width = float(width)
        self.kinks = ()

    def _deriv_poly(self, k: int):
        # (P e^{-u^2/2s^2})' = (P' - u P / s^2) e^{-u^2/2s^2}
        P = self.poly
        u = np.polynomial.Polynomial([0.0, 1.0])
        for _ in range(k):
            P = P.deriv() - u * P / self.width**2
        return P

    def __call__(self, x):
        return self.derivative(x, 0)

    def derivative(self, x, order: int = 1):
        u = np.asarray(x, dtype=float) - self.center
        return self._deriv_poly(order)(u) * np.exp(-0.5 * (u / self.width) ** 2)

    def support(self, cut: float = 12.0):
        return (self.center - cut * self.width, self.center + cut * self.width)


def adjoint_apply(op: SplineAdmissibleOperator, psi: GaussianTestFunction):
    """``L* psi`` for integer-order 1-D operators, as a vectorized callable.

    ``(D - a)* = -D - a``, so ``L* = prod_i (-D - a_i)`` expanded as a
    polynomial in ``D``.
    """
    if op.kind == "derivative":
        roots = [0.0] * op.order
    elif op.kind == "exponential":
        roots = list(op.roots)
    else:
        raise ValueError(f"adjoint not available for {op}")
    poly = np.polynomial.Polynomial([1.0])
    for a in roots:
        poly = poly * np.polynomial.Polynomial([-a, -1.0])
    coeffs = poly.coef

    def fn(x):
        return sum(c * psi.derivative(x, k) for k, c in enumerate(coeffs) if c != 0.0)

    return fn


def weak_pairing(ri: RightInverse, y: float, psi: GaussianTestFunction) -> float:
    """``integral g_phi(x, y) (L* psi)(x) dx``, which equals ``psi(y)``."""
    col = ri.column(y)
    lstar = adjoint_apply(ri.operator, psi)
    lo, hi = psi.support()
    kinks = (0.0, float(y))
    return integrate(lambda x: col(x) * lstar(x), lo, hi, kinks, tol=1e-12)
