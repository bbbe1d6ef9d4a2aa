"""Spline-admissible regularization operators.

An operator ``L`` is described by its Green's function ``rho`` (``L rho =
delta``), the basis of its growth-restricted null space and the polynomial
growth order ``n0`` of ``rho``. Five families are supported:

* ``derivative``  -- ``D^N``; ``rho(x) = x_+^(N-1)/(N-1)!``, null space = polynomials
  of degree < N.
* ``exponential`` -- ``(D - a_1)...(D - a_N)`` with real roots ``a_i <= 0``;
  ``rho`` is the causal impulse response, null space = exponential monomials.
* ``fractional``  -- ``D^gamma``; ``rho(x) = x_+^(gamma-1)/Gamma(gamma)``.
* ``thinplate``   -- 2-D thin-plate operator with ``rho = r^2 log(r)/(8 pi)`` and
  affine null space ``{1, x, y}``.
* ``identity``    -- measure-space recovery; no Green's function, empty null space.

All evaluation routines are vectorized over ``x``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .errors import GridTooShort, IdentityHasNoGreenFunction

__all__ = [
    "SplineAdmissibleOperator",
    "derivative",
    "exponential",
    "fractional",
    "thin_plate",
    "identity",
    "from_descriptor",
    "NullSpaceBasis",
    "ExpMonomial",
    "AffineMonomial2D",
    "GreenAtom",
    "green_eval",
    "green_derivative",
    "nullspace_basis",
    "apply_operator_fd",
    "growth_order",
]

KINDS = ("derivative", "exponential", "fractional", "thinplate", "identity")


@dataclass(frozen=True)
class SplineAdmissibleOperator:
    kind: str
    order: int = 0
    roots: tuple[float, ...] = ()
    gamma: float = 0.0

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"unknown operator kind {self.kind!r}")
        if self.kind == "derivative" and self.order < 1:
            raise ValueError("derivative order must be >= 1")
        if self.kind == "exponential":
            if not self.roots:
                raise ValueError("exponential operator needs at least one root")
            if any(r > 0 for r in self.roots):
                # rho would grow exponentially, i.e. not of slow growth
                raise ValueError("exponential roots must be <= 0")
        if self.kind == "fractional" and not self.gamma >= 1.0:
            raise ValueError("fractional order gamma must be >= 1 in 1-D")

    @property
    def dimension(self) -> int:
        return 2 if self.kind == "thinplate" else 1

    @property
    def growth_order(self) -> int:
        return growth_order(self)

    @property
    def nullspace_dim(self) -> int:
        if self.kind == "derivative":
            return self.order
        if self.kind == "exponential":
            return len(self.roots)
        if self.kind == "fractional":
            return int(math.ceil(self.gamma))
        if self.kind == "thinplate":
            return 3
        return 0

    @property
    def holder_exponent(self) -> float:
        if self.kind == "derivative":
            return float(self.order - 1)
        if self.kind == "exponential":
            return float(len(self.roots) - 1)
        if self.kind == "fractional":
            return max(self.gamma - 1.0, 0.0)
        if self.kind == "thinplate":
            return 1.0
        return 0.0

    @property
    def causal(self) -> bool:
        return self.kind in ("derivative", "exponential", "fractional")

    def root_groups(self) -> list[tuple[float, int]]:
        """Distinct roots with multiplicities, in order of first appearance."""
        groups: list[list] = []
        for r in self.roots:
            for g in groups:
                if g[0] == r:
                    g[1] += 1
                    break
            else:
                groups.append([float(r), 1])
        return [(a, m) for a, m in groups]

    def descriptor(self) -> dict:
        d: dict = {"kind": self.kind}
        if self.kind == "derivative":
            d["order"] = self.order
        elif self.kind == "exponential":
            d["roots"] = [float(r) for r in self.roots]
        elif self.kind == "fractional":
            d["gamma"] = float(self.gamma)
        return d

    def __str__(self):
        if self.kind == "derivative":
            return "D" if self.order == 1 else f"D^{self.order}"
        if self.kind == "exponential":
            return "ExpODE(" + ", ".join(f"{r:g}" for r in self.roots) + ")"
        if self.kind == "fractional":
            return f"D^{self.gamma:g}"
        if self.kind == "thinplate":
            return "ThinPlate2D"
        return "Identity"


def derivative(order: int) -> SplineAdmissibleOperator:
    return SplineAdmissibleOperator("derivative", order=int(order))


def exponential(roots: Sequence[float]) -> SplineAdmissibleOperator:
    return SplineAdmissibleOperator("exponential", roots=tuple(float(r) for r in roots))


def fractional(gamma: float) -> SplineAdmissibleOperator:
    return SplineAdmissibleOperator("fractional", gamma=float(gamma))


def thin_plate() -> SplineAdmissibleOperator:
    return SplineAdmissibleOperator("thinplate")


def identity() -> SplineAdmissibleOperator:
    return SplineAdmissibleOperator("identity")


def from_descriptor(desc: dict) -> SplineAdmissibleOperator:
    """Inverse of :meth:`SplineAdmissibleOperator.descriptor`."""
    kind = str(desc["kind"]).lower().replace("-", "").replace("_", "")
    aliases = {"d": "derivative", "exp": "exponential", "exponentialode": "exponential",
               "thinplate2d": "thinplate", "measure": "identity"}
    kind = aliases.get(kind, kind)
    if kind == "derivative":
        return derivative(int(desc.get("order", 1)))
    if kind == "exponential":
        return exponential([float(r) for r in desc["roots"]])
    if kind == "fractional":
        return fractional(float(desc["gamma"]))
    if kind == "thinplate":
        return thin_plate()
    if kind == "identity":
        return identity()
    raise ValueError(f"unknown operator kind {desc['kind']!r}")


# --------------------------------------------------------------------------
# null-space functions


class ExpMonomial:
    """``p(x) = x^j exp(alpha x) / j!``; plain monomial when ``alpha == 0``."""

    kinks: tuple = ()

    def __init__(self, power: int, alpha: float = 0.0):
        self.power = int(power)
        self.alpha = float(alpha)
        self._fact = math.factorial(self.power)

    def __call__(self, x):
        x = np.asarray(x, dtype=float)
        out = x**self.power / self._fact
        if self.alpha != 0.0:
            out = out * np.exp(self.alpha * x)
        return out

    def derivative(self, x, order: int = 1):
        # Leibniz rule on (x^j / j!) * exp(alpha x)
        x = np.asarray(x, dtype=float)
        j, a, k = self.power, self.alpha, int(order)
        out = np.zeros_like(x)
        for i in range(min(k, j) + 1):
            coef = math.comb(k, i) * (a ** (k - i) if k - i else 1.0)
            if coef == 0.0:
                continue
            out = out + coef * x ** (j - i) / math.factorial(j - i)
        if a != 0.0:
            out = out * np.exp(a * x)
        return out

    def __repr__(self):
        if self.alpha == 0.0:
            return f"ExpMonomial(x^{self.power}/{self.power}!)"
        return f"ExpMonomial(x^{self.power} e^({self.alpha:g}x)/{self.power}!)"


class AffineMonomial2D:
    """One of ``1``, ``x``, ``y`` on the plane (index 0, 1, 2)."""

    kinks: tuple = ()

    def __init__(self, index: int):
        if index not in (0, 1, 2):
            raise ValueError("index must be 0, 1 or 2")
        self.index = index

    def __call__(self, x):
        x = np.asarray(x, dtype=float)
        if self.index == 0:
            return np.ones(x.shape[:-1])
        return x[..., self.index - 1].copy()

    def derivative(self, x, order=1):
        raise NotImplementedError("derivatives of 2-D null-space functions are not needed")

    def __repr__(self):
        return f"AffineMonomial2D({['1', 'x', 'y'][self.index]})"


class NullSpaceBasis(tuple):
    """Tuple of evaluable null-space functions ``p_1 .. p_N0``."""

    def evaluate(self, x) -> np.ndarray:
        """Matrix with entry ``[i, n] = p_n(x_i)``."""
        x = np.asarray(x, dtype=float)
        if not len(self):
            return np.zeros(x.shape[:1] + (0,))
        return np.stack([p(x) for p in self], axis=-1)


def nullspace_basis(op: SplineAdmissibleOperator) -> NullSpaceBasis:
    """Closed-form basis of the null space of ``op``."""
    if op.kind == "derivative":
        return NullSpaceBasis(ExpMonomial(j) for j in range(op.order))
    if op.kind == "fractional":
        return NullSpaceBasis(ExpMonomial(j) for j in range(op.nullspace_dim))
    if op.kind == "exponential":
        return NullSpaceBasis(
            ExpMonomial(j, a) for a, m in op.root_groups() for j in range(m)
        )
    if op.kind == "thinplate":
        return NullSpaceBasis(AffineMonomial2D(i) for i in range(3))
    return NullSpaceBasis()


def _exponential_green_coeffs(op: SplineAdmissibleOperator) -> np.ndarray:
    # rho = sum c_n p_n on x >= 0 with rho^(k)(0+) = 0 for k < N-1 and
    # rho^(N-1)(0+) = 1; solve the Wronskian system at the origin.
    basis = nullspace_basis(op)
    n = len(basis)
    wronski = np.array([[float(p.derivative(0.0, k)) for p in basis] for k in range(n)])
    rhs = np.zeros(n)
    rhs[-1] = 1.0
    return np.linalg.solve(wronski, rhs)


_EXP_CACHE: dict = {}


def _exp_coeffs(op):
    c = _EXP_CACHE.get(op)
    if c is None:
        c = _EXP_CACHE[op] = _exponential_green_coeffs(op)
    return c


def green_derivative(op: SplineAdmissibleOperator, x, order: int = 0):
    """``order``-th derivative of the Green's function (right-continuous).

    Defined wherever ``rho`` is ``order`` times differentiable away from the
    origin; at the origin the right limit is returned.
    """
    if op.kind == "identity":
        raise IdentityHasNoGreenFunction("the identity operator has rho = delta")
    x = np.asarray(x, dtype=float)
    k = int(order)
    if op.kind == "derivative":
        p = op.order - 1 - k
        if p < 0:
            raise ValueError(f"rho of {op} is not {k} times differentiable")
        pos = x >= 0
        xp = np.where(pos, x, 0.0)
        return np.where(pos, xp**p / math.factorial(p), 0.0)
    if op.kind == "exponential":
        if k > len(op.roots) - 1:
            raise ValueError(f"rho of {op} is not {k} times differentiable")
        pos = x >= 0
        xp = np.where(pos, x, 0.0)
        coeffs = _exp_coeffs(op)
        val = sum(c * p.derivative(xp, k) for c, p in zip(coeffs, nullspace_basis(op)))
        return np.where(pos, val, 0.0)
    if op.kind == "fractional":
        e = op.gamma - 1.0 - k
        coef = _falling(op.gamma, k) / math.gamma(op.gamma)
        pos = x > 0
        xp = np.where(pos, x, 1.0)
        at0 = coef if e == 0 else (0.0 if e > 0 else math.inf)
        return np.where(pos, coef * xp**e, np.where(x == 0, at0, 0.0))
    if op.kind == "thinplate":
        if k:
            raise ValueError("only values of the thin-plate Green's function are provided")
        r2 = np.sum(x * x, axis=-1)
        safe = np.where(r2 > 0, r2, 1.0)
        return np.where(r2 > 0, 0.5 * r2 * np.log(safe), 0.0) / (8.0 * math.pi)
    raise AssertionError(op.kind)


def _falling(g, k):
    out = 1.0
    for i in range(k):
        out *= g - 1 - i
    return out


def green_eval(op: SplineAdmissibleOperator, x):
    """Green's function ``rho_L(x)``.

    Causal 1-D operators vanish for ``x < 0``; ``rho_D`` is the right-continuous
    Heaviside step. For the thin-plate operator ``x`` has a trailing axis of
    length 2 and ``rho(0) = 0``.
    """
    out = green_derivative(op, x, 0)
    return float(out) if np.ndim(out) == 0 else out


class GreenAtom:
    """Shifted Green's function ``x -> rho_L(x - tau)`` as an evaluable."""

    def __init__(self, op: SplineAdmissibleOperator, tau):
        self.op = op
        self.tau = tau
        self.kinks = (float(tau),) if np.ndim(tau) == 0 and op.dimension == 1 else ()

    def __call__(self, x):
        return green_derivative(self.op, np.asarray(x, dtype=float) - self.tau, 0)

    def derivative(self, x, order=1):
        return green_derivative(self.op, np.asarray(x, dtype=float) - self.tau, order)


def growth_order(op: SplineAdmissibleOperator) -> int:
    """Smallest integer ``n`` with ``rho_L`` in ``L_{inf,n}``; -1 for the identity."""
    if op.kind == "derivative":
        return op.order - 1
    if op.kind == "exponential":
        zeros = sum(1 for r in op.roots if r == 0.0)
        return max(zeros - 1, 0)
    if op.kind == "fractional":
        return max(int(math.ceil(op.gamma - 1.0 - 1e-12)), 0)
    if op.kind == "thinplate":
        # r^2 log r / (1 + r)^n is bounded only for n >= 3
        return 3
    return -1


def _grunwald_weights(gamma: float, n: int) -> np.ndarray:
    w = np.empty(n)
    w[0] = 1.0
    for k in range(1, n):
        w[k] = w[k - 1] * (1.0 - (gamma + 1.0) / k)
    return w


def _laplacian_5pt(u: np.ndarray, h: float) -> np.ndarray:
    return (u[2:, 1:-1] + u[:-2, 1:-1] + u[1:-1, 2:] + u[1:-1, :-2] - 4.0 * u[1:-1, 1:-1]) / (h * h)


def apply_operator_fd(op: SplineAdmissibleOperator, samples, h: float) -> np.ndarray:
    """Finite-difference approximation of ``L f`` from uniform samples of ``f``.

    ============  ==========================================  ===============
    kind          stencil                                     output length
    ============  ==========================================  ===============
    derivative    N-th forward difference / h^N                n - N
    exponential   product of (f[i+1] - e^(a h) f[i]) / h       n - N
    fractional    Gruenwald-Letnikov, truncated at left end    n
    thinplate     5-point Laplacian applied twice (2-D)        (n-4, m-4)
    identity      samples unchanged                            n
    ============  ==========================================  ===============

    Output sample ``i`` of the 1-D stencils is attached to grid point ``i``
    (forward alignment). The exponential stencil annihilates the exponential
    monomials exactly.
    """
    if not h > 0:
        raise ValueError("h must be positive")
    f = np.asarray(samples, dtype=float)
    if op.kind == "thinplate":
        if f.ndim != 2 or min(f.shape) < 5:
            raise GridTooShort("thin-plate stencil needs a 2-D grid of at least 5 x 5")
        return _laplacian_5pt(_laplacian_5pt(f, h), h)
    if f.ndim != 1:
        raise ValueError("1-D operators take a 1-D array of samples")
    if op.kind == "identity":
        return f.copy()
    if op.kind == "derivative":
        if f.size < op.order + 1:
            raise GridTooShort(f"{op} needs at least {op.order + 1} samples")
        return np.diff(f, op.order) / h**op.order
    if op.kind == "exponential":
        n = len(op.roots)
        if f.size < n + 1:
            raise GridTooShort(f"{op} needs at least {n + 1} samples")
        out = f
        for a in op.roots:
            out = (out[1:] - math.exp(a * h) * out[:-1]) / h
        return out
    if op.kind == "fractional":
        if f.size < 2:
            raise GridTooShort("fractional stencil needs at least 2 samples")
        w = _grunwald_weights(op.gamma, f.size)
        return np.convolve(f, w)[: f.size] / h**op.gamma
    raise AssertionError(op.kind)
