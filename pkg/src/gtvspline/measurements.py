"""Linear measurement functionals and their pairings with dictionary atoms.

A functional ``nu`` is applied to any *evaluable*: an object that is callable
on numpy arrays and optionally exposes ``derivative(x, order)`` and a tuple of
``kinks`` (points where it is not smooth, used to split quadrature panels).
Green's-function atoms, null-space functions and splines all follow this
convention.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Iterable, Sequence

import numpy as np

from .errors import InadmissibleFunctional
from .operators import GreenAtom, SplineAdmissibleOperator, green_eval
from .quadrature import breakpoints, composite_rule, integrate

__all__ = [
    "Profile",
    "box_profile",
    "triangle_profile",
    "gaussian_profile",
    "Functional",
    "IdealSample",
    "QuasiIdealSample",
    "ApertureSample",
    "DerivativeAtPoint",
    "WeightedIntegral",
    "Combination",
    "moment",
    "point_sample",
    "act_on_atom",
    "act_on_null",
    "decay_admissible",
    "DEFAULT_MOLLIFIER_WIDTH",
]

DEFAULT_MOLLIFIER_WIDTH = 1e-2


@dataclass(frozen=True)
class Profile:
    """Compactly supported aperture kernel ``fn`` on ``[lo, hi]``."""

    fn: Callable[[np.ndarray], np.ndarray]
    lo: float
    hi: float
    kinks: tuple = ()
    name: str = "custom"

    def __call__(self, x):
        x = np.asarray(x, dtype=float)
        inside = (x >= self.lo) & (x <= self.hi)
        return np.where(inside, self.fn(np.clip(x, self.lo, self.hi)), 0.0)

    def mass(self) -> float:
        return integrate(self.fn, self.lo, self.hi, self.kinks)


def box_profile(width: float = 1.0) -> Profile:
    """Unit-mass indicator of ``[-width/2, width/2]``."""
    w = float(width)
    return Profile(lambda x: np.full_like(x, 1.0 / w), -w / 2, w / 2, (), f"box({w:g})")


def triangle_profile(width: float = DEFAULT_MOLLIFIER_WIDTH) -> Profile:
    """Unit-mass symmetric hat supported on ``[-width/2, width/2]``."""
    w = float(width)
    half = w / 2

    def fn(x):
        return np.maximum(half - np.abs(x), 0.0) / half**2

    return Profile(fn, -half, half, (0.0,), f"triangle({w:g})")


def gaussian_profile(sigma: float, truncate: float = 6.0) -> Profile:
    s = float(sigma)
    # normalized on the truncated support so the mass is exactly one
    c = 1.0 / (s * math.sqrt(2.0 * math.pi) * math.erf(truncate / math.sqrt(2.0)))
    return Profile(lambda x: c * np.exp(-0.5 * (x / s) ** 2), -truncate * s, truncate * s,
                   (), f"gaussian({s:g})")


class Functional:
    """Base class of the measurement functionals."""

    #: true for functionals acting through point values/derivatives only
    pointwise = False

    def apply(self, f) -> float:
        raise NotImplementedError

    def density(self, x):
        raise InadmissibleFunctional(f"{self!r} has no density")

    def support(self) -> tuple[float, float]:
        raise NotImplementedError

    def check_admissible(self, op: SplineAdmissibleOperator) -> None:
        pass

    def act_on_atom(self, op: SplineAdmissibleOperator, tau) -> float:
        """``<nu, rho_L(. - tau)>``; for the identity the atom is ``delta(. - tau)``."""
        self.check_admissible(op)
        if op.kind == "identity":
            return float(self.density(tau))
        return float(self.apply(GreenAtom(op, tau)))

    def act_on_null(self, p) -> float:
        return float(self.apply(p))

    def row(self, op: SplineAdmissibleOperator, taus) -> np.ndarray:
        """Atom actions for every grid point in ``taus``."""
        self.check_admissible(op)
        taus = np.asarray(taus, dtype=float)
        if op.kind == "identity":
            return np.asarray(self.density(taus), dtype=float)
        return np.array([self.act_on_atom(op, t) for t in taus])

    # linear combinations
    def __mul__(self, c):
        return Combination(((float(c), self),))

    __rmul__ = __mul__

    def __add__(self, other):
        return Combination(_terms(self) + _terms(other))

    def __neg__(self):
        return self * -1.0

    def __sub__(self, other):
        return self + (-other)


def _terms(nu):
    return nu.terms if isinstance(nu, Combination) else ((1.0, nu),)


class IdealSample(Functional):
    """``f -> f(x0)``; needs a continuous Green's function."""

    pointwise = True

    def __init__(self, x0):
        self.x0 = float(x0) if np.ndim(x0) == 0 else np.asarray(x0, dtype=float)

    def check_admissible(self, op):
        if op.kind == "identity" or not op.holder_exponent > 0:
            raise InadmissibleFunctional(
                f"ideal sampling needs a continuous Green's function; {op} has "
                f"Hoelder exponent {op.holder_exponent:g}. Use QuasiIdealSample."
            )

    def apply(self, f):
        return f(self.x0)

    def row(self, op, taus):
        self.check_admissible(op)
        taus = np.asarray(taus, dtype=float)
        return np.asarray(green_eval(op, self.x0 - taus), dtype=float)

    def support(self):
        return (float(np.min(self.x0)), float(np.max(self.x0)))

    def __repr__(self):
        return f"IdealSample({self.x0!r})"


class DerivativeAtPoint(Functional):
    """``f -> f^(order)(x0)`` (so ``order=1`` at 0 is the distribution ``-delta'``)."""

    pointwise = True

    def __init__(self, x0: float, order: int = 0):
        self.x0 = float(x0)
        self.order = int(order)

    def check_admissible(self, op):
        if op.kind in ("identity", "thinplate"):
            raise InadmissibleFunctional(f"derivative functionals are not defined for {op}")
        if op.kind in ("derivative", "exponential") and self.order > op.nullspace_dim - 1:
            raise InadmissibleFunctional(f"{op} atoms are not {self.order} times differentiable")

    def apply(self, f):
        if self.order == 0:
            return f(self.x0)
        return f.derivative(self.x0, self.order)

    def support(self):
        return (self.x0, self.x0)

    def __repr__(self):
        return f"DerivativeAtPoint({self.x0!r}, order={self.order})"


class ApertureSample(Functional):
    """``f -> integral profile(x - x0) f(x) dx``."""

    def __init__(self, profile: Profile, x0: float):
        self.profile = profile
        self.x0 = float(x0)

    def density(self, x):
        return self.profile(np.asarray(x, dtype=float) - self.x0)

    def support(self):
        return (self.x0 + self.profile.lo, self.x0 + self.profile.hi)

    def _kinks(self):
        return [self.x0 + k for k in self.profile.kinks]

    def row(self, op, taus):
        self.check_admissible(op)
        if op.kind == "identity" or op.dimension != 1:
            return super().row(op, taus)
        lo, hi = self.support()
        x0, fn = self.x0, self.profile.fn
        return _smooth_row(self, op, taus, lambda x: fn(x - x0), lo, hi, self._kinks())

    def apply(self, f, panels: int = 1):
        lo, hi = self.support()
        fn = self.profile.fn
        x0 = self.x0
        kinks = self._kinks() + list(getattr(f, "kinks", ()))
        return integrate(lambda x: fn(x - x0) * f(x), lo, hi, kinks, panels=panels)

    def __repr__(self):
        return f"ApertureSample({self.profile.name}, x0={self.x0!r})"


def _smooth_row(nu, op, taus, weight, lo, hi, kinks, nodes=32):
    """Atom actions ``integral weight(x) rho(x - tau) dx`` for many ``tau`` at once.

    Atoms whose singular point lies outside ``(lo, hi)`` are smooth on every
    panel; a fixed rule and its doubled version are applied to all of them in
    one matrix product and the adaptive integrator takes over wherever the two
    disagree or the atom's kink falls inside the support.
    """
    taus = np.asarray(taus, dtype=float)
    out = np.empty(taus.shape)
    edges = breakpoints(lo, hi, kinks)
    outside = (taus <= lo) | (taus >= hi)
    idx = np.flatnonzero(outside)
    if idx.size:
        est = []
        for n in (nodes, 2 * nodes):
            xs, ws = composite_rule(edges, n)
            vals = np.asarray(green_eval(op, xs[:, None] - taus[None, idx]), dtype=float)
            est.append((ws * weight(xs)) @ vals)
        out[idx] = est[1]
        redo = idx[np.abs(est[0] - est[1]) > 1e-11 * np.maximum(1.0, np.abs(est[1]))]
        outside[redo] = False
    for i in np.flatnonzero(~outside):
        out[i] = nu.act_on_atom(op, float(taus[i]))
    return out


class QuasiIdealSample(ApertureSample):
    """Ideal sample blurred by a narrow unit-mass triangle of full width ``width``."""

    def __init__(self, x0: float, width: float = DEFAULT_MOLLIFIER_WIDTH):
        super().__init__(triangle_profile(width), x0)
        self.width = float(width)

    def __repr__(self):
        return f"QuasiIdealSample({self.x0!r}, width={self.width!r})"


class WeightedIntegral(Functional):
    """``f -> integral_{lo}^{hi} weight(x) f(x) dx``."""

    def __init__(self, weight: Callable, lo: float, hi: float, kinks: Iterable[float] = (),
                 name: str = "weight"):
        self.weight = weight
        self.lo = float(lo)
        self.hi = float(hi)
        self.kinks = tuple(float(k) for k in kinks)
        self.name = name

    def density(self, x):
        x = np.asarray(x, dtype=float)
        inside = (x >= self.lo) & (x <= self.hi)
        return np.where(inside, self.weight(np.clip(x, self.lo, self.hi)), 0.0)

    def support(self):
        return (self.lo, self.hi)

    def row(self, op, taus):
        self.check_admissible(op)
        if op.kind == "identity" or op.dimension != 1:
            return super().row(op, taus)
        return _smooth_row(self, op, taus, self.weight, self.lo, self.hi, self.kinks)

    def apply(self, f, panels: int = 1):
        w = self.weight
        kinks = list(self.kinks) + list(getattr(f, "kinks", ()))
        return integrate(lambda x: w(x) * f(x), self.lo, self.hi, kinks, panels=panels)

    def __repr__(self):
        return f"WeightedIntegral({self.name}, [{self.lo:g}, {self.hi:g}])"


def moment(m: int, lo: float = 0.0, hi: float = 1.0) -> WeightedIntegral:
    """Monomial moment ``f -> integral_lo^hi x^m f(x) dx``."""
    m = int(m)
    return WeightedIntegral(lambda x: np.asarray(x, dtype=float) ** m, lo, hi, name=f"x^{m}")


class Combination(Functional):
    """Finite linear combination ``sum_i c_i nu_i``."""

    def __init__(self, terms: Sequence[tuple[float, Functional]]):
        self.terms = tuple((float(c), nu) for c, nu in terms)
        self.pointwise = all(nu.pointwise for _, nu in self.terms)

    def check_admissible(self, op):
        for c, nu in self.terms:
            if c != 0.0:
                nu.check_admissible(op)

    def apply(self, f):
        return sum(c * nu.apply(f) for c, nu in self.terms if c != 0.0)

    def density(self, x):
        return sum(c * nu.density(x) for c, nu in self.terms if c != 0.0)

    def row(self, op, taus):
        taus = np.asarray(taus, dtype=float)
        out = np.zeros(taus.shape[:1] if op.dimension == 2 else taus.shape)
        for c, nu in self.terms:
            if c != 0.0:
                out = out + c * nu.row(op, taus)
        return out

    def support(self):
        sup = [nu.support() for c, nu in self.terms if c != 0.0] or [(0.0, 0.0)]
        return (min(s[0] for s in sup), max(s[1] for s in sup))

    def __repr__(self):
        return " + ".join(f"{c:g}*{nu!r}" for c, nu in self.terms)


def point_sample(op: SplineAdmissibleOperator, x0: float,
                 width: float = DEFAULT_MOLLIFIER_WIDTH) -> Functional:
    """Ideal sample when ``op`` allows it, quasi-ideal sample otherwise."""
    if op.holder_exponent > 0:
        return IdealSample(x0)
    return QuasiIdealSample(x0, width)


def act_on_atom(nu: Functional, op: SplineAdmissibleOperator, tau) -> float:
    return nu.act_on_atom(op, tau)


def act_on_null(nu: Functional, p) -> float:
    return nu.act_on_null(p)


def decay_admissible(nu: Functional, n0: int) -> tuple[bool, float]:
    """Weighted L1 norm ``integral |nu(x)| (1 + |x|)^n0 dx`` of a functional density.

    Every density here has compact support, so the norm is finite whenever the
    quadrature converges. Point functionals have no density; their admissibility
    is decided by the Hoelder rule in :meth:`IdealSample.check_admissible`.
    """
    if nu.pointwise:
        raise TypeError(f"{nu!r} has no density; admissibility follows the Hoelder rule")
    lo, hi = nu.support()
    kinks = [0.0]
    for _, part in _terms(nu):
        if isinstance(part, ApertureSample):
            kinks += part._kinks()
        elif isinstance(part, WeightedIntegral):
            kinks += list(part.kinks)
    n0 = max(int(n0), 0)
    est = integrate(lambda x: np.abs(nu.density(x)) * (1.0 + np.abs(x)) ** n0, lo, hi, kinks)
    return bool(np.isfinite(est)), float(est)
