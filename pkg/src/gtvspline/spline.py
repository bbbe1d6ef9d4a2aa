"""Nonuniform L-splines ``s(x) = sum_k a_k rho_L(x - x_k) + sum_n b_n p_n(x)``."""

from __future__ import annotations

import json
from pathlib import Path
from typing import Sequence

import numpy as np

from .errors import IdentityHasNoGreenFunction
from .io import dumps, write_csv
from .measure import DiscreteMeasure
from .operators import (
    SplineAdmissibleOperator,
    apply_operator_fd,
    from_descriptor,
    green_derivative,
    nullspace_basis,
)

__all__ = ["NonuniformSpline", "from_report"]


class NonuniformSpline:
    """Spline with innovation ``L s = sum_k a_k delta(. - x_k)`` and null part ``b``.

    Knots are canonicalized on construction (sorted, coincident knots merged).
    Instances are immutable and callable on numpy arrays.
    """

    def __init__(self, operator: SplineAdmissibleOperator, knots=(), weights=(), null_coeffs=()):
        innov = DiscreteMeasure(knots, weights)
        self.operator = operator
        self.knots = innov.locations
        self.weights = innov.weights
        b = np.array(null_coeffs, dtype=float).reshape(-1)
        if b.size == 0 and operator.nullspace_dim:
            b = np.zeros(operator.nullspace_dim)
        if b.size != operator.nullspace_dim:
            raise ValueError(f"{operator} needs {operator.nullspace_dim} null-space coefficients")
        b.flags.writeable = False
        self.null_coeffs = b
        self.basis = nullspace_basis(operator)

    @property
    def kinks(self):
        return tuple(float(k) for k in self.knots) if self.knots.ndim == 1 else ()

    @property
    def K(self) -> int:
        return self.weights.size

    def __call__(self, x):
        return self.derivative(x, 0)

    def eval(self, x):
        return self(x)

    def derivative(self, x, order: int = 1):
        op = self.operator
        if op.kind == "identity":
            raise IdentityHasNoGreenFunction("a measure has no pointwise values")
        x = np.asarray(x, dtype=float)
        if op.dimension == 2:
            flat = x.reshape(-1, 2)
            diff = flat[:, None, :] - self.knots[None, :, :]
            out = green_derivative(op, diff, order) @ self.weights if self.K else np.zeros(len(flat))
            for b, p in zip(self.null_coeffs, self.basis):
                out = out + b * p(flat)
            return out.reshape(x.shape[:-1])
        flat = x.reshape(-1)
        out = np.zeros(flat.size)
        if self.K:
            out = green_derivative(op, flat[:, None] - self.knots[None, :], order) @ self.weights
        for b, p in zip(self.null_coeffs, self.basis):
            out = out + b * (p(flat) if order == 0 else p.derivative(flat, order))
        return out.reshape(x.shape) if x.ndim else float(out[0])

    def innovation(self) -> DiscreteMeasure:
        return DiscreteMeasure(self.knots, self.weights)

    def gtv(self) -> float:
        """``||L s||_M = sum_k |a_k|``."""
        return float(np.sum(np.abs(self.weights)))

    def gtv_numeric(self, domain: tuple[float, float], h: float) -> float:
        """``h * sum |L_h s|`` on a uniform grid of step ``h`` over ``domain``."""
        lo, hi = map(float, domain)
        if not h > 0:
            raise ValueError("h must be positive")
        n = int(np.floor((hi - lo) / h + 1e-9)) + 1
        xs = lo + h * np.arange(n)
        lf = apply_operator_fd(self.operator, self(xs), h)
        return float(h * np.sum(np.abs(lf)))

    def measure(self, functionals: Sequence) -> np.ndarray:
        """Measurement vector ``nu(s)`` through atom and null-space pairings."""
        out = np.zeros(len(functionals))
        for m, nu in enumerate(functionals):
            val = sum(a * nu.act_on_atom(self.operator, x) for x, a in zip(self.knots, self.weights))
            val += sum(b * nu.act_on_null(p) for b, p in zip(self.null_coeffs, self.basis))
            out[m] = val
        return out

    # serialization
    def to_dict(self) -> dict:
        return {
            "operator": self.operator.descriptor(),
            "knots": self.knots.tolist(),
            "weights": self.weights.tolist(),
            "null_coeffs": self.null_coeffs.tolist(),
        }

    def to_json(self) -> str:
        return dumps(self.to_dict())

    @classmethod
    def from_dict(cls, d: dict) -> "NonuniformSpline":
        return cls(from_descriptor(d["operator"]), d["knots"], d["weights"], d["null_coeffs"])

    @classmethod
    def from_json(cls, text: str) -> "NonuniformSpline":
        return cls.from_dict(json.loads(text))

    def write_samples_csv(self, path, xs) -> None:
        xs = np.asarray(xs, dtype=float)
        write_csv(path, ("x", "value"), zip(xs, self(xs)))

    def write_innovation_csv(self, path) -> None:
        write_csv(path, ("knot", "weight"), zip(self.knots, self.weights))

    def __repr__(self):
        return (f"NonuniformSpline({self.operator}, knots={self.knots.tolist()}, "
                f"weights={self.weights.tolist()}, null_coeffs={self.null_coeffs.tolist()})")


def from_report(problem, report, weight_tol: float = 1e-8, merge_radius: float | None = None) -> NonuniformSpline:
    """Spline built from a solver report: pruned grid knots plus its null coefficients."""
    from .solvers import prune_knots

    innov = prune_knots(report, problem.grid, weight_tol, merge_radius)
    return NonuniformSpline(problem.operator, innov.locations, innov.weights, report.b)
