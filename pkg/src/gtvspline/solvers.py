"""Optimization engines for the discretized gTV problems.

* :func:`solve_interpolation_lp` -- ``min ||a||_1`` s.t. ``G a + P b = y`` (or
  a box) by a dense primal simplex with Bland's rule.
* :func:`solve_penalized` -- ``min 1/2 ||y - G a - P b||^2 + lam ||a||_1``,
  exact homotopy by default, accelerated proximal gradient on request.
* :func:`solve_constrained` -- the same fit with the residual matched to a
  ball radius by bisection on ``log lam``.
* :func:`lp_oracle_bruteforce` -- exhaustive vertex enumeration for tiny
  instances, used to cross-check the simplex.
"""

from __future__ import annotations

import itertools
import logging
import math
from dataclasses import dataclass, field

import numpy as np

from .errors import (
    BracketFailure,
    CyclingDetected,
    InfeasibleProblem,
    MaxIterReached,
    TooLarge,
)
from .io import dumps
from .measure import DiscreteMeasure
from .problem import ConstraintSet, DiscretizedProblem

log = logging.getLogger(__name__)

__all__ = [
    "SolveReport",
    "solve",
    "solve_interpolation_lp",
    "solve_penalized",
    "solve_constrained",
    "lambda_max",
    "lp_oracle_bruteforce",
    "prune_knots",
    "box_feasibility_residual",
    "FEAS_TOL",
    "WEIGHT_TOL",
]

FEAS_TOL = 1e-8
WEIGHT_TOL = 1e-8
PIVOT_TOL = 1e-9
RATIO_PIVOT_TOL = 1e-7
COST_TOL = 1e-9
MAX_SIMPLEX_ITER = 100_000


@dataclass
class SolveReport:
    """Solution ``(a, b)`` of a discretized problem.

    ``objective`` is ``beta = sum |a_n|``; ``residual`` is
    ``||y - G a - P b||_2`` measured against the center of the constraint set.
    """

    a: np.ndarray
    b: np.ndarray
    objective: float
    residual: float
    iterations: int
    status: str = "Optimal"
    method: str = "simplex"
    lam: float | None = None
    #: simplex only: grid indices of the atoms in the final basis
    basis: tuple = ()
    #: simplex only: whether every null-space coefficient is a basic variable
    null_in_basis: bool = False
    extra: dict = field(default_factory=dict)

    @property
    def nnz(self) -> int:
        return int(np.count_nonzero(self.a))

    def to_dict(self) -> dict:
        d = {
            "status": self.status,
            "method": self.method,
            "objective": self.objective,
            "residual": self.residual,
            "iterations": self.iterations,
            "nnz": self.nnz,
            "lambda": self.lam,
            "null_in_basis": self.null_in_basis,
            "a": self.a.tolist(),
            "b": self.b.tolist(),
        }
        return d

    def to_json(self) -> str:
        return dumps(self.to_dict())


def _report(problem: DiscretizedProblem, a, b, iterations, **kw) -> SolveReport:
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float).reshape(-1)
    res = float(np.linalg.norm(problem.y - problem.forward(a, b)))
    return SolveReport(a, b, float(np.sum(np.abs(a))), res, int(iterations), **kw)


# --------------------------------------------------------------------------
# simplex


class _RevisedSimplex:
    """Revised simplex on ``[A | D]`` with artificial columns ``D`` (signed identity).

    The basis matrix is refactored from the original columns at every
    iteration, so no rounding accumulates across pivots. Free variables are
    brought into the basis first and never leave it (they are skipped in the
    ratio test); artificial columns never re-enter once they have left.
    """

    def __init__(self, A, rhs, free, max_iter):
        self.A0 = np.asarray(A, dtype=float)
        self.rhs = np.asarray(rhs, dtype=float)
        self.m, self.n = self.A0.shape
        sign = np.where(self.rhs < 0, -1.0, 1.0)
        self.art_sign = sign
        self.free = list(free)
        self.basis = [self.n + r for r in range(self.m)]
        self.free_basic: list[int] = []
        self.excluded: set[int] = set()
        self.iterations = 0
        self.max_iter = max_iter

    def column(self, j):
        if j < self.n:
            return self.A0[:, j]
        e = np.zeros(self.m)
        e[j - self.n] = self.art_sign[j - self.n]
        return e

    def B(self):
        return np.column_stack([self.column(j) for j in self.basis])

    def xB(self):
        return np.linalg.solve(self.B(), self.rhs)

    def pivot_free(self):
        for j in self.free:
            w = np.linalg.solve(self.B(), self.A0[:, j])
            cand = [r for r, bj in enumerate(self.basis) if bj >= self.n]
            if not cand:
                self.excluded.add(j)
                continue
            vals = np.abs(w[cand])
            k = int(np.argmax(vals))
            if vals[k] <= PIVOT_TOL * max(1.0, float(np.max(np.abs(self.A0[:, j])))):
                # column depends on free columns already in the basis
                self.excluded.add(j)
                continue
            self.basis[cand[k]] = j
            self.free_basic.append(j)
        # artificials must start nonnegative: flip the sign of any negative one
        x = self.xB()
        for r, bj in enumerate(self.basis):
            if bj >= self.n and x[r] < 0:
                self.art_sign[bj - self.n] *= -1.0

    def _ratio_test(self, w, x):
        best, leave = math.inf, -1
        free = set(self.free_basic)
        # pivots much smaller than the direction itself come from near-duplicate
        # dictionary columns and would make the next basis numerically singular
        tol = RATIO_PIVOT_TOL * max(1.0, float(np.max(np.abs(w))))
        for r in np.flatnonzero(w > tol):
            r = int(r)
            if self.basis[r] in free:
                continue
            ratio = max(x[r], 0.0) / w[r]
            if ratio < best - 1e-14 or (abs(ratio - best) <= 1e-14 and self.basis[r] < self.basis[leave]):
                best, leave = ratio, r
        return leave, best

    def run(self, cost):
        """Bland's-rule iterations for ``min cost @ x`` (cost over all columns)."""
        cost = np.asarray(cost, dtype=float)
        colnorm = np.linalg.norm(self.A0, axis=0)
        seen = set()
        prev = math.inf
        while True:
            B = self.B()
            x = np.linalg.solve(B, self.rhs)
            pi = np.linalg.solve(B.T, cost[self.basis])
            d = cost[: self.n] - self.A0.T @ pi
            # reduced costs below the rounding level of c_j - pi @ A_j are noise
            tol = COST_TOL * (np.abs(cost[: self.n]) + np.linalg.norm(pi) * colnorm)
            obj = float(cost[self.basis] @ x)
            if obj >= prev - 1e-14 * abs(obj):
                key = tuple(sorted(self.basis))
                if key in seen:
                    raise CyclingDetected("basis repeated without objective decrease")
                seen.add(key)
            else:
                seen.clear()
            prev = obj
            in_basis = set(self.basis)
            entering, leave, best = -1, -1, math.inf
            for j in np.flatnonzero(d < -tol):
                j = int(j)
                if j in in_basis or j in self.excluded:
                    continue
                w = np.linalg.solve(B, self.A0[:, j])
                leave, best = self._ratio_test(w, x)
                if leave >= 0:
                    entering = j
                    break
            if entering < 0:
                return
            self.basis[leave] = entering
            self.iterations += 1
            if self.iterations > self.max_iter:
                raise MaxIterReached(f"simplex exceeded {self.max_iter} iterations")


def _simplex(A, rhs, cost, free, max_iter=MAX_SIMPLEX_ITER, phase1_only=False):
    """``min cost @ x`` s.t. ``A x = rhs``, ``x >= 0`` except the ``free`` columns.

    Returns ``(x, basis, iterations, free_basic, infeasibility)`` where
    ``basis`` lists the original columns in the final basis.
    """
    m, n = A.shape
    lp = _RevisedSimplex(A, rhs, free, max_iter)
    lp.pivot_free()
    c1 = np.concatenate([np.zeros(n), np.ones(m)])
    lp.run(c1)
    xb = lp.xB()
    infeas = float(sum(abs(v) for v, bj in zip(xb, lp.basis) if bj >= n))
    if phase1_only:
        return None, None, lp.iterations, lp.free_basic, infeas
    scale = max(1.0, float(np.max(np.abs(rhs), initial=0.0)))
    if infeas > FEAS_TOL * scale:
        raise InfeasibleProblem(f"no point of the grid dictionary meets the constraints "
                                f"(phase-one infeasibility {infeas:.3g})")
    # swap zero-level artificials for real columns where possible; the rest
    # sit on redundant rows and stay at zero
    for r in range(m):
        if lp.basis[r] < n:
            continue
        Binv_row = np.linalg.solve(lp.B().T, np.eye(m)[r])
        in_basis = set(lp.basis)
        for j in range(n):
            if j in in_basis or j in lp.excluded:
                continue
            if abs(Binv_row @ A[:, j]) > PIVOT_TOL:
                lp.basis[r] = j
                break
    c2 = np.concatenate([np.asarray(cost, dtype=float), np.zeros(m)])
    lp.run(c2)
    xb = lp.xB()
    x = np.zeros(n)
    cols = []
    for v, bj in zip(xb, lp.basis):
        if bj < n:
            x[bj] = v
            cols.append(bj)
    nonneg = np.setdiff1d(np.arange(n), free)
    x[nonneg] = np.where(x[nonneg] < 1e-13, 0.0, x[nonneg])
    return x, tuple(cols), lp.iterations, lp.free_basic, infeas


def _lp_system(problem: DiscretizedProblem):
    G, P = problem.G, problem.P
    M, N = G.shape
    N0 = P.shape[1]
    c = problem.constraint
    if c.kind == "point":
        A = np.hstack([G, -G, P])
        rhs = c.y.copy()
        n_slack = 0
    elif c.kind == "box":
        I = np.eye(M)
        Z = np.zeros((M, M))
        A = np.vstack([
            np.hstack([G, -G, I, Z, P]),
            np.hstack([G, -G, Z, -I, P]),
        ])
        rhs = np.concatenate([c.hi, c.lo])
        n_slack = 2 * M
    else:
        raise ValueError("the LP handles point and box constraints; use solve_constrained")
    free = list(range(2 * N + n_slack, 2 * N + n_slack + N0))
    cost = np.concatenate([np.ones(2 * N), np.zeros(n_slack + N0)])
    return A, rhs, cost, free, n_slack


def _null_complement(P, tol=1e-10):
    """Orthonormal basis of ``range(P)^perp`` and ``rank(P)``."""
    M, N0 = P.shape
    if N0 == 0:
        return np.eye(M), 0
    U, s, _ = np.linalg.svd(P, full_matrices=True)
    r = int(np.sum(s > tol * max(1.0, float(s[0]))))
    return U[:, r:], r


def _point_lp(problem: DiscretizedProblem, max_iter: int) -> SolveReport:
    G, P, y = problem.G, problem.P, problem.y
    N, N0 = problem.N, problem.N0
    U2, r = _null_complement(P)
    Gr, yr = U2.T @ G, U2.T @ y
    # atoms whose measurements lie in range(P) reduce to rounding noise and
    # are dropped; the rest are scaled to unit norm (cost 1 / norm) so that a
    # nearly dependent atom cannot dominate the pivot tolerances
    norms = np.linalg.norm(Gr, axis=0)
    keep = np.flatnonzero(norms > 1e-9 * np.linalg.norm(G, axis=0))
    a = np.zeros(N)
    cols, iters = (), 0
    if Gr.shape[0] and keep.size:
        S = Gr[:, keep] / norms[keep]
        c = 1.0 / norms[keep]
        x, cols, iters, _, _ = _simplex(np.hstack([S, -S]), yr, np.r_[c, c], [], max_iter)
        k = keep.size
        a[keep] = (x[:k] - x[k:]) / norms[keep]
        cols = tuple(int(keep[j % k]) for j in cols)
    elif Gr.shape[0] and np.linalg.norm(yr) > FEAS_TOL * max(1.0, float(np.max(np.abs(y)))):
        raise InfeasibleProblem("data lie outside the span of the dictionary and the null space")
    b = np.linalg.lstsq(P, y - G @ a, rcond=None)[0] if N0 else np.zeros(0)
    atoms = tuple(sorted(set(cols)))
    return _report(problem, a, b, iters, method="simplex", basis=atoms,
                   null_in_basis=N0 > 0 and r == N0)


def solve_interpolation_lp(problem: DiscretizedProblem, max_iter: int = MAX_SIMPLEX_ITER) -> SolveReport:
    """Vertex solution of ``min ||a||_1`` subject to ``G a + P b`` in the constraint set.

    For a point constraint the null-space coefficients are eliminated exactly:
    with ``U2`` an orthonormal basis of ``range(P)^perp`` the simplex solves
    ``min ||a||_1`` s.t. ``U2^T G a = U2^T y`` (``a = a+ - a-``) and
    ``b = P^+ (y - G a)``. A vertex then has at most ``M - rank(P)`` active
    atoms. Box constraints keep ``b`` as free variables that enter the basis
    first and never leave it.
    """
    if problem.constraint.kind == "point":
        return _point_lp(problem, max_iter)
    N, N0 = problem.N, problem.N0
    A, rhs, cost, free, n_slack = _lp_system(problem)
    x, cols, iters, free_basic, _ = _simplex(A, rhs, cost, free, max_iter)
    a = x[:N] - x[N:2 * N]
    b = x[2 * N + n_slack:]
    atoms = tuple(sorted({j % N for j in cols if j < 2 * N}))
    return _report(problem, a, b, iters, method="simplex", basis=atoms,
                   null_in_basis=len(free_basic) == N0 and N0 > 0)


def box_feasibility_residual(problem: DiscretizedProblem) -> float:
    """Phase-one infeasibility (sum of artificials) of the LP system."""
    A, rhs, cost, free, _ = _lp_system(problem)
    return _simplex(A, rhs, cost, free, phase1_only=True)[4]


# --------------------------------------------------------------------------
# penalized least squares


def _projector(P):
    """``(P^+, Q)`` with ``Q = I - P P^+`` the projector onto ``range(P)^perp``."""
    M = P.shape[0]
    if P.shape[1] == 0:
        return np.zeros((0, M)), np.eye(M)
    Pp = np.linalg.pinv(P)
    return Pp, np.eye(M) - P @ Pp


def lambda_max(problem: DiscretizedProblem) -> float:
    """Smallest ``lam`` for which ``a = 0`` solves the penalized problem."""
    _, Q = _projector(problem.P)
    return float(np.max(np.abs(problem.G.T @ (Q @ problem.y)), initial=0.0))


def _lasso_homotopy(A, y, lam, max_iter):
    """Exact LASSO solution ``min 1/2||y - A x||^2 + lam ||x||_1`` by path following.

    Starts at ``lam_max`` with ``x = 0`` and tracks the piecewise-affine path
    through join/drop events down to ``lam``. Ties go to the lowest index.
    """
    M, N = A.shape
    x = np.zeros(N)
    c = A.T @ y
    lam_cur = float(np.max(np.abs(c), initial=0.0))
    if lam >= lam_cur or N == 0:
        return x, 0
    norms = np.linalg.norm(A, axis=0)
    usable = norms > 1e-12 * max(float(np.max(norms)), 1e-300)
    active: list[int] = [int(np.flatnonzero(usable & (np.abs(c) >= lam_cur * (1 - 1e-12)))[0])]
    signs = [float(np.sign(c[active[0]]))]
    blocked: set[int] = set()
    it = 0
    u = d = np.zeros(1)
    while True:
        it += 1
        if it > max_iter:
            raise MaxIterReached(f"homotopy exceeded {max_iter} events")
        AA = A[:, active]
        gram = AA.T @ AA
        s = np.array(signs)
        u = np.linalg.solve(gram, AA.T @ y)
        d = np.linalg.solve(gram, s)
        # along the segment x_A(l) = u - l d, inactive correlations are e + l f
        e = A.T @ (y - AA @ u)
        f = A.T @ (AA @ d)
        upper = lam_cur * (1 - 1e-10)
        best, event, idx = lam, None, -1
        act = set(active)
        for j in np.flatnonzero(usable):
            j = int(j)
            if j in act or j in blocked:
                continue
            for sgn in (1.0, -1.0):
                den = 1.0 - sgn * f[j]
                if abs(den) < 1e-14:
                    continue
                l = sgn * e[j] / den
                if best < l < upper or (l == best and event == "join" and j < idx):
                    best, event, idx = l, "join", j
        for i, j in enumerate(active):
            if abs(d[i]) < 1e-300:
                continue
            l = u[i] / d[i]
            if best < l < upper:
                best, event, idx = l, "drop", i
        if event is None:
            break
        lam_cur = best
        if event == "join":
            trial = active + [idx]
            At = A[:, trial]
            ev = np.linalg.eigvalsh(At.T @ At)
            if ev[0] <= 1e-12 * ev[-1]:
                blocked.add(idx)
                continue
            corr = e[idx] + lam_cur * f[idx]
            active = trial
            signs = signs + [float(np.sign(corr))]
        else:
            del active[idx]
            del signs[idx]
            blocked.clear()
            if not active:
                c = A.T @ y
                j = int(np.argmax(np.abs(c) * usable))
                active, signs = [j], [float(np.sign(c[j]))]
    x[active] = u - lam * d
    return x, it


def _power_lipschitz(A, iters=200, seed=0):
    """``sigma_max(A)^2`` by power iteration on ``A^T A``."""
    v = np.random.default_rng(seed).standard_normal(A.shape[1])
    v /= np.linalg.norm(v)
    val = 0.0
    for _ in range(iters):
        w = A.T @ (A @ v)
        nw = np.linalg.norm(w)
        if nw == 0.0:
            return 0.0
        new = float(v @ w)
        v = w / nw
        if abs(new - val) <= 1e-12 * new:
            val = new
            break
        val = new
    return val


def _fista(G, P, y, lam, max_iter):
    """Accelerated proximal gradient with soft thresholding on ``a`` only."""
    M, N = G.shape
    A = np.hstack([G, P])
    L = 1.01 * _power_lipschitz(A)
    if L == 0.0:
        return np.zeros(N), np.zeros(P.shape[1]), 0
    z = np.zeros(A.shape[1])
    v = z.copy()
    t = 1.0
    hist = []
    for k in range(1, max_iter + 1):
        g = v - A.T @ (A @ v - y) / L
        new = g.copy()
        new[:N] = np.sign(g[:N]) * np.maximum(np.abs(g[:N]) - lam / L, 0.0)
        t_new = 0.5 * (1 + math.sqrt(1 + 4 * t * t))
        v = new + ((t - 1) / t_new) * (new - z)
        z, t = new, t_new
        r = y - A @ z
        hist.append(0.5 * float(r @ r) + lam * float(np.sum(np.abs(z[:N]))))
        if k > 10 and abs(hist[-11] - hist[-1]) <= 1e-10 * max(abs(hist[-1]), 1e-300):
            return z[:N], z[N:], k
    raise MaxIterReached(f"proximal gradient did not converge in {max_iter} iterations")


def solve_penalized(problem: DiscretizedProblem, lam: float, method: str = "homotopy",
                    max_iter: int | None = None) -> SolveReport:
    """Minimize ``1/2 ||y - G a - P b||^2 + lam ||a||_1`` with ``b`` unpenalized.

    ``y`` is the center of the constraint set. ``method="homotopy"`` (default)
    eliminates ``b`` through the projector onto ``range(P)^perp`` and follows
    the exact LASSO path; ``method="fista"`` runs accelerated proximal
    gradient on ``(a, b)`` jointly.
    """
    lam = float(lam)
    if not lam > 0:
        raise ValueError("lam must be positive")
    G, P, y = problem.G, problem.P, problem.y
    if method == "fista":
        a, b, it = _fista(G, P, y, lam, max_iter or 200_000)
        return _report(problem, a, b, it, method="fista", lam=lam)
    if method != "homotopy":
        raise ValueError(f"unknown method {method!r}")
    Pp, Q = _projector(P)
    a, it = _lasso_homotopy(Q @ G, Q @ y, lam, max_iter or 50 * (problem.N + problem.M) + 1000)
    b = Pp @ (y - G @ a)
    return _report(problem, a, b, it, method="homotopy", lam=lam)


def solve_constrained(problem: DiscretizedProblem, epsilon: float | None = None,
                      rtol: float = 1e-4, max_bisect: int = 60) -> SolveReport:
    """Penalized solution whose residual matches the ball radius ``epsilon``.

    Bisection on ``log lam`` keeps the feasible end of the bracket, so the
    returned residual never exceeds ``epsilon``.
    """
    c = problem.constraint
    if epsilon is None:
        epsilon = c.epsilon if c.kind == "ball" else 0.0
    epsilon = float(epsilon)
    if epsilon <= 0.0:
        if c.kind == "ball":
            problem = _with_constraint(problem, ConstraintSet.point(c.y))
        return solve_interpolation_lp(problem)
    lmax = lambda_max(problem)
    Pp, _ = _projector(problem.P)
    top = _report(problem, np.zeros(problem.N), Pp @ problem.y, 0, method="constrained", lam=lmax)
    if top.residual <= epsilon:
        return top
    if lmax <= 0:
        raise BracketFailure(f"no atom reduces the residual {top.residual:.3g} > epsilon = {epsilon:.3g}")
    lo_l = lmax * 1e-12
    lo = solve_penalized(problem, lo_l)
    if lo.residual > epsilon:
        raise BracketFailure(f"residual {lo.residual:.3g} at lam -> 0 exceeds epsilon = {epsilon:.3g}")
    hi_l = lmax
    it = 0
    for it in range(1, max_bisect + 1):
        if abs(lo.residual - epsilon) <= rtol * epsilon:
            break
        mid = math.sqrt(lo_l * hi_l)
        rep = solve_penalized(problem, mid)
        if rep.residual <= epsilon:
            lo_l, lo = mid, rep
        else:
            hi_l = mid
    lo.method = "constrained"
    lo.extra["bisections"] = it
    return lo


def _with_constraint(problem, constraint):
    return DiscretizedProblem(problem.operator, problem.grid, problem.G, problem.P,
                              constraint, problem.measurements, problem.bound)


def solve(problem: DiscretizedProblem, lam: float | None = None) -> SolveReport:
    """Dispatch on the constraint kind (or penalized when ``lam`` is given)."""
    if lam is not None:
        return solve_penalized(problem, lam)
    if problem.constraint.kind == "ball":
        return solve_constrained(problem)
    return solve_interpolation_lp(problem)


# --------------------------------------------------------------------------
# brute-force oracle


def _independent_columns(P, tol=1e-10):
    keep = []
    for j in range(P.shape[1]):
        trial = P[:, keep + [j]]
        s = np.linalg.svd(trial, compute_uv=False)
        if s.size == len(keep) + 1 and s[-1] > tol * max(1.0, s[0]):
            keep.append(j)
    return keep


def lp_oracle_bruteforce(problem: DiscretizedProblem, tol: float = 1e-9) -> SolveReport:
    """Minimum ``||a||_1`` over all basic solutions, by enumeration.

    Each candidate support ``S`` pairs a subset of atoms with a maximal
    independent set of null-space columns; the square or overdetermined system
    ``[G_S P] (a_S, b) = y`` is solved by pseudo-inverse and kept when it fits
    exactly and its columns are independent.
    """
    if problem.constraint.kind != "point":
        raise ValueError("the oracle handles point constraints only")
    G, P, y = problem.G, problem.P, problem.y
    M, N = G.shape
    if N + problem.N0 > 25 or M > 6:
        raise TooLarge(f"N + N0 = {N + problem.N0}, M = {M}: beyond desk scale (25, 6)")
    pcols = _independent_columns(P)
    Psel = P[:, pcols]
    r = len(pcols)
    scale = max(1.0, float(np.linalg.norm(y)))
    best = (math.inf, None, None)
    count = 0
    for k in range(0, M - r + 1):
        if k == 0:
            subsets = np.zeros((1, 0), dtype=int)
        else:
            subsets = np.array(list(itertools.combinations(range(N), k)), dtype=int)
        if not len(subsets):
            continue
        blocks = np.concatenate([G[:, subsets].transpose(1, 0, 2),
                                 np.broadcast_to(Psel, (len(subsets), M, r))], axis=2)
        count += len(subsets)
        if blocks.shape[2] == 0:
            if np.linalg.norm(y) <= tol * scale:
                best = min(best, (0.0, np.zeros(N), np.zeros(0)), key=lambda t: t[0])
            continue
        sv = np.linalg.svd(blocks, compute_uv=False)
        indep = sv[:, -1] > 1e-10 * np.maximum(1.0, sv[:, 0])
        sol = np.einsum("bij,j->bi", np.linalg.pinv(blocks), y)
        fit = np.linalg.norm(np.einsum("bij,bj->bi", blocks, sol) - y, axis=1) <= tol * scale
        ok = np.flatnonzero(indep & fit)
        if not len(ok):
            continue
        l1 = np.sum(np.abs(sol[ok, :k]), axis=1)
        i = int(ok[int(np.argmin(l1))])
        if float(np.min(l1)) < best[0] - 1e-15:
            a = np.zeros(N)
            a[subsets[i]] = sol[i, :k]
            best = (float(np.min(l1)), a, sol[i, k:])
    if best[1] is None:
        raise InfeasibleProblem("no basic solution fits the data")
    b = np.zeros(problem.N0)
    b[pcols] = best[2]
    return _report(problem, best[1], b, count, method="bruteforce")


# --------------------------------------------------------------------------
# knot extraction


def prune_knots(report: SolveReport, grid, weight_tol: float = WEIGHT_TOL,
                merge_radius: float | None = None) -> DiscreteMeasure:
    """Innovation measure from the grid weights of a report.

    Weights below ``weight_tol * max|a|`` are dropped. Runs of same-sign
    active atoms whose consecutive gaps are at most ``merge_radius`` (default
    two grid steps) merge into one knot at their ``|a|``-weighted centroid
    carrying the summed weight.
    """
    grid = np.asarray(grid, dtype=float)
    a = np.asarray(report.a, dtype=float)
    if a.size == 0 or not np.any(a):
        return DiscreteMeasure()
    thr = weight_tol * float(np.max(np.abs(a)))
    idx = np.flatnonzero(np.abs(a) >= thr)
    if merge_radius is None:
        merge_radius = 2.0 * float(grid[1] - grid[0]) if grid.size > 1 else 0.0
    runs: list[list[int]] = [[int(idx[0])]]
    for j in idx[1:]:
        prev = runs[-1][-1]
        same = np.sign(a[j]) == np.sign(a[prev])
        if same and grid[j] - grid[prev] <= merge_radius * (1 + 1e-12):
            runs[-1].append(int(j))
        else:
            runs.append([int(j)])
    locs, weights = [], []
    for run in runs:
        w = a[run]
        locs.append(float(np.sum(np.abs(w) * grid[run]) / np.sum(np.abs(w))))
        weights.append(float(np.sum(w)))
    return DiscreteMeasure(locs, weights)
