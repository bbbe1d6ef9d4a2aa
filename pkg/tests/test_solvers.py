import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from numpy.testing import assert_allclose
from scipy.optimize import linprog

from gtvspline.biortho import nullspace_fit
from gtvspline.errors import BracketFailure, InfeasibleProblem, TooLarge
from gtvspline.measurements import IdealSample, point_sample
from gtvspline.operators import derivative
from gtvspline.problem import ConstraintSet, DiscretizedProblem, GridSpec, build_problem
from gtvspline.solvers import (
    SolveReport,
    _simplex,
    lambda_max,
    lp_oracle_bruteforce,
    prune_knots,
    solve,
    solve_constrained,
    solve_interpolation_lp,
    solve_penalized,
)

HAT = [IdealSample(x) for x in (0.0, 1.0, 2.0)]


def hat(n=201, y=(0.0, 1.0, 0.0), constraint=None):
    return build_problem(derivative(2), HAT, None if constraint else list(y),
                         constraint=constraint, grid_spec=GridSpec(0.0, 2.0, n))


def random_instance(rng, order, M, n=None):
    op = derivative(order)
    n = n or 10 * M + 40
    # samples sharing a grid cell cannot be separated by the dictionary
    gap = 2.5 * 1.2 / (n - 1)
    xs = np.sort(rng.uniform(0.0, 1.0, M))
    while np.min(np.diff(xs), initial=1.0) < gap:
        xs = np.sort(rng.uniform(0.0, 1.0, M))
    ms = [point_sample(op, x) for x in xs]
    y = rng.standard_normal(M)
    return build_problem(op, ms, y, grid_spec=GridSpec(-0.1, 1.1, n))


class TestSimplexCore:
    def test_textbook_lp_against_scipy(self):
        # max 3x + 5y s.t. x <= 4, 2y <= 12, 3x + 2y <= 18 in equality form with slacks
        A = np.array([[1, 0, 1, 0, 0], [0, 2, 0, 1, 0], [3, 2, 0, 0, 1]], float)
        rhs = np.array([4.0, 12.0, 18.0])
        cost = np.array([-3, -5, 0, 0, 0], float)
        x = _simplex(A, rhs, cost, free=[])[0]
        ref = linprog(cost, A_eq=A, b_eq=rhs, bounds=(0, None), method="highs")
        assert cost @ x == pytest.approx(ref.fun, abs=1e-10)
        assert_allclose(x[:2], [2.0, 6.0], atol=1e-10)

    def test_degenerate_lp(self):
        # classic degenerate instance that cycles under the largest-coefficient rule
        A = np.array([[0.5, -5.5, -2.5, 9, 1, 0, 0],
                      [0.5, -1.5, -0.5, 1, 0, 1, 0],
                      [1, 0, 0, 0, 0, 0, 1]], float)
        rhs = np.array([0.0, 0.0, 1.0])
        cost = np.array([-10, 57, 9, 24, 0, 0, 0], float)
        x = _simplex(A, rhs, cost, free=[])[0]
        assert cost @ x == pytest.approx(-1.0, abs=1e-10)

    @settings(max_examples=30, deadline=None)
    @given(st.integers(0, 2**32 - 1))
    def test_random_lps_against_scipy(self, seed):
        rng = np.random.default_rng(seed)
        m, n = rng.integers(2, 5), rng.integers(5, 12)
        A = rng.standard_normal((m, n))
        rhs = A @ rng.uniform(0, 1, n)
        cost = rng.uniform(0.1, 2.0, n)
        x = _simplex(A, rhs, cost, free=[])[0]
        ref = linprog(cost, A_eq=A, b_eq=rhs, bounds=(0, None), method="highs")
        assert cost @ x == pytest.approx(ref.fun, rel=1e-7, abs=1e-9)
        assert np.all(x >= -1e-12)
        assert_allclose(A @ x, rhs, atol=1e-8)


class TestInterpolationLP:
    def test_hat(self):
        rep = solve_interpolation_lp(hat())
        assert rep.objective == pytest.approx(2.0, abs=1e-6)
        assert rep.status == "Optimal" and rep.nnz == 1
        k = int(np.flatnonzero(rep.a)[0])
        assert abs(hat().grid[k] - 1.0) <= 0.01 + 1e-12
        assert rep.a[k] == pytest.approx(-2.0, abs=1e-6)
        assert rep.residual <= 1e-8
        assert rep.null_in_basis

    def test_zero_data(self):
        rep = solve_interpolation_lp(hat(y=(0, 0, 0)))
        assert rep.objective == 0.0 and not np.any(rep.a) and not np.any(rep.b)

    def test_collinear(self):
        rep = solve_interpolation_lp(hat(y=(0, 1, 2)))
        assert rep.objective == pytest.approx(0.0, abs=1e-12)
        assert_allclose(rep.b, [0.0, 1.0], atol=1e-12)
        assert len(prune_knots(rep, hat().grid)) == 0

    def test_infeasible(self):
        ms = [IdealSample(0.0), IdealSample(0.0), IdealSample(1.0)]
        pr = build_problem(derivative(2), ms, [0.0, 1.0, 0.0], grid_spec=GridSpec(0, 2, 30))
        with pytest.raises(InfeasibleProblem):
            solve_interpolation_lp(pr)

    def test_matches_scipy_linprog(self):
        # independent LP route: split a = u - v and b = c - d, all nonnegative
        rng = np.random.default_rng(5)
        for i in range(30):
            pr = random_instance(rng, 1 + i % 3, int(rng.integers(3, 7)))
            G, P = pr.G, pr.P
            A = np.hstack([G, -G, P, -P])
            cost = np.r_[np.ones(2 * pr.N), np.zeros(2 * pr.N0)]
            ref = linprog(cost, A_eq=A, b_eq=pr.y, bounds=(0, None), method="highs")
            assert solve_interpolation_lp(pr).objective == pytest.approx(ref.fun, rel=1e-9, abs=1e-9)

    def test_box_constraint(self):
        lo, hi = np.array([-0.1, 0.9, -0.1]), np.array([0.1, 1.1, 0.1])
        pr = hat(constraint=ConstraintSet.box(lo, hi))
        rep = solve(pr)
        v = pr.forward(rep.a, rep.b)
        assert np.all(v >= lo - 1e-8) and np.all(v <= hi + 1e-8)
        # the relaxed hat: slopes 0.8 up and 0.8 down
        assert rep.objective == pytest.approx(1.6, abs=1e-6)

    def test_report_json(self):
        import json
        d = json.loads(solve_interpolation_lp(hat(n=21)).to_json())
        assert d["status"] == "Optimal" and d["nnz"] == 1 and len(d["a"]) == 21


class TestOracle:
    def test_hat_coarse(self):
        pr = hat(n=21)
        assert lp_oracle_bruteforce(pr).objective == pytest.approx(2.0, abs=1e-12)
        assert solve_interpolation_lp(pr).objective == pytest.approx(2.0, abs=1e-9)

    def test_zero_data(self):
        assert lp_oracle_bruteforce(hat(n=21, y=(0, 0, 0))).objective == 0.0

    def test_constant_fit(self):
        pr = build_problem(derivative(1), [point_sample(derivative(1), 0.5)], [3.0],
                           grid_spec=GridSpec(0, 1, 10))
        rep = lp_oracle_bruteforce(pr)
        assert rep.objective == 0.0 and rep.b == pytest.approx([3.0])

    def test_too_large(self):
        with pytest.raises(TooLarge):
            lp_oracle_bruteforce(hat(n=30))

    @pytest.mark.parametrize("seed", range(8))
    def test_random_equivalence(self, seed):
        rng = np.random.default_rng(seed)
        order = 1 + seed % 3
        M = int(rng.integers(max(2, order), 6))
        pr = random_instance(rng, order, M, n=25 - order)
        assert abs(solve_interpolation_lp(pr).objective - lp_oracle_bruteforce(pr).objective) <= 1e-7


class TestSparsity:
    @pytest.mark.parametrize("seed", range(30))
    def test_vertex_sparsity(self, seed):
        rng = np.random.default_rng(100 + seed)
        order = 1 + seed % 3
        M = int(rng.integers(max(2, order), 7))
        pr = random_instance(rng, order, M)
        rep = solve_interpolation_lp(pr)
        assert len(prune_knots(rep, pr.grid, merge_radius=0.0)) <= M
        assert rep.residual <= 1e-8 * max(1.0, np.linalg.norm(pr.y))
        if rep.null_in_basis:
            assert rep.nnz <= M - pr.N0


class TestPenalized:
    def test_scalar_soft_threshold(self):
        pr = DiscretizedProblem.from_matrices([[1.0]], y=[3.0])
        for method in ("homotopy", "fista"):
            assert solve_penalized(pr, 1.0, method=method).a == pytest.approx([2.0], abs=1e-8)

    def test_above_lambda_max(self):
        pr = hat(y=(0.3, 1.0, -0.2))
        lmax = lambda_max(pr)
        b_ls = nullspace_fit(pr.P, pr.y)
        assert lmax == pytest.approx(np.max(np.abs(pr.G.T @ (pr.y - pr.P @ b_ls))))
        rep = solve_penalized(pr, 1.01 * lmax)
        assert not np.any(rep.a)
        assert_allclose(rep.b, b_ls, atol=1e-12)

    def test_tiny_lambda_approaches_interpolation(self):
        pr = hat()
        rep = solve_penalized(pr, 1e-10)
        assert rep.residual <= 1e-6
        assert rep.objective == pytest.approx(2.0, abs=1e-3)

    @pytest.mark.parametrize("lam", [1e-3, 1e-2, 0.1])
    def test_kkt_and_fista_agree(self, lam):
        rng = np.random.default_rng(1)
        pr = random_instance(rng, 2, 6)
        h = solve_penalized(pr, lam)
        f = solve_penalized(pr, lam, method="fista")

        def obj(r):
            return 0.5 * r.residual**2 + lam * r.objective

        # the homotopy path is exact; proximal iterations stop slightly above it
        assert obj(h) <= obj(f) * (1 + 1e-12)
        assert obj(h) == pytest.approx(obj(f), rel=1e-4)
        # optimality: |G^T r| <= lam with equality (and matching sign) on the support
        r = pr.y - pr.forward(h.a, h.b)
        corr = pr.G.T @ r
        assert np.max(np.abs(corr)) <= lam * (1 + 1e-8)
        on = h.a != 0
        assert_allclose(corr[on], lam * np.sign(h.a[on]), rtol=1e-8)
        assert np.max(np.abs(pr.P.T @ r)) <= 1e-9

    def test_rejects_nonpositive(self):
        with pytest.raises(ValueError):
            solve_penalized(hat(), 0.0)

    @pytest.mark.parametrize("seed", [0, 1])
    def test_lambda_path_monotone(self, seed):
        pr = random_instance(np.random.default_rng(seed), 1, 6)
        lams = lambda_max(pr) * np.logspace(-6, 0, 20)
        reps = [solve_penalized(pr, lam) for lam in lams]
        res = [r.residual for r in reps]
        beta = [r.objective for r in reps]
        assert all(r2 >= r1 - 1e-10 for r1, r2 in zip(res, res[1:]))
        assert all(b2 <= b1 + 1e-10 for b1, b2 in zip(beta, beta[1:]))


class TestConstrained:
    def test_large_ball_gives_null_fit(self):
        y = np.array([0.0, 1.0, 0.0])
        pr = hat(constraint=ConstraintSet.ball(y, 1.0))
        rep = solve_constrained(pr)
        assert not np.any(rep.a)
        assert_allclose(rep.b, nullspace_fit(pr.P, y), atol=1e-12)

    def test_relaxation_lowers_beta(self):
        pr = hat(constraint=ConstraintSet.ball([0.0, 1.0, 0.0], 0.1))
        rep = solve(pr)
        assert rep.objective < 2.0
        assert rep.residual <= 0.1 + 1e-8
        assert rep.residual == pytest.approx(0.1, rel=1e-4)
        assert rep.method == "constrained"

    def test_zero_radius_is_lp(self):
        rep = solve_constrained(hat(), 0.0)
        assert rep.method == "simplex" and rep.objective == pytest.approx(2.0, abs=1e-6)

    def test_bracket_failure(self):
        ms = [IdealSample(0.0), IdealSample(0.0), IdealSample(1.0)]
        pr = build_problem(derivative(2), ms, constraint=ConstraintSet.ball([0.0, 1.0, 0.0], 0.1),
                           grid_spec=GridSpec(0, 2, 30))
        with pytest.raises(BracketFailure):
            solve_constrained(pr)


class TestPrune:
    def grid(self):
        return np.round(np.arange(0.0, 2.0 + 1e-9, 0.01), 12)

    def report(self, a):
        return SolveReport(np.asarray(a, float), np.zeros(0), float(np.sum(np.abs(a))), 0.0, 0)

    def test_single(self):
        a = np.zeros(201)
        a[100] = -2.0
        m = prune_knots(self.report(a), self.grid())
        assert_allclose(m.locations, [1.0]) and assert_allclose(m.weights, [-2.0])

    def test_merge_adjacent(self):
        a = np.zeros(201)
        a[100], a[101] = -1.2, -0.8
        m = prune_knots(self.report(a), self.grid())
        # |a|-weighted centroid: (1.2 * 1.00 + 0.8 * 1.01) / 2
        assert_allclose(m.locations, [1.004], atol=1e-12)
        assert_allclose(m.weights, [-2.0])

    def test_opposite_signs_not_merged(self):
        a = np.zeros(201)
        a[100], a[101] = -1.0, 1.0
        assert len(prune_knots(self.report(a), self.grid())) == 2

    def test_below_tolerance(self):
        m = prune_knots(self.report(np.full(201, 1e-12)), self.grid(), weight_tol=1e-8)
        assert len(m) == 1  # relative threshold keeps the largest entries
        assert len(prune_knots(self.report(np.zeros(201)), self.grid())) == 0

    def test_relative_threshold_drops_small(self):
        a = np.zeros(201)
        a[50], a[150] = 1.0, 1e-10
        m = prune_knots(self.report(a), self.grid())
        assert_allclose(m.locations, [0.5])
