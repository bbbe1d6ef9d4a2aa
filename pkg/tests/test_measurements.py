import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from numpy.testing import assert_allclose
from scipy import integrate as sint

from gtvspline.errors import InadmissibleFunctional
from gtvspline.measurements import (
    ApertureSample,
    DerivativeAtPoint,
    IdealSample,
    QuasiIdealSample,
    box_profile,
    decay_admissible,
    gaussian_profile,
    moment,
    point_sample,
    triangle_profile,
)
from gtvspline.operators import (
    GreenAtom,
    derivative,
    exponential,
    fractional,
    green_eval,
    identity,
    nullspace_basis,
    thin_plate,
)


@pytest.mark.parametrize("profile", [box_profile(0.3), triangle_profile(0.05),
                                     gaussian_profile(0.1)])
def test_profiles_have_unit_mass(profile):
    assert profile.mass() == pytest.approx(1.0, abs=1e-9)


class TestAtomActions:
    def test_ideal_sample(self):
        assert IdealSample(1.0).act_on_atom(derivative(2), 0.25) == 0.75
        assert IdealSample(0.0).act_on_atom(derivative(2), 0.25) == 0.0

    @pytest.mark.parametrize("op", [derivative(1), derivative(2), exponential([-1.0, -2.0]),
                                    fractional(1.5)])
    @pytest.mark.parametrize("tau", [-0.5, 0.02, 0.1, 0.37])
    def test_aperture_against_scipy(self, op, tau):
        nu = ApertureSample(box_profile(0.4), 0.2)
        val, _ = sint.quad(lambda x: green_eval(op, x - tau) / 0.4, 0.0, 0.4,
                           points=[tau] if 0 < tau < 0.4 else None, epsabs=1e-13, limit=200)
        assert nu.act_on_atom(op, tau) == pytest.approx(val, abs=1e-9)

    def test_box_on_ramp_closed_form(self):
        # (1/w) int_{x0-w/2}^{x0+w/2} (x - tau)_+ dx for tau left of the window
        nu = ApertureSample(box_profile(0.5), 1.0)
        assert nu.act_on_atom(derivative(2), 0.25) == pytest.approx(0.75, abs=1e-12)

    @pytest.mark.parametrize("m", [0, 1, 2, 4])
    def test_moment_of_step(self, m):
        # int_0^1 x^m H(x - tau) dx = (1 - tau^{m+1}) / (m + 1)
        for tau in (0.0, 0.3, 0.8):
            expected = (1 - tau ** (m + 1)) / (m + 1)
            assert moment(m).act_on_atom(derivative(1), tau) == pytest.approx(expected, abs=1e-12)

    def test_measure_mode_uses_density(self):
        taus = np.linspace(0, 1, 11)
        assert_allclose(moment(3).row(identity(), taus), taus**3, atol=1e-15)

    def test_quasi_ideal_converges_to_ideal(self):
        op = derivative(2)
        ideal = IdealSample(0.7).act_on_atom(op, 0.2)
        errs = [abs(QuasiIdealSample(0.7, w).act_on_atom(op, 0.2) - ideal) for w in (1e-1, 1e-2)]
        # symmetric unit-mass mollifier reproduces linear functions exactly
        assert max(errs) < 1e-12

    @pytest.mark.parametrize("nu", [ApertureSample(box_profile(0.2), 0.5),
                                    QuasiIdealSample(0.5, 0.01),
                                    ApertureSample(gaussian_profile(0.05), 0.5),
                                    moment(2, 0.0, 1.0)])
    @pytest.mark.parametrize("op", [derivative(1), derivative(3), exponential([0.0, -1.5]),
                                    fractional(1.3)])
    def test_vectorized_row_matches_scalar_actions(self, nu, op):
        taus = np.linspace(-0.2, 1.2, 57)
        scalar = np.array([nu.act_on_atom(op, t) for t in taus])
        assert_allclose(nu.row(op, taus), scalar, atol=1e-10)

    def test_null_space_action(self):
        p = nullspace_basis(derivative(2))
        assert moment(1).act_on_null(p[1]) == pytest.approx(1 / 3)
        assert DerivativeAtPoint(2.0, 1).act_on_null(p[1]) == 1.0


class TestAdmissibility:
    def test_ideal_sampling_needs_continuity(self):
        with pytest.raises(InadmissibleFunctional):
            IdealSample(0.5).act_on_atom(derivative(1), 0.0)
        with pytest.raises(InadmissibleFunctional):
            IdealSample(0.5).row(identity(), np.zeros(3))
        IdealSample(0.5).check_admissible(derivative(2))
        IdealSample(np.array([0.5, 0.5])).check_admissible(thin_plate())

    def test_point_sample_selects_mollified_sample(self):
        assert isinstance(point_sample(derivative(1), 0.3), QuasiIdealSample)
        assert isinstance(point_sample(derivative(2), 0.3), IdealSample)

    def test_derivative_functional_order_limit(self):
        DerivativeAtPoint(0.0, 1).check_admissible(derivative(2))
        with pytest.raises(InadmissibleFunctional):
            DerivativeAtPoint(0.0, 2).check_admissible(derivative(2))
        with pytest.raises(InadmissibleFunctional):
            DerivativeAtPoint(0.0, 0).check_admissible(identity())

    def test_decay_weighted_norm(self):
        ok, val = decay_admissible(ApertureSample(box_profile(1.0), 10.0), 1)
        assert ok and val == pytest.approx(11.0, rel=1e-12)
        ok, val = decay_admissible(moment(0, -1.0, 1.0), 0)
        assert ok and val == pytest.approx(2.0)

    def test_decay_rejects_point_functionals(self):
        with pytest.raises(TypeError):
            decay_admissible(IdealSample(0.0), 1)


class TestCombinations:
    @settings(max_examples=30, deadline=None)
    @given(st.floats(-3, 3), st.floats(-3, 3), st.floats(-1, 1))
    def test_linearity(self, a, b, tau):
        op = derivative(2)
        n1, n2 = IdealSample(0.4), ApertureSample(box_profile(0.2), 1.1)
        combo = a * n1 + b * n2
        expected = a * n1.act_on_atom(op, tau) + b * n2.act_on_atom(op, tau)
        assert combo.act_on_atom(op, tau) == pytest.approx(expected, abs=1e-10)
        diff = n1 - n2
        assert diff.act_on_atom(op, tau) == pytest.approx(
            n1.act_on_atom(op, tau) - n2.act_on_atom(op, tau), abs=1e-10)

    def test_combination_row(self):
        op = derivative(2)
        taus = np.linspace(0, 1, 5)
        combo = 2.0 * IdealSample(1.0) + (-1.0) * IdealSample(0.5)
        assert_allclose(combo.row(op, taus), 2 * (1 - taus) - np.maximum(0.5 - taus, 0))

    def test_green_atom_kinks(self):
        assert GreenAtom(derivative(2), 0.3).kinks == (0.3,)
        assert math.isclose(GreenAtom(derivative(2), 0.3)(1.3), 1.0)
