from dataclasses import replace

import numpy as np
import pytest

from nanores.config.settings import DynamicsParams
from nanores.core.junction_dynamics import (
    advance,
    check_stability,
    conductance,
    fixed_point,
    rates,
    step,
    substeps,
)
from nanores.errors import NumericalError, Saturated, UnstableIntegration


def _max_deviation(params: DynamicsParams, v: float, dt: float, n_steps: int) -> float:
    k_p, k_d = rates(v, params)
    total = float(k_p + k_d)
    g_star = float(k_p) / total
    g = np.zeros(1)
    worst = 0.0
    for n in range(1, n_steps + 1):
        g = step(g, v, params, dt=dt)
        exact = g_star * (1.0 - np.exp(-total * n * dt))
        worst = max(worst, abs(float(g[0]) - exact))
    return worst


@pytest.mark.unit
class TestRates:
    def test_reference_values(self):
        params = DynamicsParams()
        k_p, k_d = rates(1.0, params)
        assert float(k_p) == pytest.approx(0.001 * np.e, rel=1e-15)
        assert float(k_d) == pytest.approx(0.5 / np.e, rel=1e-15)

    def test_magnitude_mode_ignores_sign(self):
        params = DynamicsParams()
        np.testing.assert_array_equal(rates(-0.7, params), rates(0.7, params))

    def test_signed_mode(self):
        params = DynamicsParams(signed=True)
        k_p, k_d = rates(-1.0, params)
        assert float(k_p) == pytest.approx(0.001 / np.e)
        assert float(k_d) == pytest.approx(0.5 * np.e)

    def test_overflow(self):
        with pytest.raises(Saturated):
            rates(np.array([0.0, 1.0]), DynamicsParams(eta_p=1000.0))

    def test_non_finite_voltage(self):
        with pytest.raises(NumericalError):
            rates(np.array([0.0, np.nan]), DynamicsParams())


@pytest.mark.unit
class TestStep:
    def test_constant_drive_tracks_closed_form(self):
        assert _max_deviation(DynamicsParams(), 1.0, 0.01, 100_000) <= 1e-4

    @pytest.mark.slow
    def test_first_order_convergence(self):
        params = DynamicsParams()
        coarse = _max_deviation(params, 1.0, 0.02, 2_000)
        fine = _max_deviation(params, 1.0, 0.01, 4_000)
        assert coarse / fine == pytest.approx(2.0, rel=0.2)

    def test_state_stays_in_unit_interval(self):
        params = DynamicsParams(k_p=5.0, k_d=5.0)
        g = np.array([0.0, 0.5, 1.0])
        for _ in range(20):
            g = step(g, np.array([3.0, -2.0, 0.0]), params, dt=1.0)
            assert np.all((g >= 0.0) & (g <= 1.0))

    def test_converges_to_fixed_point(self):
        params = DynamicsParams()
        g = np.zeros(3)
        v = np.array([0.0, 0.5, 1.0])
        for _ in range(500):
            g = step(g, v, params)
        np.testing.assert_allclose(g, fixed_point(v, params), rtol=1e-9)

    def test_fast_potentiation_ceiling_at_unit_drop(self):
        params = DynamicsParams(k_p=0.5)
        ceiling = float(fixed_point(1.0, params))
        assert ceiling == pytest.approx(np.e ** 2 / (np.e ** 2 + 1.0), rel=1e-12)
        assert ceiling < 0.99
        # a drop of 2.3 V is the first to pass 0.99 at equal base rates
        assert float(fixed_point(2.3, params)) > 0.99

    def test_stronger_drive_potentiates(self):
        params = DynamicsParams()
        g0 = np.full(2, 0.01)
        g1 = step(g0, np.array([0.0, 1.0]), params)
        assert g1[1] > g1[0]

    def test_non_finite_state(self):
        with pytest.raises(NumericalError):
            step(np.array([np.inf]), 0.0, DynamicsParams())

    def test_advance_equals_repeated_substeps(self):
        params = DynamicsParams(k_d=2.0)
        g = np.array([0.2, 0.6])
        v = np.array([0.3, 1.0])
        expected = g
        for _ in range(4):
            expected = step(expected, v, params, dt=0.25)
        np.testing.assert_allclose(advance(g, v, params, 4), expected, rtol=1e-14)


@pytest.mark.unit
class TestStability:
    def test_reference_parameters_need_one_substep(self):
        assert substeps(DynamicsParams(), 1.0) == 1

    def test_fast_depression_is_substepped(self):
        params = DynamicsParams(k_d=2.0)
        n = substeps(params, 1.0)
        assert n == 3
        assert params.dt / n * 2.001 < 1.0

    def test_bound_violation_without_auto_substep(self):
        with pytest.raises(UnstableIntegration):
            check_stability(DynamicsParams(k_d=2.0), 1.0, auto_substep=False)

    def test_signed_mode_checks_negative_drops(self):
        params = replace(DynamicsParams(k_d=0.5, eta_d=2.0), signed=True)
        assert substeps(params, 1.0) == int(np.ceil(0.5 * np.exp(2.0) / 0.9))


@pytest.mark.unit
def test_conductance_map():
    params = DynamicsParams(g_min=0.01, g_max=2.0)
    np.testing.assert_allclose(conductance(np.array([0.0, 0.5, 1.0]), params), [0.01, 1.005, 2.0])
