import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from fputkin.errors import InvalidParameter, PositivityLost
from fputkin.kinetic import (
    SpectrumInterpolant,
    collision_operator,
    collision_scale,
    discrete_collision,
    discrete_collision_summands,
    discrete_continuum_compare,
    fit_decay_exponent,
    second_order_predictor,
    sinc_concentration_error,
    wke_solve,
)
from fputkin.model import PROFILES, SimParams, dispersion, rayleigh_jeans_profile

P64 = SimParams(64)
XI = np.array([0.2, 0.45, 0.7])


def constant(x):
    return np.full_like(np.asarray(x, dtype=float), 1.3)


def rayleigh_jeans(x):
    return rayleigh_jeans_profile(x, params=P64)


@pytest.mark.parametrize("method", ["sinc_broadened", "level_set"])
def test_constant_spectrum_is_annihilated_exactly(method):
    assert np.array_equal(collision_operator(constant, XI, method, P64).values, np.zeros(3))


@pytest.mark.parametrize("method", ["sinc_broadened", "level_set"])
def test_rayleigh_jeans_is_a_null_direction(method):
    res = collision_operator(rayleigh_jeans, XI, method, P64)
    scale = collision_scale(rayleigh_jeans, XI, P64)
    assert np.all(np.abs(res.values) <= 1e-4 * scale)


def test_methods_agree_on_a_bump_after_refinement():
    bump = PROFILES["bump"]
    sinc = collision_operator(bump, XI, "sinc_broadened", P64, tau=200.0, extrapolate=True).values
    level = collision_operator(bump, XI, "level_set", P64, sing_tol=1e-4).values
    assert np.max(np.abs(sinc - level)) <= 0.02 * np.max(np.abs(level))


def test_collision_rejects_bad_input():
    with pytest.raises(InvalidParameter):
        collision_operator(lambda x: np.asarray(x) - 0.5, XI, "level_set", P64)
    with pytest.raises(InvalidParameter):
        collision_operator(constant, [0.0], "level_set", P64)
    with pytest.raises(InvalidParameter):
        collision_operator(constant, XI, "trapezoid", P64)


@settings(max_examples=15)
@given(st.integers(6, 24), st.integers(0, 10_000))
def test_discrete_sum_conserves_action_and_energy(N, seed):
    # summand-wise antisymmetry forces both moments to vanish
    p = SimParams(N)
    values = np.random.default_rng(seed).uniform(0.2, 2.0, N - 1)
    K = discrete_collision(values, N, p)
    omega = dispersion(p.grid.points, p)
    scale = max(
        math.fsum(discrete_collision_summands(values, j, N, p, "interaction", "sinc", 200.0, 1e-12, magnitude=True))
        for j in range(1, N)
    )
    assert abs(math.fsum(K)) <= 1e-13 * scale
    # energy needs the mismatch to vanish, so it holds for the resonant kernel only
    resonant = discrete_collision(values, N, p, kernel="resonant")
    assert abs(math.fsum(resonant)) <= 1e-13 * scale
    assert abs(math.fsum(omega * resonant)) <= 1e-12 * scale


def test_discrete_sum_on_grid_only():
    p = SimParams(16)
    res = collision_operator(PROFILES["default"], p.grid.points, "discrete_sum", p)
    assert res.values.shape == (15,)
    with pytest.raises(InvalidParameter):
        collision_operator(PROFILES["default"], [0.3], "discrete_sum", p)


def test_collision_result_csv(tmp_path):
    res = collision_operator(PROFILES["bump"], XI, "sinc_broadened", P64)
    path = tmp_path / "k.csv"
    res.to_csv(path)
    header = path.read_text().splitlines()[0]
    assert header == "k,value,error_estimate,method,tau"


# -- kinetic equation ----------------------------------------------------------------------

NODES = np.linspace(0.0, 1.0, 14)[1:-1]


def test_rayleigh_jeans_is_stationary():
    res = wke_solve(rayleigh_jeans, 0.5, P64, nodes=NODES, method="level_set")
    n0 = rayleigh_jeans(NODES)
    assert np.max(np.abs(res.spectra - n0)) <= 1e-3 * np.max(n0)


def test_small_time_taylor_consistency():
    bump = PROFILES["bump"]
    n0 = bump(NODES)
    rate = collision_operator(SpectrumInterpolant(NODES, n0, P64), NODES, "sinc_broadened", P64).values
    errors = []
    for t in (0.2, 0.1):
        res = wke_solve(bump, t, P64, nodes=NODES, method="sinc_broadened", dt=t)
        errors.append(np.max(np.abs(res.spectra[-1] - n0 - t * rate)))
        drift = abs(res.action[-1] - res.action[0])
        change = np.mean(np.abs(res.spectra[-1] - n0))
        assert drift <= 0.05 * change
    # second order in t: halving t divides the defect by about four
    assert 3.0 <= errors[0] / errors[1] <= 5.0


def test_positivity_loss_is_reported():
    with pytest.raises(PositivityLost) as info:
        wke_solve(PROFILES["bump"], 60.0, P64, nodes=NODES, method="sinc_broadened", dt=60.0)
    assert info.value.time == 60.0
    with pytest.raises(PositivityLost):
        wke_solve(np.r_[0.0, np.ones(NODES.size - 1)], 1.0, P64, nodes=NODES)


# -- predictor -------------------------------------------------------------------------------


def test_predictor_basic_properties():
    p = SimParams(32)
    assert np.array_equal(second_order_predictor("default", 0.0, None, p).values, np.zeros(31))
    flat = second_order_predictor(np.full(31, 0.7), 0.3 * p.time_scale, None, p)
    assert np.array_equal(flat.values, np.zeros(31))
    small = [np.max(np.abs(second_order_predictor("bump", t, None, p).values)) for t in (1e-3, 5e-4)]
    assert small[0] / small[1] == pytest.approx(4.0, rel=1e-3)
    with pytest.raises(InvalidParameter):
        second_order_predictor("default", 2 * p.time_scale, None, p)


def test_predictor_forms_agree_without_shift():
    p = SimParams(32)
    t = 0.4 * p.time_scale
    stated = second_order_predictor("bump", t, None, p, form="stated")
    exact = second_order_predictor("bump", t, None, p, form="exact")
    # the stated form reports exact resonances separately
    assert np.allclose(stated.values + stated.resonant, exact.values, rtol=1e-6, atol=1e-12)


# -- concentration and discrete-to-continuum ---------------------------------------------------


def test_sinc_concentration_decays():
    f = lambda x: math.exp(-x * x)  # noqa: E731
    ts = np.geomspace(10, 1e4, 7)
    errs = [sinc_concentration_error(f, t) for t in ts]
    assert 0.4 <= fit_decay_exponent(ts, errs) <= 1.1


def test_discrete_continuum_zero_weight():
    zero = lambda x, y: 0.0 * x * y  # noqa: E731
    chi = lambda x: np.exp(-x * x)  # noqa: E731
    assert discrete_continuum_compare(zero, chi, 0.3, 8.0, 32) == (0.0, 0.0, 0.0)


def test_discrete_continuum_difference_times_T_stays_bounded():
    F = lambda x, y: np.sin(np.pi * x) ** 2 * np.sin(np.pi * y) ** 2  # noqa: E731
    chi = lambda x: np.exp(-x * x)  # noqa: E731
    T = 8.0
    scaled = [abs(discrete_continuum_compare(F, chi, 0.25, T, N)[2]) * T for N in (64, 128, 256)]
    print("difference * T:", scaled)
    assert max(scaled) <= 2.0 * scaled[0]
