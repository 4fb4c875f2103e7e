import math

import numpy as np
import pytest

from risgroup import rate
from risgroup._backend import BACKEND
from risgroup.beamforming import PhaseConfig, Mode, estimated_phases, onoff_config, optimal_phases
from risgroup.channel import sample_channels
from risgroup.estimation import ChannelEstimate, ls_estimate, pilot_matrix, simulate_pilots
from risgroup.rate import (
    bound_coefficients,
    instantaneous_snr,
    mc_achievable_rate,
    mc_onoff_rate,
    rate_upper_bound,
    trial_rng,
    z_ratio,
)

BACKENDS = ["python"] + (["cython"] if BACKEND == "cython" else [])


def test_instantaneous_snr_direct_only(rng, defaults):
    p = defaults.with_(K=8, B=2, beta_l=0.0)
    r = sample_channels(8, rng).grouped(2)
    cfg = optimal_phases(r.h_d, r.v_grouped)
    assert instantaneous_snr(r, cfg, p) == pytest.approx(p.gamma * p.beta_d * abs(r.h_d) ** 2, rel=1e-14)


def test_instantaneous_snr_ris_only(rng, defaults):
    r = sample_channels(12, rng).grouped(3)
    r.h_d = 0j
    cfg = PhaseConfig(np.exp(-1j * np.angle(r.v_grouped)))
    expected = defaults.gamma * defaults.beta_l * np.abs(r.v_grouped).sum() ** 2
    assert instantaneous_snr(r, cfg, defaults.with_(K=12, B=3)) == pytest.approx(expected, rel=1e-12)


def test_instantaneous_snr_explicit_expansion(rng, defaults):
    p = defaults.with_(K=20, B=4)
    r = sample_channels(20, rng).grouped(4)
    phi = np.exp(1j * rng.uniform(0, 2 * np.pi, 5))
    got = instantaneous_snr(r, PhaseConfig(phi), p)
    s = math.sqrt(p.beta_d) * r.h_d
    for i in range(5):
        s += math.sqrt(p.beta_l) * phi[i] * r.v_grouped[i]
    assert got == pytest.approx(p.gamma * (s.real**2 + s.imag**2), rel=1e-12)


def test_instantaneous_snr_dimension_checks(rng, defaults):
    r = sample_channels(12, rng).grouped(3)
    with pytest.raises(ValueError):
        instantaneous_snr(r, PhaseConfig(np.ones(3)), defaults)
    with pytest.raises(ValueError):
        instantaneous_snr(r, PhaseConfig(np.ones(13), Mode.ONOFF), defaults)


def pipeline_snr(params, seed, trial, n_on=None, perfect=False):
    """One trial through the public step-by-step API."""
    rng = trial_rng(seed, trial)
    r = sample_channels(params.K, rng)
    if n_on is None:
        r = r.grouped(params.B)
        k_est = params.k_prime
    else:
        r = r.grouped(1)
        r.v_grouped = r.v[:n_on]
        k_est = n_on
    s = pilot_matrix(k_est)
    est = ls_estimate(simulate_pilots(r, s, params, rng), s, params)
    if n_on is None:
        cfg = optimal_phases(r.h_d, r.v_grouped) if perfect else estimated_phases(est)
    else:
        cfg = onoff_config(est.h_d_hat, est.v_grouped_hat)
        r.v_grouped = None
    return instantaneous_snr(r, cfg, params)


@pytest.mark.parametrize("backend", BACKENDS)
@pytest.mark.parametrize("B", [1, 4, 7])
def test_kernel_reproduces_step_by_step_pipeline(backend, B, defaults):
    from risgroup._backend import get_kernels

    p = defaults.with_(K=60, B=B)
    k = get_kernels(backend)
    phi = pilot_matrix(p.k_prime).phase_matrix
    args = (math.sqrt(p.beta_d), math.sqrt(p.beta_l), math.sqrt(p.noise), math.sqrt(p.p_tr), p.gamma, phi)
    got = k.simulate_trials(11, 5, 9, p.K, p.B, 0, *args, False)
    want = [pipeline_snr(p, 11, t) for t in range(5, 9)]
    np.testing.assert_allclose(got, want, rtol=1e-9)
    got = k.simulate_trials(11, 5, 9, p.K, p.B, 0, *args, True)
    want = [pipeline_snr(p, 11, t, perfect=True) for t in range(5, 9)]
    np.testing.assert_allclose(got, want, rtol=1e-12)
    phi = pilot_matrix(9).phase_matrix
    got = k.simulate_trials(11, 0, 3, p.K, p.B, 9, *args[:5], phi, False)
    want = [pipeline_snr(p, 11, t, n_on=9) for t in range(3)]
    np.testing.assert_allclose(got, want, rtol=1e-9)


def test_prefactor_boundary(defaults):
    p = defaults.with_(K=360, B=1, T_c=361)
    with pytest.raises(ValueError, match="T_c"):
        mc_achievable_rate(p, 10)
    with pytest.raises(ValueError, match="T_c"):
        rate_upper_bound(p)
    with pytest.raises(ValueError):
        mc_onoff_rate(defaults.with_(T_c=20), 19, 10)


def test_argument_checks(defaults):
    with pytest.raises(ValueError):
        mc_achievable_rate(defaults, 0)
    with pytest.raises(ValueError):
        mc_achievable_rate(defaults, 10, csi="magic")
    with pytest.raises(ValueError):
        mc_onoff_rate(defaults, 0, 10)
    with pytest.raises(ValueError):
        mc_achievable_rate(defaults, 10, master_seed=-1)


def test_strong_pilots_approach_perfect_csi(defaults):
    p = defaults.with_(B=8, P_tr_dbm=80.0)
    est = mc_achievable_rate(p, 2000, 5)
    perfect = mc_achievable_rate(p, 2000, 5, csi="perfect")
    assert est.rate == pytest.approx(perfect.rate, rel=1e-6)


def test_default_point_rate_and_bound(defaults):
    p = defaults.with_(B=5)
    r = mc_achievable_rate(p, 10_000, 1)
    assert 14.0 <= r.rate <= 15.0
    assert r.rate <= rate_upper_bound(p)
    assert r.trials == 10_000 and r.prefactor == pytest.approx(1 - 73 / 900)
    assert 0 < r.stderr < 0.01


def test_onoff_all_on_equals_no_grouping(defaults):
    p = defaults.with_(T_c=10**7, B=1)
    a = mc_onoff_rate(p, p.K, 500, 9)
    b = mc_achievable_rate(p, 500, 9)
    assert a.rate == pytest.approx(b.rate, rel=1e-12)
    assert a.prefactor == pytest.approx(1 - 361 / 10**7)


def test_onoff_not_better_than_grouping(defaults):
    p = defaults.with_(B=8)
    g = mc_achievable_rate(p, 2000, 4)
    o = mc_onoff_rate(p, p.k_prime, 2000, 4)
    assert o.rate <= g.rate
    assert o.prefactor == g.prefactor


def test_onoff_single_element(defaults):
    p = defaults.with_(K=10)
    res = mc_onoff_rate(p, 1, 50, 2)
    snr = np.array([pipeline_snr(p, 2, t, n_on=1) for t in range(50)])
    assert res.rate == pytest.approx((1 - 2 / p.T_c) * np.mean(np.log2(1 + snr)), rel=1e-9)


def test_determinism_across_workers(defaults):
    p = defaults.with_(B=6)
    a = mc_achievable_rate(p, 1000, 17, workers=1)
    b = mc_achievable_rate(p, 1000, 17, workers=3)
    assert a == b
    assert mc_achievable_rate(p, 1000, 18) != a


@pytest.mark.skipif(BACKEND != "cython", reason="compiled kernel not built")
def test_backends_agree(defaults):
    p = defaults.with_(B=3)
    a = mc_achievable_rate(p, 600, 2, backend="python")
    b = mc_achievable_rate(p, 600, 2, backend="cython")
    assert a.rate == pytest.approx(b.rate, rel=1e-12)


@pytest.mark.parametrize("B, z", [(1, math.pi / 4), (2, 3 * math.pi / 8), (100, 8.851198384821932)])
def test_z_ratio(B, z):
    assert z_ratio(B) == pytest.approx(z, rel=1e-12)
    with pytest.raises(ValueError):
        z_ratio(0)


def test_z_ratio_sanity_large_b():
    assert z_ratio(100) / (0.8759 * 10) == pytest.approx(1.0, abs=0.015)


def test_bound_coefficients_unit_betas():
    co = bound_coefficients(1, 1.0, 1.0)
    assert co.xi1 == pytest.approx(math.pi**2 / 16, rel=1e-14)
    # (1 - pi^2/16) + sqrt(pi) * pi / 4, mpmath value
    assert co.xi2 == pytest.approx(1.775231724139842, rel=1e-13)


def test_bound_coefficients_no_direct_path():
    co = bound_coefficients(6, 0.0, 2e-8)
    assert co.xi2 == pytest.approx(2e-8 * (6 - co.z**2))
    assert co.z**2 <= 6 and co.xi1 > 0
    with pytest.raises(ValueError):
        bound_coefficients(0, 1.0, 1.0)


def test_upper_bound_single_group(defaults):
    p = defaults.with_(B=360)
    co = bound_coefficients(360, p.beta_d, p.beta_l)
    expected = (1 - 2 / 900) * math.log2(1 + p.gamma * (co.xi1 + co.xi2 + p.beta_d))
    assert rate_upper_bound(p) == pytest.approx(expected, rel=1e-14)


def test_upper_bound_zero_snr(defaults):
    assert rate_upper_bound(defaults.with_(P_dbm=-400.0)) < 1e-20


def test_mean_gain_identity_monte_carlo(defaults):
    """E|sqrt(bd) h_d + sqrt(bl) phi^T v'|^2 under ideal phases equals the bound's argument."""
    rng = np.random.default_rng(0)
    for B, kp in [(1, 16), (4, 8), (8, 3)]:
        p = defaults.with_(K=B * kp, B=B)
        n = 100_000
        from risgroup.channel import complex_normal, group_cascade

        vg = group_cascade(complex_normal(rng, (n, p.K)) * complex_normal(rng, (n, p.K)), B)
        hd = complex_normal(rng, n)
        s = (math.sqrt(p.beta_d) * np.abs(hd) + math.sqrt(p.beta_l) * np.abs(vg).sum(axis=1)) ** 2
        se = s.std(ddof=1) / math.sqrt(n)
        assert abs(s.mean() - rate.mean_received_gain(p)) <= 3 * se


def test_bound_dominates_small_sweep(defaults):
    for B in (1, 2, 5, 12, 40):
        p = defaults.with_(B=B)
        r = mc_achievable_rate(p, 1000, 3)
        assert rate_upper_bound(p) >= r.rate - 3 * r.stderr
