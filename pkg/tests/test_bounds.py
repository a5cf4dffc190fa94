"""Closed-form guarantees: frozen values, domain checks, and envelope invariants.

Every frozen constant below was computed independently (high-precision arithmetic
or a direct numerical check) before being pinned here.
"""

import numpy as np
import pytest

from spectrunc import (
    additive_error_bound,
    completion_sampling_threshold,
    covariance_admissible,
    denoising_error_bound,
    exponential_error_rate,
    exponential_rank_cutoff,
    gap_error_bound,
    powerlaw_error_rate,
    powerlaw_rank_cutoff,
    relative_error_bound,
    sample_covariance_rates,
    spectral_envelope,
)


# ------------------------------------------------------------ relative bound


def test_relative_bound_frozen_unit_tail():
    rep = relative_error_bound(k=1, eps=0.25, tail_F=1.0, tail_2=1.0)
    assert rep.value == pytest.approx(18.015611460128483, rel=1e-14)
    assert rep.value == pytest.approx(18.0157, abs=1e-3)
    assert rep.precondition_holds  # nothing measured, nothing to violate
    assert rep.margin is None


def test_relative_bound_frozen_second():
    rep = relative_error_bound(k=4, eps=0.1, tail_F=2.0, tail_2=0.5)
    # (1 + 3.2)*2 + 102*sqrt(8)*0.01*0.5 = 9.8424978...
    assert rep.value == pytest.approx(9.842497833620557, rel=1e-14)


def test_relative_bound_structure():
    k, eps, tf, t2 = 3, 0.2, 1.5, 0.7
    rep = relative_error_bound(k=k, eps=eps, tail_F=tf, tail_2=t2)
    expect = (1 + 32 * eps) * tf + 102 * np.sqrt(2 * k) * eps**2 * t2
    assert rep.value == pytest.approx(expect, rel=1e-15)
    assert rep.inputs["k"] == k


def test_relative_bound_precondition_margin():
    allowance = 0.25**2 * 1.0
    ok = relative_error_bound(k=1, eps=0.25, tail_F=1.0, tail_2=1.0,
                              perturbation_2=allowance)
    assert ok.precondition_holds
    assert ok.margin == pytest.approx(0.0, abs=1e-12)
    bad = relative_error_bound(k=1, eps=0.25, tail_F=1.0, tail_2=1.0,
                               perturbation_2=allowance * 1.01)
    assert not bad.precondition_holds
    assert bad.margin < 0


def test_relative_bound_domain():
    for eps in (0.0, 0.26, -0.1, 1.0):
        with pytest.raises(ValueError):
            relative_error_bound(k=1, eps=eps, tail_F=1.0, tail_2=1.0)
    with pytest.raises(ValueError):
        relative_error_bound(k=0, eps=0.1, tail_F=1.0, tail_2=1.0)
    with pytest.raises(ValueError):
        relative_error_bound(k=1, eps=0.1, tail_F=-1.0, tail_2=1.0)


# ----------------------------------------------------------------- gap bound


def test_gap_bound_frozen():
    rep = gap_error_bound(k=8, eps=0.25, gap=0.5, tail_F=3.0)
    assert rep.value == pytest.approx(54.0, rel=1e-13)
    rep2 = gap_error_bound(k=2, eps=0.1, gap=1.0, tail_F=0.0)
    assert rep2.value == pytest.approx(20.4, rel=1e-13)


def test_gap_bound_precondition_uses_gap_scale():
    ok = gap_error_bound(k=2, eps=0.1, gap=1.0, tail_F=0.0, perturbation_2=0.1)
    assert ok.precondition_holds
    bad = gap_error_bound(k=2, eps=0.1, gap=1.0, tail_F=0.0, perturbation_2=0.11)
    assert not bad.precondition_holds
    # gap = 0 degenerates gracefully: only a zero perturbation qualifies
    zero = gap_error_bound(k=2, eps=0.1, gap=0.0, tail_F=1.5)
    assert zero.value == pytest.approx(1.5, rel=1e-15)


# ------------------------------------------------------------ additive bound


def test_additive_bound_frozen():
    rep = additive_error_bound(k=16, delta=0.01, tail_F=1.0, head_F=4.0)
    # 1 + 4*0.01 + 2*2*sqrt(0.04) = 1.84
    assert rep.value == pytest.approx(1.84, rel=1e-13)


def test_additive_bound_zero_noise_collapses_to_tail():
    rep = additive_error_bound(k=5, delta=0.0, tail_F=2.5, head_F=9.0)
    assert rep.value == pytest.approx(2.5, rel=1e-15)


# -------------------------------------------------------------- envelope


def test_envelope_frozen_three_regimes():
    sig = np.array([3.0, 1.25, 1.2, 1.18, 1.0])
    env = spectral_envelope(sig, k=2, eps=0.1)
    assert (env.m1, env.m2) == (1, 4)
    flat = spectral_envelope(np.ones(6), k=3, eps=0.1)
    assert (flat.m1, flat.m2) == (0, 6)
    steep = spectral_envelope(np.array([10.0, 1.0, 0.1, 0.01]), k=1, eps=0.25)
    assert (steep.m1, steep.m2) == (1, 1)


def test_envelope_invariants_random():
    rng = np.random.default_rng(20260823)
    for _ in range(10_000):
        n = int(rng.integers(2, 30))
        sig = np.sort(np.abs(rng.standard_normal(n)))[::-1] + 1e-6
        k = int(rng.integers(1, n))
        eps = float(rng.uniform(0.01, 0.25))
        env = spectral_envelope(sig, k=k, eps=eps)
        assert 0 <= env.m1 <= k <= env.m2 <= n
        hi = (1 + 2 * eps) * sig[k]
        lo = sig[k - 1] - 2 * eps * sig[k]
        if env.m1 >= 1:
            assert sig[env.m1 - 1] >= hi
        for j in range(env.m1, k):
            assert sig[j] < hi
        for j in range(k, env.m2):
            assert sig[j] >= lo
        if env.m2 < n:
            assert sig[env.m2] < lo


def test_envelope_domain():
    with pytest.raises(ValueError):
        spectral_envelope(np.array([2.0, 1.0]), k=2, eps=0.1)  # needs k < n
    with pytest.raises(ValueError):
        spectral_envelope(np.array([2.0, 1.0]), k=1, eps=0.3)


# ------------------------------------------------------- decay-rate formulas


def test_powerlaw_cutoff_frozen():
    assert powerlaw_rank_cutoff(0.01, beta=1.0, n=10_000) == 99
    assert powerlaw_rank_cutoff(0.01, beta=1.0, n=100) == 99
    assert powerlaw_rank_cutoff(0.5, beta=1.0, n=2) == 1


def test_powerlaw_rate_frozen():
    assert powerlaw_error_rate(1e-4, beta=1.0, n=10**6) == pytest.approx(0.01, rel=1e-12)
    assert powerlaw_error_rate(1e-6, beta=1.0, n=100) == pytest.approx(0.1, rel=1e-12)


def test_powerlaw_domain():
    with pytest.raises(ValueError):
        powerlaw_rank_cutoff(0.01, beta=0.5, n=100)  # too slow to be summable
    with pytest.raises(ValueError):
        powerlaw_rank_cutoff(0.6, beta=1.0, n=100)  # delta above 1/2
    with pytest.raises(ValueError):
        powerlaw_rank_cutoff(0.5, beta=1.0, n=1)  # no room for a cutoff


def test_exponential_cutoff_frozen():
    d = float(np.exp(-20.0))
    assert exponential_rank_cutoff(d, c=1.0, n=10**6) == 16
    assert exponential_rank_cutoff(d, c=1.0, n=10) == 9
    assert exponential_rank_cutoff(d, c=2.0, n=10**6) == 7


def test_exponential_rate_frozen():
    d = float(np.exp(-20.0))
    r = exponential_error_rate(d, c=1.0, n=100)
    assert r == pytest.approx(1.844e-7, rel=1e-3)
    assert r == pytest.approx(d * 20.0**1.5, rel=1e-12)
    # small n switches to the floor term sqrt(n) * exp(-c n)
    r4 = exponential_error_rate(d, c=1.0, n=4)
    assert r4 == pytest.approx(2.0 * np.exp(-4.0), rel=1e-12)


def test_exponential_domain():
    with pytest.raises(ValueError):
        exponential_rank_cutoff(1e-3, c=1.0, n=100)  # delta must sit below e^-16
    with pytest.raises(ValueError):
        exponential_error_rate(0.0, c=1.0, n=100)


# --------------------------------------------------------- sampling threshold


def test_sampling_threshold_sqrt_k_formula():
    n, k, t = 64, 4, 0.5
    thr = completion_sampling_threshold(
        mu0=1.0, norm_F=np.sqrt(float(k)), sigma_k1=1.0, gap=1.0,
        n=n, t=t, eps=0.1, k=k, regime="sqrt_k",
    )
    expect = 8.0 * k * np.log(n / t) / n
    assert thr.p_raw == pytest.approx(expect, rel=1e-12)
    assert thr.p == pytest.approx(min(1.0, expect), rel=1e-12)
    assert thr.regime == "sqrt_k"


def test_sampling_threshold_relative_scales_sqrt_k():
    kw = dict(mu0=2.0, norm_F=4.0, sigma_k1=0.5, gap=0.2, n=128, t=0.1, k=3)
    base = completion_sampling_threshold(eps=0.1, regime="sqrt_k", **kw)
    rel = completion_sampling_threshold(eps=0.1, regime="relative", **kw)
    assert rel.p_raw == pytest.approx(base.p_raw * max(0.1**-4, 9.0), rel=1e-12)
    assert rel.vacuous and rel.p == 1.0


def test_sampling_threshold_gap_regime():
    thr = completion_sampling_threshold(
        mu0=1.5, norm_F=3.0, sigma_k1=0.5, gap=0.4, n=100, t=0.5,
        eps=0.2, k=2, regime="gap",
    )
    expect = 8.0 * 1.5**2 * 9.0 * np.log(200.0) / 100.0 * 2.0 / (0.04 * 0.16)
    assert thr.p_raw == pytest.approx(expect, rel=1e-12)
    assert thr.vacuous and thr.p == 1.0


def test_sampling_threshold_domain():
    kw = dict(mu0=1.0, norm_F=1.0, n=10, t=0.5, eps=0.1, k=1)
    with pytest.raises(ValueError):
        completion_sampling_threshold(sigma_k1=0.0, gap=1.0, regime="sqrt_k", **kw)
    with pytest.raises(ValueError):
        completion_sampling_threshold(sigma_k1=1.0, gap=0.0, regime="gap", **kw)
    with pytest.raises(ValueError):
        completion_sampling_threshold(sigma_k1=1.0, gap=1.0, regime="nope", **kw)
    with pytest.raises(ValueError):
        completion_sampling_threshold(sigma_k1=1.0, gap=1.0, regime="sqrt_k",
                                      mu0=1.0, norm_F=1.0, n=10, t=1.0,
                                      eps=0.1, k=1)  # t must sit inside (0, 1)


# ------------------------------------------------------------- denoising


def test_denoising_bound_frozen():
    rep = denoising_error_bound(nu=0.01, sigma_k1=1.0, k=1, tail_F=1.0)
    # (1 + 0.1)*1 + 3*0.01 = 1.13
    assert rep.value == pytest.approx(1.13, rel=1e-13)
    assert rep.precondition_holds


def test_denoising_bound_precondition():
    rep = denoising_error_bound(nu=0.3, sigma_k1=1.0, k=1, tail_F=1.0)
    assert not rep.precondition_holds
    assert rep.margin < 0
    ok = denoising_error_bound(nu=0.24, sigma_k1=1.0, k=1, tail_F=1.0)
    assert ok.precondition_holds


# ------------------------------------------------------------- covariance


def test_covariance_admissible_frozen():
    rep = covariance_admissible(
        r_e=5.0, eps=0.25, k=2, gamma_k=2.0, N=10**6, mode="relative",
    )
    assert rep.expr == pytest.approx(0.07073541405677708, rel=1e-12)
    assert rep.admissible
    assert rep.multiplier == pytest.approx(1.25, rel=1e-15)


def test_covariance_admissible_rejects_infinite_ratio():
    with pytest.raises(ValueError):
        covariance_admissible(
            r_e=5.0, eps=0.25, k=2, gamma_k=np.inf, N=10**6, mode="relative",
        )


def test_covariance_admissible_gap_mode():
    rep = covariance_admissible(
        r_e=3.0, eps=0.2, k=2, gamma_k=1.0, N=10**4, mode="gap",
        norm_2=2.0, gap=0.5,
    )
    expect = 3.0 * 2 * 4.0 * np.log(10**4) / (10**4 * 0.04 * 0.25)
    assert rep.expr == pytest.approx(expect, rel=1e-12)
    with pytest.raises(ValueError):
        covariance_admissible(r_e=3.0, eps=0.2, k=2, gamma_k=1.0, N=10**4,
                              mode="gap")  # gap mode needs norm_2 and gap


def test_sample_covariance_rates_frozen():
    pair = sample_covariance_rates(norm_2=2.0, r_e=10.0, N=10**4, n=100)
    assert pair.frobenius == pytest.approx(0.6069708517540586, rel=1e-12)
    assert pair.frobenius == pytest.approx(0.607, abs=1e-3)
    ln_nn = np.log(10**4 * 100)
    expect_spec = 2.0 * max(np.sqrt(10.0 * ln_nn / 10**4), 10.0 * ln_nn / 10**4)
    assert pair.spectral == pytest.approx(expect_spec, rel=1e-12)


def test_sample_covariance_rates_large_rank_branch():
    # once r_e ln(Nn)/N exceeds 1 the linear term dominates the square root
    pair = sample_covariance_rates(norm_2=1.0, r_e=500.0, N=100, n=10)
    lin = 500.0 * np.log(1000.0) / 100.0
    assert pair.spectral == pytest.approx(lin, rel=1e-12)
