"""Monte-Carlo achievable rate with pilot overhead, and its closed-form upper bound."""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from ._backend import get_kernels
from .beamforming import Mode, PhaseConfig
from .channel import ChannelRealization, gamma_ratio
from .estimation import pilot_matrix
from .linkbudget import SystemParams

# trials per kernel call; fixed so results do not depend on the worker count
CHUNK = 256


@dataclass(frozen=True)
class RateResult:
    rate: float
    stderr: float
    trials: int
    prefactor: float


@dataclass(frozen=True)
class BoundCoefficients:
    z: float
    xi1: float
    xi2: float


def trial_rng(master_seed: int, trial: int) -> np.random.Generator:
    """Counter-based stream for one trial: Philox keyed by the seed, counter word 3 = trial.

    Feeding it through :func:`sample_channels` then :func:`simulate_pilots`
    reproduces the draws of trial ``trial`` in the Monte-Carlo drivers.
    """
    if not 0 <= master_seed < 2**64 or trial < 0:
        raise ValueError("seed must be in [0, 2**64) and trial index non-negative")
    return np.random.Generator(np.random.Philox(key=master_seed, counter=[0, 0, 0, trial]))


def instantaneous_snr(realization: ChannelRealization, config: PhaseConfig, params: SystemParams) -> float:
    coef = np.asarray(config.coefficients)
    if config.mode is Mode.GROUPED:
        if realization.v_grouped is None:
            raise ValueError("realization has not been grouped")
        v = realization.v_grouped
        if v.shape != coef.shape:
            raise ValueError(f"{coef.shape[0]} coefficients for {v.shape[0]} subgroups")
    else:
        if coef.shape[0] > realization.K:
            raise ValueError(f"{coef.shape[0]} switched-on elements but K={realization.K}")
        v = realization.v[: coef.shape[0]]
    s = math.sqrt(params.beta_d) * realization.h_d + math.sqrt(params.beta_l) * np.dot(coef, v)
    return params.gamma * abs(s) ** 2


def _check_prefactor(n_estimated: int, T_c: int) -> float:
    pre = 1.0 - (n_estimated + 1) / T_c
    if pre <= 0:
        raise ValueError(
            f"pilot overhead {n_estimated + 1} uses the whole coherence block T_c={T_c}; "
            "increase T_c or the group size"
        )
    return pre


def _chunk_snr(params: SystemParams, n_on: int | None, csi: str, seed: int, start: int, stop: int, kernels):
    """SNR for trials ``start..stop-1``; ``n_on`` is None for grouping."""
    k_est = params.k_prime if n_on is None else n_on
    return kernels.simulate_trials(
        seed,
        start,
        stop,
        params.K,
        params.B,
        n_on or 0,
        math.sqrt(params.beta_d),
        math.sqrt(params.beta_l),
        math.sqrt(params.noise),
        math.sqrt(params.p_tr),
        params.gamma,
        pilot_matrix(k_est).phase_matrix,
        csi == "perfect",
    )


def _run(params, n_on, trials, master_seed, csi, workers, backend) -> RateResult:
    if trials < 1:
        raise ValueError("trials must be >= 1")
    if csi not in ("estimated", "perfect"):
        raise ValueError(f"csi must be 'estimated' or 'perfect', got {csi!r}")
    if not 0 <= master_seed < 2**64:
        raise ValueError("master_seed must be in [0, 2**64)")
    pre = _check_prefactor(params.k_prime if n_on is None else n_on, params.T_c)
    kernels = get_kernels(backend)
    bounds = [(s, min(s + CHUNK, trials)) for s in range(0, trials, CHUNK)]

    def work(b):
        return _chunk_snr(params, n_on, csi, master_seed, b[0], b[1], kernels)

    if workers and workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as ex:
            parts = list(ex.map(work, bounds))
    else:
        parts = [work(b) for b in bounds]
    terms = np.log2(1.0 + np.concatenate(parts))
    mean = float(np.mean(terms))
    sd = float(np.std(terms, ddof=1)) if trials > 1 else 0.0
    return RateResult(rate=pre * mean, stderr=pre * sd / math.sqrt(trials), trials=trials, prefactor=pre)


def mc_achievable_rate(
    params: SystemParams,
    trials: int = 10_000,
    master_seed: int = 0,
    *,
    csi: str = "estimated",
    workers: int = 1,
    backend: str | None = None,
) -> RateResult:
    """Monte-Carlo achievable rate of the grouped scheme.

    Each trial draws a channel, grouping it, sending ``K'+1`` pilots, forming
    the LS estimate, designing the phases from it and evaluating the data SNR.
    ``csi="perfect"`` skips estimation and uses the ideal phases. The result
    depends only on ``(params, trials, master_seed)``, not on ``workers``.
    """
    return _run(params, None, trials, master_seed, csi, workers, backend)


def mc_onoff_rate(
    params: SystemParams,
    K_on: int,
    trials: int = 10_000,
    master_seed: int = 0,
    *,
    csi: str = "estimated",
    workers: int = 1,
    backend: str | None = None,
) -> RateResult:
    """Monte-Carlo rate of the On-Off baseline with the first ``K_on`` elements on.

    ``params.B`` is ignored. With the same seed the channel draws coincide
    with :func:`mc_achievable_rate` (common random numbers).
    """
    if not 1 <= K_on <= params.K:
        raise ValueError(f"K_on={K_on} outside [1, {params.K}]")
    return _run(params, K_on, trials, master_seed, csi, workers, backend)


def z_ratio(B: int) -> float:
    """Mean magnitude of a sum of ``B`` unit-variance cascaded coefficients."""
    return gamma_ratio(B)


def bound_coefficients(B: int, beta_d: float, beta_l: float) -> BoundCoefficients:
    if B < 1:
        raise ValueError(f"B must be >= 1, got {B}")
    if beta_d < 0 or beta_l < 0:
        raise ValueError("path loss gains must be non-negative")
    z = z_ratio(B)
    xi1 = beta_l * z * z
    xi2 = beta_l * (B - z * z) + math.sqrt(math.pi * beta_d * beta_l) * z
    return BoundCoefficients(z=z, xi1=xi1, xi2=xi2)


def mean_received_gain(params: SystemParams) -> float:
    """Mean of the combined channel power under ideal phases."""
    co = bound_coefficients(params.B, params.beta_d, params.beta_l)
    kp = params.k_prime
    return co.xi1 * kp * kp + co.xi2 * kp + params.beta_d


def rate_upper_bound(params: SystemParams) -> float:
    pre = _check_prefactor(params.k_prime, params.T_c)
    return pre * math.log2(1.0 + params.gamma * mean_received_gain(params))
