"""Pure numpy implementation of the Monte-Carlo hot loop.

Mirrors ``_kernels.pyx`` trial for trial: same Philox streams, same draw
order, same estimator. Selected by ``risgroup._backend`` when the compiled
module is unavailable.
"""

import numpy as np

from .beamforming import align_phases
from .channel import complex_normal


def trial_rng(seed, trial):
    return np.random.Generator(np.random.Philox(key=seed, counter=[0, 0, 0, trial]))


def simulate_trials(seed, start, stop, K, B, n_on, sqrt_bd, sqrt_bl, sigma, sqrt_ptr, gamma, phi, perfect):
    """Instantaneous data SNR for trials ``start..stop-1``.

    Parameters
    ----------
    seed : int
        Master seed; trial ``t`` uses Philox keyed by ``seed`` with counter word 3 set to ``t``.
    K, B : int
        RIS size and group size.
    n_on : int
        Number of switched-on elements for the On-Off scheme, or 0 for grouping.
    sqrt_bd, sqrt_bl : float
        Square roots of the direct and cascaded path gains.
    sigma : float
        Pilot noise standard deviation.
    sqrt_ptr, gamma : float
        Square root of the pilot power, and the transmit SNR.
    phi : (T_p, T_p) complex
        Pilot schedule; ``T_p`` must equal ``K // B + 1`` (or ``n_on + 1``).
    perfect : bool
        Use ideal phases instead of LS-estimated ones.

    Returns
    -------
    (stop - start,) float
    """
    n = stop - start
    k_est = n_on if n_on > 0 else K // B
    t_p = k_est + 1
    if phi.shape != (t_p, t_p):
        raise ValueError("schedule shape does not match the estimated channel")
    c = np.empty((n, t_p), dtype=complex)
    noise = np.empty((n, t_p), dtype=complex)
    for row in range(n):
        rng = trial_rng(seed, start + row)
        h = complex_normal(rng, K)
        g = complex_normal(rng, K)
        h_d = complex_normal(rng, 1)[0]
        noise[row] = sigma * complex_normal(rng, t_p)
        v = h * g
        c[row, 0] = sqrt_bd * h_d
        if n_on > 0:
            c[row, 1:] = sqrt_bl * v[:n_on]
        else:
            c[row, 1:] = sqrt_bl * v[: k_est * B].reshape(k_est, B).sum(axis=1)
    if perfect:
        s = np.abs(c[:, 0]) + np.abs(c[:, 1:]).sum(axis=1)
        return gamma * s * s
    y = sqrt_ptr * (c @ phi.T) + noise
    est = (y @ phi.conj()) / (t_p * sqrt_ptr)
    coef = align_phases(est[:, 0], est[:, 1:])
    s = c[:, 0] + np.sum(coef * c[:, 1:], axis=1)
    return gamma * (s.real * s.real + s.imag * s.imag)


def philox_raw(seed, trial, n):
    """First ``n`` raw 64-bit outputs of a trial stream (for cross-checks)."""
    return np.random.Philox(key=seed, counter=[0, 0, 0, trial]).random_raw(n)
