"""Built-in consistency checks: grouped-channel moments and Lambert W accuracy."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .channel import complex_normal, group_cascade, group_moments
from .optimizer import lambert_w0


@dataclass(frozen=True)
class Check:
    name: str
    estimate: float
    expected: float
    tolerance: float

    @property
    def ok(self) -> bool:
        return abs(self.estimate - self.expected) <= self.tolerance


def _mc(name, samples, expected, n_sigma=3.0) -> Check:
    se = float(np.std(samples, ddof=1) / math.sqrt(samples.shape[0]))
    return Check(name, float(np.mean(samples)), expected, n_sigma * se)


def _batches(total: int, size: int = 10_000):
    for start in range(0, total, size):
        yield min(size, total - start)


def moment_checks(
    group_sizes=(1, 2, 4, 8), k_primes=(1, 4, 16), draws: int = 100_000, seed: int = 0
) -> list[Check]:
    """Monte-Carlo checks of the grouped-channel moments behind the rate bound."""
    rng = np.random.default_rng(seed)
    out = []
    for B in group_sizes:
        z = group_moments(B).z5
        for kp in k_primes:
            K = kp * B
            first, s, hd = [], [], []
            for n in _batches(draws):
                vg = group_cascade(complex_normal(rng, (n, K)) * complex_normal(rng, (n, K)), B)
                a = np.abs(vg)
                first.append(a[:, 0])
                s.append(a.sum(axis=1))
                hd.append(np.abs(complex_normal(rng, n)))
            a0, s, hd = np.concatenate(first), np.concatenate(s), np.concatenate(hd)
            tag = f"B={B} K'={kp}"
            if kp == k_primes[0]:
                out.append(_mc(f"E|v'|^2 {tag}", a0**2, float(B)))
                out.append(_mc(f"E|v'| {tag}", a0, z))
            out.append(_mc(f"E(sum|v'|)^2 {tag}", s**2, kp * B + kp * (kp - 1) * z * z))
            out.append(_mc(f"E|h_d|sum|v'| {tag}", hd * s, 0.5 * math.sqrt(math.pi) * kp * z))
    return out


def lambert_checks(n: int = 181) -> list[Check]:
    xs = np.logspace(-6, 12, n)
    out = []
    for x in xs:
        w = lambert_w0(x)
        out.append(Check(f"W({x:.3e})e^W", w * math.exp(w), float(x), 1e-12 * max(1.0, x)))
    out.append(Check("W(0)", lambert_w0(0.0), 0.0, 1e-14))
    out.append(Check("W(e)", lambert_w0(math.e), 1.0, 1e-14))
    return out


def run_all(draws: int = 100_000, seed: int = 0) -> list[Check]:
    return moment_checks(draws=draws, seed=seed) + lambert_checks()
