"""Rayleigh fading draws, software grouping and the grouped-channel moments."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np


@dataclass
class ChannelRealization:
    h: np.ndarray
    g: np.ndarray
    h_d: complex
    v: np.ndarray
    v_grouped: np.ndarray | None = None

    @property
    def K(self) -> int:
        return self.v.shape[0]

    def grouped(self, B: int) -> "ChannelRealization":
        """Return a copy with ``v_grouped`` set for group size ``B``."""
        return ChannelRealization(self.h, self.g, self.h_d, self.v, group_cascade(self.v, B))


@dataclass(frozen=True)
class GroupMoments:
    z4: float
    z5: float


def complex_normal(rng: np.random.Generator, size) -> np.ndarray:
    """Draw CN(0, 1) samples by Box-Muller on pairs of uniforms.

    Each sample consumes two consecutive doubles from ``rng.random``: the first
    sets the magnitude (``|z|^2`` is unit exponential), the second the phase.
    The compiled Monte-Carlo kernel reproduces this stream exactly.
    """
    shape = (size,) if np.isscalar(size) else tuple(size)
    u = rng.random(shape + (2,))
    r = np.sqrt(-np.log1p(-u[..., 0]))
    theta = 2.0 * np.pi * u[..., 1]
    return r * np.cos(theta) + 1j * (r * np.sin(theta))


def sample_channels(K: int, rng: np.random.Generator) -> ChannelRealization:
    """Draw one realization of ``h``, ``g`` and ``h_d``.

    The draw order (``h``, ``g``, ``h_d``) is fixed; the Monte-Carlo driver
    relies on it for common random numbers between schemes.
    """
    if K < 1:
        raise ValueError(f"K must be >= 1, got {K}")
    h = complex_normal(rng, K)
    g = complex_normal(rng, K)
    h_d = complex(complex_normal(rng, 1)[0])
    return ChannelRealization(h=h, g=g, h_d=h_d, v=h * g)


def group_cascade(v: np.ndarray, B: int) -> np.ndarray:
    """Sum the cascaded channel over consecutive groups of ``B`` elements.

    Works on the last axis, so a batch of shape ``(n, K)`` maps to
    ``(n, K // B)``. The trailing ``K mod B`` elements belong to no group and
    are dropped.
    """
    v = np.asarray(v)
    K = v.shape[-1]
    if not 1 <= B <= K:
        raise ValueError(f"group size B={B} outside [1, {K}]")
    k_prime = K // B
    body = v[..., : k_prime * B]
    return body.reshape(*v.shape[:-1], k_prime, B).sum(axis=-1)


def gamma_ratio(B: int) -> float:
    """sqrt(pi) * Gamma(B + 1/2) / (2 * Gamma(B)), via log-Gamma."""
    if B < 1 or int(B) != B:
        raise ValueError(f"B must be a positive integer, got {B}")
    return 0.5 * math.sqrt(math.pi) * math.exp(math.lgamma(B + 0.5) - math.lgamma(B))


def group_moments(B: int) -> GroupMoments:
    """Second and first absolute moments of one grouped coefficient."""
    z5 = gamma_ratio(B)
    return GroupMoments(z4=float(B), z5=z5)
