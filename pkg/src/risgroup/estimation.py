"""Uplink pilot protocol with a DFT reflection schedule and LS estimation."""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .channel import ChannelRealization, complex_normal
from .linkbudget import SystemParams


@dataclass(frozen=True)
class PilotSchedule:
    """Reflection pattern over ``T_p = K' + 1`` pilot symbols.

    Row ``m`` of ``phase_matrix`` multiplies ``[sqrt(beta_d) h_d, sqrt(beta_l) v']``
    during pilot ``m``; column 0 is the direct path and is all ones.
    """

    phase_matrix: np.ndarray

    @property
    def T_p(self) -> int:
        return self.phase_matrix.shape[0]

    @property
    def k_prime(self) -> int:
        return self.phase_matrix.shape[1] - 1


@dataclass(frozen=True)
class PilotObservation:
    y: np.ndarray


@dataclass(frozen=True)
class ChannelEstimate:
    h_d_hat: complex
    v_grouped_hat: np.ndarray


@lru_cache(maxsize=64)
def _dft(n: int) -> np.ndarray:
    m = np.arange(n)
    # reduce m*k modulo n before the exp to keep the phases exact for large n
    mk = np.outer(m, m) % n
    out = np.exp(-2j * np.pi * mk / n)
    out.setflags(write=False)
    return out


def pilot_matrix(k_prime: int) -> PilotSchedule:
    if k_prime < 1:
        raise ValueError(f"K' must be >= 1, got {k_prime}")
    return PilotSchedule(_dft(k_prime + 1))


def composite_channel(realization: ChannelRealization, params: SystemParams) -> np.ndarray:
    """Stack ``[sqrt(beta_d) h_d, sqrt(beta_l) v']`` into one vector."""
    if realization.v_grouped is None:
        raise ValueError("realization has not been grouped")
    c = np.empty(realization.v_grouped.shape[0] + 1, dtype=complex)
    c[0] = math.sqrt(params.beta_d) * realization.h_d
    c[1:] = math.sqrt(params.beta_l) * realization.v_grouped
    return c


def simulate_pilots(
    realization: ChannelRealization,
    schedule: PilotSchedule,
    params: SystemParams,
    rng: np.random.Generator,
) -> PilotObservation:
    c = composite_channel(realization, params)
    if c.shape[0] != schedule.phase_matrix.shape[1]:
        raise ValueError(
            f"schedule is for K'={schedule.k_prime}, realization has K'={c.shape[0] - 1}"
        )
    noise = math.sqrt(params.noise) * complex_normal(rng, schedule.T_p)
    y = math.sqrt(params.p_tr) * (schedule.phase_matrix @ c) + noise
    return PilotObservation(y)


def ls_estimate(
    obs: PilotObservation, schedule: PilotSchedule, params: SystemParams
) -> ChannelEstimate:
    """LS estimate of the composite direct and grouped cascaded channels.

    The schedule is unitary up to ``sqrt(T_p)``, so the pseudo-inverse is the
    scaled conjugate transpose. Per-entry error variance is
    ``noise / (T_p * p_tr)``.
    """
    y = np.asarray(obs.y)
    if y.shape != (schedule.T_p,):
        raise ValueError(f"expected {schedule.T_p} pilot samples, got {y.shape}")
    est = schedule.phase_matrix.conj().T @ y / (schedule.T_p * math.sqrt(params.p_tr))
    return ChannelEstimate(h_d_hat=complex(est[0]), v_grouped_hat=est[1:])


def ls_error_variance(k_prime: int, params: SystemParams) -> float:
    return params.noise / ((k_prime + 1) * params.p_tr)
