"""Reflection coefficient design: perfect CSI, estimated CSI and On-Off."""

from __future__ import annotations

import enum
import logging
from dataclasses import dataclass

import numpy as np

from .estimation import ChannelEstimate

log = logging.getLogger(__name__)


class Mode(enum.Enum):
    GROUPED = "grouped"
    ONOFF = "onoff"


@dataclass(frozen=True)
class PhaseConfig:
    """Unit-modulus coefficients, one per subgroup (or per switched-on element).

    In ``ONOFF`` mode the coefficients drive the first ``len(coefficients)``
    elements; every other element reflects nothing.
    """

    coefficients: np.ndarray
    mode: Mode = Mode.GROUPED


def align_phases(h_d, v) -> np.ndarray:
    """``exp(j arg(h_d / v_i))`` along the last axis; zero ``v_i`` gives 1.

    Accepts batches: ``h_d`` of shape ``(n,)`` with ``v`` of shape ``(n, m)``.
    """
    v = np.asarray(v)
    h_d = np.asarray(h_d)
    if v.ndim > h_d.ndim:
        h_d = h_d[..., None]
    zero = v == 0
    if np.any(zero):
        log.warning("zero channel coefficient in phase design; using phase 0")
    ratio = h_d * np.conj(np.where(zero, 1.0, v))
    mag = np.abs(ratio)
    out = np.where(mag > 0, ratio / np.where(mag > 0, mag, 1.0), 1.0 + 0j)
    return np.where(zero, 1.0 + 0j, out)


def optimal_phases(h_d: complex, v_grouped) -> PhaseConfig:
    v_grouped = np.asarray(v_grouped, dtype=complex)
    if v_grouped.size == 0:
        raise ValueError("v_grouped must be nonempty")
    return PhaseConfig(align_phases(h_d, v_grouped))


def estimated_phases(est: ChannelEstimate) -> PhaseConfig:
    v_hat = np.asarray(est.v_grouped_hat, dtype=complex)
    if not (np.all(np.isfinite(v_hat)) and np.isfinite(est.h_d_hat)):
        raise ValueError("channel estimate contains non-finite entries")
    if v_hat.size == 0:
        raise ValueError("estimate has no cascaded entries")
    return PhaseConfig(align_phases(est.h_d_hat, v_hat))


def onoff_config(h_d_hat: complex, v_hat_on) -> PhaseConfig:
    v_hat_on = np.asarray(v_hat_on, dtype=complex)
    if v_hat_on.size == 0:
        raise ValueError("On-Off needs at least one switched-on element")
    return PhaseConfig(align_phases(h_d_hat, v_hat_on), Mode.ONOFF)
