"""Optimal group size: exhaustive search on the bound and the Lambert-W closed form."""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np

from .channel import gamma_ratio
from .linkbudget import SystemParams
from .rate import mc_achievable_rate, rate_upper_bound

# printed constants of the closed form: z ~ 0.8759 sqrt(B), c = 0.7671 beta_l, zeta = 2.08 beta_l
KAPPA = 0.8759
C_COEF = 0.7671
ZETA_COEF = 2.08


class Method(enum.Enum):
    BRUTE_FORCE = "brute_force"
    CLOSED_FORM = "closed_form"
    CLOSED_FORM_ALT = "closed_form_alt"
    MONTE_CARLO = "monte_carlo"


@dataclass(frozen=True)
class GroupSizeResult:
    b_star: int
    rate_bound: float
    method: Method
    k_prime: int


@dataclass(frozen=True)
class PowerFit:
    kappa: float
    eta: float
    residual: float


def lambert_w0(x: float) -> float:
    """Principal branch of the Lambert W function for ``x >= 0``.

    Starts from a series (small ``x``) or the asymptotic ``log x - log log x``
    expansion (large ``x``) and refines with Halley's method.
    """
    x = float(x)
    if x < 0 or math.isnan(x):
        raise ValueError(f"lambert_w0 is defined here for x >= 0 only, got {x}")
    if x == 0.0:
        return 0.0
    if math.isinf(x):
        return math.inf
    if x < 0.25:
        w = x * (1.0 - x * (1.0 - 1.5 * x))
    elif x <= math.e:
        w = math.log1p(x) * (1.0 - math.log1p(math.log1p(x)) / (2.0 + math.log1p(x)))
    else:
        l1 = math.log(x)
        l2 = math.log(l1)
        w = l1 - l2 + l2 / l1
    for _ in range(64):
        ew = math.exp(w)
        f = w * ew - x
        wp1 = w + 1.0
        dw = f / (ew * wp1 - (w + 2.0) * f / (2.0 * wp1))
        w -= dw
        if abs(dw) <= 4e-16 * (1.0 + abs(w)):
            break
    return w


def fit_z_power(b_max: int = 64, *, eta: float | None = 0.5) -> PowerFit:
    """Least-squares fit of ``log z(B) = log kappa + eta log B`` over ``B = 1..b_max``.

    By default the exponent is held at the square-root law (``eta=0.5``) and
    only ``kappa`` is fitted; ``eta=None`` fits both.
    """
    if b_max < 2:
        raise ValueError("need at least two points to fit")
    B = np.arange(1, b_max + 1, dtype=float)
    logz = np.log([gamma_ratio(int(b)) for b in B])
    return _fit_log_power(B, logz, eta)


def _fit_log_power(x: np.ndarray, logy: np.ndarray, eta: float | None) -> PowerFit:
    logx = np.log(x)
    if eta is None:
        A = np.column_stack([np.ones_like(logx), logx])
        (log_kappa, eta), *_ = np.linalg.lstsq(A, logy, rcond=None)
    else:
        log_kappa = float(np.mean(logy - eta * logx))
    resid = logy - (log_kappa + eta * logx)
    return PowerFit(kappa=float(math.exp(log_kappa)), eta=float(eta), residual=float(np.sqrt(np.mean(resid**2))))


def zeta(params: SystemParams, constants: str = "paper") -> float:
    """Closed-form scale ``zeta = e * kappa^2 * beta_l``.

    ``constants="paper"`` uses the printed 2.08; ``"fit"`` refits kappa over
    ``B = 1..64``.
    """
    if constants == "paper":
        return ZETA_COEF * params.beta_l
    if constants == "fit":
        kappa = fit_z_power(64).kappa
        return math.e * kappa * kappa * params.beta_l
    raise ValueError(f"constants must be 'paper' or 'fit', got {constants!r}")


def _check(params: SystemParams):
    if params.T_c <= 1:
        raise ValueError("closed form needs T_c > 1")
    if params.gamma <= 0 or params.beta_l <= 0:
        raise ValueError("closed form needs positive SNR and cascaded gain")


def _result(params: SystemParams, b: int, method: Method) -> GroupSizeResult:
    b = min(max(b, 1), params.K)
    p = params.with_(B=b)
    try:
        rb = rate_upper_bound(p)
    except ValueError:
        rb = math.nan
    return GroupSizeResult(b_star=b, rate_bound=rb, method=method, k_prime=p.k_prime)


def optimal_group_closed_form(params: SystemParams, constants: str = "paper") -> GroupSizeResult:
    _check(params)
    K, tc1 = params.K, params.T_c - 1
    w = lambert_w0(zeta(params, constants) * params.gamma * tc1 * K)
    return _result(params, math.floor(K / tc1 * w + 0.5), Method.CLOSED_FORM)


def optimal_group_alt_form(params: SystemParams, constants: str = "paper") -> GroupSizeResult:
    _check(params)
    K, tc1 = params.K, params.T_c - 1
    zg = zeta(params, constants) * params.gamma
    b = math.floor(zg * K * K * math.exp(-lambert_w0(zg * K * tc1)) + 0.5)
    return _result(params, b, Method.CLOSED_FORM_ALT)


def feasible_group_sizes(params: SystemParams) -> list[int]:
    return [b for b in range(1, params.K + 1) if params.K // b + 1 < params.T_c]


def bound_curve(params: SystemParams) -> dict[int, float]:
    """Upper bound at every group size with a positive prefactor."""
    return {b: rate_upper_bound(params.with_(B=b)) for b in feasible_group_sizes(params)}


def optimal_group_brute_force(params: SystemParams) -> GroupSizeResult:
    curve = bound_curve(params)
    if not curve:
        raise ValueError(f"no group size has a positive prefactor at T_c={params.T_c}")
    best_b, best = None, -math.inf
    for b, r in curve.items():
        if r > best:  # ascending scan, so ties keep the smaller B
            best_b, best = b, r
    return GroupSizeResult(b_star=best_b, rate_bound=best, method=Method.BRUTE_FORCE, k_prime=params.K // best_b)


def optimal_group_mc(
    params: SystemParams, candidates=None, trials: int = 2000, master_seed: int = 0
) -> GroupSizeResult:
    """Search on the simulated rate instead of the bound (slow)."""
    candidates = candidates or feasible_group_sizes(params)
    rates = {b: mc_achievable_rate(params.with_(B=b), trials, master_seed).rate for b in candidates}
    b = max(rates, key=lambda k: (rates[k], -k))
    return _result(params, b, Method.MONTE_CARLO)
