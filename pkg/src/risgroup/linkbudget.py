"""Link budget: dB conversions, path loss and the linear system parameters."""

from __future__ import annotations

import math
from dataclasses import dataclass, field


def db_to_linear(x_db: float) -> float:
    """Convert a dB (or dBm) value to a linear ratio (or mW)."""
    return 10.0 ** (x_db / 10.0)


def linear_to_db(x: float) -> float:
    if x <= 0:
        raise ValueError(f"linear value must be positive, got {x}")
    return 10.0 * math.log10(x)


@dataclass(frozen=True)
class Geometry:
    """Source, RIS and destination placement.

    The source and the RIS sit on a horizontal line ``d0`` metres apart. The
    destination is ``d`` metres from the source along that line and ``dv``
    metres off it.
    """

    d0: float = 51.0
    d: float = 48.0
    dv: float = 2.0

    def __post_init__(self):
        if self.d0 <= 0 or self.d <= 0 or self.dv < 0:
            raise ValueError(f"invalid geometry {self}")
        if self.d_rd <= 0:
            raise ValueError("RIS-destination distance must be positive")

    @property
    def d_sr(self) -> float:
        return self.d0

    @property
    def d_rd(self) -> float:
        return math.hypot(self.d0 - self.d, self.dv)


@dataclass(frozen=True)
class PathLossModel:
    c0_db: float = -30.0
    alpha_direct: float = 3.5
    alpha_cascaded: float = 2.0

    def __post_init__(self):
        if self.alpha_direct < 0 or self.alpha_cascaded < 0:
            raise ValueError("path loss exponents must be non-negative")


def pathloss_direct(geom: Geometry, model: PathLossModel) -> float:
    if geom.d <= 0:
        raise ValueError("direct distance must be positive")
    return db_to_linear(model.c0_db) * geom.d ** (-model.alpha_direct)


def pathloss_cascaded(geom: Geometry, model: PathLossModel) -> float:
    """Cascaded gain: the reference loss applied once to ``d_sr * d_rd``."""
    d_sr, d_rd = geom.d_sr, geom.d_rd
    if d_sr <= 0 or d_rd <= 0:
        raise ValueError("cascaded distances must be positive")
    return db_to_linear(model.c0_db) * (d_sr * d_rd) ** (-model.alpha_cascaded)


def transmit_snr(p_dbm: float, noise_dbm: float) -> float:
    return db_to_linear(p_dbm - noise_dbm)


@dataclass(frozen=True)
class SystemParams:
    """Linear-scale parameters shared by the simulator and the bounds.

    Powers are kept in dBm for reporting; every computation reads the
    linear properties (``p_tr``, ``p``, ``noise``, ``gamma``).
    """

    K: int = 360
    B: int = 1
    T_c: int = 900
    P_tr_dbm: float = 0.0
    P_dbm: float = 0.0
    noise_dbm: float = -80.0
    beta_d: float = field(default_factory=lambda: pathloss_direct(Geometry(), PathLossModel()))
    beta_l: float = field(default_factory=lambda: pathloss_cascaded(Geometry(), PathLossModel()))

    def __post_init__(self):
        if self.K < 1:
            raise ValueError(f"K must be >= 1, got {self.K}")
        if not 1 <= self.B <= self.K:
            raise ValueError(f"group size B={self.B} outside [1, {self.K}]")
        if self.T_c < 1:
            raise ValueError(f"T_c must be >= 1, got {self.T_c}")
        if self.beta_d < 0 or self.beta_l < 0:
            raise ValueError("path loss gains must be non-negative")

    @classmethod
    def from_scenario(
        cls,
        K: int = 360,
        B: int = 1,
        T_c: int = 900,
        P_tr_dbm: float = 0.0,
        P_dbm: float = 0.0,
        noise_dbm: float = -80.0,
        geometry: Geometry | None = None,
        model: PathLossModel | None = None,
    ) -> "SystemParams":
        geometry = geometry or Geometry()
        model = model or PathLossModel()
        return cls(
            K=K,
            B=B,
            T_c=T_c,
            P_tr_dbm=P_tr_dbm,
            P_dbm=P_dbm,
            noise_dbm=noise_dbm,
            beta_d=pathloss_direct(geometry, model),
            beta_l=pathloss_cascaded(geometry, model),
        )

    @property
    def k_prime(self) -> int:
        return self.K // self.B

    @property
    def prefactor(self) -> float:
        return 1.0 - (self.k_prime + 1) / self.T_c

    @property
    def p_tr(self) -> float:
        return db_to_linear(self.P_tr_dbm)

    @property
    def p(self) -> float:
        return db_to_linear(self.P_dbm)

    @property
    def noise(self) -> float:
        return db_to_linear(self.noise_dbm)

    @property
    def gamma(self) -> float:
        return transmit_snr(self.P_dbm, self.noise_dbm)

    def with_(self, **changes) -> "SystemParams":
        from dataclasses import replace

        return replace(self, **changes)
