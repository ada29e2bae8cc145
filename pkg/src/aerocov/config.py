"""Scenario parameters shared by every module.

All powers are given in dBm and converted to mW on demand; all SINR math
downstream works in linear mW.
"""
from __future__ import annotations

import dataclasses
import hashlib
import json
from dataclasses import dataclass

import numpy as np

AZIMUTH_MODES = ("aligned", "serving_aligned", "uniform_random", "global_fixed")
MIX_SCALES = ("linear", "db")
STEERING_MODES = ("transpose", "hermitian")

GROUND_HEIGHT = 1.5
MAX_HEIGHT = 300.0


class ConfigError(ValueError):
    """Raised when a parameter set violates a scenario invariant."""


def dbm_to_mw(dbm):
    return 10.0 ** (np.asarray(dbm, dtype=float) / 10.0)


def db_to_linear(db):
    return 10.0 ** (np.asarray(db, dtype=float) / 10.0)


def linear_to_db(x):
    return 10.0 * np.log10(x)


@dataclass(frozen=True)
class AntennaConfig:
    """BS antenna: vertical ULA of ``n_v`` elements with the 36.873 element pattern."""

    n_v: int = 16
    n_h: int = 1
    d_v_over_lambda: float = 0.5
    phi_3db: float = 65.0
    theta_3db: float = 65.0
    a_m: float = 30.0
    sla_v: float = 30.0
    g_e_max: float = 8.0
    rho: float = 1.0
    theta_t: float = 5.0
    phi_s: float = 0.0  # inert while n_h == 1
    # Clamp of the combined element attenuation; None means use a_m.
    element_clamp: float | None = None
    steering: str = "transpose"

    def __post_init__(self):
        if int(self.n_v) != self.n_v or self.n_v < 1:
            raise ConfigError(f"n_v must be a positive integer, got {self.n_v}")
        if self.n_h != 1:
            raise ConfigError("only vertical linear arrays (n_h = 1) are supported")
        if self.d_v_over_lambda <= 0:
            raise ConfigError("d_v_over_lambda must be > 0")
        if not 0.0 <= self.rho <= 1.0:
            raise ConfigError(f"rho must lie in [0, 1], got {self.rho}")
        if self.phi_3db <= 0 or self.theta_3db <= 0:
            raise ConfigError("beamwidths must be > 0")
        if self.steering not in STEERING_MODES:
            raise ConfigError(f"steering must be one of {STEERING_MODES}, got {self.steering!r}")

    @property
    def clamp_db(self) -> float:
        return self.a_m if self.element_clamp is None else self.element_clamp


@dataclass(frozen=True)
class SystemConfig:
    """One coverage scenario.

    Defaults are the baseline used throughout: 28 GHz, 16 elements, 5 deg
    tilt, Rayleigh fading, ground user.
    """

    lambda_b: float = 5.0  # BS / km^2
    h_bs: float = 25.0  # m
    h: float = GROUND_HEIGHT  # m
    p_t: float = 25.0  # dBm
    sigma_n2: float = -95.0  # dBm
    f_c: float = 28.0  # GHz
    region_radius: float = 5000.0  # m
    n_elements: int = 16
    theta_t: float = 5.0  # deg
    m: int = 1
    azimuth_mode: str = "serving_aligned"
    mix_scale: str = "db"
    # antenna constants
    rho: float = 1.0
    d_v_over_lambda: float = 0.5
    phi_3db: float = 65.0
    theta_3db: float = 65.0
    a_m: float = 30.0
    sla_v: float = 30.0
    g_e_max: float = 8.0
    element_clamp: float | None = None
    steering: str = "transpose"

    def __post_init__(self):
        if not self.lambda_b > 0:
            raise ConfigError(f"lambda_b must be > 0, got {self.lambda_b}")
        if not GROUND_HEIGHT <= self.h <= MAX_HEIGHT:
            raise ConfigError(f"h = {self.h} outside valid range [{GROUND_HEIGHT}, {MAX_HEIGHT}]")
        if not self.h_bs > 0:
            raise ConfigError(f"h_bs must be > 0, got {self.h_bs}")
        if not self.f_c > 0:
            raise ConfigError(f"f_c must be > 0, got {self.f_c}")
        if not self.region_radius > 0:
            raise ConfigError(f"region_radius must be > 0, got {self.region_radius}")
        if int(self.n_elements) != self.n_elements or self.n_elements < 1:
            raise ConfigError(f"n_elements must be an integer >= 1, got {self.n_elements}")
        if not 0.0 <= self.theta_t < 90.0:
            raise ConfigError(f"theta_t = {self.theta_t} outside [0, 90)")
        if isinstance(self.m, bool) or int(self.m) != self.m or self.m < 1:
            raise ConfigError(f"m must be a positive integer, got {self.m}")
        if self.azimuth_mode not in AZIMUTH_MODES:
            raise ConfigError(f"azimuth_mode must be one of {AZIMUTH_MODES}, got {self.azimuth_mode!r}")
        if self.mix_scale not in MIX_SCALES:
            raise ConfigError(f"mix_scale must be one of {MIX_SCALES}, got {self.mix_scale!r}")
        object.__setattr__(self, "n_elements", int(self.n_elements))
        object.__setattr__(self, "m", int(self.m))
        # builds (and so validates) the antenna block
        self.antenna

    @property
    def antenna(self) -> AntennaConfig:
        return AntennaConfig(
            n_v=self.n_elements, d_v_over_lambda=self.d_v_over_lambda,
            phi_3db=self.phi_3db, theta_3db=self.theta_3db, a_m=self.a_m,
            sla_v=self.sla_v, g_e_max=self.g_e_max, rho=self.rho,
            theta_t=self.theta_t, element_clamp=self.element_clamp,
            steering=self.steering,
        )

    @property
    def p_t_mw(self) -> float:
        return float(dbm_to_mw(self.p_t))

    @property
    def noise_mw(self) -> float:
        return float(dbm_to_mw(self.sigma_n2))

    @property
    def lambda_per_m2(self) -> float:
        return self.lambda_b * 1e-6

    def replace(self, **changes) -> "SystemConfig":
        return dataclasses.replace(self, **changes)

    def to_dict(self) -> dict:
        return dataclasses.asdict(self)

    def digest(self) -> str:
        blob = json.dumps(self.to_dict(), sort_keys=True).encode()
        return hashlib.sha256(blob).hexdigest()[:16]


def config_fields() -> tuple[str, ...]:
    return tuple(f.name for f in dataclasses.fields(SystemConfig))
