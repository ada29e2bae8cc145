"""BS antenna gain: 3GPP TR 36.873 element pattern times a steered vertical ULA.

Angle convention: ``theta`` in [0, 180] deg with 90 deg perpendicular to the
aperture (horizon); a positive down-tilt moves the array peak to
``90 + theta_t``. ``phi`` is the azimuth offset from boresight in
(-180, 180] deg.
"""
from __future__ import annotations

import csv
from pathlib import Path

import numpy as np

from .config import AntennaConfig

DEFAULT_ANTENNA = AntennaConfig()

# keeps exact array nulls finite in dB
_AF_FLOOR = 1e-30


def element_gain_h(phi, cfg: AntennaConfig = DEFAULT_ANTENNA):
    """Horizontal element attenuation in dB, in [-A_m, 0]."""
    phi = np.asarray(phi, dtype=float)
    return -np.minimum(12.0 * (phi / cfg.phi_3db) ** 2, cfg.a_m)


def element_gain_v(theta, cfg: AntennaConfig = DEFAULT_ANTENNA):
    """Vertical element attenuation in dB, in [-SLA_v, 0]."""
    theta = np.asarray(theta, dtype=float)
    return -np.minimum(12.0 * ((theta - 90.0) / cfg.theta_3db) ** 2, cfg.sla_v)


def element_pattern(phi, theta, cfg: AntennaConfig = DEFAULT_ANTENNA):
    """Element gain in dBi: ``G_E,max - min(-(A_H + A_V), clamp)``."""
    att = -(element_gain_h(phi, cfg) + element_gain_v(theta, cfg))
    return cfg.g_e_max - np.minimum(att, cfg.clamp_db)


def _phase_offset(theta, theta_t, cfg: AntennaConfig):
    # per-element phase step (in cycles) between the arrival vector and the weights
    cos_t = np.cos(np.radians(theta))
    sin_tilt = np.sin(np.radians(theta_t))
    if cfg.steering == "transpose":
        # v . w^T as written: peak where cos(theta) = -sin(theta_t), i.e. 90 + tilt
        return cfg.d_v_over_lambda * (cos_t + sin_tilt)
    # v . w^H: the conjugated product points the beam at 90 - tilt
    return cfg.d_v_over_lambda * (cos_t - sin_tilt)


def array_power(theta, theta_t=None, cfg: AntennaConfig = DEFAULT_ANTENNA):
    """``|v . w|^2`` with unit-norm weights, in [0, N].

    Closed-form Dirichlet kernel ``sin^2(N pi x) / (N sin^2(pi x))``.
    """
    if theta_t is None:
        theta_t = cfg.theta_t
    n = cfg.n_v
    x = np.asarray(_phase_offset(np.asarray(theta, dtype=float), theta_t, cfg))
    den = np.sin(np.pi * x)
    num = np.sin(n * np.pi * x)
    small = np.abs(den) < 1e-12
    safe = np.where(small, 1.0, den)
    out = np.where(small, float(n), num * num / (n * safe * safe))
    return out if out.ndim else float(out)


def array_factor(phi, theta, theta_t=None, cfg: AntennaConfig = DEFAULT_ANTENNA):
    """Array factor in dB: ``10 log10(1 + rho (|v.w|^2 - 1))``.

    ``phi`` is accepted for signature symmetry; it has no effect while the
    array has a single column.
    """
    p = array_power(theta, theta_t, cfg)
    lin = 1.0 + cfg.rho * (np.asarray(p) - 1.0)
    lin = np.broadcast_to(lin, np.broadcast(np.asarray(phi), lin).shape)
    return 10.0 * np.log10(np.maximum(lin, _AF_FLOOR))


def composite_gain(phi, theta, theta_t=None, cfg: AntennaConfig = DEFAULT_ANTENNA):
    """Total BS gain toward the user in dBi (element pattern + array factor)."""
    return element_pattern(phi, theta, cfg) + array_factor(phi, theta, theta_t, cfg)


def composite_gain_linear(phi, theta, theta_t=None, cfg: AntennaConfig = DEFAULT_ANTENNA):
    """Linear-scale counterpart of :func:`composite_gain` (exact zeros at nulls)."""
    elem = 10.0 ** (element_pattern(phi, theta, cfg) / 10.0)
    af = 1.0 + cfg.rho * (array_power(theta, theta_t, cfg) - 1.0)
    return elem * np.maximum(af, 0.0)


def peak_gain(cfg: AntennaConfig = DEFAULT_ANTENNA) -> float:
    return cfg.g_e_max + 10.0 * np.log10(1.0 + cfg.rho * (cfg.n_v - 1.0))


class GainTable:
    """Immutable elevation-gridded gain lookup for a fixed azimuth.

    Linear interpolation on a fine grid; intended for plotting and quick
    sweeps, never for the reference coverage path.
    """

    def __init__(self, cfg: AntennaConfig = DEFAULT_ANTENNA, phi: float = 0.0, step: float = 0.01):
        grid = np.arange(0.0, 180.0 + step / 2, step)
        gain = composite_gain(phi, grid, cfg=cfg)
        grid.setflags(write=False)
        gain.setflags(write=False)
        self.cfg = cfg
        self.phi = phi
        self.theta = grid
        self.gain_db = gain

    def __call__(self, theta):
        return np.interp(theta, self.theta, self.gain_db)


def pattern_cut(cfg: AntennaConfig = DEFAULT_ANTENNA, phi: float = 0.0, step: float = 0.1):
    """Return ``(theta, gain_db)`` for a vertical cut at azimuth ``phi``."""
    theta = np.round(np.arange(0.0, 180.0 + step / 2, step), 10)
    return theta, composite_gain(phi, theta, cfg=cfg)


def write_pattern_csv(path, cfg: AntennaConfig = DEFAULT_ANTENNA, phi: float = 0.0, step: float = 0.1) -> Path:
    path = Path(path)
    theta, gain = pattern_cut(cfg, phi, step)
    with path.open("w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["theta_deg", "gain_dbi"])
        for t, g in zip(theta, gain):
            w.writerow([f"{t:.4f}", f"{g:.6f}"])
    return path
