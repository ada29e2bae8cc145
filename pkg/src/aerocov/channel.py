"""3GPP UMa path loss, LOS probability and Nakagami-m fading.

Three user-height regimes:

* ``h <= 22.5`` m: two-slope LOS with breakpoint, NLOS = max(LOS, NLOS'),
  terrestrial LOS probability with the height enhancement term;
* ``22.5 < h <= 100`` m: single-slope LOS, aerial NLOS, aerial LOS probability;
* ``h > 100`` m: always LOS.

Bracket conditions (breakpoint, 18 m, d_1) use the 2D distance ``r``; the
logarithms use the 3D distance. Out-of-validity inputs are extrapolated
and tallied in an optional ``collections.Counter``.
"""
from __future__ import annotations

import csv
from collections import Counter
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .config import SystemConfig

SPEED_OF_LIGHT = 3.0e8
LOW_REGIME_MAX_H = 22.5
AERIAL_NLOS_MAX_H = 100.0


def _tally(diag: Counter | None, key: str, mask) -> None:
    if diag is not None:
        n = int(np.count_nonzero(mask))
        if n:
            diag[key] += n


def _out(x):
    x = np.asarray(x)
    return x if x.ndim else float(x)


def breakpoint_distance(h_bs, h, f_c):
    """LOS breakpoint ``4 h_BS h f_c / c`` in m (``f_c`` in GHz)."""
    return 4.0 * np.asarray(h_bs) * np.asarray(h) * (np.asarray(f_c) * 1e9) / SPEED_OF_LIGHT


def distance_3d(r, h, h_bs):
    return np.sqrt(np.asarray(r, dtype=float) ** 2 + (h_bs - h) ** 2)


def pathloss_los(r, h, cfg: SystemConfig, diag: Counter | None = None):
    r = np.asarray(r, dtype=float)
    d3 = distance_3d(r, h, cfg.h_bs)
    fterm = 20.0 * np.log10(cfg.f_c)
    if h <= LOW_REGIME_MAX_H:
        d_b = breakpoint_distance(cfg.h_bs, h, cfg.f_c)
        near = 28.0 + 22.0 * np.log10(d3) + fterm
        far = (28.0 + 40.0 * np.log10(d3) + fterm
               - 9.0 * np.log10(d_b ** 2 + (cfg.h_bs - h) ** 2))
        _tally(diag, "los_below_10m", r < 10.0)
        _tally(diag, "los_beyond_5km", r > 5000.0)
        return _out(np.where(r < d_b, near, far))
    _tally(diag, "aerial_beyond_4km", r > 4000.0)
    return _out(28.0 + 22.0 * np.log10(d3) + fterm)


def pathloss_nlos(r, h, cfg: SystemConfig, diag: Counter | None = None):
    r = np.asarray(r, dtype=float)
    d3 = distance_3d(r, h, cfg.h_bs)
    if h <= LOW_REGIME_MAX_H:
        nlos_prime = (13.54 + 39.08 * np.log10(d3) + 20.0 * np.log10(cfg.f_c)
                      - 0.6 * (h - 1.5))
        return _out(np.maximum(pathloss_los(r, h, cfg, diag), nlos_prime))
    # Above 100 m the link is always LOS; the aerial formula is extrapolated
    # only so that callers get a finite number.
    return _out(-17.5 + (46.0 - 7.0 * np.log10(h)) * np.log10(d3)
                + 20.0 * np.log10(40.0 * np.pi * cfg.f_c / 3.0))


def _height_enhancement(h):
    if h <= 13.0:
        return 0.0
    return ((h - 13.0) / 10.0) ** 1.5


def aerial_los_params(h):
    """``(p_1, d_1)`` for the 22.5-100 m regime."""
    p1 = 4300.0 * np.log10(h) - 3800.0
    d1 = max(460.0 * np.log10(h) - 700.0, 18.0)
    return p1, d1


def los_probability(r, h, cfg: SystemConfig | None = None, diag: Counter | None = None):
    """LOS probability for 2D distance ``r`` and user height ``h``."""
    r = np.asarray(r, dtype=float)
    if h > AERIAL_NLOS_MAX_H:
        return _out(np.ones_like(r))
    with np.errstate(divide="ignore", invalid="ignore"):
        if h <= LOW_REGIME_MAX_H:
            c = _height_enhancement(h)
            base = 18.0 / r + np.exp(-r / 36.0) * (1.0 - 18.0 / r)
            p = base * (1.0 + c * 1.25 * (r / 100.0) ** 3 * np.exp(-r / 150.0))
            p = np.where(r <= 18.0, 1.0, p)
        else:
            p1, d1 = aerial_los_params(h)
            p = d1 / r + np.exp(-r / p1) * (1.0 - d1 / r)
            p = np.where(r <= d1, 1.0, p)
    _tally(diag, "los_probability_clamped", (p > 1.0) | (p < 0.0))
    return _out(np.clip(p, 0.0, 1.0))


@dataclass(frozen=True)
class PathLossResult:
    pl_los: np.ndarray
    pl_nlos: np.ndarray
    p_los: np.ndarray
    expected_loss_db: np.ndarray


def path_loss(r, h, cfg: SystemConfig, diag: Counter | None = None) -> PathLossResult:
    pl_l = pathloss_los(r, h, cfg, diag)
    pl_n = pathloss_nlos(r, h, cfg, diag)
    p = los_probability(r, h, cfg, diag)
    total = expected_total_loss(r, h, cfg)
    return PathLossResult(pl_l, pl_n, p, -10.0 * np.log10(total))


def expected_total_loss(r, h, cfg: SystemConfig, diag: Counter | None = None):
    """LOS/NLOS mixture of the path loss as a linear gain in (0, 1].

    ``cfg.mix_scale == "linear"`` averages received power; ``"db"`` averages
    the dB losses and converts once.
    """
    p = np.asarray(los_probability(r, h, cfg, diag))
    pl_l = np.asarray(pathloss_los(r, h, cfg, diag))
    if h > AERIAL_NLOS_MAX_H:
        return _out(10.0 ** (-pl_l / 10.0))
    pl_n = np.asarray(pathloss_nlos(r, h, cfg))
    if cfg.mix_scale == "linear":
        out = p * 10.0 ** (-pl_l / 10.0) + (1.0 - p) * 10.0 ** (-pl_n / 10.0)
    else:
        out = 10.0 ** (-(p * pl_l + (1.0 - p) * pl_n) / 10.0)
    return _out(out)


def sample_nakagami_power(m: int, rng: np.random.Generator, size=None):
    """|g|^2 ~ Gamma(shape m, rate m): unit mean, variance 1/m."""
    if int(m) != m or m < 1:
        raise ValueError(f"Nakagami m must be a positive integer, got {m}")
    return rng.gamma(shape=m, scale=1.0 / m, size=size)


GOLDEN_COLUMNS = ("r", "h", "f_c", "pl_los", "pl_nlos", "p_los")


def golden_table(rs, hs, fcs, base: SystemConfig | None = None) -> list[dict]:
    base = base or SystemConfig()
    rows = []
    for f_c in fcs:
        cfg = base.replace(f_c=float(f_c))
        for h in hs:
            for r in rs:
                rows.append({
                    "r": float(r), "h": float(h), "f_c": float(f_c),
                    "pl_los": float(pathloss_los(r, h, cfg)),
                    "pl_nlos": float(pathloss_nlos(r, h, cfg)),
                    "p_los": float(los_probability(r, h, cfg)),
                })
    return rows


def write_golden_csv(path, rows) -> Path:
    path = Path(path)
    with path.open("w", newline="") as fh:
        w = csv.DictWriter(fh, fieldnames=GOLDEN_COLUMNS)
        w.writeheader()
        for row in rows:
            w.writerow({k: (f"{row[k]:.9f}" if isinstance(row[k], float) else row[k]) for k in GOLDEN_COLUMNS})
    return path


def read_golden_csv(path) -> list[dict]:
    with Path(path).open() as fh:
        return [{k: float(v) for k, v in row.items()} for row in csv.DictReader(fh)]
