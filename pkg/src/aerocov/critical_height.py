"""Coverage along the height axis and the critical aerial-user height.

Every height is evaluated on the same PPP realizations (and, for Monte
Carlo, the same fading draws), so the curve is smooth in ``h`` and can be
bisected.
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
from scipy.signal import find_peaks

from . import channel
from .config import GROUND_HEIGHT, MAX_HEIGHT, SystemConfig
from .coverage import (
    _EVALUATORS, FADING_STREAM, CoverageCurve, _as_thresholds, _check_m, batch_links,
)
from .deployment import sample_deployments, stream

DEFAULT_PROMINENCE = 0.005


class CriticalHeightError(RuntimeError):
    pass


class HeightEvaluator:
    """``h -> p_cov`` for fixed realizations of everything but the height."""

    def __init__(self, cfg: SystemConfig, t_db, method: str = "analytic_conditional",
                 samples: int = 1000, master_seed: int = 0):
        _check_m(cfg.m)
        self.cfg = cfg
        self.t_db, self.t_lin = _as_thresholds(t_db)
        self.method = method
        self.samples = samples
        self.master_seed = master_seed
        self.deps = sample_deployments(cfg, samples, master_seed)
        self.fading = None
        if method == "monte_carlo":
            self.fading = np.concatenate([
                channel.sample_nakagami_power(cfg.m, stream(master_seed, i, FADING_STREAM), size=len(d))
                for i, d in enumerate(self.deps)
            ])
        elif method not in _EVALUATORS:
            raise ValueError(f"unknown method {method!r}")
        self.calls = 0
        self._cache: dict[float, tuple[np.ndarray, np.ndarray]] = {}

    def per_threshold(self, h: float) -> tuple[np.ndarray, np.ndarray]:
        """Coverage and 95% half-width at height ``h`` for every threshold."""
        key = float(h)
        if key not in self._cache:
            self.calls += 1
            self._cache[key] = self._evaluate(key)
        return self._cache[key]

    def _evaluate(self, h: float) -> tuple[np.ndarray, np.ndarray]:
        cfg = self.cfg.replace(h=float(h))
        batch = batch_links(self.deps, cfg)
        if self.fading is None:
            vals = _EVALUATORS[self.method](batch, cfg, self.t_lin)
            p = vals.mean(axis=0)
            ci = 1.96 * vals.std(axis=0, ddof=1) / np.sqrt(len(vals)) if len(vals) > 1 else np.zeros_like(p)
            return p, ci
        rx = batch.power * self.fading
        s = rx[batch.serving]
        interference = np.maximum(batch.per_realization_sum(rx) - s, 0.0)
        sinr = s / (interference + cfg.noise_mw)
        p = (sinr[:, None] > self.t_lin[None, :]).mean(axis=0)
        return p, 1.96 * np.sqrt(p * (1 - p) / self.samples)

    def __call__(self, h: float) -> np.ndarray:
        return self.per_threshold(h)[0]


def height_grid(step: float = 1.0, lo: float = GROUND_HEIGHT, hi: float = MAX_HEIGHT) -> np.ndarray:
    grid = np.arange(lo, hi, step)
    return np.append(grid, hi) if grid[-1] < hi else grid


def coverage_vs_height(cfg: SystemConfig, t_db, heights=None, method: str = "analytic_conditional",
                       samples: int = 1000, master_seed: int = 0,
                       evaluator: HeightEvaluator | None = None) -> CoverageCurve:
    """Coverage at each height (all other parameters fixed), long format."""
    heights = height_grid() if heights is None else np.atleast_1d(np.asarray(heights, dtype=float))
    if np.any(heights < GROUND_HEIGHT) or np.any(heights > MAX_HEIGHT):
        raise ValueError(f"heights must lie in [{GROUND_HEIGHT}, {MAX_HEIGHT}]")
    ev = evaluator or HeightEvaluator(cfg, t_db, method, samples, master_seed)
    rows = [ev.per_threshold(h) for h in heights]
    p = np.array([r[0] for r in rows])
    ci = np.array([r[1] for r in rows])
    nt = len(ev.t_db)
    return CoverageCurve("h", np.repeat(heights, nt), np.tile(ev.t_db, len(heights)), p.ravel(),
                         ev.method, ci.ravel(), ev.samples, cfg.digest())


def curve_at(curve: CoverageCurve, t_db: float) -> tuple[np.ndarray, np.ndarray]:
    """``(sweep_values, p_cov)`` of one threshold from a long-format curve."""
    sel = np.isclose(curve.t_db, t_db)
    return curve.sweep_values[sel], curve.p_cov[sel]


def local_peaks(heights, p_cov, prominence: float = DEFAULT_PROMINENCE) -> list[tuple[float, float]]:
    """Interior local maxima with at least ``prominence`` of coverage relief."""
    p_cov = np.asarray(p_cov, dtype=float)
    idx, _ = find_peaks(p_cov, prominence=prominence)
    return [(float(heights[i]), float(p_cov[i])) for i in idx]


def predicted_main_lobe_height(cfg: SystemConfig, r0: float) -> float:
    """Height at which the down-tilted main lobe of a BS at distance ``r0`` hits the user."""
    if r0 <= 0:
        raise ValueError("r0 must be > 0")
    return max(cfg.h_bs - r0 * np.tan(np.radians(cfg.theta_t)), GROUND_HEIGHT)


@dataclass
class CriticalHeightResult:
    h_c: float
    p_cov_ground: float
    bracket: tuple[float, float]
    peaks: list[tuple[float, float]]
    method: str
    t_db: float
    reached: bool = True
    curve: CoverageCurve | None = field(default=None, repr=False)
    evaluations: int = 0

    def to_dict(self) -> dict:
        d = {"h_c": self.h_c, "p_cov_ground": self.p_cov_ground, "bracket": list(self.bracket),
             "peaks": [list(p) for p in self.peaks], "method": self.method, "T_db": self.t_db,
             "reached": self.reached, "evaluations": self.evaluations}
        if self.curve is not None:
            h, p = curve_at(self.curve, self.t_db)
            d["curve"] = {"h": h.tolist(), "p_cov": [round(float(x), 6) for x in p]}
        return d

    def write_json(self, path) -> Path:
        path = Path(path)
        path.write_text(json.dumps(self.to_dict(), indent=2, sort_keys=True) + "\n")
        return path


def find_critical_height(cfg: SystemConfig, t_db: float, tol_h: float = 0.25, step: float = 1.0,
                         method: str = "analytic_conditional", samples: int = 1000,
                         master_seed: int = 0, prominence: float = DEFAULT_PROMINENCE,
                         evaluator: HeightEvaluator | None = None) -> CriticalHeightResult:
    """Largest height whose coverage still matches the ground user's.

    Scans a ``step``-spaced grid over [1.5, 300] m, takes the last grid point
    with coverage >= the ground value and bisects the following interval to
    ``tol_h``. If coverage never falls back below the ground value, returns
    300 m with ``reached=False``.
    """
    if tol_h <= 0:
        raise ValueError("tol_h must be > 0")
    ev = evaluator or HeightEvaluator(cfg, [t_db], method, samples, master_seed)
    j = int(np.argmin(np.abs(ev.t_db - t_db)))
    if not np.isclose(ev.t_db[j], t_db):
        raise ValueError(f"evaluator has no threshold {t_db} dB")

    def f(h):
        return float(ev(h)[j])

    grid = height_grid(step)
    curve = coverage_vs_height(cfg, [t_db], grid, evaluator=_SingleThreshold(ev, j))
    values = curve.p_cov
    if not np.all(np.isfinite(values)):
        raise CriticalHeightError("non-finite coverage on the height grid")
    ground = values[0]
    peaks = local_peaks(grid, values, prominence)
    if values[-1] >= ground:
        return CriticalHeightResult(float(grid[-1]), float(ground), (float(grid[-1]), float(grid[-1])), peaks,
                                    ev.method, float(t_db), False, curve, ev.calls)
    above = np.nonzero(values >= ground)[0]
    k = int(above.max())
    lo, hi = float(grid[k]), float(grid[k + 1])
    bracket = (lo, hi)
    while hi - lo > tol_h:
        mid = 0.5 * (lo + hi)
        if f(mid) >= ground:
            lo = mid
        else:
            hi = mid
    return CriticalHeightResult(0.5 * (lo + hi), float(ground), bracket, peaks, ev.method, float(t_db),
                                True, curve, ev.calls)


class _SingleThreshold:
    """View of a multi-threshold evaluator restricted to one threshold."""

    def __init__(self, ev: HeightEvaluator, j: int):
        self.ev = ev
        self.j = j
        self.t_db = ev.t_db[j:j + 1]
        self.method = ev.method
        self.samples = ev.samples

    def per_threshold(self, h):
        p, ci = self.ev.per_threshold(h)
        return p[self.j:self.j + 1], ci[self.j:self.j + 1]
