"""SINR, Monte-Carlo coverage and the analytic coverage evaluators.

Analytic methods
----------------
``analytic_conditional``
    Exact Nakagami fading average for each PPP realization, then an
    empirical mean over realizations. This is the reference method.
``analytic_sum``
    The binomial-sum approximation with the interference term weighted by
    ``2 pi lambda_B`` (lambda_B in BS/m^2) and summed over the realized
    interferers, averaged over realizations.
``rayleigh_closed_form``
    The ``m = 1`` specialization of ``analytic_sum``.
"""
from __future__ import annotations

import csv
import json
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
from scipy import integrate

from . import antenna, channel
from .config import SystemConfig
from .deployment import (
    DEPLOYMENT_STREAM, FADING_STREAM, Deployment, associate_nearest,
    link_geometry, sample_ppp, stream,
)

METHODS = ("monte_carlo", "analytic_conditional", "analytic_sum", "rayleigh_closed_form")
ANALYTIC_METHODS = METHODS[1:]
CHUNK = 250


class IntegrationError(RuntimeError):
    def __init__(self, message, trace=None):
        super().__init__(message)
        self.trace = trace


# ---------------------------------------------------------------- link powers

def _link_power(bs, boresight, cfg: SystemConfig, user=(0.0, 0.0)) -> np.ndarray:
    geo = link_geometry(bs, boresight, cfg, user=user)
    loss = channel.expected_total_loss(geo.r, cfg.h, cfg)
    gain = antenna.composite_gain_linear(geo.phi, geo.theta, cfg=cfg.antenna)
    return cfg.p_t_mw * loss * gain


def mean_received_power(dep: Deployment, cfg: SystemConfig) -> np.ndarray:
    """Fading-free received power (mW) from every BS in ``dep``."""
    return _link_power(dep.bs_positions, dep.bs_orientations, cfg, user=dep.user_position)


@dataclass(frozen=True)
class LinkBatch:
    """Links of many realizations, flattened."""

    power: np.ndarray  # mW, fading-free
    owner: np.ndarray  # realization index per link
    serving: np.ndarray  # flat index of each realization's serving link
    count: int

    @property
    def serving_power(self) -> np.ndarray:
        return self.power[self.serving]

    @property
    def interferer_mask(self) -> np.ndarray:
        mask = np.ones(len(self.power), dtype=bool)
        mask[self.serving] = False
        return mask

    def per_realization_sum(self, values) -> np.ndarray:
        return np.bincount(self.owner, weights=values, minlength=self.count)

    @classmethod
    def from_powers(cls, serving_power, interferer_powers) -> "LinkBatch":
        """Batch of one realization given its mean link powers directly."""
        inter = np.asarray(interferer_powers, dtype=float).ravel()
        power = np.concatenate([[float(serving_power)], inter])
        return cls(power, np.zeros(len(power), dtype=int), np.zeros(1, dtype=int), 1)


def batch_links(deps, cfg: SystemConfig) -> LinkBatch:
    deps = list(deps)
    counts = np.array([len(d) for d in deps])
    pos = np.concatenate([d.bs_positions - d.user_position for d in deps])
    orient = np.concatenate([d.bs_orientations for d in deps])
    power = _link_power(pos, orient, cfg)
    offsets = np.concatenate([[0], np.cumsum(counts)[:-1]])
    serving = offsets + np.array([associate_nearest(d) for d in deps])
    owner = np.repeat(np.arange(len(deps)), counts)
    return LinkBatch(power, owner, serving, len(deps))


# ---------------------------------------------------------------------- SINR

@dataclass(frozen=True)
class SinrSample:
    sinr_linear: float
    serving_power: float  # mW
    interference: float  # mW
    noise: float  # mW

    @property
    def sinr_db(self) -> float:
        return 10.0 * math.log10(self.sinr_linear) if self.sinr_linear > 0 else -math.inf


def instantaneous_sinr(dep: Deployment, cfg: SystemConfig, rng: np.random.Generator | None = None,
                       fading=None) -> SinrSample:
    """SINR of the typical user for one realization.

    ``fading`` overrides the Nakagami draw (one power gain per BS); otherwise
    fresh gains come from ``rng``.
    """
    p = mean_received_power(dep, cfg)
    if fading is None:
        if rng is None:
            raise ValueError("either rng or fading must be given")
        fading = channel.sample_nakagami_power(cfg.m, rng, size=len(p))
    rx = p * np.broadcast_to(np.asarray(fading, dtype=float), p.shape)
    k = associate_nearest(dep)
    s = float(rx[k])
    interference = float(rx.sum() - s) if len(rx) > 1 else 0.0
    noise = cfg.noise_mw
    return SinrSample(s / (interference + noise), s, max(interference, 0.0), noise)


# --------------------------------------------------------------------- curves

@dataclass
class CoverageCurve:
    """Long-format coverage series: one row per (sweep value, threshold)."""

    sweep_variable: str
    sweep_values: np.ndarray
    t_db: np.ndarray
    p_cov: np.ndarray
    method: str
    ci_halfwidth: np.ndarray
    samples: int = 0
    config_digest: str = ""
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        self.sweep_values = np.atleast_1d(np.asarray(self.sweep_values, dtype=float))
        self.t_db = np.atleast_1d(np.asarray(self.t_db, dtype=float))
        self.p_cov = np.atleast_1d(np.asarray(self.p_cov, dtype=float))
        self.ci_halfwidth = np.atleast_1d(np.asarray(self.ci_halfwidth, dtype=float))
        if self.method not in METHODS:
            raise ValueError(f"unknown method {self.method!r}")
        if not (len(self.sweep_values) == len(self.t_db) == len(self.p_cov) == len(self.ci_halfwidth)):
            raise ValueError("curve columns differ in length")
        if np.any(~np.isfinite(self.p_cov)) or np.any((self.p_cov < 0) | (self.p_cov > 1)):
            raise ValueError("p_cov must lie in [0, 1]")

    def __len__(self):
        return len(self.p_cov)

    def rows(self):
        for v, t, p, ci in zip(self.sweep_values, self.t_db, self.p_cov, self.ci_halfwidth):
            yield {"sweep_value": float(v), "T_db": float(t), "p_cov": float(p),
                   "method": self.method, "ci_halfwidth": float(ci)}

    def to_dict(self) -> dict:
        return {"sweep_variable": self.sweep_variable, "method": self.method,
                "samples": self.samples, "config_digest": self.config_digest,
                "meta": self.meta, "points": list(self.rows())}

    @classmethod
    def concat(cls, curves, sweep_variable=None) -> "CoverageCurve":
        curves = list(curves)
        first = curves[0]
        return cls(sweep_variable or first.sweep_variable,
                   np.concatenate([c.sweep_values for c in curves]),
                   np.concatenate([c.t_db for c in curves]),
                   np.concatenate([c.p_cov for c in curves]),
                   first.method,
                   np.concatenate([c.ci_halfwidth for c in curves]),
                   first.samples, first.config_digest, dict(first.meta))

    def relabel(self, sweep_variable: str, value: float) -> "CoverageCurve":
        return CoverageCurve(sweep_variable, np.full(len(self), float(value)), self.t_db, self.p_cov,
                             self.method, self.ci_halfwidth, self.samples, self.config_digest, dict(self.meta))


CSV_COLUMNS = ("sweep_variable", "sweep_value", "T_db", "p_cov", "method", "ci_halfwidth",
               "series_variable", "series_value")


def write_curves_csv(path, curves) -> Path:
    path = Path(path)
    with path.open("w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(CSV_COLUMNS)
        for c in curves:
            series = c.meta.get("series_variable", "")
            series_value = _fmt(c.meta["series_value"]) if series else ""
            for row in c.rows():
                w.writerow([c.sweep_variable, _fmt(row["sweep_value"]), _fmt(row["T_db"]),
                            f"{row['p_cov']:.6f}", row["method"], f"{row['ci_halfwidth']:.6f}",
                            series, series_value])
    return path


def write_curves_json(path, curves, **extra) -> Path:
    path = Path(path)
    payload = dict(extra, curves=[c.to_dict() for c in curves])
    path.write_text(json.dumps(payload, indent=2, sort_keys=True) + "\n")
    return path


def _fmt(x: float) -> str:
    return f"{x:.6g}"


def _ci(p, n):
    return 1.96 * np.sqrt(np.clip(p * (1.0 - p), 0.0, None) / n)


def _as_thresholds(t_db):
    t_db = np.atleast_1d(np.asarray(t_db, dtype=float))
    return t_db, 10.0 ** (t_db / 10.0)


def _map_chunks(fn, jobs, workers):
    if workers and workers > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(max_workers=workers) as ex:
            return list(ex.map(fn, *zip(*jobs)))
    return [fn(*job) for job in jobs]


def _chunks(total, size=CHUNK):
    return [(s, min(size, total - s)) for s in range(0, total, size)]


# ---------------------------------------------------------------- Monte Carlo

def _mc_chunk(cfg, t_lin, start, count, master_seed, fading=True):
    hits = np.zeros(len(t_lin), dtype=np.int64)
    deps = [sample_ppp(cfg, stream(master_seed, i, DEPLOYMENT_STREAM)) for i in range(start, start + count)]
    batch = batch_links(deps, cfg)
    if fading:
        g = np.concatenate([
            channel.sample_nakagami_power(cfg.m, stream(master_seed, i, FADING_STREAM), size=len(d))
            for i, d in zip(range(start, start + count), deps)
        ])
    else:
        g = np.ones(len(batch.power))
    rx = batch.power * g
    s = rx[batch.serving]
    interference = np.maximum(batch.per_realization_sum(rx) - s, 0.0)
    sinr = s / (interference + cfg.noise_mw)
    hits += (sinr[:, None] > t_lin[None, :]).sum(axis=0)
    return hits


def mc_coverage(cfg: SystemConfig, t_db, iterations: int, master_seed: int = 0,
                workers: int = 1, fading: bool = True) -> CoverageCurve:
    """Fraction of iterations (fresh PPP + fresh fading) with SINR > T."""
    if iterations < 1:
        raise ValueError("iterations must be >= 1")
    t_db, t_lin = _as_thresholds(t_db)
    jobs = [(cfg, t_lin, s, n, master_seed, fading) for s, n in _chunks(iterations)]
    hits = sum(_map_chunks(_mc_chunk, jobs, workers))
    p = hits / iterations
    return CoverageCurve("h", np.full(len(t_db), cfg.h), t_db, p, "monte_carlo", _ci(p, iterations),
                         iterations, cfg.digest())


# ------------------------------------------------------------------- analytic

def laplace_interference(interferer_power, s, m: int = 1):
    """Fading-averaged ``E[exp(-s I)]`` for fixed interferer mean powers.

    Each term is the Gamma(m, 1/m) moment generating function
    ``(1 + s p / m)^-m``. Vectorized over ``s``.
    """
    _check_m(m)
    p = np.asarray(interferer_power, dtype=float).ravel()
    s = np.asarray(s, dtype=float)
    out = np.exp(-m * np.log1p(np.multiply.outer(s, p) / m).sum(axis=-1))
    return out if out.ndim else float(out)


def _check_m(m):
    if int(m) != m or m < 1:
        raise ValueError(f"m must be a positive integer, got {m}")


def _conditional_batch(batch: LinkBatch, cfg: SystemConfig, t_lin) -> np.ndarray:
    """Exact fading-averaged coverage per realization, shape (count, len(t))."""
    m = cfg.m
    noise = cfg.noise_mw
    p0 = batch.serving_power
    mask = batch.interferer_mask
    owner = batch.owner[mask]
    pi = batch.power[mask]
    dead = p0 <= 0.0
    p0s = np.where(dead, 1.0, p0)
    out = np.empty((batch.count, len(t_lin)))
    for j, t in enumerate(t_lin):
        u = m * t / p0s  # Laplace argument m s
        x = u[owner] * pi / m
        log_l = -u * noise - m * np.bincount(owner, np.log1p(x), minlength=batch.count)
        # (-u)^n L^(n) / (n! L) via the cumulant recursion
        if m > 1:
            y = x / (1.0 + x)
            kappa = [None]
            for k in range(1, m):
                kappa.append(m * np.bincount(owner, y ** k, minlength=batch.count))
            kappa[1] = kappa[1] + u * noise
            moments = [np.ones(batch.count)]
            for n in range(1, m):
                moments.append(sum(kappa[k] * moments[n - k] for k in range(1, n + 1)) / n)
            series = np.sum(moments, axis=0)
        else:
            series = 1.0
        out[:, j] = np.exp(log_l) * series
    out[dead] = 0.0
    return np.clip(out, 0.0, 1.0)


def _binomial_sum_batch(batch: LinkBatch, cfg: SystemConfig, t_lin) -> np.ndarray:
    """Binomial-sum approximation per realization, shape (count, len(t))."""
    m = cfg.m
    noise = cfg.noise_mw
    weight = 2.0 * np.pi * cfg.lambda_per_m2
    p0 = batch.serving_power
    mask = batch.interferer_mask
    owner = batch.owner[mask]
    pi = batch.power[mask]
    dead = p0 <= 0.0
    p0s = np.where(dead, 1.0, p0)
    out = np.empty((batch.count, len(t_lin)))
    coeffs = [(-1) ** (k + 1) * math.comb(m, k) for k in range(1, m + 1)]
    for j, t in enumerate(t_lin):
        s = t / p0s
        frac = 1.0 - (1.0 + pi * t / (m * p0s[owner])) ** (-m)
        interference = np.exp(-weight * np.bincount(owner, frac, minlength=batch.count))
        noise_term = sum(c * np.exp(-k * m * s * noise) for k, c in enumerate(coeffs, start=1))
        out[:, j] = noise_term * interference
    out[dead] = 0.0
    return out


def _rayleigh_batch(batch: LinkBatch, cfg: SystemConfig, t_lin) -> np.ndarray:
    weight = 2.0 * np.pi * cfg.lambda_per_m2
    p0 = batch.serving_power
    mask = batch.interferer_mask
    owner = batch.owner[mask]
    pi = batch.power[mask]
    dead = p0 <= 0.0
    p0s = np.where(dead, 1.0, p0)
    out = np.empty((batch.count, len(t_lin)))
    for j, t in enumerate(t_lin):
        frac = pi * t / (p0s[owner] + pi * t)
        out[:, j] = np.exp(-t * cfg.noise_mw / p0s - weight * np.bincount(owner, frac, minlength=batch.count))
    out[dead] = 0.0
    return out


_EVALUATORS = {
    "analytic_conditional": _conditional_batch,
    "analytic_sum": _binomial_sum_batch,
    "rayleigh_closed_form": _rayleigh_batch,
}


def _evaluate_deployments(deps, cfg, t_db, method):
    _check_m(cfg.m)
    if method == "rayleigh_closed_form" and cfg.m != 1:
        raise ValueError("rayleigh_closed_form requires m = 1")
    _, t_lin = _as_thresholds(t_db)
    return _EVALUATORS[method](batch_links(deps, cfg), cfg, t_lin)


def conditional_coverage(dep: Deployment, cfg: SystemConfig, t_db):
    """Exact fading-averaged ``P(SINR > T)`` for one realization."""
    out = _evaluate_deployments([dep], cfg, t_db, "analytic_conditional")[0]
    return out if np.ndim(t_db) else float(out[0])


def binomial_sum_coverage(dep: Deployment, cfg: SystemConfig, t_db):
    """Binomial-sum approximation for one realization."""
    out = _evaluate_deployments([dep], cfg, t_db, "analytic_sum")[0]
    return out if np.ndim(t_db) else float(out[0])


def rayleigh_closed_form(dep: Deployment, cfg: SystemConfig, t_db):
    """The ``m = 1`` closed form for one realization."""
    out = _evaluate_deployments([dep], cfg, t_db, "rayleigh_closed_form")[0]
    return out if np.ndim(t_db) else float(out[0])


def coverage_from_powers(serving_power, interferer_powers, cfg: SystemConfig, t_db,
                         method: str = "analytic_conditional"):
    """Per-realization analytic coverage from mean link powers (mW).

    Only ``cfg.m``, ``cfg.sigma_n2`` and ``cfg.lambda_b`` are used.
    """
    _check_m(cfg.m)
    if method not in _EVALUATORS:
        raise ValueError(f"unknown analytic method {method!r}")
    _, t_lin = _as_thresholds(t_db)
    out = _EVALUATORS[method](LinkBatch.from_powers(serving_power, interferer_powers), cfg, t_lin)[0]
    return out if np.ndim(t_db) else float(out[0])


def _analytic_chunk(cfg, t_db, start, count, master_seed, method):
    deps = [sample_ppp(cfg, stream(master_seed, i, DEPLOYMENT_STREAM)) for i in range(start, start + count)]
    vals = _evaluate_deployments(deps, cfg, t_db, method)
    return vals.sum(axis=0), (vals ** 2).sum(axis=0)


def analytic_coverage(cfg: SystemConfig, t_db, realizations: int = 1000, master_seed: int = 0,
                      method: str = "analytic_conditional", workers: int = 1) -> CoverageCurve:
    """Average of a per-realization analytic evaluator over PPP draws.

    ``ci_halfwidth`` is the 95% half-width of that realization average.
    Realization ``i`` is the same deployment used by Monte-Carlo iteration
    ``i`` with the same seed.
    """
    if method not in _EVALUATORS:
        raise ValueError(f"unknown analytic method {method!r}")
    if realizations < 1:
        raise ValueError("realizations must be >= 1")
    t_db = np.atleast_1d(np.asarray(t_db, dtype=float))
    jobs = [(cfg, t_db, s, n, master_seed, method) for s, n in _chunks(realizations)]
    parts = _map_chunks(_analytic_chunk, jobs, workers)
    total = sum(p[0] for p in parts)
    total2 = sum(p[1] for p in parts)
    mean = total / realizations
    var = np.clip(total2 / realizations - mean ** 2, 0.0, None)
    ci = 1.96 * np.sqrt(var / max(realizations - 1, 1))
    return CoverageCurve("h", np.full(len(t_db), cfg.h), t_db, np.clip(mean, 0.0, 1.0), method, ci,
                         realizations, cfg.digest())


def approx_coverage_paper(cfg: SystemConfig, t_db, realizations: int = 1000, seed: int = 0):
    """Realization-averaged binomial-sum approximation (``analytic_sum``)."""
    curve = analytic_coverage(cfg, t_db, realizations, seed, method="analytic_sum")
    return curve.p_cov if np.ndim(t_db) else float(curve.p_cov[0])


def coverage_curve(cfg: SystemConfig, t_db, method: str = "analytic_conditional", samples: int = 1000,
             master_seed: int = 0, workers: int = 1) -> CoverageCurve:
    """Dispatch on ``method``; ``samples`` is iterations or realizations."""
    if method == "monte_carlo":
        return mc_coverage(cfg, t_db, samples, master_seed, workers)
    return analytic_coverage(cfg, t_db, samples, master_seed, method, workers)


# --------------------------------------------------------- PGFL (intensity form)

def _azimuth_nodes(mode: str, n: int = 96):
    """Quadrature nodes/weights for the interferer azimuth distribution."""
    if mode == "aligned":
        return np.zeros(1), np.ones(1)
    half = 90.0 if mode == "global_fixed" else 180.0
    x, w = np.polynomial.legendre.leggauss(n)
    return half * x, w / 2.0


def laplace_interference_ppp(cfg: SystemConfig, s: float, r0: float, n_phi: int = 96,
                             epsabs: float = 1e-10, epsrel: float = 1e-8) -> float:
    """Intensity-form Laplace transform of interference beyond ``r0``.

    ``exp(-2 pi lambda int_{r0}^{R} (1 - E_phi[(1 + s p(r, phi)/m)^-m]) r dr)``
    with ``lambda`` in BS/m^2 and the azimuth averaged according to
    ``cfg.azimuth_mode``.
    """
    _check_m(cfg.m)
    if s < 0:
        raise ValueError("s must be >= 0")
    m = cfg.m
    lam = cfg.lambda_per_m2
    phis, wts = _azimuth_nodes(cfg.azimuth_mode, n_phi)
    dh = cfg.h_bs - cfg.h
    ant = cfg.antenna

    def integrand(r):
        theta = 90.0 + np.degrees(np.arctan(dh / r))
        loss = channel.expected_total_loss(r, cfg.h, cfg)
        g = antenna.composite_gain_linear(phis, theta, cfg=ant)
        p = cfg.p_t_mw * loss * g
        return float(np.dot(wts, 1.0 - (1.0 + s * p / m) ** (-m))) * r

    lo, hi = max(r0, 1.0), cfg.region_radius
    if hi <= lo:
        return 1.0
    breaks = [b for b in (18.0, float(channel.breakpoint_distance(cfg.h_bs, cfg.h, cfg.f_c)), 4000.0)
              if lo < b < hi]
    val, err, info = integrate.quad(integrand, lo, hi, points=breaks or None, limit=400,
                                    epsabs=epsabs, epsrel=epsrel, full_output=True)[:3]
    if not np.isfinite(val) or err > max(1e-6 * abs(val), 1e-9):
        grid = np.linspace(lo, hi, 25)
        trace = [(float(r), integrand(r)) for r in grid]
        raise IntegrationError(f"PGFL integral did not converge (value {val:g}, error {err:g})", trace)
    return float(np.exp(-2.0 * np.pi * lam * val))
