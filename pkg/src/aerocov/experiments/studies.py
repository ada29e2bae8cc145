"""Named studies: configuration loading, execution and file output."""
from __future__ import annotations

import csv
import dataclasses
import json
import platform
import time
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
import yaml

from .. import __version__
from ..config import ConfigError, SystemConfig, config_fields
from ..coverage import METHODS, CoverageCurve, coverage_curve, write_curves_csv, write_curves_json
from ..critical_height import (
    HeightEvaluator, coverage_vs_height, curve_at, find_critical_height, height_grid, local_peaks,
)

STUDIES = ("validation", "element_sweep", "height_sweep", "fading_sweep", "tilt_sweep",
           "frequency_sweep", "critical_height")
MIN_MC_ITERATIONS = 100
STUDY_KEYS = ("study", "sweep", "series", "thresholds", "iterations", "realizations", "seed",
              "output_dir", "methods", "plots")
_T_SWEEP = tuple(float(t) for t in range(-10, 21, 2))


class IterationError(ConfigError):
    """Monte-Carlo iteration count below the study minimum."""


class OutputError(OSError):
    """Output directory cannot be created or written."""


@dataclass(frozen=True)
class Sweep:
    variable: str
    values: tuple

    def __post_init__(self):
        if self.variable not in config_fields():
            raise ConfigError(f"sweep variable {self.variable!r} is not a SystemConfig field")
        if len(self.values) == 0:
            raise ConfigError(f"sweep over {self.variable!r} has no values")


# per-study defaults: (sweep, series, thresholds, methods, base overrides)
STUDY_DEFAULTS = {
    "validation": (Sweep("h", (1.5, 50.0, 75.0, 100.0)), Sweep("n_elements", (16, 32, 64)),
                   _T_SWEEP, ("monte_carlo", "analytic_conditional"), {}),
    "element_sweep": (Sweep("n_elements", (16, 32, 64)), None, _T_SWEEP, ("analytic_conditional",),
                      {"h": 100.0}),
    "height_sweep": (Sweep("h", tuple(height_grid(1.0))), None, (5.0, 10.0), ("analytic_conditional",), {}),
    "fading_sweep": (Sweep("m", (1, 2, 4)), Sweep("h", (1.5, 50.0, 100.0)), _T_SWEEP,
                     ("analytic_conditional",), {}),
    "tilt_sweep": (Sweep("theta_t", (5.0, 10.0, 15.0)), Sweep("h", (1.5, 50.0, 100.0)), _T_SWEEP,
                   ("analytic_conditional",), {}),
    "frequency_sweep": (Sweep("f_c", (5.0, 28.0)), Sweep("h", (1.5, 50.0, 100.0)), _T_SWEEP,
                        ("analytic_conditional",), {}),
    "critical_height": (Sweep("h", tuple(height_grid(1.0))), None, (5.0, 10.0),
                        ("analytic_conditional",), {}),
}


@dataclass
class StudySpec:
    study: str = "validation"
    base_config: SystemConfig = field(default_factory=SystemConfig)
    sweep: Sweep | None = None
    series: Sweep | None = None
    thresholds: tuple = ()
    iterations: int = 10_000
    realizations: int = 1000
    master_seed: int = 0
    output_dir: Path = Path("results")
    methods: tuple = ()
    plots: bool = True

    def __post_init__(self):
        if self.study not in STUDIES:
            raise ConfigError(f"unknown study {self.study!r}; expected one of {STUDIES}")
        sweep, series, thresholds, methods, overrides = STUDY_DEFAULTS[self.study]
        if overrides:
            self.base_config = _apply_overrides(self.base_config, overrides)
        self.sweep = self.sweep or sweep
        if self.series is None and series is not None and series.variable != self.sweep.variable:
            self.series = series
        self.thresholds = tuple(float(t) for t in (self.thresholds or thresholds))
        self.methods = tuple(self.methods or methods)
        for mth in self.methods:
            if mth not in METHODS:
                raise ConfigError(f"unknown method {mth!r}; expected one of {METHODS}")
        if "monte_carlo" in self.methods and self.iterations < MIN_MC_ITERATIONS:
            raise IterationError(f"iterations = {self.iterations} < {MIN_MC_ITERATIONS} for a Monte-Carlo study")
        if self.realizations < 1:
            raise IterationError("realizations must be >= 1")
        self.output_dir = Path(self.output_dir)
        # every swept configuration must be valid before anything runs
        list(self.configs())

    def configs(self):
        series_vals = self.series.values if self.series else (None,)
        for s in series_vals:
            for v in self.sweep.values:
                yield self.config_for(v, s)

    def config_for(self, value, series_value=None) -> SystemConfig:
        changes = {self.sweep.variable: value}
        if self.series is not None:
            changes[self.series.variable] = series_value
        return _apply_overrides(self.base_config, changes)

    def samples(self, method: str) -> int:
        return self.iterations if method == "monte_carlo" else self.realizations

    def to_dict(self) -> dict:
        return {
            "study": self.study, "base_config": self.base_config.to_dict(),
            "sweep": dataclasses.asdict(self.sweep), "series": dataclasses.asdict(self.series) if self.series else None,
            "thresholds": list(self.thresholds), "iterations": self.iterations,
            "realizations": self.realizations, "master_seed": self.master_seed,
            "output_dir": str(self.output_dir), "methods": list(self.methods), "plots": self.plots,
        }


def _apply_overrides(cfg: SystemConfig, changes: dict) -> SystemConfig:
    try:
        return cfg.replace(**changes)
    except TypeError as exc:
        raise ConfigError(str(exc)) from exc


def _parse_sweep(raw, key) -> Sweep:
    if not isinstance(raw, dict) or set(raw) != {"variable", "values"}:
        raise ConfigError(f"field {key!r}: expected a mapping with 'variable' and 'values'")
    vals = raw["values"]
    if not isinstance(vals, list):
        raise ConfigError(f"field {key!r}: 'values' must be a list")
    return Sweep(str(raw["variable"]), tuple(vals))


def _check_type(name, value, expected):
    if isinstance(value, bool) or not isinstance(value, expected):
        raise ConfigError(f"field {name!r}: expected {expected}, got {value!r}")


def load_config(path, study: str | None = None, **overrides) -> StudySpec:
    """Parse a YAML study file.

    Top-level keys are SystemConfig fields plus the study keys
    (``study, sweep, series, thresholds, iterations, realizations, seed,
    output_dir, methods, plots``). Unset fields keep their defaults; unknown
    keys are rejected. Keyword ``overrides`` (e.g. from the command line)
    win over the file; ``None`` values are ignored.
    """
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    try:
        raw = yaml.safe_load(text)
    except yaml.YAMLError as exc:
        mark = getattr(exc, "problem_mark", None)
        where = f" at line {mark.line + 1}, column {mark.column + 1}" if mark else ""
        raise ConfigError(f"{path}: YAML parse error{where}: {getattr(exc, 'problem', exc)}") from exc
    return spec_from_mapping(raw or {}, study=study, **overrides)


def spec_from_mapping(raw: dict, study: str | None = None, **overrides) -> StudySpec:
    if not isinstance(raw, dict):
        raise ConfigError("config root must be a mapping")
    known = set(config_fields()) | set(STUDY_KEYS)
    unknown = sorted(set(raw) - known)
    if unknown:
        raise ConfigError(f"unknown key(s): {', '.join(map(str, unknown))}")
    cfg_kwargs = {k: v for k, v in raw.items() if k in config_fields()}
    for k, v in cfg_kwargs.items():
        if k in ("azimuth_mode", "mix_scale", "steering"):
            _check_type(k, v, str)
        elif k == "element_clamp" and v is None:
            continue
        else:
            _check_type(k, v, (int, float))
    base = SystemConfig(**cfg_kwargs)
    kw = {}
    for key in ("iterations", "realizations", "seed"):
        if key in raw:
            _check_type(key, raw[key], int)
    if "thresholds" in raw:
        if not isinstance(raw["thresholds"], list):
            raise ConfigError("field 'thresholds': expected a list")
        for t in raw["thresholds"]:
            _check_type("thresholds", t, (int, float))
        kw["thresholds"] = tuple(raw["thresholds"])
    if "methods" in raw:
        kw["methods"] = tuple(raw["methods"])
    for key in ("sweep", "series"):
        if raw.get(key) is not None:
            kw[key] = _parse_sweep(raw[key], key)
    mapping = {"iterations": "iterations", "realizations": "realizations", "seed": "master_seed",
               "output_dir": "output_dir", "plots": "plots"}
    for src, dst in mapping.items():
        if src in raw:
            kw[dst] = raw[src]
    for key, val in overrides.items():
        if val is not None:
            kw[key] = val
    return StudySpec(study=study or raw.get("study", "validation"), base_config=base, **kw)


# ------------------------------------------------------------------ execution

def _label(spec: StudySpec, value, series_value, method):
    parts = [f"{spec.sweep.variable}={_num(value)}"]
    if spec.series is not None:
        parts.append(f"{spec.series.variable}={_num(series_value)}")
    return ", ".join(parts) + f" [{method}]"


def _num(v):
    return f"{float(v):g}"


def _tag(curve: CoverageCurve, spec: StudySpec, value, series_value, method) -> CoverageCurve:
    curve = curve.relabel(spec.sweep.variable, value)
    curve.meta.update(label=_label(spec, value, series_value, method))
    if spec.series is not None:
        curve.meta.update(series_variable=spec.series.variable, series_value=float(series_value))
    return curve


def _threshold_curves(spec: StudySpec) -> list[CoverageCurve]:
    curves = []
    series_vals = spec.series.values if spec.series else (None,)
    for s in series_vals:
        for v in spec.sweep.values:
            cfg = spec.config_for(v, s)
            for method in spec.methods:
                c = coverage_curve(cfg, spec.thresholds, method, spec.samples(method), spec.master_seed)
                curves.append(_tag(c, spec, v, s, method))
    return curves


def _height_curves(spec: StudySpec) -> list[CoverageCurve]:
    curves = []
    heights = np.asarray(spec.sweep.values, dtype=float)
    for method in spec.methods:
        c = coverage_vs_height(spec.base_config, spec.thresholds, heights, method,
                               spec.samples(method), spec.master_seed)
        c.meta.update(label=f"[{method}]")
        curves.append(c)
    return curves


def _ensure_dir(path: Path) -> Path:
    try:
        path.mkdir(parents=True, exist_ok=True)
        probe = path / ".write_probe"
        probe.write_text("")
        probe.unlink()
    except OSError as exc:
        raise OutputError(f"output directory {path} is not writable: {exc}") from exc
    return path


def _tilt_table(spec: StudySpec, curves, path: Path) -> Path:
    lo, hi = spec.sweep.values[0], spec.sweep.values[-1]
    rows = []
    for c_lo in curves:
        if c_lo.sweep_values[0] != lo:
            continue
        for c_hi in curves:
            if (c_hi.sweep_values[0] == hi and c_hi.method == c_lo.method
                    and c_hi.meta.get("series_value") == c_lo.meta.get("series_value")):
                for t, a, b in zip(c_lo.t_db, c_lo.p_cov, c_hi.p_cov):
                    rows.append((c_lo.meta.get("series_value", ""), t, c_lo.method, a, b, 100.0 * (b - a)))
    with path.open("w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["series_value", "T_db", "method", f"p_cov_{spec.sweep.variable}={_num(lo)}",
                    f"p_cov_{spec.sweep.variable}={_num(hi)}", "delta_points"])
        for r in rows:
            w.writerow([_num(r[0]) if r[0] != "" else "", _num(r[1]), r[2], f"{r[3]:.6f}", f"{r[4]:.6f}", f"{r[5]:.4f}"])
    return path


def run_study(spec: StudySpec) -> dict[str, Path]:
    """Execute ``spec`` and write its outputs; returns ``{name: path}``."""
    out = _ensure_dir(spec.output_dir)
    t0 = time.perf_counter()
    files: dict[str, Path] = {}
    extra = {}
    if spec.study == "critical_height":
        curves, results = _critical_height_outputs(spec, out, files)
        extra["critical_height"] = [r.to_dict() for r in results]
    elif spec.study == "height_sweep":
        curves = _height_curves(spec)
    else:
        curves = _threshold_curves(spec)
    stem = spec.study
    files["csv"] = write_curves_csv(out / f"{stem}.csv", curves)
    files["json"] = write_curves_json(out / f"{stem}.json", curves, study=spec.study)
    if spec.study == "tilt_sweep":
        files["tilt_deltas"] = _tilt_table(spec, curves, out / "tilt_deltas.csv")
    if spec.plots:
        from .plots import emit_plots
        xaxis = "sweep" if spec.study in ("height_sweep", "critical_height") else "T_db"
        vlines = []
        if spec.study == "critical_height":
            vlines = sorted({p[0] for r in results for p in r.peaks} | {r.h_c for r in results})
        files["plot"] = emit_plots(curves, out / f"{stem}.svg", xaxis=xaxis, vlines=vlines,
                                   title=spec.study.replace("_", " "))
    manifest = {
        "study": spec.to_dict(),
        "config_digest": spec.base_config.digest(),
        "code_version": __version__,
        "python": platform.python_version(),
        "numpy": np.__version__,
        "runtime_s": round(time.perf_counter() - t0, 3),
        "curves": [{"label": c.meta.get("label", ""), "method": c.method, "samples": c.samples,
                    "config_digest": c.config_digest, "seed": spec.master_seed} for c in curves],
        "files": {k: p.name for k, p in files.items()},
        **extra,
    }
    files["manifest"] = out / "manifest.json"
    files["manifest"].write_text(json.dumps(manifest, indent=2, sort_keys=True) + "\n")
    return files


def _critical_height_outputs(spec: StudySpec, out: Path, files: dict):
    method = spec.methods[0]
    ev = HeightEvaluator(spec.base_config, spec.thresholds, method, spec.samples(method), spec.master_seed)
    results = []
    heights = np.asarray(spec.sweep.values, dtype=float)
    curve = coverage_vs_height(spec.base_config, spec.thresholds, heights, evaluator=ev)
    curve.meta.update(label=f"[{method}]")
    for t in spec.thresholds:
        res = find_critical_height(spec.base_config, t, evaluator=ev)
        h, p = curve_at(curve, t)
        res.peaks = local_peaks(h, p)
        results.append(res)
        files[f"critical_height_T{_num(t)}"] = res.write_json(out / f"critical_height_T{_num(t)}.json")
    return [curve], results
