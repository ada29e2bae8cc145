"""PPP base-station layouts around a typical user at the origin.

Random streams are keyed by ``(master_seed, *key)`` through
``numpy.random.SeedSequence``; realization ``i`` of a study is identical no
matter how the work is split across workers.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .config import SystemConfig

MIN_LINK_DISTANCE = 1.0  # m
MAX_REDRAWS = 10_000

# stream sub-keys
DEPLOYMENT_STREAM = 0
FADING_STREAM = 1


def stream(master_seed: int, *key: int) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence(int(master_seed), spawn_key=tuple(int(k) for k in key)))


def wrap_degrees(a):
    """Wrap to (-180, 180]."""
    a = np.asarray(a, dtype=float)
    w = -((-a + 180.0) % 360.0) + 180.0
    return w if w.ndim else float(w)


def bearing(dx, dy):
    """Compass bearing of the vector (dx, dy) in degrees, 0 along +y, clockwise."""
    return np.degrees(np.arctan2(dx, dy))


@dataclass(frozen=True)
class Deployment:
    bs_positions: np.ndarray  # (n, 2) m
    bs_orientations: np.ndarray  # (n,) boresight bearings, deg
    user_position: np.ndarray = field(default_factory=lambda: np.zeros(2))
    redraws: int = 0

    def __len__(self) -> int:
        return len(self.bs_positions)

    @property
    def distances(self) -> np.ndarray:
        return np.hypot(*(self.bs_positions - self.user_position).T)


@dataclass(frozen=True)
class LinkGeometry:
    r: np.ndarray  # 2D distance, m (after clamping)
    d3d: np.ndarray  # m
    theta: np.ndarray  # deg, [0, 180], 90 = horizon
    phi: np.ndarray  # deg, (-180, 180]


def sample_ppp(config: SystemConfig, rng: np.random.Generator) -> Deployment:
    """One homogeneous-PPP realization on the disc of radius ``region_radius``.

    Empty realizations are re-drawn; the number of re-draws is recorded on the
    result.
    """
    radius = config.region_radius
    if radius <= 0:
        raise ValueError(f"region_radius must be > 0, got {radius}")
    mean = config.lambda_per_m2 * np.pi * radius ** 2
    redraws = 0
    n = rng.poisson(mean)
    while n == 0:
        redraws += 1
        if redraws > MAX_REDRAWS:
            raise RuntimeError(f"no BS drawn after {MAX_REDRAWS} attempts (mean count {mean:.3g})")
        n = rng.poisson(mean)
    rad = radius * np.sqrt(rng.random(n))
    ang = rng.uniform(-np.pi, np.pi, n)
    pos = np.column_stack([rad * np.cos(ang), rad * np.sin(ang)])
    # always consumed so that positions/orientations do not depend on the mode
    random_az = wrap_degrees(rng.uniform(-180.0, 180.0, n))
    orient = _orientations(pos, random_az, config.azimuth_mode)
    return Deployment(pos, orient, redraws=redraws)


def _orientations(pos, random_az, mode):
    toward_user = bearing(-pos[:, 0], -pos[:, 1])
    if mode == "aligned":
        return toward_user
    if mode == "uniform_random":
        return random_az
    if mode == "global_fixed":
        return np.zeros(len(pos))
    # serving_aligned
    out = random_az.copy()
    k = associate_nearest(pos)
    out[k] = toward_user[k]
    return out


def associate_nearest(dep) -> int:
    """Index of the BS closest in 2D to the user; ties go to the lower index."""
    if isinstance(dep, Deployment):
        d = dep.distances
    else:
        pos = np.asarray(dep, dtype=float)
        d = np.hypot(pos[:, 0], pos[:, 1])
    if len(d) == 0:
        raise ValueError("empty deployment")
    return int(np.argmin(d))


def link_geometry(bs, boresight, config: SystemConfig, user=(0.0, 0.0)) -> LinkGeometry:
    """Geometry of the link(s) from BS position(s) ``bs`` to the user.

    Vectorized over a ``(n, 2)`` array of positions. Under
    ``azimuth_mode == "global_fixed"`` the azimuth is ``arctan(x / y)`` of the
    BS position, which folds the bearing into [-90, 90].
    """
    bs = np.asarray(bs, dtype=float)
    boresight = np.asarray(boresight, dtype=float)
    dx = bs[..., 0] - user[0]
    dy = bs[..., 1] - user[1]
    r = np.maximum(np.hypot(dx, dy), MIN_LINK_DISTANCE)
    dh = config.h_bs - config.h
    d3d = np.sqrt(r ** 2 + dh ** 2)
    theta = 90.0 + np.degrees(np.arctan(dh / r))
    if config.azimuth_mode == "global_fixed":
        with np.errstate(divide="ignore", invalid="ignore"):
            phi = np.degrees(np.arctan(dx / dy))
        phi = np.where(np.isnan(phi), 0.0, phi)
    else:
        phi = wrap_degrees(bearing(-dx, -dy) - boresight)
    return LinkGeometry(r, d3d, theta, np.asarray(phi))


def sample_deployments(config: SystemConfig, count: int, master_seed: int, start: int = 0) -> list[Deployment]:
    """Realizations ``start .. start + count - 1`` of the deployment stream."""
    return [sample_ppp(config, stream(master_seed, i, DEPLOYMENT_STREAM)) for i in range(start, start + count)]
