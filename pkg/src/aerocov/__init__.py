"""Downlink coverage of ground and aerial users under 3GPP antenna/channel models."""
from .config import AntennaConfig, ConfigError, SystemConfig
from .coverage import (
    CoverageCurve, analytic_coverage, approx_coverage_paper, conditional_coverage,
    coverage_curve, instantaneous_sinr, laplace_interference, laplace_interference_ppp,
    mc_coverage,
)
from .deployment import Deployment, LinkGeometry, associate_nearest, link_geometry, sample_ppp

__version__ = "0.1.0"

__all__ = [
    "AntennaConfig", "ConfigError", "SystemConfig", "CoverageCurve", "Deployment",
    "LinkGeometry", "analytic_coverage", "approx_coverage_paper", "associate_nearest",
    "conditional_coverage", "coverage_curve", "instantaneous_sinr", "laplace_interference",
    "laplace_interference_ppp", "link_geometry", "mc_coverage", "sample_ppp",
]
