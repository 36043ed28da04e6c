"""Simulator and Lyapunov gain-certificate toolkit for hovering rigid
bodies whose moment commands induce spurious translational forces."""

__version__ = "0.1.0"

from . import so3
from .platform import Platform, PlatformClass, Coupling, classify, preferential_direction, spurious_gain, static_hoverability
from .certificate import GainSet, DomainBounds, CertificateReport, certify, gain_search, estimate_roa_level

__all__ = [
    "so3",
    "Platform",
    "PlatformClass",
    "Coupling",
    "classify",
    "preferential_direction",
    "spurious_gain",
    "static_hoverability",
    "GainSet",
    "DomainBounds",
    "CertificateReport",
    "certify",
    "gain_search",
    "estimate_roa_level",
]
