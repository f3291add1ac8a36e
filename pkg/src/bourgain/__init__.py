"""Certified lower bounds on Bourgain's constant for harmonic measure."""

from .engine import BoundCertificate, ParameterTuple, certify
from .estimate import alpha3, alpha4, alpha_for_range, select_alpha
from .netmeasure import DigitalSet, MassFunction, frostman, net_content, verify_frostman
from .rigor import DirectedValue, dv

__version__ = "0.1.0"

__all__ = [
    "BoundCertificate",
    "DigitalSet",
    "DirectedValue",
    "MassFunction",
    "ParameterTuple",
    "alpha3",
    "alpha4",
    "alpha_for_range",
    "certify",
    "dv",
    "frostman",
    "net_content",
    "select_alpha",
    "verify_frostman",
]
