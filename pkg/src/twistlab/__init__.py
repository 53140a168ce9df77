"""Numerical experiments on standard families of twist maps of the annulus."""

from .fourier import g_star, sawtooth_coeffs, truncation_error
from .lecalvez import (
    Envelopes,
    Triplet,
    TripletClass,
    VerticalOrbit,
    classify_triplet,
    envelopes,
    find_vertical_periodic,
    lift_order_compare,
    triplet_order_audit,
)
from .maps import CircleFunction, CylinderPoint, MapInstance, NonDifferentiablePoint, TwistError
from .rotation import GridSpec, SearchBudget, no_ric_evidence, rho_interval_estimate, rho_v_estimate
from .sweeps import InconclusiveAtThisResolution, SweepConfig, sweep

__all__ = [
    "CircleFunction", "CylinderPoint", "Envelopes", "GridSpec", "InconclusiveAtThisResolution",
    "MapInstance", "NonDifferentiablePoint", "SearchBudget", "SweepConfig", "Triplet", "TripletClass",
    "TwistError", "VerticalOrbit", "classify_triplet", "envelopes", "find_vertical_periodic", "g_star",
    "lift_order_compare", "no_ric_evidence", "rho_interval_estimate", "rho_v_estimate", "sawtooth_coeffs",
    "sweep", "triplet_order_audit", "truncation_error",
]
