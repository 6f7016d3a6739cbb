"""Concept-inventory support and robustness analyses."""

from .concepts import MergeMap, canonicalize_concept, coverage_fraction
from .saturation import DEFAULT_WINDOW, SaturationCurve, saturation_curve, stable_point
from .sweep import (
    SweepCell,
    SweepRow,
    default_thresholds,
    render_sweep,
    respondent_token_counts,
    threshold_sweep,
)

__all__ = [
    "DEFAULT_WINDOW",
    "MergeMap",
    "SaturationCurve",
    "SweepCell",
    "SweepRow",
    "canonicalize_concept",
    "coverage_fraction",
    "default_thresholds",
    "render_sweep",
    "respondent_token_counts",
    "saturation_curve",
    "stable_point",
    "threshold_sweep",
]
