"""Kobayashi and Wu metrics of the pseudo-egg domains and their curvature."""

from .domain import EggParams, DomainPoint, EggAutomorphism, BallAutomorphism
from .exceptions import DomainError, InfeasibleError, RootNotBracketed
from .kobayashi import kobayashi_axis, kobayashi_general, indicatrix_boundary
from .wu import wu_general, wu_axis, fit_min_volume_ellipsoid
from .curvature import hsc, curvature_tensor_fd, currents_negativity_test

__all__ = [
    "EggParams", "DomainPoint", "EggAutomorphism", "BallAutomorphism",
    "DomainError", "InfeasibleError", "RootNotBracketed",
    "kobayashi_axis", "kobayashi_general", "indicatrix_boundary",
    "wu_general", "wu_axis", "fit_min_volume_ellipsoid",
    "hsc", "curvature_tensor_fd", "currents_negativity_test",
]
