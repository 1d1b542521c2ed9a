"""Dimension-four geometric constants used throughout the package."""

from __future__ import annotations

import math
from dataclasses import dataclass

__all__ = ["OMEGA", "ALPHA4", "FRAK_C", "Constants", "CONSTANTS"]

# Surface measure of the unit 3-sphere in R^4.
OMEGA = 2.0 * math.pi**2

# Height normalization of the standard bubble profile.
ALPHA4 = 2.0 * math.sqrt(2.0)

# Charge carried by the bubble's boundary correction: alpha4 * omega * 2.
FRAK_C = 8.0 * math.sqrt(2.0) * math.pi**2


@dataclass(frozen=True)
class Constants:
    """Bundle of the three model constants.

    Attributes
    ----------
    omega : float
        Area of the unit 3-sphere, ``2 * pi**2``.
    alpha4 : float
        Bubble height constant, ``2 * sqrt(2)``.
    frakC : float
        Boundary-correction charge, ``8 * sqrt(2) * pi**2``.
    """

    omega: float = OMEGA
    alpha4: float = ALPHA4
    frakC: float = FRAK_C


CONSTANTS = Constants()
