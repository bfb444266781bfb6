"""Periodic central-difference stencils and node-mask utilities.

All grid derivatives outside the spectral transforms use five-point
(fourth-order) central stencils; the node mask is always dilated by two
points, which is exactly the stencil half-width, so masked values never
contaminate reported fields.
"""

from __future__ import annotations

import numpy as np


def central_first(values: np.ndarray, dx: float) -> np.ndarray:
    """Fourth-order periodic central first derivative."""
    f1 = np.roll(values, -1)
    f2 = np.roll(values, -2)
    b1 = np.roll(values, 1)
    b2 = np.roll(values, 2)
    return (b2 - 8.0 * b1 + 8.0 * f1 - f2) / (12.0 * dx)


def central_second(values: np.ndarray, dx: float) -> np.ndarray:
    """Fourth-order periodic central second derivative."""
    f1 = np.roll(values, -1)
    f2 = np.roll(values, -2)
    b1 = np.roll(values, 1)
    b2 = np.roll(values, 2)
    return (-b2 + 16.0 * b1 - 30.0 * values + 16.0 * f1 - f2) / (12.0 * dx * dx)


def central_first_from_increments(d: np.ndarray, dx: float) -> np.ndarray:
    """Fourth-order first derivative built from periodic increments d_j = f_{j+1} - f_j.

    Algebraically identical to central_first(f, dx) away from the array
    ends, but usable for quantities like the unwrapped phase that are
    periodic only up to a winding term, provided the increments themselves
    are wrapped into the principal branch.
    """
    dm2 = np.roll(d, 2)
    dm1 = np.roll(d, 1)
    dp1 = np.roll(d, -1)
    return (-dm2 + 7.0 * dm1 + 7.0 * d - dp1) / (12.0 * dx)


def dilate_mask(mask: np.ndarray, width: int = 2) -> np.ndarray:
    """Extend a boolean mask by `width` grid points on each side (periodic)."""
    out = mask.copy()
    for k in range(1, width + 1):
        out |= np.roll(mask, k)
        out |= np.roll(mask, -k)
    return out
