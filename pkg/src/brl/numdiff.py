"""Finite-difference helpers shared by search routines and self-checks."""

from __future__ import annotations

import numpy as np

from .errors import DomainError

__all__ = ["central_gradient", "richardson_gradient", "fd_hessian", "fd_laplacian"]


def central_gradient(f, x, h: float = 1e-5) -> np.ndarray:
    """Second-order central-difference gradient of a scalar function."""
    x = np.asarray(x, dtype=float)
    g = np.zeros_like(x)
    for i in range(x.size):
        e = np.zeros_like(x)
        e.flat[i] = h
        g.flat[i] = (f(x + e) - f(x - e)) / (2.0 * h)
    return g


def richardson_gradient(f, x, h: float = 1e-4) -> np.ndarray:
    """Richardson-extrapolated central gradient: (4 D(h/2) - D(h)) / 3.

    Fourth-order accurate; the workhorse for verifying analytic
    derivatives without trusting a single step size.
    """
    coarse = central_gradient(f, x, h)
    fine = central_gradient(f, x, h / 2.0)
    return (4.0 * fine - coarse) / 3.0


def fd_hessian(f, x, h: float = 1e-4) -> np.ndarray:
    """Central-difference Hessian, symmetrized."""
    x = np.asarray(x, dtype=float)
    n = x.size
    hess = np.zeros((n, n))
    f0 = f(x)
    for i in range(n):
        ei = np.zeros_like(x)
        ei.flat[i] = h
        hess[i, i] = (f(x + ei) - 2.0 * f0 + f(x - ei)) / (h * h)
        for j in range(i + 1, n):
            ej = np.zeros_like(x)
            ej.flat[j] = h
            hess[i, j] = hess[j, i] = (
                f(x + ei + ej) - f(x + ei - ej) - f(x - ei + ej) + f(x - ei - ej)
            ) / (4.0 * h * h)
    return 0.5 * (hess + hess.T)


def fd_laplacian(f, x, h: float = 1e-3) -> float:
    """Sum of second central differences along every coordinate axis."""
    x = np.asarray(x, dtype=float)
    if x.ndim != 1:
        raise DomainError("x must be a vector")
    f0 = f(x)
    total = 0.0
    for i in range(x.size):
        e = np.zeros_like(x)
        e.flat[i] = h
        total += (f(x + e) - 2.0 * f0 + f(x - e)) / (h * h)
    return float(total)
