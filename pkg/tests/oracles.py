"""Independent reference implementations used only by the tests.

Everything here deliberately avoids the code paths under test: the
polynomial oracle inverts the generating function as a generic power
series, the eigen oracles go through LAPACK and a characteristic
polynomial, the minimizer is a separate golden-section routine, and the
derivative checks are plain Richardson stencils.
"""

from __future__ import annotations

import numpy as np


def series_reciprocal(coeffs, order: int) -> np.ndarray:
    """Power-series reciprocal of ``sum coeffs[j] z**j`` through z**order."""
    a = np.asarray(coeffs, dtype=float)
    if a[0] == 0.0:
        raise ZeroDivisionError("series has no reciprocal")
    out = np.zeros(order + 1)
    out[0] = 1.0 / a[0]
    for n in range(1, order + 1):
        acc = 0.0
        top = min(n, a.size - 1)
        for j in range(1, top + 1):
            acc += a[j] * out[n - j]
        out[n] = -acc / a[0]
    return out


def chebu_generating(t: float, max_degree: int) -> np.ndarray:
    """Degree-2 Chebyshev kernel coefficients: 1 / (1 - 2 t z + z^2)."""
    return series_reciprocal([1.0, -2.0 * t, 1.0], max_degree)


def chebu_trig(t: float, m: int) -> float:
    """Second-kind Chebyshev value through the angle representation."""
    if abs(t) > 1.0:
        raise ValueError("trig form needs |t| <= 1")
    if abs(t) >= 1.0 - 1e-12:
        sign = 1.0 if t > 0.0 else -1.0
        return float((m + 1) * sign**m)
    theta = np.arccos(t)
    return float(np.sin((m + 1) * theta) / np.sin(theta))


def eigh_oracle(a) -> tuple:
    """LAPACK eigendecomposition, ascending."""
    w, v = np.linalg.eigh(np.asarray(a, dtype=float))
    return w, v


def charpoly_coeffs(a) -> np.ndarray:
    """Characteristic polynomial by the Faddeev-LeVerrier recursion.

    Returns monic coefficients ``[1, c_{n-1}, ..., c_0]`` suitable for
    :func:`numpy.roots`.
    """
    a = np.asarray(a, dtype=float)
    n = a.shape[0]
    coeffs = np.zeros(n + 1)
    coeffs[0] = 1.0
    m = np.zeros_like(a)
    for k in range(1, n + 1):
        m = a @ m + coeffs[k - 1] * np.eye(n)
        coeffs[k] = -(a * m.T).sum() / k
    return coeffs


def charpoly_eigs(a) -> np.ndarray:
    """Eigenvalues as roots of the characteristic polynomial, ascending."""
    roots = np.roots(charpoly_coeffs(a))
    return np.sort(roots.real)


def det_cofactor(a) -> float:
    """Recursive cofactor determinant; exponential, fine for tiny blocks."""
    a = np.asarray(a, dtype=float)
    n = a.shape[0]
    if n == 1:
        return float(a[0, 0])
    total = 0.0
    rest = a[1:]
    for j in range(n):
        minor = np.delete(rest, j, axis=1)
        total += (-1.0) ** j * a[0, j] * det_cofactor(minor)
    return total


def golden_section(f, a: float, b: float, tol: float = 1e-12,
                   max_iter: int = 300) -> tuple:
    """Reference unimodal minimizer, intentionally written long-form."""
    ratio = 2.0 / (1.0 + np.sqrt(5.0))
    lo, hi = float(a), float(b)
    x1 = hi - ratio * (hi - lo)
    x2 = lo + ratio * (hi - lo)
    f1, f2 = f(x1), f(x2)
    for _ in range(max_iter):
        if hi - lo < tol:
            break
        if f1 <= f2:
            hi, x2, f2 = x2, x1, f1
            x1 = hi - ratio * (hi - lo)
            f1 = f(x1)
        else:
            lo, x1, f1 = x1, x2, f2
            x2 = lo + ratio * (hi - lo)
            f2 = f(x2)
    xm = 0.5 * (lo + hi)
    return xm, f(xm)


def richardson_grad(f, x, h: float = 1e-4) -> np.ndarray:
    """Richardson-extrapolated central differences, one entry per coord."""
    x = np.asarray(x, dtype=float)
    out = np.zeros(x.size)
    for i in range(x.size):
        e = np.zeros(x.size)
        e[i] = 1.0

        def central(step):
            return (f(x + step * e) - f(x - step * e)) / (2.0 * step)

        d1 = central(h)
        d2 = central(0.5 * h)
        out[i] = (4.0 * d2 - d1) / 3.0
    return out


def fd_laplacian_4d(f, x, h: float = 1e-3) -> float:
    """Plain second-difference Laplacian over the four coordinates."""
    x = np.asarray(x, dtype=float)
    fx = f(x)
    acc = 0.0
    for i in range(4):
        e = np.zeros(4)
        e[i] = h
        acc += f(x + e) - 2.0 * fx + f(x - e)
    return acc / (h * h)
