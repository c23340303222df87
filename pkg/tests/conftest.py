"""Shared independent oracles for the test suite.

Power-series Bessel evaluations good to ~1e-12 for |x| <= 25; they share no
code with the package, so they can vouch for its spectral values.
"""

import numpy as np


def bessel_j0(x):
    """J0 by its alternating power series (scalar or array)."""
    x = np.asarray(x, dtype=float)
    x2 = 0.25 * x * x
    term = np.ones_like(x)
    total = np.ones_like(x)
    for k in range(1, 80):
        term = term * (-x2 / (k * k))
        total = total + term
        if np.all(np.abs(term) < 1e-18):
            break
    return total if total.ndim else float(total)


def bessel_j1(x):
    """J1 by its power series: (x/2) sum (-x^2/4)^k / (k! (k+1)!)."""
    x = np.asarray(x, dtype=float)
    x2 = 0.25 * x * x
    term = np.ones_like(x)
    total = np.ones_like(x)
    for k in range(1, 80):
        term = term * (-x2 / (k * (k + 1)))
        total = total + term
        if np.all(np.abs(term) < 1e-18):
            break
    out = 0.5 * x * total
    return out if out.ndim else float(out)
