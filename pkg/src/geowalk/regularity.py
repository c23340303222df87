"""Regularity of fold push-forwards via the quadratic normal form.

Near a fold point the endpoint map looks like a submersion times a
non-degenerate quadratic form, so the walk measure's local density questions
reduce to the law of a difference of independent chi-square variables:
``Z = sum_{i<=a} G_i^2 - sum_{j<=b} H_j^2`` with standard normal draws.  Its
characteristic function is an explicit product whose polynomial decay rate
``(a+b)/2`` controls how many classical derivatives the density has.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .errors import HypothesisViolatedError


@dataclass(frozen=True)
class QuadraticFormSpec:
    """Signature of the quadratic normal form: counts of + and - squares."""

    pos_count: int
    neg_count: int

    def __post_init__(self):
        if self.pos_count < 0 or self.neg_count < 0:
            raise ValueError("square counts must be non-negative")
        if self.pos_count + self.neg_count == 0:
            raise ValueError("the quadratic form must have at least one square")

    @property
    def total(self) -> int:
        return self.pos_count + self.neg_count


def spec_from_certificate(cert) -> QuadraticFormSpec:
    """Quadratic-form signature carried by a fold certificate.

    Uses the Hessian signature restricted to the kernel of the differential;
    for a genuine fold its counts fill the kernel dimension exactly.
    """
    n = len(cert.sign_pattern)
    total = cert.hessian_eigenvalues.shape[0]
    dm1 = total // n
    pos, neg = cert.kernel_signature
    if pos + neg != (n - 1) * dm1:
        raise ValueError(
            "kernel-restricted Hessian is degenerate; "
            "the certificate does not describe a fold normal form"
        )
    return QuadraticFormSpec(pos, neg)


def chi_diff_cf(spec: QuadraticFormSpec, t):
    """Characteristic function of the chi-square difference law.

    ``(1 - 2it)^(-a/2) (1 + 2it)^(-b/2)`` on the principal branch; the
    modulus is ``(1 + 4 t^2)^(-(a+b)/4)``.
    """
    t = np.asarray(t, dtype=float)
    a, b = spec.pos_count, spec.neg_count
    out = (1.0 - 2.0j * t) ** (-a / 2.0) * (1.0 + 2.0j * t) ** (-b / 2.0)
    return out if out.ndim else complex(out)


def sample_chi_diff(spec: QuadraticFormSpec, rng: np.random.Generator,
                    n_samples: int) -> np.ndarray:
    """Draws of Z = sum of a squared normals minus sum of b squared normals."""
    if n_samples < 1:
        raise ValueError("need at least one sample")
    a, b = spec.pos_count, spec.neg_count
    out = np.zeros(n_samples)
    if a:
        out += (rng.standard_normal((n_samples, a)) ** 2).sum(axis=1)
    if b:
        out -= (rng.standard_normal((n_samples, b)) ** 2).sum(axis=1)
    return out


def normal_form_pushforward_cf(spec: QuadraticFormSpec, ts,
                               n_samples: int, rng: np.random.Generator):
    """Empirical characteristic function of the sampled normal-form law.

    Returns ``(values, stderr)`` on the frequency grid ``ts``.
    """
    ts = np.atleast_1d(np.asarray(ts, dtype=float))
    z = sample_chi_diff(spec, rng, n_samples)
    phases = np.exp(1j * np.outer(ts, z))
    values = phases.mean(axis=1)
    var_re = phases.real.var(axis=1, ddof=1)
    var_im = phases.imag.var(axis=1, ddof=1)
    stderr = np.sqrt((var_re + var_im) / n_samples)
    return values, stderr


def decay_exponent_fit(ts, cf_values) -> float:
    """Polynomial decay rate of ``|cf|``: the positive exponent ``p`` in
    ``|cf(t)| ~ t^(-p)``, fitted on the last decade of the grid.

    The grid must span at least two decades so a genuine tail exists.
    """
    ts = np.asarray(ts, dtype=float)
    mags = np.abs(np.asarray(cf_values))
    keep = ts > 0
    ts, mags = ts[keep], mags[keep]
    if ts.size < 5:
        raise ValueError("need at least five positive frequencies")
    t_min, t_max = float(ts.min()), float(ts.max())
    if t_max < 100.0 * t_min * (1.0 - 1e-12):
        raise ValueError("frequency grid must span at least two decades")
    if np.any(mags <= 0.0):
        raise ValueError("characteristic-function magnitudes must be positive")
    tail = ts >= t_max / 10.0
    if int(tail.sum()) < 5:
        raise ValueError("tail decade must contain at least five points")
    slope = np.polyfit(np.log(ts[tail]), np.log(mags[tail]), 1)[0]
    return float(-slope)


class RegularityIndex(NamedTuple):
    index: int
    guaranteed: bool


def regularity_index(n: int, d: int) -> RegularityIndex:
    """Classical differentiability order guaranteed for the n-step walk
    density in dimension d: ``(n-1)(d-1)/2 - 2``.

    The fold argument behind it needs ``n`` odd; even ``n`` raises
    :class:`HypothesisViolatedError`.  Negative values are returned with
    ``guaranteed=False``: the formula then promises nothing.
    """
    if n < 1 or d < 2:
        raise ValueError("need n >= 1 and d >= 2")
    if n % 2 == 0:
        raise HypothesisViolatedError(
            "the regularity bound requires an odd step count"
        )
    k = ((n - 1) * (d - 1)) // 2 - 2
    return RegularityIndex(index=k, guaranteed=k >= 0)
