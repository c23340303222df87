"""Closed-form Riemannian primitives on the three constant-curvature model
spaces: Euclidean space, hyperbolic space (hyperboloid model), and the flat
torus.

Conventions
-----------
* Euclidean ``R^d``: points are plain ``d``-vectors.
* Hyperbolic space of curvature ``-a^2`` is realized as the upper sheet of
  ``<x, x>_M = -1/a^2`` in ``R^{d+1}`` with the Minkowski form
  ``<u, w>_M = -u_0 w_0 + sum_i u_i w_i``.  Tangent vectors at ``x`` satisfy
  ``<x, v>_M = 0`` and the metric is the restriction of the form.
* Flat torus with periods ``(L_1, ..., L_d)``: points live in the fundamental
  domain ``[0, L_i)`` per coordinate.

All operations renormalize hyperboloid points back onto the constraint
surface and re-project transported vectors onto the tangent space, keeping
the constraint drift far below :attr:`Tolerances.hyperboloid_constraint`
even over thousands of chained calls.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import AmbiguousCutLocusError
from .tolerances import DEFAULT_TOLERANCES, Tolerances

EUCLIDEAN = "euclidean"
HYPERBOLIC = "hyperbolic"
FLAT_TORUS = "flat_torus"

_KINDS = (EUCLIDEAN, HYPERBOLIC, FLAT_TORUS)


@dataclass(frozen=True)
class ModelSpace:
    """A constant-curvature model space.

    Use the constructors :meth:`euclidean`, :meth:`hyperbolic` and
    :meth:`flat_torus` instead of the raw initializer.
    """

    kind: str
    dim: int
    curvature_scale: float | None = None      # hyperbolic only: curvature -a^2
    periods: tuple[float, ...] | None = None  # torus only

    def __post_init__(self):
        if self.kind not in _KINDS:
            raise ValueError(f"unknown model space kind {self.kind!r}")
        if self.dim < 2:
            raise ValueError("dimension must be >= 2")
        if self.kind == HYPERBOLIC:
            if self.curvature_scale is None or self.curvature_scale <= 0:
                raise ValueError("hyperbolic space needs curvature_scale a > 0")
        elif self.kind == FLAT_TORUS:
            if self.periods is None or len(self.periods) != self.dim:
                raise ValueError("flat torus needs one period per dimension")
            if any(p <= 0 for p in self.periods):
                raise ValueError("torus periods must be positive")

    @classmethod
    def euclidean(cls, dim: int) -> "ModelSpace":
        return cls(EUCLIDEAN, dim)

    @classmethod
    def hyperbolic(cls, dim: int, curvature_scale: float = 1.0) -> "ModelSpace":
        """Hyperbolic space of sectional curvature ``-curvature_scale**2``."""
        return cls(HYPERBOLIC, dim, curvature_scale=float(curvature_scale))

    @classmethod
    def flat_torus(cls, periods) -> "ModelSpace":
        periods = tuple(float(p) for p in periods)
        return cls(FLAT_TORUS, len(periods), periods=periods)

    @property
    def ambient_dim(self) -> int:
        """Length of the coordinate vectors (``d + 1`` on the hyperboloid)."""
        return self.dim + 1 if self.kind == HYPERBOLIC else self.dim

    def origin(self) -> "ManifoldPoint":
        """A canonical base point (coordinate origin; hyperboloid apex)."""
        coords = np.zeros(self.ambient_dim)
        if self.kind == HYPERBOLIC:
            coords[0] = 1.0 / self.curvature_scale
        return ManifoldPoint(self, coords)

    def describe(self) -> dict:
        out = {"kind": self.kind, "dim": self.dim}
        if self.kind == HYPERBOLIC:
            out["curvature_scale"] = self.curvature_scale
        if self.kind == FLAT_TORUS:
            out["periods"] = list(self.periods)
        return out


@dataclass(eq=False)
class ManifoldPoint:
    """A point of a model space, stored in ambient coordinates."""

    space: ModelSpace
    coords: np.ndarray

    def __post_init__(self):
        c = np.asarray(self.coords, dtype=float)
        if c.shape != (self.space.ambient_dim,):
            raise ValueError(
                f"point needs {self.space.ambient_dim} coordinates, got {c.shape}"
            )
        self.coords = c


@dataclass(eq=False)
class TangentVector:
    """A tangent vector attached to a base point."""

    base: ManifoldPoint
    components: np.ndarray

    def __post_init__(self):
        c = np.asarray(self.components, dtype=float)
        if c.shape != (self.base.space.ambient_dim,):
            raise ValueError("tangent components must match ambient dimension")
        self.components = c

    @property
    def space(self) -> ModelSpace:
        return self.base.space


# ---------------------------------------------------------------------------
# low-level array helpers (shared with the batched kernels)

def minkowski_inner(u, v):
    """Minkowski form ``-u0*v0 + u1*v1 + ...`` over the last axis."""
    u = np.asarray(u, dtype=float)
    v = np.asarray(v, dtype=float)
    return np.sum(u[..., 1:] * v[..., 1:], axis=-1) - u[..., 0] * v[..., 0]


def _inner_raw(space: ModelSpace, u, v):
    if space.kind == HYPERBOLIC:
        return minkowski_inner(u, v)
    return np.sum(np.asarray(u) * np.asarray(v), axis=-1)


def _renormalize_point(space: ModelSpace, coords: np.ndarray) -> np.ndarray:
    """Project coordinates back onto the constraint surface (hyperboloid)."""
    if space.kind == HYPERBOLIC:
        a = space.curvature_scale
        q = minkowski_inner(coords, coords)
        coords = coords / (a * np.sqrt(-q))
    elif space.kind == FLAT_TORUS:
        coords = np.mod(coords, np.asarray(space.periods))
    return coords


def _project_tangent(space: ModelSpace, base_coords, comps):
    """Orthogonal (metric) projection of ambient components onto the tangent
    space at ``base_coords``."""
    if space.kind == HYPERBOLIC:
        a = space.curvature_scale
        return comps + (a * a) * minkowski_inner(base_coords, comps)[..., None] * base_coords
    return comps


def _torus_displacement(space: ModelSpace, from_coords, to_coords):
    """Per-coordinate minimal lattice displacement from ``from`` to ``to``."""
    periods = np.asarray(space.periods)
    delta = np.mod(to_coords - from_coords + periods / 2.0, periods) - periods / 2.0
    return delta


# ---------------------------------------------------------------------------
# validation helpers

def _check_space(space: ModelSpace, x: ManifoldPoint):
    if x.space != space:
        raise ValueError("point does not belong to the given model space")


def _check_base(x: ManifoldPoint, v: TangentVector, tol: Tolerances):
    if v.base.space != x.space:
        raise ValueError("tangent vector belongs to a different model space")
    if not np.allclose(v.base.coords, x.coords, rtol=0.0, atol=tol.base_match):
        raise ValueError("tangent vector is based at a different point")


def _check_unit(space: ModelSpace, x: ManifoldPoint, v: TangentVector, tol: Tolerances):
    n2 = _inner_raw(space, v.components, v.components)
    if abs(n2 - 1.0) > 2.0 * tol.unit_norm:
        raise ValueError(f"direction must be a unit tangent vector (|v|^2 = {n2})")


# ---------------------------------------------------------------------------
# core operations

def exp_map(space: ModelSpace, x: ManifoldPoint, v: TangentVector, t: float,
            tol: Tolerances = DEFAULT_TOLERANCES) -> ManifoldPoint:
    """Point reached after geodesic time ``t >= 0`` from ``x`` with unit
    initial velocity ``v``.

    Euclidean: ``x + t v``.  Torus: the same, reduced to the fundamental
    domain.  Hyperboloid: ``cosh(a t) x + sinh(a t)/a v`` followed by
    constraint renormalization.
    """
    _check_space(space, x)
    _check_base(x, v, tol)
    _check_unit(space, x, v, tol)
    t = float(t)
    if t < 0:
        raise ValueError("geodesic time must be non-negative")
    if space.kind == EUCLIDEAN:
        coords = x.coords + t * v.components
    elif space.kind == FLAT_TORUS:
        coords = np.mod(x.coords + t * v.components, np.asarray(space.periods))
    else:
        a = space.curvature_scale
        coords = math.cosh(a * t) * x.coords + (math.sinh(a * t) / a) * v.components
        coords = _renormalize_point(space, coords)
    return ManifoldPoint(space, coords)


def log_map(space: ModelSpace, x: ManifoldPoint, y: ManifoldPoint,
            tol: Tolerances = DEFAULT_TOLERANCES) -> TangentVector:
    """Tangent vector ``v`` at ``x`` with ``exp_map(x, v/|v|, |v|) = y``.

    On the torus the minimizing lattice representative is used; a tie within
    ``tol.cut_locus_tie`` of the cut locus raises
    :class:`AmbiguousCutLocusError` (exact ties would otherwise be broken by
    the lexicographically smallest lattice shift, which the per-coordinate
    reduction below realizes).
    """
    _check_space(space, x)
    _check_space(space, y)
    if space.kind == EUCLIDEAN:
        return TangentVector(x, y.coords - x.coords)
    if space.kind == FLAT_TORUS:
        periods = np.asarray(space.periods)
        delta = _torus_displacement(space, x.coords, y.coords)
        margin = periods / 2.0 - np.abs(delta)
        if np.any(margin < tol.cut_locus_tie):
            bad = int(np.argmin(margin))
            raise AmbiguousCutLocusError(
                f"coordinate {bad} is within {tol.cut_locus_tie} of the cut locus; "
                "the minimizing displacement is ambiguous"
            )
        return TangentVector(x, delta)
    a = space.curvature_scale
    u = _project_tangent(space, x.coords, y.coords)
    s = math.sqrt(max(minkowski_inner(u, u), 0.0))
    if s < 1e-300:
        return TangentVector(x, np.zeros_like(x.coords))
    dist = math.asinh(a * s) / a
    return TangentVector(x, u * (dist / s))


def distance(space: ModelSpace, x: ManifoldPoint, y: ManifoldPoint) -> float:
    """Geodesic distance.

    Hyperbolic value is ``(1/a) acosh(-a^2 <x,y>_M)``, evaluated through the
    equivalent ``asinh`` form which stays accurate for nearby points.
    """
    _check_space(space, x)
    _check_space(space, y)
    if space.kind == EUCLIDEAN:
        return float(np.linalg.norm(y.coords - x.coords))
    if space.kind == FLAT_TORUS:
        return float(np.linalg.norm(_torus_displacement(space, x.coords, y.coords)))
    a = space.curvature_scale
    u = _project_tangent(space, x.coords, y.coords)
    s = math.sqrt(max(minkowski_inner(u, u), 0.0))
    return math.asinh(a * s) / a


def parallel_transport(space: ModelSpace, x: ManifoldPoint, direction: TangentVector,
                       t: float, u: TangentVector,
                       tol: Tolerances = DEFAULT_TOLERANCES) -> TangentVector:
    """Parallel transport of ``u`` along the geodesic ``s -> exp_map(x, direction, s)``
    from ``s = 0`` to ``s = t``.

    Closed form on the hyperboloid: the component of ``u`` along ``direction``
    is carried to the geodesic's endpoint velocity, the orthogonal complement
    of ``span{x, direction}`` is fixed.  Euclidean and torus transport is the
    identity on components.
    """
    _check_space(space, x)
    _check_base(x, direction, tol)
    _check_base(x, u, tol)
    _check_unit(space, x, direction, tol)
    y = exp_map(space, x, direction, t, tol)
    if space.kind != HYPERBOLIC:
        return TangentVector(y, u.components.copy())
    a = space.curvature_scale
    c = minkowski_inner(u.components, direction.components)
    shift = (a * math.sinh(a * t)) * x.coords + (math.cosh(a * t) - 1.0) * direction.components
    comps = u.components + c * shift
    comps = _project_tangent(space, y.coords, comps)
    return TangentVector(y, comps)


def metric_inner(space: ModelSpace, x: ManifoldPoint, u: TangentVector,
                 w: TangentVector, tol: Tolerances = DEFAULT_TOLERANCES) -> float:
    """Riemannian inner product ``g_x(u, w)``."""
    _check_space(space, x)
    _check_base(x, u, tol)
    _check_base(x, w, tol)
    return float(_inner_raw(space, u.components, w.components))


def tangent_norm(space: ModelSpace, x: ManifoldPoint, u: TangentVector) -> float:
    return math.sqrt(max(metric_inner(space, x, u, u), 0.0))


def sample_unit_direction(space: ModelSpace, x: ManifoldPoint,
                          rng: np.random.Generator) -> TangentVector:
    """Uniform draw from the unit tangent sphere at ``x``.

    An ambient standard normal vector is projected onto the tangent space and
    normalized; rotation invariance of the Gaussian makes the result uniform.
    """
    _check_space(space, x)
    while True:
        g = rng.standard_normal(space.ambient_dim)
        comps = _project_tangent(space, x.coords, g)
        n2 = _inner_raw(space, comps, comps)
        if n2 > 1e-24:
            return TangentVector(x, comps / math.sqrt(n2))


def orthonormal_frame(space: ModelSpace, x: ManifoldPoint) -> list[TangentVector]:
    """Deterministic g-orthonormal tangent frame at ``x``.

    Gram-Schmidt over the projected canonical ambient basis; in Euclidean and
    torus spaces this returns the canonical basis exactly.
    """
    _check_space(space, x)
    if space.kind != HYPERBOLIC:
        return [TangentVector(x, e) for e in np.eye(space.dim)]
    frame = _hyperbolic_frame_array(space, x.coords)
    return [TangentVector(x, f) for f in frame]


def _hyperbolic_frame_array(space: ModelSpace, coords: np.ndarray) -> np.ndarray:
    """Array form of :func:`orthonormal_frame` for a single hyperboloid point.

    Returns shape ``(dim, dim + 1)``.
    """
    m = space.ambient_dim
    vectors = []
    for i in range(m):
        cand = _project_tangent(space, coords, np.eye(m)[i])
        for f in vectors:
            cand = cand - minkowski_inner(cand, f) * f
        n2 = minkowski_inner(cand, cand)
        if n2 > 1e-16:
            vectors.append(cand / math.sqrt(n2))
        if len(vectors) == space.dim:
            break
    return np.array(vectors)
