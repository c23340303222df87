"""Piecewise geodesics driven by direction tuples, and the endpoint map.

A direction tuple ``(v_1, ..., v_n)`` of unit tangents at ``x`` generates a
broken geodesic: walk time ``r`` along ``v_1``, parallel-transport the
remaining directions, walk time ``r`` along the transported ``v_2``, and so
on.  ``phi_endpoint`` is the end of that path; as a map from the n-fold
product of unit tangent spheres to the manifold it is the object whose
critical points the :mod:`geowalk.singular` module analyzes.

Charts on the domain are products of sphere exponential charts: factor ``i``
is rotated away from its center direction by the angle ``|y_i|`` toward the
offset ``y_i`` expressed in a fixed orthonormal basis of the center's
orthogonal complement.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass

import numpy as np

from . import _core
from .errors import ChartDomainError
from .spaces import (
    EUCLIDEAN,
    FLAT_TORUS,
    HYPERBOLIC,
    ManifoldPoint,
    ModelSpace,
    TangentVector,
    _hyperbolic_frame_array,
    _inner_raw,
    _project_tangent,
    _torus_displacement,
    exp_map,
    minkowski_inner,
    orthonormal_frame,
    parallel_transport,
)
from .tolerances import DEFAULT_TOLERANCES, Tolerances


@dataclass(eq=False)
class DirectionTuple:
    """An ordered tuple of unit tangent vectors sharing one base point."""

    space: ModelSpace
    base: ManifoldPoint
    r: float
    dirs: np.ndarray  # (n, ambient_dim)

    def __post_init__(self):
        arr = np.asarray(self.dirs, dtype=float)
        if arr.ndim != 2 or arr.shape[1] != self.space.ambient_dim:
            raise ValueError("directions must be an (n, ambient_dim) array")
        if arr.shape[0] < 1:
            raise ValueError("need at least one direction")
        if self.r <= 0:
            raise ValueError("step length r must be positive")
        norms = _inner_raw(self.space, arr, arr)
        if np.any(np.abs(norms - 1.0) > 2e-9):
            raise ValueError("all directions must be unit tangent vectors")
        if self.space.kind == HYPERBOLIC:
            ortho = minkowski_inner(arr, self.base.coords[None, :])
            if np.any(np.abs(ortho) * self.space.curvature_scale**2 > 1e-8):
                raise ValueError("directions must be tangent to the hyperboloid")
        self.dirs = arr

    @property
    def n(self) -> int:
        return self.dirs.shape[0]

    @classmethod
    def from_vectors(cls, r: float, vectors: list[TangentVector]) -> "DirectionTuple":
        """Build from tangent vectors; they must share a base point."""
        if not vectors:
            raise ValueError("need at least one direction")
        base = vectors[0].base
        for v in vectors[1:]:
            if not np.allclose(v.base.coords, base.coords, rtol=0.0, atol=1e-9):
                raise ValueError("directions are based at different points")
        arr = np.array([v.components for v in vectors])
        return cls(base.space, base, float(r), arr)

    def vectors(self) -> list[TangentVector]:
        return [TangentVector(self.base, row.copy()) for row in self.dirs]


@dataclass(eq=False)
class Trajectory:
    """A broken geodesic with its parallel-transported direction record.

    ``breakpoints`` has shape (n+1, m); ``segment_dirs[k]`` is the unit
    velocity of segment ``k`` expressed at ``breakpoints[k]``;
    ``frames[k, i]`` is direction ``i`` of the generating tuple transported
    to ``breakpoints[k]``.
    """

    space: ModelSpace
    r: float
    breakpoints: np.ndarray   # (n+1, m)
    segment_dirs: np.ndarray  # (n, m)
    frames: np.ndarray        # (n+1, n, m)

    @property
    def n(self) -> int:
        return self.segment_dirs.shape[0]

    def point(self, k: int) -> ManifoldPoint:
        return ManifoldPoint(self.space, self.breakpoints[k].copy())

    def endpoint(self) -> ManifoldPoint:
        return self.point(self.n)

    def end_velocity(self, k: int) -> TangentVector:
        """Arrival velocity of segment ``k`` at breakpoint ``k + 1``."""
        return TangentVector(self.point(k + 1), self.frames[k + 1, k].copy())


def broken_geodesic(v: DirectionTuple, tol: Tolerances = DEFAULT_TOLERANCES) -> Trajectory:
    """Integrate the broken geodesic of ``v`` segment by segment.

    Pure scalar construction through the geometry primitives; the batched
    kernels never touch this code path, which makes it a useful independent
    cross-check of ``phi_endpoint``.
    """
    space, n = v.space, v.n
    points = [v.base]
    frames = [v.dirs.copy()]
    segment_dirs = np.empty_like(v.dirs)
    for k in range(n):
        x = points[k]
        frame_here = frames[k]
        step_dir = TangentVector(x, frame_here[k].copy())
        segment_dirs[k] = frame_here[k]
        moved = np.empty_like(frame_here)
        for i in range(n):
            moved[i] = parallel_transport(
                space, x, step_dir, v.r, TangentVector(x, frame_here[i].copy()), tol
            ).components
        points.append(exp_map(space, x, step_dir, v.r, tol))
        frames.append(moved)
    return Trajectory(
        space,
        v.r,
        np.array([p.coords for p in points]),
        segment_dirs,
        np.array(frames),
    )


def phi_endpoint(v: DirectionTuple) -> ManifoldPoint:
    """Endpoint of the broken geodesic (the piecewise-geodesic endpoint map)."""
    out = _core.phi_endpoints(v.space, v.base.coords, v.dirs[None, :, :], v.r)
    return ManifoldPoint(v.space, out[0])


def trajectory_to_csv(traj: Trajectory, path) -> None:
    """Write one row per breakpoint: index, then ambient coordinates."""
    m = traj.breakpoints.shape[1]
    with open(path, "w", newline="\n", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["k"] + [f"x{i}" for i in range(m)])
        for k, row in enumerate(traj.breakpoints):
            writer.writerow([k] + [repr(float(c)) for c in row])


# ---------------------------------------------------------------------------
# sphere charts on the domain

@dataclass(eq=False)
class SphereChart:
    """Product of sphere exponential charts centered at a direction tuple.

    ``bases[i]`` is a g-orthonormal basis of the orthogonal complement of
    center direction ``i`` inside the tangent space at the base point, so the
    chart has ``n * (d - 1)`` coordinates.  The chart covers offsets of
    angle below pi; stay within pi/2 for well-conditioned round trips.
    """

    center: DirectionTuple
    bases: np.ndarray  # (n, d-1, m)

    @property
    def coord_shape(self) -> tuple[int, int]:
        return self.center.n, self.center.space.dim - 1

    @property
    def coord_dim(self) -> int:
        n, dm1 = self.coord_shape
        return n * dm1


def _base_frame_array(space: ModelSpace, point: ManifoldPoint) -> np.ndarray:
    if space.kind == HYPERBOLIC:
        return _hyperbolic_frame_array(space, point.coords)
    return np.eye(space.dim)


def _complement_bases(space: ModelSpace, frame: np.ndarray, dirs: np.ndarray) -> np.ndarray:
    """Orthonormal bases of the complements of each direction, batched.

    ``dirs`` is (..., n, m); returns (..., n, d-1, m).  For d = 2 the single
    complement vector is the 90-degree rotation of the direction within the
    oriented frame, which keeps the chart orientation consistent across
    factors.  For d >= 3 a pivoted Gram-Schmidt over the frame is used.
    """
    d = frame.shape[0]
    coords = _coords_in_frame(space, frame, dirs)  # (..., n, d)
    if d == 2:
        basis = (-coords[..., 1:2]) * frame[0] + coords[..., 0:1] * frame[1]
        return basis[..., None, :]
    # candidates: frame vectors with their component along the direction removed
    cand = np.broadcast_to(frame, dirs.shape[:-1] + frame.shape).copy()  # (..., n, d, m)
    proj = _inner_raw(space, cand, dirs[..., None, :])
    cand = cand - proj[..., None] * dirs[..., None, :]
    out = np.empty(dirs.shape[:-1] + (d - 1, dirs.shape[-1]))
    index_row = np.arange(d)
    for step in range(d - 1):
        norms = _inner_raw(space, cand, cand)  # (..., n, d)
        pick = np.argmax(norms, axis=-1)
        chosen = np.take_along_axis(cand, pick[..., None, None], axis=-2)[..., 0, :]
        nrm = np.sqrt(_inner_raw(space, chosen, chosen))
        chosen = chosen / nrm[..., None]
        comp = _inner_raw(space, cand, chosen[..., None, :])
        cand = cand - comp[..., None] * chosen[..., None, :]
        used = index_row == pick[..., None]
        cand = np.where(used[..., None], 0.0, cand)
        out[..., step, :] = chosen
    return out


def _coords_in_frame(space: ModelSpace, frame: np.ndarray, vectors: np.ndarray) -> np.ndarray:
    """Components of tangent vectors (..., m) in a frame (d, m)."""
    if space.kind == HYPERBOLIC:
        eta = np.ones(frame.shape[1])
        eta[0] = -1.0
        return np.einsum("...m,dm->...d", vectors * eta, frame)
    return np.einsum("...m,dm->...d", vectors, frame)


def build_chart(v: DirectionTuple) -> SphereChart:
    """Chart of the product of unit spheres centered at ``v``."""
    frame = _base_frame_array(v.space, v.base)
    bases = _complement_bases(v.space, frame, v.dirs)
    return SphereChart(v, bases)


def _chart_eval_array(chart: SphereChart, ys: np.ndarray) -> np.ndarray:
    """Batched chart evaluation: ys (..., n, d-1) -> directions (..., n, m)."""
    center = chart.center.dirs
    theta = np.linalg.norm(ys, axis=-1)  # (..., n)
    if np.any(theta >= math.pi):
        raise ChartDomainError("chart offset angle must stay below pi")
    w = np.einsum("...nl,nlm->...nm", ys, chart.bases)
    small = theta < 1e-300
    scale = np.where(small, 1.0, np.sin(theta) / np.where(small, 1.0, theta))
    return np.cos(theta)[..., None] * center + scale[..., None] * w


def chart_eval(chart: SphereChart, y) -> DirectionTuple:
    """Direction tuple at chart coordinates ``y`` (shape (n, d-1) or flat)."""
    n, dm1 = chart.coord_shape
    ys = np.asarray(y, dtype=float).reshape(n, dm1)
    dirs = _chart_eval_array(chart, ys)
    c = chart.center
    return DirectionTuple(c.space, c.base, c.r, dirs)


def chart_coords(chart: SphereChart, v: DirectionTuple) -> np.ndarray:
    """Inverse of :func:`chart_eval` on its injectivity domain.

    Returns (n, d-1).  Round-trips with :func:`chart_eval` to 1e-10 for
    offsets within pi/2.
    """
    c = chart.center
    if v.n != c.n:
        raise ValueError("tuple length does not match the chart")
    space = c.space
    out = np.empty(chart.coord_shape)
    for i in range(c.n):
        ci = float(_inner_raw(space, v.dirs[i], c.dirs[i]))
        w = v.dirs[i] - ci * c.dirs[i]
        s = math.sqrt(max(float(_inner_raw(space, w, w)), 0.0))
        theta = math.atan2(s, ci)
        if s < 1e-300:
            if ci < 0.0:
                raise ChartDomainError(
                    "direction tuple is antipodal to the chart center in "
                    f"factor {i}; no chart coordinates exist"
                )
            out[i] = 0.0
        else:
            out[i] = (theta / s) * _inner_raw(space, chart.bases[i], w[None, :])
    return out


# ---------------------------------------------------------------------------
# batched frames, normal coordinates, finite-difference Jacobians

def _batched_frames(space: ModelSpace, bases: np.ndarray) -> np.ndarray:
    """g-orthonormal tangent frames at a batch of points: (B, m) -> (B, d, m).

    Pivoted Gram-Schmidt over the projected ambient axes.  Any orthonormal
    frame is equivalent for the rank decisions downstream, so the pivot
    order does not need to match :func:`geowalk.spaces.orthonormal_frame`.
    """
    B, m = bases.shape
    d = space.dim
    if space.kind != HYPERBOLIC:
        return np.broadcast_to(np.eye(d), (B, d, d)).copy()
    cand = np.broadcast_to(np.eye(m), (B, m, m)).copy()
    cand = _project_tangent(space, bases[:, None, :], cand)
    out = np.empty((B, d, m))
    index_row = np.arange(m)
    for step in range(d):
        norms = minkowski_inner(cand, cand)
        pick = np.argmax(norms, axis=-1)
        chosen = np.take_along_axis(cand, pick[:, None, None], axis=1)[:, 0, :]
        chosen = chosen / np.sqrt(minkowski_inner(chosen, chosen))[:, None]
        comp = minkowski_inner(cand, chosen[:, None, :])
        cand = cand - comp[..., None] * chosen[:, None, :]
        used = index_row[None, :] == pick[:, None]
        cand = np.where(used[..., None], 0.0, cand)
        out[:, step, :] = chosen
    return out


def _log_array(space: ModelSpace, bases: np.ndarray, points: np.ndarray) -> np.ndarray:
    """Batched log map: tangent components at ``bases`` pointing to ``points``."""
    if space.kind == EUCLIDEAN:
        return points - bases
    if space.kind == FLAT_TORUS:
        return _torus_displacement(space, bases, points)
    a = space.curvature_scale
    u = points + (a * a) * minkowski_inner(bases, points)[..., None] * bases
    s = np.sqrt(np.maximum(minkowski_inner(u, u), 0.0))
    dist = np.arcsinh(a * s) / a
    safe = np.where(s < 1e-300, 1.0, s)
    return u * np.where(s < 1e-300, 0.0, dist / safe)[..., None]


def _normal_coords(space: ModelSpace, bases: np.ndarray, frames: np.ndarray,
                   points: np.ndarray) -> np.ndarray:
    """Frame components of the log map, batched.

    ``bases`` (B, m), ``frames`` (B, d, m), ``points`` (B, ..., m); returns
    (B, ..., d).
    """
    logs = _log_array(space, bases[(slice(None),) + (None,) * (points.ndim - 2)], points)
    if space.kind == HYPERBOLIC:
        eta = np.ones(bases.shape[-1])
        eta[0] = -1.0
        logs = logs * eta
    return np.einsum("b...m,bdm->b...d", logs, frames)


def _phi_batch(space: ModelSpace, x_coords: np.ndarray, r: float,
               tuples: np.ndarray) -> np.ndarray:
    """Flatten leading axes, evaluate endpoints, restore the shape."""
    lead = tuples.shape[:-2]
    flat = tuples.reshape((-1,) + tuples.shape[-2:])
    out = _core.phi_endpoints(space, x_coords, flat, r)
    return out.reshape(lead + (tuples.shape[-1],))


def _jacobian_columns(space: ModelSpace, x_coords: np.ndarray, r: float,
                      tuples: np.ndarray, bases_cols: np.ndarray, h: float,
                      frames: np.ndarray | None = None) -> np.ndarray:
    """FD Jacobians for a batch of direction tuples.

    ``tuples`` (B, n, m), ``bases_cols`` (B, n, d-1, m) chart bases.  Central
    differences with step ``h`` plus one Richardson refinement.  Returns
    (B, d, n*(d-1)) expressed in per-tuple orthonormal frames at the
    endpoints (``frames`` overrides the default pivoted construction).
    """
    B, n, m = tuples.shape
    dm1 = bases_cols.shape[2]
    M = n * dm1
    steps = np.array([h, -h, h / 2.0, -h / 2.0])
    cos_s = np.cos(np.abs(steps))
    sin_s = np.sign(steps) * np.sin(np.abs(steps))
    probes = np.broadcast_to(tuples[:, None, None, None, :, :],
                             (B, n, dm1, 4, n, m)).copy()
    for i in range(n):
        for l in range(dm1):
            rot = (cos_s[None, :, None] * tuples[:, None, i, :]
                   + sin_s[None, :, None] * bases_cols[:, None, i, l, :])
            probes[:, i, l, :, i, :] = rot
    ends = _phi_batch(space, x_coords, r, probes)  # (B, n, dm1, 4, m)
    centers = _core.phi_endpoints(space, x_coords, tuples, r)  # (B, m)
    if frames is None:
        frames = _batched_frames(space, centers)
    z = _normal_coords(space, centers, frames, ends)  # (B, n, dm1, 4, d)
    d1 = (z[..., 0, :] - z[..., 1, :]) / (2.0 * h)
    d2 = (z[..., 2, :] - z[..., 3, :]) / h
    cols = (4.0 * d2 - d1) / 3.0  # (B, n, dm1, d)
    return cols.reshape(B, M, -1).transpose(0, 2, 1)


def phi_jacobian(v: DirectionTuple, chart: SphereChart | None = None,
                 tol: Tolerances = DEFAULT_TOLERANCES) -> np.ndarray:
    """Differential of the endpoint map at ``v``.

    Rows are components in the deterministic orthonormal frame at the
    endpoint; columns follow the chart coordinates (factor-major).  Central
    differences with ``tol.jacobian_step`` and one Richardson refinement
    give entry errors of order ``h^4`` before roundoff.
    """
    if chart is None:
        chart = build_chart(v)
    else:
        c = chart.center
        if c.n != v.n or not np.allclose(c.dirs, v.dirs, rtol=0.0, atol=tol.base_match):
            raise ValueError("chart must be centered at the evaluation tuple")
        if not np.allclose(c.base.coords, v.base.coords, rtol=0.0, atol=tol.base_match):
            raise ValueError("chart base point does not match the tuple")
    endpoint = phi_endpoint(v)
    frame = np.array([f.components for f in orthonormal_frame(v.space, endpoint)])
    return _jacobian_columns(
        v.space, v.base.coords, v.r, v.dirs[None, :, :], chart.bases[None, :, :, :],
        tol.jacobian_step, frames=frame[None, :, :],
    )[0]
