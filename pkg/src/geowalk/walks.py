"""Fixed-step geodesic random walks and their ensemble statistics.

A walk advances a constant arclength ``r`` along a uniformly random geodesic
direction at each step.  Ensembles are reproducible by construction: every
sample owns a counter-derived seed (see :mod:`geowalk.rng`), so results are
bit-identical for any worker count.
"""

from __future__ import annotations

import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from . import _core
from . import rng as _rng
from ._core._pykernels import _base_transvection
from .errors import UnsupportedGeometryError
from .paths import DirectionTuple
from .spaces import (
    EUCLIDEAN,
    FLAT_TORUS,
    HYPERBOLIC,
    ManifoldPoint,
    ModelSpace,
    TangentVector,
    _torus_displacement,
    exp_map,
    minkowski_inner,
    parallel_transport,
    sample_unit_direction,
)
from .tolerances import DEFAULT_TOLERANCES, Tolerances

_CHUNK = 8192


def default_workers() -> int:
    """Worker count: the GEOWALK_WORKERS variable if set, else up to 8 cores."""
    env = os.environ.get("GEOWALK_WORKERS")
    if env:
        return max(1, int(env))
    return min(8, os.cpu_count() or 1)


@dataclass(frozen=True)
class WalkConfig:
    """Parameters of a walk ensemble.

    ``master_seed`` and the sample index alone determine every walk; the
    worker count only controls scheduling.
    """

    space: ModelSpace
    start: ManifoldPoint
    r: float
    steps: int
    samples: int
    master_seed: int = 0
    workers: int | None = None

    def __post_init__(self):
        if self.start.space != self.space:
            raise ValueError("start point does not belong to the configured space")
        if not self.r > 0:
            raise ValueError("step length r must be positive")
        if self.steps < 0:
            raise ValueError("steps must be non-negative")
        if self.samples < 1:
            raise ValueError("samples must be at least 1")

    def effective_workers(self) -> int:
        return self.workers if self.workers else default_workers()

    def describe(self) -> dict:
        out = self.space.describe()
        out.update(
            start=[float(c) for c in self.start.coords],
            r=self.r,
            steps=self.steps,
            samples=self.samples,
            master_seed=self.master_seed,
        )
        return out


@dataclass(eq=False)
class WalkRecord:
    """One walk with its full direction record.

    ``points`` has shape (steps+1, m); ``step_dirs[k]`` is the unit direction
    actually taken at ``points[k]``.
    """

    space: ModelSpace
    r: float
    points: np.ndarray
    step_dirs: np.ndarray
    sample_index: int
    seed: int

    def point(self, k: int) -> ManifoldPoint:
        return ManifoldPoint(self.space, self.points[k].copy())

    def endpoint(self) -> ManifoldPoint:
        return self.point(self.points.shape[0] - 1)


@dataclass(eq=False)
class Ensemble:
    """Endpoints and per-step start distances of ``config.samples`` walks."""

    config: WalkConfig
    seeds: np.ndarray       # (N,) uint64
    endpoints: np.ndarray   # (N, m)
    distances: np.ndarray   # (N, steps+1), distance from the start point

    @property
    def samples(self) -> int:
        return self.endpoints.shape[0]


@dataclass(eq=False)
class EscapeRateReport:
    """OLS fit of mean start distance against the step index."""

    slope: float
    stderr: float
    ci_low: float
    ci_high: float
    fit_range: tuple[int, int]
    mean_distances: np.ndarray


@dataclass(eq=False)
class DiffusiveFitReport:
    """Linearity of squared mean distance in the step index."""

    slope: float
    intercept: float
    r_squared: float
    mean_distances: np.ndarray


# ---------------------------------------------------------------------------
# single walks

def walk_step(space: ModelSpace, x: ManifoldPoint, r: float,
              rng: np.random.Generator,
              tol: Tolerances = DEFAULT_TOLERANCES) -> ManifoldPoint:
    """One step: a uniform unit direction at ``x``, followed for arclength ``r``."""
    if not r > 0:
        raise ValueError("step length r must be positive")
    return exp_map(space, x, sample_unit_direction(space, x, rng), r, tol)


def run_walk(config: WalkConfig, sample_index: int = 0,
             tol: Tolerances = DEFAULT_TOLERANCES) -> WalkRecord:
    """The walk of one ensemble sample, with its directions recorded.

    Consumes exactly the counter-derived draws that :func:`run_ensemble`
    assigns to ``sample_index`` and advances them through the same kernel,
    so the recorded points match the ensemble entry bit for bit.

    Each recorded direction is the unit tangent actually stepped along: for
    the flat spaces the normalized ambient draw, for the hyperboloid the
    spatial part of the draw carried to the current point by the walk's
    accumulated isometry (see :func:`geowalk._core.walk_points`).
    """
    if sample_index < 0:
        raise ValueError("sample_index must be non-negative")
    space, m = config.space, config.space.ambient_dim
    seed = int(_rng.sample_seeds(config.master_seed, 1, start=sample_index)[0])
    draws = _rng.normals(np.array([seed], dtype=np.uint64),
                         config.steps * m).reshape(config.steps, m)
    points = _core.walk_points(space, config.start.coords,
                               draws[None, :, :], config.r)[0]
    dirs = np.empty((config.steps, m))
    if space.kind == HYPERBOLIC:
        a = space.curvature_scale
        ch, sh = math.cosh(a * config.r), math.sinh(a * config.r)
        e0 = np.zeros(m)
        e0[0] = 1.0
        Bm = _base_transvection(a, config.start.coords, m)
        for k in range(config.steps):
            gsp = draws[k].copy()
            gsp[0] = 0.0
            n2 = float(gsp @ gsp)
            if n2 < 1e-24:
                raise RuntimeError("degenerate ambient draw; direction undefined")
            vhat = gsp / math.sqrt(n2)
            c0 = Bm[:, 0].copy()
            bv = Bm @ vhat
            dirs[k] = bv
            t0 = (ch - 1.0) * e0 + sh * vhat
            t1 = (ch - 1.0) * vhat + sh * e0
            Bm = Bm + np.outer(c0, t0) + np.outer(bv, t1)
    else:
        for k in range(config.steps):
            n2 = float(draws[k] @ draws[k])
            if n2 < 1e-24:
                raise RuntimeError("degenerate ambient draw; direction undefined")
            dirs[k] = draws[k] / math.sqrt(n2)
    return WalkRecord(space, config.r, points, dirs, sample_index, seed)


def walk_to_tuple(record: WalkRecord,
                  tol: Tolerances = DEFAULT_TOLERANCES) -> DirectionTuple:
    """Back-transport the recorded step directions to the start point.

    The result is the direction tuple whose broken-geodesic endpoint map
    reproduces the walk's endpoint: the walk *is* an evaluation of that map
    at a random tuple.
    """
    space = record.space
    n = record.step_dirs.shape[0]
    if n == 0:
        raise ValueError("walk has no steps to convert")
    x = ManifoldPoint(space, record.points[0].copy())
    dirs = np.empty_like(record.step_dirs)
    for k in range(n):
        z = ManifoldPoint(space, record.points[k].copy())
        u = TangentVector(z, record.step_dirs[k].copy())
        for j in range(k - 1, -1, -1):
            zj = ManifoldPoint(space, record.points[j].copy())
            seg = TangentVector(zj, record.step_dirs[j].copy())
            arrive = parallel_transport(space, zj, seg, record.r, seg, tol)
            rev = TangentVector(arrive.base, -arrive.components)
            u = parallel_transport(space, arrive.base, rev, record.r,
                                   TangentVector(arrive.base, u.components.copy()), tol)
        dirs[k] = u.components
    return DirectionTuple(space, x, record.r, dirs)


# ---------------------------------------------------------------------------
# ensembles

def _distances_from(space: ModelSpace, x_coords: np.ndarray,
                    points: np.ndarray) -> np.ndarray:
    """Start distance for an array of points with arbitrary leading shape."""
    if space.kind == EUCLIDEAN:
        return np.linalg.norm(points - x_coords, axis=-1)
    if space.kind == FLAT_TORUS:
        return np.linalg.norm(_torus_displacement(space, x_coords, points), axis=-1)
    a = space.curvature_scale
    u = points + (a * a) * minkowski_inner(x_coords, points)[..., None] * x_coords
    s = np.sqrt(np.maximum(minkowski_inner(u, u), 0.0))
    return np.arcsinh(a * s) / a


def _ensemble_chunk(config: WalkConfig, seeds: np.ndarray):
    space, m = config.space, config.space.ambient_dim
    draws = _rng.normals(seeds, config.steps * m).reshape(-1, config.steps, m)
    pts = _core.walk_points(space, config.start.coords, draws, config.r)
    return pts[:, -1, :].copy(), _distances_from(space, config.start.coords, pts)


def run_ensemble(config: WalkConfig) -> Ensemble:
    """Run ``config.samples`` independent walks.

    Work is split into fixed-size chunks regardless of the worker count, and
    each chunk derives its randomness from per-sample counters, so the output
    arrays are bit-identical however the chunks are scheduled.
    """
    space, m = config.space, config.space.ambient_dim
    N = config.samples
    seeds = _rng.sample_seeds(config.master_seed, N)
    endpoints = np.empty((N, m))
    distances = np.empty((N, config.steps + 1))
    spans = [(lo, min(lo + _CHUNK, N)) for lo in range(0, N, _CHUNK)]
    workers = config.effective_workers()
    if workers <= 1 or len(spans) == 1:
        for lo, hi in spans:
            endpoints[lo:hi], distances[lo:hi] = _ensemble_chunk(config, seeds[lo:hi])
    else:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            futures = {pool.submit(_ensemble_chunk, config, seeds[lo:hi]): (lo, hi)
                       for lo, hi in spans}
            for fut, (lo, hi) in futures.items():
                endpoints[lo:hi], distances[lo:hi] = fut.result()
    return Ensemble(config, seeds, endpoints, distances)


# ---------------------------------------------------------------------------
# statistics

def empirical_cf(ensemble: Ensemble, ts, direction):
    """Empirical characteristic function of the projected displacement.

    Returns ``(values, stderr)``: for each frequency ``t`` the mean of
    ``exp(i t <u, X - x>)`` over the ensemble, with a standard-error estimate
    combining both components.  Displacements require a linear structure, so
    hyperbolic ensembles are rejected.
    """
    space = ensemble.config.space
    if space.kind == HYPERBOLIC:
        raise UnsupportedGeometryError(
            "characteristic functions need a linear structure; "
            "hyperbolic ensembles have none"
        )
    ts = np.atleast_1d(np.asarray(ts, dtype=float))
    u = np.asarray(direction, dtype=float)
    if u.shape != (space.ambient_dim,):
        raise ValueError("direction must be an ambient vector")
    x = ensemble.config.start.coords
    if space.kind == EUCLIDEAN:
        disp = ensemble.endpoints - x
    else:
        disp = _torus_displacement(space, x, ensemble.endpoints)
    proj = disp @ u
    N = proj.shape[0]
    phases = np.exp(1j * np.outer(ts, proj))
    values = phases.mean(axis=1)
    var_re = phases.real.var(axis=1, ddof=1)
    var_im = phases.imag.var(axis=1, ddof=1)
    stderr = np.sqrt((var_re + var_im) / N)
    return values, stderr


def escape_rate(ensemble: Ensemble) -> EscapeRateReport:
    """Slope of mean start distance against the step index, with a 95% CI.

    Ordinary least squares over the second half of the step range.
    """
    n_max = ensemble.config.steps
    if n_max < 10:
        raise ValueError("escape-rate fits need at least 10 steps")
    means = ensemble.distances.mean(axis=0)
    lo = n_max // 2
    ns = np.arange(lo, n_max + 1, dtype=float)
    ys = means[lo:]
    slope, intercept = np.polyfit(ns, ys, 1)
    resid = ys - (slope * ns + intercept)
    dof = len(ns) - 2
    sigma2 = float(resid @ resid) / dof
    sxx = float(((ns - ns.mean()) ** 2).sum())
    se = math.sqrt(sigma2 / sxx)
    return EscapeRateReport(
        slope=float(slope),
        stderr=se,
        ci_low=float(slope - 1.96 * se),
        ci_high=float(slope + 1.96 * se),
        fit_range=(lo, n_max),
        mean_distances=means,
    )


def diffusive_fit(ensemble: Ensemble) -> DiffusiveFitReport:
    """Fit of squared mean distance against the step index.

    For flat-space walks the mean distance grows like ``c sqrt(n)``, so its
    square is linear in ``n``; the report carries the R^2 of that regression.
    """
    n_max = ensemble.config.steps
    if n_max < 2:
        raise ValueError("diffusive fits need at least 2 steps")
    means = ensemble.distances.mean(axis=0)
    ns = np.arange(1, n_max + 1, dtype=float)
    ys = means[1:] ** 2
    slope, intercept = np.polyfit(ns, ys, 1)
    fit = slope * ns + intercept
    ss_res = float(((ys - fit) ** 2).sum())
    ss_tot = float(((ys - ys.mean()) ** 2).sum())
    r2 = 1.0 - ss_res / ss_tot if ss_tot > 0 else 1.0
    return DiffusiveFitReport(
        slope=float(slope),
        intercept=float(intercept),
        r_squared=r2,
        mean_distances=means,
    )


def radial_histogram(ensemble: Ensemble, bins: int):
    """Histogram (counts, edges) of final start distances over [0, steps*r]."""
    if bins < 1:
        raise ValueError("need at least one bin")
    top = ensemble.config.steps * ensemble.config.r
    counts, edges = np.histogram(ensemble.distances[:, -1], bins=bins,
                                 range=(0.0, max(top, ensemble.config.r)))
    return counts, edges
