"""Critical-point analysis of the piecewise-geodesic endpoint map.

The endpoint map is singular exactly on tuples of the form
``(s_1 v, ..., s_n v)`` with signs ``s_i``, where its differential drops rank
by one.  This module measures that numerically: corank scans over random and
sign-pattern tuples, fold certificates built from the Hessian of the last
normal coordinate, the distance-to-anchor comparison curves that drive the
second-derivative argument, and the supporting identities (first variation,
triangle comparison bound, corner-angle linearity).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from itertools import product as _iter_product

import numpy as np

from . import _core
from .errors import DegenerateAimError, NotCriticalError
from .paths import (
    DirectionTuple,
    SphereChart,
    _base_frame_array,
    _batched_frames,
    _chart_eval_array,
    _complement_bases,
    _jacobian_columns,
    _normal_coords,
    broken_geodesic,
    build_chart,
    chart_eval,
    phi_endpoint,
    phi_jacobian,
)
from .spaces import (
    HYPERBOLIC,
    ManifoldPoint,
    ModelSpace,
    TangentVector,
    _inner_raw,
    _project_tangent,
    distance,
    exp_map,
    log_map,
    metric_inner,
    parallel_transport,
)
from .tolerances import DEFAULT_TOLERANCES, Tolerances


# ---------------------------------------------------------------------------
# reports

@dataclass(eq=False)
class SingularityReport:
    """Rank analysis of the endpoint map at one direction tuple."""

    singular_values: np.ndarray      # length d, descending
    corank: int
    kernel_basis: np.ndarray         # (coord_dim - rank, coord_dim) chart rows
    is_singular: bool
    rank_threshold: float            # relative tau_rank in force

    def as_dict(self) -> dict:
        return {
            "singular_values": self.singular_values.tolist(),
            "corank": self.corank,
            "is_singular": self.is_singular,
            "rank_threshold": self.rank_threshold,
        }


@dataclass(eq=False)
class ScanSummary:
    """Counts and worst margins from a singular-set scan."""

    n: int
    r: float
    random_samples: int
    random_singular_count: int
    random_min_margin: float         # min over tuples of s_min / s_max
    worst_sign_distance: float | None  # for singular random tuples, if any
    sign_patterns: int
    sign_v0_samples: int
    sign_all_corank_one: bool
    sign_worst_small: float          # max s_d / s_max over sign tuples (want ~ 0)
    sign_worst_rank_margin: float    # min s_{d-1} / s_max over sign tuples
    rank_threshold: float

    @property
    def passed(self) -> bool:
        return self.random_singular_count == 0 and self.sign_all_corank_one

    def as_dict(self) -> dict:
        return {
            "n": self.n,
            "r": self.r,
            "random_samples": self.random_samples,
            "random_singular_count": self.random_singular_count,
            "random_min_margin": self.random_min_margin,
            "worst_sign_distance": self.worst_sign_distance,
            "sign_patterns": self.sign_patterns,
            "sign_v0_samples": self.sign_v0_samples,
            "sign_all_corank_one": self.sign_all_corank_one,
            "sign_worst_small": self.sign_worst_small,
            "sign_worst_rank_margin": self.sign_worst_rank_margin,
            "rank_threshold": self.rank_threshold,
            "passed": self.passed,
        }


@dataclass(eq=False)
class FoldCertificate:
    """Numerical fold test at the sign-pattern critical point with sign
    pattern ``sign_pattern`` and base direction ``base_direction``.

    ``signature`` counts (positive, negative) eigenvalues of the Hessian of
    the last normal coordinate; ``kernel_signature`` is the same count after
    restricting to the kernel of the differential.  ``is_fold`` holds when
    the critical point is transversal, has corank one, and the kernel is
    transverse to the singular stratum.
    """

    sign_pattern: tuple[int, ...]
    base_direction: np.ndarray
    r: float
    corank: int
    singular_values: np.ndarray
    gradient_norm: float
    hessian_eigenvalues: np.ndarray
    signature: tuple[int, int]
    predicted_signature: tuple[int, int]
    kernel_signature: tuple[int, int]
    transversal: bool
    kernel_meets_stratum: bool
    is_fold: bool
    rank_threshold: float
    nondegeneracy_threshold: float

    def as_dict(self) -> dict:
        return {
            "sign_pattern": list(self.sign_pattern),
            "base_direction": self.base_direction.tolist(),
            "r": self.r,
            "corank": self.corank,
            "singular_values": self.singular_values.tolist(),
            "gradient_norm": self.gradient_norm,
            "hessian_eigenvalues": self.hessian_eigenvalues.tolist(),
            "signature": list(self.signature),
            "predicted_signature": list(self.predicted_signature),
            "kernel_signature": list(self.kernel_signature),
            "transversal": self.transversal,
            "kernel_meets_stratum": self.kernel_meets_stratum,
            "is_fold": self.is_fold,
            "rank_threshold": self.rank_threshold,
            "nondegeneracy_threshold": self.nondegeneracy_threshold,
        }


@dataclass(eq=False)
class ImmersionReport:
    """Rank of the endpoint map restricted to one singular stratum."""

    min_singular_value: float
    max_singular_value: float
    is_immersion: bool


@dataclass(eq=False)
class AngleLinearityReport:
    """Affine fit of the corner angle along a comparison curve."""

    slope: float
    intercept: float
    max_residual: float
    grid: np.ndarray
    angles: np.ndarray


# ---------------------------------------------------------------------------
# rank analysis

def _singular_values_batch(space: ModelSpace, x: ManifoldPoint, r: float,
                           tuples: np.ndarray, tol: Tolerances,
                           chunk: int = 2048) -> np.ndarray:
    """Singular values of the FD differential for a batch of tuples."""
    frame0 = _base_frame_array(space, x)
    out = []
    for lo in range(0, tuples.shape[0], chunk):
        block = tuples[lo:lo + chunk]
        bases = _complement_bases(space, frame0, block)
        J = _jacobian_columns(space, x.coords, r, block, bases, tol.jacobian_step)
        out.append(np.linalg.svd(J, compute_uv=False))
    return np.concatenate(out, axis=0)


def corank_at(v: DirectionTuple, tol: Tolerances = DEFAULT_TOLERANCES) -> SingularityReport:
    """Corank of the endpoint map's differential at ``v``.

    Rank is decided on the singular values of the FD Jacobian relative to
    the largest one, with threshold ``tol.rank_rel``.
    """
    J = phi_jacobian(v, None, tol)
    _, s, Vt = np.linalg.svd(J, full_matrices=True)
    smax = float(s[0]) if s.size else 0.0
    if smax <= 0.0:
        rank = 0
    else:
        rank = int(np.sum(s > tol.rank_rel * smax))
    corank = v.space.dim - rank
    return SingularityReport(
        singular_values=s,
        corank=corank,
        kernel_basis=Vt[rank:],
        is_singular=corank >= 1,
        rank_threshold=tol.rank_rel,
    )


def _sample_unit_batch(space: ModelSpace, x: ManifoldPoint, shape: tuple,
                       rng: np.random.Generator) -> np.ndarray:
    """Uniform unit tangents at ``x``; output shape ``shape + (ambient,)``."""
    g = rng.standard_normal(shape + (space.ambient_dim,))
    comps = _project_tangent(space, x.coords, g)
    n2 = _inner_raw(space, comps, comps)
    return comps / np.sqrt(n2)[..., None]


def singular_set_scan(space: ModelSpace, x: ManifoldPoint, r: float, n: int,
                      samples: int, rng: np.random.Generator,
                      sign_v0_samples: int = 100,
                      tol: Tolerances = DEFAULT_TOLERANCES) -> ScanSummary:
    """Scan for singular tuples: random tuples should show none, sign-pattern
    tuples should all have corank exactly one.

    ``samples`` uniform random tuples are tested; every singular one found is
    checked for proximity to the sign set (worst distance reported).  Then
    all ``2^n`` sign patterns over ``sign_v0_samples`` random base directions
    are tested for corank exactly one.
    """
    if n < 2:
        raise ValueError("singularity scans need n >= 2")
    d = space.dim
    # random tuples
    dirs = _sample_unit_batch(space, x, (samples, n), rng)
    svals = _singular_values_batch(space, x, r, dirs, tol)
    smax = svals[:, 0]
    margin = svals[:, -1] / smax
    singular_mask = margin < tol.rank_rel
    singular_count = int(np.sum(singular_mask))
    worst_sign_distance = None
    if singular_count:
        bad = dirs[singular_mask]
        diff_minus = bad - bad[:, :1, :]
        diff_plus = bad + bad[:, :1, :]
        nm = np.sqrt(np.abs(_inner_raw(space, diff_minus, diff_minus)))
        np_ = np.sqrt(np.abs(_inner_raw(space, diff_plus, diff_plus)))
        per_factor = np.minimum(nm, np_)
        worst_sign_distance = float(per_factor.max(axis=1).max())
    # sign patterns
    v0 = _sample_unit_batch(space, x, (sign_v0_samples,), rng)
    worst_small = 0.0
    worst_rank_margin = np.inf
    all_corank_one = True
    for pattern in _iter_product((1.0, -1.0), repeat=n):
        sig = np.array(pattern)
        tuples = sig[None, :, None] * v0[:, None, :]
        sv = _singular_values_batch(space, x, r, tuples, tol)
        rel = sv / sv[:, :1]
        worst_small = max(worst_small, float(rel[:, -1].max()))
        worst_rank_margin = min(worst_rank_margin, float(rel[:, -2].min()))
        corank_one = (rel[:, -1] < tol.rank_rel) & (rel[:, -2] >= tol.rank_rel)
        if not np.all(corank_one):
            all_corank_one = False
    return ScanSummary(
        n=n,
        r=r,
        random_samples=samples,
        random_singular_count=singular_count,
        random_min_margin=float(margin.min()),
        worst_sign_distance=worst_sign_distance,
        sign_patterns=2**n,
        sign_v0_samples=sign_v0_samples,
        sign_all_corank_one=all_corank_one,
        sign_worst_small=worst_small,
        sign_worst_rank_margin=worst_rank_margin,
        rank_threshold=tol.rank_rel,
    )


def immersion_check(space: ModelSpace, x: ManifoldPoint, r: float, sigma,
                    v0_samples: np.ndarray,
                    tol: Tolerances = DEFAULT_TOLERANCES) -> ImmersionReport:
    """Rank of the endpoint map restricted to the sign-pattern stratum.

    The stratum through ``v0`` consists of tuples ``(s_1 u, ..., s_n u)``;
    the restriction moves all factors together.  For patterns with nonzero
    sign sum the restriction is an immersion; for balanced patterns it is
    constant and all singular values vanish.
    """
    sigma = _check_sigma(sigma)
    n = len(sigma)
    v0s = np.atleast_2d(np.asarray(v0_samples, dtype=float))
    K = v0s.shape[0]
    d, m = space.dim, space.ambient_dim
    frame0 = _base_frame_array(space, x)
    bases = _complement_bases(space, frame0, v0s)  # (K, d-1, m)
    h = tol.jacobian_step
    steps = np.array([h, -h, h / 2.0, -h / 2.0])
    cos_s = np.cos(np.abs(steps))
    sin_s = np.sign(steps) * np.sin(np.abs(steps))
    # rotated base directions: (K, d-1, 4, m)
    u = (cos_s[None, None, :, None] * v0s[:, None, None, :]
         + sin_s[None, None, :, None] * bases[:, :, None, :])
    sig = np.asarray(sigma, dtype=float)
    probes = sig[None, None, None, :, None] * u[:, :, :, None, :]  # (K, d-1, 4, n, m)
    flat = probes.reshape(-1, n, m)
    ends = _core.phi_endpoints(space, x.coords, flat, r).reshape(K, d - 1, 4, m)
    centers = _core.phi_endpoints(space, x.coords, sig[None, :, None] * v0s[:, None, :], r)
    frames = _batched_frames(space, centers)
    z = _normal_coords(space, centers, frames, ends)  # (K, d-1, 4, d)
    d1 = (z[:, :, 0, :] - z[:, :, 1, :]) / (2.0 * h)
    d2 = (z[:, :, 2, :] - z[:, :, 3, :]) / h
    cols = (4.0 * d2 - d1) / 3.0            # (K, d-1, d)
    J = cols.transpose(0, 2, 1)             # (K, d, d-1)
    sv = np.linalg.svd(J, compute_uv=False)
    min_sv = float(sv[:, -1].min())
    max_sv = float(sv[:, 0].max())
    scale = max(max_sv, r)
    return ImmersionReport(
        min_singular_value=min_sv,
        max_singular_value=max_sv,
        is_immersion=min_sv > tol.rank_rel * scale,
    )


# ---------------------------------------------------------------------------
# fold certificates

def _check_sigma(sigma) -> tuple[int, ...]:
    out = tuple(int(s) for s in sigma)
    if not out or any(s not in (-1, 1) for s in out):
        raise ValueError("sign pattern must be a tuple of +1 / -1 entries")
    return out


def signature_prediction(sigma, d: int) -> tuple[int, int]:
    """Predicted Hessian signature (positive, negative) of the last normal
    coordinate at the sign-pattern critical point: each factor contributes
    ``d - 1`` eigenvalues whose sign is opposite to its sign entry."""
    sigma = _check_sigma(sigma)
    if d < 2:
        raise ValueError("need d >= 2")
    pos = (d - 1) * sum(1 for s in sigma if s == -1)
    neg = (d - 1) * sum(1 for s in sigma if s == 1)
    return pos, neg


def _aligned_frame(space: ModelSpace, point: ManifoldPoint, u_last: np.ndarray) -> np.ndarray:
    """Orthonormal frame at ``point`` whose last vector is ``u_last``."""
    u = _project_tangent(space, point.coords, u_last)
    u = u / math.sqrt(max(float(_inner_raw(space, u, u)), 1e-300))
    d, m = space.dim, space.ambient_dim
    if d == 1:
        return u[None, :]
    cand = _base_frame_array(space, point)  # (d, m)
    comp = _inner_raw(space, cand, u[None, :])
    cand = cand - comp[:, None] * u[None, :]
    rows = []
    for _ in range(d - 1):
        norms = _inner_raw(space, cand, cand)
        j = int(np.argmax(norms))
        w = cand[j] / math.sqrt(float(norms[j]))
        rows.append(w)
        cand = cand - _inner_raw(space, cand, w[None, :])[:, None] * w[None, :]
        cand[j] = 0.0
    return np.vstack(rows + [u])


def _psi_values(space: ModelSpace, x: ManifoldPoint, r: float, chart: SphereChart,
                base_coords: np.ndarray, frame: np.ndarray, ys: np.ndarray) -> np.ndarray:
    """Last normal coordinate of the endpoint at chart offsets ``ys`` (P, n, d-1)."""
    dirs = _chart_eval_array(chart, ys)
    ends = _core.phi_endpoints(space, x.coords, dirs, r)
    z = _normal_coords(space, base_coords[None, :], frame[None, :, :], ends[None, :, :])
    return z[0, :, -1]


def _psi_hessian(space: ModelSpace, x: ManifoldPoint, r: float, chart: SphereChart,
                 base_coords: np.ndarray, frame: np.ndarray,
                 tol: Tolerances) -> np.ndarray:
    """Hessian of the last normal coordinate at the chart center.

    Central second differences at ``tol.hessian_step`` and half of it, with
    one Richardson extrapolation step.
    """
    M = chart.coord_dim
    n, dm1 = chart.coord_shape

    def stencil(h: float) -> np.ndarray:
        ys = []
        for i in range(M):
            e = np.zeros(M)
            e[i] = h
            ys.append(e)
            ys.append(-e)
        pairs = [(i, j) for i in range(M) for j in range(i + 1, M)]
        for i, j in pairs:
            for si, sj in ((1, 1), (1, -1), (-1, 1), (-1, -1)):
                e = np.zeros(M)
                e[i] = si * h
                e[j] = sj * h
                ys.append(e)
        ys = np.array(ys).reshape(-1, n, dm1)
        vals = _psi_values(space, x, r, chart, base_coords, frame, ys)
        H = np.empty((M, M))
        diag = vals[:2 * M].reshape(M, 2)
        for i in range(M):
            H[i, i] = (diag[i, 0] + diag[i, 1]) / (h * h)
        off = vals[2 * M:].reshape(len(pairs), 4)
        for idx, (i, j) in enumerate(pairs):
            fpp, fpm, fmp, fmm = off[idx]
            H[i, j] = H[j, i] = (fpp - fpm - fmp + fmm) / (4.0 * h * h)
        return H

    h = tol.hessian_step
    H1 = stencil(h)
    H2 = stencil(h / 2.0)
    H = (4.0 * H2 - H1) / 3.0
    return 0.5 * (H + H.T)


def _stratum_tangent(chart: SphereChart, sigma: tuple[int, ...],
                     v0: np.ndarray) -> np.ndarray:
    """Tangent space of the sign-pattern stratum in chart coordinates.

    Moving the common direction ``v0`` with velocity ``w`` moves factor ``i``
    with velocity ``sigma_i w``; rows are the chart coordinates of those
    motions for a basis of the complement of ``v0``.
    """
    space = chart.center.space
    x = chart.center.base
    frame0 = _base_frame_array(space, x)
    W = _complement_bases(space, frame0, v0[None, :])[0]  # (d-1, m)
    n, dm1 = chart.coord_shape
    rows = np.empty((W.shape[0], n * dm1))
    sig = np.asarray(sigma, dtype=float)
    for a, w in enumerate(W):
        vel = sig[:, None] * w[None, :]  # (n, m)
        coords = np.einsum("nlm,nm->nl",
                           chart.bases * _metric_weight(space, chart.bases.shape[-1]),
                           vel)
        rows[a] = coords.reshape(-1)
    return rows


def _metric_weight(space: ModelSpace, m: int) -> np.ndarray:
    if space.kind == HYPERBOLIC:
        eta = np.ones(m)
        eta[0] = -1.0
        return eta
    return np.ones(m)


def _subspace_max_cosine(A: np.ndarray, B: np.ndarray) -> float:
    """Largest principal-angle cosine between the row spans of A and B."""
    qa, _ = np.linalg.qr(A.T)
    qb, _ = np.linalg.qr(B.T)
    s = np.linalg.svd(qa.T @ qb, compute_uv=False)
    return float(s[0]) if s.size else 0.0


def hessian_at_singular(space: ModelSpace, x: ManifoldPoint, r: float, sigma,
                        v0: TangentVector,
                        tol: Tolerances = DEFAULT_TOLERANCES) -> FoldCertificate:
    """Fold certificate at the critical point ``(sigma_1 v0, ..., sigma_n v0)``.

    Builds normal coordinates at the endpoint with the last axis along the
    carrying geodesic, verifies the gradient of the last coordinate vanishes
    (raising :class:`NotCriticalError` otherwise), measures the Hessian and
    its signature, and intersects the differential's kernel with the stratum
    tangent.
    """
    sigma = _check_sigma(sigma)
    n = len(sigma)
    v0c = np.asarray(v0.components, dtype=float)
    dirs = np.asarray(sigma, dtype=float)[:, None] * v0c[None, :]
    v = DirectionTuple(space, x, r, dirs)
    return _certificate_for_tuple(space, x, r, v, sigma, v0c, tol)


def _certificate_for_tuple(space: ModelSpace, x: ManifoldPoint, r: float,
                           v: DirectionTuple, sigma: tuple[int, ...],
                           v0c: np.ndarray, tol: Tolerances) -> FoldCertificate:
    d = space.dim
    n = v.n
    R = r * sum(sigma)
    base_pt = phi_endpoint(v)
    if abs(R) < 1e-300:
        u_last = v0c.copy()
    else:
        sign = 1.0 if R > 0 else -1.0
        u_last = parallel_transport(
            space, x, TangentVector(x, sign * v0c), abs(R), TangentVector(x, v0c.copy()), tol
        ).components
    frame = _aligned_frame(space, base_pt, u_last)
    chart = build_chart(v)
    J = _jacobian_columns(
        space, x.coords, r, v.dirs[None], chart.bases[None],
        tol.jacobian_step, frames=frame[None],
    )[0]
    grad = J[-1]
    grad_norm = float(np.linalg.norm(grad))
    if grad_norm > tol.critical_gradient:
        raise NotCriticalError(
            f"gradient of the last normal coordinate is {grad_norm:.3e} "
            f"(> {tol.critical_gradient}); not a critical point"
        )
    _, s, Vt = np.linalg.svd(J, full_matrices=True)
    smax = float(s[0])
    rank = int(np.sum(s > tol.rank_rel * smax)) if smax > 0 else 0
    corank = d - rank
    kernel = Vt[rank:]
    H = _psi_hessian(space, x, r, chart, base_pt.coords, frame, tol)
    eigs = np.linalg.eigvalsh(H)
    emax = float(np.abs(eigs).max())
    thr = tol.nondegenerate_rel * emax
    transversal = bool(np.abs(eigs).min() > thr)
    pos = int(np.sum(eigs > thr))
    neg = int(np.sum(eigs < -thr))
    stratum = _stratum_tangent(chart, sigma, v0c)
    max_cos = _subspace_max_cosine(kernel, stratum) if kernel.shape[0] else 0.0
    meets = bool(max_cos > 1.0 - tol.nondegenerate_rel)
    if kernel.shape[0]:
        Hk = kernel @ H @ kernel.T
        keigs = np.linalg.eigvalsh(Hk)
        kmax = float(np.abs(keigs).max()) if keigs.size else 0.0
        kthr = tol.nondegenerate_rel * max(kmax, emax)
        ksig = (int(np.sum(keigs > kthr)), int(np.sum(keigs < -kthr)))
    else:
        ksig = (0, 0)
    return FoldCertificate(
        sign_pattern=sigma,
        base_direction=v0c,
        r=r,
        corank=corank,
        singular_values=s,
        gradient_norm=grad_norm,
        hessian_eigenvalues=eigs,
        signature=(pos, neg),
        predicted_signature=signature_prediction(sigma, d),
        kernel_signature=ksig,
        transversal=transversal,
        kernel_meets_stratum=meets,
        is_fold=bool(transversal and corank == 1 and not meets),
        rank_threshold=tol.rank_rel,
        nondegeneracy_threshold=tol.nondegenerate_rel,
    )


# ---------------------------------------------------------------------------
# comparison curves toward the anchors

def anchor_point(space: ModelSpace, x: ManifoldPoint, r: float, n: int,
                 v0: TangentVector, anchor: str) -> ManifoldPoint:
    """The comparison anchor: geodesic time ``2 n r`` from ``x`` along
    ``-v0`` (anchor ``"p"``) or ``+v0`` (anchor ``"q"``)."""
    if anchor not in ("p", "q"):
        raise ValueError("anchor must be 'p' or 'q'")
    comps = -v0.components if anchor == "p" else v0.components
    return exp_map(space, x, TangentVector(x, comps.copy()), 2.0 * n * r)


def vpq_curve(space: ModelSpace, x: ManifoldPoint, r: float, sigma,
              v0: TangentVector, anchor: str, free_velocity, s: float,
              tol: Tolerances = DEFAULT_TOLERANCES) -> DirectionTuple:
    """Point of the anchored comparison family at parameter ``s``.

    Free factors (sign ``+1`` for anchor ``p``, ``-1`` for anchor ``q``)
    rotate away from their center at constant angular speed given by
    ``free_velocity``; the remaining factors are re-aimed so their segment
    runs along the unit log toward the anchor.  At ``s = 0`` this reproduces
    the sign-pattern tuple exactly.
    """
    sigma = _check_sigma(sigma)
    n = len(sigma)
    free_sign = 1 if anchor == "p" else -1
    vel = np.asarray(free_velocity, dtype=float)
    if vel.shape != (n, space.ambient_dim):
        raise ValueError("free_velocity must be an (n, ambient_dim) array")
    vel = _project_tangent(space, x.coords, vel)
    v0c = np.asarray(v0.components, dtype=float)
    for i in range(n):
        speed2 = float(_inner_raw(space, vel[i], vel[i]))
        if sigma[i] != free_sign and speed2 > 0:
            raise ValueError(
                f"velocity on factor {i} is constrained to zero for anchor {anchor!r}"
            )
        if speed2 > 0 and abs(float(_inner_raw(space, vel[i], v0c))) > 1e-8:
            raise ValueError("free velocities must be orthogonal to the base direction")
    target = anchor_point(space, x, r, n, v0, anchor)
    dirs_at_x = np.empty((n, space.ambient_dim))
    z = x
    chain: list[tuple[ManifoldPoint, TangentVector]] = []  # (point, segment dir)
    for k in range(n):
        if sigma[k] == free_sign:
            speed = math.sqrt(max(float(_inner_raw(space, vel[k], vel[k])), 0.0))
            if speed > 0:
                what = vel[k] / speed
                w = math.cos(speed * s) * sigma[k] * v0c + math.sin(speed * s) * what
            else:
                w = sigma[k] * v0c
            dirs_at_x[k] = w
            seg = TangentVector(x, w.copy())
            for (pt, sd) in chain:
                seg = parallel_transport(space, pt, sd, r, seg, tol)
        else:
            if distance(space, z, target) < tol.degenerate_aim:
                raise DegenerateAimError(
                    f"anchor coincides with breakpoint {k}; aiming direction undefined"
                )
            lg = log_map(space, z, target, tol)
            norm = math.sqrt(max(float(_inner_raw(space, lg.components, lg.components)), 0.0))
            seg = TangentVector(z, lg.components / norm)
            back = seg
            for (pt, sd) in reversed(chain):
                arrive = parallel_transport(space, pt, sd, r, sd, tol)
                rev = TangentVector(arrive.base, -arrive.components)
                back = parallel_transport(space, arrive.base, rev, r,
                                          TangentVector(arrive.base, back.components.copy()), tol)
            dirs_at_x[k] = back.components
        z_next = exp_map(space, z, seg, r, tol)
        chain.append((z, TangentVector(z, seg.components.copy())))
        z = z_next
    return DirectionTuple(space, x, r, dirs_at_x)


def acceleration_check(space: ModelSpace, x: ManifoldPoint, r: float, sigma,
                       v0: TangentVector, anchor: str, free_velocity,
                       tol: Tolerances = DEFAULT_TOLERANCES) -> float:
    """Second derivative at ``s = 0`` of the anchor distance of the endpoint
    along the comparison family; negative under the fold hypotheses.

    Central second difference with step ``tol.acceleration_step``.
    """
    vel = np.asarray(free_velocity, dtype=float)
    if not np.any(np.abs(vel) > 0):
        raise ValueError("free_velocity must be nonzero on at least one free factor")
    sigma = _check_sigma(sigma)
    n = len(sigma)
    target = anchor_point(space, x, r, n, v0, anchor)

    def f(s: float) -> float:
        tup = vpq_curve(space, x, r, sigma, v0, anchor, vel, s, tol)
        return distance(space, target, phi_endpoint(tup))

    h = tol.acceleration_step
    return (f(h) - 2.0 * f(0.0) + f(-h)) / (h * h)


def first_variation_check(v: DirectionTuple, k: int, perturbation,
                          tol: Tolerances = DEFAULT_TOLERANCES) -> tuple[float, float]:
    """Inner products of the variation field with the segment velocity at
    both ends of segment ``k``: geodesic variations of fixed-length segments
    make the two values equal.

    ``perturbation`` is a chart offset (n, d-1) supported on factors
    ``<= k``; returns ``(g(J(a), gamma'(a)), g(J(b), gamma'(b)))``.
    """
    n = v.n
    if not 0 <= k < n:
        raise ValueError("segment index out of range")
    space = v.space
    pert = np.asarray(perturbation, dtype=float)
    chart = build_chart(v)
    if pert.shape != chart.coord_shape:
        raise ValueError(f"perturbation must have shape {chart.coord_shape}")
    if np.any(np.abs(pert[k + 1:]) > 0):
        raise ValueError("perturbation must be supported on factors <= k")
    h = tol.variation_step
    tp = broken_geodesic(chart_eval(chart, h * pert), tol)
    tm = broken_geodesic(chart_eval(chart, -h * pert), tol)
    t0 = broken_geodesic(v, tol)
    za = t0.point(k)
    zb = t0.point(k + 1)
    Ja = (tp.breakpoints[k] - tm.breakpoints[k]) / (2.0 * h)
    Jb = (tp.breakpoints[k + 1] - tm.breakpoints[k + 1]) / (2.0 * h)
    Ja = _project_tangent(space, za.coords, Ja)
    Jb = _project_tangent(space, zb.coords, Jb)
    ga = metric_inner(space, za, TangentVector(za, Ja),
                      TangentVector(za, t0.segment_dirs[k].copy()), tol)
    gb = metric_inner(space, zb, TangentVector(zb, Jb), t0.end_velocity(k), tol)
    return ga, gb


def toponogov_bound(a: float, r: float, R: float, alpha: float) -> float:
    """Third side of a hyperbolic triangle with sides ``r``, ``R`` and angle
    ``alpha`` between them, in curvature ``-a^2``.

    Standard hyperbolic law of cosines,
    ``cosh(a c) = cosh(a r) cosh(a R) - sinh(a r) sinh(a R) cos(alpha)``,
    evaluated in a cancellation-free form that stays accurate for small
    ``a`` (Euclidean limit) and small angles.
    """
    if a <= 0:
        raise ValueError("curvature scale a must be positive")
    if r < 0 or R < 0:
        raise ValueError("side lengths must be non-negative")
    if not 0 <= alpha <= math.pi + 1e-12:
        raise ValueError("angle must lie in [0, pi]")
    sh = math.sinh(0.5 * a * (r - R))
    eps = 2.0 * sh * sh + 2.0 * math.sinh(a * r) * math.sinh(a * R) * math.sin(alpha / 2.0) ** 2
    return math.log1p(eps + math.sqrt(eps * (eps + 2.0))) / a


def angle_linearity_check(space: ModelSpace, x: ManifoldPoint, r: float, sigma,
                          v0: TangentVector, free_velocity,
                          s_max: float = 0.1, num: int = 21,
                          tol: Tolerances = DEFAULT_TOLERANCES) -> AngleLinearityReport:
    """Corner angle toward anchor ``p`` at the first moving free corner, as a
    function of the family parameter; affine in exact arithmetic.

    With zero velocity the angle is constantly pi.
    """
    sigma = _check_sigma(sigma)
    n = len(sigma)
    vel = np.asarray(free_velocity, dtype=float)
    if 1 not in sigma:
        raise ValueError("anchor-p comparison needs at least one +1 factor")
    corner = None
    for i, sg in enumerate(sigma):
        if sg == 1 and float(_inner_raw(space, vel[i], vel[i])) > 0:
            corner = i
            break
    if corner is None:
        corner = sigma.index(1)
    target = anchor_point(space, x, r, n, v0, "p")
    grid = np.linspace(0.0, s_max, num)
    angles = np.empty_like(grid)
    for idx, s in enumerate(grid):
        tup = vpq_curve(space, x, r, sigma, v0, "p", vel, float(s), tol)
        traj = broken_geodesic(tup, tol)
        zk = traj.point(corner)
        to_next = traj.segment_dirs[corner]
        lg = log_map(space, zk, target, tol)
        nrm = math.sqrt(max(float(_inner_raw(space, lg.components, lg.components)), 1e-300))
        c = float(_inner_raw(space, to_next, lg.components / nrm))
        angles[idx] = math.acos(min(1.0, max(-1.0, c)))
    coeffs = np.polyfit(grid, angles, 1)
    fit = np.polyval(coeffs, grid)
    return AngleLinearityReport(
        slope=float(coeffs[0]),
        intercept=float(coeffs[1]),
        max_residual=float(np.abs(angles - fit).max()),
        grid=grid,
        angles=angles,
    )
