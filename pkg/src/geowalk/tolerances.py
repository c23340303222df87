"""Central numerical tolerance and step-size configuration.

Every tolerance used by the library lives in one frozen record so tests and
reports can state exactly which thresholds were in force.  Functions accept
an optional ``tol`` argument defaulting to :data:`DEFAULT_TOLERANCES`.
"""

from __future__ import annotations

from dataclasses import asdict, dataclass


@dataclass(frozen=True)
class Tolerances:
    # input validation
    unit_norm: float = 1e-9            # |g(v,v) - 1| allowed for "unit" inputs
    base_match: float = 1e-9           # coordinate agreement for shared base points
    # geometric consistency
    hyperboloid_constraint: float = 1e-12  # relative quadratic-form drift per point
    transport_isometry: float = 1e-10
    chart_roundtrip: float = 1e-10
    cut_locus_tie: float = 1e-9        # torus displacement tie detection
    degenerate_aim: float = 1e-9       # anchor-on-breakpoint detection
    # rank / non-degeneracy decisions (relative to the largest singular value
    # or eigenvalue magnitude)
    rank_rel: float = 1e-6             # tau_rank
    nondegenerate_rel: float = 1e-6    # tau_nd
    critical_gradient: float = 1e-6    # |grad psi_d| at a claimed critical point
    # finite-difference step sizes
    jacobian_step: float = 1e-5        # central differences + one Richardson level
    hessian_step: float = 1e-3         # central second differences + Richardson
    acceleration_step: float = 1e-4
    variation_step: float = 1e-5

    def as_dict(self) -> dict:
        return asdict(self)


DEFAULT_TOLERANCES = Tolerances()
