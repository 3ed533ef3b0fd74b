"""Minimizers for the lp subspace energies.

geodesic_descent moves along exact Grassmannian geodesics in the direction of
the negative Riemannian gradient of the smoothed energy, with Armijo
backtracking and a decreasing smoothing schedule (the exact energy is
nonsmooth exactly at the data points that matter). best_single_subspace and
best_k_subspaces wrap it in multi-start loops; ransac_subspace is the
classical count-inliers baseline, also used for seeding.

All reported energies are exact (smoothing 0) energies of the returned
subspaces; smoothing only steers the iterates.
"""

import itertools
import logging
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import linear_sum_assignment

from . import energy as energy_mod
from . import grassmann
from .energy import EnergyParams, energy_multi, energy_single, voronoi_assign
from .errors import InvalidArgument, RankDeficient
from .grassmann import Subspace
from .sampling import PointCloud

logger = logging.getLogger(__name__)

# Line search gives up when the arc step falls below this (energy resolution
# exhausted; treated as stationary).
MIN_STEP = 1e-14


@dataclass(frozen=True)
class FitOptions:
    """Knobs for the descent and its multi-start wrappers."""

    p: float = 1.0
    max_iters: int = 300
    step_init: float = 0.5
    armijo_c: float = 1e-4
    tol_grad: float = 1e-6
    n_restarts: int = 12
    mu_schedule: tuple = (1e-2, 1e-3, 1e-4, 1e-6, 1e-8)
    seed: int = 0

    def __post_init__(self):
        if self.max_iters < 1:
            raise InvalidArgument("max_iters must be >= 1")
        if not self.tol_grad > 0:
            raise InvalidArgument("tol_grad must be > 0")
        if not 0 < self.armijo_c < 1:
            raise InvalidArgument("armijo_c must be in (0, 1)")
        if not self.step_init > 0:
            raise InvalidArgument("step_init must be > 0")
        sched = tuple(float(m) for m in self.mu_schedule)
        if not sched or any(b >= a for a, b in zip(sched, sched[1:])):
            raise InvalidArgument("mu_schedule must be non-empty, strictly decreasing")
        object.__setattr__(self, "mu_schedule", sched)


@dataclass
class FitResult:
    """Outcome of a fit; final_energy is always the exact (mu = 0) energy."""

    subspaces: tuple
    final_energy: float
    iterations: int
    restarts_used: int
    converged: bool
    reseeds: int = 0
    stage_energies: tuple = field(default=(), repr=False)

    @property
    def subspace(self):
        return self.subspaces[0]


def _gradient_weights(q, p, mu):
    """d/dq of (sqrt(q + mu^2) - mu)^p per point, guarded near q = 0.

    The guarded power base keeps the weight finite; the weight multiplies the
    perpendicular component (norm sqrt(q)), so the product vanishes with q
    whenever p > 1/2 and stays bounded at p = 1/2.
    """
    root = np.sqrt(q + mu * mu)
    base = np.maximum(q / (root + mu), 1e-150)
    return p * base ** (p - 1.0) / (2.0 * root)


def _riemannian_gradient(pts, Q, p, mu):
    """Gradient of the smoothed energy in the horizontal space at Q.

    Assembled from per-point terms: -2 sum w_x (P-perp x)(x^T Q), with w_x the
    chain-rule weight of dist^2. Computed from perpendicular components
    directly so on-subspace points contribute exactly zero.
    """
    coords = pts @ Q                      # (N, d)
    resid = pts - coords @ Q.T            # (N, D) perpendicular components
    q = np.einsum("ij,ij->i", resid, resid)
    w = _gradient_weights(q, p, mu)
    return -2.0 * (resid * w[:, None]).T @ coords


def _geodesic_factory(Q, direction):
    """Exact exponential map t -> subspace basis along a unit tangent."""
    w, sig, vt = np.linalg.svd(direction, full_matrices=False)
    qv = Q @ vt.T

    def at(t):
        ang = t * sig
        cols = qv * np.cos(ang) + w * np.sin(ang)
        basis, _ = np.linalg.qr(cols @ vt)
        return basis

    return at


def _smoothed_energy(pts, Q, p, mu):
    coords = pts @ Q
    resid = pts - coords @ Q.T
    q = np.einsum("ij,ij->i", resid, resid)
    base = q / (np.sqrt(q + mu * mu) + mu) if mu > 0 else np.sqrt(q)
    return float(np.sum(base**p))


def geodesic_descent(X, L_init, opts):
    """Minimize the single-subspace lp energy from a given initialization.

    Runs one Armijo descent per smoothing stage, each capped at
    opts.max_iters steps. A stage ends when the Riemannian gradient norm
    drops below tol_grad, when the line search cannot resolve any further
    decrease (stationary at energy resolution), or at the iteration cap;
    converged reflects the final stage (False only when the cap cut it off).
    """
    pts = X.points if isinstance(X, PointCloud) else np.asarray(X, dtype=float)
    Q = np.asarray(L_init.basis, dtype=float).copy()
    p = opts.p
    total_iters = 0
    converged = True
    stage_energies = []
    for mu in opts.mu_schedule:
        e = _smoothed_energy(pts, Q, p, mu)
        history = [e]
        step = opts.step_init
        converged = False
        stagnant = 0
        for _ in range(opts.max_iters):
            grad = _riemannian_gradient(pts, Q, p, mu)
            gnorm = float(np.linalg.norm(grad))
            if gnorm < opts.tol_grad:
                converged = True
                break
            geo = _geodesic_factory(Q, -grad / gnorm)
            slope = -gnorm
            accepted = False
            s = min(step, opts.step_init)
            while s >= MIN_STEP:
                cand = geo(s)
                e_new = _smoothed_energy(pts, cand, p, mu)
                if e_new <= e + opts.armijo_c * s * slope:
                    drop = e - e_new
                    Q = cand
                    e = e_new
                    step = 2.0 * s
                    accepted = True
                    # progress below energy resolution counts as stagnation
                    stagnant = stagnant + 1 if drop <= 1e-13 * (1 + abs(e)) else 0
                    break
                s *= 0.5
            total_iters += 1
            if not accepted or stagnant >= 3:
                converged = True  # stationary at energy resolution
                break
            history.append(e)
        stage_energies.append(tuple(history))
    L = Subspace(Q)
    exact = energy_single(pts, L, EnergyParams(p))
    return FitResult(
        subspaces=(L,),
        final_energy=exact,
        iterations=total_iters,
        restarts_used=1,
        converged=converged,
        stage_energies=tuple(stage_energies),
    )


def _pca_subspace(pts, d):
    """Top-d right-singular-vector subspace of the data matrix."""
    D = pts.shape[1]
    _, _, vt = np.linalg.svd(pts, full_matrices=False)
    avail = min(d, vt.shape[0])
    basis = vt[:avail].T
    if avail < d:
        # Degenerate cloud (fewer points than d): complete deterministically.
        full = np.linalg.svd(basis, full_matrices=True)[0]
        basis = np.column_stack([basis, full[:, avail:d]])
    q, _ = np.linalg.qr(basis)
    return Subspace(q[:, :d])


def ransac_subspace(X, d, strip_eps, iters, rng):
    """Best-by-inlier-count span of d sampled points over `iters` rounds.

    Each round samples d distinct points and counts points within a strip of
    width strip_eps around their span; degenerate (rank-deficient) samples
    are skipped and counted. Ties keep the earliest round's subspace.
    """
    pts = X.points if isinstance(X, PointCloud) else np.asarray(X, dtype=float)
    if iters < 1:
        raise InvalidArgument("iters must be >= 1")
    if strip_eps <= 0:
        raise InvalidArgument("strip_eps must be > 0")
    n = pts.shape[0]
    if n < d:
        raise InvalidArgument(f"need at least d={d} points, got {n}")
    best = None
    best_count = -1
    skipped = 0
    for _ in range(iters):
        idx = rng.choice(n, size=d, replace=False)
        try:
            cand = grassmann.orthonormalize(pts[idx].T)
        except RankDeficient:
            skipped += 1
            continue
        count = int(np.sum(energy_mod.distances_to_subspace(pts, cand) <= strip_eps))
        if count > best_count:
            best, best_count = cand, count
    if best is None:
        raise InvalidArgument(f"all {iters} rounds degenerate ({skipped} skipped)")
    if skipped:
        logger.debug("ransac: %d of %d rounds skipped as degenerate", skipped, iters)
    return best


def best_single_subspace(X, d, opts):
    """Lowest-energy geodesic descent over a multi-start initialization list.

    The list holds opts.n_restarts starts: the top-d right-singular-vector
    subspace of the data, one RANSAC-seeded candidate, and random draws from
    the invariant measure for the remainder. Ties in final energy go to the
    lowest start index.
    """
    pts = X.points if isinstance(X, PointCloud) else np.asarray(X, dtype=float)
    rng = np.random.default_rng(np.random.SeedSequence(opts.seed))
    D = pts.shape[1]
    starts = [_pca_subspace(pts, d)]
    if pts.shape[0] >= d:
        scale = float(np.max(np.linalg.norm(pts, axis=1)))
        strip = 0.02 * max(scale, 1e-12)
        try:
            starts.append(ransac_subspace(pts, d, strip, iters=100, rng=rng))
        except InvalidArgument:
            pass
    while len(starts) < max(opts.n_restarts, 1):
        starts.append(grassmann.random_subspace(D, d, rng))
    starts = starts[: max(opts.n_restarts, 1)]

    best = None
    iters = 0
    for L0 in starts:
        res = geodesic_descent(pts, L0, opts)
        iters += res.iterations
        if best is None or res.final_energy < best.final_energy:
            best = res
    return FitResult(
        subspaces=best.subspaces,
        final_energy=best.final_energy,
        iterations=iters,
        restarts_used=len(starts),
        converged=best.converged,
        stage_energies=best.stage_energies,
    )


def _ransac_peel_starts(pts, d, K, rng):
    """Initial K-tuple by repeated RANSAC with strip removal."""
    D = pts.shape[1]
    remaining = pts
    subs = []
    scale = float(np.max(np.linalg.norm(pts, axis=1))) if len(pts) else 1.0
    strip = 0.02 * max(scale, 1e-12)
    for _ in range(K):
        if remaining.shape[0] >= max(d, 2 * d):
            try:
                L = ransac_subspace(remaining, d, strip, iters=100, rng=rng)
                subs.append(L)
                keep = energy_mod.distances_to_subspace(remaining, L) > strip
                remaining = remaining[keep]
                continue
            except InvalidArgument:
                pass
        subs.append(grassmann.random_subspace(D, d, rng))
    return tuple(subs)


def best_k_subspaces(X, K, d, opts):
    """Alternating minimization for the K-subspace lp energy, multi-start.

    Each start alternates Voronoi assignment with a per-cluster descent from
    the cluster's current subspace, until the assignment reaches a fixpoint
    or opts.max_iters outer rounds. An empty cluster is reseeded from the
    invariant measure (counted in the result). The best start is the one
    with the lowest exact K-subspace energy.
    """
    if K < 1:
        raise InvalidArgument("K must be >= 1")
    pts = X.points if isinstance(X, PointCloud) else np.asarray(X, dtype=float)
    if K == 1:
        res = best_single_subspace(pts, d, opts)
        return res
    rng = np.random.default_rng(np.random.SeedSequence(opts.seed))
    D = pts.shape[1]
    params = EnergyParams(opts.p)

    start_tuples = [_ransac_peel_starts(pts, d, K, rng)]
    while len(start_tuples) < max(opts.n_restarts, 1):
        start_tuples.append(
            tuple(grassmann.random_subspace(D, d, rng) for _ in range(K))
        )
    start_tuples = start_tuples[: max(opts.n_restarts, 1)]

    best = None
    total_reseeds = 0
    for tup in start_tuples:
        subs = list(tup)
        assign = voronoi_assign(pts, subs)
        converged = False
        outer = 0
        reseeds = 0
        for outer in range(1, opts.max_iters + 1):
            new_subs = []
            for j in range(K):
                cluster = pts[assign == j]
                if cluster.shape[0] == 0:
                    new_subs.append(grassmann.random_subspace(D, d, rng))
                    reseeds += 1
                    continue
                new_subs.append(geodesic_descent(cluster, subs[j], opts).subspace)
            subs = new_subs
            new_assign = voronoi_assign(pts, subs)
            if np.array_equal(new_assign, assign):
                converged = True
                break
            assign = new_assign
        e = energy_multi(pts, subs, params)
        total_reseeds += reseeds
        if best is None or e < best[0]:
            best = (e, tuple(subs), outer, converged, reseeds)
    e, subs, outer, converged, reseeds = best
    return FitResult(
        subspaces=subs,
        final_energy=e,
        iterations=outer,
        restarts_used=len(start_tuples),
        converged=converged,
        reseeds=total_reseeds,
    )


def permutation_distance(fit, truth):
    """min over pairings of the max per-pair Grassmannian distance.

    Exhaustive over permutations for K <= 8; beyond that a sum-cost Hungarian
    assignment approximates the bottleneck pairing (logged as approximate).
    """
    if len(fit) != len(truth):
        raise InvalidArgument("lists must have equal length")
    K = len(fit)
    cost = np.array(
        [[grassmann.grassmann_distance(f, t) for t in truth] for f in fit]
    )
    if K <= 8:
        return float(
            min(
                max(cost[i, perm[i]] for i in range(K))
                for perm in itertools.permutations(range(K))
            )
        )
    logger.warning(
        "permutation_distance with K=%d uses a sum-cost assignment; the "
        "bottleneck value is approximate", K,
    )
    rows, cols = linear_sum_assignment(cost)
    return float(cost[rows, cols].max())
