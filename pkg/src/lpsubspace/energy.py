"""lp energies, their geodesic directional derivatives, and optimality checks.

For a point set X and a d-subspace L the single-subspace energy is
sum_x dist(x, L)^p; the K-subspace energy replaces dist(x, L) by the minimum
distance over the K candidates. Both are nonconvex over the Grassmannian for
every p > 0.

Two matrices drive the first-order analysis, both expressed in a fixed
(L, L-perp) coordinate frame (see grassmann.complement_basis):

    B(L, X)      = sum_{x off L} P_L(x) P_L-perp(x)^T / dist(x, L)
    D(L, x, p)   = P_L(x) P_L-perp(x)^T dist(x, L)^(p-2)

A direction of motion away from a base subspace L1 is a triple
(C, V-hat, U-hat): non-negative diagonal angle rates, an orthogonal d x d
matrix pairing the rates with an orthonormal basis of L1, and a k x (D-d)
matrix with orthonormal rows giving the escape directions inside L1-perp.
Only the first k rates may be nonzero (a geodesic in G(D, d) has at most
min(d, D-d) nonzero principal angles).

The derivative of the l1 energy at t = 0 along the geodesic generated by a
direction is

    sum_inliers ||C Vh P_L1(x)|| - tr_k(C Vh B U-hat^T),

where tr_k is the trace of the first k rows; and the supremum of the
subtracted term over all admissible U-hat is the nuclear norm
||C Vh B||_*. The sampled sufficient-condition checker and the p > 1
necessary-condition checker build directly on these identities.
"""

from dataclasses import dataclass

import numpy as np

from .errors import InvalidArgument, NonsmoothPoint, SingularPoint
from .grassmann import Subspace, complement_basis
from .sampling import PointCloud

# Points within this distance of a subspace count as lying on it.
ON_SUBSPACE_TOL = 1e-9


@dataclass(frozen=True)
class EnergyParams:
    """Exponent p > 0 and smoothing level mu >= 0 (0 = exact, nonsmooth)."""

    p: float
    smoothing_mu: float = 0.0

    def __post_init__(self):
        if not self.p > 0:
            raise InvalidArgument("p must be > 0")
        if self.smoothing_mu < 0:
            raise InvalidArgument("smoothing_mu must be >= 0")


@dataclass(frozen=True)
class DirectionSpec:
    """Direction of first-order motion away from a base subspace.

    c: (d,) non-negative angle rates (the diagonal of the rate matrix);
       entries at index >= k must be zero.
    v: (d, d) orthogonal; row j holds the L1-coordinates of the principal
       vector paired with rate c[j].
    u_hat: (k, D-d) with orthonormal rows; row j holds the L1-perp
       coordinates (in the frame of grassmann.complement_basis) of the
       escape direction for rate c[j].
    """

    c: np.ndarray
    v: np.ndarray
    u_hat: np.ndarray

    def __post_init__(self):
        c = np.asarray(self.c, dtype=float)
        v = np.asarray(self.v, dtype=float)
        u = np.asarray(self.u_hat, dtype=float)
        d = c.shape[0]
        if c.ndim != 1 or np.any(c < 0):
            raise InvalidArgument("c must be a 1-d array of non-negative rates")
        if v.shape != (d, d) or np.linalg.norm(v.T @ v - np.eye(d)) > 1e-10:
            raise InvalidArgument("v must be d x d orthogonal")
        if u.ndim != 2 or u.shape[0] > min(d, u.shape[1]):
            raise InvalidArgument(
                "u_hat must be k x (D-d) with k <= min(d, D-d)"
            )
        k = u.shape[0]
        if np.linalg.norm(u @ u.T - np.eye(k)) > 1e-10:
            raise InvalidArgument("u_hat rows must be orthonormal")
        if np.any(np.abs(c[k:]) > 1e-12):
            raise InvalidArgument(
                f"rates beyond the interaction dimension k={k} must be zero"
            )
        for name, arr in (("c", c), ("v", v), ("u_hat", u)):
            arr = arr.copy()
            arr.setflags(write=False)
            object.__setattr__(self, name, arr)

    @property
    def k(self):
        return self.u_hat.shape[0]


def _points(X):
    if isinstance(X, PointCloud):
        return X.points
    pts = np.asarray(X, dtype=float)
    if pts.ndim == 1:
        pts = pts[None, :]
    return pts


def _dist_sq(pts, L):
    """Squared distances via explicit residuals (accurate near the subspace)."""
    coords = pts @ L.basis
    resid = pts - coords @ L.basis.T
    return np.einsum("ij,ij->i", resid, resid)


def distances_to_subspace(X, L):
    """Vector of Euclidean distances from each point to L."""
    return np.sqrt(_dist_sq(_points(X), L))


def smoothed_distances(X, L, mu):
    """sqrt(dist^2 + mu^2) - mu, evaluated in cancellation-free form."""
    q = _dist_sq(_points(X), L)
    if mu == 0.0:
        return np.sqrt(q)
    return q / (np.sqrt(q + mu * mu) + mu)


def energy_single(X, L, params):
    """sum_x dist_mu(x, L)^p with dist_mu the smoothed distance."""
    d = smoothed_distances(X, L, params.smoothing_mu)
    return float(np.sum(d**params.p))


def _distance_table(X, Ls):
    return np.column_stack([distances_to_subspace(X, L) for L in Ls])


def energy_multi(X, Ls, params):
    """sum_x (min_j dist_mu(x, L_j))^p over a list of K subspaces."""
    if len(Ls) == 0:
        raise InvalidArgument("need at least one subspace")
    table = np.column_stack(
        [smoothed_distances(X, L, params.smoothing_mu) for L in Ls]
    )
    return float(np.sum(table.min(axis=1) ** params.p))


def voronoi_assign(X, Ls):
    """Index of the nearest subspace per point; ties to the lowest index."""
    if len(Ls) == 0:
        raise InvalidArgument("need at least one subspace")
    return _distance_table(X, Ls).argmin(axis=1)


def ell0_count(X, L, tol):
    """Number of points within distance tol of L."""
    if tol < 0:
        raise InvalidArgument("tol must be >= 0")
    return int(np.sum(distances_to_subspace(X, L) <= tol))


def split_on_subspace(X, L, tol=ON_SUBSPACE_TOL):
    """Partition points into (on L, off L) by distance threshold."""
    pts = _points(X)
    on = distances_to_subspace(pts, L) <= tol
    return pts[on], pts[~on]


def outlying_correlation(L, X, on_tol=1e-12):
    """The scaled outlying correlation matrix B, d x (D-d).

    Sums P_L(x) P_L-perp(x)^T / dist(x, L) over points off L, in the
    (L, complement_basis(L)) coordinate frame. Points within on_tol of L are
    excluded (the exact-membership sum is meaningless in floating point).
    """
    pts = _points(X)
    comp = complement_basis(L)
    par = pts @ L.basis          # (N, d) coordinates in L
    perp = pts @ comp            # (N, D-d) coordinates in L-perp
    dist = np.linalg.norm(perp, axis=1)
    keep = dist > on_tol
    if not np.any(keep):
        return np.zeros((L.dim, L.ambient_dim - L.dim))
    w = par[keep] / dist[keep, None]
    return w.T @ perp[keep]


def d_operator(L, x, p):
    """The matrix P_L(x) P_L-perp(x)^T dist(x, L)^(p-2), d x (D-d).

    Raises SingularPoint when x lies on L and p < 2 (negative power of zero).
    """
    x = np.asarray(x, dtype=float)
    comp = complement_basis(L)
    par = L.basis.T @ x
    perp = comp.T @ x
    dist = float(np.linalg.norm(perp))
    if dist <= ON_SUBSPACE_TOL:
        if p < 2:
            raise SingularPoint(
                f"point at distance {dist:.2e} from L with p={p} < 2"
            )
        return np.zeros((L.dim, L.ambient_dim - L.dim))
    return np.outer(par, perp) * dist ** (p - 2.0)


def tr_k(M, k):
    """Trace of the first k rows of M (sum of the leading k diagonal entries)."""
    return float(np.trace(M[:k, :k]))


def direction_subspace(L1, spec, t):
    """The subspace at parameter t on the geodesic generated by a direction.

    Rotates v_j toward u_j at rate c[j]: columns cos(t c_j) v_j + sin(t c_j) u_j.
    """
    d = L1.dim
    comp = complement_basis(L1)
    vs = L1.basis @ spec.v.T                     # column j = v_j
    us = vs.copy()
    us[:, : spec.k] = comp @ spec.u_hat.T        # u_j in L1-perp for j < k
    ang = t * spec.c
    cols = vs * np.cos(ang) + us * np.sin(ang)
    q, _ = np.linalg.qr(cols)
    return Subspace(q)


def random_direction(L1, rng, k=None):
    """Random realizable direction at L1: unit-Frobenius rates, Haar v, Haar u_hat."""
    d, D = L1.dim, L1.ambient_dim
    kmax = min(d, D - d)
    if k is None:
        k = int(rng.integers(1, kmax + 1))
    if not 1 <= k <= kmax:
        raise InvalidArgument(f"need 1 <= k <= min(d, D-d) = {kmax}")
    rates = np.zeros(d)
    raw = np.abs(rng.standard_normal(k))
    raw = np.sort(raw)[::-1]
    rates[:k] = raw / np.linalg.norm(raw)
    v = _haar_orthogonal(d, rng)
    g = rng.standard_normal((D - d, k))
    q, r = np.linalg.qr(g)
    q = q * np.where(np.diag(r) < 0, -1.0, 1.0)
    return DirectionSpec(c=rates, v=v, u_hat=q.T)


def _haar_orthogonal(n, rng):
    g = rng.standard_normal((n, n))
    q, r = np.linalg.qr(g)
    return q * np.where(np.diag(r) < 0, -1.0, 1.0)


def directional_derivative_l1(X, L1, spec, on_tol=ON_SUBSPACE_TOL):
    """Derivative of the l1 energy at t = 0 along the direction's geodesic.

    Equals sum_inliers ||C Vh P_L1(x)|| - tr_k(C Vh B U-hat^T), with inliers
    the points on L1 and B built from the remaining points.
    """
    on, off = split_on_subspace(X, L1, on_tol)
    cv = spec.c[:, None] * spec.v
    inlier_term = 0.0
    if len(on):
        inlier_term = float(np.linalg.norm((on @ L1.basis) @ cv.T, axis=1).sum())
    b = outlying_correlation(L1, off) if len(off) else np.zeros(
        (L1.dim, L1.ambient_dim - L1.dim)
    )
    return inlier_term - tr_k(cv @ b @ spec.u_hat.T, spec.k)


def directional_derivative_lp(X, L1, spec, p, parametrization=None,
                              on_tol=ON_SUBSPACE_TOL):
    """First-order change of the lp energy along the direction's geodesic.

    parametrization "t" (default for p >= 1) is the plain derivative in t:

        p sum_on dist^(p-1) ||C Vh P x|| - p sum_off dist^(p-2) tr_k(C Vh D U^T);

    points on L1 contribute 0 for p > 1 and ||C Vh P x|| for p = 1. With
    p < 1 it exists only when no point lies on L1 (else NonsmoothPoint).

    parametrization "t_p" (default for p < 1) differentiates with respect to
    t^p, where only points on L1 survive:  sum_on ||C Vh P x||^p.
    """
    if parametrization is None:
        parametrization = "t" if p >= 1 else "t_p"
    pts = _points(X)
    dist = distances_to_subspace(pts, L1)
    on = dist <= on_tol
    cv = spec.c[:, None] * spec.v
    par = pts @ L1.basis

    if parametrization == "t_p":
        if p >= 1:
            raise InvalidArgument("the t^p parametrization applies to p < 1 only")
        if not np.any(on):
            return 0.0
        return float(np.sum(np.linalg.norm(par[on] @ cv.T, axis=1) ** p))

    if parametrization != "t":
        raise InvalidArgument(f"unknown parametrization {parametrization!r}")
    inlier_term = 0.0
    if np.any(on):
        if p < 1:
            raise NonsmoothPoint(
                "points on L1 with p < 1: use the t^p parametrization"
            )
        if p == 1:
            inlier_term = float(np.linalg.norm(par[on] @ cv.T, axis=1).sum())
        # p > 1: dist^(p-1) = 0 on L1, the on-points contribute nothing.

    outlier_term = 0.0
    if np.any(~on):
        comp = complement_basis(L1)
        perp = pts[~on] @ comp
        doff = dist[~on]
        # sum_i dist_i^(p-2) * tr_k(Cv par_i perp_i^T U^T)
        a = par[~on] @ cv.T            # (N0, d) rows (Cv par_i)
        b = perp @ spec.u_hat.T        # (N0, k)
        outlier_term = float(np.sum(
            doff ** (p - 2.0) * np.einsum("ij,ij->i", a[:, : spec.k], b)
        ))
    return p * inlier_term - p * outlier_term


def _rates_matrix(c, v_hat):
    c = np.asarray(c, dtype=float)
    if c.ndim == 2:
        c = np.diag(c)
    return c[:, None] * np.asarray(v_hat, dtype=float)


def nuclear_bound(c, v_hat, B, k):
    """Nuclear norm ||C Vh B||_*, the sharp bound on tr_k(C Vh B U^T).

    Rates beyond index k must be zero, otherwise the bound is not attained
    by any admissible U-hat.
    """
    c = np.asarray(c, dtype=float)
    if c.ndim == 2:
        c = np.diag(c)
    if np.any(np.abs(c[k:]) > 1e-12):
        raise InvalidArgument("rates beyond k must be zero")
    m = _rates_matrix(c, v_hat) @ np.asarray(B, dtype=float)
    return float(np.linalg.svd(m, compute_uv=False).sum())


def nuclear_maximizer(c, v_hat, B, k):
    """The U-hat with orthonormal rows attaining nuclear_bound.

    Built from the SVD of the first k rows of C Vh B (the only nonzero ones):
    if A = Ua S Va^T then U-hat = Ua Va^T.
    """
    m = _rates_matrix(c, v_hat) @ np.asarray(B, dtype=float)
    a = m[:k, :]
    ua, _, vat = np.linalg.svd(a, full_matrices=False)
    return ua @ vat


@dataclass(frozen=True)
class Certificate:
    """Outcome of a sampled optimality-condition check.

    status is "holds_sampled" (no violation found among the evaluated
    directions; never a proof) or "violated" (with an explicit witness).
    """

    condition: str
    n_samples: int
    status: str
    witness: DirectionSpec | None = None
    lhs: float | None = None
    rhs: float | None = None

    @property
    def holds(self):
        return self.status == "holds_sampled"


def _axis_candidates(d, kmax):
    """The canonical rate/rotation pairs: each single axis, plus uniform rates."""
    out = []
    for i in range(d):
        c = np.zeros(d)
        c[0] = 1.0
        v = np.eye(d)
        if i:
            v[[0, i]] = v[[i, 0]]
        out.append((c, v))
    if d <= kmax:
        out.append((np.full(d, 1.0 / np.sqrt(d)), np.eye(d)))
    return out


def check_sufficient_l1(inliers, outliers, L1, n_samples, rng,
                        on_tol=ON_SUBSPACE_TOL):
    """Sampled check of the local-minimality condition for the l1 energy.

    Evaluates  sum_i ||C Vh P_L1(x_i)|| > ||C Vh B||_*  over the canonical
    axis-aligned candidates plus n_samples random realizable (C, Vh) pairs
    (rates on the unit Frobenius sphere; the condition is homogeneous in C).
    Returns the first violating direction as a witness, with U-hat set to
    the maximizer of the subtracted trace term.
    """
    inliers = _points(inliers)
    outliers = _points(outliers)
    d, D = L1.dim, L1.ambient_dim
    kmax = min(d, D - d)
    if np.any(distances_to_subspace(inliers, L1) > on_tol):
        raise InvalidArgument("inliers must lie on L1")
    b = outlying_correlation(L1, outliers) if len(outliers) else np.zeros(
        (d, D - d)
    )
    par = inliers @ L1.basis

    def evaluate(c, v):
        cv = c[:, None] * v
        lhs = float(np.linalg.norm(par @ cv.T, axis=1).sum()) if len(par) else 0.0
        rhs = float(np.linalg.svd(cv @ b, compute_uv=False).sum())
        return lhs, rhs

    candidates = _axis_candidates(d, kmax)
    for c, v in candidates:
        lhs, rhs = evaluate(c, v)
        if lhs <= rhs:
            k = int(np.sum(c > 0))
            witness = DirectionSpec(c=c, v=v, u_hat=nuclear_maximizer(c, v, b, k))
            return Certificate("sufficient-l1", n_samples, "violated",
                               witness, lhs, rhs)
    for _ in range(n_samples):
        k = int(rng.integers(1, kmax + 1))
        raw = np.sort(np.abs(rng.standard_normal(k)))[::-1]
        c = np.zeros(d)
        c[:k] = raw / np.linalg.norm(raw)
        v = _haar_orthogonal(d, rng)
        lhs, rhs = evaluate(c, v)
        if lhs <= rhs:
            witness = DirectionSpec(c=c, v=v, u_hat=nuclear_maximizer(c, v, b, k))
            return Certificate("sufficient-l1", n_samples, "violated",
                               witness, lhs, rhs)
    return Certificate("sufficient-l1", n_samples, "holds_sampled")


@dataclass(frozen=True)
class NecessaryCheck:
    """Frobenius norm of the stationarity matrix and whether it vanishes."""

    norm: float
    satisfied: bool
    tol: float


def check_necessary_p_gt1(outliers, L1, p, tol=1e-9):
    """Necessary condition for local minimality when p > 1.

    Computes ||sum_i D(L1, y_i, p)||_F; the condition holds only when the sum
    vanishes, which a continuous outlier distribution achieves with
    probability zero.
    """
    if not p > 1:
        raise InvalidArgument("this condition applies to p > 1")
    outliers = _points(outliers)
    total = np.zeros((L1.dim, L1.ambient_dim - L1.dim))
    for y in outliers:
        total += d_operator(L1, y, p)
    norm = float(np.linalg.norm(total))
    return NecessaryCheck(norm=norm, satisfied=norm < tol, tol=tol)
