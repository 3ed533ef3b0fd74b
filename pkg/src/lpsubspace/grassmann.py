"""Exact linear-algebra primitives for linear subspaces of R^D.

A d-subspace is stored as a D x d matrix with orthonormal columns. All
functions are pure; equality of subspaces always means span equality
(projector comparison), never basis equality, because bases are not unique.

Angle conventions: principal angles between two d-subspaces are returned in
decreasing order theta_1 >= ... >= theta_d, all in [0, pi/2]. The number of
strictly positive angles is the interaction dimension k. For each i <= k the
complementary vector u_i completes the rotation

    v'_i = cos(theta_i) v_i + sin(theta_i) u_i,

with u_i orthogonal to the first subspace; for i > k we set u_i = v_i.
These (theta_i, v_i, u_i) parametrize the unique connecting geodesic

    L(t) = span{cos(t theta_i) v_i + sin(t theta_i) u_i}

whenever theta_1 < pi/2.
"""

from dataclasses import dataclass

import numpy as np

from .errors import DimensionMismatch, GeodesicNotUnique, RankDeficient

# Angles below this are exact zeros for the interaction dimension.
ZERO_ANGLE_TOL = 1e-9

# Span equality threshold on the Frobenius distance of projectors.
SPAN_TOL = 1e-9


@dataclass(frozen=True)
class Subspace:
    """A d-dimensional linear subspace of R^D, canonicalized by a basis.

    basis: (D, d) array with orthonormal columns. 1 <= d < D.
    """

    basis: np.ndarray

    def __post_init__(self):
        b = np.asarray(self.basis, dtype=float)
        if b.ndim != 2:
            raise DimensionMismatch(f"basis must be 2-d, got shape {b.shape}")
        D, d = b.shape
        if not 1 <= d < D:
            raise DimensionMismatch(f"need 1 <= d < D, got D={D}, d={d}")
        gram_err = np.linalg.norm(b.T @ b - np.eye(d))
        if gram_err > 1e-12:
            raise DimensionMismatch(
                f"basis columns not orthonormal (Frobenius error {gram_err:.2e})"
            )
        b = b.copy()
        b.setflags(write=False)
        object.__setattr__(self, "basis", b)

    @property
    def ambient_dim(self):
        return self.basis.shape[0]

    @property
    def dim(self):
        return self.basis.shape[1]

    def projector(self):
        """The D x D orthogonal projector onto the subspace."""
        return self.basis @ self.basis.T

    def same_span(self, other, tol=SPAN_TOL):
        """Span equality via Frobenius distance of projectors."""
        _check_same_shape(self, other)
        return np.linalg.norm(self.projector() - other.projector()) < tol


@dataclass(frozen=True)
class PrincipalDecomposition:
    """Principal angles/vectors of a pair (F, G) plus the complementary system.

    angles: (d,) decreasing, in [0, pi/2].
    vectors_f: (D, d), columns v_i (orthonormal basis of F).
    vectors_g: (D, d), columns v'_i (orthonormal basis of G), <v_i, v'_i> = cos theta_i.
    complementary: (D, d), columns u_i; u_i in F-perp for i <= k, u_i = v_i for i > k.
    interaction_dim: k, the number of strictly positive angles.
    """

    angles: np.ndarray
    vectors_f: np.ndarray
    vectors_g: np.ndarray
    complementary: np.ndarray
    interaction_dim: int


def _check_same_shape(F, G):
    if F.ambient_dim != G.ambient_dim or F.dim != G.dim:
        raise DimensionMismatch(
            f"subspace shapes differ: ({F.ambient_dim},{F.dim}) vs "
            f"({G.ambient_dim},{G.dim})"
        )


def _check_point(x, L):
    x = np.asarray(x, dtype=float)
    if x.shape != (L.ambient_dim,):
        raise DimensionMismatch(
            f"point has shape {x.shape}, ambient dimension is {L.ambient_dim}"
        )
    return x


def orthonormalize(raw_basis):
    """Subspace spanned by the columns of raw_basis.

    Raises RankDeficient (naming the numerical rank) if the columns do not
    have full rank d.
    """
    raw = np.asarray(raw_basis, dtype=float)
    if raw.ndim != 2:
        raise DimensionMismatch(f"raw basis must be 2-d, got shape {raw.shape}")
    D, d = raw.shape
    if not 1 <= d < D:
        raise DimensionMismatch(f"need 1 <= d < D, got D={D}, d={d}")
    u, s, _ = np.linalg.svd(raw, full_matrices=False)
    rank = int(np.sum(s > s[0] * max(D, d) * np.finfo(float).eps)) if s[0] > 0 else 0
    if rank < d:
        raise RankDeficient(rank, d)
    return Subspace(u[:, :d])


def project(x, L):
    """Orthogonal projection of x onto L."""
    x = _check_point(x, L)
    return L.basis @ (L.basis.T @ x)


def project_perp(x, L):
    """Component of x orthogonal to L, so project + project_perp = x."""
    x = _check_point(x, L)
    return x - project(x, L)


def dist_point_subspace(x, L):
    """Euclidean distance from x to the subspace L."""
    return float(np.linalg.norm(project_perp(x, L)))


def complement_basis(L):
    """Deterministic orthonormal basis of L-perp, shape (D, D-d).

    Fixed by the full SVD of the basis matrix; every consumer that expresses
    quantities in L-perp coordinates must share this frame.
    """
    u, _, _ = np.linalg.svd(L.basis, full_matrices=True)
    return u[:, L.dim:]


def principal_decomposition(F, G):
    """Principal angles, vectors and the complementary orthogonal system.

    Cosines come from the SVD of basis_F^T basis_G (singular values clamped
    to [0, 1]); sines from the norms of the F-perp components of the G-side
    principal vectors, which keeps small angles accurate. Results are ordered
    by decreasing angle.
    """
    _check_same_shape(F, G)
    d = F.dim
    m = F.basis.T @ G.basis
    u, s, vt = np.linalg.svd(m)
    s = np.clip(s, 0.0, 1.0)
    vf = F.basis @ u               # columns v_i, ordered by decreasing cosine
    vg = G.basis @ vt.T            # columns v'_i
    # F-perp component of each v'_i; its norm is sin(theta_i).
    w = vg - F.basis @ (F.basis.T @ vg)
    sines = np.linalg.norm(w, axis=0)
    angles = np.arctan2(sines, s)
    # Reorder to decreasing angle (SVD gives decreasing cosine).
    order = np.arange(d)[::-1]
    angles = angles[order]
    vf = vf[:, order]
    vg = vg[:, order]
    w = w[:, order]
    sines = sines[order]

    zero = angles < ZERO_ANGLE_TOL
    angles = np.where(zero, 0.0, angles)
    k = int(np.sum(~zero))

    comp = np.empty_like(vf)
    for i in range(d):
        if zero[i]:
            comp[:, i] = vf[:, i]
        else:
            comp[:, i] = w[:, i] / sines[i]
    return PrincipalDecomposition(
        angles=angles,
        vectors_f=vf,
        vectors_g=vg,
        complementary=comp,
        interaction_dim=k,
    )


def principal_angles(F, G):
    """Decreasing principal angles between F and G."""
    return principal_decomposition(F, G).angles


def grassmann_distance(F, G):
    """Geodesic distance sqrt(sum theta_i^2) on the Grassmannian.

    The two arguments are ordered canonically before the computation so the
    function is exactly symmetric.
    """
    _check_same_shape(F, G)
    if G.basis.tobytes() < F.basis.tobytes():
        F, G = G, F
    return float(np.linalg.norm(principal_angles(F, G)))


def geodesic(F, G, t):
    """Point at parameter t on the geodesic from F (t=0) to G (t=1).

    Requires theta_1 < pi/2 (otherwise the geodesic is not unique and
    GeodesicNotUnique is raised).
    """
    dec = principal_decomposition(F, G)
    if dec.angles[0] >= np.pi / 2 - 1e-9:
        raise GeodesicNotUnique(
            f"largest principal angle {dec.angles[0]:.6f} >= pi/2"
        )
    cols = dec.vectors_f * np.cos(t * dec.angles) + dec.complementary * np.sin(
        t * dec.angles
    )
    # Columns are orthonormal by construction; re-orthonormalize only to
    # scrub accumulated rounding.
    q, _ = np.linalg.qr(cols)
    return Subspace(q)


def random_subspace(D, d, rng):
    """Draw from the rotation-invariant measure on G(D, d).

    Orthonormalization of a D x d standard Gaussian sample.
    """
    if not 1 <= d < D:
        raise DimensionMismatch(f"need 1 <= d < D, got D={D}, d={d}")
    g = rng.standard_normal((D, d))
    q, r = np.linalg.qr(g)
    # Fix signs so the distribution is exactly Haar-invariant.
    q = q * np.where(np.diag(r) < 0, -1.0, 1.0)
    return Subspace(q)


def save_subspace(path, L):
    """Write a subspace as text: header 'D d', then D rows of d decimals."""
    with open(path, "w") as fh:
        fh.write(f"{L.ambient_dim} {L.dim}\n")
        for row in L.basis:
            fh.write(" ".join(f"{v:.17g}" for v in row) + "\n")


def load_subspace(path):
    """Read a subspace written by save_subspace."""
    with open(path) as fh:
        header = fh.readline().split()
        if len(header) != 2:
            raise ValueError(f"bad subspace header in {path!r}")
        D, d = int(header[0]), int(header[1])
        rows = [[float(v) for v in fh.readline().split()] for _ in range(D)]
    basis = np.array(rows, dtype=float)
    if basis.shape != (D, d):
        raise ValueError(f"subspace body shape {basis.shape} != ({D}, {d})")
    # Round-tripped text may drop the last bit of orthonormality.
    return orthonormalize(basis)
