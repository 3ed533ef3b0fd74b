"""Samplers for the uniform mixture measure and its noisy variant.

The mixture has K+1 components: component 0 is uniform on the unit ball of
R^D (outliers); component i >= 1 is uniform on the restriction of the unit
ball to a d-subspace L_i, optionally thickened into a cylinder of radius
epsilon in the orthogonal directions (noise).

All samplers take an explicit numpy Generator; identical seeds give
bit-identical output. Ground-truth labels are always stored with sampled
clouds; fitting code never reads them.
"""

from dataclasses import dataclass

import numpy as np

from . import grassmann
from .errors import ConfigRejected, DimensionMismatch, InvalidArgument, InvalidNoise
from .grassmann import Subspace, complement_basis


@dataclass(frozen=True)
class MixtureModel:
    """Mixture weights alpha_0..alpha_K, K subspaces, noise level epsilon >= 0."""

    weights: np.ndarray
    subspaces: tuple
    noise: float = 0.0

    def __post_init__(self):
        w = np.asarray(self.weights, dtype=float)
        subs = tuple(self.subspaces)
        if w.ndim != 1 or len(w) != len(subs) + 1:
            raise InvalidArgument(
                f"need K+1 weights for K subspaces, got {len(w)} weights, "
                f"{len(subs)} subspaces"
            )
        if np.any(w < 0):
            raise InvalidArgument("mixture weights must be non-negative")
        if abs(w.sum() - 1.0) > 1e-12:
            raise InvalidArgument(f"mixture weights sum to {w.sum()!r}, not 1")
        if self.noise < 0:
            raise InvalidArgument("noise level must be >= 0")
        if subs:
            D, d = subs[0].ambient_dim, subs[0].dim
            for L in subs[1:]:
                if L.ambient_dim != D or L.dim != d:
                    raise DimensionMismatch("mixture subspaces must share (D, d)")
            for i in range(len(subs)):
                for j in range(i + 1, len(subs)):
                    if subs[i].same_span(subs[j]):
                        raise InvalidArgument(
                            f"mixture subspaces {i + 1} and {j + 1} span the same space"
                        )
        w = w.copy()
        w.setflags(write=False)
        object.__setattr__(self, "weights", w)
        object.__setattr__(self, "subspaces", subs)

    @property
    def n_components(self):
        return len(self.subspaces)

    @property
    def ambient_dim(self):
        return self.subspaces[0].ambient_dim

    @property
    def dim(self):
        return self.subspaces[0].dim


@dataclass
class PointCloud:
    """N points in R^D with optional component labels (0 = outlier)."""

    points: np.ndarray
    labels: np.ndarray | None = None

    def __post_init__(self):
        self.points = np.ascontiguousarray(self.points, dtype=float)
        if self.points.ndim != 2:
            raise DimensionMismatch(f"points must be (N, D), got {self.points.shape}")
        if self.labels is not None:
            self.labels = np.asarray(self.labels, dtype=int)
            if self.labels.shape != (self.points.shape[0],):
                raise InvalidArgument("labels must have one entry per point")

    @property
    def n_points(self):
        return self.points.shape[0]

    @property
    def ambient_dim(self):
        return self.points.shape[1]


def sample_unit_ball(D, rng):
    """One point uniform on the unit ball of R^D.

    Direction from a normalized Gaussian, radius u^(1/D) with u uniform.
    """
    if D < 1:
        raise InvalidArgument("D must be >= 1")
    g = rng.standard_normal(D)
    norm = np.linalg.norm(g)
    while norm == 0.0:  # pragma: no cover - probability zero
        g = rng.standard_normal(D)
        norm = np.linalg.norm(g)
    r = rng.uniform() ** (1.0 / D)
    return (r / norm) * g


def sample_on_subspace(L, rng):
    """One point uniform on L intersected with the unit ball."""
    b = sample_unit_ball(L.dim, rng)
    return L.basis @ b


def sample_noisy_cylinder(L, eps, rng):
    """One point uniform on the cylinder (L ∩ B(0,1)) x (L-perp ∩ B(0,eps)).

    The in-subspace and orthogonal components are independent.
    """
    if eps <= 0:
        raise InvalidNoise("cylinder sampler needs eps > 0; use the clean sampler")
    u = sample_on_subspace(L, rng)
    comp = complement_basis(L)
    w = eps * sample_unit_ball(L.ambient_dim - L.dim, rng)
    return u + comp @ w


def sample_mixture(model, N, rng):
    """N i.i.d. draws from the mixture; labels record the component.

    Component selection is inverse-CDF on one uniform draw per point, so a
    single RNG stream reproduces the cloud exactly.
    """
    if N < 1:
        raise InvalidArgument("N must be >= 1")
    cdf = np.cumsum(model.weights)
    D = model.ambient_dim
    pts = np.empty((N, D))
    labels = np.empty(N, dtype=int)
    for i in range(N):
        c = int(np.searchsorted(cdf, rng.uniform(), side="right"))
        c = min(c, model.n_components)
        labels[i] = c
        if c == 0:
            pts[i] = sample_unit_ball(D, rng)
        elif model.noise == 0.0:
            pts[i] = sample_on_subspace(model.subspaces[c - 1], rng)
        else:
            pts[i] = sample_noisy_cylinder(model.subspaces[c - 1], model.noise, rng)
    return PointCloud(points=pts, labels=labels)


def dominant_weight_margin(model):
    """alpha_1 - sum(alpha_i, i >= 2); positive when L_1 dominates."""
    w = model.weights
    return float(w[1] - w[2:].sum())


def validate_dominant_component(model):
    """Require alpha_1 > sum(alpha_i, i >= 2), the best-l0 dominance condition."""
    if dominant_weight_margin(model) <= 0:
        raise ConfigRejected("alpha1 <= sum(alpha_i, i >= 2)")


def noise_floor_single(model, p):
    """Largest admissible noise for near-recovery of the dominant subspace.

    Above this floor the recovery ball fills the whole Grassmannian and the
    bound is vacuous. Two regimes: 0 < p <= 1 (any K), or p > 1 with K = 1.
    """
    d = model.dim
    a1 = float(model.weights[1])
    if 0 < p <= 1:
        beta = dominant_weight_margin(model)
        return np.pi * beta ** (1.0 / p) / (2.0 ** ((3 + 2 * p) / p) * d)
    if model.n_components == 1:
        return np.pi**p * a1 / (2.0 ** (3 + 2 * p) * d**p * p)
    raise InvalidArgument("no noise floor for p > 1 with K > 1")


def validate_noise_level(model, p):
    """Reject models whose noise is at or above the vacuous-bound floor."""
    if model.noise == 0.0:
        return
    floor = noise_floor_single(model, p)
    if model.noise >= floor:
        raise ConfigRejected(
            f"eps {model.noise:g} >= noise floor {floor:g} (recovery ball is "
            "the whole Grassmannian)"
        )


def random_mixture_model(D, d, K, weights, noise, rng, min_pairwise_distance=0.0,
                         max_tries=1000):
    """MixtureModel with K subspaces drawn from the invariant measure.

    Rejection-samples until all pairwise Grassmannian distances exceed
    min_pairwise_distance (default 0: any distinct draw accepted).
    """
    for _ in range(max_tries):
        subs = [grassmann.random_subspace(D, d, rng) for _ in range(K)]
        ok = True
        for i in range(K):
            for j in range(i + 1, K):
                if grassmann.grassmann_distance(subs[i], subs[j]) <= min_pairwise_distance:
                    ok = False
        if ok:
            return MixtureModel(weights=np.asarray(weights, float),
                                subspaces=tuple(subs), noise=noise)
    raise InvalidArgument(
        f"could not draw {K} subspaces with pairwise distance > "
        f"{min_pairwise_distance} in {max_tries} tries"
    )


def save_cloud(path, cloud, K=0, eps=0.0):
    """Write a cloud as text: header 'N D K epsilon', then one point per line.

    Each line holds D decimals plus, when labels are present, an integer label.
    """
    with open(path, "w") as fh:
        fh.write(f"{cloud.n_points} {cloud.ambient_dim} {K} {eps:.17g}\n")
        for i, row in enumerate(cloud.points):
            line = " ".join(f"{v:.17g}" for v in row)
            if cloud.labels is not None:
                line += f" {cloud.labels[i]}"
            fh.write(line + "\n")


def load_cloud(path):
    """Read a cloud written by save_cloud; returns (cloud, K, eps)."""
    with open(path) as fh:
        header = fh.readline().split()
        if len(header) != 4:
            raise ValueError(f"bad cloud header in {path!r}")
        N, D, K = int(header[0]), int(header[1]), int(header[2])
        eps = float(header[3])
        pts = np.empty((N, D))
        labels = None
        for i in range(N):
            tokens = fh.readline().split()
            if len(tokens) == D + 1:
                if labels is None:
                    labels = np.empty(N, dtype=int)
                labels[i] = int(tokens[-1])
                tokens = tokens[:-1]
            elif len(tokens) != D:
                raise ValueError(f"line {i + 2}: expected {D} coordinates")
            pts[i] = [float(t) for t in tokens]
    return PointCloud(points=pts, labels=labels), K, eps
