"""Monte Carlo harness: recovery trials, noisy-bound sweeps, counterexamples,
and distributional property checks, all reproducible from (config, seed,
trial_id) alone.

Trials are independent; per-trial RNG streams are spawned from the root seed
and the trial index, so a sweep over several exponents p reuses the same
clouds per trial (paired comparisons) and any row can be recomputed in
isolation. Rows are emitted in trial order regardless of worker completion
order.
"""

import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace

import numpy as np

from . import energy as energy_mod
from . import grassmann
from . import optimize
from . import sampling
from .energy import EnergyParams, check_sufficient_l1
from .errors import ConfigRejected, InvalidArgument
from .optimize import FitOptions
from .sampling import MixtureModel, PointCloud


@dataclass(frozen=True)
class ModelRule:
    """Random-model generator: K subspaces from the invariant measure.

    min_pairwise_distance is a rejection threshold on the pairwise
    Grassmannian distances (0 accepts any distinct draw).
    """

    D: int
    d: int
    K: int
    weights: tuple
    noise: float = 0.0
    min_pairwise_distance: float = 0.0


@dataclass(frozen=True)
class ExperimentConfig:
    """One Monte Carlo study: model (fixed or rule), sizes, exponents, knobs."""

    model: object                 # MixtureModel or ModelRule
    N: int
    p_grid: tuple
    n_trials: int
    recovery_tol: float
    fit_options: FitOptions
    seed: int
    alpha0_cap: float | None = None
    target: str = "single"        # noisy sweeps: "single" or "all_k"

    def __post_init__(self):
        if self.n_trials < 1:
            raise InvalidArgument("n_trials must be >= 1")
        if not self.recovery_tol > 0:
            raise InvalidArgument("recovery_tol must be > 0")
        if self.target not in ("single", "all_k"):
            raise InvalidArgument("target must be 'single' or 'all_k'")
        object.__setattr__(self, "p_grid", tuple(float(p) for p in self.p_grid))

    @property
    def weights(self):
        return tuple(self.model.weights)

    @property
    def noise(self):
        return float(self.model.noise)

    @property
    def K(self):
        if isinstance(self.model, MixtureModel):
            return self.model.n_components
        return self.model.K


@dataclass
class TrialRow:
    p: float
    K: int
    eps: float
    alpha: tuple
    trial: int
    distance: float
    energy: float
    bound_f: float | None
    recovered: bool
    runtime_ms: float


@dataclass
class SweepReport:
    """Raw per-trial rows plus aggregates; acceptance reads aggregates only."""

    rows: list
    recovery_tol: float

    def rows_for(self, p):
        return [r for r in self.rows if r.p == p]

    def recovery_rate(self, p, tol=None):
        tol = self.recovery_tol if tol is None else tol
        rows = self.rows_for(p)
        return sum(r.distance < tol for r in rows) / len(rows)

    def median_distance(self, p):
        return float(np.median([r.distance for r in self.rows_for(p)]))

    def bound_fraction(self, p):
        rows = [r for r in self.rows_for(p) if r.bound_f is not None]
        if not rows:
            return None
        return sum(r.distance <= r.bound_f for r in rows) / len(rows)

    def aggregates(self):
        out = {}
        for p in sorted({r.p for r in self.rows}):
            out[p] = {
                "recovery_rate": self.recovery_rate(p),
                "median_distance": self.median_distance(p),
                "bound_fraction": self.bound_fraction(p),
            }
        return out


CSV_COLUMNS = ("p", "K", "eps", "alpha0", "alpha1", "trial", "distance",
               "energy", "bound_f", "recovered", "runtime_ms")


def write_csv(report, fh, include_timing=True):
    """Emit the fixed-header CSV; timing column optional for byte-stable output."""
    cols = CSV_COLUMNS if include_timing else CSV_COLUMNS[:-1]
    fh.write(",".join(cols) + "\n")
    for r in report.rows:
        cells = [
            f"{r.p:.17g}", str(r.K), f"{r.eps:.17g}",
            f"{r.alpha[0]:.17g}", f"{r.alpha[1]:.17g}", str(r.trial),
            f"{r.distance:.17g}", f"{r.energy:.17g}",
            "" if r.bound_f is None else f"{r.bound_f:.17g}",
            str(int(r.recovered)),
        ]
        if include_timing:
            cells.append(f"{r.runtime_ms:.3f}")
        fh.write(",".join(cells) + "\n")


# ---------------------------------------------------------------------------
# Theoretical bounds for the noisy sweeps.

def tau0(p, K, d):
    """The separation constant 1 / (2^(1+p) K^p d^(3p/2))."""
    return 1.0 / (2.0 ** (1 + p) * K**p * d ** (1.5 * p))


def noisy_bound_single(p, K, d, weights, eps):
    """Radius of the ball around the dominant subspace containing the best
    lp subspace under noise eps; regimes 0 < p <= 1 (any K) and p > 1, K = 1."""
    a1 = weights[1]
    if 0 < p <= 1:
        beta = a1 - sum(weights[2:])
        return 2.0 ** ((3 + p) / p) * d**1.5 * eps / beta ** (1.0 / p)
    if K == 1:
        return 2.0 ** ((3 + p) / p) * d**1.5 * (p / a1) ** (1.0 / p) * eps ** (1.0 / p)
    raise InvalidArgument("no single-subspace noisy bound for p > 1 with K > 1")


def noisy_bound_all_k(p, K, d, weights, eps):
    """Near-recovery radius for the full K-tuple (0 < p <= 1)."""
    if not 0 < p <= 1:
        raise InvalidArgument("the K-tuple noisy bound needs 0 < p <= 1")
    t = tau0(p, K, d)
    margin = t * min(weights[1:]) - weights[0]
    if margin <= 0:
        raise ConfigRejected("tau0 * min(alpha_j) <= alpha0")
    return 3.0 ** (1.0 / p) * margin ** (-1.0 / p) * eps


def eps_cap_all_k(p, K, d, weights, min_pair_dist):
    """Admissible noise ceiling for the K-tuple bound."""
    t = tau0(p, K, d)
    arg = t * min(weights[1:]) * min_pair_dist**p / 2.0**p - weights[0]
    if arg <= 0:
        raise ConfigRejected(
            "tau0 * min(alpha_j) * min_dist^p / 2^p <= alpha0"
        )
    return 3.0 ** (-1.0 / p) * arg ** (1.0 / p)


# ---------------------------------------------------------------------------
# Trial machinery.

def _trial_rng(seed, trial_id):
    return np.random.default_rng(np.random.SeedSequence(seed, spawn_key=(trial_id,)))


def _realize_model(config, rng):
    if isinstance(config.model, MixtureModel):
        return config.model
    m = config.model
    return sampling.random_mixture_model(
        m.D, m.d, m.K, m.weights, m.noise, rng,
        min_pairwise_distance=m.min_pairwise_distance,
    )


def _validate_for_kind(config, kind):
    w = np.asarray(config.weights)
    if kind in ("recover_l0", "noisy"):
        if w[1] - w[2:].sum() <= 0:
            raise ConfigRejected("alpha1 <= sum(alpha_i, i >= 2)")
    if kind == "recover_k" and config.alpha0_cap is not None:
        if w[0] > config.alpha0_cap:
            raise ConfigRejected(f"alpha0 {w[0]:g} > alpha0_cap {config.alpha0_cap:g}")
    if kind == "noisy":
        eps = config.noise
        if eps <= 0:
            raise ConfigRejected("noisy sweep needs eps > 0")
        d = (config.model.dim if isinstance(config.model, MixtureModel)
             else config.model.d)
        for p in config.p_grid:
            if config.target == "single":
                if 0 < p <= 1:
                    beta = float(w[1] - w[2:].sum())
                    floor = np.pi * beta ** (1 / p) / (2.0 ** ((3 + 2 * p) / p) * d)
                elif config.K == 1:
                    floor = np.pi**p * w[1] / (2.0 ** (3 + 2 * p) * d**p * p)
                else:
                    raise ConfigRejected("p > 1 with K > 1 has no recovery bound")
                if eps >= floor:
                    raise ConfigRejected(
                        f"eps {eps:g} >= noise floor {floor:g} at p={p:g} "
                        "(recovery ball is the whole Grassmannian)"
                    )
            else:
                if isinstance(config.model, MixtureModel):
                    subs = config.model.subspaces
                    min_pair = min(
                        grassmann.grassmann_distance(subs[i], subs[j])
                        for i in range(len(subs)) for j in range(i + 1, len(subs))
                    )
                else:
                    min_pair = config.model.min_pairwise_distance
                cap = eps_cap_all_k(p, config.K, d, tuple(w), min_pair)
                if eps >= cap:
                    raise ConfigRejected(
                        f"eps {eps:g} >= admissible ceiling {cap:g} at p={p:g}"
                    )


def _fit_opts(config, p, trial_rng):
    seed = int(trial_rng.integers(0, 2**63 - 1))
    return replace(config.fit_options, p=p, seed=seed)


def trial_recover_best_l0(config, trial_id, p=None):
    """One recovery trial of the dominant subspace by single-subspace fit."""
    p = config.p_grid[0] if p is None else p
    _validate_for_kind(config, "recover_l0")
    rng = _trial_rng(config.seed, trial_id)
    model = _realize_model(config, rng)
    cloud = sampling.sample_mixture(model, config.N, rng)
    opts = _fit_opts(config, p, rng)
    t0 = time.perf_counter()
    res = optimize.best_single_subspace(cloud, model.dim, opts)
    ms = (time.perf_counter() - t0) * 1e3
    dist = grassmann.grassmann_distance(res.subspace, model.subspaces[0])
    return TrialRow(
        p=p, K=model.n_components, eps=model.noise, alpha=tuple(model.weights),
        trial=trial_id, distance=dist, energy=res.final_energy, bound_f=None,
        recovered=dist < config.recovery_tol, runtime_ms=ms,
    )


def trial_recover_all_k(config, trial_id, p=None):
    """One simultaneous-recovery trial of all K subspaces."""
    p = config.p_grid[0] if p is None else p
    _validate_for_kind(config, "recover_k")
    rng = _trial_rng(config.seed, trial_id)
    model = _realize_model(config, rng)
    cloud = sampling.sample_mixture(model, config.N, rng)
    opts = _fit_opts(config, p, rng)
    t0 = time.perf_counter()
    res = optimize.best_k_subspaces(cloud, model.n_components, model.dim, opts)
    ms = (time.perf_counter() - t0) * 1e3
    dist = optimize.permutation_distance(list(res.subspaces), list(model.subspaces))
    return TrialRow(
        p=p, K=model.n_components, eps=model.noise, alpha=tuple(model.weights),
        trial=trial_id, distance=dist, energy=res.final_energy, bound_f=None,
        recovered=dist < config.recovery_tol, runtime_ms=ms,
    )


def trial_noisy_bound(config, trial_id, p=None):
    """One noisy near-recovery trial, with the theoretical radius attached."""
    p = config.p_grid[0] if p is None else p
    _validate_for_kind(config, "noisy")
    rng = _trial_rng(config.seed, trial_id)
    model = _realize_model(config, rng)
    d = model.dim
    w = tuple(model.weights)
    cloud = sampling.sample_mixture(model, config.N, rng)
    opts = _fit_opts(config, p, rng)
    t0 = time.perf_counter()
    if config.target == "single":
        res = optimize.best_single_subspace(cloud, d, opts)
        dist = grassmann.grassmann_distance(res.subspace, model.subspaces[0])
        f = noisy_bound_single(p, model.n_components, d, w, model.noise)
    else:
        res = optimize.best_k_subspaces(cloud, model.n_components, d, opts)
        dist = optimize.permutation_distance(
            list(res.subspaces), list(model.subspaces)
        )
        f = noisy_bound_all_k(p, model.n_components, d, w, model.noise)
    ms = (time.perf_counter() - t0) * 1e3
    return TrialRow(
        p=p, K=model.n_components, eps=model.noise, alpha=w, trial=trial_id,
        distance=dist, energy=res.final_energy, bound_f=f,
        recovered=dist <= f, runtime_ms=ms,
    )


_TRIALS = {
    "recover_l0": trial_recover_best_l0,
    "recover_k": trial_recover_all_k,
    "noisy": trial_noisy_bound,
}


def _run_one(args):
    config, kind, trial_id, p = args
    return _TRIALS[kind](config, trial_id, p)


def run_sweep(config, kind, jobs=1):
    """All (p, trial) rows for a kind; validates the config up front.

    Rows come back ordered by (p-grid position, trial_id) whatever the
    completion order.
    """
    if kind not in _TRIALS:
        raise InvalidArgument(f"unknown experiment kind {kind!r}")
    _validate_for_kind(config, kind)
    tasks = [
        (config, kind, t, p) for p in config.p_grid for t in range(config.n_trials)
    ]
    if jobs > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            rows = list(pool.map(_run_one, tasks))
    else:
        rows = [_run_one(t) for t in tasks]
    return SweepReport(rows=rows, recovery_tol=config.recovery_tol)


def noisy_bound_check(config, jobs=1):
    """Noisy sweep with the bound column filled (target per config)."""
    return run_sweep(config, "noisy", jobs=jobs)


# ---------------------------------------------------------------------------
# Counterexample scenarios: a single outlier flipping the best subspace.

@dataclass
class ScenarioResult:
    name: str
    passed: bool
    detail: dict = field(default_factory=dict)


def _axis_line(D, axis):
    b = np.zeros((D, 1))
    b[axis, 0] = 1.0
    return grassmann.Subspace(b)


def counterexample_suite(seed):
    """Three adversarial single-outlier constructions.

    1. Tiny inlier disk plus one orthogonal unit outlier: the fitted lp
       subspace locks onto the outlier for every tested p.
    2. Outlier at elevation angle < pi/2: the sampled sufficient condition
       for l1 local minimality is violated, with an explicit witness.
    3. Points on a short great-circle arc of the sphere plus an outlier on a
       nearby great circle: the l1 energy prefers the outlier's plane.
    """
    rng = np.random.default_rng(np.random.SeedSequence(seed))
    results = []

    # Scenario 1: orthogonal outlier captures the fit.
    n1 = 100
    L1 = _axis_line(3, 0)
    detail = {}
    passed = True
    for p in (0.5, 1.0, 2.0):
        radius = (1.0 / (2 * n1)) ** (1.0 / p)
        inl = np.zeros((n1, 3))
        inl[:, 0] = radius * rng.uniform(-1.0, 1.0, n1)
        outlier = np.array([[0.0, 0.0, 1.0]])
        cloud = PointCloud(np.vstack([inl, outlier]))
        opts = FitOptions(p=p, n_restarts=8, seed=int(rng.integers(2**63 - 1)))
        res = optimize.best_single_subspace(cloud, 1, opts)
        dist = grassmann.grassmann_distance(res.subspace, L1)
        detail[f"dist_p={p:g}"] = dist
        passed = passed and dist > 1.0
    results.append(ScenarioResult("orthogonal_outlier_flip", passed, detail))

    # Scenario 2: elevation-angle outlier breaks l1 local minimality.
    radius = 0.005
    inl = np.zeros((n1, 3))
    inl[:, 0] = radius * rng.uniform(-1.0, 1.0, n1)
    phi = np.pi / 4
    outlier = np.array([[np.cos(phi), np.sin(phi), 0.0]])
    cert = check_sufficient_l1(inl, outlier, L1, n_samples=200, rng=rng)
    results.append(ScenarioResult(
        "elevation_outlier_not_local",
        cert.status == "violated" and cert.witness is not None,
        {"status": cert.status, "lhs": cert.lhs, "rhs": cert.rhs},
    ))

    # Scenario 3: great-circle arc; the outlier's plane wins the l1 energy.
    arc_len = 2.0 / n1
    s = arc_len * (rng.uniform(size=n1) - 0.5)
    arc = np.column_stack([np.cos(s), np.sin(s), np.zeros(n1)])
    psi = 0.1
    outlier = np.array([[0.0, np.cos(psi), np.sin(psi)]])
    X = np.vstack([arc, outlier])
    plane_arc = grassmann.orthonormalize(np.eye(3)[:, :2])
    plane_out = grassmann.orthonormalize(
        np.column_stack([[1.0, 0.0, 0.0], [0.0, np.cos(psi), np.sin(psi)]])
    )
    params = EnergyParams(1.0)
    e_arc = energy_mod.energy_single(X, plane_arc, params)
    e_out = energy_mod.energy_single(X, plane_out, params)
    results.append(ScenarioResult(
        "great_circle_arc_global",
        e_out < e_arc,
        {"energy_arc_plane": e_arc, "energy_outlier_plane": e_out},
    ))
    return results


# ---------------------------------------------------------------------------
# Distributional property checks (moment identity, metric bounds, energy
# lower bounds) at explicit sample counts and tolerances.

@dataclass
class LemmaResult:
    name: str
    passed: bool
    detail: dict = field(default_factory=dict)


def _ball_batch(D, n, rng):
    g = rng.standard_normal((n, D))
    g /= np.linalg.norm(g, axis=1, keepdims=True)
    r = rng.uniform(size=n) ** (1.0 / D)
    return g * r[:, None]


def _subspace_batch(L, n, rng):
    return _ball_batch(L.dim, n, rng) @ L.basis.T


def check_second_moment_identity(rng, n=100_000, dims=(1, 2, 3), tol=0.02):
    """Empirical second moment of the uniform d-ball vs I/(d+2)."""
    detail = {}
    passed = True
    for d in dims:
        b = _ball_batch(d, n, rng)
        emp = b.T @ b / n
        err = float(np.linalg.norm(emp - np.eye(d) / (d + 2)))
        detail[f"d={d}"] = err
        passed = passed and err < tol
    return LemmaResult("second_moment_identity", passed, detail)


def check_distance_lipschitz(rng, n=10_000, slack=1e-9):
    """|dist(x, L1) - dist(x, L2)| <= ||x|| dist(L1, L2) on random triples."""
    violations = 0
    worst = -np.inf
    for _ in range(n):
        D = int(rng.integers(2, 7))
        d = int(rng.integers(1, D))
        x = _ball_batch(D, 1, rng)[0]
        L1 = grassmann.random_subspace(D, d, rng)
        L2 = grassmann.random_subspace(D, d, rng)
        lhs = abs(
            grassmann.dist_point_subspace(x, L1)
            - grassmann.dist_point_subspace(x, L2)
        )
        rhs = np.linalg.norm(x) * grassmann.grassmann_distance(L1, L2)
        worst = max(worst, float(lhs - rhs))
        if lhs > rhs + slack:
            violations += 1
    return LemmaResult(
        "distance_lipschitz", violations == 0,
        {"violations": violations, "worst_margin": worst},
    )


def check_energy_lower_bound(rng, n_configs=50, n_samples=100_000):
    """E_{uniform on L1} min_j dist(x, Lhat_j)^p exceeds
    eps^p / (2^(1+p) K^p d^(3p/2)) whenever every candidate is > eps away."""
    detail = {"margins": []}
    passed = True
    for i in range(n_configs):
        D = int(rng.integers(3, 6))
        d = int(rng.integers(1, min(D - 1, 3) + 1))
        K = int(rng.integers(1, 4))
        p = float(rng.choice([0.5, 1.0]))
        L1 = grassmann.random_subspace(D, d, rng)
        cands = [grassmann.random_subspace(D, d, rng) for _ in range(K)]
        eps = 0.999 * min(grassmann.grassmann_distance(L1, c) for c in cands)
        if eps <= 0:
            continue
        x = _subspace_batch(L1, n_samples, rng)
        table = np.column_stack(
            [energy_mod.distances_to_subspace(x, c) for c in cands]
        )
        est = float(np.mean(table.min(axis=1) ** p))
        bound = eps**p * tau0(p, K, d)
        detail["margins"].append(est - bound)
        passed = passed and est > bound
    detail["min_margin"] = min(detail["margins"])
    detail.pop("margins")
    return LemmaResult("energy_lower_bound", passed, detail)


def check_two_line_mean_bound(rng, n_configs=50, n_samples=100_000):
    """For p <= 1 and any Lhat, the summed expected energies over two
    subspace-uniform sources are minimized (up to MC error) by either source
    subspace: paired Monte Carlo difference >= -3 standard errors."""
    passed = True
    worst = np.inf
    for i in range(n_configs):
        D = int(rng.integers(3, 6))
        d = int(rng.integers(1, min(D - 1, 3) + 1))
        p = float(rng.choice([0.5, 1.0]))
        L1 = grassmann.random_subspace(D, d, rng)
        L2 = grassmann.random_subspace(D, d, rng)
        Lhat = grassmann.random_subspace(D, d, rng)
        x1 = _subspace_batch(L1, n_samples, rng)
        x2 = _subspace_batch(L2, n_samples, rng)
        d1_hat = energy_mod.distances_to_subspace(x1, Lhat) ** p
        d2_hat = energy_mod.distances_to_subspace(x2, Lhat) ** p
        for Li in (L1, L2):
            t1 = d1_hat - energy_mod.distances_to_subspace(x1, Li) ** p
            t2 = d2_hat - energy_mod.distances_to_subspace(x2, Li) ** p
            diff = float(t1.mean() + t2.mean())
            se = float(
                np.sqrt(t1.var(ddof=1) / n_samples + t2.var(ddof=1) / n_samples)
            )
            margin = diff + 3 * se
            worst = min(worst, margin)
            passed = passed and margin >= 0
    return LemmaResult("two_line_mean_bound", passed, {"worst_margin": worst})


def lemma_property_suite(seed):
    """Run every distributional property check with its stated sample counts."""
    rng = np.random.default_rng(np.random.SeedSequence(seed))
    return [
        check_second_moment_identity(rng),
        check_distance_lipschitz(rng),
        check_energy_lower_bound(rng),
        check_two_line_mean_bound(rng),
    ]
