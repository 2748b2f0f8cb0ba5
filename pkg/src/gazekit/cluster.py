"""Hard and soft clustering of fixation positions with Xie-Beni validation.

``kmeans`` runs Lloyd iterations from k-means++ seeding, ``em_gmm`` fits a
full-covariance 2-D Gaussian mixture by expectation-maximization, and
``select_k`` sweeps a range of component counts picking the Xie-Beni
minimizer.  All fits are deterministic given (points, config, seed): each
restart draws from its own seeded generator and ties are resolved toward
the earlier restart / smaller k.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.special import logsumexp

from gazekit.errors import (
    DegenerateInput,
    DegenerateSeparation,
    NoValidModel,
    TooFewPoints,
    UndefinedForK1,
)

_LOG_2PI = float(np.log(2.0 * np.pi))


@dataclass(frozen=True)
class ClusterConfig:
    max_iters: int = 200
    tol: float = 1e-6
    restarts: int = 10
    cov_floor: float = 1e-6
    seed: int = 0
    fuzzifier_m: float = 2.0

    def __post_init__(self):
        if min(self.max_iters, self.restarts) < 1 or min(self.tol, self.cov_floor) <= 0:
            raise ValueError("all cluster-config fields must be positive")
        if self.fuzzifier_m <= 0:
            raise ValueError("fuzzifier_m must be positive")


@dataclass
class ClusterModel:
    """Fitted clustering of n 2-D points into k components.

    ``responsibilities`` is the n x k row-stochastic membership matrix
    (one-hot for k-means).  ``weights``/``covariances``/``log_likelihood``
    are set for soft models only, ``wcss`` for hard models.  ``xb`` and
    ``xb_membership`` are filled by the sweep (or on demand).
    """

    method: str
    k: int
    means: np.ndarray
    responsibilities: np.ndarray
    weights: np.ndarray | None = None
    covariances: np.ndarray | None = None
    log_likelihood: float | None = None
    ll_trace: list[float] = field(default_factory=list)
    wcss: float | None = None
    wcss_trace: list[float] = field(default_factory=list)
    n_iter: int = 0
    xb: float | None = None
    xb_membership: str | None = None

    def hard_labels(self) -> np.ndarray:
        return np.argmax(self.responsibilities, axis=1)


def _as_points(points) -> np.ndarray:
    pts = np.asarray(points, dtype=float)
    if pts.ndim != 2 or pts.shape[1] != 2:
        raise ValueError(f"expected an (n, 2) point array, got shape {pts.shape}")
    return pts


def _kmeanspp_seeds(
    pts: np.ndarray, k: int, rng: np.random.Generator, n_local: int = 3
) -> np.ndarray:
    """Greedy k-means++ seeding.

    After a uniform first center, each step draws ``n_local`` D^2-weighted
    candidates and keeps the one that lowers the potential most.
    """
    n = pts.shape[0]
    centers = np.empty((k, 2))
    centers[0] = pts[rng.integers(n)]
    d2 = np.sum((pts - centers[0]) ** 2, axis=1)
    for j in range(1, k):
        total = d2.sum()
        if total <= 0.0:  # remaining points coincide with chosen centers
            centers[j] = pts[rng.integers(n)]
            continue
        candidates = rng.choice(n, size=n_local, p=d2 / total)
        potentials = [
            np.minimum(d2, np.sum((pts - pts[c]) ** 2, axis=1)).sum() for c in candidates
        ]
        chosen = candidates[int(np.argmin(potentials))]
        centers[j] = pts[chosen]
        d2 = np.minimum(d2, np.sum((pts - pts[chosen]) ** 2, axis=1))
    return centers


def _assign(pts: np.ndarray, centers: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    d2 = np.sum((pts[:, None, :] - centers[None, :, :]) ** 2, axis=2)
    labels = np.argmin(d2, axis=1)
    return labels, d2


def _lloyd(
    pts: np.ndarray,
    centers: np.ndarray,
    max_iters: int,
    trace: list[float] | None = None,
) -> tuple[np.ndarray, np.ndarray, float, int]:
    """Lloyd iterations to an assignment fixed point.

    Empty clusters are re-seeded to the point farthest from its current
    center (ties to the lowest index), which keeps every cluster non-empty.
    When given, ``trace`` collects the WCSS after every update step.
    """
    n, k = pts.shape[0], centers.shape[0]
    labels = np.full(n, -1)
    it = 0
    for it in range(1, max_iters + 1):
        new_labels, d2 = _assign(pts, centers)
        assigned_d2 = d2[np.arange(n), new_labels]
        while True:
            counts = np.bincount(new_labels, minlength=k)
            empties = np.flatnonzero(counts == 0)
            if empties.size == 0:
                break
            # Never orphan another cluster by stealing its only point.
            candidates = np.where(counts[new_labels] > 1, assigned_d2, -np.inf)
            far = int(np.argmax(candidates))
            new_labels[far] = empties[0]
            assigned_d2[far] = -1.0
        if np.array_equal(new_labels, labels):
            break
        labels = new_labels
        for j in range(k):
            centers[j] = pts[labels == j].mean(axis=0)
        if trace is not None:
            trace.append(float(np.sum((pts - centers[labels]) ** 2)))
    wcss = float(np.sum((pts - centers[labels]) ** 2))
    return centers, labels, wcss, it


def _hartigan_refine(
    pts: np.ndarray,
    centers: np.ndarray,
    labels: np.ndarray,
    trace: list[float] | None = None,
    max_sweeps: int = 100,
) -> None:
    """Single-point improvement sweeps (Hartigan moves) after Lloyd.

    Moves point i from its cluster a to b when the exact WCSS change
    n_b/(n_b+1)*d(i,b) - n_a/(n_a-1)*d(i,a) is negative; escapes Lloyd-stable
    local optima that trap best-of-restarts on small instances.
    """
    n, k = pts.shape[0], centers.shape[0]
    counts = np.bincount(labels, minlength=k).astype(float)
    for _ in range(max_sweeps):
        moved = False
        for i in range(n):
            a = labels[i]
            if counts[a] <= 1:
                continue
            removal_gain = counts[a] / (counts[a] - 1) * np.sum((pts[i] - centers[a]) ** 2)
            add_costs = counts / (counts + 1) * np.sum((pts[i] - centers) ** 2, axis=1)
            add_costs[a] = np.inf
            b = int(np.argmin(add_costs))
            if add_costs[b] - removal_gain < -1e-12:
                centers[a] = (centers[a] * counts[a] - pts[i]) / (counts[a] - 1)
                centers[b] = (centers[b] * counts[b] + pts[i]) / (counts[b] + 1)
                counts[a] -= 1
                counts[b] += 1
                labels[i] = b
                moved = True
        if trace is not None and moved:
            trace.append(float(np.sum((pts - centers[labels]) ** 2)))
        if not moved:
            break


def kmeans(points, k: int, cfg: ClusterConfig | None = None) -> ClusterModel:
    """Best-of-restarts k-means; hard model with one-hot responsibilities.

    Each restart runs Lloyd from greedy k-means++ seeds, a Hartigan
    refinement pass, then Lloyd again so the final assignment is a fixed
    point.  Raises TooFewPoints when n < k.  The restart with the lowest
    WCSS wins (earlier restart on exact ties); the winner's WCSS trace is
    non-increasing across every step.
    """
    cfg = cfg or ClusterConfig()
    pts = _as_points(points)
    n = pts.shape[0]
    if k < 1:
        raise ValueError("k must be >= 1")
    if n < k:
        raise TooFewPoints(f"{n} points cannot form {k} clusters")

    best: tuple[float, np.ndarray, np.ndarray, int, list[float]] | None = None
    for r in range(cfg.restarts):
        rng = np.random.default_rng([cfg.seed, r])
        trace: list[float] = []
        centers, labels, _, it = _lloyd(pts, _kmeanspp_seeds(pts, k, rng), cfg.max_iters, trace)
        _hartigan_refine(pts, centers, labels, trace)
        centers, labels, wcss, it2 = _lloyd(pts, centers, cfg.max_iters, trace)
        if best is None or wcss < best[0]:
            best = (wcss, centers.copy(), labels.copy(), it + it2, trace)

    wcss, centers, labels, it, trace = best
    resp = np.zeros((n, k))
    resp[np.arange(n), labels] = 1.0
    return ClusterModel(
        method="kmeans", k=k, means=centers, responsibilities=resp, wcss=wcss,
        wcss_trace=trace, n_iter=it,
    )


def _log_gauss(pts: np.ndarray, mean: np.ndarray, cov: np.ndarray) -> np.ndarray:
    """Log density of a 2-D Gaussian, evaluated with the explicit 2x2 inverse."""
    a, b, d = cov[0, 0], cov[0, 1], cov[1, 1]
    det = a * d - b * b
    dx = pts[:, 0] - mean[0]
    dy = pts[:, 1] - mean[1]
    quad = (d * dx * dx - 2.0 * b * dx * dy + a * dy * dy) / det
    return -_LOG_2PI - 0.5 * np.log(det) - 0.5 * quad


def _e_step(
    pts: np.ndarray, weights: np.ndarray, means: np.ndarray, covs: np.ndarray
) -> tuple[np.ndarray, float]:
    n, k = pts.shape[0], means.shape[0]
    log_p = np.empty((n, k))
    for j in range(k):
        log_p[:, j] = np.log(max(weights[j], 1e-300)) + _log_gauss(pts, means[j], covs[j])
    norm = logsumexp(log_p, axis=1)
    return np.exp(log_p - norm[:, None]), float(norm.sum())


def em_gmm(points, k: int, cfg: ClusterConfig | None = None) -> ClusterModel:
    """Full-covariance Gaussian-mixture fit by EM, best restart by likelihood.

    Initialization is k-means++ seeding followed by one k-means pass; every
    M step adds ``cov_floor`` to the covariance diagonals, so component
    eigenvalues never drop below the floor.  The log-likelihood trace is
    non-decreasing and exposed on the model for verification.

    Raises TooFewPoints (n < k) and DegenerateInput (all points identical
    with k >= 2).
    """
    cfg = cfg or ClusterConfig()
    pts = _as_points(points)
    n = pts.shape[0]
    if k < 1:
        raise ValueError("k must be >= 1")
    if n < k:
        raise TooFewPoints(f"{n} points cannot form {k} components")
    if k >= 2 and np.all(np.ptp(pts, axis=0) == 0.0):
        raise DegenerateInput("all points identical; mixture with k >= 2 is undefined")

    eye_floor = cfg.cov_floor * np.eye(2)
    best: ClusterModel | None = None
    for r in range(cfg.restarts):
        rng = np.random.default_rng([cfg.seed, r])
        means, labels, _, _ = _lloyd(pts, _kmeanspp_seeds(pts, k, rng), cfg.max_iters)
        weights = np.bincount(labels, minlength=k) / n
        covs = np.empty((k, 2, 2))
        for j in range(k):
            diff = pts[labels == j] - means[j]
            covs[j] = diff.T @ diff / max(len(diff), 1) + eye_floor

        trace: list[float] = []
        resp = np.ones((n, k)) / k
        for it in range(cfg.max_iters):
            resp, ll = _e_step(pts, weights, means, covs)
            trace.append(ll)
            if it > 0 and ll - trace[-2] < cfg.tol:
                break
            nk = resp.sum(axis=0)
            for j in range(k):
                if nk[j] < 1e-12:  # dead component: freeze its parameters
                    weights[j] = 0.0
                    continue
                weights[j] = nk[j] / n
                means[j] = resp[:, j] @ pts / nk[j]
                diff = pts - means[j]
                covs[j] = (resp[:, j] * diff.T) @ diff / nk[j] + eye_floor
        else:
            resp, ll = _e_step(pts, weights, means, covs)
            trace.append(ll)

        model = ClusterModel(
            method="em",
            k=k,
            means=means.copy(),
            responsibilities=resp,
            weights=weights.copy(),
            covariances=covs.copy(),
            log_likelihood=trace[-1],
            ll_trace=trace,
            n_iter=len(trace) - 1,
        )
        if best is None or model.log_likelihood > best.log_likelihood:
            best = model
    return best


def xb_index(points, model: ClusterModel, fuzzifier_m: float = 2.0, membership: str = "soft") -> float:
    """Xie-Beni validity index: compactness over n times min squared separation.

    XB = sum_k sum_i u_ik^m ||x_i - v_k||^2 / (n * min_{j!=l} ||v_j - v_l||^2),
    lower is better.  ``membership="hard"`` hardens soft responsibilities to
    argmax one-hot first; k-means models are hard already, so the exponent
    is a no-op for them.

    Raises UndefinedForK1 (k < 2) and DegenerateSeparation (coincident
    centers, min separation < 1e-12).
    """
    if model.k < 2:
        raise UndefinedForK1("Xie-Beni index is undefined for k < 2")
    pts = _as_points(points)
    n = pts.shape[0]
    u = model.responsibilities
    if membership == "hard" and model.method != "kmeans":
        hard = np.zeros_like(u)
        hard[np.arange(n), np.argmax(u, axis=1)] = 1.0
        u = hard

    sep = np.sum((model.means[:, None, :] - model.means[None, :, :]) ** 2, axis=2)
    min_sep_sq = float(np.min(sep[np.triu_indices(model.k, k=1)]))
    if min_sep_sq < 1e-12 ** 2:
        raise DegenerateSeparation("cluster centers coincide; separation term vanishes")

    d2 = np.sum((pts[:, None, :] - model.means[None, :, :]) ** 2, axis=2)
    compactness = float(np.sum(u ** fuzzifier_m * d2))
    return compactness / (n * min_sep_sq)


@dataclass(frozen=True)
class SweepEntry:
    k: int
    xb: float | None
    score: float | None  # log-likelihood (em) or wcss (kmeans)
    error: str | None = None


def select_k(
    points,
    k_min: int,
    k_max: int,
    cfg: ClusterConfig | None = None,
    method: str = "em",
    xb_membership: str = "soft",
) -> tuple[ClusterModel, list[SweepEntry]]:
    """Fit every k in [k_min, k_max] and return the Xie-Beni minimizer.

    Ties within 1e-9 go to the smaller k.  Individual k failures are
    recorded in the sweep table; NoValidModel is raised only when every
    candidate fails.
    """
    cfg = cfg or ClusterConfig()
    pts = _as_points(points)
    if not 2 <= k_min <= k_max:
        raise ValueError(f"need 2 <= k_min <= k_max, got [{k_min}, {k_max}]")
    if k_max > pts.shape[0]:
        raise TooFewPoints(f"k_max={k_max} exceeds point count {pts.shape[0]}")
    if method not in ("em", "kmeans"):
        raise ValueError(f"unknown method {method!r}")

    fit = em_gmm if method == "em" else kmeans
    table: list[SweepEntry] = []
    best: ClusterModel | None = None
    for k in range(k_min, k_max + 1):
        try:
            model = fit(pts, k, cfg)
            xb = xb_index(pts, model, cfg.fuzzifier_m, membership=xb_membership)
        except (TooFewPoints, DegenerateInput, DegenerateSeparation) as exc:
            table.append(SweepEntry(k=k, xb=None, score=None, error=exc.code))
            continue
        model.xb = xb
        model.xb_membership = "hard" if method == "kmeans" else xb_membership
        table.append(
            SweepEntry(k=k, xb=xb, score=model.log_likelihood if method == "em" else model.wcss)
        )
        if best is None or xb < best.xb - 1e-9:
            best = model
    if best is None:
        raise NoValidModel(f"no k in [{k_min}, {k_max}] produced a valid model")
    return best, table


def model_to_dict(model: ClusterModel, cfg: ClusterConfig | None = None) -> dict:
    """JSON-ready view of a model, with a config echo when given."""
    doc = {
        "method": model.method,
        "k": model.k,
        "means": model.means.tolist(),
        "responsibilities": model.responsibilities.tolist(),
        "weights": None if model.weights is None else model.weights.tolist(),
        "covariances": None if model.covariances is None else model.covariances.tolist(),
        "log_likelihood": model.log_likelihood,
        "ll_trace": model.ll_trace,
        "wcss": model.wcss,
        "wcss_trace": model.wcss_trace,
        "n_iter": model.n_iter,
        "xb": model.xb,
        "xb_membership": model.xb_membership,
        "labels": model.hard_labels().tolist(),
    }
    if cfg is not None:
        doc["config"] = {
            "max_iters": cfg.max_iters,
            "tol": cfg.tol,
            "restarts": cfg.restarts,
            "cov_floor": cfg.cov_floor,
            "seed": cfg.seed,
            "fuzzifier_m": cfg.fuzzifier_m,
        }
    return doc


def model_from_dict(doc: dict) -> ClusterModel:
    return ClusterModel(
        method=doc["method"],
        k=int(doc["k"]),
        means=np.asarray(doc["means"], dtype=float),
        responsibilities=np.asarray(doc["responsibilities"], dtype=float),
        weights=None if doc.get("weights") is None else np.asarray(doc["weights"], dtype=float),
        covariances=None
        if doc.get("covariances") is None
        else np.asarray(doc["covariances"], dtype=float),
        log_likelihood=doc.get("log_likelihood"),
        ll_trace=list(doc.get("ll_trace", [])),
        wcss=doc.get("wcss"),
        wcss_trace=list(doc.get("wcss_trace", [])),
        n_iter=int(doc.get("n_iter", 0)),
        xb=doc.get("xb"),
        xb_membership=doc.get("xb_membership"),
    )
