from __future__ import annotations

import logging
from typing import Callable, Optional

import numpy as np

from helpers.distance import pairwise_distances
from helpers.membership import memberships_from_distances, weighted_means
from models.errors import ConfigError, DegenerateClusterError, DegenerateDistanceError
from models.models import Centroids, ClusterConfig, ClusterResult, Dataset, PartitionMatrix

log = logging.getLogger(__name__)

# (objects, centroids, distances) -> c x n memberships
MembershipStep = Callable[[np.ndarray, np.ndarray, np.ndarray], np.ndarray]


# -----------------------------------------------------------------------------
# Initialization and degenerate-state repair
# -----------------------------------------------------------------------------
def init_centroids(ds: Dataset, c: int, seed: int) -> Centroids:
    """c distinct objects, chosen by a seeded shuffle, as starting prototypes."""
    if c > ds.n:
        raise ConfigError(f"c exceeds n: c={c}, n={ds.n}")
    picks = np.random.default_rng(seed).permutation(ds.n)[:c]
    return Centroids(v=ds.objects[picks])


def _farthest_object(objects: np.ndarray, centers: np.ndarray, cfg: ClusterConfig) -> int:
    nearest = pairwise_distances(objects, centers, cfg.distance).min(axis=0)
    return int(np.argmax(nearest))


def _reseed(objects: np.ndarray, v: np.ndarray, clusters, cfg: ClusterConfig, why: str) -> int:
    for i in clusters:
        others = np.delete(v, i, axis=0)
        j = _farthest_object(objects, others if len(others) else v, cfg)
        log.warning("Reseeding centroid %d at object %d (%s)", i, j, why)
        v[i] = objects[j]
    return len(clusters)


def _coincident(v: np.ndarray) -> list[int]:
    """Indices of centroids equal to an earlier one."""
    dup = []
    for k in range(1, len(v)):
        if any(np.array_equal(v[k], v[i]) for i in range(k) if i not in dup):
            dup.append(k)
    return dup


def _objective(u: np.ndarray, dist: np.ndarray, m: float) -> float:
    return float(np.sum(u ** m * dist ** 2))


# -----------------------------------------------------------------------------
# Shared alternating loop
# -----------------------------------------------------------------------------
def _check(ds: Dataset, cfg: ClusterConfig) -> None:
    if ds.n < 1:
        raise ConfigError("empty dataset")
    if cfg.c > ds.n:
        raise ConfigError(f"c exceeds n: c={cfg.c}, n={ds.n}")
    if not ds.normalized:
        log.warning("Clustering a dataset that is not min-max normalized")


def _run(ds: Dataset, cfg: ClusterConfig, step: MembershipStep,
         final_step: Optional[MembershipStep] = None) -> ClusterResult:
    _check(ds, cfg)
    x = ds.objects
    v = np.array(init_centroids(ds, cfg.c, cfg.seed).v)

    dist = pairwise_distances(x, v, cfg.distance)
    if cfg.c > 1 and not dist.any():
        raise DegenerateDistanceError("every object-centroid distance is zero; check the feature weights")
    reseeds = _reseed(x, v, _coincident(v), cfg, "coincident at init")

    trace: list[float] = []
    converged = False
    iterations = 0
    for iterations in range(1, cfg.max_iter + 1):
        dist = pairwise_distances(x, v, cfg.distance)
        if cfg.c > 1 and not dist.any():
            raise DegenerateDistanceError("every object-centroid distance collapsed to zero")
        u = step(x, v, dist)
        trace.append(_objective(u, dist, cfg.m))

        try:
            v_new = weighted_means(x, u, cfg.m)
        except DegenerateClusterError as e:
            v_new = weighted_means(x, u, cfg.m, strict=False)
            reseeds += _reseed(x, v_new, e.clusters, cfg, "all-zero memberships")
        dup = _coincident(v_new)
        if dup:
            reseeds += _reseed(x, v_new, dup, cfg, "coincident centroids")

        shift = float(np.max(np.sum((v_new - v) ** 2, axis=1)))
        log.debug("iteration %d: max squared shift %.3e", iterations, shift)
        v = v_new
        if shift < cfg.epsilon:
            converged = True
            break

    dist = pairwise_distances(x, v, cfg.distance)
    u = (final_step or step)(x, v, dist)
    objective = _objective(u, dist, cfg.m)
    if not converged:
        log.warning("%s stopped at max_iter=%d without converging", cfg.algorithm, cfg.max_iter)
    log.info("%s finished: iterations=%d converged=%s objective=%.6g",
             cfg.algorithm, iterations, converged, objective)
    return ClusterResult(
        pm=PartitionMatrix(u=u, regime="bfpm"),
        cents=Centroids(v=v),
        iterations=iterations,
        converged=converged,
        objective=objective,
        objective_trace=trace,
        reseeds=reseeds,
        config=cfg,
    )


def _plain_step(cfg: ClusterConfig) -> MembershipStep:
    def step(x, v, dist):
        return memberships_from_distances(dist, cfg.m, cfg.raw_exponent)
    return step


def feature_memberships(objects: np.ndarray, centers: np.ndarray, u_prime: np.ndarray) -> np.ndarray:
    """
    Second-step memberships u'' from per-feature agreement.

    W_if = max(0, 1 - |V_if - O_jf|). When strictly more than half of the
    features have W > 0.5 and the distance-based u' is below 0.5, u'' is the
    mean of W over all features; otherwise it is 0.
    """
    weights = np.clip(1.0 - np.abs(centers[:, None, :] - objects[None, :, :]), 0.0, None)
    d = objects.shape[1]
    agree = (weights > 0.5).sum(axis=2) > d / 2
    fire = agree & (u_prime < 0.5)
    return np.where(fire, weights.mean(axis=2), 0.0)


def _merged_step(cfg: ClusterConfig) -> MembershipStep:
    plain = _plain_step(cfg)

    def step(x, v, dist):
        u_prime = plain(x, v, dist)
        return np.maximum(u_prime, feature_memberships(x, v, u_prime))
    return step


# -----------------------------------------------------------------------------
# Drivers
# -----------------------------------------------------------------------------
def run_fpm(ds: Dataset, cfg: ClusterConfig) -> ClusterResult:
    return _run(ds, cfg, _plain_step(cfg))


def run_fpm1(ds: Dataset, cfg: ClusterConfig) -> ClusterResult:
    """FPM with the feature-agreement step merged into every iteration."""
    return _run(ds, cfg, _merged_step(cfg))


def run_fpm2(ds: Dataset, cfg: ClusterConfig) -> ClusterResult:
    """FPM loop on u' only; the feature-agreement step runs once at the end."""
    return _run(ds, cfg, _plain_step(cfg), final_step=_merged_step(cfg))


def run_bfpm(ds: Dataset, cfg: ClusterConfig) -> ClusterResult:
    if cfg.distance.family != "lp" or cfg.distance.p != 2 or cfg.distance.root != 2:
        raise ConfigError("bfpm runs on the Euclidean distance; use bfpm_wfd for weighted features")
    return _run(ds, cfg, _plain_step(cfg))


def run_bfpm_wfd(ds: Dataset, cfg: ClusterConfig) -> ClusterResult:
    if cfg.distance.family not in ("wfd", "pwfd"):
        raise ConfigError("bfpm_wfd needs a wfd or pwfd distance")
    return _run(ds, cfg, _plain_step(cfg))


DRIVERS = {
    "fpm": run_fpm,
    "fpm1": run_fpm1,
    "fpm2": run_fpm2,
    "bfpm": run_bfpm,
    "bfpm_wfd": run_bfpm_wfd,
}


def run_clustering(ds: Dataset, cfg: ClusterConfig) -> ClusterResult:
    try:
        driver = DRIVERS[cfg.algorithm]
    except KeyError:
        raise ConfigError(f"unknown algorithm '{cfg.algorithm}'")
    return driver(ds, cfg)
