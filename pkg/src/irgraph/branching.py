"""Multi-type Poisson Galton-Watson process attached to a lambda/n model.

A type-k particle has independent Poi(M[k][l]) children of each type l,
with M = lambda * Lambda. ``q_k`` below is always the *extinction*
probability from one type-k ancestor; the giant fraction is
``sum_k a_k (1 - q_k)``.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import NoConvergence
from .model import LambdaOverN, ValidatedModel
from .spectral import mean_matrix


@dataclass(frozen=True)
class OffspringMeans:
    M: np.ndarray

    @property
    def m(self):
        return self.M.shape[0]


@dataclass(frozen=True)
class ExtinctionVector:
    q: np.ndarray
    converged: bool
    iterations: int


@dataclass(frozen=True)
class BranchingOutcome:
    extinct: bool
    total_progeny: int
    generations: int
    per_type: np.ndarray


def offspring_means(model: ValidatedModel, lam: float | None = None) -> OffspringMeans:
    if lam is None:
        if not isinstance(model.schedule, LambdaOverN):
            raise ValueError("offspring means need a lambda/n schedule or an explicit lam")
        lam = model.schedule.lam
    return OffspringMeans(lam * mean_matrix(model).entries)


def _means(M):
    return np.atleast_2d(np.asarray(M.M if isinstance(M, OffspringMeans) else M, dtype=float))


def extinction_iterates(M):
    """Yield q0 = 0, q1, q2, ... of q <- exp(M (q - 1)); non-decreasing componentwise."""
    M = _means(M)
    q = np.zeros(M.shape[0])
    while True:
        yield q
        q = np.exp(M @ (q - 1.0))


def extinction_probabilities(M, tol: float = 1e-13, max_iter: int = 1_000_000) -> ExtinctionVector:
    """Minimal fixed point of q = exp(M (q - 1)) on [0, 1]^m, reached from q = 0."""
    it = extinction_iterates(M)
    prev = next(it)
    for i in range(1, max_iter + 1):
        q = next(it)
        if np.abs(q - prev).max() < tol:
            return ExtinctionVector(np.minimum(q, 1.0), True, i)
        prev = q
    raise NoConvergence(f"extinction iteration did not converge in {max_iter} steps", last=prev)


def giant_fraction(q, a) -> tuple[float, np.ndarray]:
    q = q.q if isinstance(q, ExtinctionVector) else np.asarray(q, dtype=float)
    per_type = np.asarray(a, dtype=float) * (1.0 - q)
    return float(per_type.sum()), per_type


def simulate_branching(M, start_type: int, rng: np.random.Generator,
                       progeny_cap: int = 10_000) -> BranchingOutcome:
    """One realisation, generation by generation.

    The children of a whole generation are drawn at once: the type-l count
    is Poi(sum_k Z_k M[k][l]), the law of a sum of independent Poissons.
    Runs exceeding ``progeny_cap`` total particles are censored as surviving.
    """
    if progeny_cap < 1:
        raise ValueError("progeny_cap must be >= 1")
    M = _means(M)
    z = np.zeros(M.shape[0], dtype=np.int64)
    z[start_type] = 1
    per_type = z.copy()
    generations = 0
    while True:
        if per_type.sum() > progeny_cap:
            return BranchingOutcome(False, int(per_type.sum()), generations, per_type)
        children = rng.poisson(z @ M)
        if children.sum() == 0:
            return BranchingOutcome(True, int(per_type.sum()), generations, per_type)
        z = children
        per_type += children
        generations += 1


def simulate_branching_batch(M, start_type: int, replicas: int, rng: np.random.Generator,
                             progeny_cap: int = 10_000) -> dict:
    """Vectorised :func:`simulate_branching` over independent replicas.

    Returns arrays ``extinct``, ``total_progeny`` and ``generations``.
    """
    M = _means(M)
    m = M.shape[0]
    z = np.zeros((replicas, m), dtype=np.int64)
    z[:, start_type] = 1
    total = np.ones(replicas, dtype=np.int64)
    generations = np.zeros(replicas, dtype=np.int64)
    extinct = np.zeros(replicas, dtype=bool)
    live = np.arange(replicas)
    while live.size:
        censored = total[live] > progeny_cap
        live = live[~censored]
        if not live.size:
            break
        children = rng.poisson(z[live] @ M)
        size = children.sum(axis=1)
        dead = size == 0
        extinct[live[dead]] = True
        grow = live[~dead]
        z[grow] = children[~dead]
        total[grow] += size[~dead]
        generations[grow] += 1
        live = grow
    return {"extinct": extinct, "total_progeny": total, "generations": generations}
