"""Seeded random instances for tests, benchmarks and report corpora."""

from __future__ import annotations

import math
import random
from dataclasses import dataclass

from .core import Instance, build_instance


@dataclass(frozen=True)
class GenSpec:
    """Parameters of a random instance; ``p`` is drawn from ``[1, p_max]``, ``r`` from ``[0, r_max]``."""

    n: int
    m: int
    q: float = 0.3
    p_max: int = 5
    r_max: int = 0
    seed: int = 0
    dag_only: bool = True

    def __post_init__(self):
        if self.n < 0:
            raise ValueError("n must be non-negative")
        if self.m < 1:
            raise ValueError("m must be at least 1")
        if not 0.0 <= self.q <= 1.0:
            raise ValueError("edge probability must lie in [0, 1]")
        if self.p_max < 1:
            raise ValueError("p_max must be at least 1")
        if self.r_max < 0:
            raise ValueError("r_max must be non-negative")


def _chosen(rng: random.Random, total: int, q: float):
    """Indices in ``range(total)``, each kept independently with probability ``q``.

    Jumps between kept indices are geometric, so the cost is proportional to
    the number kept rather than to ``total``.
    """
    if q <= 0.0:
        return
    if q >= 1.0:
        yield from range(total)
        return
    log_miss = math.log1p(-q)
    k = -1
    while True:
        k += 1 + int(math.log(1.0 - rng.random()) / log_miss)
        if k >= total:
            return
        yield k


def generate_instance(spec: GenSpec) -> Instance:
    """Sample an instance; identical specs give identical instances.

    With ``dag_only`` jobs get a random topological labelling and each arc from
    an earlier to a later label appears with probability ``q``, so every job is
    reachable (the first label has no predecessors). Otherwise every ordered
    pair is an arc with probability ``q`` and cycles may cut jobs off.
    """
    rng = random.Random(spec.seed)
    n = spec.n
    names = [f"j{i + 1}" for i in range(n)]
    jobs = [(name, rng.randint(1, spec.p_max), rng.randint(0, spec.r_max)) for name in names]
    edges = []
    if spec.dag_only:
        label = list(range(n))
        rng.shuffle(label)
        # index k enumerates label pairs (a, b) with a < b, grouped by b
        for k in _chosen(rng, n * (n - 1) // 2, spec.q):
            b = (1 + math.isqrt(1 + 8 * k)) // 2
            a = k - b * (b - 1) // 2
            edges.append((names[label[a]], names[label[b]]))
    else:
        for k in _chosen(rng, n * (n - 1), spec.q):
            a, rest = divmod(k, n - 1)
            b = rest + (rest >= a)
            edges.append((names[a], names[b]))
    return build_instance(spec.m, jobs, edges)
