"""Shared fixtures, random instance builders and hypothesis strategies."""

from __future__ import annotations

import itertools
import random
from fractions import Fraction

import pytest
from hypothesis import strategies as st

from orsched.core import Instance, Piece, Schedule, build_instance, check_reachable

FIG1_JOBS = [
    ("j1", 1, 2), ("j2", 2, 1), ("j3", 2, 0), ("j4", 3, 0), ("j5", 2, 0),
    ("j6", 1, 4), ("j7", 2, 0), ("j8", 4, 0), ("k", 1, 0),
]
FIG1_EDGES = [
    ("j1", "j4"), ("j4", "j7"), ("j7", "k"), ("j2", "j6"), ("j6", "j8"), ("j8", "k"),
    ("j2", "j5"), ("j5", "j6"), ("j6", "j7"), ("j2", "j4"), ("j3", "j5"), ("j5", "j8"),
]
FIG1_COMPLETION = {"j1": 3, "j2": 3, "j3": 2, "j4": 6, "j5": 4, "j6": 5, "j7": 7, "j8": 8, "k": 8}


def fig1(machines: int = 3) -> Instance:
    return build_instance(machines, FIG1_JOBS, FIG1_EDGES)


@pytest.fixture
def fig1_inst() -> Instance:
    return fig1()


def by_name(inst: Instance, *names):
    return [inst.index[x] for x in names]


def rand_instance(rng: random.Random, n: int, m: int, p_max: int, r_max: int,
                  q: float = 0.3, dag: bool | None = None, unit: bool = False) -> Instance:
    """Random instance; ``dag=None`` picks DAG or arbitrary digraph at random."""
    if dag is None:
        dag = rng.random() < 0.5
    jobs = [(f"j{i}", 1 if unit else rng.randint(1, p_max), rng.randint(0, r_max)) for i in range(n)]
    if dag:
        label = list(range(n))
        rng.shuffle(label)
        pairs = [(label[a], label[b]) for a in range(n) for b in range(a + 1, n)]
    else:
        pairs = [(a, b) for a in range(n) for b in range(n) if a != b]
    edges = [(f"j{a}", f"j{b}") for a, b in pairs if rng.random() < q]
    return build_instance(m, jobs, edges)


def reachable_instances(seed: int, count: int, n_max: int, m_choices, p_max: int, r_max: int,
                        unit: bool = False, n_min: int = 1, max_sum_p: int | None = None):
    """``count`` reachable instances, mixing DAGs and cyclic digraphs, deterministically from ``seed``."""
    rng = random.Random(seed)
    out = []
    while len(out) < count:
        inst = rand_instance(rng, rng.randint(n_min, n_max), rng.choice(list(m_choices)), p_max, r_max,
                             q=rng.choice([0.15, 0.3, 0.5]), unit=unit)
        if not check_reachable(inst)[0]:
            continue
        if max_sum_p is not None and inst.total_processing > max_sum_p:
            continue
        out.append(inst)
    return out


@st.composite
def instances(draw, n_max=6, m_max=3, p_max=4, r_max=5, unit=False, reachable=True):
    n = draw(st.integers(1, n_max))
    m = draw(st.integers(1, m_max))
    p = [1] * n if unit else draw(st.lists(st.integers(1, p_max), min_size=n, max_size=n))
    r = draw(st.lists(st.integers(0, r_max), min_size=n, max_size=n))
    pairs = [(a, b) for a in range(n) for b in range(n) if a != b]
    mask = draw(st.lists(st.booleans(), min_size=len(pairs), max_size=len(pairs)))
    edges = [(f"j{a}", f"j{b}") for (a, b), keep in zip(pairs, mask) if keep]
    inst = build_instance(m, [(f"j{i}", p[i], r[i]) for i in range(n)], edges)
    if reachable and not check_reachable(inst)[0]:
        # cut every job with no live path off from its predecessors so the draw is still useful
        ok, missing = check_reachable(inst)
        edges = [(a, b) for a, b in edges if inst.index[b] not in missing]
        inst = build_instance(m, [(f"j{i}", p[i], r[i]) for i in range(n)], edges)
    return inst


def ess_schedule(inst: Instance, ess) -> Schedule:
    """The earliest start schedule drawn with one machine per job."""
    return Schedule(tuple(Piece(Fraction(ess.start[j]), Fraction(ess.completion[j]), j, j) for j in range(inst.n)))


def serial_sgs_optimum(inst: Instance) -> Fraction:
    """Independent non-preemptive optimum: serial generation over every job permutation.

    Each job in turn is inserted at the earliest time at or after its release and
    the first completion among already placed predecessors where fewer than
    ``m`` placed jobs overlap it. Lists sorted by start time reproduce any active
    schedule, and some active schedule is optimal.
    """
    best = None
    for perm in itertools.permutations(range(inst.n)):
        placed: dict[int, tuple[int, int]] = {}
        for j in perm:
            if inst.preds[j]:
                done = [placed[i][1] for i in inst.preds[j] if i in placed]
                if not done:
                    break
                est = max(inst.r[j], min(done))
            else:
                est = inst.r[j]
            candidates = sorted({est} | {e for _, e in placed.values() if e > est})
            for t in candidates:
                end = t + inst.p[j]
                # the busy count only rises at piece starts, so check t and every start inside
                points = [t] + [s for s, _ in placed.values() if t < s < end]
                if all(sum(1 for s, e in placed.values() if s <= x < e) < inst.machines for x in points):
                    placed[j] = (t, end)
                    break
        else:
            span = max(e for _, e in placed.values())
            if best is None or span < best:
                best = span
    return Fraction(best)
