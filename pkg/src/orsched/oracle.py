"""Exhaustive solvers and structural counters used to verify the fast algorithms.

Nothing here is meant for production sizes.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from fractions import Fraction

from .chains import ClosedCollection, EssResult, earliest_start_schedule
from .core import (
    ContractViolation, Instance, OrSchedError, Piece, Schedule, build_instance, makespan, require_reachable,
)
from .listsched import list_schedule, lpt_order


class OracleLimitError(OrSchedError, ValueError):
    """The instance is too large for the requested oracle."""


@dataclass(frozen=True)
class NonPreemptiveOptimum:
    opt: Fraction
    schedule: Schedule
    nodes: int


def _assign_machines(starts: dict[int, int], p, machines: int) -> Schedule:
    """Give each non-preemptive job a machine; at most ``machines`` overlap at any time."""
    free: list[tuple[int, int]] = [(0, m) for m in range(machines)]
    pieces = []
    for j in sorted(starts, key=lambda j: (starts[j], j)):
        s = starts[j]
        # any machine free by s will do; take the lowest index among them
        fit = [m for t, m in free if t <= s]
        if not fit:
            raise ContractViolation("witness schedule needs more machines than available")
        mach = min(fit)
        free = [(t, m) for t, m in free if m != mach] + [(s + p[j], mach)]
        pieces.append(Piece(Fraction(s), Fraction(s + p[j]), mach, j))
    return Schedule(tuple(pieces), preemptive=False)


def brute_nonpmtn(inst: Instance, max_n: int = 8) -> NonPreemptiveOptimum:
    """Optimal non-preemptive makespan by branch and bound over decision epochs.

    Epochs are 0, release dates and completions. At an epoch the search either
    starts one more available job on an idle machine (jobs started at the same
    epoch are chosen in increasing id to avoid permutations) or moves on to the
    next epoch, which covers schedules that idle on purpose. Every left-shifted
    schedule starts its jobs at epochs, so the search is exact.
    """
    if inst.n > max_n:
        raise OracleLimitError(f"non-preemptive oracle limited to {max_n} jobs, got {inst.n}")
    require_reachable(inst)
    n, m, p, r = inst.n, inst.machines, inst.p, inst.r
    ess = earliest_start_schedule(inst)
    pred_mask = [sum(1 << i for i in ps) for ps in inst.preds]
    full = (1 << n) - 1

    seed = list_schedule(inst, lpt_order(inst))
    best = [int(makespan(seed)), {pc.job: int(pc.start) for pc in seed.pieces}]
    seen: set = set()
    nodes = 0
    starts: dict[int, int] = {}

    def bound(t, todo, running):
        lb = max((e for e, _ in running), default=t)
        load = sum(e - t for e, _ in running)
        for j in range(n):
            if todo >> j & 1:
                load += p[j]
                lb = max(lb, max(t, r[j], ess.start[j]) + p[j])
        return max(lb, t + -(-load // m))

    def search(t, todo, running, last):
        nonlocal nodes
        nodes += 1
        if not todo:
            span = max((e for e, _ in running), default=t)
            if span < best[0]:
                best[0] = span
                best[1] = dict(starts)
            return
        if bound(t, todo, running) >= best[0]:
            return
        done = full & ~todo
        for _, j in running:
            done &= ~(1 << j)
        if len(running) < m:
            for j in range(last + 1, n):
                if todo >> j & 1 and r[j] <= t and (not pred_mask[j] or pred_mask[j] & done):
                    starts[j] = t
                    search(t, todo & ~(1 << j), tuple(sorted(running + ((t + p[j], j),))), j)
                    del starts[j]
        nxt = [e for e, _ in running]
        nxt.extend(r[j] for j in range(n) if todo >> j & 1 and r[j] > t)
        if not nxt:
            return
        t2 = min(nxt)
        still = tuple(x for x in running if x[0] > t2)
        key = (t2, todo, still)
        if key in seen:
            return
        seen.add(key)
        search(t2, todo, still, -1)

    search(0, full, (), -1)
    sched = _assign_machines(best[1], p, m)
    return NonPreemptiveOptimum(Fraction(best[0]), sched, nodes)


@dataclass(frozen=True)
class GridOptimum:
    opt: Fraction
    states: int
    refinement_checked: bool
    refined: Fraction | None = None

    @property
    def inconclusive(self) -> bool:
        return self.refinement_checked and self.refined != self.opt


def _grid_slots(inst: Instance, scale: int, horizon: int) -> tuple[int, int]:
    """Fewest slots of length ``1/scale`` that finish every job; returns ``(slots, states)``.

    Each layer keeps only Pareto-minimal remaining-work vectors: having done
    more of every job never hurts, because availability only grows with
    progress. For the same reason every slot runs ``min(m, #eligible)`` jobs.
    """
    n, m = inst.n, inst.machines
    rel = [x * scale for x in inst.r]
    layer = {tuple(x * scale for x in inst.p)}
    states = 0
    for slot in range(horizon + 1):
        states += len(layer)
        if any(not any(v) for v in layer):
            return slot, states
        nxt = set()
        for rem in layer:
            eligible = [
                j for j in range(n)
                if rem[j] and slot >= rel[j]
                and (not inst.preds[j] or any(rem[i] == 0 for i in inst.preds[j]))
            ]
            for combo in itertools.combinations(eligible, min(m, len(eligible))):
                new = list(rem)
                for j in combo:
                    new[j] -= 1
                nxt.add(tuple(new))
        layer = _pareto(nxt)
    raise ContractViolation(f"grid search passed the list-scheduling horizon {horizon}")


def _pareto(vectors) -> set:
    keep: list[tuple] = []
    for v in sorted(vectors, key=sum):
        if not any(all(a <= b for a, b in zip(w, v)) for w in keep):
            keep.append(v)
    return set(keep)


def brute_pmtn_grid(
    inst: Instance,
    k: int = 1,
    max_n: int = 5,
    max_m: int = 3,
    max_sum_p: int = 12,
    refine: bool = True,
) -> GridOptimum:
    """Optimal preemptive makespan over schedules that switch only at multiples of ``1/(k m)``.

    With ``refine`` the search is repeated at ``1/(2 k m)``; a different answer
    marks the result inconclusive rather than trusting either value.
    """
    if inst.n > max_n or inst.machines > max_m or inst.total_processing > max_sum_p:
        raise OracleLimitError(
            f"grid oracle limited to n <= {max_n}, m <= {max_m}, sum p <= {max_sum_p}"
        )
    if k < 1:
        raise ValueError("granularity multiplier must be >= 1")
    require_reachable(inst)
    cap = int(makespan(list_schedule(inst, lpt_order(inst))))
    scale = k * inst.machines
    slots, states = _grid_slots(inst, scale, cap * scale)
    opt = Fraction(slots, scale)
    if not refine:
        return GridOptimum(opt, states, False)
    slots2, states2 = _grid_slots(inst, 2 * scale, cap * 2 * scale)
    return GridOptimum(opt, states + states2, True, Fraction(slots2, 2 * scale))


@dataclass(frozen=True)
class UnitExpansion:
    """Each job ``j`` split into a chain of ``p_j`` unit jobs.

    ``origin[u] = (j, q)`` says unit job ``u`` is the ``q``-th (1-based) unit of ``j``;
    ``last[j]`` is the unit job that finishes ``j``.
    """

    instance: Instance
    origin: tuple[tuple[int, int], ...]
    last: tuple[int, ...]


def expand_to_unit_jobs(inst: Instance) -> UnitExpansion:
    jobs, edges, origin, last, first = [], [], [], [], []
    for j in range(inst.n):
        first.append(len(jobs))
        for q in range(1, inst.p[j] + 1):
            u = len(jobs)
            jobs.append((f"{inst.names[j]}#{q}", 1, inst.r[j]))
            origin.append((j, q))
            if q > 1:
                edges.append((jobs[u - 1][0], jobs[u][0]))
        last.append(len(jobs) - 1)
    for i, j in inst.edges:
        edges.append((jobs[last[i]][0], jobs[first[j]][0]))
    return UnitExpansion(build_instance(inst.machines, jobs, edges), tuple(origin), tuple(last))


@dataclass(frozen=True)
class InversionCount:
    count: int
    pairs: tuple[tuple[int, int], ...]


def count_inversions(sched: Schedule, collection: ClosedCollection) -> InversionCount:
    """Pairs ``(i, j)`` with ``i`` on ``j``'s chain, ``i != j`` and ``C_i >= C_j``."""
    done = sched.completion_times()
    pairs = []
    for j in collection:
        if j not in done:
            continue
        for i in collection.path(j)[:-1]:
            if i in done and done[i] >= done[j]:
                pairs.append((i, j))
    return InversionCount(len(pairs), tuple(pairs))


def enumerate_minimal_chains(inst: Instance, ess: EssResult, k: int) -> list[tuple[int, ...]]:
    """Every path satisfying the minimal-chain characterisation for ``k``. Debug only."""
    out = []

    def back(path):
        head = path[0]
        if not inst.preds[head]:
            if ess.start[head] == inst.r[head]:
                out.append(tuple(path))
            return
        for i in inst.preds[head]:
            if i not in path and ess.start[head] == max(inst.r[head], ess.completion[i]):
                back([i] + path)

    back([k])
    return sorted(out)


def ess_reference(inst: Instance) -> tuple[list[float], list[float]]:
    """Naive fixpoint iteration of the earliest start recursion, O(n |E|) per sweep."""
    inf = float("inf")
    comp = [inf] * inst.n
    changed = True
    while changed:
        changed = False
        for j in range(inst.n):
            if inst.preds[j]:
                s = max(inst.r[j], min(comp[i] for i in inst.preds[j]))
            else:
                s = inst.r[j]
            c = s + inst.p[j]
            if c < comp[j]:
                comp[j] = c
                changed = True
    return [c - p for c, p in zip(comp, inst.p)], comp

