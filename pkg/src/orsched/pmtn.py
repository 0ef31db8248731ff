"""Exact preemptive scheduling through the minimal-chain outforest.

Pipeline: earliest start schedule, closed collection of minimal chains, drop
every arc that is not the chain arc into its head (the rest is an outforest on
which OR and AND precedence agree), then solve the outforest instance exactly.

The outforest is solved in reversed time. Reversed, it is an intree whose job
``j`` must finish by ``T - rho_j``; all jobs are free from reversed time 0 once
their original children are done. Minimising ``max_j (rho_j + reversed
completion_j)`` is a maximum-lateness problem on an intree, solved by level
scheduling with processor sharing where a job's level is ``rho_j + remaining_j``.
Reading the reversed schedule backwards from ``T`` gives the forward schedule.
"""

from __future__ import annotations

import heapq
from collections import deque
from dataclasses import dataclass, replace
from fractions import Fraction
from functools import cached_property
from itertools import count

from .chains import ClosedCollection, EssResult, closed_collection, earliest_start_schedule
from .core import SOURCE, ContractViolation, Instance, InstanceError, OrSchedError, Piece, Schedule, makespan


class CollectionError(OrSchedError, ValueError):
    """A chain collection cannot be used to build an outforest."""


class NonUnitError(InstanceError):
    """The unit-time solver was given a job with ``p != 1``."""


@dataclass(frozen=True, eq=False)
class OutforestInstance:
    """The instance after dropping arcs not in line with the collection.

    ``instance`` has the original jobs with ``preds[j] == (parent[j],)`` or ``()``.
    """

    instance: Instance
    parent: tuple[int, ...]
    collection: ClosedCollection
    dropped_arcs: tuple[tuple[int, int], ...]

    @cached_property
    def children(self) -> tuple[tuple[int, ...], ...]:
        return self.instance.succs

    @cached_property
    def topological(self) -> tuple[int, ...]:
        """Jobs ordered roots first, breadth first."""
        queue = deque(j for j, q in enumerate(self.parent) if q == SOURCE)
        out = []
        while queue:
            j = queue.popleft()
            out.append(j)
            queue.extend(self.children[j])
        return tuple(out)


def transform_to_outforest(inst: Instance, collection: ClosedCollection) -> OutforestInstance:
    """Keep, for every job, only the arc from its predecessor on its own chain."""
    if not collection.covers():
        raise CollectionError("collection does not cover every job")
    bad = collection.invalid_chains()
    if bad:
        raise CollectionError(f"not minimal chains for jobs {bad}")
    if not collection.is_closed():
        raise CollectionError("collection is not closed")

    parent = tuple(collection.predecessor(j) for j in range(inst.n))
    preds = tuple(() if q == SOURCE else (q,) for q in parent)
    dropped = tuple((i, j) for i, j in inst.edges if i != parent[j])
    return OutforestInstance(replace(inst, preds=preds), parent, collection, dropped)


def modified_starts(of: OutforestInstance) -> tuple[int, ...]:
    """``rho_j = max(r_j, rho_parent + p_parent)``; equals the ESS starts on the outforest."""
    inst = of.instance
    rho = [0] * inst.n
    for j in of.topological:
        q = of.parent[j]
        rho[j] = inst.r[j] if q == SOURCE else max(inst.r[j], rho[q] + inst.p[q])
    return tuple(rho)


def capacity_bound(p, rho, machines: int) -> Fraction:
    """``max_u u + (1/m) sum_j max(0, p_j - max(0, u - rho_j))`` over all breakpoints.

    The bracket is the work of ``j`` that cannot be done before ``u``. The
    function is piecewise linear, so a sweep over sorted breakpoints suffices.
    """
    if not p:
        return Fraction(0)
    delta: dict[int, int] = {}
    for pj, rj in zip(p, rho):
        delta[rj] = delta.get(rj, 0) - 1
        delta[rj + pj] = delta.get(rj + pj, 0) + 1
    delta.setdefault(0, 0)
    work = sum(p)
    slope = 0
    prev = 0
    best = None
    for u in sorted(delta):
        work += slope * (u - prev)
        prev = u
        slope += delta[u]
        value = machines * u + work
        if best is None or value > best:
            best = value
    return Fraction(best, machines)


def pmtn_optimum_value(of: OutforestInstance) -> Fraction:
    """Optimal preemptive makespan of the outforest instance."""
    return capacity_bound(of.instance.p, modified_starts(of), of.instance.machines)


class _Group:
    """Jobs sharing one level; ``key`` is the common ``rho + remaining``."""

    __slots__ = ("key", "members", "low")

    def __init__(self, key: Fraction, job: int, rho: int):
        self.key = key
        self.members = [(-rho, job)]  # the member with the largest rho runs out first
        self.low = job

    def absorb(self, other: _Group):
        if len(other.members) > len(self.members):
            self.members, other.members = other.members, self.members
        for item in other.members:
            heapq.heappush(self.members, item)
        self.low = min(self.low, other.low)


def _reverse_levels(p, rho, parent, children, machines):
    """Level schedule of the reversed intree.

    Returns ``(segments, done)``: each segment is ``(t0, t1, [(job, amount), ...])``
    in reversed time and ``done[j]`` is the reversed completion of ``j``.
    """
    n = len(p)
    pending = [len(c) for c in children]
    done: list[Fraction | None] = [None] * n
    tick = count()
    queue: list = []

    def push(g: _Group):
        heapq.heappush(queue, (-g.key, g.low, next(tick), g))

    for j in range(n):
        if not pending[j]:
            push(_Group(Fraction(rho[j] + p[j]), j, rho[j]))

    segments = []
    now = Fraction(0)
    while queue:
        # take the highest levels until every machine is spoken for
        active: list[_Group] = []
        left = machines
        while queue and left > 0:
            g = heapq.heappop(queue)[3]
            while queue and queue[0][0] == -g.key:
                g.absorb(heapq.heappop(queue)[3])
            active.append(g)
            left -= len(g.members)
        below = queue[0][3] if queue else None

        rates = []
        left = machines
        for g in active:
            k = len(g.members)
            if k <= left:
                rates.append(Fraction(1))
                left -= k
            else:
                rates.append(Fraction(left, k))
                left = 0

        step = None
        for g, rate in zip(active, rates):
            d = (g.key + g.members[0][0]) / rate
            if step is None or d < step:
                step = d
        for (g, ra), (h, rb) in zip(zip(active, rates), zip(active[1:], rates[1:])):
            if ra > rb:
                step = min(step, (g.key - h.key) / (ra - rb))
        if below is not None:
            step = min(step, (active[-1].key - below.key) / rates[-1])

        work = []
        for g, rate in zip(active, rates):
            amount = rate * step
            work.extend((j, amount) for _, j in g.members)
            g.key -= amount
        segments.append((now, now + step, work))
        now += step

        for g in active:
            while g.members and -g.members[0][0] == g.key:
                _, j = heapq.heappop(g.members)
                done[j] = now
                q = parent[j]
                if q != SOURCE:
                    pending[q] -= 1
                    if not pending[q]:
                        push(_Group(Fraction(rho[q] + p[q]), q, rho[q]))
            if g.members:
                g.low = min(j for _, j in g.members)
                push(g)

    return segments, done


def _wrap(t0: Fraction, t1: Fraction, work, machines: int):
    """McNaughton wrap-around of ``work`` (amounts at most ``t1 - t0``) into one segment."""
    out = []
    mach = 0
    pos = t0
    for j, amount in sorted(work):
        if pos + amount <= t1:
            out.append((j, mach, pos, pos + amount))
            pos += amount
        else:
            head = t1 - pos
            if head > 0:
                out.append((j, mach, pos, t1))
            mach += 1
            pos = t0 + (amount - head)
            out.append((j, mach, t0, pos))
        if pos == t1:
            mach += 1
            pos = t0
    if mach > machines or (mach == machines and pos > t0):
        raise ContractViolation("segment work exceeds machine capacity")
    return out


def _merge_touching(pieces: list[Piece]) -> list[Piece]:
    pieces.sort(key=lambda pc: (pc.job, pc.machine, pc.start))
    out: list[Piece] = []
    for pc in pieces:
        last = out[-1] if out else None
        if last is not None and last.job == pc.job and last.machine == pc.machine and last.end == pc.start:
            out[-1] = Piece(last.start, pc.end, pc.machine, pc.job)
        else:
            out.append(pc)
    return out


@dataclass(frozen=True, eq=False)
class PmtnResult:
    schedule: Schedule
    t_star: Fraction
    outforest: OutforestInstance
    ess: EssResult
    segments: int

    @property
    def collection(self) -> ClosedCollection:
        return self.outforest.collection

    @property
    def dropped_arcs(self) -> tuple[tuple[int, int], ...]:
        return self.outforest.dropped_arcs


def solve_pmtn(inst: Instance) -> PmtnResult:
    """Optimal preemptive schedule. Raises :class:`ContractViolation` if it misses ``T*``."""
    ess = earliest_start_schedule(inst)
    of = transform_to_outforest(inst, closed_collection(inst, ess))
    rho = modified_starts(of)
    t_star = capacity_bound(inst.p, rho, inst.machines)

    segments, done = _reverse_levels(inst.p, rho, of.parent, of.children, inst.machines)
    horizon = max((Fraction(rho[j]) + done[j] for j in range(inst.n)), default=Fraction(0))
    if horizon != t_star:
        raise ContractViolation(f"level schedule reaches {horizon}, capacity bound is {t_star}")

    pieces = []
    for t0, t1, work in segments:
        for j, mach, a, b in _wrap(t0, t1, work, inst.machines):
            pieces.append(Piece(horizon - b, horizon - a, mach, j))
    sched = Schedule(tuple(_merge_touching(pieces)), preemptive=True)
    if makespan(sched) != t_star:
        raise ContractViolation(f"schedule makespan {makespan(sched)} differs from T* = {t_star}")
    return PmtnResult(sched, t_star, of, ess, len(segments))


def solve_unit_nonpreemptive(inst: Instance) -> Schedule:
    """Optimal non-preemptive schedule when every job has ``p = 1``.

    Reversed, the outforest is an intree of unit jobs with due dates ``-rho_j``;
    filling each reversed slot with up to ``m`` ready jobs of largest ``rho``
    minimises the maximum lateness, which is the forward makespan.
    """
    bad = [inst.names[j] for j in range(inst.n) if inst.p[j] != 1]
    if bad:
        raise NonUnitError(f"jobs with p != 1: {bad}", bad[0])
    ess = earliest_start_schedule(inst)
    of = transform_to_outforest(inst, closed_collection(inst, ess))
    rho = modified_starts(of)

    pending = [len(c) for c in of.children]
    ready = [(-rho[j], j) for j in range(inst.n) if not pending[j]]
    heapq.heapify(ready)
    slot_of = [0] * inst.n
    mach_of = [0] * inst.n
    slot = 0
    while ready:
        batch = [heapq.heappop(ready)[1] for _ in range(min(inst.machines, len(ready)))]
        for mach, j in enumerate(batch):
            slot_of[j] = slot
            mach_of[j] = mach
        for j in batch:
            q = of.parent[j]
            if q != SOURCE:
                pending[q] -= 1
                if not pending[q]:
                    heapq.heappush(ready, (-rho[q], q))
        slot += 1

    horizon = max((rho[j] + slot_of[j] + 1 for j in range(inst.n)), default=0)
    pieces = [
        Piece(Fraction(horizon - slot_of[j] - 1), Fraction(horizon - slot_of[j]), mach_of[j], j)
        for j in range(inst.n)
    ]
    return Schedule(tuple(pieces), preemptive=False)
