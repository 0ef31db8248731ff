"""List Scheduling under OR-precedence and release dates, with its ratio certificate."""

from __future__ import annotations

import heapq
import random
from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

from .chains import EssResult
from .core import ContractViolation, InfeasibleError, Instance, Piece, Schedule, makespan

_DONE, _RELEASE = 0, 1


def _check_order(inst: Instance, order: Sequence[int]) -> list[int]:
    order = list(order)
    if sorted(order) != list(range(inst.n)):
        raise ValueError("priority order must be a permutation of the jobs")
    return order


def lpt_order(inst: Instance) -> tuple[int, ...]:
    """Non-increasing processing time, ties broken by smaller id."""
    return tuple(sorted(range(inst.n), key=lambda j: (-inst.p[j], j)))


def input_order(inst: Instance) -> tuple[int, ...]:
    return tuple(range(inst.n))


def random_order(inst: Instance, seed: int) -> tuple[int, ...]:
    order = list(range(inst.n))
    random.Random(seed).shuffle(order)
    return tuple(order)


def parse_order(inst: Instance, policy: str) -> tuple[int, ...]:
    """Resolve ``lpt``, ``input`` or ``random:<seed>`` to a priority order."""
    if policy == "lpt":
        return lpt_order(inst)
    if policy == "input":
        return input_order(inst)
    if policy.startswith("random:"):
        try:
            seed = int(policy.split(":", 1)[1])
        except ValueError:
            raise ValueError(f"bad random order seed in {policy!r}") from None
        return random_order(inst, seed)
    raise ValueError(f"unknown order policy {policy!r}")


def list_schedule(inst: Instance, order: Sequence[int] | None = None) -> Schedule:
    """Whenever a machine is idle, start the first available job in ``order``.

    Event driven: at each instant completions are applied first, then releases,
    then idle machines (lowest index first) take available jobs in priority
    order. A job becomes available once it is released and, unless it has no
    predecessors, one of them has completed; availability never expires, so
    available jobs sit in a heap keyed by priority.
    """
    order = _check_order(inst, lpt_order(inst) if order is None else order)
    rank = [0] * inst.n
    for k, j in enumerate(order):
        rank[j] = k

    unlocked = [not ps for ps in inst.preds]
    events = [(inst.r[j], _RELEASE, j, 0) for j in range(inst.n) if unlocked[j]]
    heapq.heapify(events)
    idle = list(range(inst.machines))
    ready: list[tuple[int, int]] = []
    pieces = []
    started = 0

    while events:
        t = events[0][0]
        while events and events[0][0] == t:
            _, kind, a, b = heapq.heappop(events)
            if kind == _DONE:
                heapq.heappush(idle, b)
                for j in inst.succs[a]:
                    if not unlocked[j]:
                        unlocked[j] = True
                        if inst.r[j] <= t:
                            heapq.heappush(ready, (rank[j], j))
                        else:
                            heapq.heappush(events, (inst.r[j], _RELEASE, j, 0))
            else:
                heapq.heappush(ready, (rank[a], a))
        while idle and ready:
            _, j = heapq.heappop(ready)
            mach = heapq.heappop(idle)
            end = t + inst.p[j]
            pieces.append(Piece(Fraction(t), Fraction(end), mach, j))
            heapq.heappush(events, (end, _DONE, j, mach))
            started += 1

    if started != inst.n:
        scheduled = {pc.job for pc in pieces}
        raise InfeasibleError((j for j in range(inst.n) if j not in scheduled), inst.names)
    return Schedule(tuple(pieces), preemptive=False)


def all_idle_time(inst: Instance, sched: Schedule) -> Fraction:
    """Total time in ``[0, C_max]`` during which no machine is running."""
    busy = Fraction(0)
    reach = Fraction(0)
    for pc in sched.pieces:
        if pc.end > reach:
            busy += pc.end - max(pc.start, reach)
            reach = pc.end
    return makespan(sched) - busy


@dataclass(frozen=True)
class RatioCertificate:
    """Per-run witness of the ``2 - 1/m`` guarantee.

    ``bound = volume + (1 - 1/m) * mc_last``. Stretches where every machine is
    idle are removed from the timeline before comparing, because nothing at
    all can run there; ``makespan - idle_all <= bound`` is what is certified.
    """

    last_job: int
    volume: Fraction
    mc_last: int
    bound: Fraction
    makespan: Fraction
    idle_all: Fraction

    @property
    def holds(self) -> bool:
        return self.makespan - self.idle_all <= self.bound

    @property
    def holds_uncompressed(self) -> bool:
        """The same inequality without removing all-idle stretches."""
        return self.makespan <= self.bound


def ratio_certificate(inst: Instance, ess: EssResult, sched: Schedule) -> RatioCertificate:
    """Terms of the List Scheduling bound for the job that completes last.

    Raises :class:`ContractViolation` if the certified inequality fails.
    """
    done = sched.completion_times()
    if not done:
        raise ValueError("empty schedule has no last job")
    last = min(done, key=lambda j: (-done[j], j))
    m = inst.machines
    volume = Fraction(inst.total_processing, m)
    mc_last = ess.completion[last]
    cert = RatioCertificate(
        last_job=last,
        volume=volume,
        mc_last=mc_last,
        bound=volume + (1 - Fraction(1, m)) * mc_last,
        makespan=done[last],
        idle_all=all_idle_time(inst, sched),
    )
    if not cert.holds:
        raise ContractViolation(
            f"ratio certificate fails: C_max - idle {cert.makespan - cert.idle_all} > bound {cert.bound}"
        )
    return cert
