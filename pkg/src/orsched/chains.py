"""Earliest start schedules, minimal chains, closed collections and lower bounds."""

from __future__ import annotations

import heapq
from dataclasses import dataclass
from fractions import Fraction
from typing import Mapping, Sequence

from .core import SOURCE, ContractViolation, InfeasibleError, Instance


@dataclass(frozen=True)
class EssResult:
    """Start and completion of every job on infinitely many machines.

    ``completion[j]`` is also the minimal-chain length ``mc(j)``.
    """

    start: tuple[int, ...]
    completion: tuple[int, ...]

    def mc(self, job: int) -> int:
        return self.completion[job]


def earliest_start_schedule(inst: Instance) -> EssResult:
    """Label-setting sweep from the source in completion-time order.

    Under OR-precedence a job starts at ``max(r_j, min_i C_i)``, so the first
    predecessor popped from the heap fixes its start. O((n + |E|) log n).
    """
    n = inst.n
    start = [-1] * n
    completion = [-1] * n
    heap = []
    for j in range(n):
        if not inst.preds[j]:
            start[j] = inst.r[j]
            completion[j] = inst.r[j] + inst.p[j]
            heap.append((completion[j], j))
    heapq.heapify(heap)
    while heap:
        c, i = heapq.heappop(heap)
        for j in inst.succs[i]:
            if start[j] < 0:
                start[j] = max(inst.r[j], c)
                completion[j] = start[j] + inst.p[j]
                heapq.heappush(heap, (completion[j], j))
    missing = [j for j in range(n) if start[j] < 0]
    if missing:
        raise InfeasibleError(missing, inst.names)
    return EssResult(tuple(start), tuple(completion))


def chain_predecessor(inst: Instance, ess: EssResult, job: int) -> int:
    """The job one step back on ``job``'s traced minimal chain, or :data:`SOURCE`.

    A job delayed past its release is traced to the smallest-id predecessor that
    completes exactly at its start. A job starting at its release is traced to
    the predecessor with the latest completion not after that start.
    """
    preds = inst.preds[job]
    if not preds:
        return SOURCE
    s = ess.start[job]
    if s > inst.r[job]:
        tight = [i for i in preds if ess.completion[i] == s]
        if not tight:
            raise ContractViolation(f"job {job} has no predecessor completing at its start {s}")
        return min(tight)
    early = [i for i in preds if ess.completion[i] <= s]
    if not early:
        raise ContractViolation(f"job {job} has no predecessor completing by its start {s}")
    return min(early, key=lambda i: (-ess.completion[i], i))


def dominator_index(inst: Instance, path: Sequence[int], mc: int) -> int:
    """Largest position ``h`` with ``mc = r[path[h]] + sum(p[path[h:]])``."""
    tail = 0
    for h in range(len(path) - 1, -1, -1):
        tail += inst.p[path[h]]
        if inst.r[path[h]] + tail == mc:
            return h
    raise ContractViolation(f"chain {list(path)} has no dominator for mc = {mc}")


@dataclass(frozen=True)
class MinimalChain:
    jobs: tuple[int, ...]
    dominator_pos: int
    mc: int

    @property
    def target(self) -> int:
        return self.jobs[-1]

    @property
    def dominator(self) -> int:
        return self.jobs[self.dominator_pos]

    def predecessor(self) -> int:
        """Chain predecessor of the target, or :data:`SOURCE`."""
        return self.jobs[-2] if len(self.jobs) > 1 else SOURCE


def _make_chain(inst: Instance, ess: EssResult, path: Sequence[int]) -> MinimalChain:
    mc = ess.completion[path[-1]]
    return MinimalChain(tuple(path), dominator_index(inst, path, mc), mc)


def minimal_chain(inst: Instance, ess: EssResult, k: int) -> MinimalChain:
    """Trace one minimal chain of ``k`` back to a predecessor-less job."""
    path = [k]
    while True:
        i = chain_predecessor(inst, ess, path[-1])
        if i == SOURCE:
            break
        path.append(i)
    path.reverse()
    return _make_chain(inst, ess, path)


def is_minimal_chain(inst: Instance, ess: EssResult, path: Sequence[int]) -> bool:
    """Check the constructive characterisation of a minimal chain ending at ``path[-1]``."""
    if not path or inst.preds[path[0]] or ess.start[path[0]] != inst.r[path[0]]:
        return False
    for a, b in zip(path, path[1:]):
        if a not in inst.preds[b]:
            return False
        if ess.start[b] != max(inst.r[b], ess.completion[a]):
            return False
    return True


class ClosedCollection:
    """One minimal chain per job, stored as paths.

    Instances produced by :func:`closed_collection` are closed by construction.
    Hand-built collections may not be; :meth:`is_closed` checks.
    """

    def __init__(self, inst: Instance, ess: EssResult, paths: Mapping[int, Sequence[int]]):
        self.instance = inst
        self.ess = ess
        self._paths = {j: tuple(path) for j, path in paths.items()}
        self._chains: dict[int, MinimalChain] = {}

    def __getitem__(self, job: int) -> MinimalChain:
        chain = self._chains.get(job)
        if chain is None:
            chain = self._chains[job] = _make_chain(self.instance, self.ess, self._paths[job])
        return chain

    def __contains__(self, job: int) -> bool:
        return job in self._paths

    def __len__(self) -> int:
        return len(self._paths)

    def __iter__(self):
        return iter(sorted(self._paths))

    def path(self, job: int) -> tuple[int, ...]:
        return self._paths[job]

    def predecessor(self, job: int) -> int:
        path = self._paths[job]
        return path[-2] if len(path) > 1 else SOURCE

    def covers(self) -> bool:
        return all(j in self._paths for j in range(self.instance.n))

    def is_closed(self) -> bool:
        """Every job on a chain carries the matching prefix as its own chain."""
        for path in self._paths.values():
            for pos, i in enumerate(path):
                if self._paths.get(i) != path[: pos + 1]:
                    return False
        return True

    def invalid_chains(self) -> list[int]:
        """Jobs whose stored path is not a minimal chain ending at that job."""
        return [
            j for j, path in self._paths.items()
            if path[-1] != j or not is_minimal_chain(self.instance, self.ess, path)
        ]


def closed_collection(inst: Instance, ess: EssResult) -> ClosedCollection:
    """Chains for every job, memoised so a job's chain extends its chain predecessor's."""
    parent = [chain_predecessor(inst, ess, j) for j in range(inst.n)]
    paths: dict[int, tuple[int, ...]] = {}
    # parents complete strictly before their children, so ESS order is a topological order
    for j in sorted(range(inst.n), key=lambda j: ess.completion[j]):
        q = parent[j]
        paths[j] = (j,) if q == SOURCE else paths[q] + (j,)
    return ClosedCollection(inst, ess, paths)


@dataclass(frozen=True)
class LowerBounds:
    volume: Fraction
    chain: int

    @property
    def best(self) -> Fraction:
        return max(self.volume, Fraction(self.chain))


def lower_bounds(inst: Instance, ess: EssResult) -> LowerBounds:
    """Load-balancing bound ``sum(p)/m`` and longest minimal chain ``max mc(j)``."""
    return LowerBounds(
        volume=Fraction(inst.total_processing, inst.machines),
        chain=max(ess.completion, default=0),
    )

