"""Instance and schedule model, input validation and the schedule validator."""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property
from operator import attrgetter
from numbers import Rational
from typing import Hashable, Iterable, Sequence

#: Reserved id of the dummy source job. Real jobs are indexed ``0..n-1``.
SOURCE = -1


class OrSchedError(Exception):
    """Base class for every error raised by this package."""


class InstanceError(OrSchedError, ValueError):
    """Raw instance data is malformed. ``job`` names the offending job, if any."""

    def __init__(self, message: str, job: Hashable | None = None):
        super().__init__(message)
        self.job = job


class InfeasibleError(OrSchedError):
    """Some jobs are not reachable from the source, so no feasible schedule exists."""

    def __init__(self, unreachable: Iterable[int], names: Sequence[Hashable] | None = None):
        self.unreachable = frozenset(unreachable)
        shown = sorted(self.unreachable)
        if names is not None:
            shown = [names[j] for j in shown]
        super().__init__(f"jobs not reachable from the source: {shown}")


class ContractViolation(OrSchedError, RuntimeError):
    """An internal guarantee did not hold. Always a bug, never bad input."""


def as_time(value) -> Fraction:
    """Coerce an int, Fraction or ``(num, den)`` pair to an exact rational time."""
    if isinstance(value, Fraction):
        return value
    if isinstance(value, bool):
        raise TypeError("booleans are not times")
    if isinstance(value, (int, Rational)):
        return Fraction(value)
    if isinstance(value, (tuple, list)) and len(value) == 2:
        num, den = value
        if not isinstance(num, int) or not isinstance(den, int) or den <= 0:
            raise ValueError(f"bad rational pair {value!r}")
        return Fraction(num, den)
    raise TypeError(f"cannot interpret {value!r} as an exact time")


@dataclass(frozen=True)
class Instance:
    """A validated instance; real jobs are ``0..n-1``, the source is :data:`SOURCE`.

    ``preds[j]`` holds the real OR-predecessors of ``j`` (sorted, no duplicates).
    Jobs with an empty tuple are implicitly preceded by the source only.
    """

    machines: int
    names: tuple[Hashable, ...]
    p: tuple[int, ...]
    r: tuple[int, ...]
    preds: tuple[tuple[int, ...], ...]

    @property
    def n(self) -> int:
        return len(self.p)

    @cached_property
    def succs(self) -> tuple[tuple[int, ...], ...]:
        out: list[list[int]] = [[] for _ in range(self.n)]
        for j, ps in enumerate(self.preds):
            for i in ps:
                out[i].append(j)
        return tuple(tuple(s) for s in out)

    @cached_property
    def index(self) -> dict[Hashable, int]:
        return {name: j for j, name in enumerate(self.names)}

    @property
    def edges(self) -> list[tuple[int, int]]:
        """Real arcs ``(i, j)`` meaning ``i`` is an OR-predecessor of ``j``."""
        return [(i, j) for j, ps in enumerate(self.preds) for i in ps]

    @property
    def source_arcs(self) -> list[tuple[int, int]]:
        return [(SOURCE, j) for j, ps in enumerate(self.preds) if not ps]

    @property
    def arcs(self) -> list[tuple[int, int]]:
        """All arcs of the source-augmented graph."""
        return self.source_arcs + self.edges

    @property
    def total_processing(self) -> int:
        return sum(self.p)

    def raw(self) -> tuple[int, list[tuple[Hashable, int, int]], list[tuple[Hashable, Hashable]]]:
        """Return ``(machines, jobs, edges)`` that rebuild this instance, source arcs included."""
        jobs = [(self.names[j], self.p[j], self.r[j]) for j in range(self.n)]
        edges = [
            (SOURCE if i == SOURCE else self.names[i], self.names[j]) for i, j in self.arcs
        ]
        return self.machines, jobs, edges


def _check_int(value, what: str, job) -> int:
    if isinstance(value, bool) or not isinstance(value, int):
        raise InstanceError(f"{what} of job {job!r} must be an integer, got {value!r}", job)
    return value


def build_instance(
    machines: int,
    jobs: Iterable[Sequence],
    edges: Iterable[Sequence] = (),
) -> Instance:
    """Validate raw data and return the source-augmented :class:`Instance`.

    ``jobs`` holds ``(id, p, r)`` triples, ``edges`` holds ``(i, j)`` pairs with
    ``i`` an OR-predecessor of ``j``. Arcs leaving :data:`SOURCE` are accepted and
    dropped because they are implied, which makes rebuilding idempotent.
    Duplicate arcs are collapsed. Cycles are allowed here; see :func:`check_reachable`.
    """
    if isinstance(machines, bool) or not isinstance(machines, int) or machines < 1:
        raise InstanceError(f"machine count must be an integer >= 1, got {machines!r}")

    names: list[Hashable] = []
    ps: list[int] = []
    rs: list[int] = []
    index: dict[Hashable, int] = {}
    for entry in jobs:
        if len(entry) != 3:
            raise InstanceError(f"job entry must be (id, p, r), got {entry!r}")
        name, p, r = entry
        if name == SOURCE:
            raise InstanceError(f"job id {name!r} is reserved for the source", name)
        if name in index:
            raise InstanceError(f"duplicate job id {name!r}", name)
        p = _check_int(p, "processing time", name)
        r = _check_int(r, "release date", name)
        if p <= 0:
            raise InstanceError(f"processing time of job {name!r} must be positive, got {p}", name)
        if r < 0:
            raise InstanceError(f"release date of job {name!r} must be non-negative, got {r}", name)
        index[name] = len(names)
        names.append(name)
        ps.append(p)
        rs.append(r)

    pred_sets: list[set[int]] = [set() for _ in names]
    for edge in edges:
        if len(edge) != 2:
            raise InstanceError(f"edge must be a pair, got {edge!r}")
        a, b = edge
        if b == SOURCE:
            raise InstanceError("no arc may enter the source", b)
        if b not in index:
            raise InstanceError(f"edge {edge!r} references unknown job {b!r}", b)
        if a == SOURCE:
            continue
        if a not in index:
            raise InstanceError(f"edge {edge!r} references unknown job {a!r}", a)
        if a == b:
            raise InstanceError(f"self-loop on job {a!r}", a)
        pred_sets[index[b]].add(index[a])

    return Instance(
        machines=machines,
        names=tuple(names),
        p=tuple(ps),
        r=tuple(rs),
        preds=tuple(tuple(sorted(s)) for s in pred_sets),
    )


def check_reachable(inst: Instance) -> tuple[bool, frozenset[int]]:
    """Breadth-first search from the source.

    Returns ``(ok, unreachable)``; a feasible schedule exists iff ``ok``.
    """
    seen = [False] * inst.n
    queue = deque(j for j in range(inst.n) if not inst.preds[j])
    for j in queue:
        seen[j] = True
    while queue:
        i = queue.popleft()
        for j in inst.succs[i]:
            if not seen[j]:
                seen[j] = True
                queue.append(j)
    missing = frozenset(j for j in range(inst.n) if not seen[j])
    return not missing, missing


def require_reachable(inst: Instance) -> None:
    ok, missing = check_reachable(inst)
    if not ok:
        raise InfeasibleError(missing, inst.names)


@dataclass(frozen=True, order=True)
class Piece:
    """Job ``job`` runs on ``machine`` during ``[start, end)``."""

    start: Fraction
    end: Fraction
    machine: int
    job: int

    def __post_init__(self):
        object.__setattr__(self, "start", as_time(self.start))
        object.__setattr__(self, "end", as_time(self.end))
        if not self.start < self.end:
            raise ValueError(f"piece of job {self.job} has non-positive length")

    @property
    def length(self) -> Fraction:
        return self.end - self.start

    def shifted(self, delta) -> Piece:
        delta = as_time(delta)
        return Piece(self.start + delta, self.end + delta, self.machine, self.job)


_piece_key = attrgetter("start", "end", "machine", "job")


@dataclass(frozen=True)
class Schedule:
    pieces: tuple[Piece, ...] = ()
    preemptive: bool = False

    def __post_init__(self):
        object.__setattr__(self, "pieces", tuple(sorted(self.pieces, key=_piece_key)))

    @cached_property
    def _spans(self) -> dict[int, tuple[Fraction, Fraction]]:
        spans: dict[int, tuple[Fraction, Fraction]] = {}
        for pc in self.pieces:
            s, c = spans.get(pc.job, (pc.start, pc.end))
            spans[pc.job] = (min(s, pc.start), max(c, pc.end))
        return spans

    def start(self, job: int) -> Fraction:
        return self._spans[job][0]

    def completion(self, job: int) -> Fraction:
        return self._spans[job][1]

    def completion_times(self) -> dict[int, Fraction]:
        return {j: c for j, (_, c) in self._spans.items()}

    def start_times(self) -> dict[int, Fraction]:
        return {j: s for j, (s, _) in self._spans.items()}

    @property
    def jobs(self) -> set[int]:
        return set(self._spans)

    def pieces_of(self, job: int) -> list[Piece]:
        return [pc for pc in self.pieces if pc.job == job]


def makespan(sched: Schedule) -> Fraction:
    """Largest piece end; an empty schedule has makespan 0."""
    return max((pc.end for pc in sched.pieces), default=Fraction(0))


@dataclass(frozen=True)
class Violation:
    """One broken feasibility condition.

    ``kind`` is one of ``processing``, ``machine-overlap``, ``job-overlap``,
    ``release``, ``precedence``, ``contiguity`` or ``reference``.
    """

    kind: str
    job: int | None
    detail: str = field(compare=False)


def _overlaps(pieces: list[Piece]):
    """Yield ``(a, b)`` where ``b`` intersects the furthest-reaching earlier piece ``a``."""
    pieces.sort(key=_piece_key)
    reach = None
    for pc in pieces:
        if reach is not None and pc.start < reach.end:
            yield reach, pc
        if reach is None or pc.end > reach.end:
            reach = pc


def validate_schedule(inst: Instance, sched: Schedule, require_contiguous: bool = False) -> list[Violation]:
    """List every feasibility violation; an empty list means the schedule is feasible."""
    out: list[Violation] = []
    by_job: dict[int, list[Piece]] = {}
    by_machine: dict[int, list[Piece]] = {}
    for pc in sched.pieces:
        if not 0 <= pc.job < inst.n:
            out.append(Violation("reference", pc.job, f"unknown job {pc.job}"))
            continue
        if not 0 <= pc.machine < inst.machines:
            out.append(Violation("reference", pc.job, f"machine {pc.machine} out of range"))
            continue
        by_job.setdefault(pc.job, []).append(pc)
        by_machine.setdefault(pc.machine, []).append(pc)

    for j in range(inst.n):
        total = sum((pc.length for pc in by_job.get(j, ())), Fraction(0))
        if total != inst.p[j]:
            out.append(Violation("processing", j, f"job {j} processed {total}, needs {inst.p[j]}"))

    for mach, pieces in sorted(by_machine.items()):
        for a, b in _overlaps(pieces):
            out.append(Violation(
                "machine-overlap", b.job,
                f"machine {mach}: job {a.job} [{a.start},{a.end}) overlaps job {b.job} [{b.start},{b.end})",
            ))

    start: dict[int, Fraction] = {}
    done: dict[int, Fraction] = {}
    for j, pieces in by_job.items():
        for a, b in _overlaps(pieces):
            out.append(Violation("job-overlap", j, f"job {j} runs twice during [{b.start},{min(a.end, b.end)})"))
        start[j] = pieces[0].start
        done[j] = max(pc.end for pc in pieces)
        if require_contiguous and len(pieces) != 1:
            out.append(Violation("contiguity", j, f"job {j} has {len(pieces)} pieces"))

    for j, s in start.items():
        if s < inst.r[j]:
            out.append(Violation("release", j, f"job {j} starts at {s} before its release {inst.r[j]}"))
        if inst.preds[j]:
            first = min((done[i] for i in inst.preds[j] if i in done), default=None)
            if first is None or s < first:
                out.append(Violation(
                    "precedence", j,
                    f"job {j} starts at {s} before any predecessor completes (earliest {first})",
                ))
    return out
