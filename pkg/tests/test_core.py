from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import ess_schedule, fig1, instances
from orsched.chains import earliest_start_schedule
from orsched.core import (
    SOURCE, InfeasibleError, InstanceError, Piece, Schedule, as_time, build_instance,
    check_reachable, makespan, require_reachable, validate_schedule,
)
from orsched.listsched import list_schedule
from orsched.pmtn import solve_pmtn


def test_fig1_build(fig1_inst):
    assert fig1_inst.n == 9
    roots = {fig1_inst.names[j] for _, j in fig1_inst.source_arcs}
    assert roots == {"j1", "j2", "j3"}
    assert len(fig1_inst.edges) == 12


def test_single_job_gets_source_arc():
    inst = build_instance(1, [("a", 2, 0)], [])
    assert inst.arcs == [(SOURCE, 0)]


@pytest.mark.parametrize("jobs, edges, bad", [
    ([("a", 0, 0)], [], "a"),
    ([("a", -1, 0)], [], "a"),
    ([("a", 1, -2)], [], "a"),
    ([("a", 1, 0), ("a", 2, 0)], [], "a"),
    ([("a", 1, 0)], [("a", "zz")], "zz"),
    ([("a", 1, 0)], [("zz", "a")], "zz"),
    ([("a", 1, 0)], [("a", "a")], "a"),
    ([("a", 1.5, 0)], [], "a"),
])
def test_build_rejects_bad_data(jobs, edges, bad):
    with pytest.raises(InstanceError) as exc:
        build_instance(2, jobs, edges)
    assert exc.value.job == bad


def test_build_rejects_bad_machines():
    with pytest.raises(InstanceError):
        build_instance(0, [("a", 1, 0)])


def test_duplicate_edges_collapse():
    inst = build_instance(1, [("a", 1, 0), ("b", 1, 0)], [("a", "b"), ("a", "b")])
    assert inst.edges == [(0, 1)]


def test_as_time():
    assert as_time(3) == 3
    assert as_time((6, 4)) == Fraction(3, 2)
    with pytest.raises(ValueError):
        as_time((1, 0))
    with pytest.raises(TypeError):
        as_time(True)


def test_reachable_fig1(fig1_inst):
    assert check_reachable(fig1_inst) == (True, frozenset())


def test_two_cycle_unreachable():
    inst = build_instance(1, [("a", 1, 0), ("b", 1, 0)], [("a", "b"), ("b", "a")])
    assert check_reachable(inst) == (False, frozenset({0, 1}))
    with pytest.raises(InfeasibleError) as exc:
        require_reachable(inst)
    assert exc.value.unreachable == {0, 1}


def _reachable_reference(inst):
    seen = {j for j in range(inst.n) if not inst.preds[j]}
    grew = True
    while grew:
        grew = False
        for i, j in inst.edges:
            if i in seen and j not in seen:
                seen.add(j)
                grew = True
    return frozenset(range(inst.n)) - seen


@settings(max_examples=200, deadline=None)
@given(instances(n_max=8, reachable=False))
def test_reachability_matches_reference(inst):
    ok, missing = check_reachable(inst)
    assert missing == _reachable_reference(inst)
    assert ok == (not missing)


@settings(max_examples=150, deadline=None)
@given(instances(n_max=6, reachable=False))
def test_solvers_succeed_iff_reachable(inst):
    ok, _ = check_reachable(inst)
    if ok:
        list_schedule(inst)
        solve_pmtn(inst)
    else:
        with pytest.raises(InfeasibleError):
            list_schedule(inst)
        with pytest.raises(InfeasibleError):
            solve_pmtn(inst)


def test_fig1_ess_schedule_is_feasible():
    inst = fig1(machines=9)
    sched = ess_schedule(inst, earliest_start_schedule(inst))
    assert validate_schedule(inst, sched, require_contiguous=True) == []
    assert makespan(sched) == 8


def test_release_violation():
    inst = fig1(machines=9)
    ess = earliest_start_schedule(inst)
    j6 = inst.index["j6"]
    pieces = [pc if pc.job != j6 else Piece(3, 4, pc.machine, j6) for pc in ess_schedule(inst, ess).pieces]
    kinds = {(v.kind, v.job) for v in validate_schedule(inst, Schedule(tuple(pieces)))}
    assert ("release", j6) in kinds


def test_precedence_violation():
    inst = fig1(machines=9)
    ess = earliest_start_schedule(inst)
    k = inst.index["k"]
    assert min(ess.completion[i] for i in inst.preds[k]) == 7
    pieces = [pc if pc.job != k else Piece(6, 7, pc.machine, k) for pc in ess_schedule(inst, ess).pieces]
    kinds = {(v.kind, v.job) for v in validate_schedule(inst, Schedule(tuple(pieces)))}
    assert ("precedence", k) in kinds


def test_overlaps_and_processing():
    inst = build_instance(1, [("a", 2, 0), ("b", 2, 0)])
    sched = Schedule((Piece(0, 2, 0, 0), Piece(1, 3, 0, 1)))
    assert [v.kind for v in validate_schedule(inst, sched)] == ["machine-overlap"]
    # touching pieces are fine
    assert validate_schedule(inst, Schedule((Piece(0, 2, 0, 0), Piece(2, 4, 0, 1)))) == []
    inst2 = build_instance(2, [("a", 2, 0)])
    twice = Schedule((Piece(0, 1, 0, 0), Piece(Fraction(1, 2), Fraction(3, 2), 1, 0)), preemptive=True)
    assert {v.kind for v in validate_schedule(inst2, twice)} == {"job-overlap"}
    short = Schedule((Piece(0, 1, 0, 0),))
    assert [v.kind for v in validate_schedule(inst2, short)] == ["processing"]


def test_overlap_behind_a_long_piece():
    inst = build_instance(1, [("a", 10, 0), ("b", 1, 0), ("c", 1, 0)])
    sched = Schedule((Piece(0, 10, 0, 0), Piece(1, 2, 0, 1), Piece(5, 6, 0, 2)))
    assert sorted(v.job for v in validate_schedule(inst, sched) if v.kind == "machine-overlap") == [1, 2]


def test_contiguity_and_references():
    inst = build_instance(1, [("a", 2, 0)])
    split = Schedule((Piece(0, 1, 0, 0), Piece(1, 2, 0, 0)), preemptive=True)
    assert validate_schedule(inst, split) == []
    assert [v.kind for v in validate_schedule(inst, split, require_contiguous=True)] == ["contiguity"]
    ghost = Schedule((Piece(0, 2, 0, 0), Piece(0, 1, 3, 0), Piece(0, 1, 0, 7)))
    assert sum(v.kind == "reference" for v in validate_schedule(inst, ghost)) == 2


def test_piece_rejects_empty_interval():
    with pytest.raises(ValueError):
        Piece(1, 1, 0, 0)


def test_makespan_examples(fig1_inst):
    assert makespan(Schedule()) == 0
    sched = list_schedule(fig1_inst)
    shifted = Schedule(tuple(pc.shifted(5) for pc in sched.pieces))
    assert makespan(shifted) == makespan(sched) + 5


@settings(max_examples=150, deadline=None)
@given(instances())
def test_rebuild_is_idempotent(inst):
    again = build_instance(*inst.raw())
    assert again == inst
    assert build_instance(*again.raw()) == again


@settings(max_examples=150, deadline=None)
@given(instances(), st.randoms(use_true_random=False))
def test_validator_and_makespan_invariants(inst, rnd):
    sched = solve_pmtn(inst).schedule if rnd.random() < 0.5 else list_schedule(inst)
    if validate_schedule(inst, sched, require_contiguous=True) == []:
        assert validate_schedule(inst, sched) == []
    perm = list(range(inst.machines))
    rnd.shuffle(perm)
    moved = Schedule(tuple(Piece(pc.start, pc.end, perm[pc.machine], pc.job) for pc in sched.pieces))
    assert makespan(moved) == makespan(sched)
    assert validate_schedule(inst, moved) == []
