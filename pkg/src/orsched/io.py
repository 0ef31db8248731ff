"""JSON instance and schedule files.

Rationals are written as reduced ``[num, den]`` integer pairs so every time
round-trips exactly. Job ids in files are strings; the source is implicit.
"""

from __future__ import annotations

import json
from fractions import Fraction
from pathlib import Path

from .core import Instance, OrSchedError, Piece, Schedule, build_instance, makespan


class FormatError(OrSchedError, ValueError):
    """A file is not valid JSON or does not follow the expected layout."""


def rational(x) -> list[int]:
    x = Fraction(x)
    return [x.numerator, x.denominator]


def parse_rational(value, where: str = "value") -> Fraction:
    if (
        not isinstance(value, list) or len(value) != 2
        or any(isinstance(v, bool) or not isinstance(v, int) for v in value)
    ):
        raise FormatError(f"{where}: expected [num, den] integers, got {value!r}")
    num, den = value
    if den <= 0:
        raise FormatError(f"{where}: denominator must be positive, got {den}")
    x = Fraction(num, den)
    if x.denominator != den:
        raise FormatError(f"{where}: {value!r} is not in reduced form")
    return x


def _decode(text: str, source: str):
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise FormatError(f"{source}:{exc.lineno}:{exc.colno}: {exc.msg} (char {exc.pos})") from None


def dumps_json(obj) -> str:
    return json.dumps(obj, indent=2, ensure_ascii=False) + "\n"


def read_text(path) -> str:
    try:
        return Path(path).read_text(encoding="utf-8")
    except UnicodeDecodeError as exc:
        raise FormatError(f"{path}: not UTF-8 ({exc.reason} at byte {exc.start})") from None


def instance_to_dict(inst: Instance) -> dict:
    return {
        "machines": inst.machines,
        "jobs": [
            {
                "id": str(inst.names[j]),
                "p": inst.p[j],
                "r": inst.r[j],
                "preds": [str(inst.names[i]) for i in inst.preds[j]],
            }
            for j in range(inst.n)
        ],
    }


def instance_from_dict(data, source: str = "<instance>") -> Instance:
    if not isinstance(data, dict) or "machines" not in data or "jobs" not in data:
        raise FormatError(f"{source}: instance must be an object with 'machines' and 'jobs'")
    if not isinstance(data["jobs"], list):
        raise FormatError(f"{source}: 'jobs' must be a list")
    jobs, edges = [], []
    for pos, entry in enumerate(data["jobs"]):
        if not isinstance(entry, dict) or not {"id", "p", "r"} <= entry.keys():
            raise FormatError(f"{source}: jobs[{pos}] needs 'id', 'p' and 'r'")
        name = entry["id"]
        if not isinstance(name, str):
            raise FormatError(f"{source}: jobs[{pos}].id must be a string, got {name!r}")
        preds = entry.get("preds", [])
        if not isinstance(preds, list) or not all(isinstance(i, str) for i in preds):
            raise FormatError(f"{source}: jobs[{pos}].preds must be a list of job ids")
        jobs.append((name, entry["p"], entry["r"]))
        edges.extend((i, name) for i in preds)
    return build_instance(data["machines"], jobs, edges)


def dumps_instance(inst: Instance) -> str:
    return dumps_json(instance_to_dict(inst))


def loads_instance(text: str, source: str = "<instance>") -> Instance:
    return instance_from_dict(_decode(text, source), source)


def load_instance(path) -> Instance:
    return loads_instance(read_text(path), str(path))


def schedule_to_dict(inst: Instance, sched: Schedule) -> dict:
    return {
        "makespan": rational(makespan(sched)),
        "preemptive": sched.preemptive,
        "pieces": [
            {
                "job": str(inst.names[pc.job]),
                "machine": pc.machine,
                "start": rational(pc.start),
                "end": rational(pc.end),
            }
            for pc in sched.pieces
        ],
    }


def schedule_from_dict(inst: Instance, data, source: str = "<schedule>") -> Schedule:
    """Rebuild a schedule; job ids are resolved against ``inst``. Extra keys are ignored."""
    if not isinstance(data, dict) or not isinstance(data.get("pieces"), list):
        raise FormatError(f"{source}: schedule must be an object with a 'pieces' list")
    index = {str(name): j for j, name in enumerate(inst.names)}
    pieces = []
    for pos, entry in enumerate(data["pieces"]):
        where = f"{source}: pieces[{pos}]"
        if not isinstance(entry, dict) or not {"job", "machine", "start", "end"} <= entry.keys():
            raise FormatError(f"{where} needs 'job', 'machine', 'start' and 'end'")
        if entry["job"] not in index:
            raise FormatError(f"{where} references unknown job {entry['job']!r}")
        mach = entry["machine"]
        if isinstance(mach, bool) or not isinstance(mach, int):
            raise FormatError(f"{where}.machine must be an integer")
        start = parse_rational(entry["start"], f"{where}.start")
        end = parse_rational(entry["end"], f"{where}.end")
        if not start < end:
            raise FormatError(f"{where} has non-positive length")
        pieces.append(Piece(start, end, mach, index[entry["job"]]))
    sched = Schedule(tuple(pieces), preemptive=bool(data.get("preemptive", False)))
    if "makespan" in data and parse_rational(data["makespan"], f"{source}: makespan") != makespan(sched):
        raise FormatError(f"{source}: stated makespan does not match the pieces")
    return sched


def dumps_schedule(inst: Instance, sched: Schedule, extra: dict | None = None) -> str:
    data = schedule_to_dict(inst, sched)
    if extra:
        data.update(extra)
    return dumps_json(data)


def loads_schedule(inst: Instance, text: str, source: str = "<schedule>") -> Schedule:
    return schedule_from_dict(inst, _decode(text, source), source)


def load_schedule(inst: Instance, path) -> Schedule:
    return loads_schedule(inst, read_text(path), str(path))
