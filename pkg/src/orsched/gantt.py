"""Static SVG Gantt charts: one lane per machine, idle time hatched."""

from __future__ import annotations

from fractions import Fraction
from xml.sax.saxutils import escape

from .core import Instance, OrSchedError, Schedule, makespan

LANE = 36
LEFT = 64
TOP = 40
RIGHT = 24
BOTTOM = 28
MAX_WIDTH = 960


class GanttError(OrSchedError, ValueError):
    """The schedule does not fit the instance it is drawn against."""


def _num(x) -> str:
    text = f"{float(x):.3f}".rstrip("0").rstrip(".")
    return "0" if text == "-0" else text


def _gaps(intervals, horizon):
    """Uncovered stretches of ``[0, horizon)`` given sorted ``(start, end)`` pairs."""
    out = []
    reach = Fraction(0)
    for s, e in intervals:
        if s > reach:
            out.append((reach, s))
        reach = max(reach, e)
    if reach < horizon:
        out.append((reach, horizon))
    return out


def render_svg(sched: Schedule, inst: Instance | None = None) -> str:
    """Draw ``sched``; with ``inst`` the lanes follow its machine count and releases get tick marks."""
    if inst is not None:
        for pc in sched.pieces:
            if not 0 <= pc.job < inst.n or not 0 <= pc.machine < inst.machines:
                raise GanttError(f"piece of job {pc.job} on machine {pc.machine} does not fit the instance")
        lanes = inst.machines
        label = lambda j: str(inst.names[j])
    else:
        lanes = max((pc.machine + 1 for pc in sched.pieces), default=0)
        label = str

    horizon = makespan(sched)
    scale = Fraction(MAX_WIDTH - LEFT - RIGHT, max(horizon, 1))
    scale = min(scale, Fraction(60))
    x = lambda t: LEFT + t * scale
    width = LEFT + horizon * scale + RIGHT
    height = TOP + lanes * LANE + BOTTOM

    out = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{_num(width)}" height="{height}" '
        f'viewBox="0 0 {_num(width)} {height}" font-family="sans-serif" font-size="11">',
        "<defs>",
        '<pattern id="idle" width="6" height="6" patternUnits="userSpaceOnUse" patternTransform="rotate(45)">',
        '<line x1="0" y1="0" x2="0" y2="6" stroke="#999" stroke-width="1"/>',
        "</pattern>",
        "</defs>",
    ]

    by_lane: dict[int, list] = {k: [] for k in range(lanes)}
    for pc in sched.pieces:
        by_lane[pc.machine].append(pc)

    for k in range(lanes):
        y = TOP + k * LANE
        out.append(f'<text x="{LEFT - 8}" y="{y + LANE // 2 + 4}" text-anchor="end">M{k}</text>')
        out.append(
            f'<rect x="{LEFT}" y="{y}" width="{_num(horizon * scale)}" height="{LANE}" '
            'fill="none" stroke="#333"/>'
        )
        pieces = by_lane[k]
        for s, e in _gaps([(pc.start, pc.end) for pc in pieces], horizon):
            out.append(
                f'<rect class="idle" x="{_num(x(s))}" y="{y}" width="{_num((e - s) * scale)}" '
                f'height="{LANE}" fill="url(#idle)"/>'
            )
        for pc in pieces:
            name = escape(label(pc.job))
            out.append(
                f'<rect class="piece" x="{_num(x(pc.start))}" y="{y + 2}" width="{_num(pc.length * scale)}" '
                f'height="{LANE - 4}" fill="#ddd" stroke="#000"><title>{name} [{pc.start}, {pc.end})</title></rect>'
            )
            out.append(
                f'<text x="{_num(x((pc.start + pc.end) / 2))}" y="{y + LANE // 2 + 4}" '
                f'text-anchor="middle">{name}</text>'
            )

    if inst is not None:
        released: dict[int, list[str]] = {}
        for j in range(inst.n):
            if inst.r[j] > 0:
                released.setdefault(inst.r[j], []).append(str(inst.names[j]))
        bottom = TOP + lanes * LANE
        for t in sorted(released):
            out.append(
                f'<line class="release" x1="{_num(x(t))}" y1="{TOP - 12}" x2="{_num(x(t))}" y2="{bottom}" '
                'stroke="#c00" stroke-dasharray="3,3"/>'
            )
            out.append(
                f'<text x="{_num(x(t))}" y="{TOP - 16}" text-anchor="middle" fill="#c00">'
                f'r: {escape(", ".join(released[t]))}</text>'
            )

    axis_y = TOP + lanes * LANE + 16
    out.append(f'<text x="{LEFT}" y="{axis_y}" text-anchor="middle">0</text>')
    if horizon > 0:
        out.append(f'<text x="{_num(x(horizon))}" y="{axis_y}" text-anchor="middle">{horizon}</text>')
    out.append("</svg>")
    return "\n".join(out) + "\n"
