"""List Scheduling ratio study over a corpus of small instances.

Each row compares one priority policy against the exact non-preemptive
optimum. Columns (see ``COLUMNS``), in order:

    instance        file name of the instance
    n, m            job and machine counts
    policy          order policy (lpt, input, random:<seed>)
    status          ok, skipped (oracle limit) or infeasible
    opt_*           oracle optimum
    ls_*            List Scheduling makespan
    ratio_*         ls / opt
    bound_*         2 - 1/m
    last_job        job completing last in the list schedule
    volume_*        sum(p) / m
    mc_last         earliest possible completion of the last job
    cert_bound_*    volume + (1 - 1/m) * mc_last
    idle_all_*      time during which every machine is idle

Every rational ``x`` appears as ``x_num``, ``x_den`` and ``x`` (decimal, 12
significant digits). Cells of skipped or infeasible rows are left empty.
"""

from __future__ import annotations

import csv
import io
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from decimal import Decimal, localcontext
from fractions import Fraction
from pathlib import Path

from .chains import earliest_start_schedule
from .core import InfeasibleError, makespan, require_reachable
from .io import load_instance
from .listsched import list_schedule, parse_order, ratio_certificate
from .oracle import OracleLimitError, brute_nonpmtn

TOLERANCE = Fraction(1, 10**9)
_RATIONALS = ("opt", "ls", "ratio", "bound")
_CERT_RATIONALS = ("volume", "cert_bound", "idle_all")


def _rational_cols(name):
    return [f"{name}_num", f"{name}_den", name]


COLUMNS = (
    ["instance", "n", "m", "policy", "status"]
    + [c for name in _RATIONALS for c in _rational_cols(name)]
    + ["last_job"]
    + _rational_cols("volume")
    + ["mc_last"]
    + _rational_cols("cert_bound")
    + _rational_cols("idle_all")
)


def decimal12(x: Fraction) -> str:
    with localcontext() as ctx:
        ctx.prec = 12
        return str(+(Decimal(x.numerator) / Decimal(x.denominator)))


@dataclass(frozen=True)
class RatioReportRow:
    instance: str
    n: int
    m: int
    policy: str
    status: str
    opt: Fraction | None = None
    ls: Fraction | None = None
    last_job: str | None = None
    volume: Fraction | None = None
    mc_last: int | None = None
    cert_bound: Fraction | None = None
    idle_all: Fraction | None = None

    @property
    def bound(self) -> Fraction:
        return 2 - Fraction(1, self.m)

    @property
    def ratio(self) -> Fraction | None:
        return None if self.opt is None or self.ls is None else self.ls / self.opt

    @property
    def violates(self) -> bool:
        return self.ratio is not None and self.ratio > self.bound + TOLERANCE

    def cells(self) -> dict:
        out = {"instance": self.instance, "n": self.n, "m": self.m, "policy": self.policy, "status": self.status}
        for name in _RATIONALS + _CERT_RATIONALS:
            value = getattr(self, name)
            if value is None or (self.status != "ok" and name == "bound"):
                out.update({f"{name}_num": "", f"{name}_den": "", name: ""})
            else:
                value = Fraction(value)
                out.update({f"{name}_num": value.numerator, f"{name}_den": value.denominator, name: decimal12(value)})
        out["last_job"] = "" if self.last_job is None else self.last_job
        out["mc_last"] = "" if self.mc_last is None else self.mc_last
        return out


def instance_rows(path, policies, max_n: int = 8) -> list[RatioReportRow]:
    """All rows for one instance file, one per policy."""
    name = Path(path).name
    inst = load_instance(path)
    base = dict(instance=name, n=inst.n, m=inst.machines)
    try:
        require_reachable(inst)
        opt = brute_nonpmtn(inst, max_n=max_n).opt
    except InfeasibleError:
        return [RatioReportRow(policy=pol, status="infeasible", **base) for pol in policies]
    except OracleLimitError:
        return [RatioReportRow(policy=pol, status="skipped", **base) for pol in policies]
    ess = earliest_start_schedule(inst)
    rows = []
    for pol in policies:
        sched = list_schedule(inst, parse_order(inst, pol))
        cert = ratio_certificate(inst, ess, sched)
        rows.append(RatioReportRow(
            policy=pol, status="ok", opt=opt, ls=makespan(sched),
            last_job=str(inst.names[cert.last_job]), volume=cert.volume, mc_last=cert.mc_last,
            cert_bound=cert.bound, idle_all=cert.idle_all, **base,
        ))
    return rows


def worker_count() -> int:
    """Worker processes for a report: ``ORSCHED_THREADS`` if set, else the CPU count."""
    cap = os.environ.get("ORSCHED_THREADS")
    if not cap:
        return os.cpu_count() or 1
    try:
        return max(1, int(cap))
    except ValueError:
        raise ValueError(f"ORSCHED_THREADS must be an integer, got {cap!r}") from None


def build_report(corpus, policies, max_n: int = 8) -> list[RatioReportRow]:
    """Rows for every ``*.json`` file in ``corpus``, in file-name order."""
    files = sorted(Path(corpus).glob("*.json"))
    workers = min(worker_count(), len(files))
    if workers <= 1:
        chunks = [instance_rows(f, policies, max_n) for f in files]
    else:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            chunks = list(pool.map(instance_rows, files, [policies] * len(files), [max_n] * len(files)))
    # results come back in submission order; merging here keeps output independent of scheduling
    return [row for chunk in chunks for row in chunk]


def report_csv(rows) -> str:
    buf = io.StringIO()
    writer = csv.DictWriter(buf, fieldnames=COLUMNS, lineterminator="\n")
    writer.writeheader()
    for row in rows:
        writer.writerow(row.cells())
    return buf.getvalue()


def max_ratio(rows) -> Fraction | None:
    return max((row.ratio for row in rows if row.ratio is not None), default=None)
