"""Precise-filling invariant: slot arrays, integral phases, and the
nine-statement check over a run and its complement run.

Every node's history over t = 1..T is condensed onto "slots": scanning
the history in time order, each occurrence of A or C takes the next
slot index k = 0, 1, 2, ...  An A marks its slot in the A array; a C
marks the C array and records its time in the integral phase array f.
A B never opens a slot; it always follows a C of the same node and
inherits that slot, which is why the B array coincides with the C
array.  With T and T-bar the periods of the two runs, the nominal slot
count is K = (T + T-bar) / 3; nodes whose event count differs from K
are flagged (slot overflow) rather than rejected, because searches need
failures as evidence.

The statements checked, over the pair of runs:

    div3  T + T-bar divisible by 3
    [1]   final states match (raw or complement-matched, configurable)
    [2]   lambda = -lambda-bar
    [3]   T-bar - T = lambda
    [4]   C_v(k) + Cbar_v(k) = 1         per node, slot
    [5]   A_v(k) + Abar_v(k) = 1
    [6]   Abar_v(k) = C_v(k)
    [7]   Cbar_v(k) = A_v(k)
    [8]   parity pattern of the combined integral phase

The "light" level is div3 + [1] + [2] + [3]; "full" adds [4]..[8].
Condition failures are reported as data with witnesses, never raised.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

from .dynamics import RunRecord
from .errors import DegenerateRun
from .graph import complement

CHECK_LEVELS = ("light", "full")
COND1_INTERPRETATIONS = ("raw", "complemented")

# Slot-condition witnesses kept per condition; totals are reported too.
_WITNESS_CAP = 8


def slots_from_history(history: str, slot_count: int) -> tuple[list[int], list[int], list[int], int]:
    """Slot arrays for one node history, sized to ``slot_count``.

    Returns (A, C, f, event_count) where f holds the 1-based time of
    the C event at each slot (-1 when the slot holds no C).  Events
    past ``slot_count`` are dropped; the caller sees the true count.
    """
    a = [0] * slot_count
    c = [0] * slot_count
    f = [-1] * slot_count
    k = 0
    for t, color in enumerate(history, 1):
        if color == "B":
            continue
        if k < slot_count:
            if color == "A":
                a[k] = 1
            else:
                c[k] = 1
                f[k] = t
        k += 1
    return a, c, f, k


@dataclass
class SlotTable:
    """Per-node slot arrays for one run of a run/complement pair."""

    slot_count: int
    a: tuple[tuple[int, ...], ...]
    c: tuple[tuple[int, ...], ...]
    f: tuple[tuple[int, ...], ...]
    event_counts: tuple[int, ...]
    lambda_value: Optional[int]

    @property
    def b(self) -> tuple[tuple[int, ...], ...]:
        """B slots coincide with C slots (each B inherits the slot of
        the C it follows)."""
        return self.c

    @property
    def overflow_nodes(self) -> tuple[int, ...]:
        """Nodes whose A/C event count differs from the slot count."""
        return tuple(
            v for v, n in enumerate(self.event_counts) if n != self.slot_count
        )


def build_slots(
    run: RunRecord, complement_run: RunRecord, slot_count: Optional[int] = None
) -> tuple[SlotTable, SlotTable]:
    """Slot tables for a run and its complement run.

    ``slot_count`` defaults to (T + T-bar) // 3, the value the
    invariant predicts; both tables are sized to it.
    """
    if run.degenerate or complement_run.degenerate:
        raise DegenerateRun(
            f"periods {run.period}, {complement_run.period}: no mirror trajectory"
        )
    if slot_count is None:
        slot_count = (run.period + complement_run.period) // 3

    def table_for(record: RunRecord) -> SlotTable:
        a_rows, c_rows, f_rows, counts = [], [], [], []
        for history in record.histories:
            a, c, f, k = slots_from_history(history, slot_count)
            a_rows.append(tuple(a))
            c_rows.append(tuple(c))
            f_rows.append(tuple(f))
            counts.append(k)
        return SlotTable(
            slot_count,
            tuple(a_rows),
            tuple(c_rows),
            tuple(f_rows),
            tuple(counts),
            record.lambda_value,
        )

    return table_for(run), table_for(complement_run)


@dataclass
class PhaseTable:
    """Combined integral phase mod 2 per node and slot.

    Values: 0/1 when the slot's C event came from the primary run
    (time parity), 2/3 when it came from the complement run, -1 when
    the slot is not filled by exactly one of the two runs.
    """

    values: tuple[tuple[int, ...], ...]
    time_origin: int


def integral_phase(
    slots: SlotTable, complement_slots: SlotTable, time_origin: int = 1
) -> PhaseTable:
    """Fold the two f arrays into the four-valued phase table."""
    rows = []
    for f_row, fbar_row in zip(slots.f, complement_slots.f):
        row = []
        for f, fbar in zip(f_row, fbar_row):
            if f != -1 and fbar == -1:
                row.append((f - time_origin) % 2)
            elif f == -1 and fbar != -1:
                row.append(2 + (fbar - time_origin) % 2)
            else:
                row.append(-1)
        rows.append(tuple(row))
    return PhaseTable(tuple(rows), time_origin)


@dataclass
class IpfReport:
    """Outcome of the invariant check on a run/complement pair.

    Scalar facts, the individual condition verdicts, and witnesses for
    every failed condition.  ``light_ok`` covers div3 + [1]..[3];
    ``full_ok`` adds [4]..[8].  Conditions that were not evaluated (at
    light level, or when K is undefined) are None.
    """

    T: int
    Tbar: int
    lambda_value: Optional[int]
    lambda_bar: Optional[int]
    K: Optional[int]
    div3: bool
    c1: bool
    c2: bool
    c3: bool
    c4: Optional[bool]
    c5: Optional[bool]
    c6: Optional[bool]
    c7: Optional[bool]
    c8: Optional[bool]
    light_ok: bool
    full_ok: Optional[bool]
    c1_raw: bool
    c1_complemented: bool
    c8_origin0: Optional[bool]
    c8_origin1: Optional[bool]
    cond1_interpretation: str
    time_origin: int
    level: str
    witnesses: list = field(default_factory=list)
    failure_counts: dict = field(default_factory=dict)

    @property
    def first_failed_condition(self) -> Optional[str]:
        for name in ("div3", "c1", "c2", "c3", "c4", "c5", "c6", "c7", "c8"):
            if getattr(self, name) is False:
                return name
        return None

    def to_json_dict(self) -> dict:
        return {
            "T": self.T,
            "Tbar": self.Tbar,
            "lambda": self.lambda_value,
            "lambdaBar": self.lambda_bar,
            "K": self.K,
            "div3": self.div3,
            "c1": self.c1,
            "c2": self.c2,
            "c3": self.c3,
            "c4": self.c4,
            "c5": self.c5,
            "c6": self.c6,
            "c7": self.c7,
            "c8": self.c8,
            "light": self.light_ok,
            "full": self.full_ok,
            "c1Raw": self.c1_raw,
            "c1Complemented": self.c1_complemented,
            "c8Origin0": self.c8_origin0,
            "c8Origin1": self.c8_origin1,
            "cond1Interpretation": self.cond1_interpretation,
            "timeOrigin": self.time_origin,
            "level": self.level,
            "witnesses": self.witnesses,
            "failureCounts": self.failure_counts,
        }


def _check_phase_pattern(phases: PhaseTable, slot_count: int) -> tuple[bool, list]:
    """The parity pattern: F(0) even; F(2k-1) and F(2k) share parity;
    for even K the last slot's parity agrees across nodes."""
    ok = True
    witnesses = []

    def note(node, slot, detail):
        nonlocal ok
        ok = False
        if len(witnesses) < _WITNESS_CAP:
            witnesses.append(
                {"condition": "c8", "node": node, "slot": slot, "detail": detail}
            )

    for v, row in enumerate(phases.values):
        if row[0] == -1:
            note(v, 0, "phase undefined")
        elif row[0] % 2 != 0:
            note(v, 0, f"F(0)={row[0]} is odd")
        for k in range(1, (slot_count + 1) // 2):
            lo, hi = row[2 * k - 1], row[2 * k]
            if lo == -1 or hi == -1:
                note(v, 2 * k - 1, "phase undefined")
            elif lo % 2 != hi % 2:
                note(v, 2 * k - 1, f"F({2*k-1})={lo} vs F({2*k})={hi}")
    if slot_count % 2 == 0 and slot_count > 0:
        last = [row[slot_count - 1] for row in phases.values]
        if any(x == -1 for x in last):
            note(last.index(-1), slot_count - 1, "phase undefined")
        elif len({x % 2 for x in last}) > 1:
            note(0, slot_count - 1, f"last-slot parities differ: {last}")
    return ok, witnesses


def check_ipf(
    run: RunRecord,
    complement_run: RunRecord,
    level: str = "full",
    cond1_interpretation: str = "complemented",
    time_origin: int = 1,
) -> IpfReport:
    """Evaluate the invariant on a run pair.

    Degenerate runs (period <= 2) cannot be checked and raise
    DegenerateRun; everything else comes back as a report, including
    failures.
    """
    if level not in CHECK_LEVELS:
        raise ValueError(f"unknown check level {level!r}")
    if cond1_interpretation not in COND1_INTERPRETATIONS:
        raise ValueError(f"unknown interpretation {cond1_interpretation!r}")
    if time_origin not in (0, 1):
        raise ValueError("time_origin must be 0 or 1")
    if run.degenerate or complement_run.degenerate:
        raise DegenerateRun(
            f"periods {run.period}, {complement_run.period}: no mirror trajectory"
        )

    T, Tbar = run.period, complement_run.period
    lam = run.lambda_value
    lam_bar = complement_run.lambda_value
    witnesses: list = []
    failure_counts: dict = {}

    div3 = (T + Tbar) % 3 == 0
    K = (T + Tbar) // 3 if div3 else None
    if not div3:
        witnesses.append(
            {"condition": "div3", "detail": f"T+Tbar={T + Tbar} not divisible by 3"}
        )
        failure_counts["div3"] = 1

    g_final = run.final_state
    h_final = complement_run.final_state
    c1_raw = g_final == h_final
    c1_complemented = g_final == complement(h_final)
    c1 = c1_complemented if cond1_interpretation == "complemented" else c1_raw
    if not c1:
        witnesses.append(
            {
                "condition": "c1",
                "detail": f"G_T={g_final} H_Tbar={h_final} "
                f"({cond1_interpretation} reading)",
            }
        )
        failure_counts["c1"] = 1

    if lam is None or lam_bar is None:
        c2 = c3 = False
        witnesses.append(
            {
                "condition": "c2",
                "detail": "per-node A-surplus is not uniform across nodes",
            }
        )
        failure_counts["c2"] = 1
    else:
        c2 = lam == -lam_bar
        c3 = (Tbar - T) == lam
        if not c2:
            witnesses.append(
                {"condition": "c2", "detail": f"lambda={lam} lambdaBar={lam_bar}"}
            )
            failure_counts["c2"] = 1
        if not c3:
            witnesses.append(
                {"condition": "c3", "detail": f"Tbar-T={Tbar - T} lambda={lam}"}
            )
            failure_counts["c3"] = 1

    light_ok = div3 and c1 and c2 and c3

    c4 = c5 = c6 = c7 = c8 = None
    c8_origin0 = c8_origin1 = None
    full_ok: Optional[bool] = None

    if level == "full":
        if K is None:
            full_ok = False
            witnesses.append(
                {
                    "condition": "c4",
                    "detail": "slot conditions skipped: K undefined without div3",
                }
            )
        else:
            slots, comp_slots = build_slots(run, complement_run, K)
            for table, tag in ((slots, "run"), (comp_slots, "complement run")):
                for v in table.overflow_nodes:
                    witnesses.append(
                        {
                            "condition": "slots",
                            "node": v,
                            "detail": f"{tag}: {table.event_counts[v]} events for "
                            f"{K} slots",
                        }
                    )
                    failure_counts["slots"] = failure_counts.get("slots", 0) + 1

            def slot_condition(name, predicate):
                ok = True
                count = 0
                for v in range(len(slots.a)):
                    for k in range(K):
                        if not predicate(v, k):
                            ok = False
                            count += 1
                            if count <= _WITNESS_CAP:
                                witnesses.append(
                                    {"condition": name, "node": v, "slot": k}
                                )
                if count:
                    failure_counts[name] = count
                return ok

            c4 = slot_condition("c4", lambda v, k: slots.c[v][k] + comp_slots.c[v][k] == 1)
            c5 = slot_condition("c5", lambda v, k: slots.a[v][k] + comp_slots.a[v][k] == 1)
            c6 = slot_condition("c6", lambda v, k: comp_slots.a[v][k] == slots.c[v][k])
            c7 = slot_condition("c7", lambda v, k: comp_slots.c[v][k] == slots.a[v][k])

            c8_results = {}
            c8_witnesses = {}
            for origin in (0, 1):
                phases = integral_phase(slots, comp_slots, origin)
                ok, wit = _check_phase_pattern(phases, K)
                c8_results[origin] = ok
                c8_witnesses[origin] = wit
            c8_origin0 = c8_results[0]
            c8_origin1 = c8_results[1]
            c8 = c8_results[time_origin]
            if not c8:
                witnesses.extend(c8_witnesses[time_origin])
                failure_counts["c8"] = len(c8_witnesses[time_origin])

            full_ok = light_ok and all((c4, c5, c6, c7, c8))

    return IpfReport(
        T=T,
        Tbar=Tbar,
        lambda_value=lam,
        lambda_bar=lam_bar,
        K=K,
        div3=div3,
        c1=c1,
        c2=c2,
        c3=c3,
        c4=c4,
        c5=c5,
        c6=c6,
        c7=c7,
        c8=c8,
        light_ok=light_ok,
        full_ok=full_ok,
        c1_raw=c1_raw,
        c1_complemented=c1_complemented,
        c8_origin0=c8_origin0,
        c8_origin1=c8_origin1,
        cond1_interpretation=cond1_interpretation,
        time_origin=time_origin,
        level=level,
        witnesses=witnesses,
        failure_counts=failure_counts,
    )
