"""Circle automata from bit masks, and the mask-correctness search.

A mask is a pair of positive integers (n, m).  Set bit i of n puts a
connection from every circle position x to x-(i+1); set bit i of m to
x+(i+1).  Reciprocal connections merge into one undirected edge, so
odd n and odd m always yield the full undirected ring and with it a
weak-computable graph at every circle size L.

A mask is *correct* when every circle size and every two-color start
pair keeps the precise-filling invariant from start to mirror.  That is
a claim over all L, so a search can only ever report "correct so far"
relative to the envelope it examined; a single failing pair settles
"incorrect" with a witness.
"""

from __future__ import annotations

import hashlib
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Iterator, Optional

from .config import Config
from .dynamics import run_to_mirror
from .errors import MaxStepsExceeded
from .graph import MixedGraph, complement, weak_computable
from .ipf import check_ipf

CORRECT_SO_FAR = "CorrectSoFar"
INCORRECT = "Incorrect"

_BLOCK_SIZE = 2048


def _offsets(bits: int) -> tuple[int, ...]:
    return tuple(i + 1 for i in range(bits.bit_length()) if (bits >> i) & 1)


@dataclass(frozen=True)
class Mask:
    """A mask (n, m) with its derived geometry.

    ``column_offsets`` fixes the table column convention used
    everywhere: column 0 is the central point (offset 0), the remaining
    columns are the mask points in ascending offset order.
    """

    n: int
    m: int

    def __post_init__(self):
        if self.n < 1 or self.m < 1:
            raise ValueError(f"mask numbers must be positive, got ({self.n},{self.m})")

    @property
    def left_offsets(self) -> tuple[int, ...]:
        return _offsets(self.n)

    @property
    def right_offsets(self) -> tuple[int, ...]:
        return _offsets(self.m)

    @property
    def point_count(self) -> int:
        """Total number of mask points including the central one."""
        return len(self.left_offsets) + len(self.right_offsets) + 1

    @property
    def column_offsets(self) -> tuple[int, ...]:
        signed = sorted([-d for d in self.left_offsets] + list(self.right_offsets))
        return (0, *signed)

    @property
    def reflected(self) -> "Mask":
        return Mask(self.m, self.n)

    def __str__(self) -> str:
        return f"({self.n},{self.m})"


def parse_mask(text: str) -> Mask:
    """Parse 'n,m' into a mask."""
    try:
        n, m = (int(part) for part in text.split(","))
    except ValueError as exc:
        raise ValueError(f"mask must look like 'n,m', got {text!r}") from exc
    return Mask(n, m)


def build_graph(mask: Mask, L: int) -> MixedGraph:
    """The circle graph of a mask at circle size L.

    Connections are x -> x-d for left offsets and x -> x+d for right
    offsets, mod L.  Reciprocal pairs merge into undirected edges,
    self-connections are dropped, duplicates collapse; those anomalies
    make the size degenerate (see ``degenerate_at``) but not invalid.
    """
    if L < 3:
        raise ValueError(f"circle size must be at least 3, got {L}")
    arcs: set[tuple[int, int]] = set()
    for x in range(L):
        for d in mask.left_offsets:
            y = (x - d) % L
            if y != x:
                arcs.add((x, y))
        for d in mask.right_offsets:
            y = (x + d) % L
            if y != x:
                arcs.add((x, y))
    directed = []
    undirected = []
    for u, v in arcs:
        if (v, u) in arcs:
            if u < v:
                undirected.append((u, v))
        else:
            directed.append((u, v))
    return MixedGraph(L, directed=directed, undirected=undirected)


def degenerate_at(mask: Mask, L: int) -> bool:
    """True when the mask's points collide on a circle of size L:
    an offset reaches around (>= L), lands on the center, or two mask
    points land on the same node."""
    if any(d >= L for d in mask.left_offsets + mask.right_offsets):
        return True
    targets = [(-d) % L for d in mask.left_offsets] + [
        d % L for d in mask.right_offsets
    ]
    return 0 in targets or len(set(targets)) != len(targets)


def mask_weak_computable(mask: Mask, L: int) -> bool:
    """Whether the built circle graph is walkable on undirected edges
    alone.  Odd n and m guarantee it at every L."""
    return weak_computable(build_graph(mask, L))


# -- search ------------------------------------------------------------


def bits_to_coloring(bits: int, L: int) -> str:
    """Start-state encoding: bit v set means node v starts as B."""
    return "".join("B" if (bits >> v) & 1 else "A" for v in range(L))


def _sample_bits(seed: int, n: int, m: int, L: int, index: int) -> int:
    """Deterministic, platform-independent start sample."""
    digest = hashlib.sha256(f"{seed}:{n}:{m}:{L}:{index}".encode()).digest()
    return int.from_bytes(digest, "big") & ((1 << L) - 1)


def _scan_block(args: tuple) -> dict:
    """Run one block of starts for one circle size.  Self-contained and
    picklable so blocks can run in worker processes; the outcome depends
    only on the arguments, never on scheduling."""
    (n, m, L, mode, lo, hi, seed, level, cond1, origin, max_steps) = args
    mask = Mask(n, m)
    g = build_graph(mask, L)
    tested = 0
    degenerate_skips = 0
    unresolved = 0
    first_unresolved = None
    witness = None
    for index in range(lo, hi):
        bits = index if mode == "exhaustive" else _sample_bits(seed, n, m, L, index)
        start = bits_to_coloring(bits, L)
        try:
            run = run_to_mirror(g, start, max_steps)
            comp_run = run_to_mirror(g, complement(start), max_steps)
        except MaxStepsExceeded:
            unresolved += 1
            if first_unresolved is None:
                first_unresolved = start
            continue
        if run.degenerate or comp_run.degenerate:
            degenerate_skips += 1
            continue
        report = check_ipf(
            run,
            comp_run,
            level=level,
            cond1_interpretation=cond1,
            time_origin=origin,
        )
        tested += 1
        ok = report.light_ok if level == "light" else report.full_ok
        if not ok:
            witness = {
                "index": index,
                "start": start,
                "condition": report.first_failed_condition,
            }
            break
    return {
        "lo": lo,
        "tested": tested,
        "degenerate_skips": degenerate_skips,
        "unresolved": unresolved,
        "first_unresolved": first_unresolved,
        "witness": witness,
    }


@dataclass
class MaskVerdict:
    """Search outcome for one mask.

    ``status`` is "Incorrect" exactly when a witness was found;
    "CorrectSoFar" is always relative to the tested envelope recorded
    in ``tested`` (correctness is a for-all-L claim no search settles).
    """

    mask: Mask
    status: str
    witness: Optional[dict] = None
    tested: list = field(default_factory=list)
    budget_exhausted: bool = False

    def to_json_dict(self) -> dict:
        return {
            "mask": {"n": self.mask.n, "m": self.mask.m, "N": self.mask.point_count},
            "status": self.status,
            "witness": self.witness,
            "tested": self.tested,
            "budgetExhausted": self.budget_exhausted,
        }

    def csv_row(self) -> list:
        w = self.witness or {}
        return [
            self.mask.n,
            self.mask.m,
            self.mask.point_count,
            self.status,
            w.get("L", ""),
            w.get("start", ""),
            w.get("condition", ""),
        ]


def _blocks_for(total: int) -> Iterator[tuple[int, int]]:
    lo = 0
    while lo < total:
        hi = min(lo + _BLOCK_SIZE, total)
        yield lo, hi
        lo = hi


def classify_mask(
    mask: Mask,
    config: Config,
    budget: Optional[int] = None,
    executor: Optional[ProcessPoolExecutor] = None,
) -> MaskVerdict:
    """Search circle sizes lmin..lmax for an invariant violation.

    Sizes up to the exhaustive cutoff sweep every two-color start; the
    rest draw seeded samples.  The first failure at a clean (non
    degenerate) size settles Incorrect, with the smallest failing size
    and the smallest failing start inside it as the witness.  Results
    at degenerate sizes are recorded per block but never decide the
    headline status.

    ``budget`` caps the number of start pairs examined; exhausting it
    returns the partial verdict with ``budget_exhausted`` set.  Passing
    an ``executor`` parallelizes block scans.
    """
    envelope: list = []
    witness = None
    budget_left = budget
    own_pool = False
    pool = executor
    if pool is None and config.threads > 1:
        pool = ProcessPoolExecutor(max_workers=config.threads)
        own_pool = True
    try:
        for L in range(config.lmin, config.lmax + 1):
            if not mask_weak_computable(mask, L):
                envelope.append({"L": L, "skipped": "not weak computable"})
                continue
            degenerate_L = degenerate_at(mask, L)
            if L <= config.exhaustive_cutoff:
                mode, total = "exhaustive", 2**L
            else:
                mode, total = "sampled", config.samples_per_L
            if total == 0:
                continue
            exhausted_here = False
            if budget_left is not None:
                if budget_left <= 0:
                    break
                if total > budget_left:
                    total = budget_left
                    exhausted_here = True
                budget_left -= total

            argv = [
                (
                    mask.n,
                    mask.m,
                    L,
                    mode,
                    lo,
                    hi,
                    config.seed,
                    config.check_level,
                    config.cond1_interpretation,
                    config.time_origin,
                    config.max_steps,
                )
                for lo, hi in _blocks_for(total)
            ]
            if pool is not None:
                results = list(pool.map(_scan_block, argv))
            else:
                results = [_scan_block(a) for a in argv]

            block = {
                "L": L,
                "mode": mode,
                "planned": total,
                "tested": sum(r["tested"] for r in results),
                "degenerate_skips": sum(r["degenerate_skips"] for r in results),
                "unresolved": sum(r["unresolved"] for r in results),
                "degenerate_L": degenerate_L,
            }
            unresolved_examples = [
                r["first_unresolved"] for r in results if r["first_unresolved"]
            ]
            if unresolved_examples:
                block["first_unresolved"] = unresolved_examples[0]
            found = next((r["witness"] for r in results if r["witness"]), None)
            if found is not None:
                found = {
                    "L": L,
                    "start": found["start"],
                    "condition": found["condition"],
                }
                if degenerate_L:
                    block["degenerate_witness"] = found
                else:
                    witness = found
            envelope.append(block)
            if exhausted_here:
                return MaskVerdict(
                    mask,
                    INCORRECT if witness else CORRECT_SO_FAR,
                    witness,
                    envelope,
                    budget_exhausted=True,
                )
            if witness is not None:
                break
    finally:
        if own_pool:
            pool.shutdown()

    if envelope and all("skipped" in block for block in envelope):
        raise ValueError(
            f"mask {mask} is not weak computable at any L in "
            f"{config.lmin}..{config.lmax}"
        )
    status = INCORRECT if witness else CORRECT_SO_FAR
    return MaskVerdict(mask, status, witness, envelope, budget_exhausted=False)


# -- verdict grid ------------------------------------------------------

GRID_CSV_COLUMNS = ["n", "m", "N", "status", "witnessL", "witnessStart", "conditionFailed"]


@dataclass
class VerdictGrid:
    """Verdicts for all odd masks up to a bound, one cell per (n, m)."""

    n_max: int
    m_max: int
    cells: dict = field(default_factory=dict)
    cr_annotations: dict = field(default_factory=dict)

    def csv_rows(self) -> list[list]:
        rows = []
        for n in range(1, self.n_max + 1, 2):
            for m in range(1, self.m_max + 1, 2):
                rows.append(self.cells[(n, m)].csv_row())
        return rows

    def to_json_dict(self) -> dict:
        cells = []
        for (n, m), verdict in sorted(self.cells.items()):
            cell = verdict.to_json_dict()
            if (n, m) in self.cr_annotations:
                cell["C_R"] = self.cr_annotations[(n, m)]
            cells.append(cell)
        return {"nMax": self.n_max, "mMax": self.m_max, "cells": cells}

    def is_reflection_symmetric(self) -> bool:
        """Status (and witness size, when incorrect) agrees between each
        cell and its mirror."""
        for (n, m), verdict in self.cells.items():
            other = self.cells.get((m, n))
            if other is None or other.status != verdict.status:
                return False
            if verdict.witness and other.witness:
                if verdict.witness["L"] != other.witness["L"]:
                    return False
        return True


def verdict_grid(
    n_max: int,
    m_max: int,
    config: Config,
    budget_per_cell: Optional[int] = None,
    resume_rows: Optional[dict] = None,
    on_cell=None,
    cr_annotations: Optional[dict] = None,
) -> VerdictGrid:
    """Classify every odd mask with n <= n_max, m <= m_max.

    Each cell is computed independently (no mirroring shortcut), so the
    grid's reflection symmetry stays a checkable fact.  ``resume_rows``
    maps (n, m) to a previously computed MaskVerdict and lets an
    interrupted grid continue; ``on_cell`` is called after each newly
    computed cell, which is the hook incremental writers use.
    ``cr_annotations`` maps (n, m) to externally supplied table row
    counts that decorate the JSON view of the grid.
    """
    if n_max % 2 == 0 or m_max % 2 == 0:
        raise ValueError("grid bounds must be odd")
    grid = VerdictGrid(n_max, m_max, cr_annotations=dict(cr_annotations or {}))
    pool = None
    if config.threads > 1:
        pool = ProcessPoolExecutor(max_workers=config.threads)
    try:
        for n in range(1, n_max + 1, 2):
            for m in range(1, m_max + 1, 2):
                if resume_rows and (n, m) in resume_rows:
                    grid.cells[(n, m)] = resume_rows[(n, m)]
                    continue
                verdict = classify_mask(
                    Mask(n, m), config, budget=budget_per_cell, executor=pool
                )
                grid.cells[(n, m)] = verdict
                if on_cell is not None:
                    on_cell(verdict)
    finally:
        if pool is not None:
            pool.shutdown()
    return grid
