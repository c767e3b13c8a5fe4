"""Resolution tables: sets of rows over the six-valued alphabet
{0, 1, 2, -0, -1, -2} attached to masks, and their algebra.

Values are encoded 0..5 with 3, 4, 5 standing for the barred (negative)
digits -0, -1, -2; a value decomposes into (digit mod 3, bar flag).
A stored table is always the "=0" sub-table; the other five sub-tables
are derived on demand by the six-element substitution group.

Column convention (shared with the mask geometry): column 0 is the
central point, the remaining columns are the mask points in ascending
offset order.  Row order is canonical: move column 0 to the end, read
the row as a base-6 numeral (leftmost digit most significant), sort
ascending.

Two reconstructions here are hypotheses rather than settled facts and
mark every output EXPERIMENTAL:

* ``extract_rows`` derives rows from verified run pairs as phase
  differences mod 3 with a bar for slots filled by the complement run
  (hypothesis id "phase-diff-mod3-v1").
* ``build_1_2k1`` grows tables for masks (1, 2^k - 1) by tripling rows
  and deriving the new column from the last one via an injected step
  table; the zero column follows the middle-branch sign fractal.
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass, field
from typing import Iterable, NamedTuple, Optional, Sequence

from .ac23 import Mask, bits_to_coloring, build_graph, degenerate_at, mask_weak_computable, _sample_bits
from .config import Config
from .dynamics import RunRecord, run_to_mirror
from .errors import (
    DimensionMismatch,
    IncompatibleTables,
    MaxStepsExceeded,
    RtParseError,
    UnconfiguredStepTable,
    UnverifiedRuns,
)
from .graph import complement
from .ipf import build_slots, check_ipf

VALUE_TOKENS = ("0", "1", "2", "-0", "-1", "-2")
_TOKEN_TO_VALUE = {tok: v for v, tok in enumerate(VALUE_TOKENS)}

SUBTABLE_TARGETS = ("=0", "=1", "=2", "=-0", "=-1", "=-2")

SMALL, MIDDLE, FULL = "Small", "Middle", "Full"
NOT_COMPLETELY_CORRECT = "NotCompletelyCorrect"
COMPLETELY_CORRECT_1ST = "CompletelyCorrect1st"
COMPLETELY_CORRECT_2ND = "CompletelyCorrect2nd"

EXTRACTION_HYPOTHESIS = "phase-diff-mod3-v1"
ALL_COMBOS_STEP_TABLE = {v: (1, 2, 4) for v in range(6)}
ALL_COMBOS_STEP_TABLE_ID = "all-combos-124"


def value_to_token(value: int) -> str:
    return VALUE_TOKENS[value]


def token_to_value(token: str) -> int:
    try:
        return _TOKEN_TO_VALUE[token]
    except KeyError:
        raise RtParseError(f"bad value token {token!r}") from None


def _parse_target(target: str) -> tuple[int, bool]:
    if target.startswith("=") and target[1:] in _TOKEN_TO_VALUE:
        value = _TOKEN_TO_VALUE[target[1:]]
        return value % 3, value >= 3
    raise ValueError(f"unknown sub-table target {target!r}")


def subtable_substitution(value: int, target: str) -> int:
    """Map one value from the "=0" sub-table into another sub-table.

    Unbarred digits shift by +c, barred digits by -c; a barred target
    additionally toggles the bar.  The six maps form a group of order
    six under composition.
    """
    c, toggle = _parse_target(target)
    digit, barred = value % 3, value >= 3
    new_digit = (digit - c) % 3 if barred else (digit + c) % 3
    new_barred = barred ^ toggle
    return new_digit + (3 if new_barred else 0)


def substitute_row(row: Sequence[int], target: str) -> tuple[int, ...]:
    c, toggle = _parse_target(target)
    out = []
    for value in row:
        digit, barred = value % 3, value >= 3
        new_digit = (digit - c) % 3 if barred else (digit + c) % 3
        out.append(new_digit + (3 if barred ^ toggle else 0))
    return tuple(out)


def canonical_key(row: Sequence[int]) -> int:
    """Move column 0 to the end, read base-6, leftmost digit most
    significant.  Injective on rows of a fixed width."""
    key = 0
    for value in row[1:]:
        key = key * 6 + value
    return key * 6 + row[0]


class ResolutionTable:
    """An immutable set of rows in canonical order.

    ``mask`` ties the columns to mask offsets when known;
    ``experimental`` marks tables produced by a reconstruction
    hypothesis (named in ``hypothesis``).
    """

    __slots__ = ("N", "rows", "mask", "experimental", "hypothesis", "subtable")

    def __init__(
        self,
        N: int,
        rows: Iterable[Sequence[int]] = (),
        mask: Optional[Mask] = None,
        experimental: bool = False,
        hypothesis: Optional[str] = None,
        subtable: str = "=0",
    ):
        if N < 2:
            raise ValueError(f"table width must be at least 2, got {N}")
        if mask is not None and mask.point_count != N:
            raise ValueError(
                f"mask {mask} has {mask.point_count} points, table width is {N}"
            )
        normalized = set()
        for row in rows:
            row = tuple(row)
            if len(row) != N:
                raise ValueError(f"row {row} has length {len(row)}, expected {N}")
            if any(not (0 <= v <= 5) for v in row):
                raise ValueError(f"row {row} contains values outside 0..5")
            normalized.add(row)
        self.N = N
        self.rows = tuple(sorted(normalized, key=canonical_key))
        self.mask = mask
        self.experimental = experimental
        self.hypothesis = hypothesis
        self.subtable = subtable

    @property
    def row_count(self) -> int:
        return len(self.rows)

    # C_R is the traditional name for the row count.
    C_R = row_count

    def row_set(self) -> frozenset:
        return frozenset(self.rows)

    def value_set(self) -> frozenset:
        return frozenset(v for row in self.rows for v in row)

    def __eq__(self, other) -> bool:
        return (
            isinstance(other, ResolutionTable)
            and self.N == other.N
            and self.rows == other.rows
        )

    def __hash__(self) -> int:
        return hash((self.N, self.rows))

    def __repr__(self) -> str:
        tag = f" mask={self.mask}" if self.mask else ""
        return f"ResolutionTable(N={self.N}, rows={self.row_count}{tag})"

    def tag(self) -> str:
        return f"[{self.mask.n},{self.mask.m}]" if self.mask else f"<N={self.N}>"


# -- sub-table symmetry -------------------------------------------------


def expand_subtables(table: ResolutionTable) -> dict[str, ResolutionTable]:
    """All six sub-tables, keyed by target.  Row counts are preserved;
    the "=0" entry is the table itself."""
    out = {}
    for target in SUBTABLE_TARGETS:
        out[target] = ResolutionTable(
            table.N,
            (substitute_row(row, target) for row in table.rows),
            mask=table.mask,
            experimental=table.experimental,
            hypothesis=table.hypothesis,
            subtable=target,
        )
    return out


# -- classification ------------------------------------------------------


def classify(table: ResolutionTable) -> str:
    """Small: values only in {1, 2, -1}.  Middle: additionally 0.
    Full: any barred 0 or barred 2 present."""
    values = table.value_set()
    if values & {3, 5}:
        return FULL
    if 0 in values:
        return MIDDLE
    return SMALL


class SCounts(NamedTuple):
    """Occurrence counts of the six values, outside the zero column
    (s_*) and inside it (s0_*)."""

    s_p0: int
    s_p1: int
    s_p2: int
    s_m0: int
    s_m1: int
    s_m2: int
    s0_p0: int
    s0_p1: int
    s0_p2: int
    s0_m0: int
    s0_m1: int
    s0_m2: int


def s_counts(table: ResolutionTable) -> SCounts:
    rest = [0] * 6
    zero = [0] * 6
    for row in table.rows:
        zero[row[0]] += 1
        for value in row[1:]:
            rest[value] += 1
    return SCounts(*rest, *zero)


def kind(table: ResolutionTable) -> str:
    """Completely correct: the zero column holds only 1 and -1.
    First kind: the rows that are plus-minus-one everywhere enumerate
    every sign pattern over the non-zero columns, and +1 fills exactly
    half of a full sign table's worth of zero-column entries."""
    sc = s_counts(table)
    if sc.s0_p0 or sc.s0_p2 or sc.s0_m0 or sc.s0_m2:
        return NOT_COMPLETELY_CORRECT
    want = 2 ** (table.N - 1)
    sign_tails = {
        row[1:] for row in table.rows if all(v in (1, 4) for v in row[1:])
    }
    if sc.s0_p1 == want and len(sign_tails) == want:
        return COMPLETELY_CORRECT_1ST
    return COMPLETELY_CORRECT_2ND


# -- set algebra ---------------------------------------------------------


def _check_dims(a: ResolutionTable, b: ResolutionTable) -> None:
    if a.N != b.N:
        raise DimensionMismatch(f"table widths differ: {a.N} vs {b.N}")


def _merge_tags(a: ResolutionTable, b: ResolutionTable) -> dict:
    return {
        "mask": a.mask if a.mask == b.mask else None,
        "experimental": a.experimental or b.experimental,
        "hypothesis": a.hypothesis if a.hypothesis == b.hypothesis else None,
    }


def intersect(a: ResolutionTable, b: ResolutionTable) -> ResolutionTable:
    _check_dims(a, b)
    return ResolutionTable(a.N, a.row_set() & b.row_set(), **_merge_tags(a, b))


def union(a: ResolutionTable, b: ResolutionTable) -> ResolutionTable:
    _check_dims(a, b)
    return ResolutionTable(a.N, a.row_set() | b.row_set(), **_merge_tags(a, b))


def includes(a: ResolutionTable, b: ResolutionTable) -> bool:
    """True iff a contains every row of b."""
    _check_dims(a, b)
    return b.row_set() <= a.row_set()


def equals(a: ResolutionTable, b: ResolutionTable) -> bool:
    _check_dims(a, b)
    return a.rows == b.rows


# -- compatibility and the integral table --------------------------------


@dataclass
class IntegralTable:
    """Union of compatible tables of one width, with the fold record:
    (table tag, cumulative row count) per fold step, largest first."""

    table: ResolutionTable
    steps: list = field(default_factory=list)


def compatibility(tables: Sequence[ResolutionTable]) -> IntegralTable:
    """Check pairwise compatibility, then fold unions largest-first.

    Compatibility requires that no row of one table appears, after
    deleting the zero column, inside a *different* sub-table of another
    table.  The zero column must be ignored in the comparison; keeping
    it breaks the merge.  Violations raise IncompatibleTables.
    """
    if not tables:
        raise ValueError("need at least one table")
    widths = {t.N for t in tables}
    if len(widths) > 1:
        raise DimensionMismatch(f"table widths differ: {sorted(widths)}")

    tails = [frozenset(row[1:] for row in t.rows) for t in tables]
    for i, owner in enumerate(tables):
        for j, other in enumerate(tables):
            if i == j:
                continue
            for target in SUBTABLE_TARGETS[1:]:
                image = {substitute_row(row, target)[1:] for row in other.rows}
                hit = tails[i] & image
                if hit:
                    raise IncompatibleTables(
                        next(iter(hit)), owner.tag(), other.tag(), target
                    )

    order = sorted(
        tables, key=lambda t: (-t.row_count, t.tag(), t.rows)
    )
    merged = order[0]
    steps = [(order[0].tag(), merged.row_count)]
    for t in order[1:]:
        merged = union(merged, t)
        steps.append((t.tag(), merged.row_count))
    return IntegralTable(merged, steps)


# -- coincidence ----------------------------------------------------------


@dataclass
class CoincidenceMatrix:
    """Pairwise relations between tables of one width.

    Each cell records equality, inclusion either way, and the
    intersection row count.  Cells whose intersection tables are
    identical (non-empty, appearing more than once) share a group id;
    diagonal cells take part with the table itself, so a group also
    reveals a table that equals an intersection of two others."""

    tags: list
    cells: dict

    def csv_rows(self) -> list[list]:
        rows = []
        for (i, j), cell in sorted(self.cells.items()):
            rows.append(
                [
                    self.tags[i],
                    self.tags[j],
                    cell["relation"],
                    cell["intersection_cr"],
                    cell["group"] if cell["group"] is not None else "",
                ]
            )
        return rows


def coincidence_matrix(tables: Sequence[ResolutionTable]) -> CoincidenceMatrix:
    widths = {t.N for t in tables}
    if len(widths) > 1:
        raise DimensionMismatch(f"table widths differ: {sorted(widths)}")
    tags = [t.tag() for t in tables]
    cells = {}
    inter_content: dict[tuple, list] = {}
    for i in range(len(tables)):
        for j in range(i, len(tables)):
            a, b = tables[i], tables[j]
            inter = intersect(a, b)
            if i == j:
                relation = "self"
            elif equals(a, b):
                relation = "equal"
            elif includes(a, b):
                relation = "includes_ij"
            elif includes(b, a):
                relation = "includes_ji"
            else:
                relation = "intersect"
            cells[(i, j)] = {
                "relation": relation,
                "intersection_cr": inter.row_count,
                "rows": inter.rows,
                "group": None,
            }
            inter_content.setdefault(inter.rows, []).append((i, j))
    group_id = 0
    for rows_key in sorted(
        (k for k, v in inter_content.items() if len(v) > 1 and k),
        key=lambda rows: (len(rows), rows),
    ):
        group_id += 1
        for cell_key in inter_content[rows_key]:
            cells[cell_key]["group"] = group_id
    for cell in cells.values():
        del cell["rows"]
    return CoincidenceMatrix(tags, cells)


# -- inductive builder ----------------------------------------------------


def _default_base_rows() -> list[tuple[int, ...]]:
    """Hypothesis base for the two-offset mask (1,1): all value
    combinations of {1, 2, -1} over the two mask columns, zero column
    +1 exactly on the rows free of 2."""
    rows = []
    for c1 in (1, 2, 4):
        for c2 in (1, 2, 4):
            col0 = 1 if 2 not in (c1, c2) else 4
            rows.append((col0, c1, c2))
    return rows


def parse_step_table(data: dict) -> dict[int, tuple[int, int, int]]:
    """Step table from token form {"1": ["1","2","-1"], ...}."""
    table = {}
    for key, triple in data.items():
        if len(triple) != 3:
            raise RtParseError(f"step table entry {key!r} needs three values")
        table[token_to_value(key)] = tuple(token_to_value(t) for t in triple)
    missing = set(range(6)) - set(table)
    if missing:
        raise RtParseError(
            f"step table misses values {[value_to_token(v) for v in sorted(missing)]}"
        )
    return table


def build_1_2k1(
    k: int,
    step_table: Optional[dict[int, tuple[int, int, int]]] = None,
    base_rows: Optional[Iterable[Sequence[int]]] = None,
    hypothesis: str = ALL_COMBOS_STEP_TABLE_ID,
) -> ResolutionTable:
    """Grow the table for mask (1, 2^k - 1) by induction on k.

    Each induction step triples every row: the three copies receive the
    new last-column values the step table assigns to the row's previous
    last column.  The zero column follows the sign fractal: a row keeps
    +1 only while its construction path avoids the middle branch.
    Row counts are 3^(N-1) by construction.

    The step table is a hypothesis and must be supplied explicitly
    (``ALL_COMBOS_STEP_TABLE`` is the packaged default hypothesis);
    outputs are marked experimental.
    """
    if k < 1:
        raise ValueError(f"k must be at least 1, got {k}")
    if step_table is None:
        raise UnconfiguredStepTable(
            "no step table supplied; pass one (e.g. ALL_COMBOS_STEP_TABLE)"
        )
    for value in range(6):
        if value not in step_table or len(step_table[value]) != 3:
            raise UnconfiguredStepTable(
                f"step table needs a triple for value {value_to_token(value)}"
            )

    rows = [tuple(row) for row in (base_rows or _default_base_rows())]
    for row in rows:
        if len(row) != 3:
            raise ValueError(f"base row {row} must have width 3")

    for _ in range(k - 1):
        grown = []
        for row in rows:
            for branch, new_value in enumerate(step_table[row[-1]]):
                col0 = 1 if (row[0] == 1 and branch != 1) else 4
                grown.append((col0,) + row[1:] + (new_value,))
        rows = grown

    return ResolutionTable(
        k + 2,
        rows,
        mask=Mask(1, 2**k - 1),
        experimental=True,
        hypothesis=hypothesis,
    )


# -- reflection -----------------------------------------------------------


def reflect(table: ResolutionTable) -> ResolutionTable:
    """Re-express the table for the mirrored mask: the column at offset
    x becomes the column at offset -x of the reflected mask."""
    if table.mask is None:
        raise ValueError("reflection needs a mask-tagged table")
    src = table.mask.column_offsets
    dst = table.mask.reflected.column_offsets
    perm = [src.index(-offset) for offset in dst]
    rows = (tuple(row[j] for j in perm) for row in table.rows)
    return ResolutionTable(
        table.N,
        rows,
        mask=table.mask.reflected,
        experimental=table.experimental,
        hypothesis=table.hypothesis,
    )


# -- extraction from runs --------------------------------------------------


def extract_rows(
    mask: Mask,
    run_pairs: Iterable[tuple[RunRecord, RunRecord]],
    level: str = "full",
    cond1_interpretation: str = "complemented",
    time_origin: int = 1,
    hypothesis: str = EXTRACTION_HYPOTHESIS,
) -> ResolutionTable:
    """EXPERIMENTAL: derive a table from verified run pairs.

    For every node v and slot k, the row holds, per mask column at
    offset o, the difference of the integral phases of node v+o and
    node v at slot k, mod 3, barred when the neighbor's slot was filled
    by the complement run.  Pairs failing the configured invariant
    level raise UnverifiedRuns.  Slots not filled by exactly one run at
    every needed node are skipped.
    """
    rows: set[tuple[int, ...]] = set()
    offsets = mask.column_offsets
    for run, comp_run in run_pairs:
        report = check_ipf(
            run,
            comp_run,
            level=level,
            cond1_interpretation=cond1_interpretation,
            time_origin=time_origin,
        )
        ok = report.light_ok if level == "light" else report.full_ok
        if not ok:
            raise UnverifiedRuns(
                f"pair starting {run.start_ab!r} fails {level} check "
                f"({report.first_failed_condition})"
            )
        slots, comp_slots = build_slots(run, comp_run)
        L = run.graph.node_count

        def phase(u: int, k: int) -> Optional[tuple[int, bool]]:
            f, fbar = slots.f[u][k], comp_slots.f[u][k]
            if f != -1 and fbar == -1:
                return f, False
            if f == -1 and fbar != -1:
                return fbar, True
            return None

        for v in range(L):
            for k in range(slots.slot_count):
                center = phase(v, k)
                if center is None:
                    continue
                row = []
                for offset in offsets:
                    got = phase((v + offset) % L, k)
                    if got is None:
                        row = None
                        break
                    phi, barred = got
                    row.append((phi - center[0]) % 3 + (3 if barred else 0))
                if row is not None:
                    rows.add(tuple(row))
    return ResolutionTable(
        mask.point_count, rows, mask=mask, experimental=True, hypothesis=hypothesis
    )


def extraction_run_pairs(
    mask: Mask, config: Config
) -> Iterable[tuple[RunRecord, RunRecord]]:
    """Verified run pairs for extraction, walking the configured
    envelope.  Degenerate circle sizes, degenerate runs, unresolved
    runs and pairs failing the configured level are skipped (extraction
    wants evidence from clean runs only)."""
    for L in range(config.lmin, config.lmax + 1):
        if degenerate_at(mask, L) or not mask_weak_computable(mask, L):
            continue
        g = build_graph(mask, L)
        if L <= config.exhaustive_cutoff:
            starts = (bits_to_coloring(bits, L) for bits in range(2**L))
        else:
            starts = (
                bits_to_coloring(_sample_bits(config.seed, mask.n, mask.m, L, i), L)
                for i in range(config.samples_per_L)
            )
        for start in starts:
            try:
                run = run_to_mirror(g, start, config.max_steps)
                comp_run = run_to_mirror(g, complement(start), config.max_steps)
            except MaxStepsExceeded:
                continue
            if run.degenerate or comp_run.degenerate:
                continue
            report = check_ipf(
                run,
                comp_run,
                level=config.check_level,
                cond1_interpretation=config.cond1_interpretation,
                time_origin=config.time_origin,
            )
            ok = (
                report.light_ok
                if config.check_level == "light"
                else report.full_ok
            )
            if ok:
                yield run, comp_run


# -- serialization ----------------------------------------------------------


def format_table(table: ResolutionTable) -> str:
    """Text form: a header line, then one row per line in canonical
    order.  Formatting is deterministic, so format/parse round-trips
    are byte-exact."""
    parts = [f"N={table.N}"]
    if table.mask is not None:
        parts.append(f"mask={table.mask.n},{table.mask.m}")
        parts.append(
            "columns=" + ",".join(str(o) for o in table.mask.column_offsets)
        )
    parts.append(f"subtable={table.subtable}")
    if table.experimental:
        parts.append("[EXPERIMENTAL]")
    if table.hypothesis:
        parts.append(f"hypothesis={table.hypothesis}")
    lines = [" ".join(parts)]
    for row in table.rows:
        lines.append(",".join(value_to_token(v) for v in row))
    return "\n".join(lines) + "\n"


def parse_table(text: str) -> ResolutionTable:
    lines = [line for line in text.splitlines() if line.strip()]
    if not lines:
        raise RtParseError("empty table file")
    n = None
    mask = None
    experimental = False
    hypothesis = None
    subtable = "=0"
    for token in lines[0].split():
        if token.startswith("N="):
            n = int(token[2:])
        elif token.startswith("mask="):
            mask = parse_mask_tag(token[5:])
        elif token.startswith("columns="):
            pass  # derived from the mask; accepted for readability
        elif token.startswith("subtable="):
            subtable = token[9:]
        elif token == "[EXPERIMENTAL]":
            experimental = True
        elif token.startswith("hypothesis="):
            hypothesis = token[11:]
        else:
            raise RtParseError(f"unknown header token {token!r}")
    if n is None:
        raise RtParseError("header misses N=<int>")
    rows = []
    for line in lines[1:]:
        rows.append(tuple(token_to_value(tok.strip()) for tok in line.split(",")))
    return ResolutionTable(
        n,
        rows,
        mask=mask,
        experimental=experimental,
        hypothesis=hypothesis,
        subtable=subtable,
    )


def parse_mask_tag(text: str) -> Mask:
    try:
        n, m = (int(x) for x in text.split(","))
    except ValueError as exc:
        raise RtParseError(f"bad mask tag {text!r}") from exc
    return Mask(n, m)


def save_table(table: ResolutionTable, path) -> None:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write(format_table(table))


def load_table(path) -> ResolutionTable:
    with open(path, encoding="utf-8") as fh:
        return parse_table(fh.read())


def table_digest(table: ResolutionTable) -> str:
    return hashlib.sha256(format_table(table).encode()).hexdigest()


SCOUNTS_CSV_COLUMNS = [
    "n", "m", "N", "C_R", "class", "kind",
    "s+0", "s+1", "s+2", "s-0", "s-1", "s-2",
    "s0+0", "s0+1", "s0+2", "s0-0", "s0-1", "s0-2",
]


def scounts_csv_row(table: ResolutionTable) -> list:
    sc = s_counts(table)
    n = table.mask.n if table.mask else ""
    m = table.mask.m if table.mask else ""
    return [n, m, table.N, table.row_count, classify(table), kind(table), *sc]
