"""Synchronous recoloring dynamics and mirror trajectories.

Every node is recolored simultaneously from the previous state.  The
choice between the two recoloring rules at a node is the P-condition:
whether any of its out-neighbors is colored C.

    rule I  (P false):  A->A, B->C, C->B
    rule II (P true):   A->C, B->A, C->B

The dynamics is reversible: transliterate, step once, transliterate
again walks the trajectory backwards.

A trajectory starts from a two-color {A,B} state.  The first step turns
it into an {A,C} state (rule I applies everywhere), time t = 1.  The
walk continues until the state whose successor equals its own
transliteration; that time is the period T and the successor is the
mirror state.  Because both rules send C to B, the successor always
keeps new-B = old-C, so the mirror test reduces to "new C bits == old
B bits" on packed states.

States are packed as a pair of ints ``(c_bits, b_bits)``: bit v of
``c_bits`` is set iff node v is colored C, likewise for B; A is the
remainder.  Per-node A/C occurrence counts are accumulated during the
run with ripple-carry counter planes so that per-node statistics do not
need a second pass over the trajectory.
"""

from __future__ import annotations

import csv
import json
from typing import Optional

from .errors import MaxStepsExceeded
from .graph import MixedGraph, transliterate, validate_coloring

DEFAULT_MAX_STEPS = 10**6


# -- packing -----------------------------------------------------------


def pack(coloring: str) -> tuple[int, int]:
    """String over ABC -> (c_bits, b_bits)."""
    c_bits = 0
    b_bits = 0
    for v, ch in enumerate(coloring):
        if ch == "C":
            c_bits |= 1 << v
        elif ch == "B":
            b_bits |= 1 << v
    return c_bits, b_bits


def unpack(node_count: int, c_bits: int, b_bits: int) -> str:
    out = []
    for v in range(node_count):
        bit = 1 << v
        if c_bits & bit:
            out.append("C")
        elif b_bits & bit:
            out.append("B")
        else:
            out.append("A")
    return "".join(out)


def _step_packed(
    out_masks: tuple[int, ...], full: int, c_bits: int, b_bits: int
) -> tuple[int, int]:
    """One synchronous step on a packed state."""
    p = 0
    for v, mask in enumerate(out_masks):
        if mask & c_bits:
            p |= 1 << v
    a_bits = full & ~(c_bits | b_bits)
    new_c = (b_bits & ~p) | (a_bits & p)
    new_b = c_bits
    return new_c, new_b


def _add_to_planes(planes: list[int], x: int) -> None:
    """Add the bitmask x into per-bit-position binary counters."""
    for i in range(len(planes)):
        carry = planes[i] & x
        planes[i] ^= x
        if not carry:
            return
        x = carry
    planes.append(x)


def _plane_count(planes: list[int], v: int) -> int:
    total = 0
    for i, plane in enumerate(planes):
        total += ((plane >> v) & 1) << i
    return total


# -- public single-step operations ------------------------------------


def p_condition(g: MixedGraph, coloring: str, v: int) -> bool:
    """True iff some out-neighbor of v is colored C."""
    validate_coloring(coloring, g.node_count)
    return any(coloring[u] == "C" for u in g.out_neighbors(v))


def step(g: MixedGraph, coloring: str) -> str:
    """Apply one synchronous recoloring step."""
    validate_coloring(coloring, g.node_count)
    c_bits, b_bits = pack(coloring)
    full = (1 << g.node_count) - 1
    nc, nb = _step_packed(g.out_masks, full, c_bits, b_bits)
    return unpack(g.node_count, nc, nb)


def predecessor(g: MixedGraph, coloring: str) -> str:
    """The unique state whose step yields ``coloring``.

    Reversibility: transliterate, step forward once, transliterate again.
    """
    return transliterate(step(g, transliterate(coloring)))


# -- trajectories ------------------------------------------------------


class RunRecord:
    """A forward trajectory from a two-color start to its mirror state.

    ``states`` holds the trajectory at times t = 1..T; the {A,B} start
    state itself sits before t = 1 and is kept in ``start_ab``.  A run
    with T <= 2 is degenerate (no proper mirror state; the uniform all-A
    and all-B starts are the standard cases) and is flagged as such.
    """

    def __init__(
        self,
        graph: MixedGraph,
        start_ab: str,
        packed_states: list[tuple[int, int]],
        a_planes: list[int],
        c_planes: list[int],
    ):
        self.graph = graph
        self.start_ab = start_ab
        self.packed_states = packed_states
        self.period = len(packed_states)
        self.degenerate = self.period <= 2
        self._a_planes = a_planes
        self._c_planes = c_planes
        self._states: Optional[list[str]] = None
        self._histories: Optional[tuple[str, ...]] = None
        self._counts: Optional[tuple[tuple[int, int, int], ...]] = None

    # -- materialized views -------------------------------------------

    @property
    def states(self) -> list[str]:
        """Colorings at t = 1..T."""
        if self._states is None:
            n = self.graph.node_count
            self._states = [unpack(n, c, b) for c, b in self.packed_states]
        return self._states

    @property
    def final_state(self) -> str:
        c, b = self.packed_states[-1]
        return unpack(self.graph.node_count, c, b)

    @property
    def mirror_state(self) -> str:
        """The state after t = T, equal to the transliteration of G_T."""
        return transliterate(self.final_state)

    @property
    def histories(self) -> tuple[str, ...]:
        """Per node, its color sequence over t = 1..T."""
        if self._histories is None:
            self._histories = tuple(
                "".join(state[v] for state in self.states)
                for v in range(self.graph.node_count)
            )
        return self._histories

    @property
    def color_counts(self) -> tuple[tuple[int, int, int], ...]:
        """Per node, (N_A, N_B, N_C) over t = 1..T."""
        if self._counts is None:
            counts = []
            for v in range(self.graph.node_count):
                n_a = _plane_count(self._a_planes, v)
                n_c = _plane_count(self._c_planes, v)
                counts.append((n_a, self.period - n_a - n_c, n_c))
            self._counts = tuple(counts)
        return self._counts

    @property
    def lambda_per_node(self) -> tuple[int, ...]:
        """Per node, N_A - N_C.  When B and C counts agree (they do on
        weak-computable graphs) this is the A-surplus parameter."""
        return tuple(n_a - n_c for n_a, _, n_c in self.color_counts)

    @property
    def lambda_value(self) -> Optional[int]:
        """The common per-node A-surplus, or None if nodes disagree."""
        values = set(self.lambda_per_node)
        if len(values) == 1:
            return next(iter(values))
        return None

    # -- export --------------------------------------------------------

    def to_json_dict(self) -> dict:
        return {
            "start": self.start_ab,
            "T": self.period,
            "degenerate": self.degenerate,
            "states": self.states,
            "mirror": self.mirror_state,
            "lambda_per_node": list(self.lambda_per_node),
            "lambda": self.lambda_value,
        }

    def write_trace_csv(self, fh) -> None:
        """One row per time step t = 1..T: t, coloring.  The start and
        mirror states live in the JSON record."""
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["t", "coloring"])
        for t, state in enumerate(self.states, 1):
            writer.writerow([t, state])

    def write_json(self, fh) -> None:
        json.dump(self.to_json_dict(), fh, sort_keys=True)
        fh.write("\n")


def run_to_mirror(
    g: MixedGraph, start_ab: str, max_steps: int = DEFAULT_MAX_STEPS
) -> RunRecord:
    """Walk from a two-color {A,B} start until the mirror state.

    Raises MaxStepsExceeded when the bound is hit (the mirror always
    exists on a finite graph, so the bound was too small).
    """
    validate_coloring(start_ab, g.node_count)
    if "C" in start_ab:
        raise ValueError(f"start state {start_ab!r} must use colors A and B only")

    out_masks = g.out_masks
    full = (1 << g.node_count) - 1

    # First step: no C present, rule I everywhere == transliteration.
    c_bits, b_bits = _step_packed(out_masks, full, *pack(start_ab))
    packed = [(c_bits, b_bits)]
    a_planes: list[int] = []
    c_planes: list[int] = []

    for _ in range(max_steps):
        a_bits = full & ~(c_bits | b_bits)
        _add_to_planes(a_planes, a_bits)
        _add_to_planes(c_planes, c_bits)

        p = 0
        for v, mask in enumerate(out_masks):
            if mask & c_bits:
                p |= 1 << v
        new_c = (b_bits & ~p) | (a_bits & p)
        # new_b == c_bits always, so the mirror test "next state equals
        # transliteration of the current state" reduces to one compare.
        if new_c == b_bits:
            return RunRecord(g, start_ab, packed, a_planes, c_planes)
        packed.append((new_c, c_bits))
        c_bits, b_bits = new_c, c_bits

    raise MaxStepsExceeded(max_steps, start_ab)


def full_cycle(
    g: MixedGraph, start_ab: str, max_steps: int = DEFAULT_MAX_STEPS
) -> list[str]:
    """The complete orbit of the first {A,C} state, as a list of
    colorings that ends just before the orbit repeats.

    For a proper mirror trajectory (T > 2) the orbit has length 2T and
    passes through the start state itself; reversibility means there is
    no lead-in branch the orbit could hang from.
    """
    validate_coloring(start_ab, g.node_count)
    if "C" in start_ab:
        raise ValueError(f"start state {start_ab!r} must use colors A and B only")

    out_masks = g.out_masks
    full = (1 << g.node_count) - 1
    first = _step_packed(out_masks, full, *pack(start_ab))
    cycle = [first]
    state = _step_packed(out_masks, full, *first)
    steps = 0
    while state != first:
        cycle.append(state)
        state = _step_packed(out_masks, full, *state)
        steps += 1
        if steps > 2 * max_steps:
            raise MaxStepsExceeded(steps, start_ab)
    n = g.node_count
    return [unpack(n, c, b) for c, b in cycle]
