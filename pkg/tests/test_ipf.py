import random

import pytest

from graphgen import random_two_color
from trine.ac23 import Mask, build_graph
from trine.dynamics import run_to_mirror
from trine.errors import DegenerateRun
from trine.graph import complement
from trine.ipf import (
    build_slots,
    check_ipf,
    integral_phase,
    slots_from_history,
)


@pytest.fixture
def fixture_pair(ring3):
    return run_to_mirror(ring3, "ABA"), run_to_mirror(ring3, "BAB")


class TestSlotsFromHistory:
    def test_fixture_node0(self):
        a, c, f, count = slots_from_history("ACB", 2)
        assert a == [1, 0]
        assert c == [0, 1]
        assert f == [-1, 2]
        assert count == 2

    def test_all_a_history(self):
        a, c, f, count = slots_from_history("AAA", 3)
        assert a == [1, 1, 1]
        assert c == [0, 0, 0]
        assert count == 3

    def test_b_inherits_no_slot(self):
        # C opens a slot, the following B does not
        a, c, f, count = slots_from_history("CBCB", 2)
        assert c == [1, 1]
        assert f == [1, 3]
        assert count == 2

    def test_overflow_reported_via_count(self):
        a, c, f, count = slots_from_history("AAAA", 2)
        assert count == 4
        assert a == [1, 1]


class TestBuildSlots:
    def test_fixture_tables(self, fixture_pair):
        slots, comp = build_slots(*fixture_pair)
        assert slots.slot_count == 2
        assert slots.a[0] == (1, 0)
        assert slots.c[0] == (0, 1)
        assert slots.f[0] == (-1, 2)
        assert slots.b == slots.c
        assert comp.c[0] == (1, 0)
        assert comp.f[0] == (1, -1)
        assert comp.a[0] == (0, 1)
        assert slots.event_counts == (2, 2, 2)
        assert slots.overflow_nodes == ()
        assert slots.lambda_value == 0

    def test_degenerate_raises(self, ring3):
        a = run_to_mirror(ring3, "AAA")
        b = run_to_mirror(ring3, "BBB")
        with pytest.raises(DegenerateRun):
            build_slots(a, b)

    def test_slot_dichotomy_within_run(self, fixture_pair):
        # a slot never holds both an A and a C event of the same run
        slots, comp = build_slots(*fixture_pair)
        for table in (slots, comp):
            for a_row, c_row in zip(table.a, table.c):
                for a_bit, c_bit in zip(a_row, c_row):
                    assert a_bit + c_bit <= 1

    def test_phase_defined_exactly_on_c_slots(self, fixture_pair):
        slots, comp = build_slots(*fixture_pair)
        for table in (slots, comp):
            for c_row, f_row in zip(table.c, table.f):
                for c_bit, f_val in zip(c_row, f_row):
                    assert (f_val >= 1) == (c_bit == 1)


class TestIntegralPhase:
    def test_fixture_phases_origin0(self, fixture_pair):
        slots, comp = build_slots(*fixture_pair)
        phases = integral_phase(slots, comp, time_origin=0)
        # f undefined, fbar=1 -> 2+1; f=2 -> 0
        assert phases.values[0] == (3, 0)
        assert phases.values[1] == (1, 2)

    def test_fixture_phases_origin1(self, fixture_pair):
        slots, comp = build_slots(*fixture_pair)
        phases = integral_phase(slots, comp, time_origin=1)
        assert phases.values[0] == (2, 1)

    def test_parity_formula(self):
        # even time -> 0; undefined primary with fbar=2 -> 2
        a, c, f, _ = slots_from_history("CB", 1)
        assert f == [1]
        assert (4 - 0) % 2 == 0  # f=4 parity under origin 0


class TestCheckIpf:
    def test_fixture_report(self, fixture_pair):
        report = check_ipf(*fixture_pair, level="full", time_origin=0)
        assert (report.T, report.Tbar) == (3, 3)
        assert (report.lambda_value, report.lambda_bar) == (0, 0)
        assert report.K == 2
        assert report.div3
        assert report.c1 and report.c1_complemented and not report.c1_raw
        assert report.c2 and report.c3
        assert report.c4 and report.c5 and report.c6 and report.c7
        assert report.light_ok
        # phase parity matches the event times only when counted from 0
        assert report.c8_origin0 is False
        assert report.c8_origin1 is True
        assert report.c8 is False and report.full_ok is False

    def test_fixture_full_with_calibrated_origin(self, fixture_pair):
        report = check_ipf(*fixture_pair, level="full", time_origin=1)
        assert report.c8 is True
        assert report.full_ok is True

    def test_raw_interpretation_fails_fixture(self, fixture_pair):
        report = check_ipf(*fixture_pair, cond1_interpretation="raw")
        assert report.c1 is False
        assert not report.light_ok
        assert any(w["condition"] == "c1" for w in report.witnesses)

    def test_light_level_leaves_slot_conditions_unevaluated(self, fixture_pair):
        report = check_ipf(*fixture_pair, level="light")
        assert report.light_ok
        assert report.c4 is None and report.c8 is None
        assert report.full_ok is None

    def test_degenerate_raises(self, ring3):
        with pytest.raises(DegenerateRun):
            check_ipf(run_to_mirror(ring3, "AAA"), run_to_mirror(ring3, "BBB"))

    def test_json_contract(self, fixture_pair):
        data = check_ipf(*fixture_pair).to_json_dict()
        for key in ("T", "Tbar", "lambda", "lambdaBar", "K", "div3", "light",
                    "full", "witnesses"):
            assert key in data
        for i in range(1, 9):
            assert f"c{i}" in data

    def test_bad_arguments(self, fixture_pair):
        with pytest.raises(ValueError):
            check_ipf(*fixture_pair, level="medium")
        with pytest.raises(ValueError):
            check_ipf(*fixture_pair, cond1_interpretation="inverted")
        with pytest.raises(ValueError):
            check_ipf(*fixture_pair, time_origin=2)


def pair_for(mask, L, start, max_steps=10**6):
    g = build_graph(mask, L)
    return run_to_mirror(g, start, max_steps), run_to_mirror(g, complement(start), max_steps)


class TestOnMaskRuns:
    def test_known_bad_pair(self):
        # smallest failing pair of the incorrect mask (1,5)
        run, comp = pair_for(Mask(1, 5), 7, "BABAAAA")
        report = check_ipf(run, comp, level="light")
        assert not report.light_ok
        assert report.first_failed_condition == "div3"
        assert any(w["condition"] == "div3" for w in report.witnesses)

    def test_k_identity_per_node(self):
        # K equals each node's A count plus its C count once [2],[3] hold
        rng = random.Random(31)
        mask = Mask(1, 3)
        for _ in range(60):
            L = rng.randint(5, 9)
            start = random_two_color(rng, L)
            run, comp = pair_for(mask, L, start)
            if run.degenerate or comp.degenerate:
                continue
            report = check_ipf(run, comp, level="full")
            assert report.c2 and report.c3
            for n_a, n_b, n_c in run.color_counts:
                assert n_a + n_c == report.K

    def test_slot_condition_redundancy(self):
        # [4]+[6] force [5]+[7]; any inconsistency would be a red flag
        rng = random.Random(37)
        masks = [Mask(1, 3), Mask(1, 5), Mask(3, 5)]
        seen_failure = False
        for _ in range(120):
            mask = rng.choice(masks)
            L = rng.randint(5, 9)
            run, comp = pair_for(mask, L, random_two_color(rng, L))
            if run.degenerate or comp.degenerate:
                continue
            report = check_ipf(run, comp, level="full")
            if report.c4 and report.c6:
                assert report.c5 and report.c7
            if report.full_ok is False:
                seen_failure = True
        assert seen_failure  # the sample includes failing pairs

    def test_correct_masks_full_level_small(self):
        # spot check: the known-correct masks pass the full check
        for mask in (Mask(1, 1), Mask(1, 3), Mask(3, 3)):
            for L in (5, 6, 7):
                for bits in range(0, 2**L, 7):
                    start = "".join("B" if (bits >> v) & 1 else "A" for v in range(L))
                    run, comp = pair_for(mask, L, start)
                    if run.degenerate or comp.degenerate:
                        continue
                    report = check_ipf(run, comp, level="full", time_origin=1)
                    assert report.full_ok, (mask, L, start, report.first_failed_condition)
