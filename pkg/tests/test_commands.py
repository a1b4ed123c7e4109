"""Command ISA: wire format, replay validation, cost and trace rendering."""
import pytest

from ionshuttle.commands import (CommandSequence, FormatError, ReplayError,
                                 cost, parse_sequence, render_trace,
                                 render_trace_svg, replay, serialize)
from ionshuttle.qasm import build_circuit
from ionshuttle.scheduler import schedule
from ionshuttle.trap import TrapConfig, new_state


def exchange_sequence():
    circ = build_circuit(4, [("cz", (0, 2), ())])
    state = new_state()
    state.place_crystal([1, 2], 19)
    state.place_crystal([3, 4], 21)
    return schedule(circ, state).sequence


class TestSerialize:
    def test_start_line(self):
        seq = CommandSequence(raw=[("START", ())])
        assert serialize(seq).splitlines()[1] == "1 START 0"

    def test_aic_line(self):
        seq = CommandSequence(raw=[("START", ()), ("AIC", (2, 19))])
        assert serialize(seq).splitlines()[2] == "2 AIC 2 2 19"

    def test_multi_segment_move_line(self):
        seq = CommandSequence(raw=[("SMD", (2, 19, 21))])
        assert serialize(seq).splitlines()[1] == "1 SMD 2 19 21"

    def test_header_and_terminator(self):
        text = serialize(CommandSequence(n_segments=48, liz=24, raw=[]))
        assert text == "# segments=48 liz=24\n"

    def test_gate_marker_carries_index(self):
        seq = CommandSequence(raw=[("DG", (5,))])
        assert serialize(seq).splitlines()[1] == "1 DG 1 5"


class TestParse:
    def test_round_trip_identity(self):
        seq = exchange_sequence()
        parsed = parse_sequence(serialize(seq))
        assert parsed.raw == seq.raw
        assert (parsed.n_segments, parsed.liz) == (seq.n_segments, seq.liz)
        assert serialize(parsed) == serialize(seq)

    def test_start_with_params_rejected(self):
        with pytest.raises(FormatError) as err:
            parse_sequence("1 START 1 5\n")
        assert err.value.line == 1

    def test_out_of_order_seq_rejected(self):
        with pytest.raises(FormatError) as err:
            parse_sequence("1 START 0\n3 S 0\n")
        assert err.value.line == 2

    def test_truncated_line_rejected(self):
        with pytest.raises(FormatError) as err:
            parse_sequence("1 START 0\n2 AIC 2 4\n")
        assert err.value.line == 2

    def test_unknown_opcode_rejected(self):
        with pytest.raises(FormatError):
            parse_sequence("1 FROB 0\n")

    def test_non_integer_params_rejected(self):
        with pytest.raises(FormatError):
            parse_sequence("1 AIC 2 a 19\n")

    def test_move_needs_a_segment(self):
        with pytest.raises(FormatError):
            parse_sequence("1 SMU 0\n")

    def test_header_read_back(self):
        seq = parse_sequence("# segments=64 liz=32\n1 START 0\n")
        assert seq.n_segments == 64 and seq.liz == 32

    def test_comments_and_blanks_skipped(self):
        seq = parse_sequence("# a note\n\n1 START 0\n# mid comment\n2 S 0\n")
        assert [op for op, _ in seq.raw] == ["START", "S"]


class TestReplay:
    def test_scheduler_output_is_clean(self):
        seq = exchange_sequence()
        report = replay(seq)
        assert report.ok
        assert report.s_count == 3 and report.m_count == 3

    def test_rotation_outside_liz_flagged(self):
        text = ("1 START 0\n2 AIC 2 1 5\n3 AIC 2 2 5\n4 RC 1 5\n")
        report = replay(parse_sequence(text))
        assert any("rotation outside LIZ" in msg for _, msg in report.violations)
        # lenient replay still applies the physical rotation
        assert report.final_state.crystal_at(5).ions == [2, 1]

    def test_strict_mode_raises_with_seq(self):
        text = "1 START 0\n2 AIC 2 1 5\n3 RC 1 5\n"
        with pytest.raises(ReplayError) as err:
            replay(parse_sequence(text), strict=True)
        assert err.value.seq == 3

    def test_aic_after_shuttling_flagged(self):
        text = ("1 START 0\n2 AIC 2 1 10\n3 SMD 1 10\n4 AIC 2 2 20\n")
        report = replay(parse_sequence(text))
        assert any("placement after shuttling" in msg for _, msg in report.violations)

    def test_missing_start_flagged(self):
        report = replay(parse_sequence("1 AIC 2 1 10\n"))
        assert any("begin with START" in msg for _, msg in report.violations)

    def test_spacing_violating_move_flagged(self):
        text = ("1 START 0\n2 AIC 2 1 10\n3 AIC 2 2 12\n4 SMU 1 12\n")
        report = replay(parse_sequence(text))
        assert any("spacing" in msg for _, msg in report.violations)

    def test_split_merge_counts_reported(self):
        text = ("1 START 0\n2 AIC 2 1 19\n3 AIC 2 2 19\n4 S 0\n5 M 0\n")
        report = replay(parse_sequence(text))
        assert report.ok
        assert report.s_count == 1 and report.m_count == 1

    def test_parallel_move_form(self):
        text = ("1 START 0\n2 AIC 2 1 10\n3 AIC 2 2 12\n4 SMU 2 10 12\n")
        report = replay(parse_sequence(text))
        assert report.ok
        assert sorted(report.final_state.seg_crystal) == [9, 11]

    def test_gate_with_empty_liz_flagged(self):
        text = "1 START 0\n2 AIC 2 1 10\n3 DG 1 0\n"
        report = replay(parse_sequence(text))
        assert any("no crystal in the LIZ" in msg for _, msg in report.violations)


class TestCost:
    def test_no_split_merge(self):
        assert cost(CommandSequence(raw=[("START", ()), ("DG", (0,))])) == 0

    def test_exchange_costs_six(self):
        assert cost(exchange_sequence()) == 6

    def test_concatenation_additivity(self):
        a = exchange_sequence()
        b = exchange_sequence()
        joined = CommandSequence(a.n_segments, a.liz, a.raw + b.raw)
        assert cost(joined) == cost(a) + cost(b)


class TestTrace:
    def test_single_row_for_single_placement(self):
        seq = parse_sequence("1 START 0\n2 AIC 2 1 19\n")
        grid = render_trace(seq)
        rows = [ln for ln in grid.splitlines() if not ln.startswith("#")][1:]
        assert len(rows) == 1

    def test_row_count_matches_state_changing_commands(self):
        seq = exchange_sequence()
        changing = sum(1 for op, _ in seq.raw
                       if op in ("AIC", "SMU", "SMD", "RC", "M", "S"))
        grid = render_trace(seq)
        rows = [ln for ln in grid.splitlines() if not ln.startswith("#")][1:]
        assert len(rows) == changing

    def test_grid_width_equals_segment_count(self):
        seq = exchange_sequence()
        grid = render_trace(seq)
        rows = [ln for ln in grid.splitlines() if not ln.startswith("#")][1:]
        for row in rows:
            cells = row.split("  DG")[0].split()[1:]
            assert len(cells) == seq.n_segments

    def test_gate_annotation_present(self):
        grid = render_trace(exchange_sequence())
        assert "DG g0" in grid

    def test_svg_renders(self):
        svg = render_trace_svg(exchange_sequence())
        assert svg.startswith("<svg") and svg.rstrip().endswith("</svg>")
        assert "circle" in svg
