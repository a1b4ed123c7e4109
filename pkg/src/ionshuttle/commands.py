"""Shuttling command ISA: representation, text format, replay and trace.

A program is an ordered list of commands drawn from the fixed opcode set
(START, AIC, AEC, REC, SMU, SMD, RC, M, S, DG).  The canonical interchange
format is one command per line::

    <seq> <OPCODE> <nparams> <params...>

with a ``# segments=<S> liz=<L>`` header echoing the trap shape.  For SMU
and SMD the count field doubles as the number of moved segments; for every
other opcode it is the plain parameter count.  DG carries the circuit gate
index as a traceability extension of the otherwise parameterless gate
placeholder.

``replay`` re-executes a program on a fresh trap, checking every command
against the constraint set.
"""
from __future__ import annotations

import re
from dataclasses import dataclass, field

from .trap import TrapConfig, TrapState, TrapError

RawCommand = tuple[str, tuple[int, ...]]

# opcode -> parameter count (None: SMU/SMD variable form)
OPCODE_ARITY: dict[str, int | None] = {
    "START": 0,
    "AIC": 2,
    "AEC": 1,
    "REC": 1,
    "SMU": None,
    "SMD": None,
    "RC": 1,
    "M": 0,
    "S": 0,
    "DG": 1,
}

STATE_CHANGING = ("AIC", "SMU", "SMD", "RC", "M", "S")

_HEADER_RE = re.compile(r"#\s*segments=(\d+)\s+liz=(\d+)")


class FormatError(Exception):
    """Malformed sequence text; carries the 1-based line number."""

    def __init__(self, message: str, line: int):
        super().__init__(f"line {line}: {message}")
        self.line = line


class ReplayError(Exception):
    """Strict-mode replay abort; carries the offending sequence number."""

    def __init__(self, seq: int, message: str):
        super().__init__(f"command {seq}: {message}")
        self.seq = seq


@dataclass(frozen=True)
class Command:
    seq: int
    op: str
    params: tuple[int, ...]


@dataclass
class CommandSequence:
    """An ordered command list plus the trap shape it targets."""

    n_segments: int = 32
    liz: int = 19
    raw: list[RawCommand] = field(default_factory=list)

    @property
    def commands(self) -> tuple[Command, ...]:
        return tuple(Command(i + 1, op, params) for i, (op, params) in enumerate(self.raw))

    def opcode_counts(self) -> dict[str, int]:
        counts = {op: 0 for op in OPCODE_ARITY}
        for op, _ in self.raw:
            counts[op] += 1
        return counts

    def config(self) -> TrapConfig:
        return TrapConfig(n_segments=self.n_segments, liz=self.liz)

    def __len__(self) -> int:
        return len(self.raw)


def cost(sequence: CommandSequence) -> int:
    """Split/merge count: the schedule cost metric."""
    return sum(1 for op, _ in sequence.raw if op == "S" or op == "M")


def serialize(sequence: CommandSequence) -> str:
    out = [f"# segments={sequence.n_segments} liz={sequence.liz}"]
    for i, (op, params) in enumerate(sequence.raw):
        if op in ("SMU", "SMD"):
            tail = params  # params[0] is already the segment count
        else:
            tail = (len(params), *params)
        out.append(" ".join(str(x) for x in (i + 1, op, *tail)))
    return "\n".join(out) + "\n"


def parse_sequence(text: str) -> CommandSequence:
    """Inverse of :func:`serialize`; raises FormatError with line numbers."""
    n_segments, liz = TrapConfig.n_segments, TrapConfig.liz
    raw: list[RawCommand] = []
    for lineno, line in enumerate(text.splitlines(), start=1):
        stripped = line.strip()
        if not stripped:
            continue
        if stripped.startswith("#"):
            m = _HEADER_RE.match(stripped)
            if m:
                n_segments, liz = int(m.group(1)), int(m.group(2))
            continue
        tokens = stripped.split()
        if len(tokens) < 3:
            raise FormatError("expected '<seq> <OPCODE> <nparams> ...'", lineno)
        try:
            seq = int(tokens[0])
        except ValueError:
            raise FormatError(f"bad sequence number {tokens[0]!r}", lineno) from None
        if seq != len(raw) + 1:
            raise FormatError(
                f"out-of-order sequence number {seq} (expected {len(raw) + 1})", lineno)
        op = tokens[1]
        arity = OPCODE_ARITY.get(op)
        if op not in OPCODE_ARITY:
            raise FormatError(f"unknown opcode {op!r}", lineno)
        try:
            nums = [int(t) for t in tokens[2:]]
        except ValueError:
            raise FormatError("parameters must be integers", lineno) from None
        count, rest = nums[0], nums[1:]
        if len(rest) != count:
            raise FormatError(
                f"{op} declares {count} parameters but carries {len(rest)}", lineno)
        if arity is None:  # SMU / SMD
            if count < 1:
                raise FormatError(f"{op} needs at least one segment", lineno)
            params = tuple(nums)
        else:
            if count != arity:
                raise FormatError(f"{op} takes {arity} parameters, got {count}", lineno)
            params = tuple(rest)
        raw.append((op, params))
    return CommandSequence(n_segments, liz, raw)


@dataclass
class ReplayReport:
    final_state: TrapState
    s_count: int
    m_count: int
    violations: list[tuple[int, str]]

    @property
    def ok(self) -> bool:
        return not self.violations


def replay(sequence: CommandSequence, config: TrapConfig | None = None,
           strict: bool = False) -> ReplayReport:
    """Re-execute the program on a fresh trap, validating every command.

    Lenient mode records violations and keeps going (skipping commands whose
    preconditions fail); strict mode raises ReplayError at the first one.
    """
    cfg = config or sequence.config()
    state = TrapState(cfg, record=False)
    violations: list[tuple[int, str]] = []

    def bad(seq: int, message: str) -> None:
        if strict:
            raise ReplayError(seq, message)
        violations.append((seq, message))

    move = state.move_crystal_step
    seg_map = state.seg_crystal
    crystals = state.crystals
    wells = state.wells
    nseg = cfg.n_segments
    fast_moves = cfg.min_crystal_spacing == 2
    for i, (op, params) in enumerate(sequence.raw):
        if op == "SMU" or op == "SMD":
            if fast_moves and params[0] == 1:
                # inline single-crystal step (the overwhelmingly common form)
                seg = params[1]
                dest = seg - 1 if op == "SMU" else seg + 1
                cid = seg_map.get(seg)
                if cid is None:
                    bad(i + 1, f"no crystal at segment {seg}")
                elif dest < 1 or dest > nseg:
                    bad(i + 1, f"move from segment {seg} leaves the trap")
                elif dest in wells:
                    bad(i + 1, f"segment {dest} holds an empty well")
                elif dest in seg_map or (2 * dest - seg) in seg_map:
                    bad(i + 1, f"moving to segment {dest} violates spacing near it")
                else:
                    del seg_map[seg]
                    seg_map[dest] = cid
                    crystals[cid].segment = dest
                    state.scheduling_started = True
                continue
            direction = "up" if op == "SMU" else "down"
            for s in sorted(params[1:], reverse=(op == "SMD")):
                try:
                    move(s, direction)
                except TrapError as e:
                    bad(i + 1, str(e))
            continue
        if i == 0 and op != "START":
            bad(1, "sequence does not begin with START")
        if op == "AEC":
            s = params[0]
            if s < 1 or s > nseg:
                bad(i + 1, f"segment {s} outside trap")
            elif s in seg_map:
                bad(i + 1, f"segment {s} occupied by a crystal")
            elif s in wells:
                bad(i + 1, f"segment {s} already holds a well")
            else:
                wells.add(s)
                state.scheduling_started = True
        elif op == "REC":
            s = params[0]
            if s in wells:
                wells.discard(s)
            else:
                bad(i + 1, f"no empty well at segment {s}")
        elif op == "S":
            try:
                state.split_at_liz()
            except TrapError as e:
                bad(i + 1, str(e))
        elif op == "M":
            try:
                state.merge_at_liz()
            except TrapError as e:
                bad(i + 1, str(e))
        elif op == "RC":
            seg = params[0]
            if seg != cfg.liz:
                bad(i + 1, f"rotation outside LIZ (segment {seg})")
                crystal = state.crystal_at(seg)
                if crystal is not None:
                    crystal.ions.reverse()
            else:
                try:
                    state.rotate_at_liz()
                except TrapError as e:
                    bad(i + 1, str(e))
        elif op == "DG":
            state.scheduling_started = True
            if cfg.liz not in state.seg_crystal:
                bad(i + 1, "gate executed with no crystal in the LIZ")
        elif op == "AIC":
            if state.scheduling_started:
                bad(i + 1, "initial placement after shuttling started")
                continue
            try:
                state.place_ion(params[0], params[1])
            except TrapError as e:
                bad(i + 1, str(e))
        elif op == "START":
            if i != 0:
                bad(i + 1, "START not at the beginning")
    return ReplayReport(state, state.s_count, state.m_count, violations)


# -- trace rendering ---------------------------------------------------------

_ION_CHARS = "0123456789abcdefghijklmnopqrstuvwxyz"


def _ion_char(ion: int) -> str:
    return _ION_CHARS[ion] if 0 < ion < len(_ION_CHARS) else "+"


@dataclass
class _TraceRow:
    first_seq: int
    last_seq: int
    occupants: dict[int, tuple[int, ...]]
    wells: frozenset[int]
    gates: list[int]


def _trace_rows(sequence: CommandSequence,
                config: TrapConfig | None = None) -> tuple[TrapConfig, list[_TraceRow]]:
    """Replay yielding one snapshot per state-changing command.

    Non-visible commands (START, AEC, REC, DG) fold into the sequence-number
    range of the next visible row; gate indices carried by folded DGs are
    attached to that row.  Trailing non-visible commands extend the last row.
    """
    cfg = config or sequence.config()
    state = TrapState(cfg, record=False)
    rows: list[_TraceRow] = []
    pending_first: int | None = None
    pending_gates: list[int] = []
    for i, (op, params) in enumerate(sequence.raw):
        seq = i + 1
        if op == "START":
            pass
        elif op == "AIC":
            state.place_ion(params[0], params[1])
        elif op in ("SMU", "SMD"):
            direction = "up" if op == "SMU" else "down"
            for s in sorted(params[1:], reverse=(op == "SMD")):
                state.move_crystal_step(s, direction)
        elif op == "AEC":
            state.add_well(params[0])
        elif op == "REC":
            state.remove_well(params[0])
        elif op == "RC":
            if params[0] != cfg.liz:
                raise ReplayError(seq, "rotation outside LIZ")
            state.rotate_at_liz()
        elif op == "M":
            state.merge_at_liz()
        elif op == "S":
            state.split_at_liz()
        elif op == "DG":
            pending_gates.append(params[0])
        if op in STATE_CHANGING:
            occupants = {c.segment: tuple(c.ions) for c in state.crystals.values()}
            rows.append(_TraceRow(
                pending_first if pending_first is not None else seq,
                seq, occupants, frozenset(state.wells), pending_gates))
            pending_first, pending_gates = None, []
        elif pending_first is None:
            pending_first = seq
    if rows and (pending_first is not None or pending_gates):
        rows[-1].last_seq = len(sequence.raw)
        rows[-1].gates.extend(pending_gates)
    return cfg, rows


def render_trace(sequence: CommandSequence, config: TrapConfig | None = None) -> str:
    """Text grid of the replayed program: one row per state-changing command,
    one two-character cell per segment (top/bottom ion, ``--`` empty well)."""
    cfg, rows = _trace_rows(sequence, config)
    labels = [f"{r.first_seq}-{r.last_seq}" if r.last_seq > r.first_seq else str(r.first_seq)
              for r in rows]
    width = max((len(s) for s in labels), default=1)
    lines = [f"# segments={cfg.n_segments} liz={cfg.liz}"]
    lines.append(" " * (width + 2 + 3 * (cfg.liz - 1)) + "vv")
    for label, row in zip(labels, rows):
        cells = []
        for seg in range(1, cfg.n_segments + 1):
            ions = row.occupants.get(seg)
            if ions is not None:
                cells.append(_ion_char(ions[0]) + (_ion_char(ions[1]) if len(ions) > 1 else "."))
            elif seg in row.wells:
                cells.append("--")
            else:
                cells.append("..")
        note = "  DG " + ",".join(f"g{g}" for g in row.gates) if row.gates else ""
        lines.append(f"{label:>{width}}  " + " ".join(cells) + note)
    return "\n".join(lines) + "\n"


def render_trace_svg(sequence: CommandSequence, config: TrapConfig | None = None) -> str:
    """Self-contained SVG version of the trace grid (ions as colored dots)."""
    cfg, rows = _trace_rows(sequence, config)
    cell, margin_x, margin_y = 16, 56, 28
    width = margin_x + cfg.n_segments * cell + 8
    height = margin_y + max(len(rows), 1) * cell + 8

    def x_of(seg: int) -> float:
        return margin_x + (seg - 0.5) * cell

    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" '
        f'font-family="monospace" font-size="10">',
        f'<rect x="{margin_x + (cfg.liz - 1) * cell}" y="{margin_y - 12}" '
        f'width="{cell}" height="{height - margin_y + 4}" fill="#e8f4e8"/>',
        f'<text x="{x_of(cfg.liz)}" y="{margin_y - 16}" text-anchor="middle">LIZ</text>',
    ]
    for seg in range(1, cfg.n_segments + 1, max(1, cfg.n_segments // 8)):
        parts.append(f'<text x="{x_of(seg)}" y="{margin_y - 2}" '
                     f'text-anchor="middle" fill="#888">{seg}</text>')
    for r, row in enumerate(rows):
        y = margin_y + (r + 0.5) * cell
        label = f"{row.first_seq}-{row.last_seq}" if row.last_seq > row.first_seq else str(row.first_seq)
        if row.gates:
            label += " DG"
        parts.append(f'<text x="4" y="{y + 3}" fill="#444">{label}</text>')
        for seg in row.wells:
            parts.append(f'<rect x="{x_of(seg) - 5}" y="{y - 5}" width="10" height="10" '
                         f'fill="none" stroke="#aaa"/>')
        for seg, ions in sorted(row.occupants.items()):
            offsets = (0.0,) if len(ions) == 1 else (-3.0, 3.0)
            for ion, dy in zip(ions, offsets):
                hue = (ion * 47) % 360
                parts.append(f'<circle cx="{x_of(seg)}" cy="{y + dy}" r="3.4" '
                             f'fill="hsl({hue},70%,45%)"/>')
    parts.append("</svg>")
    return "\n".join(parts) + "\n"
