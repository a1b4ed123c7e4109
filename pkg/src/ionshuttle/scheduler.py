"""Greedy shuttling-sequence generation.

Gates are processed in circuit order.  A gate whose ions share a crystal
only needs that crystal brought to the LIZ.  When the ions sit in different
crystals, the operand in the upper crystal is exchanged downward through
the intervening crystals, one neighbor at a time, until it reaches the
crystal adjacent to its partner; the final exchange executes the gate while
both ions share the temporary merged crystal.

Each exchange follows the fixed split/merge choreography: orient both
crystals so the traveling ions face each other, split each two-ion crystal,
stage the two travelers beside the LIZ, merge, rotate (so the ions part in
exchanged directions), optionally run the gate, split, and re-merge the
leftover partners into their home crystals.  A full exchange between two
two-ion crystals therefore costs exactly 3 splits and 3 merges.

Crystals blocking a transport are pushed recursively one spacing beyond the
mover's destination and are not restored afterwards.  Split, merge,
rotation and gate execution are bracketed by add/remove-empty-well commands
at the two segments beyond the staging sites whenever those hold no
crystal.
"""
from __future__ import annotations

from dataclasses import dataclass

from .commands import CommandSequence
from .qasm import Circuit
from .trap import TrapOverflow, TrapState


@dataclass
class ScheduleResult:
    sequence: CommandSequence
    cost: int
    per_gate_costs: list[int]
    final_state: TrapState


class _Scheduler:
    def __init__(self, state: TrapState):
        self.state = state
        cfg = state.config
        self.liz = cfg.liz
        self.k = cfg.min_crystal_spacing
        self.n_segments = cfg.n_segments
        self.wells_required = cfg.empty_wells_required
        # precomputed well-bracket commands for the fixed sites beside the LIZ
        self.well_cmds = tuple(
            (s, ("AEC", (s,)), ("REC", (s,)))
            for s in (cfg.liz - 2, cfg.liz + 2) if 1 <= s <= cfg.n_segments)

    # -- transport ---------------------------------------------------------

    def _send(self, cid: int, target: int) -> None:
        """Move a crystal to ``target``, recursively pushing blockers one
        spacing beyond the target, in the direction of travel.

        Steps are applied inline: the blocker scan already proves the next
        segment safe, so re-validating through move_crystal_step would only
        repeat it (replay still validates every emitted move independently).
        """
        if not 1 <= target <= self.n_segments:
            raise TrapOverflow(f"transport target {target} outside trap")
        state = self.state
        seg_map = state.seg_crystal
        history = state.history
        record = state.record
        crystals = state.crystals
        k = self.k
        nseg = self.n_segments
        moved = False
        # explicit push stack: resolving a blocker suspends the mover's frame
        stack = [(cid, target)]
        while stack:
            cid, target = stack[-1]
            crystal = crystals[cid]
            seg = crystal.segment
            if seg == target:
                stack.pop()
                continue
            d = 1 if target > seg else -1
            op = "SMD" if d > 0 else "SMU"
            push_to = target + d * k
            blocked = False
            while seg != target:
                nxt = seg + d
                if k == 2:
                    blocker = nxt if nxt in seg_map else (
                        nxt + d if nxt + d in seg_map else 0)
                else:
                    s, blocker = nxt, 0
                    for _ in range(k):
                        if s in seg_map:
                            blocker = s
                            break
                        s += d
                if blocker:
                    if not 1 <= push_to <= nseg:
                        raise TrapOverflow(
                            f"push chain from segment {blocker} leaves the trap")
                    stack.append((seg_map[blocker], push_to))
                    blocked = True
                    break
                del seg_map[seg]
                seg_map[nxt] = cid
                crystal.segment = nxt
                moved = True
                if record:
                    history.append((op, (1, seg)))
                seg = nxt
            if not blocked:
                stack.pop()
        if moved:
            state.scheduling_started = True

    def _bring_to_liz(self, cid: int) -> None:
        if self.state.crystals[cid].segment != self.liz:
            self._send(cid, self.liz)

    def _clear_split_zone(self) -> None:
        """Push away crystals that would sit too close to the split products
        at liz-1 / liz+1 (the splittee itself excepted)."""
        seg_map = self.state.seg_crystal
        for side in (-1, 1):
            stage = self.liz + side
            while True:
                violator = 0
                s = stage
                for _ in range(self.k):
                    if s != self.liz and s in seg_map:
                        violator = s
                        break
                    s += side
                if not violator:
                    break
                push_to = self.liz + side * (1 + self.k)
                if not 1 <= push_to <= self.n_segments:
                    raise TrapOverflow(f"no room beside the LIZ at segment {push_to}")
                self._send(seg_map[violator], push_to)

    # -- LIZ operations with the empty-well bracket --------------------------

    def _wells_on(self) -> tuple:
        """Add balancing wells beside the staging sites when no crystal is
        already there; preconditions hold by construction, so the well set
        and history are updated directly."""
        if not self.wells_required:
            return ()
        state = self.state
        seg_map = state.seg_crystal
        active = tuple(w for w in self.well_cmds if w[0] not in seg_map)
        record = state.record
        wells = state.wells
        history = state.history
        for s, aec, _ in active:
            wells.add(s)
            if record:
                history.append(aec)
        return active

    def _wells_off(self, active: tuple) -> None:
        state = self.state
        record = state.record
        wells = state.wells
        history = state.history
        for s, _, rec in active:
            wells.discard(s)
            if record:
                history.append(rec)

    def _split(self) -> tuple[int, int]:
        self._clear_split_zone()
        spots = self._wells_on()
        out = self.state.split_at_liz()
        self._wells_off(spots)
        return out

    def _merge(self) -> int:
        spots = self._wells_on()
        out = self.state.merge_at_liz()
        self._wells_off(spots)
        return out

    def _rotate_liz(self) -> None:
        spots = self._wells_on()
        self.state.rotate_at_liz()
        self._wells_off(spots)

    def _dg(self, gate_index: int) -> None:
        spots = self._wells_on()
        self.state.record_gate(gate_index)
        self._wells_off(spots)

    def _rotate_crystal(self, cid: int) -> None:
        self._bring_to_liz(cid)
        self._rotate_liz()

    # -- exchange ------------------------------------------------------------

    def _crystal_below(self, cid: int) -> int | None:
        seg = self.state.crystals[cid].segment
        for s in range(seg + 1, self.n_segments + 1):
            if s in self.state.seg_crystal:
                return self.state.seg_crystal[s]
        return None

    def _crystal_above(self, cid: int) -> int | None:
        seg = self.state.crystals[cid].segment
        for s in range(seg - 1, 0, -1):
            if s in self.state.seg_crystal:
                return self.state.seg_crystal[s]
        return None

    def _ion_permutation(self, ion_a: int, ion_b: int, do_gate: bool,
                         gate_index: int) -> None:
        """Exchange ion_a (upper crystal) with ion_b (adjacent lower crystal),
        running the gate on the temporary merged crystal when requested."""
        state = self.state
        c1 = state.crystal_of(ion_a)
        c4 = state.crystal_of(ion_b)
        # orient so the travelers face each other (no-ops for singletons)
        if len(c1.ions) == 2 and c1.ions[0] == ion_a:
            self._rotate_crystal(c1.id)
        if len(c4.ions) == 2 and c4.ions[1] == ion_b:
            self._rotate_crystal(c4.id)

        c1_pair = len(c1.ions) == 2
        c4_pair = len(c4.ions) == 2
        partner_above = None
        if c1_pair:
            self._bring_to_liz(c1.id)
            partner_above, traveler_a = self._split()
        else:
            traveler_a = c1.id
        partner_below = None
        if c4_pair:
            self._bring_to_liz(c4.id)
            traveler_b, partner_below = self._split()
        else:
            traveler_b = c4.id

        self._send(traveler_a, self.liz - 1)
        self._send(traveler_b, self.liz + 1)
        self._merge()                      # [ion_a, ion_b] in the LIZ
        self._rotate_liz()                 # [ion_b, ion_a]: part in exchanged order
        if do_gate:
            self._dg(gate_index)
        out_above, out_below = self._split()   # ion_b above, ion_a below

        if c1_pair:
            self._send(partner_above, self.liz - 1)
            self._send(out_above, self.liz + 1)
            self._merge()                  # upper home: [old partner, ion_b]
        if c4_pair:
            self._send(out_below, self.liz - 1)
            self._send(partner_below, self.liz + 1)
            self._merge()                  # lower home: [ion_a, old partner]

    def _ion_permutation_up(self, ion_a: int, ion_b: int, do_gate: bool,
                            gate_index: int) -> None:
        """Mirror image of _ion_permutation: ion_a travels upward out of the
        lower crystal, ion_b comes down from the adjacent upper crystal.
        Every direction and intra-crystal end is flipped; the split/merge
        choreography (and so the cost) is identical."""
        state = self.state
        c1 = state.crystal_of(ion_a)
        c4 = state.crystal_of(ion_b)
        if len(c1.ions) == 2 and c1.ions[1] == ion_a:
            self._rotate_crystal(c1.id)
        if len(c4.ions) == 2 and c4.ions[0] == ion_b:
            self._rotate_crystal(c4.id)

        c1_pair = len(c1.ions) == 2
        c4_pair = len(c4.ions) == 2
        partner_below = None
        if c1_pair:
            self._bring_to_liz(c1.id)
            traveler_a, partner_below = self._split()
        else:
            traveler_a = c1.id
        partner_above = None
        if c4_pair:
            self._bring_to_liz(c4.id)
            partner_above, traveler_b = self._split()
        else:
            traveler_b = c4.id

        self._send(traveler_a, self.liz + 1)
        self._send(traveler_b, self.liz - 1)
        self._merge()                      # [ion_b, ion_a] in the LIZ
        self._rotate_liz()                 # [ion_a, ion_b]
        if do_gate:
            self._dg(gate_index)
        out_above, out_below = self._split()   # ion_a above, ion_b below

        if c1_pair:
            self._send(partner_below, self.liz + 1)
            self._send(out_below, self.liz - 1)
            self._merge()                  # lower home: [ion_b, old partner]
        if c4_pair:
            self._send(out_above, self.liz + 1)
            self._send(partner_above, self.liz - 1)
            self._merge()                  # upper home: [old partner, ion_a]

    # -- top-level gate loop ---------------------------------------------------

    def run_gate(self, gate) -> None:
        state = self.state
        if len(gate.operands) == 1:
            cid = state.ion_crystal[gate.operands[0] + 1]
            self._bring_to_liz(cid)
            self._dg(gate.index)
            return
        a, b = (q + 1 for q in gate.operands)
        if state.ion_crystal[a] == state.ion_crystal[b]:
            self._bring_to_liz(state.ion_crystal[a])
            self._dg(gate.index)
            return
        # The gate's first-listed operand travels toward its partner; the
        # ferried-through crystal gives up the ion facing the traveler.
        # Picking the traveler by gate order (not trap position) keeps the
        # whole schedule mirror-covariant, so a layout and its end-to-end
        # reversal always cost the same.
        while True:
            ca = state.ion_crystal[a]
            cb = state.ion_crystal[b]
            if state.crystals[ca].segment < state.crystals[cb].segment:
                nxt = self._crystal_below(ca)
                assert nxt is not None, "partner crystal vanished below"
                if nxt == cb:
                    self._ion_permutation(a, b, True, gate.index)
                    return
                self._ion_permutation(a, state.crystals[nxt].ions[0], False,
                                      gate.index)
            else:
                nxt = self._crystal_above(ca)
                assert nxt is not None, "partner crystal vanished above"
                if nxt == cb:
                    self._ion_permutation_up(a, b, True, gate.index)
                    return
                self._ion_permutation_up(a, state.crystals[nxt].ions[-1], False,
                                         gate.index)


def send_to_segment(state: TrapState, crystal_id: int, target: int) -> None:
    """Transport one crystal to ``target``, pushing blockers out of the way
    (each single-segment step is emitted as its own move command)."""
    _Scheduler(state)._send(crystal_id, target)


def ion_permutation(state: TrapState, ion_a: int, ion_b: int, do_gate: bool,
                    gate_index: int = 0) -> None:
    """Exchange two ions between adjacent crystals (ion_a's crystal above)."""
    ca = state.crystal_of(ion_a)
    cb = state.crystal_of(ion_b)
    if ca.id == cb.id:
        raise ValueError("ions already share a crystal")
    if ca.segment > cb.segment:
        raise ValueError("ion_a must sit in the upper crystal")
    sch = _Scheduler(state)
    if sch._crystal_below(ca.id) != cb.id:
        raise ValueError("crystals are not adjacent in the trap order")
    sch._ion_permutation(ion_a, ion_b, do_gate, gate_index)


def schedule(circuit: Circuit, state: TrapState) -> ScheduleResult:
    """Generate the full shuttling program for ``circuit`` from a placed trap.

    Every gate is executed exactly once at the LIZ, in circuit order; the
    reported cost is the number of split and merge commands emitted.
    """
    expected = set(range(1, circuit.n_qubits + 1))
    if set(state.ion_crystal) != expected:
        raise ValueError("trap does not hold exactly the circuit's ions")
    if state.check_spacing():
        raise ValueError("initial state violates crystal spacing")
    sch = _Scheduler(state)
    per_gate: list[int] = []
    for gate in circuit.gates:
        before = state.s_count + state.m_count
        sch.run_gate(gate)
        per_gate.append(state.s_count + state.m_count - before)
    sequence = CommandSequence(state.config.n_segments, state.config.liz,
                               list(state.history))
    return ScheduleResult(sequence, state.s_count + state.m_count, per_gate, state)
