"""Cycle-accurate simulation of the buffered, pattern-driven memory hierarchy.

Time is kept on a unified grid so rational external:internal clock ratios
stay exact: one internal clock period spans ``ratio_ext`` grid units and one
external period spans ``ratio_int`` units.  External edges are processed
strictly before a coincident internal edge.

Data words are modeled as tuples of the off-chip word addresses they carry
(identity payload), which makes data correctness, traversal, and
invalid-slot checks mechanical.

Inter-level transfers use a presented/committed handshake: a level presents
one word (a read), the next level commits it on the following internal edge
(a write), and only that commit lets the presenting level advance its
pattern pointer.  A word therefore needs two internal cycles per hop, which
is what caps the write rate of any level at every other cycle.  The output
side of the last level is a plain registered read port and sustains one word
per cycle.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterator, Optional

from .config import (
    HierarchyConfig,
    Ports,
    RuntimeInputs,
    validate_config,
    validate_runtime,
)


class SimInitError(ValueError):
    """Configuration or runtime inputs rejected at simulator reset."""

    def __init__(self, violations: list[str]):
        self.violations = violations
        super().__init__("; ".join(violations))


class DeadlockError(RuntimeError):
    def __init__(self, cycle: int, level: int, detail: str):
        self.cycle = cycle
        self.level = level
        self.detail = detail
        super().__init__(f"no progress by cycle {cycle}: level {level}: {detail}")


Payload = tuple[int, ...]
Event = tuple[int, str, int, int, str]


@dataclass
class SimReport:
    total_internal_cycles: int
    outputs: tuple[Payload, ...]
    level_reads: tuple[int, ...]
    level_writes: tuple[int, ...]
    offchip_requests: tuple[int, ...]
    stalls_by_cause: dict[str, int]

    def summary_dict(self) -> dict:
        return {
            "total_cycles": self.total_internal_cycles,
            "outputs": len(self.outputs),
            "offchip_requests": len(self.offchip_requests),
            "level_reads": list(self.level_reads),
            "level_writes": list(self.level_writes),
            "stalls_by_cause": dict(sorted(self.stalls_by_cause.items())),
        }


class _LevelState:
    __slots__ = (
        "index",
        "capacity",
        "banks",
        "single_ported",
        "cycle_length",
        "shift",
        "skip_limit",
        "streaming",
        "ram",
        "writing_pointer",
        "pattern_pointer",
        "offset_pointer",
        "skips",
        "data_reload_counter",
        "pending_write",
        "presented",
        "presented_slot",
        "claimed",
        "advanced_now",
        "committed_slot_now",
        "reads",
        "writes",
        "last_write_cycle",
        "last_read_cycle",
    )

    def __init__(self, index: int, capacity: int, banks: int, single: bool,
                 cycle_length: int, shift: int, skip_limit: int):
        self.index = index
        self.capacity = capacity
        self.banks = banks
        self.single_ported = single
        self.cycle_length = cycle_length
        self.shift = shift
        self.skip_limit = skip_limit
        self.streaming = cycle_length > capacity
        self.ram: list[Optional[Payload]] = [None] * capacity
        self.writing_pointer = 0
        self.pattern_pointer = 0
        self.offset_pointer = 0
        self.skips = 0
        self.data_reload_counter = cycle_length
        self.pending_write: Optional[Payload] = None
        self.presented: Optional[Payload] = None
        self.presented_slot = -1
        self.claimed = False
        self.advanced_now = False
        self.committed_slot_now = -1
        self.reads = 0
        self.writes = 0
        self.last_write_cycle = -2
        self.last_read_cycle = -2

    @property
    def read_pointer(self) -> int:
        return (self.offset_pointer + self.pattern_pointer) % self.capacity

    @property
    def occupancy_count(self) -> int:
        return sum(1 for w in self.ram if w is not None)

    def write_enable(self) -> bool:
        return self.pending_write is not None

    def read_enable(self) -> bool:
        return self.presented is not None


class _InputBuffer:
    __slots__ = ("words_per_fill", "atoms", "full", "claimed", "reset_due")

    def __init__(self, words_per_fill: int):
        self.words_per_fill = words_per_fill
        self.atoms: list[int] = []
        self.full = False
        self.claimed = False
        self.reset_due: Optional[int] = None  # grid time when the reset lands

    @property
    def awaiting_reset(self) -> bool:
        return self.reset_due is not None


class _Osr:
    __slots__ = ("register_width", "output_width", "shifts", "atom_bits", "atoms")

    def __init__(self, register_width: int, output_width: int,
                 shifts: tuple[int, ...], atom_bits: int):
        self.register_width = register_width
        self.output_width = output_width
        self.shifts = shifts
        self.atom_bits = atom_bits
        self.atoms: list[int] = []

    @property
    def fill_bits(self) -> int:
        return len(self.atoms) * self.atom_bits

    @property
    def free_bits(self) -> int:
        return self.register_width - self.fill_bits


def _demand_stream(config: HierarchyConfig, runtime: RuntimeInputs) -> Iterator[int]:
    """Off-chip word addresses in the order level 0 will write them."""
    k0 = config.levels[0].word_width // config.offchip_word_width
    base = runtime.start_address
    length = runtime.cycle_length[0]
    shift = runtime.inter_cycle_shift[0]
    skip = runtime.skip_shift[0]
    cap = config.levels[0].capacity

    def atoms(word: int) -> Iterator[int]:
        lo = base + word * k0
        return iter(range(lo, lo + k0))

    if length <= cap and shift == 0:
        for w in range(length):
            yield from atoms(w)
        return
    if length <= cap:
        w = 0
        while True:
            yield from atoms(w)
            w += 1
        return
    # streaming: the full read stream, window advancing per the shift schedule
    iteration = 0
    window = 0
    while True:
        for p in range(length):
            yield from atoms(window + p)
        iteration += 1
        if iteration % (skip + 1) == 0:
            window += shift


class SimState:
    def __init__(self, config: HierarchyConfig, runtime: RuntimeInputs,
                 record_events: bool = False, check_invariants: bool = False):
        self.config = config
        self.runtime = runtime
        self.record_events = record_events
        self.check_invariants = check_invariants
        self.violations: list[str] = []
        self.events: list[Event] = []

        self._unit_int = config.clock_ratio[0]
        self._unit_ext = config.clock_ratio[1]
        self._next_int = 0
        self._next_ext = 0
        self.internal_cycle = 0
        self.external_cycle = 0

        k0 = config.levels[0].word_width // config.offchip_word_width
        self.buffer = _InputBuffer(k0)
        self._demand = _demand_stream(config, runtime)
        self._demand_next: Optional[int] = next(self._demand, None)
        self._in_flight: list[tuple[int, int]] = []  # (arrival grid time, address)
        self.offchip_requests: list[int] = []

        self.levels = [
            _LevelState(
                i,
                lev.capacity,
                lev.banks,
                lev.ports is Ports.SINGLE,
                runtime.cycle_length[i],
                runtime.inter_cycle_shift[i],
                runtime.skip_shift[i],
            )
            for i, lev in enumerate(config.levels)
        ]
        self._w_last = config.levels[-1].word_width
        self._atom_bits = config.offchip_word_width
        self.osr: Optional[_Osr] = None
        if config.osr is not None:
            self.osr = _Osr(
                config.osr.register_width,
                config.osr.output_width,
                config.osr.available_shifts,
                self._atom_bits,
            )
        self.outputs: list[Payload] = []
        self.force_disable_output = False
        self.stalls = {"empty_slot_wait": 0, "port_conflict": 0, "offchip_wait": 0}
        self._progress_mark = 0
        self._idle_cycles = 0

    # --- event helpers ----------------------------------------------------

    def _ev(self, kind: str, level: int, address: int, value: str = ""):
        if self.record_events:
            self.events.append((self.internal_cycle, kind, level, address, value))

    def _note_progress(self):
        self._idle_cycles = 0

    # --- external domain ----------------------------------------------------

    def _ext_tick(self, now: int):
        buf = self.buffer
        if buf.reset_due is not None and now >= buf.reset_due:
            buf.atoms.clear()
            buf.full = False
            buf.claimed = False
            buf.reset_due = None
            self._ev("buffer_reset", -1, 0)
            self._note_progress()
        arrived = [req for req in self._in_flight if req[0] <= now]
        if arrived:
            self._in_flight = [req for req in self._in_flight if req[0] > now]
            for _, addr in arrived:
                buf.atoms.append(addr)
                self._note_progress()
            if len(buf.atoms) >= buf.words_per_fill and not buf.full:
                buf.full = True
                self._ev("buffer_full", -1, buf.atoms[0])
        if (
            self._demand_next is not None
            and not buf.full
            and not buf.awaiting_reset
            and len(buf.atoms) + len(self._in_flight) < buf.words_per_fill
        ):
            addr = self._demand_next
            self._demand_next = next(self._demand, None)
            self.offchip_requests.append(addr)
            self._ev("offchip_request", -1, addr)
            self._note_progress()
            arrival = now + self.config.offchip_latency * self._unit_ext
            if arrival <= now:
                buf.atoms.append(addr)
                if len(buf.atoms) >= buf.words_per_fill and not buf.full:
                    buf.full = True
                    self._ev("buffer_full", -1, buf.atoms[0])
            else:
                self._in_flight.append((arrival, addr))
        self.external_cycle += 1

    # --- internal domain, per-level slices ---------------------------------

    def _commit(self, l: int):
        lev = self.levels[l]
        lev.committed_slot_now = -1
        if lev.pending_write is None:
            return
        word = lev.pending_write
        lev.pending_write = None
        slot = lev.writing_pointer
        if self.check_invariants:
            if lev.ram[slot] is not None:
                self.violations.append(
                    f"cycle {self.internal_cycle}: level {l}: write into occupied slot {slot}"
                )
            if lev.single_ported and lev.last_write_cycle == self.internal_cycle - 1:
                self.violations.append(
                    f"cycle {self.internal_cycle}: level {l}: consecutive-cycle writes"
                )
        lev.ram[slot] = word
        lev.committed_slot_now = slot
        lev.writing_pointer = (slot + 1) % lev.capacity
        lev.data_reload_counter -= 1
        lev.writes += 1
        lev.last_write_cycle = self.internal_cycle
        self._ev("write", l, word[0], _fmt(word))
        self._note_progress()
        if l == 0:
            # buffer word consumed: start the reset handshake toward the
            # external domain (lands at the first external edge after now)
            now = self.internal_cycle * self._unit_int
            step = self._unit_ext
            self.buffer.reset_due = (now // step + 1) * step
            self._ev("reset_buffer", -1, 0)
        else:
            up = self.levels[l - 1]
            up.claimed = False
            self._consume_presented(up)

    def _consume_presented(self, lev: _LevelState):
        """Downstream took the presented word: evict if streaming, advance."""
        if lev.streaming and lev.presented_slot >= 0:
            lev.ram[lev.presented_slot] = None
            lev.data_reload_counter += 1
        lev.presented = None
        lev.presented_slot = -1
        self._advance(lev)

    def _advance(self, lev: _LevelState):
        lev.pattern_pointer += 1
        lev.advanced_now = True
        if lev.pattern_pointer < lev.cycle_length:
            return
        lev.pattern_pointer = 0
        lev.skips += 1
        if lev.skips <= lev.skip_limit:
            return
        lev.skips = 0
        if lev.shift == 0:
            return
        old = lev.offset_pointer
        if lev.streaming:
            # slots are transient here; just realign both pointers with the
            # shifted window
            lev.offset_pointer = (old + lev.shift) % lev.capacity
            lev.writing_pointer = (lev.writing_pointer + lev.shift) % lev.capacity
        else:
            for j in range(lev.shift):
                lev.ram[(old + j) % lev.capacity] = None
            lev.offset_pointer = (old + lev.shift) % lev.capacity
            lev.data_reload_counter += lev.shift
        self._ev("shift", lev.index, lev.offset_pointer)

    def _output_side(self):
        """OSR emission, then the last level's registered output read."""
        last = self.levels[-1]
        disable = self.runtime.disable_output or self.force_disable_output
        if self.osr is not None:
            osr = self.osr
            if (
                not disable
                and self.runtime.shift_select != 0
                and osr.fill_bits >= osr.output_width
            ):
                n_emit = osr.output_width // osr.atom_bits
                word = tuple(osr.atoms[:n_emit])
                self.outputs.append(word)
                self._ev("output", -1, word[0], _fmt(word))
                shift = osr.shifts[self.runtime.shift_select - 1]
                del osr.atoms[: shift // osr.atom_bits]
                self._note_progress()
            take = osr.free_bits >= self._w_last
        else:
            take = not disable
        if not take:
            return
        slot = last.read_pointer
        word = last.ram[slot]
        if word is None:
            if last.data_reload_counter > 0 or last.streaming:
                self.stalls["empty_slot_wait"] += 1
            return
        # a level moves at most one word per port per cycle; the last level is
        # dual-ported, so only a same-slot collision with this edge's write
        # can block the read
        if slot == last.committed_slot_now:
            self.stalls["port_conflict"] += 1
            return
        if last.single_ported and last.committed_slot_now >= 0:
            if last.banks == 1 or (slot % 2) == (last.committed_slot_now % 2):
                self.stalls["port_conflict"] += 1
                return
        last.reads += 1
        self._ev("read", last.index, word[0], _fmt(word))
        if self.osr is not None:
            self.osr.atoms.extend(word)
            self._ev("osr_load", -1, word[0], _fmt(word))
        else:
            self.outputs.append(word)
            self._ev("output", -1, word[0], _fmt(word))
        self._note_progress()
        if last.streaming:
            last.ram[slot] = None
            last.data_reload_counter += 1
        self._advance(last)

    def _present(self, l: int):
        """Offer the next word of level ``l`` to the level below it."""
        lev = self.levels[l]
        if lev.presented is not None or lev.advanced_now:
            return
        down = self.levels[l + 1]
        if down.data_reload_counter <= 0:
            return
        slot = lev.read_pointer
        word = lev.ram[slot]
        if word is None:
            self.stalls["empty_slot_wait"] += 1
            return
        if lev.committed_slot_now >= 0:
            # write-over-read on a shared port or bank
            if lev.single_ported and (
                lev.banks == 1 or (slot % 2) == (lev.committed_slot_now % 2)
            ):
                self.stalls["port_conflict"] += 1
                return
            if slot == lev.committed_slot_now:
                self.stalls["port_conflict"] += 1
                return
        lev.presented = word
        lev.presented_slot = slot
        lev.reads += 1
        self._ev("read", l, word[0], _fmt(word))

    def _arm_write(self, l: int):
        """Latch the upstream word for commit on the next internal edge."""
        lev = self.levels[l]
        if lev.pending_write is not None:
            return
        if lev.data_reload_counter <= 0:
            return
        if lev.ram[lev.writing_pointer] is not None:
            return
        if l == 0:
            buf = self.buffer
            if buf.full and not buf.claimed and not buf.awaiting_reset:
                word = tuple(buf.atoms[: buf.words_per_fill])
                lev.pending_write = word
                buf.claimed = True
            else:
                self.stalls["offchip_wait"] += 1
        else:
            up = self.levels[l - 1]
            if up.presented is not None and not up.claimed:
                lev.pending_write = up.presented
                up.claimed = True

    def _int_tick(self):
        levels = self.levels
        for lev in levels:
            lev.advanced_now = False
        for l in range(len(levels)):
            self._commit(l)
        self._output_side()
        for l in range(len(levels) - 1):
            self._present(l)
        for l in range(len(levels)):
            self._arm_write(l)
        self.internal_cycle += 1
        self._idle_cycles += 1

    # --- public stepping ----------------------------------------------------

    def step(self) -> list[Event]:
        """Advance one internal clock cycle (and the external edges it spans)."""
        mark = len(self.events)
        target = self._next_int
        while self._next_ext <= target:
            self._ext_tick(self._next_ext)
            self._next_ext += self._unit_ext
        self._int_tick()
        self._next_int += self._unit_int
        return self.events[mark:]


def _fmt(word: Payload) -> str:
    return ":".join(str(a) for a in word)


# --- lifecycle ---------------------------------------------------------------


def _support_violations(config: HierarchyConfig, runtime: RuntimeInputs) -> list[str]:
    v = []
    widths = {lev.word_width for lev in config.levels}
    if len(widths) > 1:
        v.append("levels: word widths must match across levels (width conversion"
                 " is provided by the input buffer and the output shift register)")
    for l, lev in enumerate(config.levels):
        if len(runtime.cycle_length) == len(config.levels):
            length = runtime.cycle_length[l]
            if length > lev.capacity and length % lev.capacity != 0:
                v.append(
                    f"cycle_length[{l}]: a cycle longer than the level's capacity"
                    f" must be a whole multiple of it"
                )
    if config.osr is not None:
        atom = config.offchip_word_width
        osr = config.osr
        if osr.register_width % atom or osr.output_width % atom or any(
            s % atom for s in osr.available_shifts
        ):
            v.append("osr: register, output, and shift widths must be multiples"
                     " of the off-chip word width")
    return v


def init_sim(config: HierarchyConfig, runtime: RuntimeInputs,
             record_events: bool = False, check_invariants: bool = False) -> SimState:
    violations = validate_config(config)
    if violations:
        raise SimInitError(violations)
    violations = validate_runtime(config, runtime)
    if violations:
        raise SimInitError(violations)
    violations = _support_violations(config, runtime)
    if violations:
        raise SimInitError(violations)
    return SimState(config, runtime, record_events, check_invariants)


def step(state: SimState) -> list[Event]:
    return state.step()


def mcu_level_update(state: SimState, l: int) -> _LevelState:
    """Run the level-l slice of one internal edge in isolation.

    Intended for unit-level inspection of the pointer arithmetic; `step`
    orchestrates the same slices across all levels in phase order.
    """
    state._commit(l)
    if l == len(state.levels) - 1:
        state._output_side()
    else:
        state._present(l)
    state._arm_write(l)
    return state.levels[l]


def osr_step(state: SimState) -> None:
    """Run the output-side slice (OSR emit, last-level read) once."""
    if state.osr is None and state.config.osr is None:
        raise SimInitError(["osr: not configured"])
    state._output_side()


def run(state: SimState, n_outputs: Optional[int] = None,
        max_cycles: Optional[int] = None) -> SimReport:
    """Step until the stop condition and summarize.

    Raises DeadlockError when an output target is set and nothing in either
    clock domain makes progress for longer than the hierarchy could possibly
    buffer.
    """
    if n_outputs is None and max_cycles is None:
        raise ValueError("need a stop condition: n_outputs or max_cycles")
    start_cycle = state.internal_cycle
    watchdog = sum(lev.capacity for lev in state.levels) + 64
    while True:
        if n_outputs is not None and len(state.outputs) >= n_outputs:
            break
        if max_cycles is not None and state.internal_cycle - start_cycle >= max_cycles:
            break
        state.step()
        if n_outputs is not None and state._idle_cycles > watchdog:
            l, detail = _diagnose_stall(state)
            raise DeadlockError(state.internal_cycle, l, detail)
    return SimReport(
        total_internal_cycles=state.internal_cycle - start_cycle,
        outputs=tuple(state.outputs),
        level_reads=tuple(lev.reads for lev in state.levels),
        level_writes=tuple(lev.writes for lev in state.levels),
        offchip_requests=tuple(state.offchip_requests),
        stalls_by_cause=dict(state.stalls),
    )


def _diagnose_stall(state: SimState) -> tuple[int, str]:
    for l, lev in enumerate(state.levels):
        if lev.data_reload_counter > 0 and lev.ram[lev.writing_pointer] is None:
            src = "input buffer" if l == 0 else f"level {l - 1}"
            return l, (
                f"waiting for data from {src}"
                f" (reload counter {lev.data_reload_counter})"
            )
    for l, lev in enumerate(state.levels):
        if lev.ram[lev.read_pointer] is None:
            return l, "read pointer parked on an empty slot"
    return len(state.levels) - 1, "output path is not consuming"


def preload(state: SimState, budget: int) -> SimState:
    """Run ``budget`` internal cycles with the data output forced off."""
    if budget < 0:
        raise ValueError("preload budget must be non-negative")
    saved = state.force_disable_output
    state.force_disable_output = True
    try:
        for _ in range(budget):
            state.step()
    finally:
        state.force_disable_output = saved
    state._idle_cycles = 0
    return state


def reset_with(state: SimState, runtime: RuntimeInputs) -> SimState:
    """Fresh pattern state for the same hierarchy, like a reset cycle."""
    return init_sim(
        state.config,
        runtime,
        record_events=state.record_events,
        check_invariants=state.check_invariants,
    )
