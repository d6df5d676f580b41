"""Behavioral reference model: expected output data without any timing.

Re-derives the output stream straight from the pattern definitions (window
start plus in-cycle position over the off-chip space) and never touches the
cycle-accurate machinery, so it can serve as an independent oracle.  It
assumes the usual operating mode in which every level is programmed with the
same pattern settings; the cycle-accurate simulator is then expected to emit
exactly this stream regardless of depths, banks, ports, clock ratio, or
latency.
"""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass

from .config import HierarchyConfig, RuntimeInputs, validate_config, validate_runtime


class RefModelError(ValueError):
    pass


Payload = tuple[int, ...]


@dataclass(frozen=True)
class ExpectedStream:
    outputs: tuple[Payload, ...]
    minimal_fetches: dict[int, int]


def _word_at(position: int, length: int, shift: int, skip: int) -> int:
    """Word index (relative to the start address) at a pattern position."""
    shifts_done = position // (length * (skip + 1))
    return shift * shifts_done + (position % length)


def expected_outputs(config: HierarchyConfig, runtime: RuntimeInputs, n: int) -> ExpectedStream:
    bad = validate_config(config) + validate_runtime(config, runtime)
    if bad:
        raise RefModelError("; ".join(bad))
    if n < 0:
        raise RefModelError("n: must be non-negative")

    w_off = config.offchip_word_width
    w_last = config.levels[-1].word_width
    k_last = w_last // w_off
    last = len(config.levels) - 1
    length = runtime.cycle_length[last]
    shift = runtime.inter_cycle_shift[last]
    skip = runtime.skip_shift[last]
    base = runtime.start_address

    def level_word(p: int) -> Payload:
        w = _word_at(p, length, shift, skip)
        lo = base + w * k_last
        return tuple(range(lo, lo + k_last))

    outputs: list[Payload] = []
    words_consumed = 0
    silent = runtime.disable_output or (
        config.osr is not None and runtime.shift_select == 0
    )
    if not silent:
        if config.osr is None:
            outputs = [level_word(p) for p in range(n)]
            words_consumed = n
        else:
            osr = config.osr
            shift_bits = (
                osr.available_shifts[runtime.shift_select - 1]
                if runtime.shift_select
                else 0
            )
            emit_atoms = osr.output_width // w_off
            shift_atoms = shift_bits // w_off
            fifo: list[int] = []
            while len(outputs) < n:
                while len(fifo) * w_off < osr.output_width:
                    fifo.extend(level_word(words_consumed))
                    words_consumed += 1
                outputs.append(tuple(fifo[:emit_atoms]))
                del fifo[:shift_atoms]

    # fetch demand: every word the consumed stream touches, fetched once when
    # level 0 can hold its programmed cycle, per visit otherwise
    retains = runtime.cycle_length[0] <= config.levels[0].capacity
    fetches: Counter[int] = Counter()
    if retains:
        seen = {_word_at(p, length, shift, skip) for p in range(words_consumed)}
        for w in seen:
            for a in range(base + w * k_last, base + (w + 1) * k_last):
                fetches[a] = 1
    else:
        for p in range(words_consumed):
            w = _word_at(p, length, shift, skip)
            for a in range(base + w * k_last, base + (w + 1) * k_last):
                fetches[a] += 1
    return ExpectedStream(outputs=tuple(outputs), minimal_fetches=dict(fetches))
