"""Access-pattern specifications, trace generation, statistics, and recovery.

Traces are sequences of off-chip word addresses.  Six pattern classes are
supported for generation; recovery (`classify_trace`) handles the four
scalar periodic classes and reports everything else as unclassified.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum


class PatternKind(Enum):
    SEQUENTIAL = "sequential"
    CYCLIC = "cyclic"
    SHIFTED_CYCLIC = "shifted_cyclic"
    STRIDED = "strided"
    PSEUDO_RANDOM = "pseudo_random"
    PARALLEL_SHIFTED_CYCLIC = "parallel_shifted_cyclic"


class PatternError(ValueError):
    """Raised for a PatternSpec that violates a field invariant."""

    def __init__(self, fld: str, message: str):
        self.field = fld
        super().__init__(f"{fld}: {message}")


@dataclass(frozen=True)
class PatternSpec:
    kind: PatternKind
    base_address: int = 0
    cycle_length: int = 1
    inter_cycle_shift: int = 0
    skip_shift: int = 0
    stride: int = 1
    seed: int = 0
    children: tuple["PatternSpec", ...] = ()

    def validate(self) -> None:
        if self.base_address < 0:
            raise PatternError("base_address", "must be non-negative")
        if self.cycle_length < 1:
            raise PatternError("cycle_length", "must be positive")
        if self.inter_cycle_shift < 0:
            raise PatternError("inter_cycle_shift", "must be non-negative")
        if self.skip_shift < 0:
            raise PatternError("skip_shift", "must be non-negative")
        if self.stride < 1:
            raise PatternError("stride", "must be positive")
        k = self.kind
        if k is PatternKind.PARALLEL_SHIFTED_CYCLIC:
            if not self.children:
                raise PatternError("children", "parallel pattern needs at least one child")
            for i, child in enumerate(self.children):
                if child.kind is PatternKind.PARALLEL_SHIFTED_CYCLIC:
                    raise PatternError("children", f"child {i}: nesting is limited to one level")
                child.validate()
        elif self.children:
            raise PatternError("children", "only parallel patterns carry children")
        if k is PatternKind.SEQUENTIAL and self.inter_cycle_shift not in (0, self.cycle_length):
            raise PatternError("inter_cycle_shift", "sequential pattern is the shift==length form")
        if k is PatternKind.CYCLIC and self.inter_cycle_shift != 0:
            raise PatternError("inter_cycle_shift", "cyclic pattern has no inter-cycle shift")
        if k is PatternKind.SHIFTED_CYCLIC:
            if not (0 < self.inter_cycle_shift <= self.cycle_length):
                raise PatternError(
                    "inter_cycle_shift",
                    "shifted-cyclic needs 0 < shift <= cycle_length",
                )


def sequential(base: int = 0) -> PatternSpec:
    return PatternSpec(PatternKind.SEQUENTIAL, base, 1, 1)


def cyclic(base: int, length: int) -> PatternSpec:
    return PatternSpec(PatternKind.CYCLIC, base, length, 0)


def shifted_cyclic(base: int, length: int, shift: int, skip: int = 0) -> PatternSpec:
    return PatternSpec(PatternKind.SHIFTED_CYCLIC, base, length, shift, skip)


def strided(base: int, stride: int) -> PatternSpec:
    return PatternSpec(PatternKind.STRIDED, base, stride=stride)


@dataclass(frozen=True)
class AddressTrace:
    addresses: tuple[int, ...]
    words_per_step: int = 1

    def __post_init__(self):
        if self.words_per_step < 1:
            raise PatternError("words_per_step", "must be positive")
        if len(self.addresses) % self.words_per_step != 0:
            raise PatternError("addresses", "length must be a multiple of words_per_step")

    def __len__(self) -> int:
        return len(self.addresses)

    @property
    def steps(self) -> int:
        return len(self.addresses) // self.words_per_step

    def step_group(self, i: int) -> tuple[int, ...]:
        w = self.words_per_step
        return self.addresses[i * w : (i + 1) * w]


@dataclass(frozen=True)
class TraceStats:
    total_accesses: int
    unique_addresses: int
    reuse_rate: float
    max_working_set: int


class Unclassified:
    """Sentinel result for traces with no recoverable periodic structure."""

    _instance = None

    def __new__(cls):
        if cls._instance is None:
            cls._instance = super().__new__(cls)
        return cls._instance

    def __repr__(self):
        return "Unclassified"

    def __bool__(self):
        return False


UNCLASSIFIED = Unclassified()


def _mix64(x: int) -> int:
    # splitmix64 finalizer; keeps pseudo-random traces reproducible per seed
    x &= 0xFFFFFFFFFFFFFFFF
    x = ((x ^ (x >> 30)) * 0xBF58476D1CE4E5B9) & 0xFFFFFFFFFFFFFFFF
    x = ((x ^ (x >> 27)) * 0x94D049BB133111EB) & 0xFFFFFFFFFFFFFFFF
    return (x ^ (x >> 31)) & 0xFFFFFFFFFFFFFFFF


def _shifted_cyclic_address(spec: PatternSpec, i: int) -> int:
    period = spec.cycle_length * (spec.skip_shift + 1)
    shifts_done = i // period
    return spec.base_address + spec.inter_cycle_shift * shifts_done + (i % spec.cycle_length)


def gen_trace(spec: PatternSpec, n_accesses: int) -> AddressTrace:
    """Generate the first ``n_accesses`` addresses of ``spec``.

    Deterministic, including the pseudo-random class for a fixed seed.
    """
    spec.validate()
    if n_accesses < 0:
        raise PatternError("n_accesses", "must be non-negative")
    k = spec.kind
    if k is PatternKind.SEQUENTIAL:
        addrs = tuple(spec.base_address + i for i in range(n_accesses))
    elif k is PatternKind.CYCLIC:
        l = spec.cycle_length
        addrs = tuple(spec.base_address + (i % l) for i in range(n_accesses))
    elif k is PatternKind.SHIFTED_CYCLIC:
        addrs = tuple(_shifted_cyclic_address(spec, i) for i in range(n_accesses))
    elif k is PatternKind.STRIDED:
        addrs = tuple(spec.base_address + i * spec.stride for i in range(n_accesses))
    elif k is PatternKind.PSEUDO_RANDOM:
        # cycle_length doubles as the size of the address window the
        # generator scatters over
        space = spec.cycle_length
        base = spec.seed * 0x9E3779B97F4A7C15
        addrs = tuple(
            spec.base_address + _mix64(base + i) % space for i in range(n_accesses)
        )
    elif k is PatternKind.PARALLEL_SHIFTED_CYCLIC:
        addrs = tuple(_gen_parallel(spec, n_accesses))
    else:  # pragma: no cover
        raise PatternError("kind", f"unknown kind {k}")
    return AddressTrace(addrs)


def _gen_parallel(spec: PatternSpec, n: int):
    # children run one full cycle each, round-robin; shifts apply only once
    # every child finished a cycle of the current round
    windows = [c.base_address for c in spec.children]
    skips = [0] * len(spec.children)
    out = 0
    while out < n:
        for j, child in enumerate(spec.children):
            for p in range(child.cycle_length):
                if out == n:
                    return
                yield windows[j] + p
                out += 1
        for j, child in enumerate(spec.children):
            skips[j] += 1
            if skips[j] > child.skip_shift:
                skips[j] = 0
                windows[j] += child.inter_cycle_shift


def trace_stats(trace: AddressTrace) -> TraceStats:
    addrs = trace.addresses
    total = len(addrs)
    if total == 0:
        return TraceStats(0, 0, 0.0, 0)
    unique = len(set(addrs))
    first: dict[int, int] = {}
    last: dict[int, int] = {}
    for i, a in enumerate(addrs):
        first.setdefault(a, i)
        last[a] = i
    # sweep the live-interval counts to find the peak working set
    delta = [0] * (total + 1)
    for a in first:
        delta[first[a]] += 1
        delta[last[a] + 1] -= 1
    live = 0
    peak = 0
    for d in delta:
        live += d
        if live > peak:
            peak = live
    reuse = 1.0 - unique / total
    return TraceStats(total, unique, reuse, peak)


def classify_trace(trace: AddressTrace) -> PatternSpec | Unclassified:
    """Recover the canonical spec that reproduces ``trace`` exactly.

    Preference order: constant-step forms first, then the shortest cycle
    length (ties broken toward the smallest shift).  Every candidate is
    verified by regeneration, so a hit is exact by construction.
    """
    if trace.words_per_step != 1:
        raise PatternError("words_per_step", "classification needs a scalar trace")
    addrs = trace.addresses
    n = len(addrs)
    if n < 2:
        raise PatternError("addresses", "need at least 2 accesses to classify")
    base = addrs[0]
    diffs = [addrs[i + 1] - addrs[i] for i in range(n - 1)]

    if all(d == diffs[0] for d in diffs):
        d = diffs[0]
        if d == 1:
            return sequential(base)
        if d == 0:
            return cyclic(base, 1)
        if d > 1:
            return strided(base, d)
        return UNCLASSIFIED

    for l in range(1, n // 2 + 1):
        spec = _fit_cyclic_family(addrs, diffs, base, l)
        if spec is not None:
            return spec
    return UNCLASSIFIED


def _fit_cyclic_family(addrs, diffs, base, l) -> PatternSpec | None:
    n = len(addrs)
    # inside a cycle the walk is unit-stride
    for i, d in enumerate(diffs):
        if (i + 1) % l != 0 and d != 1:
            return None
    # wrap jumps are either a plain return (-l+1) or a shifted return (-l+1+s)
    plain = 1 - l
    shift_rounds = []
    shift_value = None
    wrap_count = 0
    for m, i in enumerate(range(l - 1, n - 1, l)):
        wrap_count += 1
        d = diffs[i]
        if d == plain:
            continue
        s = d - plain
        if s <= 0 or s > l:
            return None
        if shift_value is None:
            shift_value = s
        elif s != shift_value:
            return None
        shift_rounds.append(m)
    if wrap_count == 0:
        return None
    if shift_value is None:
        candidate = cyclic(base, l)
    else:
        first = shift_rounds[0]
        skip = first  # shift fired after skip+1 completed cycles
        candidate = shifted_cyclic(base, l, shift_value, skip)
        if shift_value == l and skip == 0:
            candidate = sequential(base)
    regenerated = gen_trace(candidate, n)
    if regenerated.addresses == addrs:
        return candidate
    return None


# --- JSON codec -----------------------------------------------------------

_SCALAR_FIELDS = {
    "kind",
    "base_address",
    "cycle_length",
    "inter_cycle_shift",
    "skip_shift",
    "stride",
    "seed",
    "children",
}


def pattern_to_dict(spec: PatternSpec) -> dict:
    d: dict = {"kind": spec.kind.value, "base_address": spec.base_address}
    if spec.kind in (PatternKind.CYCLIC, PatternKind.SHIFTED_CYCLIC, PatternKind.PSEUDO_RANDOM):
        d["cycle_length"] = spec.cycle_length
    if spec.kind is PatternKind.SHIFTED_CYCLIC:
        d["inter_cycle_shift"] = spec.inter_cycle_shift
        d["skip_shift"] = spec.skip_shift
    if spec.kind is PatternKind.STRIDED:
        d["stride"] = spec.stride
    if spec.kind is PatternKind.PSEUDO_RANDOM:
        d["seed"] = spec.seed
    if spec.kind is PatternKind.PARALLEL_SHIFTED_CYCLIC:
        d["children"] = [pattern_to_dict(c) for c in spec.children]
    return d


def pattern_from_dict(data: dict, default_seed: int = 0) -> PatternSpec:
    if not isinstance(data, dict):
        raise PatternError("pattern", "expected a JSON object")
    unknown = set(data) - _SCALAR_FIELDS
    if unknown:
        raise PatternError("pattern", f"unknown fields: {sorted(unknown)}")
    try:
        kind = PatternKind(data["kind"])
    except KeyError:
        raise PatternError("kind", "missing") from None
    except ValueError:
        raise PatternError("kind", f"unknown kind {data['kind']!r}") from None
    children = tuple(
        pattern_from_dict(c, default_seed) for c in data.get("children", [])
    )
    spec = PatternSpec(
        kind=kind,
        base_address=int(data.get("base_address", 0)),
        cycle_length=int(data.get("cycle_length", 1)),
        inter_cycle_shift=int(
            data.get("inter_cycle_shift", 1 if kind is PatternKind.SEQUENTIAL else 0)
        ),
        skip_shift=int(data.get("skip_shift", 0)),
        stride=int(data.get("stride", 1)),
        seed=int(data.get("seed", default_seed)),
        children=children,
    )
    spec.validate()
    return spec
