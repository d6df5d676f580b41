"""Layer loop-nest analysis: memory traces and pattern parameters under
loop unrolling.

Canonical data layouts (row-major, stride-1 convolution, no padding):

* weights: ``address = (k_global * (C/G) + c_in) * F + f``
* inputs:  ``address = c_global * X + output_position + f``

Loop order is outer ``(batch, group, x-tile)`` then ``(k-tile, c-tile,
f-tile)``, with the unrolled degrees forming the per-step address group
(emitted in ascending address order).  All reported numbers depend on these
conventions.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from itertools import product
from pathlib import Path

from .config import ConfigError, load_json
from .patterns import (
    UNCLASSIFIED,
    AddressTrace,
    PatternKind,
    PatternSpec,
    Unclassified,
    classify_trace,
)


class LayerType(Enum):
    CONV = "CONV"
    FC = "FC"


class LayerError(ValueError):
    pass


@dataclass(frozen=True)
class LayerSpec:
    layer_type: LayerType
    N: int
    G: int
    K: int
    C: int
    X: int
    F: int
    word_width: int = 8

    def validate(self) -> None:
        for name in ("N", "G", "K", "C", "X", "F", "word_width"):
            if getattr(self, name) < 1:
                raise LayerError(f"{name}: must be positive")
        if self.layer_type is LayerType.FC and (self.X != 1 or self.F != 1):
            raise LayerError("FC layers are modeled with X = F = 1")
        if self.C % self.G or self.K % self.G:
            raise LayerError("C and K must be divisible by G")
        if self.X < self.F:
            raise LayerError("X must cover at least one filter window")

    @property
    def out_x(self) -> int:
        return self.X - self.F + 1


@dataclass(frozen=True)
class Unrolling:
    n: int = 1
    g: int = 1
    k: int = 1
    c: int = 1
    x: int = 1
    f: int = 1

    @property
    def degrees(self) -> tuple[int, int, int, int, int, int]:
        return (self.n, self.g, self.k, self.c, self.x, self.f)

    @property
    def pe_used(self) -> int:
        p = 1
        for d in self.degrees:
            p *= d
        return p

    def validate_for(self, layer: LayerSpec) -> None:
        dims = (layer.N, layer.G, layer.K // layer.G, layer.C // layer.G, layer.X, layer.F)
        names = ("n", "g", "k", "c", "x", "f")
        for name, deg, dim in zip(names, self.degrees, dims):
            if deg < 1 or dim % deg:
                raise LayerError(f"unroll degree {name}={deg} does not divide {dim}")
        if layer.out_x % self.x:
            raise LayerError(
                f"unroll degree x={self.x} does not tile {layer.out_x} output positions"
            )


@dataclass(frozen=True)
class LayerAnalysis:
    unique_addresses: int
    cycle_length: int
    words_per_step: int
    required_port_width: int
    pattern: PatternSpec | Unclassified


def _divisors(n: int) -> list[int]:
    return [d for d in range(1, n + 1) if n % d == 0]


def _degree_choices(layer: LayerSpec) -> tuple[list[int], ...]:
    # x degrees must tile the stride-1 output sweep as well as the input width
    xs = [d for d in _divisors(layer.X) if layer.out_x % d == 0]
    return (
        _divisors(layer.N),
        _divisors(layer.G),
        _divisors(layer.K // layer.G),
        _divisors(layer.C // layer.G),
        xs,
        _divisors(layer.F),
    )


def enumerate_unrollings(layer: LayerSpec, pe_count: int) -> list[Unrolling]:
    """All degree tuples filling the array exactly, lexicographic order."""
    layer.validate()
    if pe_count < 1:
        raise LayerError("pe_count must be positive")
    out = []
    for degs in product(*_degree_choices(layer)):
        p = 1
        for d in degs:
            p *= d
        if p == pe_count:
            out.append(Unrolling(*degs))
    return out


def best_unrolling(layer: LayerSpec, pe_count: int) -> Unrolling:
    """Exact fill when possible, otherwise the highest utilization."""
    exact = enumerate_unrollings(layer, pe_count)
    if exact:
        return exact[0]
    best: Unrolling | None = None
    for degs in product(*_degree_choices(layer)):
        u = Unrolling(*degs)
        if u.pe_used > pe_count:
            continue
        if best is None or u.pe_used > best.pe_used or (
            u.pe_used == best.pe_used and u.degrees < best.degrees
        ):
            best = u
    assert best is not None
    return best


def common_unrollings(layers: list[LayerSpec], pe_count: int) -> list[Unrolling]:
    """Unrollings feasible for every layer (a shared data flow needs one)."""
    if not layers:
        return []
    sets = [set(enumerate_unrollings(layer, pe_count)) for layer in layers]
    shared = set.intersection(*sets)
    return sorted(shared, key=lambda u: u.degrees)


def _tiles(total: int, degree: int) -> range:
    return range(total // degree)


def weight_trace(layer: LayerSpec, u: Unrolling) -> AddressTrace:
    """Per-step groups of the weights the unrolled MACs consume."""
    layer.validate()
    u.validate_for(layer)
    kg = layer.K // layer.G
    cg = layer.C // layer.G
    if layer.out_x % u.x:
        raise LayerError(f"unroll degree x={u.x} does not tile {layer.out_x} output positions")
    addrs: list[int] = []
    group_size = None
    for _n in _tiles(layer.N, u.n):
        for g_o in _tiles(layer.G, u.g):
            for _x in _tiles(layer.out_x, u.x):
                for k_o in _tiles(kg, u.k):
                    for c_o in _tiles(cg, u.c):
                        for f_o in _tiles(layer.F, u.f):
                            group = set()
                            for gi in range(u.g):
                                for ki in range(u.k):
                                    for ci in range(u.c):
                                        for fi in range(u.f):
                                            k_glob = (g_o * u.g + gi) * kg + k_o * u.k + ki
                                            c_in = c_o * u.c + ci
                                            f_pos = f_o * u.f + fi
                                            group.add((k_glob * cg + c_in) * layer.F + f_pos)
                            ordered = sorted(group)
                            if group_size is None:
                                group_size = len(ordered)
                            addrs.extend(ordered)
    return AddressTrace(tuple(addrs), words_per_step=group_size or 1)


def input_trace(layer: LayerSpec, u: Unrolling) -> AddressTrace:
    """Per-step groups of the input words the unrolled MACs consume."""
    layer.validate()
    u.validate_for(layer)
    kg = layer.K // layer.G
    cg = layer.C // layer.G
    if layer.out_x % u.x:
        raise LayerError(f"unroll degree x={u.x} does not tile {layer.out_x} output positions")
    addrs: list[int] = []
    group_size = None
    for _n in _tiles(layer.N, u.n):
        for g_o in _tiles(layer.G, u.g):
            for x_o in _tiles(layer.out_x, u.x):
                for _k in _tiles(kg, u.k):
                    for c_o in _tiles(cg, u.c):
                        for f_o in _tiles(layer.F, u.f):
                            group = set()
                            for gi in range(u.g):
                                for ci in range(u.c):
                                    for xi in range(u.x):
                                        for fi in range(u.f):
                                            c_glob = (g_o * u.g + gi) * cg + c_o * u.c + ci
                                            pos = x_o * u.x + xi + f_o * u.f + fi
                                            group.add(c_glob * layer.X + pos)
                            ordered = sorted(group)
                            if group_size is None:
                                group_size = len(ordered)
                            elif group_size != len(ordered):
                                raise LayerError(
                                    "input address groups are not uniform for this unrolling"
                                )
                            addrs.extend(ordered)
    return AddressTrace(tuple(addrs), words_per_step=group_size or 1)


def analyze(trace: AddressTrace, word_width: int) -> LayerAnalysis:
    """Summary statistics plus a recovered pattern for the step bases."""
    unique = len(set(trace.addresses))
    w = trace.words_per_step
    bases = tuple(min(trace.step_group(i)) for i in range(trace.steps))
    pattern: PatternSpec | Unclassified
    if len(bases) < 2:
        pattern = PatternSpec(PatternKind.CYCLIC, bases[0] if bases else 0, 1)
    else:
        pattern = classify_trace(AddressTrace(bases))
    if unique == len(trace.addresses):
        cycle_length = 1  # every word touched once: nothing cycles
    elif isinstance(pattern, PatternSpec) and pattern.kind in (
        PatternKind.CYCLIC,
        PatternKind.SHIFTED_CYCLIC,
    ):
        cycle_length = pattern.cycle_length
    elif isinstance(pattern, PatternSpec):
        cycle_length = 1  # strided or sequential bases: no step-level reuse
    else:
        cycle_length = 0  # composite structure the recovery cannot express
    return LayerAnalysis(
        unique_addresses=unique,
        cycle_length=cycle_length,
        words_per_step=w,
        required_port_width=w * word_width,
        pattern=pattern,
    )


# --- network files ----------------------------------------------------------

_LAYER_KEYS = {"layer_type", "N", "G", "K", "C", "X", "F", "word_width"}


def layer_from_dict(data: dict) -> LayerSpec:
    if not isinstance(data, dict):
        raise ConfigError("layer: expected a JSON object")
    unknown = set(data) - _LAYER_KEYS
    if unknown:
        raise ConfigError(f"layer: unknown fields {sorted(unknown)}")
    try:
        ltype = LayerType(data["layer_type"])
    except KeyError:
        raise ConfigError("layer: missing layer_type") from None
    except ValueError:
        raise ConfigError(f"layer: unknown layer_type {data['layer_type']!r}") from None
    spec = LayerSpec(
        layer_type=ltype,
        N=int(data.get("N", 1)),
        G=int(data.get("G", 1)),
        K=int(data["K"]),
        C=int(data["C"]),
        X=int(data.get("X", 1)),
        F=int(data.get("F", 1)),
        word_width=int(data.get("word_width", 8)),
    )
    try:
        spec.validate()
    except LayerError as e:
        raise ConfigError(f"layer: {e}") from e
    return spec


def load_network(path: str | Path) -> list[LayerSpec]:
    data = load_json(path)
    if not isinstance(data, dict) or "layers" not in data:
        raise ConfigError(f"{path}: expected an object with a 'layers' array")
    unknown = set(data) - {"name", "layers"}
    if unknown:
        raise ConfigError(f"{path}: unknown fields {sorted(unknown)}")
    return [layer_from_dict(layer) for layer in data["layers"]]
