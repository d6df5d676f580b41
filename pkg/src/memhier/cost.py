"""Area and power estimation from a macro cost table.

The shipped default table is fitted so that whole-configuration aggregates
line up with known reference figures; individual macro entries are only
self-consistent with those aggregates.  Vendor tables with the same JSON
shape can be substituted.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from importlib import resources
from pathlib import Path

from .config import HierarchyConfig, Ports
from .sim import SimReport


class CostError(ValueError):
    pass


class UnsupportedMacroError(CostError):
    pass


@dataclass(frozen=True)
class MacroCostEntry:
    word_width: int
    ram_depth: int
    ports: Ports
    area_um2: float
    leakage_mw: float
    read_energy_nj: float
    write_energy_nj: float


@dataclass(frozen=True)
class OsrCost:
    area_per_bit: float
    leakage_per_bit: float
    load_energy_per_bit: float
    shift_energy_per_bit: float


@dataclass(frozen=True)
class CostTable:
    entries: tuple[MacroCostEntry, ...]
    osr: OsrCost

    def lookup(self, width: int, depth: int, ports: Ports) -> MacroCostEntry | None:
        for e in self.entries:
            if e.word_width == width and e.ram_depth == depth and e.ports == ports:
                return e
        return None


@dataclass(frozen=True)
class CostReport:
    total_area_um2: float
    static_power_mw: float
    dynamic_energy_nj: float
    average_power_mw: float

    def summary_dict(self) -> dict:
        return {
            "total_area_um2": self.total_area_um2,
            "static_power_mw": self.static_power_mw,
            "dynamic_energy_nj": self.dynamic_energy_nj,
            "average_power_mw": self.average_power_mw,
        }


def _validate_table(table: CostTable) -> None:
    for e in table.entries:
        if min(e.area_um2, e.leakage_mw, e.read_energy_nj, e.write_energy_nj) <= 0:
            raise CostError(
                f"cost table: non-positive value for {e.word_width}x{e.ram_depth}"
                f" {e.ports.value}"
            )
    by_geom = {(e.word_width, e.ram_depth, e.ports): e for e in table.entries}
    for (w, d, p), e in by_geom.items():
        if p is Ports.DUAL:
            twin = by_geom.get((w, d, Ports.SINGLE))
            if twin and (e.area_um2 <= twin.area_um2 or e.leakage_mw <= twin.leakage_mw):
                raise CostError(
                    f"cost table: dual-ported {w}x{d} must exceed its single-ported twin"
                )


def load_cost_table(path: str | Path) -> CostTable:
    try:
        data = json.loads(Path(path).read_text())
    except OSError as e:
        raise CostError(f"{path}: {e.strerror or e}") from e
    except json.JSONDecodeError as e:
        raise CostError(f"{path}: invalid JSON ({e.msg})") from e
    return table_from_dict(data)


def default_cost_table() -> CostTable:
    data = json.loads(
        resources.files("memhier.data").joinpath("default_cost_table.json").read_text()
    )
    return table_from_dict(data)


def table_from_dict(data: dict) -> CostTable:
    if not isinstance(data, dict) or "entries" not in data or "osr" not in data:
        raise CostError("cost table: expected an object with 'entries' and 'osr'")
    entries = []
    for i, e in enumerate(data["entries"]):
        try:
            entries.append(
                MacroCostEntry(
                    word_width=int(e["word_width"]),
                    ram_depth=int(e["ram_depth"]),
                    ports=Ports(e["ports"]),
                    area_um2=float(e["area_um2"]),
                    leakage_mw=float(e["leakage_mw"]),
                    read_energy_nj=float(e["read_energy_nj"]),
                    write_energy_nj=float(e["write_energy_nj"]),
                )
            )
        except (KeyError, ValueError, TypeError) as exc:
            raise CostError(f"cost table entry {i}: {exc}") from exc
    o = data["osr"]
    try:
        osr = OsrCost(
            area_per_bit=float(o["area_per_bit"]),
            leakage_per_bit=float(o["leakage_per_bit"]),
            load_energy_per_bit=float(o["load_energy_per_bit"]),
            shift_energy_per_bit=float(o["shift_energy_per_bit"]),
        )
    except (KeyError, ValueError, TypeError) as exc:
        raise CostError(f"cost table osr block: {exc}") from exc
    table = CostTable(entries=tuple(entries), osr=osr)
    _validate_table(table)
    return table


def macro_cost(width: int, depth: int, ports: Ports, table: CostTable) -> MacroCostEntry:
    """Exact entry if present, else geometric interpolation over depth."""
    exact = table.lookup(width, depth, ports)
    if exact is not None:
        return exact
    family = sorted(
        (e for e in table.entries if e.word_width == width and e.ports == ports),
        key=lambda e: e.ram_depth,
    )
    if not family:
        raise UnsupportedMacroError(
            f"no {ports.value}-ported entries with word width {width}"
        )
    below = [e for e in family if e.ram_depth < depth]
    above = [e for e in family if e.ram_depth > depth]
    if not below or not above:
        span = f"{family[0].ram_depth}..{family[-1].ram_depth}"
        raise UnsupportedMacroError(
            f"depth {depth} outside the table's {width}-bit {ports.value} range {span}"
        )
    lo, hi = below[-1], above[0]
    t = (math.log(depth) - math.log(lo.ram_depth)) / (
        math.log(hi.ram_depth) - math.log(lo.ram_depth)
    )

    def mix(a: float, b: float) -> float:
        return math.exp(math.log(a) + t * (math.log(b) - math.log(a)))

    return MacroCostEntry(
        word_width=width,
        ram_depth=depth,
        ports=ports,
        area_um2=mix(lo.area_um2, hi.area_um2),
        leakage_mw=mix(lo.leakage_mw, hi.leakage_mw),
        read_energy_nj=mix(lo.read_energy_nj, hi.read_energy_nj),
        write_energy_nj=mix(lo.write_energy_nj, hi.write_energy_nj),
    )


def config_area(config: HierarchyConfig, table: CostTable) -> float:
    """Total macro area of all banks plus the shift register, in square um."""
    total = 0.0
    for lev in config.levels:
        entry = macro_cost(lev.word_width, lev.ram_depth, lev.ports, table)
        total += entry.area_um2 * lev.banks
    if config.osr is not None:
        total += config.osr.register_width * table.osr.area_per_bit
    return total


def config_static_power(config: HierarchyConfig, table: CostTable) -> float:
    total = 0.0
    for lev in config.levels:
        entry = macro_cost(lev.word_width, lev.ram_depth, lev.ports, table)
        total += entry.leakage_mw * lev.banks
    if config.osr is not None:
        total += config.osr.register_width * table.osr.leakage_per_bit
    return total


def run_dynamic_energy(config: HierarchyConfig, report: SimReport, table: CostTable) -> float:
    """Dynamic energy of a simulated run in nJ from its access counts."""
    if len(report.level_reads) != len(config.levels):
        raise CostError("report does not match the configuration's level count")
    total = 0.0
    for lev, reads, writes in zip(config.levels, report.level_reads, report.level_writes):
        entry = macro_cost(lev.word_width, lev.ram_depth, lev.ports, table)
        total += reads * entry.read_energy_nj + writes * entry.write_energy_nj
    if config.osr is not None:
        w_last = config.levels[-1].word_width
        loads = report.level_reads[-1]
        total += loads * w_last * table.osr.load_energy_per_bit
        total += len(report.outputs) * config.osr.register_width * table.osr.shift_energy_per_bit
    return total


def run_power(config: HierarchyConfig, report: SimReport, table: CostTable,
              clock_hz: float) -> CostReport:
    if report.total_internal_cycles <= 0:
        raise CostError("average power is undefined for a zero-cycle report")
    if clock_hz <= 0:
        raise CostError("clock_hz must be positive")
    static = config_static_power(config, table)
    dynamic_nj = run_dynamic_energy(config, report, table)
    seconds = report.total_internal_cycles / clock_hz
    average = static + dynamic_nj * 1e-9 / seconds * 1e3  # nJ/s -> mW
    return CostReport(
        total_area_um2=config_area(config, table),
        static_power_mw=static,
        dynamic_energy_nj=dynamic_nj,
        average_power_mw=average,
    )
