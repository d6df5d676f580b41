"""Elaboration-time hierarchy parameters, runtime pattern inputs, and their
JSON form.

`validate_config` returns the full list of violated rules instead of raising,
mirroring how an elaboration front-end reports every problem at once.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, replace
from enum import Enum
from pathlib import Path


class ConfigError(ValueError):
    """Malformed or unreadable configuration input."""


class Ports(Enum):
    SINGLE = "single"
    DUAL = "dual"


@dataclass(frozen=True)
class LevelConfig:
    macro_name: str
    banks: int
    word_width: int
    ram_depth: int
    ports: Ports

    @property
    def capacity(self) -> int:
        """Total slots in the level (both banks)."""
        return self.banks * self.ram_depth


@dataclass(frozen=True)
class OsrConfig:
    register_width: int
    output_width: int
    available_shifts: tuple[int, ...]


@dataclass(frozen=True)
class HierarchyConfig:
    offchip_word_width: int
    offchip_address_width: int
    levels: tuple[LevelConfig, ...]
    osr: OsrConfig | None = None
    clock_ratio: tuple[int, int] = (1, 1)  # external : internal frequency
    offchip_latency: int = 1  # external-clock cycles per off-chip request

    @property
    def last(self) -> LevelConfig:
        return self.levels[-1]


@dataclass(frozen=True)
class RuntimeInputs:
    start_address: int
    cycle_length: tuple[int, ...]
    inter_cycle_shift: tuple[int, ...]
    skip_shift: tuple[int, ...]
    disable_output: bool = False
    shift_select: int = 0

    def with_pattern(self, level: int, **kw) -> "RuntimeInputs":
        out = self
        for name, value in kw.items():
            arr = list(getattr(out, name))
            arr[level] = value
            out = replace(out, **{name: tuple(arr)})
        return out


def uniform_runtime(
    config: HierarchyConfig,
    start_address: int,
    cycle_length: int,
    inter_cycle_shift: int = 0,
    skip_shift: int = 0,
    disable_output: bool = False,
    shift_select: int = 0,
) -> RuntimeInputs:
    """Runtime inputs applying one pattern setting to every level."""
    n = len(config.levels)
    return RuntimeInputs(
        start_address=start_address,
        cycle_length=(cycle_length,) * n,
        inter_cycle_shift=(inter_cycle_shift,) * n,
        skip_shift=(skip_shift,) * n,
        disable_output=disable_output,
        shift_select=shift_select,
    )


def plan_runtime(
    config: HierarchyConfig,
    start_address: int,
    cycle_length: int,
    inter_cycle_shift: int = 0,
    skip_shift: int = 0,
    disable_output: bool = False,
    shift_select: int = 0,
) -> RuntimeInputs:
    """Derive per-level pattern settings for a consumer-side pattern.

    The last level executes the requested pattern.  Each earlier level is
    programmed to produce exactly the write-demand stream of the level below
    it: the same pattern when the level below cannot retain its window and
    must be re-fed, or a plain pass-through stream (covering half the level,
    so reads and refills can overlap) when the level below keeps the window
    and only consumes the words a shift exposes.
    """
    n = len(config.levels)
    lengths = [0] * n
    shifts = [0] * n
    skips = [0] * n
    lengths[n - 1] = cycle_length
    shifts[n - 1] = inter_cycle_shift
    skips[n - 1] = skip_shift
    for l in range(n - 2, -1, -1):
        below = l + 1
        if shifts[below] == 0:
            # cyclic demand repeats the same words: replay from this level too
            lengths[l], shifts[l], skips[l] = lengths[below], 0, 0
        elif lengths[below] <= config.levels[below].capacity:
            # the level below retains its window; feed it fresh words only
            span = max(1, config.levels[l].capacity // 2)
            lengths[l], shifts[l], skips[l] = span, span, 0
        else:
            lengths[l], shifts[l], skips[l] = lengths[below], shifts[below], skips[below]
    return RuntimeInputs(
        start_address=start_address,
        cycle_length=tuple(lengths),
        inter_cycle_shift=tuple(shifts),
        skip_shift=tuple(skips),
        disable_output=disable_output,
        shift_select=shift_select,
    )


def validate_config(config: HierarchyConfig) -> list[str]:
    """Return every violated configuration rule, with a field path each."""
    v: list[str] = []
    if config.offchip_word_width < 1:
        v.append("offchip_word_width: must be positive")
    if config.offchip_address_width < 1:
        v.append("offchip_address_width: must be positive")
    if not 1 <= len(config.levels) <= 5:
        v.append("levels: hierarchy depth must range from one to five")
    ratio_ext, ratio_int = config.clock_ratio
    if ratio_ext < 1 or ratio_int < 1:
        v.append("clock_ratio: both terms must be positive")
    if config.offchip_latency < 0:
        v.append("offchip_latency: must be non-negative")
    for i, lev in enumerate(config.levels):
        path = f"levels[{i}]"
        if lev.banks not in (1, 2):
            v.append(f"{path}.banks: a level features one or two banks")
        if lev.word_width < 1:
            v.append(f"{path}.word_width: must be positive")
        if lev.ram_depth < 1:
            v.append(f"{path}.ram_depth: must be positive")
        if not lev.macro_name:
            v.append(f"{path}.macro_name: must be non-empty")
    if config.levels:
        if config.levels[-1].ports is not Ports.DUAL:
            v.append(f"levels[{len(config.levels) - 1}].ports: last level must be dual-ported")
        w0 = config.levels[0].word_width
        if w0 >= 1 and config.offchip_word_width >= 1:
            if config.offchip_word_width > w0:
                v.append("offchip_word_width: must not exceed level-0 word width")
            elif w0 % config.offchip_word_width != 0:
                v.append("offchip_word_width: must divide level-0 word width")
        for i in range(len(config.levels) - 1):
            a = config.levels[i].word_width
            b = config.levels[i + 1].word_width
            if a >= 1 and b >= 1 and a % b != 0 and b % a != 0:
                v.append(
                    f"levels[{i + 1}].word_width: must divide or be a multiple of"
                    f" levels[{i}].word_width"
                )
    if config.osr is not None:
        osr = config.osr
        w_last = config.levels[-1].word_width if config.levels else 0
        if osr.register_width < w_last:
            v.append("osr.register_width: must cover the last level's word width")
        if not osr.available_shifts:
            v.append("osr.available_shifts: must be non-empty")
        if osr.output_width < 1 or osr.output_width > osr.register_width:
            v.append("osr.output_width: must lie within the register width")
        for j, s in enumerate(osr.available_shifts):
            if s < 1 or s > osr.register_width:
                v.append(f"osr.available_shifts[{j}]: must lie within the register width")
    return v


def validate_runtime(config: HierarchyConfig, runtime: RuntimeInputs) -> list[str]:
    v: list[str] = []
    n = len(config.levels)
    for name in ("cycle_length", "inter_cycle_shift", "skip_shift"):
        arr = getattr(runtime, name)
        if len(arr) != n:
            v.append(f"{name}: needs exactly one entry per hierarchy level ({n})")
    if len(runtime.cycle_length) == len(runtime.inter_cycle_shift) == len(runtime.skip_shift) == n:
        for l in range(n):
            if runtime.cycle_length[l] < 1:
                v.append(f"cycle_length[{l}]: must be positive")
            if runtime.inter_cycle_shift[l] < 0:
                v.append(f"inter_cycle_shift[{l}]: must be non-negative")
            elif runtime.inter_cycle_shift[l] > runtime.cycle_length[l]:
                v.append(f"inter_cycle_shift[{l}]: must not exceed the cycle length")
            if runtime.skip_shift[l] < 0:
                v.append(f"skip_shift[{l}]: must be non-negative")
    if runtime.start_address < 0:
        v.append("start_address: must be non-negative")
    elif runtime.start_address >= 1 << config.offchip_address_width:
        v.append("start_address: outside the off-chip address space")
    n_shifts = len(config.osr.available_shifts) if config.osr else 0
    if not 0 <= runtime.shift_select <= n_shifts:
        v.append("shift_select: must select an available shift or 0")
    return v


# --- JSON codec -----------------------------------------------------------


def _require_keys(obj: dict, allowed: set[str], required: set[str], where: str) -> None:
    unknown = set(obj) - allowed
    if unknown:
        raise ConfigError(f"{where}: unknown fields {sorted(unknown)}")
    missing = required - set(obj)
    if missing:
        raise ConfigError(f"{where}: missing fields {sorted(missing)}")


def _parse_ratio(value) -> tuple[int, int]:
    if isinstance(value, str):
        parts = value.split(":")
        if len(parts) != 2:
            raise ConfigError("clock_ratio: expected 'EXT:INT'")
        try:
            return int(parts[0]), int(parts[1])
        except ValueError:
            raise ConfigError("clock_ratio: expected integer terms") from None
    if isinstance(value, (list, tuple)) and len(value) == 2:
        return int(value[0]), int(value[1])
    raise ConfigError("clock_ratio: expected 'EXT:INT' or [ext, int]")


def config_from_dict(data: dict) -> HierarchyConfig:
    if not isinstance(data, dict):
        raise ConfigError("config: expected a JSON object")
    _require_keys(
        data,
        {
            "offchip_word_width",
            "offchip_address_width",
            "levels",
            "osr",
            "clock_ratio",
            "offchip_latency",
        },
        {"offchip_word_width", "offchip_address_width", "levels"},
        "config",
    )
    levels = []
    if not isinstance(data["levels"], list):
        raise ConfigError("levels: expected a JSON array")
    for i, lev in enumerate(data["levels"]):
        where = f"levels[{i}]"
        if not isinstance(lev, dict):
            raise ConfigError(f"{where}: expected a JSON object")
        _require_keys(
            lev,
            {"macro_name", "banks", "word_width", "ram_depth", "ports"},
            {"macro_name", "banks", "word_width", "ram_depth", "ports"},
            where,
        )
        try:
            ports = Ports(lev["ports"])
        except ValueError:
            raise ConfigError(f"{where}.ports: expected 'single' or 'dual'") from None
        levels.append(
            LevelConfig(
                macro_name=str(lev["macro_name"]),
                banks=int(lev["banks"]),
                word_width=int(lev["word_width"]),
                ram_depth=int(lev["ram_depth"]),
                ports=ports,
            )
        )
    osr = None
    if data.get("osr") is not None:
        o = data["osr"]
        if not isinstance(o, dict):
            raise ConfigError("osr: expected a JSON object or null")
        _require_keys(
            o,
            {"register_width", "output_width", "available_shifts"},
            {"register_width", "output_width", "available_shifts"},
            "osr",
        )
        osr = OsrConfig(
            register_width=int(o["register_width"]),
            output_width=int(o["output_width"]),
            available_shifts=tuple(int(s) for s in o["available_shifts"]),
        )
    return HierarchyConfig(
        offchip_word_width=int(data["offchip_word_width"]),
        offchip_address_width=int(data["offchip_address_width"]),
        levels=tuple(levels),
        osr=osr,
        clock_ratio=_parse_ratio(data.get("clock_ratio", "1:1")),
        offchip_latency=int(data.get("offchip_latency", 1)),
    )


def config_to_dict(config: HierarchyConfig) -> dict:
    d: dict = {
        "offchip_word_width": config.offchip_word_width,
        "offchip_address_width": config.offchip_address_width,
        "clock_ratio": f"{config.clock_ratio[0]}:{config.clock_ratio[1]}",
        "offchip_latency": config.offchip_latency,
        "levels": [
            {
                "macro_name": lev.macro_name,
                "banks": lev.banks,
                "word_width": lev.word_width,
                "ram_depth": lev.ram_depth,
                "ports": lev.ports.value,
            }
            for lev in config.levels
        ],
        "osr": None,
    }
    if config.osr is not None:
        d["osr"] = {
            "register_width": config.osr.register_width,
            "output_width": config.osr.output_width,
            "available_shifts": list(config.osr.available_shifts),
        }
    return d


def runtime_from_dict(data: dict) -> RuntimeInputs:
    if not isinstance(data, dict):
        raise ConfigError("runtime: expected a JSON object")
    _require_keys(
        data,
        {
            "start_address",
            "cycle_length",
            "inter_cycle_shift",
            "skip_shift",
            "disable_output",
            "shift_select",
        },
        {"start_address", "cycle_length", "inter_cycle_shift", "skip_shift"},
        "runtime",
    )

    def arr(name) -> tuple[int, ...]:
        raw = data[name]
        if not isinstance(raw, list):
            raise ConfigError(f"{name}: expected one entry per level")
        return tuple(int(x) for x in raw)

    return RuntimeInputs(
        start_address=int(data["start_address"]),
        cycle_length=arr("cycle_length"),
        inter_cycle_shift=arr("inter_cycle_shift"),
        skip_shift=arr("skip_shift"),
        disable_output=bool(data.get("disable_output", False)),
        shift_select=int(data.get("shift_select", 0)),
    )


def runtime_to_dict(runtime: RuntimeInputs) -> dict:
    return {
        "start_address": runtime.start_address,
        "cycle_length": list(runtime.cycle_length),
        "inter_cycle_shift": list(runtime.inter_cycle_shift),
        "skip_shift": list(runtime.skip_shift),
        "disable_output": runtime.disable_output,
        "shift_select": runtime.shift_select,
    }


def load_json(path: str | Path) -> dict:
    try:
        text = Path(path).read_text()
    except OSError as e:
        raise ConfigError(f"{path}: {e.strerror or e}") from e
    try:
        data = json.loads(text)
    except json.JSONDecodeError as e:
        raise ConfigError(f"{path}: invalid JSON ({e.msg} at line {e.lineno})") from e
    return data


def load_config(path: str | Path) -> HierarchyConfig:
    return config_from_dict(load_json(path))


def load_runtime(path: str | Path) -> RuntimeInputs:
    return runtime_from_dict(load_json(path))
