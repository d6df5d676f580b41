#!/usr/bin/env python3
"""Fit the default macro cost table against the reference aggregates.

Solves smooth per-macro area/leakage/energy models such that whole-config
aggregates land on the published reference numbers, then freezes the table
as src/memhier/data/default_cost_table.json.  Per-macro values are fitted,
not measured; only the aggregates are anchored.

Anchors:
  * 32-bit two-level config area            = 7,566 um^2 (exact)
  * 128-bit two-level config area (incl OSR) = 15,202 um^2 (exact)
  * 128-bit config average power over its reference run = 0.31 mW
  * dynamic-energy ratio 128-bit : 32-bit reference runs = 2.5
  * dual- vs single-ported-L0 power ratio (shift experiment pair) = 2.30
"""

from __future__ import annotations

import json
from pathlib import Path

from memhier import HierarchyConfig, LevelConfig, OsrConfig, Ports
from memhier.config import plan_runtime
from memhier.sim import init_sim, preload, run

OUT = Path(__file__).resolve().parent.parent / "src" / "memhier" / "data" / "default_cost_table.json"

CLOCK_HZ = 250e3
WIDTHS = [8, 16, 32, 64, 128]
DEPTHS = [16, 32, 64, 128, 256, 512, 1024, 2048, 4096]

# smooth model constants (chosen, not anchored)
A0, AW, AD = 250.0, 12.0, 1.5
DUAL_AREA_FACTOR = 1.9
OSR_AREA_PER_BIT = 13.0
OSR_LEAK_PER_BIT = 2.0e-5  # mW
READ_E_PER_BIT = 5.0e-4  # nJ
WRITE_OVER_READ = 1.15
DUAL_ENERGY_FACTOR = 1.35
OSR_LOAD_SHARE = 0.25  # load energy per bit as a share of a dual read bit


def fig6_configs():
    c32 = HierarchyConfig(
        offchip_word_width=32, offchip_address_width=32,
        levels=(LevelConfig("sp512x32", 1, 32, 512, Ports.SINGLE),
                LevelConfig("dp128x32", 1, 32, 128, Ports.DUAL)),
        clock_ratio=(4, 1), offchip_latency=1,
    )
    c128 = HierarchyConfig(
        offchip_word_width=32, offchip_address_width=32,
        levels=(LevelConfig("sp128x128", 1, 128, 128, Ports.SINGLE),
                LevelConfig("dp32x128", 1, 128, 32, Ports.DUAL)),
        osr=OsrConfig(384, 32, (32,)),
        clock_ratio=(4, 1), offchip_latency=1,
    )
    return c32, c128


def fig7_config(ports):
    return HierarchyConfig(
        offchip_word_width=32, offchip_address_width=32,
        levels=(LevelConfig("l0x512", 1, 32, 512, ports),
                LevelConfig("dp128x32", 1, 32, 128, Ports.DUAL)),
        clock_ratio=(1, 1), offchip_latency=1,
    )


def anchor_runs():
    c32, c128 = fig6_configs()
    rt32 = plan_runtime(c32, 0, 64)
    st = init_sim(c32, rt32)
    preload(st, 2000)
    rep32 = run(st, n_outputs=5000)
    rt128 = plan_runtime(c128, 0, 16, shift_select=1)
    st = init_sim(c128, rt128)
    preload(st, 2000)
    rep128 = run(st, n_outputs=5000)
    reps7 = {}
    for ports in (Ports.SINGLE, Ports.DUAL):
        cfg = fig7_config(ports)
        rt = plan_runtime(cfg, 0, 48, 16)
        reps7[ports] = (cfg, run(init_sim(cfg, rt), n_outputs=5000))
    return (c32, rep32), (c128, rep128), reps7


def area_formula(w, d, dual):
    a = A0 + AREA_PER_BIT * w * d + AW * w + AD * d
    return a * (DUAL_AREA_FACTOR if dual else 1.0)


def solve_area_per_bit():
    # 32-bit anchor: sp 512x32 + dp 128x32 = 7566
    # sum = 2.9*A0 + Ab*(16384 + 1.9*4096) + AW*32*2.9 + AD*(512 + 1.9*128)
    fixed = 2.9 * A0 + AW * 32 * 2.9 + AD * (512 + 1.9 * 128)
    return (7566.0 - fixed) / (16384 + 1.9 * 4096)


AREA_PER_BIT = solve_area_per_bit()


def read_energy(w, dual):
    return READ_E_PER_BIT * w * (DUAL_ENERGY_FACTOR if dual else 1.0)


def write_energy(w, dual):
    return read_energy(w, dual) * WRITE_OVER_READ


def macro_dynamic(cfg, rep, skip_osr=False):
    total = 0.0
    for lev, r, w in zip(cfg.levels, rep.level_reads, rep.level_writes):
        dual = lev.ports is Ports.DUAL
        total += r * read_energy(lev.word_width, dual) + w * write_energy(lev.word_width, dual)
    return total


def main():
    (c32, rep32), (c128, rep128), reps7 = anchor_runs()

    # --- dynamic energies: solve the OSR shift energy for the 2.5 ratio ---
    e32 = macro_dynamic(c32, rep32)
    e128_macro = macro_dynamic(c128, rep128)
    osr_load_per_bit = READ_E_PER_BIT * DUAL_ENERGY_FACTOR * OSR_LOAD_SHARE
    load_bits = rep128.level_reads[-1] * c128.levels[-1].word_width
    shift_bits = len(rep128.outputs) * c128.osr.register_width
    osr_shift_per_bit = (2.5 * e32 - e128_macro - load_bits * osr_load_per_bit) / shift_bits
    if osr_shift_per_bit <= 0:
        raise SystemExit("shift-energy solve failed; adjust model constants")
    e128 = e128_macro + load_bits * osr_load_per_bit + shift_bits * osr_shift_per_bit
    assert abs(e128 / e32 - 2.5) < 1e-9

    # --- leakage: solve per-bit leakage and the dual factor ---
    def dyn_mw(energy_nj, cycles):
        return energy_nj * 1e-9 / (cycles / CLOCK_HZ) * 1e3

    e128_mw = dyn_mw(e128, rep128.total_internal_cycles)
    cfg7s, rep7s = reps7[Ports.SINGLE]
    cfg7d, rep7d = reps7[Ports.DUAL]
    es_mw = dyn_mw(macro_dynamic(cfg7s, rep7s), rep7s.total_internal_cycles)
    ed_mw = dyn_mw(macro_dynamic(cfg7d, rep7d), rep7d.total_internal_cycles)
    # both anchor configs hold 16384 single-ported + 4096 dual-ported bits, so
    # with alpha = leak(16384 sp bits) and beta = leak(4096 dp bits):
    #   alpha + beta = C1'            (0.31 mW anchor, less dynamic and OSR)
    #   5*beta + ed  = 2.3*(C1' + es) (dual/single power ratio anchor)
    c1p = 0.31 - e128_mw - 384 * OSR_LEAK_PER_BIT
    beta = (2.3 * (c1p + es_mw) - ed_mw) / 5.0
    alpha = c1p - beta
    leak_per_bit = alpha / 16384.0
    dual_leak_factor = beta / (4096.0 * leak_per_bit)
    if leak_per_bit <= 0 or dual_leak_factor <= 1.0:
        raise SystemExit(f"leakage solve failed: {leak_per_bit} {dual_leak_factor}")

    def leakage(w, d, dual):
        return leak_per_bit * w * d * (dual_leak_factor if dual else 1.0)

    # --- build the table ---
    entries = {}
    for w in WIDTHS:
        for d in DEPTHS:
            for dual in (False, True):
                entries[(w, d, dual)] = {
                    "word_width": w,
                    "ram_depth": d,
                    "ports": "dual" if dual else "single",
                    "area_um2": round(area_formula(w, d, dual)),
                    "leakage_mw": round(leakage(w, d, dual), 9),
                    "read_energy_nj": round(read_energy(w, dual), 9),
                    "write_energy_nj": round(write_energy(w, dual), 9),
                }

    # pin the four anchor geometries so the two config areas sum exactly
    a1 = entries[(32, 512, False)]["area_um2"]
    entries[(32, 128, True)]["area_um2"] = 7566 - a1
    a3 = entries[(128, 128, False)]["area_um2"]
    entries[(128, 32, True)]["area_um2"] = 15202 - round(384 * OSR_AREA_PER_BIT) - a3

    # keep the table monotone despite the pinned values
    for w in WIDTHS:
        for dual in (False, True):
            col = [entries[(w, d, dual)] for d in DEPTHS]
            for lo, hi in zip(col, col[1:]):
                assert lo["area_um2"] < hi["area_um2"], (w, dual, lo, hi)
    for w in WIDTHS:
        for d in DEPTHS:
            assert entries[(w, d, True)]["area_um2"] > entries[(w, d, False)]["area_um2"]

    table = {
        "description": "fitted default macro cost table (aggregate-calibrated)",
        "osr": {
            "area_per_bit": OSR_AREA_PER_BIT,
            "leakage_per_bit": OSR_LEAK_PER_BIT,
            "load_energy_per_bit": round(osr_load_per_bit, 12),
            "shift_energy_per_bit": round(osr_shift_per_bit, 12),
        },
        "entries": [entries[k] for k in sorted(entries)],
    }
    OUT.parent.mkdir(parents=True, exist_ok=True)
    OUT.write_text(json.dumps(table, indent=1) + "\n")
    print(f"wrote {OUT}")
    print(f"  area_per_bit={AREA_PER_BIT:.6f} leak_per_bit={leak_per_bit:.3e}"
          f" dual_leak_factor={dual_leak_factor:.3f}")
    print(f"  osr_shift_per_bit={osr_shift_per_bit:.3e} nJ")

    # report the anchors with the frozen table
    from memhier.cost import config_area, load_cost_table, run_power

    t = load_cost_table(OUT)
    print("  area32 =", config_area(c32, t))
    print("  area128 =", config_area(c128, t))
    p128 = run_power(c128, rep128, t, CLOCK_HZ)
    p32 = run_power(c32, rep32, t, CLOCK_HZ)
    print("  P128 =", p128.average_power_mw, "mW")
    print("  E128/E32 =", p128.dynamic_energy_nj / p32.dynamic_energy_nj)
    ps = run_power(cfg7s, rep7s, t, CLOCK_HZ)
    pd = run_power(cfg7d, rep7d, t, CLOCK_HZ)
    print("  dual/single power =", pd.average_power_mw / ps.average_power_mw)


if __name__ == "__main__":
    main()
