import random

from memhier import *
from memhier.config import plan_runtime
from memhier.sim import run as simrun, init_sim

print("== fig7 streaming cycle length l=256 (L1 cap 128) ==")
for ports in (Ports.SINGLE, Ports.DUAL):
    cfg7 = HierarchyConfig(
        offchip_word_width=32, offchip_address_width=32,
        levels=(LevelConfig("l0", 1, 32, 512, ports),
                LevelConfig("l1", 1, 32, 128, Ports.DUAL)),
        clock_ratio=(1, 1), offchip_latency=1,
    )
    row = []
    for s in [1, 4, 8, 16, 25, 32, 64, 85, 128, 179, 256]:
        rt = plan_runtime(cfg7, 0, 256, s)
        st = init_sim(cfg7, rt)
        row.append((s, simrun(st, n_outputs=5000).total_internal_cycles))
    # marginal at s=l
    rt = plan_runtime(cfg7, 0, 256, 256)
    a = simrun(init_sim(cfg7, rt), n_outputs=2000).total_internal_cycles
    b = simrun(init_sim(cfg7, rt), n_outputs=5000).total_internal_cycles
    print(ports.value, row, "marg3:", (b - a) / 3000)

print("== differential, resample-on-unsupported ==")
rng = random.Random(7)
fails = viols = skipped = ok = 0
for case in range(400):
    n_lev = rng.choice([1, 2, 2, 3])
    w = rng.choice([8, 16, 32])
    woff = rng.choice([d for d in (8, 16, 32) if w % d == 0 and d <= w])
    levels = []
    for i in range(n_lev):
        banks = rng.choice([1, 2])
        depth = rng.choice([4, 8, 16, 32])
        ports = Ports.DUAL if i == n_lev - 1 else rng.choice([Ports.SINGLE, Ports.DUAL])
        levels.append(LevelConfig(f"m{i}", banks, w, depth, ports))
    use_osr = rng.random() < 0.3
    osr = None
    shift_select = 0
    if use_osr:
        reg = w * rng.choice([2, 3])
        osr = OsrConfig(reg, w, (w, min(2 * w, reg)))
        shift_select = rng.choice([1, 2])
    cfgd = HierarchyConfig(woff, 24, tuple(levels), osr,
                           rng.choice([(1, 1), (2, 1), (4, 1), (1, 2)]),
                           rng.choice([0, 1, 2]))
    cap_last = levels[-1].capacity
    length = rng.randint(1, 3 * cap_last)
    s = rng.choice([0, 0, rng.randint(0, length)])
    k = rng.choice([0, 0, 1, 2])
    rtd = plan_runtime(cfgd, rng.randint(0, 100), length, s, k, shift_select=shift_select)
    n = rng.randint(1, 250)
    try:
        st = init_sim(cfgd, rtd, check_invariants=True)
    except SimInitError:
        skipped += 1
        continue
    try:
        rep = simrun(st, n_outputs=n)
        exp = expected_outputs(cfgd, rtd, n)
        if rep.outputs != exp.outputs:
            fails += 1
            if fails <= 3:
                print("MISMATCH", case, n_lev, w, woff, length, s, k, shift_select,
                      "ratio", cfgd.clock_ratio, "lat", cfgd.offchip_latency,
                      [(lv.banks, lv.ram_depth, lv.ports.value) for lv in levels])
                print("  sim:", rep.outputs[:10])
                print("  exp:", exp.outputs[:10])
        else:
            ok += 1
        if st.violations:
            viols += 1
            print("VIOL", case, st.violations[:2])
    except DeadlockError as e:
        fails += 1
        print("DEADLOCK", case, n_lev, w, woff, "len", length, "s", s, "k", k,
              "osr", use_osr, "ratio", cfgd.clock_ratio, ":", e)
        if fails > 8:
            break
print(f"ok={ok} fails={fails} viols={viols} skipped={skipped}")
