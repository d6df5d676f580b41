import random

from memhier import *
from memhier.config import plan_runtime
from memhier.sim import run as simrun, preload as simpreload, init_sim


def fig5_config(depth_l1, ratio=(1, 1), l0_ports=Ports.SINGLE):
    return HierarchyConfig(
        offchip_word_width=32,
        offchip_address_width=32,
        levels=(
            LevelConfig("sp1024x32", 1, 32, 1024, l0_ports),
            LevelConfig("dp%dx32" % depth_l1, 1, 32, depth_l1, Ports.DUAL),
        ),
        clock_ratio=ratio,
        offchip_latency=1,
    )


def total(cfg, l, n=5000, pre=0, s=0, k=0):
    rt = plan_runtime(cfg, 0, l, s, k)
    st = init_sim(cfg, rt)
    if pre:
        simpreload(st, pre)
    return simrun(st, n_outputs=n)


cfg = fig5_config(512)
print("== fig5 512 @1:1 lat1 (planned runtimes) ==")
vals = {}
for l in [8, 16, 512, 1024]:
    np_ = total(cfg, l).total_internal_cycles
    pre = total(cfg, l, pre=8000).total_internal_cycles
    vals[l] = (np_, pre)
    print(f"l={l:5d} nopre={np_:6d} pre={pre:6d}")
minnp = min(v[0] for l, v in vals.items() if l <= 512)
minpre = min(v[1] for l, v in vals.items() if l <= 512)
print("doubling check nopre:", vals[1024][0] / (2 * minnp))
print("saving:", 1 - vals[1024][1] / vals[1024][0])

print("== fig7 knees (planned) l=48 ==")
for ports in (Ports.SINGLE, Ports.DUAL):
    cfg7 = HierarchyConfig(
        offchip_word_width=32, offchip_address_width=32,
        levels=(LevelConfig("l0", 1, 32, 512, ports),
                LevelConfig("l1", 1, 32, 128, Ports.DUAL)),
        clock_ratio=(1, 1), offchip_latency=1,
    )
    row = []
    for s in [1, 8, 12, 16, 17, 18, 20, 24, 32, 48]:
        row.append((s, total(cfg7, 48, s=s).total_internal_cycles))
    r2 = total(cfg7, 48, n=2000, s=48).total_internal_cycles
    r5 = total(cfg7, 48, n=5000, s=48).total_internal_cycles
    print(ports.value, row, "marg3:", (r5 - r2) / 3000)

print("== differential, planned runtimes, randomized ==")
rng = random.Random(7)
fails = viols = 0
for case in range(250):
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
    if length > cap_last and length % cap_last:
        length = (length // cap_last) * cap_last or cap_last
    s = rng.choice([0, 0, rng.randint(0, length)])
    k = rng.choice([0, 0, 1, 2])
    rtd = plan_runtime(cfgd, rng.randint(0, 100), length, s, k, shift_select=shift_select)
    n = rng.randint(1, 250)
    try:
        st = init_sim(cfgd, rtd, check_invariants=True)
        rep = simrun(st, n_outputs=n)
        exp = expected_outputs(cfgd, rtd, n)
        if rep.outputs != exp.outputs:
            fails += 1
            if fails <= 3:
                print("MISMATCH", case, n_lev, w, woff, length, s, k, shift_select,
                      [(lv.banks, lv.ram_depth, lv.ports.value) for lv in levels])
                print("  sim:", rep.outputs[:10])
                print("  exp:", exp.outputs[:10])
        if st.violations:
            viols += 1
            print("VIOL", case, st.violations[:2])
    except DeadlockError as e:
        print("DEADLOCK", case, n_lev, w, woff, length, s, k, "osr", use_osr, ":", e)
        fails += 1
        if fails > 6:
            break
print(f"fails={fails} viols={viols}")
