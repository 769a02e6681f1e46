"""Compare the compiled kernels with the pure-Python fallback.

    python3 benchmarks/bench_kernels.py
"""
import random
import time

from neatgames import _kernels_py as py
from neatgames.constructions import _scan_tables, build_rainbow, split_reds, strip_colour
from neatgames.rainbow import RainbowSignature

try:
    from neatgames import _core
except ImportError:
    _core = None


def timed(fn, *args, repeat=1):
    t = time.perf_counter()
    for _ in range(repeat):
        out = fn(*args)
    return (time.perf_counter() - t) / repeat, out


def bench_canon():
    rng = random.Random(0)
    tables = [[rng.randrange(4) for _ in range(6 ** 3)] for _ in range(20)]
    rows = []
    for name, fn in (("python", py.canon_table), ("compiled", _core and _core.canon_table)):
        if fn is None:
            continue
        dt, _ = timed(lambda: [fn(t, 6, 3) for t in tables])
        rows.append((name, dt / len(tables)))
    return rows


def bench_theta(sig, copies):
    s = build_rainbow(sig, 10 ** 9)
    b = split_reds(s, copies)
    F, B = _scan_tables(s.palette), _scan_tables(b.palette)
    strip = [strip_colour(b.palette, s.palette, c) for c in range(b.palette.size)]
    rows = []
    for name, fn in (("python", py.theta_scan), ("compiled", _core and _core.theta_scan)):
        if fn is None:
            continue
        dt, out = timed(fn, F, B, strip, copies)
        rows.append((name, dt, out["image_total"]))
    return rows


def main():
    print("canon_table, 6 nodes, ternary, per table")
    for name, dt in bench_canon():
        print(f"  {name:9s} {dt * 1e3:9.2f} ms")
    small = RainbowSignature(n=3, tints=(1, 2), reds=(0, 1))
    for label, sig, copies in (("small rainbow, T=2", small, 2),
                               ("PEA_{4,3}, T=2", RainbowSignature.pea(3), 2)):
        print(f"theta_scan, {label}")
        for name, dt, total in bench_theta(sig, copies):
            print(f"  {name:9s} {dt:9.3f} s   images={total}")


if __name__ == "__main__":
    main()
