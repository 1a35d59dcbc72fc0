"""Smoke test for the pyhomlab extension module.

Build and place the module next to this script first:

    cargo build --release -p homlab-py
    cp target/release/libpyhomlab.so python/pyhomlab.so
"""

import json
import math
import os
import sys
import tempfile

sys.path.insert(0, os.path.dirname(os.path.abspath(__file__)))

import pyhomlab as h


def check(cond, msg):
    if not cond:
        raise SystemExit(f"FAIL: {msg}")
    print(f"ok   {msg}")


def main():
    grid = h.Grid(2, 32)
    check(grid.sites == 1024, "grid has L^d sites")
    try:
        h.Grid(2, 12)
        check(False, "non power-of-two side is rejected")
    except ValueError:
        check(True, "non power-of-two side is rejected")

    ens = h.Ensemble("bernoulli", lam=0.25, p=0.5)
    a = ens.sample(grid, seed=7, index=3)
    b = ens.sample(grid, seed=7, index=3)
    check(a.planes == b.planes, "sampling is a pure function of (seed, index)")
    check(all(0.25 <= c <= 1.0 for p in a.planes for c in p), "conductances lie in [lambda, 1]")

    c = h.corrector(a, 64.0, direction=0, tolerance=1e-10)
    check(c.helmholtz_residual <= 1e-7, f"helmholtz residual {c.helmholtz_residual:.1e}")
    check(abs(sum(c.phi)) / grid.sites <= 1e-10, "massive corrector has zero mean")

    m = h.a_ht(a, 64.0)
    check(abs(m[0][1] - m[1][0]) <= 1e-8, "a_hT is symmetric")
    check(all(0.25 - 1e-9 <= m[i][i] <= 1.0 for i in range(2)), "a_hT diagonal within ellipticity bounds")

    flat = h.Coefficients.constant(grid, 0.6)
    zero = h.corrector(flat, float("inf"))
    check(max(abs(v) for v in zero.phi) == 0.0, "constant medium has zero corrector")

    rhs = [math.sin(2 * math.pi * grid.coords(s)[0] / 32) for s in range(grid.sites)]
    u = h.fft_poisson(grid, 0.5, rhs)
    sym = 0.5 + 4 * math.sin(math.pi / 32) ** 2
    check(max(abs(x * sym - y) for x, y in zip(u, rhs)) <= 1e-12, "FFT Poisson inverts a Fourier mode")

    gsq = h.gradient(grid, rhs)
    div = h.divergence(grid, gsq)
    check(abs(sum(div)) <= 1e-10, "divergence of a gradient has zero mean")

    times, energy = h.semigroup_decay(a, 64.0)
    check(all(x > y for x, y in zip(energy, energy[1:])), "semigroup energy decreases")

    check("E3-semigroup-decay" in h.experiment_names(), "experiment names listed")
    with tempfile.TemporaryDirectory() as out:
        passed, report, run_dir = h.run_preset("E3", 2, 64, out, samples=30)
        r = json.loads(report)
        check(r["spec"]["samples"] == 30 and os.path.isfile(os.path.join(run_dir, "report.json")),
              f"E3 preset ran (passed={passed})")
    print("smoke test passed")


if __name__ == "__main__":
    main()
