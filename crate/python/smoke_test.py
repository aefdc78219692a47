#!/usr/bin/env python3
"""Smoke test for the hardyk_py extension module.

Build and stage the module first:

    cargo build --release -p hardyk-py
    cp target/release/libhardyk_py.so python/hardyk_py.so

then run:  python3 python/smoke_test.py
"""
import math
import pathlib
import sys

sys.path.insert(0, str(pathlib.Path(__file__).resolve().parent))

import hardyk_py as hk

# --- geometry ---------------------------------------------------------
assert hk.box_area(1.0) == 0.5
assert abs(hk.box_area(0.5) - 0.1875) < 1e-15
assert hk.box_area(2.0) == 1.0

# --- kernel -----------------------------------------------------------
assert hk.kernel(2.0, 0j, 0j) == 1 + 0j
z, lam = 0.5 + 0.25j, -0.3 + 0.6j
k1 = hk.kernel(1.0, z, lam)
k2 = hk.kernel(1.0, lam, z)
assert abs(k1 - k2.conjugate()) < 1e-14, "Hermitian symmetry"
assert hk.dyadic_kernel(1.0, z, lam, 12) >= abs(k1), "dyadic majorant dominates"

# --- covering ---------------------------------------------------------
start, length = 0.3, 0.2
js, jl = hk.cover(start, length)
assert jl <= 6.0 * length + 1e-12, f"cover too long: {jl}"
off = (start - js) % (2 * math.pi)
assert off + length <= jl + 1e-12, "cover must contain the arc"

# --- weight algebra ---------------------------------------------------
w = hk.Weight("radial:t=0.5")
assert abs(w.eval(0.5, 1.0) - math.sqrt(0.5)) < 1e-15
sigma = w.dual(2.0)
assert abs(sigma.eval(0.5, 1.0) - 1.0 / math.sqrt(0.5)) < 1e-15
assert str(sigma.dual(2.0)) == str(w), "dual is an involution at p = 2"
prod = hk.Weight("const:2*point:theta=0,s=1")
assert abs(prod.eval(0.0, 0.0) - 2.0) < 1e-15  # |0 - 1| = 1, times 2

bad = False
try:
    hk.Weight("radial:t=-1.5")  # not integrable
except ValueError:
    bad = True
assert bad, "inadmissible weight must raise"

# --- grid -------------------------------------------------------------
g = hk.Grid(5)
assert len(g) == 48 + 2 ** 10
r, theta, area = g.cell(0)
assert 0.0 < r < 1.0 and 0.0 <= theta < 2 * math.pi and area > 0.0
assert g.locate(r, theta) == 0

# --- characteristic ---------------------------------------------------
leb = hk.characteristic(hk.Weight("const:1"), 2.0, 1.0, j_max=8, rotations=2, depth=4)
assert leb["flag"] == "finite"
assert abs(leb["value"] - 1.0) < 1e-9, leb["value"]

div = hk.characteristic(hk.Weight("const:1"), 2.0, 3.0, j_max=10, rotations=2, depth=4)
assert div["flag"] == "divergent"
assert math.isinf(div["value"])

# --- operator norm ----------------------------------------------------
nrm = hk.norm_estimate(2.0, hk.Weight("const:1"), depth=5, tol=1e-4, max_iter=200)
assert nrm["converged"]
assert 0.85 <= nrm["estimate"] <= 1.05, nrm["estimate"]

# --- embedding, domination, necessity ---------------------------------
ratio = hk.embedding_ratio(hk.Weight("radial:t=-0.5"), p=2.0, depth=4, j_max=8, seed=1)
assert 0.0 < ratio < 100.0

dom = hk.domination(1.0, samples=50_000, j_max=12)
assert dom["stable"] and math.isfinite(dom["sup_ratio"])

nec = hk.necessity(1.0, theta=0.01, samples=20_000)
assert nec["all_slacks_nonnegative"] and nec["bound_holds"]

print("smoke test ok:", hk.__name__, "-", len(g), "cells, norm", round(nrm["estimate"], 4))
