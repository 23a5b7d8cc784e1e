"""Acceptance gate: one test per criterion, each printing a PASS/FAIL line.

Run with ``pytest tests/test_acceptance.py -s`` to see the lines.
"""

import filecmp
import subprocess
import sys
import time

import numpy as np
import pytest

from rigidspec.rigidity import default_test_vector, rigidity_deficit, theorem_family
from rigidspec.spectrum import (
    Kind,
    annulus_scan,
    classify,
    inverse_spectrum_annulus,
    roots_of_unity_family,
    unit_circle_contact,
)
from rigidspec.suites import (
    scan_grid,
    suite_finite_rigidity,
    suite_family_norms,
    suite_power_norms,
    suite_psi_identity,
    suite_resolvent_profile,
    suite_root_eigenvalues,
    suite_spectral_radius,
    suite_uniform_box,
)

SEED = 20240601
RADII = (0.0, 0.25, 0.5, 0.75)


def report(number, title, ok, elapsed, limit, detail=""):
    ok = ok and elapsed < limit
    line = f"[acceptance {number}] {'PASS' if ok else 'FAIL'}  {title}  ({elapsed:.2f}s < {limit}s)"
    if detail:
        line += f"  {detail}"
    print(line)
    return ok


@pytest.fixture(scope="module")
def estimates():
    grid = scan_grid(0.05, 1.5, 0.05)
    out = {}
    start = time.perf_counter()
    for r in RADII:
        out[r] = annulus_scan(theorem_family(r, 30), grid)
    return out, time.perf_counter() - start


def test_1_formula_vs_oracle():
    rng = np.random.default_rng([SEED, 1])
    t = time.perf_counter()
    results = [suite_power_norms(rng, 200), suite_psi_identity(rng, 200), suite_root_eigenvalues(rng, 200)]
    elapsed = time.perf_counter() - t
    detail = "; ".join(f"{r.name} {r.trials - len(r.failures)}/{r.trials}" for r in results)
    assert report(1, "closed-form powers, psi identity, root eigenvalues on 200 blocks",
                  all(r.passed for r in results), elapsed, 60, detail)


def test_2_block_operator():
    rng = np.random.default_rng([SEED, 2])
    t = time.perf_counter()
    results = [suite_family_norms(rng, 50), suite_resolvent_profile(rng, 50)]
    elapsed = time.perf_counter() - t
    detail = "; ".join(f"{r.name} {r.trials - len(r.failures)}/{r.trials}" for r in results)
    assert report(2, "family norms, inverse norms, per-block resolvents on 50 families",
                  all(r.passed for r in results), elapsed, 30, detail)


def test_3_annulus_reproduction(estimates):
    est, scan_time = estimates
    t = time.perf_counter()
    rows = []
    ok = True
    for r in RADII:
        e = est[r]
        good = abs(e.r_inner - r) <= 0.05 and abs(e.r_outer - 1.0) <= 0.05
        ok &= good
        rows.append(f"r={r}: [{e.r_inner:.3f}, {e.r_outer:.3f}]")
    zero = classify(theorem_family(0.0, 30), 0.0).kind
    ok &= zero is Kind.IN_SPECTRUM
    lo, hi = inverse_spectrum_annulus(est[0.5])
    # the +-0.05 radius tolerance mapped through z -> 1/z
    ok &= 1 / 1.05 <= lo <= 1 / 0.95 and 1 / 0.55 <= hi <= 1 / 0.45 and hi > 1.0
    elapsed = scan_time + time.perf_counter() - t
    rows.append(f"lambda=0 at r=0: {zero.value}; inverse annulus ({lo:.3f}, {hi:.3f})")
    assert report(3, "annulus radii within 0.05, r=0 not invertible, inverse leaves the unit disc",
                  ok, elapsed, 120, "; ".join(rows))


def test_4_diagonal_roots():
    t = time.perf_counter()
    f = roots_of_unity_family(500)
    at_05 = classify(f, 0.5 * np.exp(1j * 2 * np.pi * 0.618)).kind
    at_09 = classify(f, 0.9 * np.exp(1j * 2 * np.pi * 0.618)).kind
    est = annulus_scan(f, scan_grid(0.05, 1.5, 0.05))
    at_1 = {s.kind for s in est.samples if abs(s.rho - 1.0) < 1e-9}
    elapsed = time.perf_counter() - t
    ok = at_05 is at_09 is Kind.RESOLVENT and at_1 == {Kind.POINT} and est.r_inner >= 0.95
    assert report(4, "roots-of-unity diagonal: 0.5, 0.9 resolvent, 1 point spectrum, r_inner >= 0.95",
                  ok, elapsed, 10, f"0.5: {at_05.value}; 0.9: {at_09.value}; r_inner {est.r_inner:.3f}")


def test_5_rigidity():
    t = time.perf_counter()
    f = theorem_family(0.5, 7)
    y = default_test_vector(f)
    reps = [rigidity_deficit(f, y, ell) for ell in range(2, 7)]
    d = [rep.deficit for rep in reps]
    ok = all(b < a for a, b in zip(d, d[1:]))
    ok &= all(rep.deficit**2 <= rep.analytic_bound * (1 + 1e-6) for rep in reps)
    ok &= d[-1] < d[0] / 2
    elapsed = time.perf_counter() - t
    assert report(5, "deficits of u**(ell!) decrease, stay under the bound, halve by ell=6",
                  ok, elapsed, 60, "deficits " + ", ".join(f"{x:.4f}" for x in d))


def test_6_finite_rigidity():
    rng = np.random.default_rng([SEED, 6])
    t = time.perf_counter()
    res = suite_finite_rigidity(rng, 100)
    elapsed = time.perf_counter() - t
    assert report(6, "100 rigid and 100 non-rigid matrices classified correctly",
                  res.passed, elapsed, 60, f"{len(res.failures)} misclassified")


def test_7_power_bound_suites():
    rng = np.random.default_rng([SEED, 7])
    t = time.perf_counter()
    box = suite_uniform_box(rng, 500)
    radius = suite_spectral_radius(rng, 500)
    elapsed = time.perf_counter() - t
    detail = f"box {len(box.failures)} failures; radius {len(radius.failures)} failures"
    assert report(7, "uniform-rigidity box and spectral-radius bound on 500 cases each",
                  box.passed and radius.passed, elapsed, 60, detail)


def test_8_unit_circle_contact(estimates):
    est, _ = estimates
    t = time.perf_counter()
    ok = all(unit_circle_contact(e) for e in est.values())
    elapsed = time.perf_counter() - t
    assert report(8, "every scanned annulus meets the unit circle", ok, elapsed, 1)


def _cli(*args, cwd=None):
    return subprocess.run([sys.executable, "-m", "rigidspec", *args], capture_output=True,
                          text=True, cwd=cwd, check=False)


def test_9_determinism(tmp_path):
    t = time.perf_counter()
    a = _cli("verify", "--seed", "42")
    b = _cli("verify", "--seed", "42", "--threads", "4")
    same_report = a.returncode == b.returncode == 0 and a.stdout == b.stdout
    for name in ("one", "two"):
        assert _cli("spectrum", "--r", "0.5", "--out-dir", str(tmp_path / name)).returncode == 0
    same_files = all(filecmp.cmp(tmp_path / "one" / f, tmp_path / "two" / f, shallow=False)
                     for f in ("annulus.json", "profile.csv"))
    elapsed = time.perf_counter() - t
    assert report(9, "verify --seed 42 repeats exactly; spectrum files byte-identical",
                  same_report and same_files, elapsed, 120)
