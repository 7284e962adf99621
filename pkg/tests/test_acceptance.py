"""Acceptance gate: one test per criterion, each printing a PASS/FAIL line.

Run with ``pytest tests/test_acceptance.py -v`` or ``python3 tests/test_acceptance.py``.
Tolerances are the stated ones; nothing here is loosened to make a line green.
"""

from __future__ import annotations

import subprocess
import sys
import time

import numpy as np
import pytest

from paralex.algebra import classification_check, killing_form, structure_constants
from paralex.connections import integrability, is_flat, linear_curvature, metric_field, nabla_tilde, pre_one_parameter_flow
from paralex.curvature import (
    CONVENTIONS,
    decomposition_report,
    identity_suite,
    primary_curvature,
    ricci_S,
    scalar_K,
)
from paralex.frame import canonical_metric, catalog_lookup, evaluate_frame, groupoid_arrow, sample_points

CATALOG = ["euclidean-3", "heisenberg3", "affine2", "quaternion3", "rotor2"]
FLAT = ["euclidean-3", "heisenberg3", "affine2", "quaternion3"]
NONABELIAN_FLAT = ["heisenberg3", "affine2", "quaternion3"]

# identity ids covered by criterion 5, with the criterion's tolerance
SUITE_IDS = {
    "primary_cyclic": 1e-7,
    "primary_last_pair_antisym": 1e-7,
    "ricci_commutator": 1e-5,
    "pair_exchange": 1e-7,
    "raised_antisym_frame": 1e-7,
    "trace_free": 1e-7,
    "ricci_symmetric": 1e-7,
    "torsion_quadratic_skew": 1e-7,
    "sectional_row_sums": 1e-7,
    "sectional_total": 1e-7,
}

_START = time.perf_counter()


def report(capsys, number: int, title: str, ok: bool, detail: str) -> None:
    line = f"[{'PASS' if ok else 'FAIL'}] criterion {number:>2}: {title} -- {detail}"
    with capsys.disabled():
        print("\n" + line)
    assert ok, line


def pts(name, count=20, seed=42):
    return sample_points(catalog_lookup(name), count, seed)


def crit1():
    worst = 0.0
    for name in CATALOG:
        p = catalog_lookup(name)
        for x, y, z in zip(pts(name, seed=1), pts(name, seed=2), pts(name, seed=3)):
            eye = np.eye(p.dim)
            exy = groupoid_arrow(p, x, y)
            worst = max(worst,
                        np.max(np.abs(groupoid_arrow(p, x, x) - eye)),
                        np.max(np.abs(groupoid_arrow(p, y, x) @ exy - eye)),
                        np.max(np.abs(groupoid_arrow(p, y, z) @ exy - groupoid_arrow(p, x, z))))
    return worst <= 1e-10, f"worst groupoid residual {worst:.2e} (tol 1e-10)"


def crit2():
    orth = par = 0.0
    for name in CATALOG:
        p = catalog_lookup(name)
        gfield, _ = metric_field(p)
        for x in pts(name):
            w = evaluate_frame(p, x).w
            g = canonical_metric(p, x)[0].entries
            orth = max(orth, np.max(np.abs(w.T @ g @ w - np.eye(p.dim))))
            par = max(par, nabla_tilde(p, gfield, x).norm_inf())  # finite differences of g
    ok = orth <= 1e-8 and par <= 1e-8
    return ok, f"orthonormality {orth:.2e}, frame-parallel derivative of g {par:.2e} (tol 1e-8)"


def crit3():
    flat = {name: is_flat(catalog_lookup(name), pts(name), tol=1e-6).max_residual for name in FLAT}
    rotor = linear_curvature(catalog_lookup("rotor2"), [0.5, 0.5]).norm_inf()
    ok = all(v <= 1e-6 for v in flat.values()) and rotor > 1e-3
    return ok, f"flat max {max(flat.values()):.2e} (tol 1e-6); rotor2 max |F| at (0.5,0.5) = {rotor:.3f} (> 1e-3)"


def crit4():
    res = {}
    for name in CATALOG:
        rep = identity_suite(catalog_lookup(name), pts(name))
        res[name] = next(r.residual for r in rep.records if r.id == "bianchi_first")
    worst = max(res.values())
    return worst <= 1e-5, f"worst first Bianchi residual {worst:.2e} (tol 1e-5) over {', '.join(res)}"


def crit5():
    failures = []
    worst = {}
    for name in NONABELIAN_FLAT:
        rep = identity_suite(catalog_lookup(name), pts(name))
        assert rep.flat
        for r in rep.records:
            if r.id in SUITE_IDS:
                worst[(name, r.id)] = r.residual
                if r.residual > SUITE_IDS[r.id]:
                    failures.append(f"{name}/{r.id}={r.residual:.3g}")
    if failures:
        return False, f"{len(failures)} of {len(worst)} checks above tolerance: {'; '.join(failures)}"
    return True, f"all {len(worst)} checks within tolerance (worst {max(worst.values()):.2e})"


def crit6():
    origin3 = np.zeros(3)
    h, a, q = (catalog_lookup(n) for n in NONABELIAN_FLAT)
    checks = {
        "heisenberg I^3_12": (integrability(h, [0.3, -0.2, 0.4]).entries[2, 0, 1], 1.0),
        "heisenberg |S|": (primary_curvature(h, [0.3, -0.2, 0.4]).S_up.norm_inf(), 0.0),
        "affine Ric(S)": (ricci_S(a, [0.2, -0.5]).entries, np.diag([1.0, 0.0])),
        "affine K": (scalar_K(a, [0.2, -0.5]), 1.0),
        "quaternion Killing": (killing_form(structure_constants(q, origin3, pts("quaternion3", 5))), -8 * np.eye(3)),
        "quaternion K at 0": (scalar_K(q, origin3), -24.0),
    }
    errs = {k: float(np.max(np.abs(np.asarray(v) - np.asarray(e)))) for k, (v, e) in checks.items()}
    bad = [k for k, e in errs.items() if e > 1e-6]
    return not bad, f"worst error {max(errs.values()):.2e} (tol 1e-6)" + (f"; off: {bad}" if bad else "")


def crit7():
    verdicts = {}
    for name in FLAT:
        chk = classification_check(catalog_lookup(name), pts(name))
        verdicts[name] = (chk.consistent, chk.classification.summary())
    ok = all(c for c, _ in verdicts.values())
    return ok, "; ".join(f"{n}: {s} ({'consistent' if c else 'INCONSISTENT'})" for n, (c, s) in verdicts.items())


def crit8():
    p = catalog_lookup("heisenberg3")
    worst = 0.0
    for v in [(1.0, 1.0, 0.0), (0.5, -0.7, 0.2), (-0.3, 0.4, -0.6)]:
        v1, v2, v3 = v
        end = pre_one_parameter_flow(p, np.zeros(3), v, 1.0, 1e-3).end
        worst = max(worst, np.max(np.abs(end - [v1, v2, v3 + v1 * v2 / 2])))
    return worst <= 1e-6, f"endpoint error {worst:.2e} (tol 1e-6)"


def crit9():
    e = decomposition_report(catalog_lookup("euclidean-3"), pts("euclidean-3", 5))
    worst_e = max(e.convention_residuals.values())
    h = decomposition_report(catalog_lookup("heisenberg3"), pts("heisenberg3", 5))
    diff, rlc = max(h.diff_norms), max(h.riemann_norms)
    ok = len(e.convention_residuals) == len(CONVENTIONS) and worst_e <= 1e-9 and diff <= 1e-6 and rlc >= 0.1
    return ok, (f"euclidean worst over {len(CONVENTIONS)} conventions {worst_e:.1e} (tol 1e-9); "
                f"heisenberg |F-S| {diff:.1e} (tol 1e-6), |R_LC| {rlc:.3f} (>= 0.1)")


def crit10():
    cmd = [sys.executable, "-m", "paralex", "check", "--frame", "quaternion3", "--samples", "20", "--seed", "7",
           "--json"]
    a = subprocess.run(cmd, capture_output=True, check=False)
    b = subprocess.run(cmd, capture_output=True, check=False)
    ok = a.returncode == 0 and a.stdout == b.stdout and len(a.stdout) > 0
    return ok, f"{len(a.stdout)} bytes, identical={a.stdout == b.stdout}, exit {a.returncode}"


CRITERIA = [
    (1, "groupoid laws", crit1),
    (2, "orthonormality and parallel metric", crit2),
    (3, "flatness of the catalog", crit3),
    (4, "first Bianchi identity on every frame", crit4),
    (5, "flat-frame identity suite", crit5),
    (6, "hand-derived catalog values", crit6),
    (7, "classification cross-checks", crit7),
    (8, "Heisenberg pre-1-parameter flow", crit8),
    (9, "decomposition report", crit9),
    (10, "deterministic check output", crit10),
]


@pytest.mark.parametrize("number,title,fn", CRITERIA, ids=[f"criterion_{n}" for n, _, _ in CRITERIA])
def test_criterion(capsys, number, title, fn):
    ok, detail = fn()
    report(capsys, number, title, ok, detail)


def test_total_runtime(capsys):
    elapsed = time.perf_counter() - _START
    line = f"[{'PASS' if elapsed < 60 else 'FAIL'}] runtime: all criteria in {elapsed:.1f} s (limit 60 s)"
    with capsys.disabled():
        print("\n" + line)
    assert elapsed < 60


if __name__ == "__main__":
    failed = 0
    for number, title, fn in CRITERIA:
        ok, detail = fn()
        print(f"[{'PASS' if ok else 'FAIL'}] criterion {number:>2}: {title} -- {detail}")
        failed += not ok
    print(f"runtime {time.perf_counter() - _START:.1f} s")
    sys.exit(1 if failed else 0)
