"""Acceptance suite: one test per criterion, each printing a PASS/FAIL line.

Run alone with ``pytest tests/test_acceptance.py -v`` (lines are printed
uncaptured) or as a script: ``python tests/test_acceptance.py``.
"""
import math
import time

import pytest

from higherindex import experiments as E

RESULTS = {}


def report(capsys, number, title, reps, elapsed, budget=None):
    checks = [c for r in reps for c in r.checks]
    ok = all(c.passed for c in checks) and (budget is None or elapsed <= budget)
    detail = "; ".join(f"{c.name}={c.value:.3g} (tol {c.tolerance:.3g})" for c in checks)
    timing = f"{elapsed:.1f}s" + (f" / budget {budget:.0f}s" if budget else "")
    line = f"[{'PASS' if ok else 'FAIL'}] criterion {number:2d} {title}: {detail}; {timing}"
    RESULTS[number] = line
    if capsys is not None:
        with capsys.disabled():
            print("\n" + line)
    else:
        print(line)
    return ok


def timed(fn):
    t = time.perf_counter()
    out = fn()
    return out, time.perf_counter() - t


def crit_1():
    reps, dt = timed(lambda: [E.cocycle_check_experiment("euclidean", 200, seed=1),
                              E.cocycle_check_experiment("hyperbolic", 200, seed=1)])
    assert reps[1].params["order"] >= 8
    return "cocycle identity", reps, dt, 30


def crit_2():
    reps, dt = timed(lambda: [E.area_bound_experiment(1000, 10.0, seed=2)])
    return "hyperbolic area bound", reps, dt, 60


def crit_3():
    reps, dt = timed(lambda: [E.growth_experiment("hyperbolic", 2, range(1, 11), 200, seed=3),
                              E.growth_experiment("euclidean", 2, range(1, 11), 200, seed=3)])
    return "polynomial growth", reps, dt, 60


def crit_4():
    reps, dt = timed(lambda: [E.vanest_experiment(points=5, seed=4)])
    return "van Est round trip", reps, dt, 120


def crit_5():
    reps, dt = timed(lambda: [E.cutoff_experiment(points=50, seed=5)])
    return "cut-off contract", reps, dt, None


def crit_6():
    reps, dt = timed(lambda: [E.cyclic_experiment(seed=6)])
    return "cyclic machinery", reps, dt, None


def crit_7():
    reps, dt = timed(lambda: [E.fourier_experiment(trios=10, box=64, seed=7)])
    return "Fourier identity", reps, dt, None


def crit_8():
    reps, dt = timed(lambda: [E.chern_experiment(seed=8, steps=20)])
    return "Chern pairing", reps, dt, None


def crit_9():
    reps, dt = timed(lambda: [E.morita_experiment(fixtures=10, seed=9)])
    degrees = {row[1] for row in reps[0].rows}
    assert degrees == {0, 2}
    return "Morita identity", reps, dt, None


def crit_10():
    reps, dt = timed(lambda: [E.fredholm_experiment(trials=50, max_dim=20, seed=10)])
    return "projector agreement", reps, dt, 10


def crit_11():
    reps, dt = timed(lambda: [E.index_experiment(Bs=(1.0, 2 * math.pi, 10.0))])
    return "index right-hand side", reps, dt, None


CRITERIA = [crit_1, crit_2, crit_3, crit_4, crit_5, crit_6, crit_7, crit_8, crit_9, crit_10, crit_11]


@pytest.mark.parametrize("number", range(1, 12))
def test_criterion(number, capsys):
    title, reps, dt, budget = CRITERIA[number - 1]()
    assert report(capsys, number, title, reps, dt, budget), RESULTS[number]


if __name__ == "__main__":
    ok = True
    for i, crit in enumerate(CRITERIA, 1):
        title, reps, dt, budget = crit()
        ok &= report(None, i, title, reps, dt, budget)
    raise SystemExit(0 if ok else 1)
