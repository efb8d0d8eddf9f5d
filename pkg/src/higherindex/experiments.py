"""Verification experiments shared by the command line and the acceptance suite.

Each experiment takes plain keyword parameters, is deterministic for a fixed
seed, and returns a ``Report`` holding results, per-assertion checks and
optional CSV rows.
"""
from __future__ import annotations

import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Any, Callable, Dict, List, Sequence

import numpy as np

from . import conv, cyclic, fredholm, groupcoh, index, kernels, oracles, proper, simplex
from .geom import Euclidean, HyperbolicPlane, SymmetricSpaceModel, volume_form

WORKERS_ENV = "HIGHERINDEX_WORKERS"


def worker_count() -> int:
    raw = os.environ.get(WORKERS_ENV, "").strip()
    if not raw:
        return os.cpu_count() or 1
    n = int(raw)
    if n < 1:
        raise ValueError(f"{WORKERS_ENV} must be a positive integer")
    return n


def parallel_map(fn: Callable, items: Sequence) -> list:
    """Order-preserving map over a thread pool sized by HIGHERINDEX_WORKERS."""
    items = list(items)
    workers = min(worker_count(), max(1, len(items)))
    if workers == 1:
        return [fn(x) for x in items]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, items))


@dataclass
class Check:
    name: str
    passed: bool
    value: float
    tolerance: float
    detail: str = ""

    def as_dict(self) -> dict:
        return {"name": self.name, "passed": bool(self.passed), "value": float(self.value),
                "tolerance": float(self.tolerance), "detail": self.detail}


@dataclass
class Report:
    experiment: str
    params: Dict[str, Any]
    results: Dict[str, Any] = field(default_factory=dict)
    checks: List[Check] = field(default_factory=list)
    columns: List[str] = field(default_factory=list)
    rows: List[list] = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)

    def check(self, name: str, value: float, tolerance: float, passed: bool = None, detail: str = ""):
        ok = (abs(value) <= tolerance) if passed is None else passed
        self.checks.append(Check(name, bool(ok), float(value), float(tolerance), detail))
        return ok

    @property
    def tolerances(self) -> Dict[str, float]:
        return {c.name: c.tolerance for c in self.checks}


def model_from_name(name: str, n: int = 2) -> SymmetricSpaceModel:
    if name == "euclidean":
        return Euclidean(n)
    if name == "hyperbolic":
        return HyperbolicPlane()
    raise ValueError(f"unknown model {name!r}")


def _random_elements(model, rng, radius, count, size):
    return [model.random_element(rng, rng.uniform(0.0, radius, size)) for _ in range(count)]


# -- geometry / group cohomology -------------------------------------------

def simplex_volume_experiment(model: str = "hyperbolic", samples: int = 50, radius: float = 5.0,
                              order: int = 120, seed: int = 0, tol: float = 1e-6) -> Report:
    rep = Report("simplex-volume", dict(model=model, samples=samples, radius=radius, order=order, seed=seed))
    m = model_from_name(model)
    rng = np.random.default_rng(seed)
    gs = _random_elements(m, rng, radius, 3, samples)
    pts = [m.orbit_point(g) for g in gs]
    q = simplex.QuadratureRule(2, order)
    vals = simplex.integrate_form_points(volume_form(m), pts, q)
    ref = oracles.shoelace_area(*pts) if m.is_euclidean else oracles.gauss_bonnet_area(*pts)
    err = float(np.max(np.abs(vals - ref)))
    rep.results.update(max_abs_error=err, max_volume=float(np.max(np.abs(vals))))
    rep.columns = ["index", "volume", "oracle"]
    rep.rows = [[i, float(v), float(r)] for i, (v, r) in enumerate(zip(vals, ref))]
    rep.check("volume_vs_oracle", err, tol)
    return rep


def cocycle_check_experiment(model: str = "euclidean", samples: int = 200, radius: float = 5.0,
                             order: int = None, seed: int = 0, tol: float = None) -> Report:
    """|delta J(area)| at random 4-tuples."""
    m = model_from_name(model)
    order = order or (1 if m.is_euclidean else 120)
    tol = tol if tol is not None else (1e-9 if m.is_euclidean else 1e-6)
    rep = Report("cocycle-check", dict(model=model, samples=samples, radius=radius, order=order, seed=seed))
    c = groupcoh.area_cocycle(m, order)
    rng = np.random.default_rng(seed)
    gs = _random_elements(m, rng, radius, 4, samples)
    vals = np.abs(np.asarray(groupcoh.delta(c)(*gs)))
    rep.results.update(max_abs_delta=float(vals.max()), quadrature_order=order)
    rep.check("delta_J_area", float(vals.max()), tol)
    return rep


def area_bound_experiment(samples: int = 1000, radius: float = 10.0, order: int = 120, seed: int = 0,
                          tol: float = 1e-6) -> Report:
    """Hyperbolic J(area) below pi and equal to the Gauss-Bonnet area."""
    rep = Report("cocycle-eval", dict(samples=samples, radius=radius, order=order, seed=seed))
    m = HyperbolicPlane()
    c = groupcoh.area_cocycle(m, order)
    rng = np.random.default_rng(seed)
    gs = _random_elements(m, rng, radius, 3, samples)
    vals = np.asarray(c(*gs))
    ref = oracles.gauss_bonnet_area(*[m.orbit_point(g) for g in gs])
    err = float(np.max(np.abs(vals - ref)))
    rep.results.update(max_abs_J=float(np.max(np.abs(vals))), max_abs_error=err)
    rep.columns = ["index", "J", "gauss_bonnet"]
    rep.rows = [[i, float(v), float(r)] for i, (v, r) in enumerate(zip(vals, ref))]
    rep.check("max_abs_J_below_pi", float(np.max(np.abs(vals))), math.pi,
              passed=bool(np.all(np.abs(vals) < math.pi)))
    rep.check("gauss_bonnet_agreement", err, tol)
    return rep


def growth_experiment(model: str = "hyperbolic", degree: int = 2, radii: Sequence[float] = tuple(range(1, 11)),
                      samples: int = 200, seed: int = 0, order: int = None,
                      exponent_bound: float = 2.05, ratio_factor: float = 2.0) -> Report:
    m = model_from_name(model)
    if degree != 2:
        raise ValueError("growth profiles are implemented for the degree-2 area cocycle")
    c = groupcoh.area_cocycle(m, order)
    rep = Report("growth-profile", dict(model=model, degree=degree, radii=[float(r) for r in radii],
                                        samples=samples, seed=seed, order=order))
    g = groupcoh.growth_profile(c, radii, samples, seed)
    rep.results.update(exponent=g.exponent, bounded=g.bounded(ratio_factor),
                       max_abs=float(np.max(g.max_abs)), median_ratio=float(np.median(g.max_ratio)),
                       last_ratio=float(g.max_ratio[-1]))
    rep.columns = ["radius", "max_abs", "max_ratio"]
    rep.rows = [[r["radius"], r["max_abs"], r["max_ratio"]] for r in g.rows()]
    if m.is_euclidean:
        rep.check("fitted_exponent", g.exponent, exponent_bound, passed=g.exponent <= exponent_bound)
    else:
        rep.check("ratio_bounded", float(g.max_ratio[-1] / np.median(g.max_ratio)), ratio_factor,
                  passed=g.bounded(ratio_factor))
        rep.check("max_abs_below_pi", float(np.max(g.max_abs)), math.pi,
                  passed=bool(np.max(g.max_abs) < math.pi))
    return rep


def vanest_experiment(points: int = 5, eps: float = 0.5, points_per_axis: int = 7, seed: int = 0,
                      tol: float = 5e-3) -> Report:
    """Phi^chi(J(dx ^ dy)) on the standard frame of R^2."""
    rep = Report("vanest-roundtrip", dict(points=points, eps=eps, points_per_axis=points_per_axis, seed=seed))
    m = Euclidean(2)
    c = groupcoh.area_cocycle(m)
    chi = proper.cutoff_family(eps, proper.ProperActionData.point_slice(2))
    rng = np.random.default_rng(seed)
    xs = rng.uniform(-3.0, 3.0, (points, 2))
    frame = [np.array([1.0, 0.0]), np.array([0.0, 1.0])]
    vals = [groupcoh.vanest_form(c, chi, x, frame, points_per_axis=points_per_axis) for x in xs]
    err = float(np.max(np.abs(np.asarray(vals) - 1.0)))
    rep.results.update(values=[float(v) for v in vals], max_abs_error=err)
    rep.columns = ["x", "y", "omega"]
    rep.rows = [[float(x[0]), float(x[1]), float(v)] for x, v in zip(xs, vals)]
    rep.check("vanest_roundtrip", err, tol)
    return rep


def cutoff_experiment(points: int = 50, seed: int = 0, norm_tol: float = 1e-6, indep_tol: float = 2e-6,
                      epsilons: Sequence[float] = (0.4, 0.2, 0.1), min_order: float = 0.9) -> Report:
    """Normalization, cut-off independence and the epsilon limit of chi_eps."""
    rep = Report("cutoff-contract", dict(points=points, seed=seed, epsilons=list(epsilons)))
    rng = np.random.default_rng(seed)
    weights = np.array([0.5, 0.3, 0.2])
    act = proper.ProperActionData(2, weights, 0.5)
    chi_a = proper.cutoff_family(0.8, act)
    chi_b = proper.make_cutoff(proper.bump_function(1.3, center=[0.3, -0.2]), act, 1.3 + 0.37)
    xs = rng.uniform(-4.0, 4.0, (points, 2))
    sl = rng.integers(0, len(weights), points)
    defect = max(proper.normalization_defect(chi_a, xs, sl), proper.normalization_defect(chi_b, xs, sl))
    rep.check("normalization", defect, norm_tol)
    lat = proper.cutoff_family(0.8, act, normalizer="lattice")
    rep.check("lattice_normalization", proper.normalization_defect(lat, xs, sl), norm_tol)

    density = lambda y, s: (1.0 + np.asarray(s, dtype=float)) * np.ones(np.shape(y)[:-1])
    ia, ib = proper.invariant_integral(density, chi_a), proper.invariant_integral(density, chi_b)
    exact = float(np.sum(weights * (1.0 + np.arange(len(weights)))))
    rep.results.update(invariant_integrals=[ia, ib], invariant_exact=exact)
    rep.check("cutoff_independence", abs(ia - ib), indep_tol)
    rep.check("fundamental_domain_volume",
              abs(proper.invariant_integral(lambda y, s: np.ones(np.shape(y)[:-1]),
                                            proper.cutoff_family(0.8, proper.ProperActionData.point_slice(2))) - 1.0),
              norm_tol)

    def f(y, s):
        y = np.asarray(y, dtype=float)
        return (1.0 + 0.5 * np.asarray(s)) * np.exp(-np.sum((y - [0.3, -0.1]) ** 2, axis=-1)) * np.cos(y[..., 0])
    limit = float(np.sum(weights * f(np.zeros((len(weights), 2)), np.arange(len(weights)))))
    errs = []
    for e in epsilons:
        chi = proper.cutoff_family(e, act)
        errs.append(abs(proper.integrate_with_cutoff(chi, f) - limit))
    orders = [math.log(errs[i] / errs[i + 1]) / math.log(epsilons[i] / epsilons[i + 1])
              for i in range(len(errs) - 1)]
    rep.results.update(eps_errors=errs, observed_orders=orders)
    rep.columns = ["epsilon", "error"]
    rep.rows = [[float(e), float(v)] for e, v in zip(epsilons, errs)]
    rep.check("eps_limit_order", min(orders), min_order, passed=min(orders) >= min_order)
    return rep


# -- algebra ---------------------------------------------------------------

def cyclic_experiment(seed: int = 0, bicomplex_tol: float = 1e-9, b_tol: float = 1e-8,
                      cyc_tol: float = 1e-10, samples: int = 5) -> Report:
    rep = Report("conv-pairing:cyclic", dict(seed=seed, samples=samples))
    rng = np.random.default_rng(seed)
    alg = cyclic.MatrixAlgebra(2)
    worst = {"b2": 0.0, "B2": 0.0, "bB+Bb": 0.0}
    for _ in range(samples):
        for k in (1, 2, 3):
            tau = cyclic.random_reduced_cochain(alg, k, rng)
            bb = cyclic.hochschild_b(cyclic.hochschild_b(tau))
            worst["b2"] = max(worst["b2"], abs(bb(*[alg.random(rng) for _ in range(k + 3)])))
            if k >= 2:
                BB = cyclic.connes_B(cyclic.connes_B(tau))
                worst["B2"] = max(worst["B2"], abs(BB(*[alg.random(rng) for _ in range(k - 1)])))
            args = [alg.random(rng) for _ in range(k + 1)]
            v = (cyclic.hochschild_b(cyclic.connes_B(tau))(*args) + cyclic.connes_B(cyclic.hochschild_b(tau))(*args))
            worst["bB+Bb"] = max(worst["bB+Bb"], abs(v))
    for name, v in worst.items():
        rep.check(name, v, bicomplex_tol)
    group = conv.LatticeGroup(2, 0.5, 8)
    lalg = cyclic.LatticeAlgebra(group, 2)
    c = groupcoh.cyclic_symmetrize(groupcoh.area_cocycle(Euclidean(2)))
    tau = cyclic.lattice_cochain(c, lalg)
    btau = cyclic.hochschild_b(tau)
    bmax = max(abs(btau(*[lalg.random(rng) for _ in range(4)])) for _ in range(samples))
    rep.check("b_tau_G", bmax, b_tol)
    rep.check("cyclicity_tau_G", tau.cyclicity_defect(rng, samples), cyc_tol)
    rep.results.update({k: float(v) for k, v in worst.items()}, b_tau_G=bmax)
    return rep


def chern_experiment(seed: int = 0, int_tol: float = 1e-9, drift_tol: float = 1e-6, steps: int = 20) -> Report:
    rep = Report("conv-pairing:chern", dict(seed=seed, steps=steps))
    rng = np.random.default_rng(seed)
    rows = []
    worst_int = 0.0
    for trial in range(10):
        d = int(rng.integers(2, 6))
        size = int(rng.integers(1, 4))
        alg = cyclic.MatrixAlgebra(d)
        tr = cyclic.trace_cochain(alg)
        q, _ = np.linalg.qr(rng.standard_normal((d * size, d * size)))
        r = int(rng.integers(0, d * size + 1))
        P = q[:, :r] @ q[:, :r].T
        entries = [[P[i * d:(i + 1) * d, j * d:(j + 1) * d] for j in range(size)] for i in range(size)]
        p = cyclic.Idempotent(cyclic.algebra_matrix(alg, entries))
        val = cyclic.chern_pairing(p, cyclic.Idempotent.zero(alg, size), tr)
        worst_int = max(worst_int, abs(val - round(val)), abs(val - r))
        rows.append(["trace", trial, float(val), r])
    rep.check("degree0_integrality", worst_int, int_tol)

    # degree 0 along a Newton-re-idempotented perturbation path
    alg = cyclic.MatrixAlgebra(3)
    tr = cyclic.trace_cochain(alg)
    q, _ = np.linalg.qr(rng.standard_normal((3, 3)))
    base = cyclic.Idempotent(cyclic.algebra_matrix(alg, [[q[:, :2] @ q[:, :2].T]]))
    pert = cyclic.algebra_matrix(alg, [[0.05 * rng.standard_normal((3, 3))]])
    path = cyclic.idempotent_from_projection_path("perturbed", alg, steps, base=base, perturbation=pert)
    vals0, drift0 = cyclic.pairing_drift(path, tr)

    # degree 2 along a conjugation path over the lattice algebra
    group = conv.LatticeGroup(2, 0.5, 8)
    lalg = cyclic.LatticeAlgebra(group, 1)
    c = groupcoh.cyclic_symmetrize(groupcoh.area_cocycle(Euclidean(2)))
    tau = cyclic.lattice_cochain(c, lalg)
    one = cyclic.scalar_matrix(lalg, np.eye(2))
    Y = cyclic.algebra_matrix(lalg, [[None, None], [lalg.random(rng), None]])
    X = cyclic.algebra_matrix(lalg, [[None, lalg.random(rng)], [None, None]])
    p1 = cyclic.Idempotent((one + Y) @ cyclic.scalar_matrix(lalg, np.diag([1.0, 0.0])) @ (one - Y))
    path2 = cyclic.idempotent_from_projection_path("conjugation", lalg, steps, base=p1, nilpotent=X)
    vals2, drift2 = cyclic.pairing_drift(path2, tau)
    rep.check("drift_degree0_newton_path", drift0, drift_tol)
    rep.check("drift_degree2_conjugation_path", drift2, drift_tol)
    for i, (a, b) in enumerate(zip(vals0, vals2)):
        rows.append(["path", i, float(a), float(b)])
    rep.columns = ["kind", "index", "value", "reference"]
    rep.rows = rows
    rep.results.update(max_integrality_defect=worst_int, drift_degree0=drift0, drift_degree2=drift2)
    return rep


def fourier_experiment(trios: int = 10, box: int = 64, spacing: float = 0.25, seed: int = 0,
                       rel_tol: float = 1e-2) -> Report:
    rep = Report("fourier-check", dict(trios=trios, box=box, spacing=spacing, seed=seed))
    group = conv.LatticeGroup(2, spacing, box // 2)
    rng = np.random.default_rng(seed)
    worst = 0.0
    for i in range(trios):
        els = []
        for _ in range(3):
            a = rng.standard_normal((2, 2))
            cov = a @ a.T * 0.3 + 0.3 * np.eye(2)
            els.append(group.gaussian(rng.uniform(-1.5, 1.5, 2), cov, mass=rng.uniform(0.5, 2.0)))
        lat, spectral = conv.fourier_check(*els)
        rel = abs(lat - spectral) / max(abs(lat), abs(spectral), 1e-300)
        worst = max(worst, rel)
        rep.rows.append([i, lat, spectral, rel])
    rep.columns = ["trio", "lattice", "spectral", "relative_error"]
    rep.results.update(max_relative_error=worst)
    rep.check("fourier_identity", worst, rel_tol)
    return rep


def morita_experiment(fixtures: int = 10, box: int = 6, slice_size: int = 3, seed: int = 0,
                      tol: float = 1e-8) -> Report:
    """Morita identity on simple-tensor idempotents over the periodic lattice."""
    rep = Report("morita-check", dict(fixtures=fixtures, box=box, slice=slice_size, seed=seed))
    rng = np.random.default_rng(seed)
    group = conv.LatticeGroup(2, 0.5, max(1, box // 2), periodic=True)
    c0 = groupcoh.constant_cochain(Euclidean(2))
    c2 = groupcoh.cyclic_symmetrize(groupcoh.area_cocycle(Euclidean(2)))
    worst = 0.0
    pairs = []
    for i in range(fixtures):
        weights = rng.uniform(0.5, 1.5, slice_size)
        act = proper.ProperActionData(2, weights, group.spacing)
        chi = proper.cutoff_family(group.spacing * rng.uniform(0.3, 0.9), act, normalizer="lattice")
        rank = int(rng.integers(1, slice_size + 1))
        e2 = kernels.projection_kernel(kernels.random_projection(slice_size, rank, rng), weights)
        if i % 3 == 2:
            mask = (rng.uniform(size=group.shape) < 0.4).astype(float)
            e1 = conv.from_symbol(group, mask, real=False)
        else:
            e1 = kernels.bundle_idempotent(group, rng)
        c = c0 if i % 2 == 0 else c2
        lhs, rhs = kernels.morita_check(e1, e2, c, chi, weights)
        diff = abs(lhs - rhs)
        pairs.append({"degree": c.degree, "kernel_side": lhs, "group_side": rhs})
        worst = max(worst, diff)
        rep.rows.append([i, c.degree, rank, lhs.real, lhs.imag, rhs.real, rhs.imag, diff])
    rep.columns = ["fixture", "degree", "rank_e2", "lhs_re", "lhs_im", "rhs_re", "rhs_im", "abs_diff"]
    rep.results.update(max_abs_difference=worst, pairings=pairs)
    rep.check("morita_identity", worst, tol)
    return rep


# -- Fredholm and index ----------------------------------------------------

def fredholm_experiment(trials: int = 50, max_dim: int = 20, seed: int = 0, p: int = None, q: int = None,
                        ms_tol: float = 1e-9, ts: Sequence[float] = (0.1, 1.0, 10.0)) -> Report:
    rep = Report("fredholm-demo", dict(trials=trials, max_dim=max_dim, seed=seed, p=p, q=q, ts=list(ts)))
    rng = np.random.default_rng(seed)
    cases = []
    for _ in range(trials):
        pp = p or int(rng.integers(1, max_dim + 1))
        qq = q or int(rng.integers(1, max_dim + 1))
        rank = None if rng.uniform() < 0.5 else int(rng.integers(0, min(pp, qq) + 1))
        cases.append(fredholm.GradedDirac.random(rng, pp, qq, rank, scale=float(rng.uniform(0.3, 2.0))))

    def one(D):
        idx = oracles.fredholm_index_svd(D.dplus)
        pairs = {k: fredholm.trace_pairing(P) for k, P in fredholm.all_projectors(D).items()}
        ms = max(abs(fredholm.mckean_singer(D, t) - idx) for t in ts)
        return D.p, D.q, idx, pairs, ms

    mismatches = 0
    ms_worst = 0.0
    for pp, qq, idx, pairs, ms in parallel_map(one, cases):
        ok = all(round(v) == idx for v in pairs.values())
        mismatches += 0 if ok else 1
        ms_worst = max(ms_worst, ms)
        rep.rows.append([pp, qq, idx, pairs["CS"], pairs["CM"], pairs["Graph"], pairs["MW"], ms])
    rep.columns = ["p", "q", "oracle_index", "CS", "CM", "Graph", "MW", "mckean_singer_drift"]
    rep.results.update(mismatches=mismatches, mckean_singer_drift=ms_worst)
    rep.check("projector_agreement", mismatches, 0)
    rep.check("mckean_singer_drift", ms_worst, ms_tol)
    return rep


def index_experiment(Bs: Sequence[float] = (1.0, 2 * math.pi, 10.0), eps: float = 0.7,
                     tol: float = 1e-6) -> Report:
    rep = Report("index-rhs", dict(Bs=[float(b) for b in Bs], eps=eps))
    act = proper.ProperActionData.point_slice(2)
    chi = proper.cutoff_family(eps, act)
    area = index.Form.volume(2)
    flat = index.atiyah_singer_form(index.CurvatureData.flat(2))
    v = index.higher_index_rhs(flat, chi, area)
    rep.rows.append(["flat_area", 0.0, v, 1.0])
    rep.check("flat_area_class", v - 1.0, tol)
    worst = 0.0
    for B in Bs:
        AS = index.atiyah_singer_form(index.CurvatureData.magnetic(B))
        val = index.higher_index_rhs(AS, chi, index.Form.scalar(2, 1.0))
        worst = max(worst, abs(val - B / (2 * math.pi)))
        rep.rows.append(["magnetic", float(B), val, B / (2 * math.pi)])
    rep.check("magnetic_B_over_2pi", worst, tol)
    beta = index.Form.basis(2, (0,), 3.0) + index.Form.basis(2, (1,), -1.5)
    mag = index.atiyah_singer_form(index.CurvatureData.magnetic(2.0))
    exact = max(abs(index.higher_index_rhs(flat, chi, index.exterior_derivative(beta))),
                abs(index.higher_index_rhs(mag, chi, index.exterior_derivative(beta))))
    rep.rows.append(["exact", 0.0, exact, 0.0])
    rep.check("exact_forms", exact, tol)
    rep.columns = ["case", "B", "value", "expected"]
    rep.results.update(flat_area=v, magnetic_max_error=worst, exact_max=exact)
    return rep


__all__ = [
    "Check", "Report", "area_bound_experiment", "chern_experiment", "cocycle_check_experiment",
    "cutoff_experiment", "cyclic_experiment", "fourier_experiment", "fredholm_experiment",
    "growth_experiment", "index_experiment", "morita_experiment", "parallel_map",
    "simplex_volume_experiment", "vanest_experiment", "worker_count",
]
