"""Sweeps over h and alpha that check the eigenvalue asymptotics, bounds and ranks.

Every eigenvalue reported here comes from a scaled-tube solve on a base grid
and on a grid with halved spacings; the reported value is the Richardson
extrapolation and ``richardson_err`` is |fine - coarse| / 3.
"""
from __future__ import annotations

import csv
import json
import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
from scipy.stats import kendalltau

from .assembly import (BandedComplexMatrix, TubeGridSpec, assemble_cartesian, assemble_scaled_tube,
                       cartesian_grid, default_tube)
from .eigensolver import DEFAULT_SEED, DEFAULT_TOL, RieszError, eigs_near, riesz_rank
from .geometry import Domain
from .model import (ModelError, ModelParams, admissible_beta, airy_term, count_N, default_R,
                    halfplane_bound, lattice_distance, mirrored_mu_n, mu_n)
from .quasimodes import ETA, tube_residual
from .special import airy_zero

DEFAULT_H = (0.1, 0.07, 0.05, 0.035, 0.025)
S0_RTOL = 1e-8
M_WINDOW = 3.0  # spectral window Re < M z_1 h^{2/3}
CSV_COLUMNS = ["domain_id", "alpha", "h", "n", "re", "im", "residual", "richardson_err", "network"]


class HarnessError(ValueError):
    pass


def circle_radius(h: float, eta: float = ETA) -> float:
    """Radius h^{3/2 - 2 eta} of the small circles around mu_n."""
    return h ** (1.5 - 2 * eta)


def trend_tau(values) -> float:
    """Kendall tau between sweep position and value (negative: decreasing along the sweep)."""
    v = np.asarray(values, float)
    if len(v) < 2 or not np.all(np.isfinite(v)):
        return float("nan")
    return float(kendalltau(np.arange(len(v)), v).statistic)


def n_workers() -> int:
    try:
        return max(1, int(os.environ.get("BTSPEC_THREADS", "1")))
    except ValueError:
        return 1


def _pmap(fn, items):
    workers = min(n_workers(), len(items))
    if workers <= 1:
        return [fn(x) for x in items]
    with ProcessPoolExecutor(max_workers=workers) as ex:
        return list(ex.map(fn, items))


# --------------------------------------------------------------------------- tube solves


@dataclass
class NetworkSolve:
    """Eigenvalues near a target from one assembly, with Richardson data."""

    values: np.ndarray  # Richardson-extrapolated
    fine: np.ndarray
    coarse: np.ndarray
    richardson_err: np.ndarray
    residuals: np.ndarray
    converged: np.ndarray
    assembly: str
    grid: dict
    tube: TubeGridSpec | None = None
    s0_capped: bool = False
    s0_change: float = float("nan")
    coarse_matrix: BandedComplexMatrix | None = field(default=None, repr=False)

    @property
    def all_converged(self) -> bool:
        return bool(np.all(self.converged))


def _leftmost(res) -> complex:
    vals = res.values[res.converged] if res.converged.any() else res.values
    return complex(vals[np.argmin(vals.real)])


def _extrapolate(coarse: np.ndarray, fine_res, richardson: bool):
    fine = fine_res.values
    # pair each fine value with its nearest coarse value
    idx = [int(np.argmin(np.abs(coarse - f))) for f in fine]
    c = coarse[idx]
    return fine + (fine - c) / 3, fine, c, np.abs(fine - c) / 3


def solve_tube(domain: Domain, params: ModelParams, target: complex, count: int = 6,
               grid_scale: float = 1.0, tol: float = DEFAULT_TOL, richardson: bool = True,
               tube: TubeGridSpec | None = None, keep_matrix: bool = False) -> NetworkSolve:
    """Eigenvalues of the scaled tube operator nearest ``target``.

    s0 starts at min(L/2, 10 h^0.45) and is doubled (capped at L) until the
    leftmost eigenvalue moves by less than 1e-8 relative.
    """
    if tube is None:
        tube = default_tube(domain, params, grid_scale)
    L = domain.summary.half_length_L
    A = assemble_scaled_tube(domain, params, tube)
    res = eigs_near(A, target, count, tol)
    capped, change = False, float("nan")
    while True:
        if tube.s0 >= L - 1e-12:
            capped = True
            break
        t2 = tube.with_s0(min(2 * tube.s0, L))
        A2 = assemble_scaled_tube(domain, params, t2)
        r2 = eigs_near(A2, target, count, tol)
        a, b = _leftmost(res), _leftmost(r2)
        change = abs(b - a) / max(abs(b), 1e-300)
        if change < S0_RTOL:
            break
        tube, A, res = t2, A2, r2
    grid = {"s0": tube.s0, "n_s": tube.n_s, "n_u": tube.n_u, "delta": tube.delta}
    if richardson:
        fine_res = eigs_near(assemble_scaled_tube(domain, params, tube.refined(2)), target, count, tol)
        values, fine, c, err = _extrapolate(res.values, fine_res, True)
        residuals, converged = fine_res.residuals, fine_res.converged & res.converged
    else:
        values = fine = c = res.values
        err = np.full(len(values), np.nan)
        residuals, converged = res.residuals, res.converged
    return NetworkSolve(values, fine, c, err, residuals, converged, "tube", grid, tube, capped, change,
                        A if keep_matrix else None)


def solve_cartesian(domain: Domain, params: ModelParams, target: complex, count: int = 6,
                    grid_scale: float = 1.0, tol: float = DEFAULT_TOL, richardson: bool = True,
                    keep_matrix: bool = False) -> NetworkSolve:
    """Eigenvalues of the Cartesian assembly nearest ``target``; refinement halves both spacings."""
    nx, ny = default_cartesian_n(domain, params.h, grid_scale)
    A = assemble_cartesian(domain, params, cartesian_grid(domain, nx, ny))
    res = eigs_near(A, target, count, tol)
    grid = {"nx": nx, "ny": ny, "nodes": A.dim}
    if richardson:
        Af = assemble_cartesian(domain, params, cartesian_grid(domain, 2 * nx + 1, 2 * ny + 1))
        fine_res = eigs_near(Af, target, count, tol)
        values, fine, c, err = _extrapolate(res.values, fine_res, True)
        residuals, converged = fine_res.residuals, fine_res.converged & res.converged
    else:
        values = fine = c = res.values
        err = np.full(len(values), np.nan)
        residuals, converged = res.residuals, res.converged
    return NetworkSolve(values, fine, c, err, residuals, converged, "cartesian", grid,
                        coarse_matrix=A if keep_matrix else None)


def pick_assembly(alpha: float) -> str:
    """Tube for alpha <= pi/2, Cartesian above.

    For alpha > pi/2 the inner wall of the truncated tube carries its own
    eigenvalue network close to the leftmost-point cluster.
    """
    return "tube" if alpha <= math.pi / 2 + 1e-12 else "cartesian"


def solve_network(domain: Domain, params: ModelParams, target: complex, count: int = 6,
                  grid_scale: float = 1.0, assembly: str = "auto", **kw) -> NetworkSolve:
    if assembly == "auto":
        assembly = pick_assembly(params.alpha)
    if assembly == "tube":
        return solve_tube(domain, params, target, count, grid_scale, **kw)
    if assembly == "cartesian":
        return solve_cartesian(domain, params, target, count, grid_scale, **kw)
    raise HarnessError(f"assembly must be 'auto', 'tube' or 'cartesian', got {assembly!r}")


def _match(values: np.ndarray, targets: list[complex]) -> list[int]:
    """Greedy nearest assignment of distinct eigenvalues to targets, in order."""
    free = list(range(len(values)))
    out = []
    for t in targets:
        j = min(free, key=lambda i: abs(values[i] - t))
        out.append(j)
        free.remove(j)
    return out


# --------------------------------------------------------------------------- theorem checks


def _theorem1_point(args) -> dict:
    domain, alpha, R, h, n_max, grid_scale, riesz, seed, n_quadrature = args
    p = ModelParams.from_summary(domain.summary, h, alpha)
    N = count_N(R, p.kappa0)
    center = airy_term(h, alpha)
    sol = solve_network(domain, p, center, count=6, grid_scale=grid_scale, keep_matrix=riesz)
    vals = sol.values
    dist = np.abs(vals - center)
    in_disk = int(np.count_nonzero(dist < R * h))
    complete = bool(dist.max() >= R * h)
    mus = [mu_n(p, 1, n) for n in range(1, n_max + 1)]
    idx = _match(vals, mus)
    rows = []
    for n, (j, mu) in enumerate(zip(idx, mus), start=1):
        e = abs(vals[j] - mu)
        rows.append({"n": n, "lambda": [vals[j].real, vals[j].imag], "mu": [mu.real, mu.imag],
                     "err": e, "err_over_h": e / h, "residual": float(sol.residuals[j]),
                     "richardson_err": float(sol.richardson_err[j]), "converged": bool(sol.converged[j])})
    ranks = []
    if riesz:
        A = sol.coarse_matrix
        r = circle_radius(h)
        for n in range(1, N + 1):
            mu = mu_n(p, 1, n)
            try:
                rep = riesz_rank(A, mu, r, n_quadrature=n_quadrature, seed=seed, eigenvalues=sol.coarse)
                ranks.append({"n": n, **rep.to_dict()})
            except RieszError as exc:
                ranks.append({"n": n, "rank": None, "stable": False, "error": str(exc),
                              "center": [mu.real, mu.imag], "radius": r})
    return {"h": h, "N": N, "center": [center.real, center.imag], "disk_radius": R * h,
            "count_in_disk": in_disk, "search_complete": complete, "eigenvalues": rows,
            "all_values": [[v.real, v.imag] for v in vals],
            "all_residuals": sol.residuals.tolist(), "all_richardson": sol.richardson_err.tolist(),
            "assembly": sol.assembly, "grid": sol.grid, "s0_capped": sol.s0_capped,
            "s0_change": sol.s0_change, "riesz": ranks, "converged": sol.all_converged}


def verify_theorem1(domain: Domain, alpha: float, R: float | None = None, h_list=DEFAULT_H,
                    n_max: int = 2, grid_scale: float = 1.0, riesz: bool = True,
                    seed: int = DEFAULT_SEED, n_quadrature: int = 32) -> dict:
    """Eigenvalue asymptotics near the leftmost point over an h-sweep.

    Returns
    -------
    dict
        AsymptoticReport with per-h entries, per-n normalized errors and verdicts.
    """
    s = domain.summary
    if not s.left_ok:
        raise HarnessError("leftmost point must be unique with positive curvature")
    if not 0 <= alpha < 3 * math.pi / 5:
        raise HarnessError("alpha must lie in [0, 3pi/5)")
    if R is None:
        R = default_R(s.kappa0)
    N = count_N(R, s.kappa0)
    h_list = sorted(map(float, h_list), reverse=True)
    points = _pmap(_theorem1_point, [(domain, alpha, R, h, n_max, grid_scale, riesz, seed, n_quadrature)
                                     for h in h_list])
    per_n = {}
    verdicts = {}
    for n in range(1, n_max + 1):
        series = [pt["eigenvalues"][n - 1]["err_over_h"] for pt in points]
        tau = trend_tau(series)
        per_n[str(n)] = {"err_over_h": series, "kendall_tau": tau}
        verdicts[f"n{n}_decreasing"] = bool(tau <= -0.5)
        verdicts[f"n{n}_halved"] = bool(series[-1] < 0.5 * series[0])
    verdicts["count_equals_N"] = all(pt["count_in_disk"] == N for pt in points)
    verdicts["search_complete"] = all(pt["search_complete"] for pt in points)
    if riesz:
        verdicts["riesz_rank_one"] = all(r.get("rank") == 1 and r.get("rank_doubled") == 1
                                         for pt in points for r in pt["riesz"])
        verdicts["riesz_stable"] = all(r.get("stable", False) for pt in points for r in pt["riesz"])
        verdicts["ranks_sum_to_count"] = all(
            sum(r.get("rank") or 0 for r in pt["riesz"]) == pt["count_in_disk"] for pt in points)
    verdicts["converged"] = all(pt["converged"] for pt in points)
    if alpha == 0:
        verdicts["real_at_alpha0"] = all(
            abs(v[1]) <= 10 * max(pt["all_residuals"][i], DEFAULT_TOL)
            for pt in points for i, v in enumerate(pt["all_values"]))
    return {"check": "theorem1", "domain_id": domain.domain_id, "alpha": alpha, "R": R, "N": N,
            "lattice_distance": lattice_distance(R, s.kappa0), "h_list": h_list,
            "points": points, "per_n": per_n, "verdicts": verdicts, "passed": all(verdicts.values())}


def _window_eigenvalues(domain: Domain, alpha: float, h: float, grid_scale: float, count: int):
    p = ModelParams.from_summary(domain.summary, h, alpha)
    z1 = airy_zero(1)
    sol = solve_network(domain, p, airy_term(h, alpha), count=count, grid_scale=grid_scale)
    keep = sol.values.real < M_WINDOW * z1 * h ** (2 / 3)
    return sol, keep


def verify_lower_bound(domain: Domain, alpha: float, h_list=DEFAULT_H, grid_scale: float = 1.0,
                       count: int = 8) -> dict:
    """min Re sp against z_1 h^{2/3} cos(2 alpha/3) and the imaginary-part strip."""
    s = domain.summary
    h_list = sorted(map(float, h_list), reverse=True)
    z1 = airy_zero(1)
    pts = []
    strip_violations = 0
    for h in h_list:
        sol, keep = _window_eigenvalues(domain, alpha, h, grid_scale, count)
        vals = sol.values[keep]
        res = sol.residuals[keep]
        lead = z1 * h ** (2 / 3) * math.cos(2 * alpha / 3)
        min_re = float(vals.real.min()) if len(vals) else float("nan")
        C_h = (lead - min_re) / h ** (4 / 3)
        # strip tolerance: 10x the solver residual of each pair
        tol = 10 * np.maximum(res, np.finfo(float).eps)
        top = math.sin(alpha) * s.x1_max
        bad = int(np.count_nonzero((vals.imag < -tol) | (vals.imag > top + tol)))
        strip_violations += bad
        pts.append({"h": h, "min_re": min_re, "leading": lead, "C_h": C_h, "n_window": int(len(vals)),
                    "min_re_over_h23": min_re / h ** (2 / 3), "strip_violations": bad,
                    "values": [[v.real, v.imag] for v in vals], "residuals": res.tolist(),
                    "richardson_err": sol.richardson_err[keep].tolist()})
    C = [pt["C_h"] for pt in pts]
    tau = trend_tau(C)
    growth = bool(tau >= 0.5 and C[-1] > C[0] and C[-1] > 0)
    verdicts = {"C_bounded": not growth, "strip": strip_violations == 0}
    return {"check": "lower_bound", "domain_id": domain.domain_id, "alpha": alpha, "h_list": h_list,
            "points": pts, "C_fitted": max(C), "C_tau": tau, "strip_violations": strip_violations,
            "verdicts": verdicts, "passed": all(verdicts.values())}


def mirrored_solve(domain: Domain, alpha: float, h: float, count: int = 4, grid_scale: float = 1.0) -> NetworkSolve:
    """Eigenvalues generated near the rightmost point.

    They are computed on the reflected domain with alpha' = pi - alpha, then
    conjugated and shifted by e^{i alpha} x1_max.
    """
    mdom = domain.mirrored()
    at = math.pi - alpha
    p = ModelParams.from_summary(mdom.summary, h, at)
    sol = solve_network(mdom, p, airy_term(h, at), count=count, grid_scale=grid_scale)
    shift = complex(math.cos(alpha), math.sin(alpha)) * domain.summary.x1_max
    for name in ("values", "fine", "coarse"):
        setattr(sol, name, np.conj(getattr(sol, name)) + shift)
    return sol


def verify_halfplane(domain: Domain, alpha: float, h_list=DEFAULT_H, grid_scale: float = 1.0,
                     count: int = 6, include_mirrored: bool = True) -> dict:
    """Rotated lower bound cos(b) Re z + sin(b) Im z >= z_1 h^{2/3} cos(2 alpha/3 - b)."""
    beta = admissible_beta(alpha)
    s = domain.summary
    h_list = sorted(map(float, h_list), reverse=True)
    pts = []
    violations = 0
    for h in h_list:
        p = ModelParams.from_summary(s, h, alpha)
        normal, offset = halfplane_bound(p, beta)
        sol = solve_network(domain, p, airy_term(h, alpha), count=count, grid_scale=grid_scale)
        vals = [sol.values]
        nets = ["A0"] * len(sol.values)
        if include_mirrored and s.right_ok and alpha > 2 * math.pi / 5:
            ms = mirrored_solve(domain, alpha, h, count=4, grid_scale=grid_scale)
            vals.append(ms.values)
            nets += ["A1"] * len(ms.values)
        v = np.concatenate(vals)
        proj = (np.conj(normal) * v).real
        slack = proj - offset
        bad = int(np.count_nonzero(slack < 0))
        violations += bad
        C_h = float(np.max(-slack) / h ** (4 / 3))
        pts.append({"h": h, "beta": beta, "offset": offset, "C_h": C_h, "violations": bad,
                    "values": [[z.real, z.imag] for z in v], "network": nets,
                    "min_slack": float(slack.min())})
    C = [pt["C_h"] for pt in pts]
    tau = trend_tau(C)
    verdicts = {"no_violations": violations == 0,
                "C_bounded": not bool(tau >= 0.5 and C[-1] > C[0] and C[-1] > 0)}
    return {"check": "halfplane", "domain_id": domain.domain_id, "alpha": alpha, "beta": beta,
            "h_list": h_list, "points": pts, "violations": violations, "C_fitted": max(C),
            "verdicts": verdicts, "passed": all(verdicts.values())}


def verify_two_networks(domain: Domain, alpha: float, h: float, n_max: int = 2, grid_scale: float = 1.0) -> dict:
    """Locate the leftmost-point and rightmost-point eigenvalue clusters and compare them."""
    if not 2 * math.pi / 5 < alpha < 3 * math.pi / 5:
        raise HarnessError("verify_two_networks: alpha must lie in (2pi/5, 3pi/5)")
    s = domain.summary
    if not (s.left_ok and s.right_ok):
        raise HarnessError("verify_two_networks: both extremal points must be unique and curved")
    p = ModelParams.from_summary(s, h, alpha)
    a0 = solve_network(domain, p, airy_term(h, alpha), count=4, grid_scale=grid_scale)
    a1 = mirrored_solve(domain, alpha, h, count=4, grid_scale=grid_scale)
    out = {"check": "two_networks", "domain_id": domain.domain_id, "alpha": alpha, "h": h}
    nets = {}
    for name, sol, formula in (("A0", a0, lambda n: mu_n(p, 1, n)), ("A1", a1, lambda n: mirrored_mu_n(p, n))):
        mus = [formula(n) for n in range(1, n_max + 1)]
        idx = _match(sol.values, mus)
        nets[name] = {
            "values": [[v.real, v.imag] for v in sol.values],
            "residuals": sol.residuals.tolist(), "richardson_err": sol.richardson_err.tolist(),
            "matched": [{"n": n, "lambda": [sol.values[j].real, sol.values[j].imag], "mu": [m.real, m.imag],
                         "err_over_h": abs(sol.values[j] - m) / h,
                         "richardson_over_h": float(sol.richardson_err[j]) / h}
                        for n, (j, m) in enumerate(zip(idx, mus), 1)],
            "min_re": float(sol.values.real.min()), "converged": sol.all_converged,
            "assembly": sol.assembly, "grid": sol.grid}
    out["networks"] = nets
    # budget: the leftmost-point network's normalized error plus 3x the combined
    # Richardson uncertainty of both measurements
    a0m, a1m = nets["A0"]["matched"], nets["A1"]["matched"]
    budget = [b["err_over_h"] + 3 * (b["richardson_over_h"] + a["richardson_over_h"]) for a, b in zip(a1m, a0m)]
    mirrored = [m["err_over_h"] for m in a1m]
    verdicts = {"both_found": nets["A0"]["converged"] and nets["A1"]["converged"],
                "mirrored_match_within_budget": all(a < b for a, b in zip(mirrored, budget))}
    if alpha > math.pi / 2:
        verdicts["mirrored_leftmost"] = nets["A1"]["min_re"] < nets["A0"]["min_re"]
    else:
        verdicts["a0_leftmost"] = nets["A0"]["min_re"] < nets["A1"]["min_re"]
    out["budget_err_over_h"] = budget
    out["verdicts"] = verdicts
    out["passed"] = all(verdicts.values())
    return out


def verify_quasimode_residuals(domain: Domain, alpha: float, h_list=DEFAULT_H, n: int = 1,
                               grid_scale: float = 2.0, eta: float = ETA) -> dict:
    """tube_residual over the sweep, normalized by h^1.2 and h^1.4."""
    h_list = sorted(map(float, h_list), reverse=True)
    rows = []
    for h in h_list:
        p = ModelParams.from_summary(domain.summary, h, alpha)
        tube = default_tube(domain, p, grid_scale, chi_profile="constant")
        r_cut = tube_residual(p, domain, tube, 1, n, eta=eta, use_cutoff=True)
        r_one = tube_residual(p, domain, tube, 1, n, eta=eta, use_cutoff=False)
        rows.append({"h": h, "residual": r_cut, "residual_no_cutoff": r_one,
                     "over_h1.2": r_cut / h**1.2, "over_h1.4": r_cut / h**1.4,
                     "no_cutoff_over_h1.2": r_one / h**1.2})
    expo = max(1.2, 1.5 - 3 * eta)
    series = [r["residual"] / r["h"] ** expo for r in rows]
    tau = trend_tau(series)
    verdicts = {"bounded_no_growth": bool(tau < 0.5 and max(series) <= 2 * series[0])}
    return {"check": "quasimode", "domain_id": domain.domain_id, "alpha": alpha, "exponent": expo,
            "rows": rows, "tau": tau, "tau_no_cutoff": trend_tau([r["no_cutoff_over_h1.2"] for r in rows]),
            "verdicts": verdicts, "passed": all(verdicts.values())}


def default_cartesian_n(domain: Domain, h: float, grid_scale: float = 1.0) -> tuple[int, int]:
    s = domain.summary
    table = domain.table
    width = s.x1_max
    height = float(np.ptp(table.xy[:, 1]))
    step = h ** (2 / 3) / (12 * grid_scale)
    return int(math.ceil(width / step)), int(math.ceil(height / step))


def isospectrality_check(domain: Domain, alpha: float, h: float, count: int = 3,
                         grid_scale: float = 1.0, factor: float = 3.0) -> dict:
    """Leftmost eigenvalues of the Cartesian and the scaled-tube assemblies."""
    p = ModelParams.from_summary(domain.summary, h, alpha)
    target = airy_term(h, alpha)
    tube = solve_tube(domain, p, target, count=count + 2, grid_scale=grid_scale)
    cart = solve_cartesian(domain, p, target, count=count + 2, grid_scale=grid_scale)
    c_ext, c_err = cart.values, cart.richardson_err
    order_t = np.argsort(tube.values.real)[:count]
    rows = []
    ok = True
    for k, j in enumerate(order_t):
        lt = tube.values[j]
        i = int(np.argmin(np.abs(c_ext - lt)))
        diff = abs(c_ext[i] - lt)
        tol = factor * max(tube.richardson_err[j], c_err[i])
        ok &= bool(diff <= tol)
        rows.append({"k": k + 1, "tube": [lt.real, lt.imag], "cartesian": [c_ext[i].real, c_ext[i].imag],
                     "diff": diff, "tube_richardson": float(tube.richardson_err[j]),
                     "cartesian_richardson": float(c_err[i]), "tol": tol, "ok": bool(diff <= tol)})
    return {"check": "isospectrality", "domain_id": domain.domain_id, "alpha": alpha, "h": h,
            "cartesian_grid": cart.grid, "tube_grid": tube.grid,
            "rows": rows, "passed": bool(ok)}


# --------------------------------------------------------------------------- output


def eigen_rows(report: dict) -> list[dict]:
    """Flatten a report (or list of reports) into eigenvalues.csv rows."""
    reports = report if isinstance(report, list) else [report]
    rows = []
    for rep in reports:
        if not rep:
            continue
        dom, alpha = rep.get("domain_id"), rep.get("alpha")
        if rep.get("check") == "theorem1":
            for pt in rep["points"]:
                for e in pt["eigenvalues"]:
                    rows.append({"domain_id": dom, "alpha": alpha, "h": pt["h"], "n": e["n"],
                                 "re": e["lambda"][0], "im": e["lambda"][1], "residual": e["residual"],
                                 "richardson_err": e["richardson_err"], "network": "A0"})
        elif rep.get("check") == "two_networks":
            for net, d in rep["networks"].items():
                for m in d["matched"]:
                    j = d["values"].index(m["lambda"])
                    rows.append({"domain_id": dom, "alpha": alpha, "h": rep["h"], "n": m["n"],
                                 "re": m["lambda"][0], "im": m["lambda"][1], "residual": d["residuals"][j],
                                 "richardson_err": d["richardson_err"][j], "network": net})
    return rows


def _fmt(v):
    if isinstance(v, np.integer):
        v = int(v)
    if isinstance(v, (float, np.floating)):
        return repr(float(v))
    return "" if v is None else str(v)


def write_csv(rows: list[dict], path) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(CSV_COLUMNS)
        for r in rows:
            w.writerow([_fmt(r[c]) for c in CSV_COLUMNS])


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, (np.bool_,)):
        return bool(obj)
    if isinstance(obj, np.integer):
        return int(obj)
    if isinstance(obj, (np.floating, float)):
        f = float(obj)
        return f if math.isfinite(f) else None
    if isinstance(obj, complex):
        return [obj.real, obj.imag]
    return obj


def write_json(obj, path) -> None:
    with open(path, "w") as fh:
        json.dump(_jsonable(obj), fh, indent=2, sort_keys=True)
        fh.write("\n")


def overlays(report) -> dict:
    """Figure overlays: big disks, small circles, half-plane lines, strip bounds."""
    reports = report if isinstance(report, list) else [report]
    out = {"big_disks": [], "small_circles": [], "halfplanes": [], "strips": []}
    for rep in reports:
        if not rep:
            continue
        if rep.get("check") == "theorem1":
            for pt in rep["points"]:
                out["big_disks"].append({"h": pt["h"], "alpha": rep["alpha"], "center": pt["center"],
                                         "radius": pt["disk_radius"]})
                for e in pt["eigenvalues"]:
                    out["small_circles"].append({"h": pt["h"], "alpha": rep["alpha"], "n": e["n"],
                                                 "center": e["mu"], "radius": circle_radius(pt["h"])})
        if rep.get("check") == "halfplane":
            for pt in rep["points"]:
                out["halfplanes"].append({"h": pt["h"], "alpha": rep["alpha"], "beta": pt["beta"],
                                          "normal": [math.cos(pt["beta"]), math.sin(pt["beta"])],
                                          "offset": pt["offset"]})
        if "x1_max" in rep:
            out["strips"].append({"alpha": rep["alpha"], "im_min": 0.0,
                                  "im_max": math.sin(rep["alpha"]) * rep["x1_max"]})
    return out


def emit_figures(report, out_dir) -> dict:
    """Write eigenvalues.csv and overlays.json; an empty report gives a header-only CSV."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    rows = eigen_rows(report) if report else []
    write_csv(rows, out / "eigenvalues.csv")
    write_json(overlays(report) if report else overlays([]), out / "overlays.json")
    return {"eigenvalues": str(out / "eigenvalues.csv"), "overlays": str(out / "overlays.json"), "rows": len(rows)}
