"""Command-line entry point.

Usage: ``btspec SUBCOMMAND [--config PATH] [flags]`` with SUBCOMMAND one of
geometry, model, solve, sweep, verify, riesz, emit.  Exit status is 0 on
success, 1 when a verification assertion fails, 2 on a configuration error
and 3 when the eigensolver does not converge.
"""
from __future__ import annotations

import argparse
import csv
import dataclasses
import json
import math
import sys
from dataclasses import dataclass, field
from pathlib import Path

from . import harness
from .assembly import AssemblyError, assemble_scaled_tube, default_tube
from .eigensolver import DEFAULT_SEED, DEFAULT_TOL, RieszError, riesz_rank
from .geometry import PRESETS, GeometryError, build_domain, curve_from_config, preset_domain
from .model import ModelError, ModelParams, airy_term, count_N, default_R, model_spectrum, mu_n

SUBCOMMANDS = ("geometry", "model", "solve", "sweep", "verify", "riesz", "emit")
EXIT_OK, EXIT_ASSERT, EXIT_CONFIG, EXIT_NOCONV = 0, 1, 2, 3


class ConfigError(ValueError):
    pass


class NonConvergence(RuntimeError):
    pass


@dataclass
class RunConfig:
    domain: str | dict = "disk"
    alpha: list = field(default_factory=lambda: [0.0])
    h_list: list = field(default_factory=lambda: list(harness.DEFAULT_H))
    R: float | None = None
    kappa0: float | None = None
    grid: dict = field(default_factory=dict)
    solver: dict = field(default_factory=dict)
    eta: float = 0.1
    out: str = "out"

    GRID_KEYS = ("grid_scale", "nx", "ny", "n_s", "n_u", "s0", "delta")
    SOLVER_KEYS = ("tol", "krylov_dim", "seed", "count")

    @property
    def seed(self) -> int:
        return int(self.solver.get("seed", DEFAULT_SEED))

    @property
    def grid_scale(self) -> float:
        return float(self.grid.get("grid_scale", 1.0))

    def validate(self) -> "RunConfig":
        if isinstance(self.domain, str):
            if self.domain not in PRESETS:
                raise ConfigError(f"domain: unknown preset {self.domain!r}, choose from {sorted(PRESETS)}")
        elif not isinstance(self.domain, dict) or "kind" not in self.domain:
            raise ConfigError("domain: must be a preset name or an object with a 'kind' key")
        if not isinstance(self.alpha, list):
            self.alpha = [self.alpha]
        if not self.alpha or not all(_is_num(a) and 0 <= a <= math.pi for a in self.alpha):
            raise ConfigError("alpha: values must be numbers in [0, pi]")
        if not isinstance(self.h_list, list) or not self.h_list:
            raise ConfigError("h_list: must be a non-empty list")
        if not all(_is_num(h) and 0 < h < 1 for h in self.h_list):
            raise ConfigError("h_list: values must lie in (0, 1)")
        if self.R is not None and not (_is_num(self.R) and self.R > 0):
            raise ConfigError("R: must be positive")
        if self.kappa0 is not None and not (_is_num(self.kappa0) and self.kappa0 > 0):
            raise ConfigError("kappa0: must be positive")
        if not (_is_num(self.eta) and 0 < self.eta < 1 / 6):
            raise ConfigError("eta: must lie in (0, 1/6)")
        for name, keys, block in (("grid", self.GRID_KEYS, self.grid), ("solver", self.SOLVER_KEYS, self.solver)):
            if not isinstance(block, dict):
                raise ConfigError(f"{name}: must be an object")
            for k, v in block.items():
                if k not in keys:
                    raise ConfigError(f"{name}.{k}: unknown key, allowed {list(keys)}")
                if v is not None and not (_is_num(v) and v > 0):
                    raise ConfigError(f"{name}.{k}: must be positive")
        return self

    def to_dict(self) -> dict:
        d = dataclasses.asdict(self)
        d["seed"] = self.seed
        return d


def _is_num(x) -> bool:
    return isinstance(x, (int, float)) and not isinstance(x, bool) and math.isfinite(x)


def load_config(path: str | None) -> RunConfig:
    if path is None:
        return RunConfig()
    try:
        raw = json.loads(Path(path).read_text())
    except OSError as exc:
        raise ConfigError(f"config: cannot read {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config: invalid JSON: {exc}") from exc
    if not isinstance(raw, dict):
        raise ConfigError("config: top level must be an object")
    known = {f.name for f in dataclasses.fields(RunConfig)}
    for k in raw:
        if k not in known:
            raise ConfigError(f"{k}: unknown key, allowed {sorted(known)}")
    return RunConfig(**raw)


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="btspec", description=__doc__.splitlines()[0])
    p.add_argument("subcommand", choices=SUBCOMMANDS)
    p.add_argument("--config", help="JSON run configuration")
    p.add_argument("--preset", choices=sorted(PRESETS), help="domain preset (overrides config)")
    p.add_argument("--alpha", type=float, action="append", help="rotation angle; repeatable")
    p.add_argument("--h", type=float, action="append", dest="h", help="semiclassical parameter; repeatable")
    p.add_argument("--R", type=float, help="disk radius factor for eigenvalue counting")
    p.add_argument("--kappa0", type=float, help="curvature for the model subcommand")
    p.add_argument("--out", help="output directory")
    p.add_argument("--seed", type=int, help="probe seed")
    p.add_argument("--grid-scale", type=float, dest="grid_scale", help="multiplies default resolutions")
    return p


def resolve_config(args: argparse.Namespace) -> RunConfig:
    cfg = load_config(args.config)
    if args.preset:
        cfg.domain = args.preset
    if args.alpha:
        cfg.alpha = list(args.alpha)
    if args.h:
        cfg.h_list = list(args.h)
    if args.R is not None:
        cfg.R = args.R
    if args.kappa0 is not None:
        cfg.kappa0 = args.kappa0
    if args.out:
        cfg.out = args.out
    cfg.grid = dict(cfg.grid)
    cfg.solver = dict(cfg.solver)
    if args.seed is not None:
        cfg.solver["seed"] = args.seed
    if args.grid_scale is not None:
        cfg.grid["grid_scale"] = args.grid_scale
    return cfg.validate()


def _domain(cfg: RunConfig):
    if isinstance(cfg.domain, str):
        return preset_domain(cfg.domain)
    return build_domain(curve_from_config(cfg.domain), domain_id=cfg.domain.get("id", cfg.domain["kind"]))


def _out(cfg: RunConfig) -> Path:
    out = Path(cfg.out)
    out.mkdir(parents=True, exist_ok=True)
    return out


# --------------------------------------------------------------------------- subcommands


def cmd_geometry(cfg: RunConfig) -> int:
    dom = _domain(cfg)
    harness.write_json({"domain_id": dom.domain_id, "seed": cfg.seed, "summary": dom.summary.to_dict()},
                       _out(cfg) / "geometry.json")
    return EXIT_OK


def cmd_model(cfg: RunConfig) -> int:
    if cfg.kappa0 is not None:
        base = {"kappa0": cfg.kappa0}
    else:
        s = _domain(cfg).summary
        base = {"kappa0": s.kappa0, "kappa1": s.kappa1, "x1_max": s.x1_max}
    with open(_out(cfg) / "model.csv", "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["alpha", "h", "kappa0", "m", "n", "re", "im"])
        for a in cfg.alpha:
            for h in cfg.h_list:
                p = ModelParams(h=h, alpha=a, **base)
                for m, n, mu in model_spectrum(p, 2, 4):
                    w.writerow([repr(float(a)), repr(float(h)), repr(p.kappa0), m, n, repr(mu.real), repr(mu.imag)])
    return EXIT_OK


def _tube(cfg: RunConfig, dom, p: ModelParams):
    g = cfg.grid
    tube = default_tube(dom, p, cfg.grid_scale, s0=g.get("s0"), delta=g.get("delta"))
    over = {k: int(g[k]) for k in ("n_s", "n_u") if g.get(k)}
    return dataclasses.replace(tube, **over) if over else tube


def cmd_solve(cfg: RunConfig) -> int:
    dom = _domain(cfg)
    h, a = float(cfg.h_list[0]), float(cfg.alpha[0])
    p = ModelParams.from_summary(dom.summary, h, a)
    count = int(cfg.solver.get("count", 6))
    tol = float(cfg.solver.get("tol", DEFAULT_TOL))
    explicit = any(cfg.grid.get(k) for k in ("n_s", "n_u", "s0", "delta"))
    if explicit:
        sol = harness.solve_tube(dom, p, airy_term(h, a), count=count, tol=tol, tube=_tube(cfg, dom, p))
    else:
        sol = harness.solve_network(dom, p, airy_term(h, a), count=count, grid_scale=cfg.grid_scale, tol=tol)
    rep = {"domain_id": dom.domain_id, "alpha": a, "h": h, "seed": cfg.seed, "tol": tol,
           "assembly": sol.assembly, "grid": sol.grid, "s0_capped": sol.s0_capped,
           "eigenvalues": [{"n": i + 1, "re": v.real, "im": v.imag, "residual": float(r),
                            "richardson_err": float(e), "converged": bool(c)}
                           for i, (v, r, e, c) in enumerate(zip(sol.values, sol.residuals,
                                                                sol.richardson_err, sol.converged))],
           "converged": sol.all_converged}
    out = _out(cfg)
    harness.write_json(rep, out / "spectrum.json")
    rows = [{"domain_id": dom.domain_id, "alpha": a, "h": h, "n": e["n"], "re": e["re"], "im": e["im"],
             "residual": e["residual"], "richardson_err": e["richardson_err"], "network": "A0"}
            for e in rep["eigenvalues"]]
    harness.write_csv(rows, out / "eigenvalues.csv")
    if not sol.all_converged:
        raise NonConvergence("eigensolver did not reach the residual tolerance")
    return EXIT_OK


def _theorem1_all(cfg: RunConfig, dom, riesz: bool) -> list[dict]:
    return [harness.verify_theorem1(dom, a, cfg.R, cfg.h_list, grid_scale=cfg.grid_scale, riesz=riesz,
                                    seed=cfg.seed) for a in cfg.alpha]


def _finish_reports(cfg: RunConfig, reports: list[dict], dom) -> None:
    for r in reports:
        r["x1_max"] = dom.summary.x1_max
    out = _out(cfg)
    harness.write_json({"config": cfg.to_dict(), "seed": cfg.seed, "reports": reports}, out / "report.json")
    harness.write_csv(harness.eigen_rows(reports), out / "eigenvalues.csv")


def _converged(reports: list[dict]) -> bool:
    return all(r.get("verdicts", {}).get("converged", True) for r in reports)


def cmd_sweep(cfg: RunConfig) -> int:
    dom = _domain(cfg)
    reports = _theorem1_all(cfg, dom, riesz=False)
    _finish_reports(cfg, reports, dom)
    if not _converged(reports):
        raise NonConvergence("eigensolver did not converge on every sweep point")
    return EXIT_OK


def cmd_verify(cfg: RunConfig) -> int:
    dom = _domain(cfg)
    s = dom.summary
    reports = []
    for a in cfg.alpha:
        if s.left_ok and a < 3 * math.pi / 5:
            reports.append(harness.verify_theorem1(dom, a, cfg.R, cfg.h_list, grid_scale=cfg.grid_scale,
                                                   seed=cfg.seed))
        if a < math.pi / 2:
            reports.append(harness.verify_lower_bound(dom, a, cfg.h_list, cfg.grid_scale))
        elif a < 3 * math.pi / 5:
            reports.append(harness.verify_halfplane(dom, a, cfg.h_list, cfg.grid_scale))
        if 2 * math.pi / 5 < a < 3 * math.pi / 5 and s.left_ok and s.right_ok:
            reports.append(harness.verify_two_networks(dom, a, min(cfg.h_list), grid_scale=cfg.grid_scale))
    _finish_reports(cfg, reports, dom)
    for r in reports:
        print(f"{r['check']} alpha={r['alpha']:.6g}: {'PASS' if r['passed'] else 'FAIL'}")
        for k, v in r["verdicts"].items():
            if not v:
                print(f"  failed: {k}")
    if not _converged(reports):
        raise NonConvergence("eigensolver did not converge on every sweep point")
    return EXIT_OK if all(r["passed"] for r in reports) else EXIT_ASSERT


def cmd_riesz(cfg: RunConfig) -> int:
    dom = _domain(cfg)
    s = dom.summary
    R = cfg.R if cfg.R is not None else default_R(s.kappa0)
    N = count_N(R, s.kappa0)
    out = []
    ok = True
    for a in cfg.alpha:
        for h in sorted(cfg.h_list, reverse=True):
            p = ModelParams.from_summary(s, h, a)
            tube = default_tube(dom, p, cfg.grid_scale)
            A = assemble_scaled_tube(dom, p, tube)
            for n in range(1, N + 1):
                mu = mu_n(p, 1, n)
                try:
                    rep = riesz_rank(A, mu, harness.circle_radius(h, cfg.eta), seed=cfg.seed).to_dict()
                except RieszError as exc:
                    rep = {"error": str(exc), "rank": None, "stable": False}
                ok &= rep["rank"] == 1 and rep["stable"]
                out.append({"alpha": a, "h": h, "n": n, **rep})
    harness.write_json({"domain_id": dom.domain_id, "seed": cfg.seed, "R": R, "N": N, "circles": out},
                       _out(cfg) / "riesz.json")
    return EXIT_OK if ok else EXIT_ASSERT


def cmd_emit(cfg: RunConfig) -> int:
    out = _out(cfg)
    path = out / "report.json"
    if path.exists():
        reports = json.loads(path.read_text()).get("reports", [])
    else:
        dom = _domain(cfg)
        reports = _theorem1_all(cfg, dom, riesz=False)
        _finish_reports(cfg, reports, dom)
    harness.emit_figures(reports, out)
    return EXIT_OK


COMMANDS = {"geometry": cmd_geometry, "model": cmd_model, "solve": cmd_solve, "sweep": cmd_sweep,
            "verify": cmd_verify, "riesz": cmd_riesz, "emit": cmd_emit}


def run(subcommand: str, cfg: RunConfig) -> int:
    try:
        return COMMANDS[subcommand](cfg)
    except (GeometryError, ModelError, AssemblyError, harness.HarnessError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except NonConvergence as exc:
        print(f"non-convergence: {exc}", file=sys.stderr)
        return EXIT_NOCONV


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = resolve_config(args)
    except (ConfigError, TypeError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    return run(args.subcommand, cfg)


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
