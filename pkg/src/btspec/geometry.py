"""Boundary curves, arc-length tables and tubular coordinates.

Conventions: curves are oriented counterclockwise, the outward normal is
n = (T_y, -T_x) for the unit tangent T, and the signed curvature satisfies
n' = kappa * gamma', so convex domains have kappa > 0.  Arc length is
measured from the leftmost point A0, which is translated to the origin.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Any

import numpy as np
from scipy.integrate import cumulative_simpson
from scipy.interpolate import CubicHermiteSpline, PchipInterpolator, make_interp_spline
from shapely.geometry import LinearRing

KINDS = ("shifted-disk", "ellipse", "fourier-perturbed-circle", "sampled")

_DENSE = 1 << 14
_UNIQUE_RTOL = 1e-6
DELTA_SAFETY = 0.9


class GeometryError(ValueError):
    pass


@dataclass(frozen=True)
class ParamCurve:
    """Closed smooth curve t -> (x(t), y(t)), t in [0, 2*pi).

    Use the constructors :func:`shifted_disk`, :func:`ellipse`,
    :func:`fourier_circle`, :func:`sampled_curve` or :func:`curve_from_config`;
    they normalize the orientation to counterclockwise.
    """

    kind: str
    params: dict = field(default_factory=dict)
    samples: np.ndarray | None = None
    direction: int = 1  # -1 when the raw parametrization was clockwise
    mirrored: bool = False
    _spline: Any = field(default=None, repr=False, compare=False)

    @property
    def ccw(self) -> bool:
        return _signed_area(self) > 0

    def _raw(self, t: np.ndarray) -> tuple[np.ndarray, ...]:
        p = self.params
        if self.kind == "shifted-disk":
            cx, cy = p["center"]
            r = p["radius"]
            c, s = np.cos(t), np.sin(t)
            return cx + r * c, cy + r * s, -r * s, r * c, -r * c, -r * s
        if self.kind == "ellipse":
            cx, cy = p["shift"]
            a, b = p["a"], p["b"]
            c, s = np.cos(t), np.sin(t)
            return cx + a * c, cy + b * s, -a * s, b * c, -a * c, -b * s
        if self.kind == "fourier-perturbed-circle":
            cx, cy = p["center"]
            r0 = p["r0"]
            r, rp, rpp = r0 + 0 * t, 0 * t, 0 * t
            for k, ak in enumerate(p.get("cos", []), start=1):
                r = r + ak * np.cos(k * t)
                rp = rp - k * ak * np.sin(k * t)
                rpp = rpp - k * k * ak * np.cos(k * t)
            for k, bk in enumerate(p.get("sin", []), start=1):
                r = r + bk * np.sin(k * t)
                rp = rp + k * bk * np.cos(k * t)
                rpp = rpp - k * k * bk * np.sin(k * t)
            c, s = np.cos(t), np.sin(t)
            x, y = cx + r * c, cy + r * s
            xp, yp = rp * c - r * s, rp * s + r * c
            xpp = rpp * c - 2 * rp * s - r * c
            ypp = rpp * s + 2 * rp * c - r * s
            return x, y, xp, yp, xpp, ypp
        if self.kind == "sampled":
            sp = self._spline
            v0, v1, v2 = sp(t), sp(t, 1), sp(t, 2)
            return v0[..., 0], v0[..., 1], v1[..., 0], v1[..., 1], v2[..., 0], v2[..., 1]
        raise GeometryError(f"unknown curve kind {self.kind!r}")

    def evaluate(self, t) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        """Position, first and second derivative at parameter ``t``.

        Each output has shape ``t.shape + (2,)``.
        """
        t = np.asarray(t, dtype=float)
        d = self.direction
        x, y, xp, yp, xpp, ypp = self._raw(np.mod(d * t, 2 * np.pi))
        xp, yp = d * xp, d * yp
        if self.mirrored:
            x, xp, xpp = -x, -xp, -xpp
            # reflection flips orientation; traverse backwards to undo it
            # (handled by the caller through `direction`)
        pos = np.stack([x, y], axis=-1)
        return pos, np.stack([xp, yp], axis=-1), np.stack([xpp, ypp], axis=-1)

    def mirror(self) -> "ParamCurve":
        """Reflection x -> -x, re-oriented counterclockwise."""
        return _normalized(ParamCurve(self.kind, self.params, self.samples, -self.direction,
                                      not self.mirrored, self._spline))


def _signed_area(curve: ParamCurve, n: int = 4096) -> float:
    t = np.linspace(0, 2 * np.pi, n, endpoint=False)
    pos, der, _ = curve.evaluate(t)
    return 0.5 * float(np.mean(pos[:, 0] * der[:, 1] - pos[:, 1] * der[:, 0])) * 2 * np.pi


def _normalized(curve: ParamCurve) -> ParamCurve:
    if _signed_area(curve) < 0:
        curve = ParamCurve(curve.kind, curve.params, curve.samples, -curve.direction,
                           curve.mirrored, curve._spline)
    return curve


def shifted_disk(center=(1.0, 0.0), radius: float = 1.0) -> ParamCurve:
    if radius <= 0:
        raise GeometryError("shifted-disk: radius must be positive")
    return _normalized(ParamCurve("shifted-disk", {"center": tuple(map(float, center)),
                                                   "radius": float(radius)}))


def ellipse(a: float = 1.5, b: float = 1.0, shift=(1.5, 0.0)) -> ParamCurve:
    if a <= 0 or b <= 0:
        raise GeometryError("ellipse: semi-axes must be positive")
    return _normalized(ParamCurve("ellipse", {"a": float(a), "b": float(b),
                                              "shift": tuple(map(float, shift))}))


def fourier_circle(r0: float = 1.0, cos=(), sin=(), center=(1.0, 0.0)) -> ParamCurve:
    """Star-shaped curve r(t) = r0 + sum a_k cos(kt) + b_k sin(kt) about ``center``."""
    cos, sin = tuple(map(float, cos)), tuple(map(float, sin))
    if r0 - sum(map(abs, cos)) - sum(map(abs, sin)) <= 0:
        raise GeometryError("fourier-perturbed-circle: radius function must stay positive")
    return _normalized(ParamCurve("fourier-perturbed-circle",
                                  {"r0": float(r0), "cos": cos, "sin": sin,
                                   "center": tuple(map(float, center))}))


def sampled_curve(samples) -> ParamCurve:
    """Periodic quintic spline through rows (t, x, y); first and last rows must coincide."""
    samples = np.asarray(samples, dtype=float)
    if samples.ndim != 2 or samples.shape[1] != 3 or len(samples) < 8:
        raise GeometryError("sampled: need an (N, 3) table of (t, x, y) with N >= 8")
    t = samples[:, 0]
    if np.any(np.diff(t) <= 0):
        raise GeometryError("sampled: parameter column must be strictly increasing")
    if np.linalg.norm(samples[0, 1:] - samples[-1, 1:]) > 1e-12:
        raise GeometryError("sampled: curve is not closed (first and last points differ)")
    tt = (t - t[0]) * (2 * np.pi / (t[-1] - t[0]))
    pts = samples[:, 1:].copy()
    pts[-1] = pts[0]
    spline = make_interp_spline(tt, pts, k=5, bc_type="periodic")
    curve = ParamCurve("sampled", {}, samples, 1, False, spline)
    return _normalized(curve)


def curve_from_config(cfg: dict) -> ParamCurve:
    """Build a curve from a nested config such as ``{"kind": "ellipse", "a": 1.5}``."""
    kind = cfg.get("kind")
    if kind == "shifted-disk":
        return shifted_disk(cfg.get("center", (1.0, 0.0)), cfg.get("radius", 1.0))
    if kind == "ellipse":
        return ellipse(cfg.get("a", 1.5), cfg.get("b", 1.0), cfg.get("shift", (cfg.get("a", 1.5), 0.0)))
    if kind == "fourier-perturbed-circle":
        return fourier_circle(cfg.get("r0", 1.0), cfg.get("cos", ()), cfg.get("sin", ()),
                              cfg.get("center", (1.0, 0.0)))
    if kind == "sampled":
        return sampled_curve(cfg["samples"])
    raise GeometryError(f"domain.kind must be one of {KINDS}, got {kind!r}")


PRESETS = {
    "disk": {"kind": "shifted-disk", "center": [1.0, 0.0], "radius": 1.0},
    "disk2": {"kind": "shifted-disk", "center": [2.0, 0.0], "radius": 2.0},
    "ellipse": {"kind": "ellipse", "a": 1.5, "b": 1.0, "shift": [1.5, 0.0]},
    "fourier": {"kind": "fourier-perturbed-circle", "r0": 1.0, "cos": [0.0, 0.08], "sin": [0.0, 0.0, 0.03],
                "center": [1.0, 0.0]},
}


def _check_curve(curve: ParamCurve, n: int = 2048) -> None:
    t = np.linspace(0, 2 * np.pi, n, endpoint=False)
    pos, der, _ = curve.evaluate(t)
    if np.min(np.hypot(der[:, 0], der[:, 1])) < 1e-10:
        raise GeometryError("degenerate speed: |gamma'| < 1e-10 somewhere on the curve")
    if not LinearRing(pos).is_simple:
        raise GeometryError("curve is not simple (self-intersection detected)")


def _newton_extremum(curve: ParamCurve, t: float, iters: int = 30) -> float:
    # stationary point of x(t)
    for _ in range(iters):
        _, d1, d2 = curve.evaluate(t)
        if d2[0] == 0:
            break
        step = d1[0] / d2[0]
        t -= step
        if abs(step) < 1e-15:
            break
    return float(np.mod(t, 2 * np.pi))


@dataclass(frozen=True)
class ArcLengthTable:
    """Arc-length reparametrization centred at the leftmost point.

    Attributes ``s``, ``xy``, ``normal``, ``kappa`` hold the uniform node
    table; the methods evaluate the same quantities at arbitrary s.
    """

    curve: ParamCurve
    s: np.ndarray
    xy: np.ndarray
    normal: np.ndarray
    kappa: np.ndarray
    L: float
    t0: float
    origin: np.ndarray
    kappa_max: float
    _ell: Any = field(repr=False, compare=False)
    _inv: Any = field(repr=False, compare=False)

    @property
    def delta_max(self) -> float:
        return DELTA_SAFETY / self.kappa_max

    def param_of(self, s) -> np.ndarray:
        """Curve parameter t(s), with s periodic of period 2L."""
        s = np.asarray(s, dtype=float)
        sig = np.mod(s, 2 * self.L)
        tau = self._inv(sig)
        for _ in range(4):
            _, d1, _ = self.curve.evaluate(self.t0 + tau)
            tau = tau - (self._ell(tau) - sig) / np.hypot(d1[..., 0], d1[..., 1])
        return self.t0 + tau

    def frame(self, s):
        """Return (gamma(s), outward normal n(s), kappa(s))."""
        t = self.param_of(s)
        pos, d1, d2 = self.curve.evaluate(t)
        speed = np.hypot(d1[..., 0], d1[..., 1])
        tang = d1 / speed[..., None]
        nrm = np.stack([tang[..., 1], -tang[..., 0]], axis=-1)
        kap = (d1[..., 0] * d2[..., 1] - d1[..., 1] * d2[..., 0]) / speed**3
        return pos - self.origin, nrm, kap

    def gamma(self, s):
        return self.frame(s)[0]

    def kappa_at(self, s):
        return self.frame(s)[2]

    def gamma1_n1(self, s):
        """First components gamma_1(s) and n_1(s), as needed by the tube potential."""
        g, n, _ = self.frame(s)
        return g[..., 0], n[..., 0]


def arclength_reparametrize(curve: ParamCurve, n_nodes: int = 1024) -> ArcLengthTable:
    """Tabulate gamma, n and kappa on a uniform arc-length grid.

    Parameters
    ----------
    curve : ParamCurve
        Closed simple curve (checked).
    n_nodes : int
        Number of table nodes, at least 64.

    Returns
    -------
    ArcLengthTable
        Nodes s_k = -L + 2L k / n_nodes; s = 0 is the leftmost point, which
        sits at the origin.
    """
    if n_nodes < 64:
        raise GeometryError("arclength_reparametrize: n_nodes must be >= 64")
    _check_curve(curve)
    tg = np.linspace(0, 2 * np.pi, _DENSE + 1)
    pos, _, _ = curve.evaluate(tg)
    t0 = _newton_extremum(curve, tg[np.argmin(pos[:, 0])])
    # arc length from t0, tau = t - t0 in [0, 2 pi]
    tau = tg
    _, d1, _ = curve.evaluate(t0 + tau)
    speed = np.hypot(d1[:, 0], d1[:, 1])
    ell = cumulative_simpson(speed, x=tau, initial=0.0)
    ell_fn = CubicHermiteSpline(tau, ell, speed)
    inv = PchipInterpolator(ell, tau)
    L = 0.5 * float(ell[-1])
    origin = curve.evaluate(t0)[0]
    table_stub = ArcLengthTable(curve, np.empty(0), np.empty((0, 2)), np.empty((0, 2)), np.empty(0),
                                L, t0, origin, 1.0, ell_fn, inv)
    s = -L + 2 * L * np.arange(n_nodes) / n_nodes
    xy, nrm, kap = table_stub.frame(s)
    # curvature extrema may fall between nodes; use the dense grid too
    _, dd1, dd2 = curve.evaluate(tg)
    sp = np.hypot(dd1[:, 0], dd1[:, 1])
    kdense = (dd1[:, 0] * dd2[:, 1] - dd1[:, 1] * dd2[:, 0]) / sp**3
    kmax = float(max(np.max(np.abs(kdense)), np.max(np.abs(kap))))
    return ArcLengthTable(curve, s, xy, nrm, kap, L, t0, origin, kmax, ell_fn, inv)


@dataclass(frozen=True)
class GeometrySummary:
    A0: tuple[float, float]
    kappa0: float
    A1: tuple[float, float]
    kappa1: float
    x1_min: float
    x1_max: float
    half_length_L: float
    delta_max: float
    s1: float
    unique_min: bool
    unique_max: bool

    @property
    def left_ok(self) -> bool:
        """Unique leftmost point with positive curvature."""
        return self.unique_min and self.kappa0 > 1e-8

    @property
    def right_ok(self) -> bool:
        """Unique rightmost point with positive curvature."""
        return self.unique_max and self.kappa1 > 1e-8

    def to_dict(self) -> dict:
        d = {k: getattr(self, k) for k in self.__dataclass_fields__}
        d["A0"], d["A1"] = list(self.A0), list(self.A1)
        d["left_ok"], d["right_ok"] = self.left_ok, self.right_ok
        return d


def _count_wells(x: np.ndarray, level: float, tol: float, sign: int) -> int:
    # number of separate runs of discrete local extrema within tol of `level`
    v = sign * x
    lv = sign * level
    loc = (v <= np.roll(v, 1)) & (v <= np.roll(v, -1)) & (v - lv <= tol)
    if loc.all():
        return 1
    idx = np.flatnonzero(loc)
    if len(idx) == 0:
        return 0
    # contiguous runs on the cycle, joined across the wrap-around
    breaks = np.count_nonzero(np.diff(idx) > 1)
    runs = breaks + 1
    if runs > 1 and idx[0] == 0 and idx[-1] == len(x) - 1:
        runs -= 1
    return runs


def locate_extremal_points(table: ArcLengthTable) -> GeometrySummary:
    """Leftmost/rightmost boundary points, their curvatures and assumption flags."""
    curve = table.curve
    x = table.xy[:, 0]
    span = float(x.max() - x.min())
    tol = _UNIQUE_RTOL * span
    t1 = _newton_extremum(curve, float(table.param_of(table.s[np.argmax(x)])))
    A1 = curve.evaluate(t1)[0] - table.origin
    s1 = float(table._ell(np.mod(t1 - table.t0, 2 * np.pi)))
    if s1 >= table.L:
        s1 -= 2 * table.L
    kappa0 = float(table.kappa_at(0.0))
    kappa1 = float(table.kappa_at(s1))
    x1_max = float(A1[0])
    return GeometrySummary(
        A0=(0.0, 0.0), kappa0=kappa0, A1=(float(A1[0]), float(A1[1])), kappa1=kappa1,
        x1_min=0.0, x1_max=x1_max, half_length_L=table.L, delta_max=table.delta_max, s1=s1,
        unique_min=_count_wells(x, 0.0, tol, 1) == 1,
        unique_max=_count_wells(x, x1_max, tol, -1) == 1,
    )


def tubular_map(table: ArcLengthTable, s, t) -> np.ndarray:
    """Gamma(s, t) = gamma(s) - t n(s) for |t| < delta_max."""
    t = np.asarray(t, dtype=float)
    if np.any(np.abs(t) >= table.delta_max):
        raise GeometryError(f"tubular_map: |t| must be < delta_max = {table.delta_max:.6g}")
    g, n, _ = table.frame(s)
    return g - t[..., None] * n


def tube_x1(table: ArcLengthTable, s, t):
    """First component gamma_1(s) - t n_1(s); ``t`` may be complex (analytic continuation)."""
    g1, n1 = table.gamma1_n1(s)
    return g1 - np.asarray(t) * n1


@dataclass(frozen=True)
class Domain:
    """Curve together with its arc-length table and summary."""

    curve: ParamCurve
    table: ArcLengthTable
    summary: GeometrySummary
    domain_id: str = "custom"

    def mirrored(self) -> "Domain":
        return build_domain(self.curve.mirror(), domain_id=self.domain_id + "-mirrored")


def build_domain(curve: ParamCurve, n_nodes: int = 1024, domain_id: str = "custom") -> Domain:
    table = arclength_reparametrize(curve, n_nodes)
    return Domain(curve, table, locate_extremal_points(table), domain_id)


def preset_domain(name: str, n_nodes: int = 1024) -> Domain:
    if name not in PRESETS:
        raise GeometryError(f"unknown preset {name!r}; choose from {sorted(PRESETS)}")
    return build_domain(curve_from_config(PRESETS[name]), n_nodes, domain_id=name)
