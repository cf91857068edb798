"""Finite-difference assemblies of the Cartesian, scaled-tube and model operators.

All three return a :class:`BandedComplexMatrix`.  Grids are cell-centred in
the sense that unknowns sit strictly inside the domain and Dirichlet values
live on the boundary or at the first node outside it.
"""
from __future__ import annotations

import math
import struct
from dataclasses import dataclass, field
from typing import Callable

import numpy as np
import scipy.sparse as sp

from .geometry import Domain
from .model import ModelParams
from .special import airy_ai, airy_zero

MERGE_ARM = 1e-3
MAX_CARTESIAN_NODES = 10**6

# admissible rectangle for the scaling parameter: Re in (-THETA0, ETA), Im in (-BETA0, ETA)
THETA0 = 1.0
BETA0 = math.pi / 4
ETA = 0.1

_DUMP_MAGIC = b"BTBAND01"


class AssemblyError(ValueError):
    pass


# --------------------------------------------------------------------------- band storage


@dataclass
class BandedComplexMatrix:
    """Square complex matrix stored by diagonals.

    ``diags[k, i]`` holds A[i, i + offsets[k]] (zero where the column falls
    outside the matrix).  Only structurally nonzero diagonals are stored, so
    a 5-point stencil costs five rows whatever the bandwidth.
    """

    dim: int
    lower_bw: int
    upper_bw: int
    offsets: np.ndarray
    diags: np.ndarray
    meta: dict = field(default_factory=dict)
    _csr: sp.csr_matrix | None = field(default=None, repr=False, compare=False)

    @classmethod
    def from_sparse(cls, M, meta: dict | None = None) -> "BandedComplexMatrix":
        M = sp.coo_matrix(M)
        n = M.shape[0]
        if M.shape != (n, n):
            raise AssemblyError("matrix must be square")
        off = M.col.astype(np.int64) - M.row.astype(np.int64)
        keep = M.data != 0
        offsets = np.unique(off[keep]) if keep.any() else np.array([0])
        diags = np.zeros((len(offsets), n), dtype=complex)
        k = np.searchsorted(offsets, off[keep])
        np.add.at(diags, (k, M.row[keep]), M.data[keep])
        lo = int(max(0, -offsets.min()))
        hi = int(max(0, offsets.max()))
        return cls(n, lo, hi, offsets.astype(np.int64), diags, dict(meta or {}))

    def to_sparse(self) -> sp.csr_matrix:
        if self._csr is None:
            rows, cols, vals = [], [], []
            idx = np.arange(self.dim)
            for o, d in zip(self.offsets, self.diags):
                j = idx + o
                ok = (j >= 0) & (j < self.dim) & (d != 0)
                rows.append(idx[ok])
                cols.append(j[ok])
                vals.append(d[ok])
            self._csr = sp.csr_matrix((np.concatenate(vals), (np.concatenate(rows), np.concatenate(cols))),
                                      shape=(self.dim, self.dim))
        return self._csr

    def matvec(self, x: np.ndarray) -> np.ndarray:
        return self.to_sparse() @ x

    def to_dense(self) -> np.ndarray:
        return self.to_sparse().toarray()

    def lapack_bands(self, extra_lower: int = 0) -> np.ndarray:
        """LAPACK general-band layout ab[ku + i - j, j] with ``extra_lower`` spare rows on top."""
        kl, ku = self.lower_bw, self.upper_bw
        ab = np.zeros((extra_lower + kl + ku + 1, self.dim), dtype=complex)
        idx = np.arange(self.dim)
        for o, d in zip(self.offsets, self.diags):
            j = idx + o
            ok = (j >= 0) & (j < self.dim)
            ab[extra_lower + ku - o, j[ok]] = d[ok]
        return ab

    def is_symmetric(self, rtol: float = 1e-12) -> bool:
        A = self.to_sparse()
        diff = abs(A - A.T).max() if self.dim else 0.0
        return diff <= rtol * max(abs(A).max(), 1.0)

    def dump(self, path) -> None:
        """Header (magic, dim, kl, ku, ndiag, offsets) then little-endian (re, im) float64 pairs."""
        with open(path, "wb") as fh:
            fh.write(_DUMP_MAGIC)
            fh.write(struct.pack("<qqqq", self.dim, self.lower_bw, self.upper_bw, len(self.offsets)))
            fh.write(np.asarray(self.offsets, dtype="<i8").tobytes())
            fh.write(np.ascontiguousarray(self.diags).astype("<c16").view("<f8").tobytes())

    @classmethod
    def load(cls, path) -> "BandedComplexMatrix":
        with open(path, "rb") as fh:
            if fh.read(8) != _DUMP_MAGIC:
                raise AssemblyError(f"{path}: not a banded matrix dump")
            dim, kl, ku, nd = struct.unpack("<qqqq", fh.read(32))
            offsets = np.frombuffer(fh.read(8 * nd), dtype="<i8").astype(np.int64)
            data = np.frombuffer(fh.read(16 * nd * dim), dtype="<f8")
        diags = data.view("<c16").reshape(nd, dim).astype(complex)
        return cls(int(dim), int(kl), int(ku), offsets, diags)


def _sparse_tridiag(lower, diag, upper) -> sp.csr_matrix:
    return sp.diags([lower, diag, upper], [-1, 0, 1], format="csr")


# --------------------------------------------------------------------------- Cartesian grid


@dataclass
class GridSpec2D:
    """Uniform grid with inside mask and Shortley-Weller arms (in grid units)."""

    x: np.ndarray
    y: np.ndarray
    mask: np.ndarray  # (nx, ny) bool
    arms: np.ndarray  # (4, nx, ny): east, west, north, south, in (0, 1]
    merged: int = 0

    @property
    def nx(self) -> int:
        return len(self.x)

    @property
    def ny(self) -> int:
        return len(self.y)

    @property
    def dx(self) -> float:
        return float(self.x[1] - self.x[0])

    @property
    def dy(self) -> float:
        return float(self.y[1] - self.y[0])


def rectangle_grid(nx: int, ny: int, width: float, height: float, origin=(0.0, 0.0)) -> GridSpec2D:
    """Full rectangle with Dirichlet walls one spacing beyond the outer nodes."""
    x = origin[0] + width * np.arange(1, nx + 1) / (nx + 1)
    y = origin[1] + height * np.arange(1, ny + 1) / (ny + 1)
    return GridSpec2D(x, y, np.ones((nx, ny), bool), np.ones((4, nx, ny)))


def _line_crossings(pos: np.ndarray, curve_eval, axis: int, levels: np.ndarray, t: np.ndarray):
    """Parameter values where coordinate ``axis`` of the curve equals each level.

    Returns a list (one entry per level) of sorted crossing positions along
    the other axis.
    """
    c = pos[:, axis]
    other = 1 - axis
    out = []
    cn = np.roll(c, -1)
    tn = np.roll(t, -1)
    tn[-1] += 2 * np.pi
    for lev in levels:
        k = np.flatnonzero(((c - lev) * (cn - lev) < 0) | ((c - lev) == 0))
        if len(k) == 0:
            out.append(np.empty(0))
            continue
        ta, tb = t[k], tn[k]
        fa, fb = c[k] - lev, cn[k] - lev
        with np.errstate(divide="ignore", invalid="ignore"):
            tt = np.where(fb != fa, ta - fa * (tb - ta) / (fb - fa), ta)
        for _ in range(6):
            p, d1, _ = curve_eval(tt)
            with np.errstate(divide="ignore", invalid="ignore"):
                step = np.where(d1[:, axis] != 0, (p[:, axis] - lev) / d1[:, axis], 0.0)
            tt = np.clip(tt - step, ta, tb)
        p, _, _ = curve_eval(tt)
        out.append(np.sort(p[:, other]))
    return out


def cartesian_grid(domain: Domain, nx: int, ny: int) -> GridSpec2D:
    """Grid over the bounding box of the domain with exact curve crossings."""
    if nx * ny > MAX_CARTESIAN_NODES:
        raise AssemblyError(f"nx*ny = {nx * ny} exceeds {MAX_CARTESIAN_NODES}")
    curve, table = domain.curve, domain.table
    t = np.linspace(0, 2 * np.pi, 1 << 13, endpoint=False)

    def ev(tt):
        p, d1, d2 = curve.evaluate(tt)
        return p - table.origin, d1, d2

    pos = ev(t)[0]
    x0, x1 = pos[:, 0].min(), pos[:, 0].max()
    y0, y1 = pos[:, 1].min(), pos[:, 1].max()
    x = x0 + (x1 - x0) * np.arange(1, nx + 1) / (nx + 1)
    y = y0 + (y1 - y0) * np.arange(1, ny + 1) / (ny + 1)
    dx, dy = x[1] - x[0], y[1] - y[0]
    rows = _line_crossings(pos, ev, 1, y, t)  # x-positions of crossings along each row
    cols = _line_crossings(pos, ev, 0, x, t)
    mask_r = np.zeros((nx, ny), bool)
    mask_c = np.zeros((nx, ny), bool)
    for j, xc in enumerate(rows):
        mask_r[:, j] = np.searchsorted(xc, x) % 2 == 1
    for i, yc in enumerate(cols):
        mask_c[i, :] = np.searchsorted(yc, y) % 2 == 1
    mask = mask_r & mask_c
    arms = np.ones((4, nx, ny))
    for j, xc in enumerate(rows):
        ii = np.flatnonzero(mask[:, j])
        if len(ii) == 0:
            continue
        k = np.searchsorted(xc, x[ii])
        east = xc[np.minimum(k, len(xc) - 1)]
        west = xc[np.maximum(k - 1, 0)]
        arms[0, ii, j] = np.minimum((east - x[ii]) / dx, 1.0)
        arms[1, ii, j] = np.minimum((x[ii] - west) / dx, 1.0)
    for i, yc in enumerate(cols):
        jj = np.flatnonzero(mask[i, :])
        if len(jj) == 0:
            continue
        k = np.searchsorted(yc, y[jj])
        north = yc[np.minimum(k, len(yc) - 1)]
        south = yc[np.maximum(k - 1, 0)]
        arms[2, i, jj] = np.minimum((north - y[jj]) / dy, 1.0)
        arms[3, i, jj] = np.minimum((y[jj] - south) / dy, 1.0)
    arms = np.where(mask[None], np.clip(arms, 0.0, 1.0), 1.0)
    # nodes hugging the boundary are merged into it; their neighbours then
    # see a Dirichlet value one full spacing away, which is off by < 1e-3 dx
    tiny = mask & (arms.min(axis=0) < MERGE_ARM)
    merged = int(tiny.sum())
    mask = mask & ~tiny
    return GridSpec2D(x, y, mask, arms, merged)


def assemble_cartesian(domain: Domain | None, params: ModelParams, grid: GridSpec2D,
                       potential: Callable | None = None) -> BandedComplexMatrix:
    """-h^2 Laplacian (Shortley-Weller at cut nodes) + e^{i alpha} x1, Dirichlet.

    Parameters
    ----------
    domain : Domain or None
        Only used for metadata; the geometry enters through ``grid``.
    params : ModelParams
    grid : GridSpec2D
    potential : callable, optional
        ``potential(X, Y)`` replacing e^{i alpha} x1 (oracle tests only).
    """
    nx, ny = grid.nx, grid.ny
    mask = grid.mask
    if not mask.any():
        raise AssemblyError("empty grid mask")
    # the shorter axis runs fastest, so the bandwidth is min(nx, ny)
    fast_y = ny <= nx
    order = np.full((nx, ny), -1, dtype=np.int64)
    if fast_y:
        order[mask] = np.arange(mask.sum())
    else:
        order.T[mask.T] = np.arange(mask.sum())
    dims = [grid.dx, grid.dx, grid.dy, grid.dy]
    steps = [(1, 0), (-1, 0), (0, 1), (0, -1)]
    I, J = np.nonzero(mask)
    P = order[I, J]
    arm = grid.arms[:, I, J] * np.array(dims)[:, None]  # physical lengths
    isolated = np.ones(len(P), bool)
    rows, cols, vals = [P], [P], []
    diag = np.zeros(len(P), dtype=complex)
    h2 = params.h**2
    for axis in (0, 1):
        a_plus, a_minus = arm[2 * axis], arm[2 * axis + 1]
        diag += 2 * h2 / (a_plus * a_minus)
        for side, a_this, a_other in ((2 * axis, a_plus, a_minus), (2 * axis + 1, a_minus, a_plus)):
            di, dj = steps[side]
            ni, nj = I + di, J + dj
            inb = (ni >= 0) & (ni < nx) & (nj >= 0) & (nj < ny)
            q = np.full(len(P), -1, dtype=np.int64)
            q[inb] = order[ni[inb], nj[inb]]
            # a cut arm means the neighbour is outside: Dirichlet value, no coupling
            link = (q >= 0) & (grid.arms[side, I, J] >= 1.0)
            isolated &= ~link
            rows.append(P[link])
            cols.append(q[link])
            vals.append((-2 * h2 / (a_this * (a_this + a_other)))[link])
    if isolated.any() and mask.sum() > 1:
        i0 = int(np.flatnonzero(isolated)[0])
        raise AssemblyError(f"isolated interior node at grid index ({I[i0]}, {J[i0]})")
    X, Y = grid.x[I], grid.y[J]
    if potential is None:
        diag += np.exp(1j * params.alpha) * X
    else:
        diag += potential(X, Y)
    data = np.concatenate([diag] + vals)
    n = int(mask.sum())
    A = sp.csr_matrix((data, (np.concatenate(rows), np.concatenate(cols))), shape=(n, n))
    meta = {"kind": "cartesian", "nx": nx, "ny": ny, "dx": grid.dx, "dy": grid.dy,
            "merged_nodes": grid.merged, "h": params.h, "alpha": params.alpha,
            "domain": getattr(domain, "domain_id", None)}
    out = BandedComplexMatrix.from_sparse(A, meta)
    out.meta["nodes"] = (I, J)
    return out


# --------------------------------------------------------------------------- complex scaling


_GL_X, _GL_W = np.polynomial.legendre.leggauss(60)


def _smooth_step(y):
    # 0 for y <= 0, 1 for y >= 1, C-infinity in between
    y = np.clip(np.asarray(y, float), 0.0, 1.0)
    with np.errstate(divide="ignore", over="ignore"):
        a = np.where(y > 0, np.exp(-1.0 / np.where(y > 0, y, 1.0)), 0.0)
        b = np.where(y < 1, np.exp(-1.0 / np.where(y < 1, 1.0 - y, 1.0)), 0.0)
    return a / (a + b)


def _smooth_step_integral(y):
    # int_0^y smooth_step, y in [0, 1]
    y = np.clip(np.asarray(y, float), 0.0, 1.0)
    nodes = y[..., None] * (1 + _GL_X) / 2
    return y / 2 * (_smooth_step(nodes) @ _GL_W)


@dataclass(frozen=True)
class ScalingProfile:
    """Cutoff chi on [0, delta] used in J(u) = u exp(theta chi(u)).

    ``kind='ramp'``: chi(0) = 1, chi(delta) = 0, flat ends, |chi'| <= 1/((1-c) delta).
    ``kind='constant'``: chi = 1 (uniform rotation up to the wall).
    """

    kind: str = "ramp"
    delta: float = 0.9
    c: float = 0.1

    def _plateau(self, x):
        c = self.c
        return _smooth_step(x / c) * _smooth_step((1 - x) / c)

    def _plateau_integral(self, x):
        c = self.c
        x = np.clip(np.asarray(x, float), 0.0, 1.0)
        left = c * _smooth_step_integral(x / c)
        mid = c / 2 + (x - c)
        right = (1 - c) - c * _smooth_step_integral((1 - x) / c)
        return np.where(x < c, left, np.where(x < 1 - c, mid, right))

    def chi(self, u):
        u = np.asarray(u, float)
        if self.kind == "constant":
            return np.ones_like(u)
        return 1.0 - self._plateau_integral(u / self.delta) / (1 - self.c)

    def dchi(self, u):
        u = np.asarray(u, float)
        if self.kind == "constant":
            return np.zeros_like(u)
        x = np.clip(u / self.delta, 0.0, 1.0)
        return -self._plateau(x) / ((1 - self.c) * self.delta)

    @property
    def chi_prime_bound(self) -> float:
        return 0.0 if self.kind == "constant" else 1.0 / ((1 - self.c) * self.delta)


def check_theta(theta: complex) -> None:
    """Reject theta outside the admissible rectangle, naming the violated inequality."""
    if not theta.real > -THETA0:
        raise AssemblyError(f"theta={theta}: violates Re(theta) > -{THETA0}")
    if not theta.real < ETA:
        raise AssemblyError(f"theta={theta}: violates Re(theta) < eta={ETA}")
    if not theta.imag > -BETA0:
        raise AssemblyError(f"theta={theta}: violates Im(theta) > -beta0 = -pi/4")
    if not theta.imag < ETA:
        raise AssemblyError(f"theta={theta}: violates Im(theta) < eta={ETA}")


@dataclass(frozen=True)
class TubeGridSpec:
    """Tube grid (s, u) in [-s0, s0] x (0, delta), interior nodes only."""

    s0: float
    n_s: int
    n_u: int
    delta: float
    theta: complex
    chi_profile: str = "ramp"

    @property
    def ds(self) -> float:
        return 2 * self.s0 / (self.n_s + 1)

    @property
    def du(self) -> float:
        return self.delta / (self.n_u + 1)

    @property
    def s_nodes(self) -> np.ndarray:
        return -self.s0 + self.ds * np.arange(1, self.n_s + 1)

    @property
    def u_nodes(self) -> np.ndarray:
        return self.du * np.arange(1, self.n_u + 1)

    @property
    def profile(self) -> ScalingProfile:
        return ScalingProfile(self.chi_profile, self.delta)

    def J(self, u):
        p = self.profile
        return u * np.exp(self.theta * p.chi(u))

    def Jp(self, u):
        p = self.profile
        return (1 + self.theta * u * p.dchi(u)) * np.exp(self.theta * p.chi(u))

    def refined(self, factor: int = 2) -> "TubeGridSpec":
        """Same box with spacings divided by ``factor``."""
        return TubeGridSpec(self.s0, factor * (self.n_s + 1) - 1, factor * (self.n_u + 1) - 1,
                            self.delta, self.theta, self.chi_profile)

    def with_s0(self, s0: float) -> "TubeGridSpec":
        """Different half-width, same s spacing."""
        n_s = max(3, int(round(2 * s0 / self.ds)) - 1)
        return TubeGridSpec(s0, n_s, self.n_u, self.delta, self.theta, self.chi_profile)


# nodes per natural length scale
PTS_PER_U_SCALE = 12
PTS_PER_S_SCALE = 10


def default_tube(domain: Domain, params: ModelParams, grid_scale: float = 1.0,
                 theta: complex | None = None, chi_profile: str = "ramp",
                 s0: float | None = None, delta: float | None = None) -> TubeGridSpec:
    """Tube grid resolving h^{2/3} in u and h^{1/2} in s."""
    h = params.h
    L = domain.summary.half_length_L
    if delta is None:
        delta = domain.summary.delta_max
    if s0 is None:
        s0 = min(L / 2, 10 * h ** 0.45)
    if theta is None:
        theta = -1j * params.alpha / 3
    sigma = h**0.5 * (2 / domain.summary.kappa0) ** 0.25
    n_u = int(math.ceil(PTS_PER_U_SCALE * grid_scale * delta / h ** (2 / 3)))
    n_s = int(math.ceil(PTS_PER_S_SCALE * grid_scale * 2 * s0 / sigma))
    return TubeGridSpec(float(s0), n_s, n_u, float(delta), complex(theta), chi_profile)


def _d4(fn, x, e):
    # fourth-order centred first derivative
    return (fn(x - 2 * e) - 8 * fn(x - e) + 8 * fn(x + e) - fn(x + 2 * e)) / (12 * e)


def tube_coefficients(domain: Domain, params: ModelParams, tube: TubeGridSpec):
    """Nodal and half-node coefficients of the scaled operator.

    Returns a dict with the grid, the flux coefficients and the potential.
    """
    table = domain.table
    s, u = tube.s_nodes, tube.u_nodes
    ds, du = tube.ds, tube.du
    sh = -tube.s0 + ds * (np.arange(tube.n_s + 1) + 0.5)
    uh = du * (np.arange(tube.n_u + 1) + 0.5)
    kap_h = table.kappa_at(sh)
    J, Jp = tube.J, tube.Jp
    # m^{-2} on s half-nodes, J'^{-2} on u half-nodes
    a_s = (1 - J(u)[None, :] * kap_h[:, None]) ** -2
    a_u = Jp(uh) ** -2
    g1, n1 = table.gamma1_n1(s)
    Ju = J(u)
    pot = np.exp(1j * params.alpha) * (g1[:, None] - Ju[None, :] * n1[:, None])
    # h^2 V with V = [d_s(m^-2 d_s Y) + d_u(J'^-2 d_u Y)] / Y, Y = sqrt(m J')
    es, eu = ds / 2, du / 2
    kshift = {k: table.kappa_at(s + k * es) for k in range(-4, 5)}

    def Ys(k):
        return np.sqrt((1 - Ju[None, :] * kshift[k][:, None]) * Jp(u)[None, :])

    def ms2(k):
        return (1 - Ju[None, :] * kshift[k][:, None]) ** -2

    def dYs(k):
        return (Ys(k - 2) - 8 * Ys(k - 1) + 8 * Ys(k + 1) - Ys(k + 2)) / (12 * es)

    flux_s = {k: ms2(k) * dYs(k) for k in (-2, -1, 1, 2)}
    Vs = (flux_s[-2] - 8 * flux_s[-1] + 8 * flux_s[1] - flux_s[2]) / (12 * es)
    kap = kshift[0][:, None]

    def Yu(uu):
        return np.sqrt((1 - J(uu)[None, :] * kap) * Jp(uu)[None, :])

    def flux_u(uu):
        return Jp(uu)[None, :] ** -2 * _d4(Yu, uu, eu)

    Vu = _d4(flux_u, u, eu)
    Y0 = Ys(0)
    V = (Vs + Vu) / Y0
    m_nodes = 1 - Ju[None, :] * kshift[0][:, None]
    return dict(s=s, u=u, a_s=a_s, a_u=a_u, pot=pot, V=V, m=m_nodes, Jp_half=Jp(uh))


def assemble_scaled_tube(domain: Domain, params: ModelParams, tube: TubeGridSpec) -> BandedComplexMatrix:
    """Complex-scaled operator in boundary coordinates on the truncated tube.

    -h^2 d_s(m^{-2} d_s) - h^2 d_u(J'^{-2} d_u) + e^{i alpha} Gamma_1(s, J(u)) + h^2 V,
    Dirichlet on all four sides; unknowns ordered with u running fastest.
    """
    check_theta(tube.theta)
    if not 0 < tube.delta <= domain.summary.delta_max + 1e-12:
        raise AssemblyError(f"tube delta={tube.delta} must lie in (0, delta_max={domain.summary.delta_max:.6g}]")
    if tube.s0 > domain.summary.half_length_L + 1e-12:
        raise AssemblyError("tube s0 exceeds the half-length L")
    if tube.chi_profile not in ("ramp", "constant"):
        raise AssemblyError(f"unknown chi_profile {tube.chi_profile!r}")
    c = tube_coefficients(domain, params, tube)
    re_a = np.real(c["Jp_half"] ** -2)
    if np.any(re_a <= 0):
        raise AssemblyError("Re(J'^{-2}) <= 0 at some tube node")
    if np.min(np.abs(c["m"])) <= 0:
        raise AssemblyError("weight m vanishes on the tube")
    h2 = params.h**2
    ns, nu = tube.n_s, tube.n_u
    ds2, du2 = tube.ds**2, tube.du**2
    a_s, a_u = c["a_s"], c["a_u"]
    # s-direction: -h^2 d_s(a_s d_s), a_s on half nodes (ns+1, nu)
    diag = h2 * (a_s[:-1] + a_s[1:]) / ds2
    off_s = -h2 * a_s[1:-1] / ds2  # coupling (i, i+1), shape (ns-1, nu)
    diag = diag + h2 * (a_u[:-1] + a_u[1:])[None, :] / du2
    off_u = -h2 * a_u[1:-1] / du2  # coupling (j, j+1), length nu-1
    diag = diag + c["pot"] + h2 * c["V"]
    n = ns * nu
    off_u_full = np.zeros((ns, nu), dtype=complex)
    off_u_full[:, :-1] = off_u[None, :]
    off_u_flat = off_u_full.ravel()[:-1]
    off_s_flat = off_s.ravel()
    A = sp.diags([diag.ravel(), off_u_flat, off_u_flat, off_s_flat, off_s_flat],
                 [0, 1, -1, nu, -nu], shape=(n, n), format="csr")
    meta = {"kind": "tube", "n_s": ns, "n_u": nu, "s0": tube.s0, "delta": tube.delta,
            "theta": [tube.theta.real, tube.theta.imag], "chi_profile": tube.chi_profile,
            "h": params.h, "alpha": params.alpha, "domain": domain.domain_id,
            "min_re_Jp2": float(re_a.min())}
    return BandedComplexMatrix.from_sparse(A, meta)


# --------------------------------------------------------------------------- model operator


def default_model_box(params: ModelParams, m_max: int = 2, n_max: int = 4) -> tuple[float, float]:
    """Box (S, U) with Airy and Gaussian tails below the 1e-12 level."""
    h, a = params.h, params.alpha
    if a >= math.pi:
        raise AssemblyError("model box: alpha must be < pi for a confining s-direction")
    U = h ** (2 / 3) * (airy_zero(m_max) + 10.0)
    w = math.cos(a / 2) * math.sqrt(params.kappa0 / 2)
    S = math.sqrt(h * (28.0 + 2 * (2 * n_max - 1)) / w)
    return S, U


def model_tails(params: ModelParams, S: float, U: float) -> tuple[float, float]:
    """Squared amplitudes of the ground state at the box walls."""
    h = params.h
    airy = float(airy_ai(U / h ** (2 / 3) - airy_zero(1)) / 0.5357) ** 2
    w = math.cos(params.alpha / 2) * math.sqrt(params.kappa0 / 2)
    gauss = math.exp(-w * S**2 / h)
    return airy, gauss


def model_1d(params: ModelParams, box: tuple[float, float], n_s: int, n_u: int):
    """The two 1D factors (Airy in u, oscillator in s) as sparse matrices."""
    S, U = box
    h, a = params.h, params.alpha
    ds = 2 * S / (n_s + 1)
    du = U / (n_u + 1)
    s = -S + ds * np.arange(1, n_s + 1)
    u = du * np.arange(1, n_u + 1)
    Au = np.exp(2j * a / 3) * _sparse_tridiag(-h**2 / du**2 * np.ones(n_u - 1),
                                              2 * h**2 / du**2 + u, -h**2 / du**2 * np.ones(n_u - 1))
    As = _sparse_tridiag(-h**2 / ds**2 * np.ones(n_s - 1),
                         2 * h**2 / ds**2 + np.exp(1j * a) * params.kappa0 * s**2 / 2,
                         -h**2 / ds**2 * np.ones(n_s - 1))
    return As.astype(complex), Au.astype(complex), s, u


def assemble_model(params: ModelParams, box: tuple[float, float] | None = None,
                   n_s: int = 300, n_u: int = 200) -> BandedComplexMatrix:
    """e^{2i alpha/3}(-h^2 d_u^2 + u) - h^2 d_s^2 + e^{i alpha} kappa0 s^2/2 on [-S, S] x [0, U]."""
    if box is None:
        box = default_model_box(params)
    As, Au, s, u = model_1d(params, box, n_s, n_u)
    A = sp.kron(As, sp.identity(n_u), format="csr") + sp.kron(sp.identity(n_s), Au, format="csr")
    airy, gauss = model_tails(params, *box)
    meta = {"kind": "model", "n_s": n_s, "n_u": n_u, "S": box[0], "U": box[1],
            "h": params.h, "alpha": params.alpha,
            "airy_tail": airy, "gauss_tail": gauss,
            "box_too_small": bool(airy > 1e-12 or gauss > 1e-12)}
    return BandedComplexMatrix.from_sparse(A, meta)
