"""Tensor quasimodes Airy(u) x Hermite(s) and their residuals."""
from __future__ import annotations

import cmath
import csv
import math
from dataclasses import dataclass

import numpy as np

from .assembly import (TubeGridSpec, _smooth_step, assemble_model, assemble_scaled_tube,
                       default_model_box)
from .geometry import Domain
from .model import ModelParams, mu_n
from .special import airy_ai, airy_ai_prime, airy_zero, hermite_fn

ETA = 0.1
MIN_NODES_PER_SCALE = 8


class QuasimodeError(ValueError):
    pass


@dataclass(frozen=True)
class ModelGrid:
    """Interior nodes of the box [-S, S] x [0, U] used by ``assemble_model``."""

    S: float
    U: float
    n_s: int
    n_u: int

    @property
    def s_nodes(self) -> np.ndarray:
        return -self.S + 2 * self.S / (self.n_s + 1) * np.arange(1, self.n_s + 1)

    @property
    def u_nodes(self) -> np.ndarray:
        return self.U / (self.n_u + 1) * np.arange(1, self.n_u + 1)

    @property
    def cell(self) -> float:
        return (2 * self.S / (self.n_s + 1)) * (self.U / (self.n_u + 1))


@dataclass
class QuasimodeField:
    s: np.ndarray
    u: np.ndarray
    values: np.ndarray  # (n_s, n_u), u fastest when flattened
    m: int
    n: int
    h: float
    alpha: float
    norm: float  # discrete L2 norm before normalization
    grid: object = None

    def flat(self) -> np.ndarray:
        return self.values.ravel()

    def to_csv(self, path) -> None:
        """Columns s, u, re, im."""
        S, U = np.meshgrid(self.s, self.u, indexing="ij")
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["s", "u", "re", "im"])
            for row in zip(S.ravel(), U.ravel(), self.values.real.ravel(), self.values.imag.ravel()):
                w.writerow([f"{v:.17g}" for v in row])


def hermite_argument_factor(alpha: float, kappa0: float) -> complex:
    """c with f_n(c s / sqrt(h)) solving the rotated oscillator; c^2 = e^{i alpha/2} sqrt(kappa0/2)."""
    return cmath.exp(0.25j * alpha) * (kappa0 / 2) ** 0.25


def quasimode_values(params: ModelParams, m: int, n: int, s: np.ndarray, u: np.ndarray) -> np.ndarray:
    """h^{-1/3} Ai(h^{-2/3} u - z_m)/|Ai'(-z_m)| * h^{-1/4} (k/2)^{1/8} f_n(c s/sqrt h)."""
    h = params.h
    zm = airy_zero(m)
    airy = h ** (-1 / 3) * airy_ai(u / h ** (2 / 3) - zm) / abs(airy_ai_prime(-zm))
    c = hermite_argument_factor(params.alpha, params.kappa0)
    herm = h**-0.25 * (params.kappa0 / 2) ** 0.125 * hermite_fn(n, c * s / math.sqrt(h))
    return np.outer(herm, airy)


def _check_resolution(params: ModelParams, ds: float, du: float) -> None:
    h = params.h
    need_u = h ** (2 / 3) / MIN_NODES_PER_SCALE
    sigma = math.sqrt(h) * (2 / params.kappa0) ** 0.25
    need_s = sigma / MIN_NODES_PER_SCALE
    if du > need_u or ds > need_s:
        raise QuasimodeError(
            f"grid under-resolved: need du <= {need_u:.4g} (have {du:.4g}) and ds <= {need_s:.4g} (have {ds:.4g})")


def build_quasimode(params: ModelParams, m: int, n: int, grid) -> QuasimodeField:
    """Nodal quasimode on a :class:`ModelGrid` or :class:`TubeGridSpec`, normalized to unit l2 norm.

    The l2 norm is weighted by the cell area so that it approximates the L2 norm.
    """
    if isinstance(grid, ModelGrid):
        s, u, cell = grid.s_nodes, grid.u_nodes, grid.cell
        ds, du = 2 * grid.S / (grid.n_s + 1), grid.U / (grid.n_u + 1)
    elif isinstance(grid, TubeGridSpec):
        s, u, cell = grid.s_nodes, grid.u_nodes, grid.ds * grid.du
        ds, du = grid.ds, grid.du
    else:
        raise QuasimodeError("grid must be a ModelGrid or TubeGridSpec")
    _check_resolution(params, ds, du)
    vals = quasimode_values(params, m, n, s, u)
    norm = float(np.sqrt(np.sum(np.abs(vals) ** 2) * cell))
    if norm == 0:
        raise QuasimodeError("quasimode vanishes on the grid")
    return QuasimodeField(s, u, vals / norm, m, n, params.h, params.alpha, norm, grid)


def _residual(A, psi: np.ndarray, mu: complex) -> float:
    v = psi.ravel()
    return float(np.linalg.norm(A.matvec(v) - mu * v) / np.linalg.norm(v))


def model_residual(psi: QuasimodeField, params: ModelParams, m: int | None = None, n: int | None = None,
                   mu: complex | None = None) -> float:
    """||(N_h - mu_{m,n}) psi|| / ||psi|| with N_h the discrete model operator on psi's grid."""
    grid = psi.grid
    if not isinstance(grid, ModelGrid):
        raise QuasimodeError("model_residual needs a quasimode built on a ModelGrid")
    m = psi.m if m is None else m
    n = psi.n if n is None else n
    if mu is None:
        mu = mu_n(params, m, n)
    A = assemble_model(params, (grid.S, grid.U), grid.n_s, grid.n_u)
    return _residual(A, psi.values, mu)


def default_model_grid(params: ModelParams, n_s: int = 300, n_u: int = 200) -> ModelGrid:
    S, U = default_model_box(params)
    return ModelGrid(S, U, n_s, n_u)


def cutoff_1d(x) -> np.ndarray:
    """Smooth even cutoff: 1 on |x| <= 1, 0 on |x| >= 2."""
    return 1.0 - _smooth_step(np.abs(np.asarray(x, float)) - 1.0)


def cutoff(params: ModelParams, s: np.ndarray, u: np.ndarray, eta: float = ETA) -> np.ndarray:
    """chi_h(s, u) = chi(h^{-1/3+eta} s) chi(h^{-2/3+eta} u)."""
    h = params.h
    return np.outer(cutoff_1d(h ** (-1 / 3 + eta) * s), cutoff_1d(h ** (-2 / 3 + eta) * u))


def tube_residual(params: ModelParams, domain: Domain, tube: TubeGridSpec, m: int = 1, n: int = 1,
                  eta: float = ETA, use_cutoff: bool = True) -> float:
    """||(M_h - mu_{m,n})(chi_h Psi)|| / ||chi_h Psi|| on the scaled tube.

    ``tube`` should normally use the constant profile so that the tube
    operator agrees with the model operator to leading order near the
    boundary.  With ``use_cutoff=False`` chi_h is replaced by 1.
    """
    h = params.h
    if use_cutoff:
        s_sup = 2 * h ** (1 / 3 - eta)
        u_sup = 2 * h ** (2 / 3 - eta)
        if s_sup > tube.s0 or u_sup > tube.delta:
            raise QuasimodeError(
                f"cutoff support (|s| <= {s_sup:.4g}, u <= {u_sup:.4g}) exceeds tube (s0={tube.s0:.4g}, "
                f"delta={tube.delta:.4g})")
    psi = build_quasimode(params, m, n, tube)
    vals = psi.values
    if use_cutoff:
        vals = vals * cutoff(params, psi.s, psi.u, eta)
    A = assemble_scaled_tube(domain, params, tube)
    return _residual(A, vals, mu_n(params, m, n))
