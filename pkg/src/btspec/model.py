"""Closed-form model spectra and the leading-order bounds built from them."""
from __future__ import annotations

import cmath
import math
from dataclasses import dataclass

import numpy as np

from .special import airy_zero

# witnesses for the admissible (alpha, beta) set
BETA_SMALL = 0.0
BETA_LARGE = math.pi / 10
ALPHA_SUP = 3 * math.pi / 5
LATTICE_TOL = 1e-9


class ModelError(ValueError):
    pass


@dataclass(frozen=True)
class ModelParams:
    h: float
    alpha: float
    kappa0: float = 1.0
    kappa1: float = 1.0
    x1_max: float = 2.0

    def __post_init__(self):
        if not self.h > 0:
            raise ModelError(f"h must be positive, got {self.h}")
        if not 0 <= self.alpha <= math.pi:
            raise ModelError(f"alpha must lie in [0, pi], got {self.alpha}")

    @classmethod
    def from_summary(cls, summary, h: float, alpha: float) -> "ModelParams":
        return cls(h=h, alpha=alpha, kappa0=summary.kappa0, kappa1=summary.kappa1,
                   x1_max=summary.x1_max)


def airy_term(h: float, alpha: float, m: int = 1) -> complex:
    return airy_zero(m) * h ** (2 / 3) * cmath.exp(2j * alpha / 3)


def harmonic_term(h: float, alpha: float, kappa: float, n: int) -> complex:
    return (2 * n - 1) * h * cmath.exp(0.5j * alpha) * math.sqrt(kappa / 2)


def mu_n(params: ModelParams, m: int = 1, n: int = 1) -> complex:
    """z_m h^{2/3} e^{2i alpha/3} + (2n-1) h e^{i alpha/2} sqrt(kappa0/2)."""
    if m < 1 or n < 1:
        raise ModelError("mu_n: m and n must be >= 1")
    if params.kappa0 <= 0:
        raise ModelError("mu_n: kappa0 must be positive (leftmost point must be curved)")
    return airy_term(params.h, params.alpha, m) + harmonic_term(params.h, params.alpha, params.kappa0, n)


def mirrored_mu_n(params: ModelParams, n: int = 1) -> complex:
    """Leading eigenvalues generated near the rightmost point.

    e^{i alpha} x1_max + z_1 h^{2/3} e^{-2i at/3} + (2n-1) h e^{-i at/2} sqrt(kappa1/2),
    with at = pi - alpha.
    """
    if params.kappa1 <= 0:
        raise ModelError("mirrored_mu_n: kappa1 must be positive")
    if not 2 * math.pi / 5 < params.alpha <= math.pi:
        raise ModelError("mirrored_mu_n: alpha must lie in (2pi/5, pi]")
    at = math.pi - params.alpha
    return (cmath.exp(1j * params.alpha) * params.x1_max
            + (airy_term(params.h, at, 1) + harmonic_term(params.h, at, params.kappa1, n)).conjugate())


def model_spectrum(params: ModelParams, m_max: int = 10, n_max: int = 10) -> list[tuple[int, int, complex]]:
    """All mu_{m,n} with m <= m_max, n <= n_max, sorted by real part."""
    out = [(m, n, mu_n(params, m, n)) for m in range(1, m_max + 1) for n in range(1, n_max + 1)]
    out.sort(key=lambda e: (e[2].real, e[2].imag))
    return out


def lower_bound(params: ModelParams) -> float:
    """Leading term z_1 h^{2/3} cos(2 alpha/3) of the lower bound on Re sp, alpha < pi/2."""
    if params.alpha >= math.pi / 2:
        raise ModelError("lower_bound: requires alpha < pi/2 (use halfplane_bound)")
    return airy_zero(1) * params.h ** (2 / 3) * math.cos(2 * params.alpha / 3)


def in_T(alpha: float, beta: float) -> tuple[bool, str]:
    """Membership in the admissible set; returns (ok, first violated inequality)."""
    if not beta - 2 * alpha / 3 > -math.pi / 2:
        return False, "beta - 2 alpha/3 > -pi/2"
    if not beta + 2 * alpha / 3 < math.pi / 2:
        return False, "beta + 2 alpha/3 < pi/2"
    if not abs(alpha - beta) < math.pi / 2:
        return False, "|alpha - beta| < pi/2"
    return True, ""


def admissible_beta(alpha: float) -> float:
    """0 below pi/2, pi/10 on [pi/2, 3pi/5); rejects larger alpha."""
    if not 0 <= alpha < ALPHA_SUP:
        raise ModelError(f"admissible_beta: alpha must lie in [0, 3pi/5), got {alpha}")
    beta = BETA_SMALL if alpha < math.pi / 2 else BETA_LARGE
    ok, why = in_T(alpha, beta)
    if not ok:  # pragma: no cover - the witnesses are admissible on their ranges
        raise ModelError(f"admissible_beta: ({alpha}, {beta}) violates {why}")
    return beta


def halfplane_bound(params: ModelParams, beta: float) -> tuple[complex, float]:
    """Half-plane cos(b) Re z + sin(b) Im z >= offset.

    Returns
    -------
    normal : complex
        e^{i beta}; the bound reads Re(conj(normal) z) >= offset.
    offset : float
        z_1 h^{2/3} cos(2 alpha/3 - beta).
    """
    ok, why = in_T(params.alpha, beta)
    if not ok:
        raise ModelError(f"halfplane_bound: (alpha, beta) inadmissible, violates {why}")
    offset = airy_zero(1) * params.h ** (2 / 3) * math.cos(2 * params.alpha / 3 - beta)
    return cmath.exp(1j * beta), offset


def count_N(R: float, kappa0: float) -> int:
    """#{n >= 1 : (2n-1) sqrt(kappa0/2) < R}; rejects R on the excluded lattice."""
    if R <= 0:
        raise ModelError("R must be positive")
    w = math.sqrt(kappa0 / 2)
    k = R / w  # compare with odd integers
    odd = 2 * round((k - 1) / 2) + 1
    if odd >= 1 and abs(R - odd * w) <= LATTICE_TOL * max(1.0, R):
        raise ModelError(f"R={R} lies on the excluded lattice (2N-1) sqrt(kappa0/2)")
    return int(math.floor((k + 1) / 2 - 1e-15)) if k > 1 else 0


def lattice_distance(R: float, kappa0: float) -> float:
    """Distance from R to the nearest point of (2N-1) sqrt(kappa0/2)."""
    w = math.sqrt(kappa0 / 2)
    k = R / w
    odd = max(1, 2 * round((k - 1) / 2) + 1)
    return abs(R - odd * w)


def default_R(kappa0: float) -> float:
    """R = 2.5 sqrt(kappa0/2): midway between the first two lattice points."""
    return 2.5 * math.sqrt(kappa0 / 2)
