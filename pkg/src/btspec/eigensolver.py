"""Shift-invert eigensolver and contour-quadrature rank estimator.

Factorizations use LAPACK's general band LU (zgbtrf/zgbtrs) when the band
storage fits in memory and fall back to SuperLU otherwise; both expose the
same ``solve`` interface.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp
from scipy.linalg import lapack
from scipy.sparse.linalg import splu

from .assembly import BandedComplexMatrix

PIVOT_RTOL = 1e-14
BAND_MEMORY_LIMIT = 256 * 2**20  # bytes of LAPACK band storage
DEFAULT_TOL = 1e-8
RANK_THRESHOLD = 1e-6
DEFAULT_SEED = 42


class SingularShiftError(ArithmeticError):
    pass


class RieszError(ValueError):
    pass


def _inf_norm(A: BandedComplexMatrix, shift: complex) -> float:
    M = A.to_sparse()
    rows = np.asarray(abs(M).sum(axis=1)).ravel()
    return float(rows.max() + abs(shift)) if A.dim else 0.0


class BandLU:
    """LU factors of A - shift I; call :meth:`solve` on vectors or column blocks."""

    def __init__(self, A: BandedComplexMatrix, shift: complex, backend: str = "auto"):
        self.dim = A.dim
        self.shift = complex(shift)
        kl, ku = A.lower_bw, A.upper_bw
        band_bytes = (2 * kl + ku + 1) * A.dim * 16
        if backend == "auto":
            backend = "lapack" if band_bytes <= BAND_MEMORY_LIMIT else "splu"
        self.backend = backend
        scale = _inf_norm(A, shift)
        if backend == "lapack":
            ab = A.lapack_bands(extra_lower=kl)
            ab[kl + ku, :] -= shift
            lu, piv, info = lapack.zgbtrf(ab, kl, ku, overwrite_ab=1)
            if info < 0:
                raise ValueError(f"zgbtrf: illegal argument {-info}")
            self._lu, self._piv, self._kl, self._ku = lu, piv, kl, ku
            udiag = lu[kl + ku, :]
        elif backend == "splu":
            M = (A.to_sparse() - shift * sp.identity(A.dim, format="csr")).tocsc()
            try:
                self._lu = splu(M)
            except RuntimeError as exc:  # exactly singular
                raise SingularShiftError(f"shift {shift}: {exc}") from exc
            udiag = self._lu.U.diagonal()
        else:
            raise ValueError(f"unknown backend {backend!r}")
        self.min_pivot = float(np.min(np.abs(udiag))) if A.dim else 0.0
        if self.min_pivot < PIVOT_RTOL * scale:
            raise SingularShiftError(f"shift {shift}: pivot {self.min_pivot:.3e} below {PIVOT_RTOL:g}*||A||")

    def solve(self, b: np.ndarray) -> np.ndarray:
        b = np.asarray(b, dtype=complex)
        if self.backend == "lapack":
            x, info = lapack.zgbtrs(self._lu, self._kl, self._ku, b, self._piv)
            if info != 0:
                raise ValueError(f"zgbtrs failed with info={info}")
            return x
        return self._lu.solve(b)


def band_lu(A: BandedComplexMatrix, shift: complex = 0.0, backend: str = "auto") -> BandLU:
    """Factor A - shift I (partial pivoting, fill kept inside the band)."""
    return BandLU(A, shift, backend)


def _factor_near(A, shift, backend):
    # a shift sitting on an eigenvalue is nudged by 1e-8 |shift|
    try:
        return band_lu(A, shift, backend), shift
    except SingularShiftError:
        shift = shift + 1e-8 * max(abs(shift), 1.0) * (1 + 1j) / math.sqrt(2)
        return band_lu(A, shift, backend), shift


@dataclass
class SpectrumResult:
    values: np.ndarray
    residuals: np.ndarray
    converged: np.ndarray
    shift: complex
    krylov_dim: int
    restarts: int = 0
    backend: str = ""
    vectors: np.ndarray | None = field(default=None, repr=False)

    @property
    def ritz(self) -> list[tuple[complex, float, int]]:
        return [(complex(v), float(r), i) for i, (v, r) in enumerate(zip(self.values, self.residuals))]

    @property
    def all_converged(self) -> bool:
        return bool(np.all(self.converged))

    def to_dict(self) -> dict:
        return {"shift": [self.shift.real, self.shift.imag], "krylov_dim": self.krylov_dim,
                "restarts": self.restarts, "backend": self.backend,
                "ritz": [{"re": v.real, "im": v.imag, "residual": float(r), "converged": bool(c)}
                         for v, r, c in zip(self.values, self.residuals, self.converged)]}


def _orthogonalize(V: np.ndarray, w: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    # classical Gram-Schmidt applied twice
    c = V.conj().T @ w
    w = w - V @ c
    c2 = V.conj().T @ w
    w = w - V @ c2
    return w, c + c2


def eigs_near(A: BandedComplexMatrix, target: complex, count: int = 6, tol: float = DEFAULT_TOL,
              krylov_dim: int | None = None, max_restarts: int = 5, backend: str = "auto",
              return_vectors: bool = False) -> SpectrumResult:
    """Eigenvalues of A closest to ``target`` by shift-invert Arnoldi.

    Parameters
    ----------
    A : BandedComplexMatrix
    target : complex
        Shift sigma; the operator iterated is (A - sigma)^{-1}.
    count : int
        Number of wanted eigenvalues, at most 20.
    tol : float
        A pair is converged when ||A v - lam v|| <= tol ||v||.
    krylov_dim : int, optional
        Subspace size, at least 4 * count (default max(4 count, 20)).
    max_restarts : int
        Thick restarts; converged Ritz vectors are kept (locked) in the basis.

    Returns
    -------
    SpectrumResult
        Values sorted by distance to ``target``; ``converged`` flags each pair.
    """
    if not 1 <= count <= 20:
        raise ValueError("count must lie in [1, 20]")
    n = A.dim
    k = krylov_dim if krylov_dim is not None else max(4 * count, 20)
    if k < 4 * count:
        raise ValueError(f"krylov_dim must be >= 4*count = {4 * count}")
    k = min(k, n)
    count = min(count, n)
    lu, sigma = _factor_near(A, complex(target), backend)
    M = A.to_sparse()
    V = np.zeros((n, k + 1), dtype=complex)
    W = np.zeros((n, k), dtype=complex)
    V[:, 0] = 1.0 / math.sqrt(n)
    m = 0
    restarts = 0
    while True:
        exhausted = False
        while m < k:
            w = lu.solve(V[:, m])
            W[:, m] = w
            w, _ = _orthogonalize(V[:, : m + 1], w)
            nw = np.linalg.norm(w)
            if nw <= 1e-13 * np.linalg.norm(W[:, m]) or m + 1 >= n:
                exhausted = True
                m += 1
                break
            V[:, m + 1] = w / nw
            m += 1
        H = V[:, :m].conj().T @ W[:, :m]
        theta, Y = np.linalg.eig(H)
        good = np.abs(theta) > 0
        lam = np.full(theta.shape, np.inf + 0j)
        lam[good] = sigma + 1.0 / theta[good]
        order = np.argsort(np.abs(lam - target), kind="stable")
        lam, Y = lam[order], Y[:, order]
        X = V[:, :m] @ Y
        X /= np.linalg.norm(X, axis=0)
        res = np.linalg.norm(M @ X - X * lam, axis=0)
        conv = res <= tol
        if conv[:count].all() or exhausted or restarts >= max_restarts or m >= n:
            break
        # thick restart: keep the wanted Ritz vectors (converged ones included)
        p = min(count + max(2, count // 2), m - 1)
        Q, R = np.linalg.qr(V[:, :m] @ Y[:, :p])
        Wq = W[:, :m] @ Y[:, :p]
        Wq = np.linalg.solve(R.T, Wq.T).T
        nxt = V[:, m].copy()
        nxt, _ = _orthogonalize(Q, nxt)
        V[:] = 0
        W[:] = 0
        V[:, :p] = Q
        W[:, :p] = Wq
        V[:, p] = nxt / np.linalg.norm(nxt)
        m = p
        restarts += 1
    sel = slice(0, count)
    return SpectrumResult(values=lam[sel].copy(), residuals=res[sel].copy(), converged=conv[sel].copy(),
                          shift=sigma, krylov_dim=k, restarts=restarts, backend=lu.backend,
                          vectors=X[:, sel].copy() if return_vectors else None)


@dataclass
class RieszRankReport:
    center: complex
    radius: float
    n_quadrature: int
    singular_values: list
    rank: int
    singular_values_doubled: list
    rank_doubled: int
    stable: bool
    nearest_eigenvalue_gap: float

    def to_dict(self) -> dict:
        return {"center": [self.center.real, self.center.imag], "radius": self.radius,
                "n_quadrature": self.n_quadrature, "singular_values": list(map(float, self.singular_values)),
                "rank": self.rank, "singular_values_doubled": list(map(float, self.singular_values_doubled)),
                "rank_doubled": self.rank_doubled, "stable": self.stable,
                "nearest_eigenvalue_gap": self.nearest_eigenvalue_gap}


def _nearby_eigenvalues(A: BandedComplexMatrix, center: complex, radius: float) -> np.ndarray:
    if A.dim <= 400:
        return np.linalg.eigvals(A.to_dense())
    count = 8
    while True:
        res = eigs_near(A, center, count=count)
        vals = res.values
        if count >= 20 or np.max(np.abs(vals - center)) > 2 * radius:
            return vals
        count = min(20, 2 * count)


def _rank(sv: np.ndarray, scale: float, threshold: float) -> int:
    ref = max(float(sv[0]) if len(sv) else 0.0, scale)
    return int(np.count_nonzero(sv > threshold * ref))


def riesz_rank(A: BandedComplexMatrix, center: complex, radius: float, n_quadrature: int = 32,
               n_probes: int = 4, seed: int = DEFAULT_SEED, threshold: float = RANK_THRESHOLD,
               backend: str = "auto", eigenvalues: np.ndarray | None = None) -> RieszRankReport:
    """Rank of the Riesz projector of A for the circle |z - center| = radius.

    The projector is applied to a seeded complex Gaussian probe block by the
    trapezoidal rule on the circle; the rank is the number of singular values
    of the result above ``threshold`` times max(largest singular value,
    probe norm).  The rule with ``2 n_quadrature`` nodes reuses the same
    nodes plus the midpoints and must give the same rank.
    """
    center = complex(center)
    if radius <= 0:
        raise RieszError("radius must be positive")
    ev = _nearby_eigenvalues(A, center, radius) if eigenvalues is None else np.asarray(eigenvalues)
    gaps = np.abs(np.abs(ev - center) - radius)
    gap = float(gaps.min()) if len(gaps) else float("inf")
    if gap <= 0.05 * radius:
        bad = complex(ev[int(np.argmin(gaps))])
        raise RieszError(f"circle passes within 0.05*radius of eigenvalue {bad:.10g}")
    rng = np.random.default_rng(seed)
    B = (rng.standard_normal((A.dim, n_probes)) + 1j * rng.standard_normal((A.dim, n_probes))) / math.sqrt(2)
    N2 = 2 * n_quadrature
    acc_coarse = np.zeros_like(B)
    acc_fine = np.zeros_like(B)
    for k in range(N2):
        w = radius * np.exp(2j * math.pi * k / N2)
        lu, _ = _factor_near(A, center + w, backend)
        term = -w * lu.solve(B)  # (z - A)^{-1} = -(A - z)^{-1}
        acc_fine += term
        if k % 2 == 0:
            acc_coarse += term
    P_coarse = acc_coarse / n_quadrature
    P_fine = acc_fine / N2
    sv = np.linalg.svd(P_coarse, compute_uv=False)
    sv2 = np.linalg.svd(P_fine, compute_uv=False)
    scale = float(np.linalg.norm(B, 2))
    r1 = _rank(sv, scale, threshold)
    r2 = _rank(sv2, scale, threshold)
    return RieszRankReport(center, float(radius), n_quadrature, sv.tolist(), r1, sv2.tolist(), r2,
                           r1 == r2, gap)
