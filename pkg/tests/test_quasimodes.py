import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from btspec.assembly import assemble_model, default_tube
from btspec.eigensolver import eigs_near
from btspec.model import ModelParams, mu_n
from btspec.quasimodes import (ModelGrid, QuasimodeError, build_quasimode, cutoff, cutoff_1d,
                               default_model_grid, hermite_argument_factor, model_residual,
                               quasimode_values, tube_residual)

P0 = ModelParams(0.05, 0.0)


@pytest.fixture(scope="module")
def grid300():
    return default_model_grid(P0, 300, 200)


def test_alpha0_real_positive(grid300):
    q = build_quasimode(P0, 1, 1, grid300)
    assert np.max(np.abs(q.values.imag)) == 0
    assert np.all(q.values.real > 0)


def test_prefactor_normalizes(grid300):
    # the h-power prefactors make the continuous L2 norm equal to one
    assert build_quasimode(P0, 1, 1, grid300).norm == pytest.approx(1.0, abs=1e-10)
    assert build_quasimode(P0, 2, 3, grid300).norm == pytest.approx(1.0, abs=1e-8)


def test_orthogonality_alpha0(grid300):
    a = build_quasimode(P0, 1, 1, grid300).flat()
    b = build_quasimode(P0, 1, 2, grid300).flat()
    assert abs(np.vdot(a, b)) < 1e-12


def test_hermite_factor_squares_to_rotated_frequency():
    for a in (0.0, 0.7, math.pi / 2):
        c = hermite_argument_factor(a, 1.5)
        assert c**2 == pytest.approx(np.exp(0.5j * a) * math.sqrt(0.75))


@pytest.mark.parametrize("alpha", [0.0, math.pi / 4])
@pytest.mark.parametrize("m,n", [(1, 1), (2, 1)])
def test_model_residual_second_order(alpha, m, n):
    p = ModelParams(0.05, alpha)
    r1 = model_residual(build_quasimode(p, m, n, default_model_grid(p, 300, 200)), p)
    r2 = model_residual(build_quasimode(p, m, n, default_model_grid(p, 600, 400)), p)
    assert r1 < 1e-3
    assert 3.6 < r1 / r2 < 4.4


def test_wrong_eigenvalue_residual_jumps(grid300):
    q = build_quasimode(P0, 1, 1, grid300)
    r = model_residual(q, P0, mu=mu_n(P0) + P0.h)
    assert r == pytest.approx(P0.h, rel=0.02)


def test_quasimode_matches_eigenvector():
    # the discrete eigenvector differs from the sampled quasimode by O(dx^2)
    angles = []
    for ns, nu in ((300, 200), (600, 400)):
        g = default_model_grid(P0, ns, nu)
        w = build_quasimode(P0, 1, 1, g).flat()
        A = assemble_model(P0, (g.S, g.U), ns, nu)
        v = eigs_near(A, mu_n(P0), 1, return_vectors=True).vectors[:, 0]
        c = np.vdot(v, w) / np.vdot(v, v)
        angles.append(np.linalg.norm(w - c * v) / np.linalg.norm(w))
    assert angles[0] < 1e-3
    assert 3.5 < angles[0] / angles[1] < 4.5


def test_under_resolved_grid_rejected():
    with pytest.raises(QuasimodeError, match="under-resolved"):
        build_quasimode(P0, 1, 1, default_model_grid(P0, 40, 30))


def test_values_shape_and_separability():
    s = np.linspace(-0.3, 0.3, 5)
    u = np.linspace(0.01, 0.5, 7)
    v = quasimode_values(P0, 1, 1, s, u)
    assert v.shape == (5, 7)
    assert np.linalg.matrix_rank(v) == 1


@settings(max_examples=60, deadline=None)
@given(st.floats(-5, 5))
def test_cutoff_profile(x):
    c = float(cutoff_1d(x))
    assert 0 <= c <= 1
    if abs(x) <= 1:
        assert c == 1
    if abs(x) >= 2:
        assert c == 0
    assert c == float(cutoff_1d(-x))


def test_cutoff_scales():
    h = 0.01
    s = np.array([0.0, 2.1 * h ** (1 / 3 - 0.1)])
    u = np.array([0.5 * h ** (2 / 3 - 0.1), 2.1 * h ** (2 / 3 - 0.1)])
    c = cutoff(ModelParams(h, 0.0), s, u)
    assert c[0, 0] == 1 and c[1, 0] == 0 and c[0, 1] == 0


def test_csv_columns(tmp_path, grid300):
    q = build_quasimode(P0, 1, 1, ModelGrid(grid300.S, grid300.U, 300, 200))
    q.to_csv(tmp_path / "q.csv")
    with open(tmp_path / "q.csv") as fh:
        assert fh.readline().strip() == "s,u,re,im"


def test_tube_residual_rejects_small_tube(disk):
    p = ModelParams(0.1, 0.0)
    tube = default_tube(disk, p, 2.0, chi_profile="constant", s0=0.5)
    with pytest.raises(QuasimodeError, match="support"):
        tube_residual(p, disk, tube)


def test_tube_residual_small_h(disk):
    # without the cutoff the residual falls faster than h^1.2 once the tube contains the Airy tail
    rows = []
    for h in (0.05, 0.025):
        p = ModelParams(h, 0.0)
        tube = default_tube(disk, p, 2.0, chi_profile="constant")
        rows.append(tube_residual(p, disk, tube, use_cutoff=False) / h**1.2)
    assert rows[1] < rows[0]
