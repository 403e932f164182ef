import json
import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from hypothesis.extra.numpy import arrays

from nsres.errors import BadMatrix, NotHermitian, NotPSD, Singular
from nsres.linalg import (adjoint, cond, general_eig, herm_eig, inner, inverse, matrix_from_json,
                          matrix_to_json, op_norm, psd_sqrt, random_invertible, rel_tol)

finite = st.floats(-10, 10, allow_nan=False, allow_infinity=False)


@st.composite
def cmatrices(draw, max_n=6):
    n = draw(st.integers(1, max_n))
    re = draw(arrays(np.float64, (n, n), elements=finite))
    im = draw(arrays(np.float64, (n, n), elements=finite))
    return re + 1j * im


def test_adjoint_examples():
    assert np.array_equal(adjoint(np.eye(2)), np.eye(2))
    M = np.array([[0, 1j], [0, 0]])
    assert np.array_equal(adjoint(M), np.array([[0, 0], [-1j, 0]]))
    psi, phi = np.array([1, -1]), np.array([1, 0])
    R = np.outer(psi, phi.conj())
    assert np.array_equal(adjoint(R), np.outer(phi, psi.conj()))


def test_inner_convention():
    # linear in the first slot
    x, y = np.array([1, 0], dtype=complex), np.array([1j, 0])
    assert inner(2j * x, y) == 2j * inner(x, y)
    assert inner(x, 2j * y) == -2j * inner(x, y)


def test_op_norm_examples():
    assert op_norm(np.eye(5)) == pytest.approx(1.0, abs=1e-12)
    assert op_norm(np.array([[1, 1], [0, 0]])) == pytest.approx(math.sqrt(2), rel=1e-12)
    assert op_norm(np.zeros((2, 2))) == 0.0


@given(cmatrices())
@settings(max_examples=60, deadline=None)
def test_adjoint_involution_and_norm(M):
    assert np.array_equal(adjoint(adjoint(M)), M)
    assert abs(op_norm(M) - op_norm(adjoint(M))) <= 1e-12 * max(1.0, op_norm(M))


def test_herm_eig_examples():
    assert np.allclose(herm_eig(np.diag([2.0, 1.0])).eigenvalues, [1, 2])
    assert np.allclose(herm_eig(np.ones((2, 2))).eigenvalues, [0, 2], atol=1e-14)
    assert np.allclose(herm_eig(np.array([[0, -1j], [1j, 0]])).eigenvalues, [-1, 1])


def test_herm_eig_rejects_non_hermitian():
    with pytest.raises(NotHermitian):
        herm_eig(np.array([[1, 1], [0, 1]]))


def test_herm_eig_accepts_roundoff():
    H = np.array([[1, 1e-13], [0, 1]])
    w, _ = herm_eig(H)
    assert np.allclose(w, [1 - 5e-14, 1 + 5e-14])


def test_general_eig_examples():
    assert np.allclose(general_eig(np.array([[1, -1], [0, 2]])), [1, 2])
    assert np.allclose(general_eig(np.eye(3)), [1, 1, 1])
    assert np.allclose(general_eig(np.array([[0, 1], [0, 0]])), [0, 0])


@given(cmatrices())
@settings(max_examples=60, deadline=None)
def test_general_eig_matches_herm_eig(M):
    H = M + adjoint(M)
    a = np.sort(general_eig(H).real)
    b = herm_eig(H).eigenvalues
    assert np.max(np.abs(a - b)) <= 1e-8 * max(1.0, op_norm(H))


def test_psd_sqrt_examples():
    assert np.allclose(psd_sqrt(np.eye(3)), np.eye(3))
    assert np.allclose(psd_sqrt(np.ones((2, 2))), np.ones((2, 2)) / math.sqrt(2), atol=1e-15)
    assert np.allclose(psd_sqrt(np.diag([4.0, 0.0])), np.diag([2.0, 0.0]))


def test_psd_sqrt_clamps_and_rejects():
    S = psd_sqrt(np.diag([1.0, -1e-12]))
    assert np.array_equal(S.real, np.diag([1.0, 0.0]))
    with pytest.raises(NotPSD):
        psd_sqrt(np.diag([1.0, -1e-6]))


def test_psd_sqrt_reconstruction_1000():
    rng = np.random.default_rng(1)
    worst = 0.0
    for i in range(1000):
        n = int(rng.integers(1, 33))
        r = int(rng.integers(1, n + 1))
        Z = rng.standard_normal((n, r)) + 1j * rng.standard_normal((n, r))
        H = Z @ adjoint(Z) * rng.uniform(0.01, 10.0)
        S = psd_sqrt(H)
        assert np.allclose(S, adjoint(S))
        assert herm_eig(S).eigenvalues[0] >= -1e-12 * op_norm(S)
        worst = max(worst, op_norm(S @ S - H) / (1 + op_norm(H)))
    assert worst <= 1e-9


def test_inverse_examples():
    inv, k = inverse(np.eye(3))
    assert np.allclose(inv, np.eye(3)) and k == pytest.approx(1.0)
    inv, k = inverse(np.array([[1, 1], [0, 1]]))
    assert np.allclose(inv, [[1, -1], [0, 1]])
    assert k == pytest.approx((3 + math.sqrt(5)) / 2, rel=1e-12)
    with pytest.raises(Singular):
        inverse(np.ones((2, 2)))


@given(cmatrices())
@settings(max_examples=60, deadline=None)
def test_inverse_residual(M):
    try:
        inv, k = inverse(M)
    except Singular:
        return
    assert op_norm(M @ inv - np.eye(len(M))) <= 1e-10 * k * max(1.0, len(M))


def test_random_invertible():
    U = random_invertible(3, 4, 1.0)
    assert np.allclose(U @ adjoint(U), np.eye(4), atol=1e-12)
    assert np.array_equal(random_invertible(5, 8, 10.0), random_invertible(5, 8, 10.0))
    for s in range(100):
        c = cond(random_invertible(s, 8, 10.0))
        assert 1.0 <= c <= 10.0 * (1 + 1e-12)
    with pytest.raises(ValueError):
        random_invertible(0, 2, 0.5)


def test_rel_tol_floor():
    assert rel_tol(1e-10, 0.0) == 1e-14
    assert rel_tol(1e-10, 10.0) == pytest.approx(1e-9)


def test_matrix_json_roundtrip():
    M = np.array([[1 + 2j, -0.1], [1e-300, 3j]])
    obj = json.loads(json.dumps(matrix_to_json(M)))
    assert np.array_equal(matrix_from_json(obj), M)


@pytest.mark.parametrize("obj", [
    {"rows": 1, "cols": 1, "data": [[float("nan"), 0]]},
    {"rows": 1, "cols": 1, "data": [[float("inf"), 0]]},
    {"rows": 2, "cols": 2, "data": [[1, 0]]},
    {"rows": 1, "cols": 1, "data": [[1, 0, 0]]},
    {"cols": 1, "data": [[1, 0]]},
])
def test_matrix_json_rejects(obj):
    with pytest.raises(BadMatrix):
        matrix_from_json(obj)


def test_matrix_to_json_rejects_nonfinite():
    with pytest.raises(BadMatrix):
        matrix_to_json(np.array([[np.nan]]))
