import json

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from rfkahler.algebra import J_matrix, T_matrix, apply_Jc, bracket, build_model, operator_T, structure_residuals
from rfkahler.errors import DomainError, UnsupportedModelError
from rfkahler.registry import lookup_space

from conftest import model_for

MODELS = [("sphere", 2), ("sphere", 3), ("sphere", 5), ("rpn", 2), ("cpn", 1), ("cpn", 2), ("cpn", 3),
          ("hpn", 1), ("hpn", 2)]


@pytest.mark.parametrize("family,n", MODELS)
def test_structure_identities(family, n):
    res = structure_residuals(model_for(family, n))
    assert res["multiplicities"] == 0
    assert max(res.values()) < 1e-10


@pytest.mark.parametrize("family,n", MODELS)
def test_graded_dimensions(family, n):
    m = model_for(family, n)
    d = m.desc
    assert m.basis_m_eps.shape[0] == d.m_eps
    assert m.basis_m_half.shape[0] == d.m_half
    assert m.basis_h.shape[0] == d.h_dim
    assert m.basis_m.shape[0] == d.m_total


def test_cayley_has_no_model():
    with pytest.raises(UnsupportedModelError):
        build_model(lookup_space("cayley", 2))


def test_cp_su2_triple(cp2):
    X, Y, Z = cp2.X, cp2.special["Y"], cp2.special["Z"]
    np.testing.assert_allclose(cp2.br(X, Y), -Z, atol=1e-14)
    np.testing.assert_allclose(cp2.br(X, Z), Y, atol=1e-14)
    np.testing.assert_allclose(cp2.br(Z, Y), X, atol=1e-14)


def test_cp_matrices_are_the_fixed_ones(cp2):
    X = cp2.matrix(cp2.X)
    E = np.zeros((3, 3), complex)
    E[0, 1], E[1, 0] = 0.5, -0.5
    assert np.allclose(X, E) or np.allclose(X, -E)
    Z0 = cp2.matrix(cp2.special["Z0"])
    np.testing.assert_allclose(Z0, np.diag([2j / 3, -1j / 3, -1j / 3]), atol=1e-14)


def test_bracket_matches_matrix_commutator(cp2):
    rng = np.random.default_rng(3)
    u, v = cp2.random(rng), cp2.random(rng)
    Mu, Mv = cp2.matrix(u), cp2.matrix(v)
    np.testing.assert_allclose(cp2.matrix(cp2.br(u, v)), bracket(Mu, Mv), atol=1e-13)
    np.testing.assert_allclose(cp2.coords(Mu), u, atol=1e-14)


def test_bracket_shape_check():
    with pytest.raises(ValueError):
        bracket(np.eye(2), np.eye(3))


@settings(max_examples=25, deadline=None)
@given(st.sampled_from(MODELS), st.integers(0, 2**32 - 1))
def test_jacobi_and_invariance(fam_n, seed):
    m = model_for(*fam_n)
    rng = np.random.default_rng(seed)
    u, v, w = m.random(rng), m.random(rng), m.random(rng)
    br = m.br
    jac = br(br(u, v), w) + br(br(v, w), u) + br(br(w, u), v)
    assert np.max(np.abs(jac)) < 1e-12
    # ad-invariance of the inner product
    assert abs(br(u, v) @ w + v @ br(u, w)) < 1e-12


@settings(max_examples=20, deadline=None)
@given(st.sampled_from(MODELS), st.integers(0, 2**32 - 1))
def test_Ad_exp_of_h_fixes_X(fam_n, seed):
    m = model_for(*fam_n)
    if m.basis_h.shape[0] == 0:
        return
    rng = np.random.default_rng(seed)
    A = m.Ad_exp(m.random(rng, "h"))
    np.testing.assert_allclose(A @ m.X, m.X, atol=1e-12)
    np.testing.assert_allclose(A.T @ A, np.eye(m.dim), atol=1e-12)


@pytest.mark.parametrize("family,n", MODELS)
def test_J_is_complex_structure(family, n):
    m = model_for(family, n)
    J = J_matrix(m, 0.7)
    Q = np.zeros((m.dim + 1, m.dim + 1))
    Q[:-1, :-1] = m.P_m + m.P_k_plus
    Q[-1, -1] = 1.0
    np.testing.assert_allclose(J @ J @ Q, -Q, atol=1e-12)


def test_J_on_X_and_radial(cp2):
    v, t = apply_Jc(cp2, 1.3, cp2.X, 0.0)
    assert np.allclose(v, 0) and t == pytest.approx(1.0)
    v, t = apply_Jc(cp2, 1.3, 0 * cp2.X, 1.0)
    np.testing.assert_allclose(v, -cp2.X)
    # J(Y, 0) = (-coth(x) Z, 0)
    v, _ = apply_Jc(cp2, 1.3, cp2.special["Y"])
    np.testing.assert_allclose(v, -cp2.special["Z"] / np.tanh(1.3), atol=1e-14)


def test_T_rejects_a_and_h(cp2):
    with pytest.raises(DomainError):
        operator_T(cp2, cp2.X)
    with pytest.raises(DomainError):
        operator_T(cp2, cp2.basis_h[0])
    xi = cp2.basis_m_half[0]
    np.testing.assert_allclose(operator_T(cp2, operator_T(cp2, xi)), -xi, atol=1e-14)
    np.testing.assert_allclose(T_matrix(cp2) @ cp2.basis_m_eps[0], -cp2.basis_k_eps[0], atol=1e-14)


def test_I_squares_to_minus_one(cp2):
    np.testing.assert_allclose(cp2.I @ cp2.I, -cp2.P_m, atol=1e-14)
    np.testing.assert_allclose(cp2.I @ cp2.X, cp2.special["Y"], atol=1e-14)


def test_dump_bases_json(cp2):
    data = json.loads(cp2.dump_bases_json())
    assert data["space"] == "cpn(2)"
    assert len(data["m_half"]) == 2
