import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from rfkahler.delta import (check_extension, check_z2_invariance, delta_form_eval, expected_limit_eigs,
                            omega_tilde_on_ray)
from rfkahler.errors import DomainError, SingularExtensionError
from rfkahler.registry import RadialParams, lookup_space

from conftest import model_for

SETUPS = [("sphere", 4, RadialParams(2, 0)), ("sphere", 3, RadialParams(1, 1.5)), ("hpn", 2, RadialParams(1, 0)),
          ("cpn", 1, RadialParams(1, 0, 0.3)), ("cpn", 2, RadialParams(1, 0, -0.7)), ("cpn", 3, RadialParams(0.5, 1, 2))]


@settings(max_examples=30, deadline=None)
@given(st.sampled_from(SETUPS), st.integers(0, 2**32 - 1), st.floats(0.01, 6))
def test_restricts_to_omega_tilde_on_ray(setup, seed, x):
    fam, n, p = setup
    m = model_for(fam, n)
    rng = np.random.default_rng(seed)
    xi1, xi2 = m.random(rng), m.random(rng)
    t1, t2 = rng.standard_normal(2)
    D = delta_form_eval(m, p, x * m.X, t1 * m.X, t2 * m.X, xi1, xi2)
    O = omega_tilde_on_ray(m, p, x, xi1, t1, xi2, t2)
    assert D == pytest.approx(O, rel=1e-10, abs=1e-10)


@settings(max_examples=30, deadline=None)
@given(st.sampled_from(SETUPS), st.integers(0, 2**32 - 1))
def test_kernel_vectors(setup, seed):
    # (zeta, [w, zeta]) with zeta in k lies in the kernel
    fam, n, p = setup
    m = model_for(fam, n)
    rng = np.random.default_rng(seed)
    w, u, zeta, xi = m.random(rng, "m"), m.random(rng, "m"), m.random(rng, "k"), m.random(rng)
    val = delta_form_eval(m, p, w, u, m.br(w, zeta), xi, zeta)
    scale = 1 + abs(delta_form_eval(m, p, w, u, u, xi, xi + zeta))
    assert abs(val) < 1e-10 * scale


@settings(max_examples=30, deadline=None)
@given(st.sampled_from(SETUPS), st.integers(0, 2**32 - 1))
def test_ad_k_invariance(setup, seed):
    fam, n, p = setup
    m = model_for(fam, n)
    rng = np.random.default_rng(seed)
    A = m.Ad_exp(m.random(rng, "k"))
    w, u1, u2 = (m.random(rng, "m") for _ in range(3))
    xi1, xi2 = m.random(rng), m.random(rng)
    a = delta_form_eval(m, p, w, u1, u2, xi1, xi2)
    b = delta_form_eval(m, p, A @ w, A @ u1, A @ u2, A @ xi1, A @ xi2)
    assert a == pytest.approx(b, rel=1e-10, abs=1e-10)


def test_zero_section():
    m = model_for("cpn", 2)
    rng = np.random.default_rng(0)
    u1, u2 = m.random(rng, "m"), m.random(rng, "m")
    xi1, xi2 = m.random(rng), m.random(rng)
    zero = np.zeros(m.dim)
    with pytest.raises(SingularExtensionError):
        delta_form_eval(m, RadialParams(1, 0.5, 0.5), zero, u1, u2, xi1, xi2)
    p = RadialParams(1, 0, 0.5)
    at0 = delta_form_eval(m, p, zero, u1, u2, xi1, xi2)
    w = m.random(rng, "m")
    near = delta_form_eval(m, p, 1e-6 * w / np.linalg.norm(w), u1, u2, xi1, xi2)
    assert at0 == pytest.approx(near, rel=1e-5, abs=1e-5)


@pytest.mark.parametrize("family,n", [("sphere", 3), ("hpn", 2), ("cayley", 2), ("cpn", 1), ("cpn", 3)])
def test_extension_iff_C1_zero(family, n):
    d = lookup_space(family, n)
    cz = 0.5 if d.is_complex_proj else 0.0
    ok = check_extension(d, RadialParams(1.5, 0, cz))
    assert ok.passed and ok.converged
    np.testing.assert_allclose(ok.limit_eigs, ok.expected_eigs, rtol=1e-6)
    bad = check_extension(d, RadialParams(1.5, 0.2, cz))
    assert not bad.passed and not bad.converged
    assert bad.fp_over_x[-1] / bad.fp_over_x[-2] == pytest.approx(2.0, rel=1e-6)
    assert "diverges" in bad.diagnostic


def test_expected_limits():
    e = expected_limit_eigs(lookup_space("cpn", 2), RadialParams(1, 0, 2))
    np.testing.assert_allclose(e, [2 * math.sqrt(5) - 4] * 2 + [2 * math.sqrt(5) + 4] * 2)
    e = expected_limit_eigs(lookup_space("sphere", 3), RadialParams(3))
    np.testing.assert_allclose(e, 2 * (4 * 3 / 3) ** (1 / 3))


@pytest.mark.parametrize("n", [2, 3, 4, 6])
def test_z2_spheres(n):
    m = model_for("sphere", n)
    for p in (RadialParams(1, 0), RadialParams(2, 3)):
        assert check_z2_invariance(m, p).passed


def test_z2_two_sphere_family():
    m = model_for("cpn", 1)
    assert check_z2_invariance(m, RadialParams(1, 0, 0)).passed
    assert not check_z2_invariance(m, RadialParams(1, 0, 0.5)).passed


def test_z2_domain():
    with pytest.raises(DomainError):
        check_z2_invariance(model_for("cpn", 2), RadialParams())
