import math

import mpmath
import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from rfkahler.completeness import (analyze_completeness, bernoulli_ode_check, bernoulli_rhs, direct_fu_radicand,
                                   tilt_pairing, f_U, fu_radicand, g2_closed, h_distance,
                                   theoretical_growth_exponent, verify_geodesic_field)
from rfkahler.errors import DomainError
from rfkahler.radial import RadialProfile, dphi
from rfkahler.registry import RadialParams, lookup_space

from conftest import model_for
from oracles import mp_fprime


def test_f_U_without_cZ():
    for d in (lookup_space("sphere", 4), lookup_space("cpn", 2)):
        prof = RadialProfile(d, RadialParams(1.3, 0.4))
        for x in (0.1, 1, 5):
            assert f_U(d, RadialParams(1.3, 0.4), x) == pytest.approx(1 / math.sqrt(prof.f_double_prime(x)), rel=1e-13)


def test_f_U_cp2_reference_value():
    # with C1 = 0: f'f'' = C sinh cosh + cZ^2 (sinh/cosh - sinh^3/cosh^3) for every n
    d, p, x = lookup_space("cpn", 2), RadialParams(1, 0, 1), 2.0
    with mpmath.workdps(40):
        X = mpmath.mpf(x)
        ch, sh = mpmath.cosh(X), mpmath.sinh(X)
        fpfpp = sh * ch + sh / ch - sh**3 / ch**3
        ref = mpmath.sqrt(mp_fprime(d, p, x) / (fpfpp - sh / ch**3))
    assert f_U(d, p, x) == pytest.approx(float(ref), rel=1e-13)


@pytest.mark.parametrize("n", [1, 2, 4])
def test_radicand_identity_matches_direct(n):
    d = lookup_space("cpn", n)
    for p in (RadialParams(1, 0, 0.5), RadialParams(2, 1, -2)):
        prof = RadialProfile(d, p)
        for x in (0.5, 1.5, 4.0):
            assert fu_radicand(d, p, x) == pytest.approx(direct_fu_radicand(prof, x), rel=1e-12)


def test_f_U_asymptotics():
    d, C = lookup_space("cpn", 3), 2.0
    x = 20.0
    ratio = (1 / f_U(d, RadialParams(C, 0, 0.7), x)) / math.sqrt(math.sqrt(C) * math.sinh(x))
    assert ratio == pytest.approx(1.0, rel=1e-8)


def test_h_distance_basics():
    d, p = lookup_space("cpn", 2), RadialParams(1, 0, 0.5)
    assert h_distance(d, p, 1.0, 1.0) == 0.0
    assert h_distance(d, p, 1, 4) < h_distance(d, p, 1, 8)
    with pytest.raises(DomainError):
        h_distance(d, p, 2, 1)


def test_h_distance_against_mpmath():
    d, p = lookup_space("hpn", 1), RadialParams(1, 0)
    with mpmath.workdps(30):
        def inv_fu(s):
            return mpmath.sqrt(mpmath.diff(lambda t: mp_fprime(d, p, t), s))
        ref = mpmath.quad(inv_fu, [1, 3, 6])
    assert h_distance(d, p, 1, 6) == pytest.approx(float(ref), rel=1e-10)


def test_h_growth_rate_cp():
    # 1/f_U ~ C^{1/4} sinh^{1/2}, so h(1, x) e^{-x/2} settles to a constant
    d, p = lookup_space("cpn", 2), RadialParams(1, 0, 0.5)
    r = [h_distance(d, p, 1, x) * math.exp(-x / 2) for x in (8, 10, 12)]
    assert abs(r[2] / r[1] - 1) < 1e-2
    assert abs(r[2] / r[1] - 1) < abs(r[1] / r[0] - 1)
    q = [h_distance(d, p, 1, x) * math.exp(-x / 4) for x in (8, 10, 12)]
    assert q[2] / q[1] > 1.5


@pytest.mark.parametrize("family,n,p", [("cpn", 1, 0.5), ("cpn", 3, 0.5), ("sphere", 3, 2 / 3), ("sphere", 6, 5 / 6),
                                        ("hpn", 1, 0.75), ("hpn", 2, 0.625), ("cayley", 2, 11 / 16)])
def test_growth_exponent(family, n, p):
    d = lookup_space(family, n)
    assert theoretical_growth_exponent(d) == pytest.approx(p)
    rep = analyze_completeness(d, RadialParams(1, 0, 0.5 if d.is_complex_proj else 0))
    assert rep.divergent and rep.h_end > 50
    assert rep.growth_exponent == pytest.approx(p, rel=1e-3)
    assert np.all(np.diff(rep.h) > 0) and np.all(rep.f_U > 0)


@pytest.mark.parametrize("n", [1, 2, 3, 4])
def test_geodesic_field(n):
    m = model_for("cpn", n)
    for cz in (0.0, 0.5, -0.5, 2.0, 1e-9):
        for x in np.geomspace(1e-3, 20, 20):
            r = verify_geodesic_field(m, RadialParams(1, 0, cz), x)
            assert r.max_residual < 1e-9, r.residuals


def test_geodesic_field_case1_and_C1():
    for fam, n in (("sphere", 4), ("hpn", 2)):
        r = verify_geodesic_field(model_for(fam, n), RadialParams(1, 2), 1e-3)
        assert r.max_residual < 1e-9 and r.b == 0.0


def test_tilt_pairing_negative_control(cp2):
    p, x = RadialParams(1, 0, 0.5), 1.0
    Z = cp2.special["Z"]
    prof = RadialProfile(cp2.desc, p)
    b = -p.cZ * dphi(x) / prof.f_prime(x)
    lhs, rhs = tilt_pairing(cp2, p, x, b, Z)
    assert abs(lhs) < 1e-14 and abs(rhs) < 1e-14
    lhs, rhs = tilt_pairing(cp2, p, x, 0.0, Z)
    assert lhs == pytest.approx(rhs, rel=1e-13)
    assert abs(lhs) == pytest.approx(abs(p.cZ * dphi(x)), rel=1e-13)


@pytest.mark.parametrize("n", [1, 2, 3])
def test_bernoulli(n):
    for C in (0.5, 1, 2):
        for C1 in (0, 0.5):
            assert bernoulli_ode_check(RadialParams(C, C1), n, 0.5, 3) < 1e-6


def test_bernoulli_closed_form_solves_ode():
    p, n = RadialParams(1.2, 0.5), 3
    for x in np.linspace(0.5, 3, 11):
        h = 1e-5 * x
        fd = (g2_closed(p, n, x + h) - g2_closed(p, n, x - h)) / (2 * h)
        rhs = bernoulli_rhs(p, n, x, float(g2_closed(p, n, x)))
        assert abs(fd - rhs) / abs(rhs) < 1e-7


def test_bernoulli_domain():
    with pytest.raises(DomainError):
        bernoulli_ode_check(RadialParams(), 2, 3, 1)
    with pytest.raises(DomainError):
        bernoulli_ode_check(RadialParams(), 0, 0.5, 1)


@settings(max_examples=30, deadline=None)
@given(st.sampled_from([1, 2, 3, 4]), st.floats(0.1, 5), st.floats(0, 5), st.floats(-3, 3), st.floats(1e-3, 25))
def test_f_U_positive(n, C, C1, cZ, x):
    d = lookup_space("cpn", n)
    assert f_U(d, RadialParams(C, C1, cZ), x) > 0
