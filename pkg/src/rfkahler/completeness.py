"""Radial distance analysis: the unit geodesic field, the distance h and the Bernoulli ODE.

The metric is complete iff the distance h(b, c) = int_b^c ds / f_U(s) between
the level sets G/H x {b} and G/H x {c} is unbounded in c, where

    f_U(x) = (f'(x) / (f'(x) f''(x) + cZ^2 phi(x) phi'(x)))^(1/2),  phi = 1/cosh.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy import integrate

from .algebra import AlgebraModel, J_matrix
from .errors import DomainError, NumericError
from .kahler import omega_matrix_parts
from .radial import RadialProfile, _require_x, dphi, phi, vector_a_parts, vector_a_prime
from .registry import RadialParams, SpaceDescriptor, validate_params

H_EPSABS = 1e-10
H_EPSREL = 1e-12


def _prof(desc, params, profile):
    return profile if profile is not None else RadialProfile(desc, params)


def fu_radicand(desc: SpaceDescriptor, params: RadialParams, x: float, profile=None) -> float:
    """f'(x) f''(x) + cZ^2 phi(x) phi'(x)."""
    prof = _prof(desc, params, profile)
    x = _require_x(x)
    if hasattr(prof, "log_fu_radicand"):
        return math.exp(prof.log_fu_radicand(x))
    return direct_fu_radicand(prof, x)


def direct_fu_radicand(prof, x: float) -> float:
    """The radicand evaluated term by term from f', f'' (loses accuracy on CP^n when C1 > 0, x -> 0)."""
    cZ = prof.params.cZ
    return float(prof.f_prime(x)) * float(prof.f_double_prime(x)) + cZ * cZ * phi(x) * dphi(x)


def f_U(desc: SpaceDescriptor, params: RadialParams, x: float, profile=None) -> float:
    """Length scale of the unit radial geodesic field at radius x."""
    prof = _prof(desc, params, profile)
    x = _require_x(x)
    if hasattr(prof, "log_fu_radicand"):
        return math.exp(0.5 * (prof.log_f_prime(x) - prof.log_fu_radicand(x)))
    rad = direct_fu_radicand(prof, x)
    if not rad > 0:
        raise NumericError(f"radicand f'f'' + cZ^2 phi phi' = {rad} is not positive at x = {x}")
    fp = float(prof.f_prime(x))
    return math.sqrt(fp / rad)


def inverse_f_U(desc: SpaceDescriptor, params: RadialParams, x: float, profile=None) -> float:
    return 1.0 / f_U(desc, params, x, profile)


def h_distance(desc: SpaceDescriptor, params: RadialParams, b: float, c: float, profile=None) -> float:
    """Distance int_b^c ds / f_U(s) between the level sets at radii b and c."""
    b, c = _require_x(b), _require_x(c)
    if b > c:
        raise DomainError(f"need b <= c, got b = {b}, c = {c}")
    if b == c:
        return 0.0
    prof = _prof(desc, params, profile)
    val, _ = integrate.quad(lambda s: inverse_f_U(desc, params, s, prof), b, c,
                            epsabs=H_EPSABS, epsrel=H_EPSREL, limit=200)
    return float(val)


def theoretical_growth_exponent(desc: SpaceDescriptor) -> float:
    """p with 1/f_U ~ const * sinh(x)^p as x -> infinity (for C1 = 0).

    f' and f'' both grow like exp((2 m_eps + m_half) x / m), so
    1/f_U = sqrt(f'' + ...) grows with half that rate.
    """
    return (2 * desc.m_eps + desc.m_half) / (2 * desc.m_total)


@dataclass
class CompletenessReport:
    params: RadialParams
    grid: np.ndarray
    f_U: np.ndarray
    h: np.ndarray
    h_end: float
    growth_exponent: float
    divergent: bool
    fit_window: tuple = (15.0, 30.0)


def analyze_completeness(desc: SpaceDescriptor, params: RadialParams, b: float = 1.0, c: float = 30.0,
                         count: int = 59, fit_window=(15.0, 30.0), bound: float = 50.0) -> CompletenessReport:
    """Tabulate f_U and h(b, x) on a linear grid and fit the growth of h.

    The growth exponent is the least-squares slope of log h(b, x) against
    log sinh(x) over ``fit_window``.  The divergence verdict is
    h(b, c) > ``bound`` together with a positive exponent.
    """
    params = validate_params(desc, params)
    prof = RadialProfile(desc, params)
    grid = np.linspace(b, c, count)
    fus = np.array([f_U(desc, params, x, prof) for x in grid])
    steps = [h_distance(desc, params, lo, hi, prof) for lo, hi in zip(grid[:-1], grid[1:])]
    h = np.concatenate([[0.0], np.cumsum(steps)])
    lo, hi = fit_window
    sel = (grid >= lo) & (grid <= hi) & (h > 0)
    if sel.sum() < 2:
        raise DomainError(f"fit window {fit_window} holds fewer than two grid points")
    xs = grid[sel]
    log_sinh = xs + np.log1p(-np.exp(-2 * xs)) - math.log(2)
    slope = float(np.polyfit(log_sinh, np.log(h[sel]), 1)[0])
    h_end = float(h[-1])
    return CompletenessReport(params, grid, fus, h, h_end, slope, bool(h_end > bound and slope > 0),
                              tuple(fit_window))


# -- the unit geodesic field and the Hamiltonian field of x ----------------------------------

@dataclass
class GeodesicFieldResult:
    x: float
    f_U: float
    b: float
    residuals: dict = field(default_factory=dict)

    @property
    def max_residual(self) -> float:
        return max(self.residuals.values())


def _form(model, params, x, prof):
    return omega_matrix_parts(model, vector_a_parts(model, params, x, prof),
                              vector_a_prime(model, params, x, prof))


def _vec(v, t):
    return np.concatenate([np.asarray(v, dtype=float), [float(t)]])


def tilt_coefficient(model: AlgebraModel, params: RadialParams, x: float, profile=None) -> float:
    """b = -cZ phi'(x) / f'(x); the Y-tilt of the unit radial field (zero off CP^n)."""
    prof = _prof(model.desc, params, profile)
    if not model.desc.is_complex_proj:
        return 0.0
    return -prof.params.cZ * dphi(x) / float(prof.f_prime(x))


def tilt_pairing(model: AlgebraModel, params: RadialParams, x: float, b: float, xi1, t1: float = 0.0,
               profile=None):
    """(w((xi1, t1), (bY, d/dx)), -(b f' + cZ phi') <Z, xi1>) for xi1 in m+ + k+."""
    if not model.desc.is_complex_proj:
        raise DomainError("the Y-tilt is defined on complex projective spaces only")
    prof = _prof(model.desc, params, profile)
    Om = _form(model, params, x, prof)
    Y, Z = model.special["Y"], model.special["Z"]
    lhs = _vec(xi1, t1) @ Om @ _vec(b * Y, 1.0)
    rhs = -(b * float(prof.f_prime(x)) + prof.params.cZ * dphi(x)) * float(Z @ xi1)
    return float(lhs), float(rhs)


def hamiltonian_coefficients(desc: SpaceDescriptor, params: RadialParams, x: float, profile=None):
    """(a, c) with H^x(o, x) = (a X + c Z, 0); c = 0 off CP^n."""
    prof = _prof(desc, params, profile)
    rad = fu_radicand(desc, params, x, prof)
    fp = float(prof.f_prime(x))
    cZ = prof.params.cZ
    return fp / rad, cZ * phi(x) / rad


def verify_geodesic_field(model: AlgebraModel, params: RadialParams, x: float, seed: int = 0,
                          samples: int = 4) -> GeodesicFieldResult:
    """Residuals of the unit-field and Hamiltonian-field identities at (o, x).

    norm:             w(JU, U) = 1
    orthogonality:    w((xi, t), U) = 0 for xi in m+ + k+, t in R (the J-image of the orbit)
    tilt_pairing:     w((xi1, t1), (bY, d/dx)) = -(b f' + cZ phi') <Z, xi1> at random b
    hamiltonian:      w((xi, t), H) = t for xi in m + k+, t in R
    hamiltonian_norm: w(JH, H) = f_U^2
    defining:         a f'' + cZ c phi' = 1

    Each residual is |lhs - rhs| / max(1, |rhs|, sum of the absolute values of
    the terms in lhs), so that cancellations between large terms (C1 > 0 near
    x = 0, where f_U blows up) are measured relative to their size.  All
    checks also run for cZ = 0 and off CP^n, where b and c vanish.
    """
    x = _require_x(x)
    desc = model.desc
    prof = RadialProfile(desc, params)
    cZ = prof.params.cZ
    Om = _form(model, params, x, prof)
    absOm = np.abs(Om)
    J = J_matrix(model, x)

    def rel(u, v, target=0.0):
        size = float(np.abs(u) @ absOm @ np.abs(v))
        return abs(float(u @ Om @ v) - target) / max(1.0, abs(target), size)

    fu = f_U(desc, params, x, prof)
    b = tilt_coefficient(model, params, x, prof)
    Y = model.special.get("Y", np.zeros(model.dim))
    Z = model.special.get("Z", np.zeros(model.dim))
    radial = _vec(np.zeros(model.dim), 1.0)
    U = fu * _vec(b * Y, 1.0)
    res = {"norm": rel(J @ U, U, 1.0)}

    basis = list(model.basis_m_plus) + list(model.basis_k_plus)
    res["orthogonality"] = max([rel(_vec(e, 0.0), U) for e in basis] + [rel(radial, U)])

    rng = np.random.default_rng(seed)
    if desc.is_complex_proj:
        worst = 0.0
        for _ in range(samples):
            bb = float(rng.standard_normal())
            xi1 = (model.P_m_plus + model.P_k_plus) @ rng.standard_normal(model.dim)
            lhs, rhs = tilt_pairing(model, params, x, bb, xi1, float(rng.standard_normal()), prof)
            scale = 1.0 + (abs(bb) * float(prof.f_prime(x)) + abs(cZ * dphi(x))) * np.linalg.norm(xi1)
            worst = max(worst, abs(lhs - rhs) / scale)
        res["tilt_pairing"] = worst

    a, c = hamiltonian_coefficients(desc, params, x, prof)
    H = _vec(a * model.X + c * Z, 0.0)
    ham = [rel(_vec(e, 0.0), H) for e in list(model.basis_m) + list(model.basis_k_plus)]
    ham.append(rel(radial, H, 1.0))
    res["hamiltonian"] = max(ham)
    res["hamiltonian_norm"] = rel(J @ H, H, fu * fu)
    t1, t2 = a * float(prof.f_double_prime(x)), cZ * c * dphi(x)
    res["defining"] = abs(t1 + t2 - 1.0) / max(1.0, abs(t1) + abs(t2))
    return GeodesicFieldResult(x, fu, b, res)


# -- the Bernoulli equation for g2 = cosh^2 x (f')^2 at cZ = 0 ------------------------------

def g2_closed(params: RadialParams, n: int, x):
    """cosh^2(x) (C^n sinh^{2n}(x) + C1)^{1/n}."""
    x = np.asarray(x, dtype=float)
    C, C1 = params.C, params.C1
    return np.cosh(x) ** 2 * (C**n * np.sinh(x) ** (2 * n) + C1) ** (1.0 / n)


def bernoulli_rhs(params: RadialParams, n: int, x: float, g2: float) -> float:
    """g2' = 2 tanh(x) g2 + 2 C^n cosh^3 x sinh x (cosh^2 x sinh^2 x / g2)^{n-1}."""
    ch, sh = math.cosh(x), math.sinh(x)
    return 2 * math.tanh(x) * g2 + 2 * params.C**n * ch**3 * sh * (ch * ch * sh * sh / g2) ** (n - 1)


def bernoulli_ode_check(params: RadialParams, n: int, x0: float, x1: float,
                        rtol: float = 1e-9, points: int = 41) -> float:
    """Max relative deviation between an RK45 solution and ``g2_closed`` on [x0, x1]."""
    x0, x1 = _require_x(x0), _require_x(x1)
    if not x0 < x1:
        raise DomainError(f"need x0 < x1, got {x0}, {x1}")
    if int(n) != n or n < 1:
        raise DomainError(f"n must be a positive integer, got {n}")
    n = int(n)
    if params.C <= 0 or params.C1 < 0:
        raise DomainError(f"need C > 0 and C1 >= 0, got {params}")
    xs = np.linspace(x0, x1, points)
    sol = integrate.solve_ivp(lambda t, y: [bernoulli_rhs(params, n, t, y[0])], (x0, x1),
                              [float(g2_closed(params, n, x0))], method="RK45",
                              rtol=rtol, atol=1e-14, t_eval=xs)
    if not sol.success:
        raise NumericError(f"RK45 failed on [{x0}, {x1}] for n = {n}, {params}: {sol.message}")
    ref = g2_closed(params, n, xs)
    return float(np.max(np.abs(sol.y[0] - ref) / np.abs(ref)))
