"""The 2-form Delta on G x m and the checks built on it.

Delta extends w~ from the ray {xX : x > 0} to every w in m by
Ad(K)-equivariance.  Its coefficients are the kernels

    f'(r)/r,  (1/r)(f'(r)/r)',  (phi(r) - 1)/r^2,  (r phi'(r) - 2(phi(r) - 1))/r^4,

with r = |w|.  When C1 = 0 all four extend analytically to r = 0, which is
what makes the metric extend over the zero section.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .algebra import AlgebraModel
from .errors import DomainError, SingularExtensionError
from .kahler import w_closed_form
from .radial import RadialProfile, phi_k4, phi_m1_over_r2
from .registry import Family, RadialParams, SpaceDescriptor


def delta_form_eval(model: AlgebraModel, params: RadialParams, w, u1, u2, xi1, xi2,
                    profile: RadialProfile | None = None) -> float:
    """Delta_(e, w)((xi1, u1), (xi2, u2)) for w, u1, u2 in m and xi1, xi2 in g."""
    prof = profile or RadialProfile(model.desc, params)
    w, u1, u2, xi1, xi2 = (np.asarray(v, dtype=float) for v in (w, u1, u2, xi1, xi2))
    r = float(np.linalg.norm(w))
    if r == 0 and prof.params.C1 > 0:
        raise SingularExtensionError("Delta is undefined at w = 0 when C1 > 0")
    k1 = prof.fp_over_r(r)
    k2 = prof.k2(r)
    br = model.br
    b12 = br(xi1, xi2)
    val = (-k1 * (w @ b12)
           + k1 * (u1 @ xi2 - u2 @ xi1)
           + k2 * ((u1 @ w) * (w @ xi2) - (u2 @ w) * (w @ xi1)))
    cZ = prof.params.cZ
    if model.desc.is_complex_proj and cZ != 0:
        I = model.I
        Z0 = model.special["Z0"]
        k3 = phi_m1_over_r2(r)
        k4 = phi_k4(r)
        Iw = I @ w
        IwW = br(Iw, w)
        val += -(cZ * k3 * (IwW @ b12) - cZ * (Z0 @ b12))
        val += cZ * k4 * ((u1 @ w) * (IwW @ xi2) - (u2 @ w) * (IwW @ xi1))
        val += cZ * k4 * ((u1 @ Iw) * (w @ u2) - (u2 @ Iw) * (w @ u1))
        val += cZ * 2 * k3 * (br(I @ u1, w) @ xi2 - br(I @ u2, w) @ xi1 + u1 @ (I @ u2))
    return float(val)


def omega_tilde_on_ray(model: AlgebraModel, params: RadialParams, x: float, xi1, t1, xi2, t2,
                       profile: RadialProfile | None = None) -> float:
    """w~_(e, x)((xi1, t1 d/dx), (xi2, t2 d/dx)) from a(x) and a'(x)."""
    from .radial import vector_a, vector_a_prime

    prof = profile or RadialProfile(model.desc, params)
    a = vector_a(model, params, x, prof)
    ap = vector_a_prime(model, params, x, prof)
    xi1, xi2 = np.asarray(xi1), np.asarray(xi2)
    return float(t1 * (ap @ xi2) - t2 * (ap @ xi1) - a @ model.br(xi1, xi2))


# -- extension over the zero section -------------------------------------------------

@dataclass
class ExtensionResult:
    passed: bool
    converged: bool
    limit_wH: np.ndarray
    limit_wStar: list
    limit_eigs: np.ndarray
    expected_eigs: np.ndarray
    fp_over_x: np.ndarray
    diagnostic: str = ""


def expected_limit_eigs(desc: SpaceDescriptor, params: RadialParams) -> np.ndarray:
    """Eigenvalues of lim_{x->0} w(x) for C1 = 0, sorted."""
    C, cZ = params.C, params.cZ
    if desc.is_complex_proj:
        s = 2 * math.sqrt(C + cZ * cZ)
        pair = [s - 2 * abs(cZ), s + 2 * abs(cZ)]
        return np.sort(np.array(pair * desc.n))
    v = 2 * (2.0**desc.m_eps * C / desc.m_total) ** (1.0 / desc.m_total)
    return np.full(desc.m_total, v)


def check_extension(desc: SpaceDescriptor, params: RadialParams, m_max: int = 26,
                    ratio_tol: float = 1e-6) -> ExtensionResult:
    """Follow w(x) along x_m = 2^-m; PASS iff the limit exists and is positive definite.

    With C1 > 0, f'(x) -> C1^(1/m) so f'(x)/x doubles at each halving of x;
    that divergence is reported instead of a limit.
    """
    prof = RadialProfile(desc, params)
    xs = 2.0 ** -np.arange(4, m_max + 1)
    fpx = np.array([float(prof.f_prime(x)) / x for x in xs])
    growth = fpx[-1] / fpx[-2]
    converged = abs(growth - 1.0) < ratio_tol
    blk = w_closed_form(desc, params, float(xs[-1]), prof)
    eigs = np.sort(np.concatenate([np.linalg.eigvalsh(b) for b in blk.blocks()]))
    expected = expected_limit_eigs(desc, params)
    if not converged:
        diag = (f"f'(x)/x grows by a factor {growth:.4g} per halving of x "
                f"(value {fpx[-1]:.4g} at x = {xs[-1]:.3g}); Delta diverges at the zero section")
        return ExtensionResult(False, False, blk.wH, blk.wStar, eigs, expected, fpx, diag)
    ok = bool(np.all(eigs > 0))
    diag = "" if ok else "limit matrix is not positive definite"
    return ExtensionResult(ok, True, blk.wH, blk.wStar, eigs, expected, fpx, diag)


# -- Z2 invariance (real projective spaces) -----------------------------------------------

def reflection_element(model: AlgebraModel) -> np.ndarray:
    """An element of N_G(K) outside K: the extra component of O(n) (spheres) or the Weyl element of SU(2)."""
    desc = model.desc
    N = model.size
    if desc.is_sphere_like:
        k1 = np.eye(N)
        k1[0, 0] = -1.0
        k1[-1, -1] = -1.0
        return k1.astype(complex)
    if desc.family is Family.COMPLEX_PROJ and desc.n == 1:
        return np.array([[0, 1], [-1, 0]], dtype=complex)
    raise DomainError(f"Z2 invariance is defined for spheres and CP^1 = S^2 only, not {desc.name}")


@dataclass
class Z2Result:
    passed: bool
    max_defect: float
    samples: int
    details: dict = field(default_factory=dict)


def check_z2_invariance(model: AlgebraModel, params: RadialParams, x: float = 1.0,
                        seed: int = 0, samples: int = 8, tol: float = 1e-10) -> Z2Result:
    """Right-invariance of Delta under the reflection k1 (descent to RP^n).

    Compares Delta at (e, Ad w) on Ad-transformed arguments with Delta at (e, w)
    for random w in m of norm ``x`` and random tangent arguments.
    """
    k1 = reflection_element(model)
    Ad = model.Ad(k1)
    if np.linalg.norm(Ad @ model.P_m - model.P_m @ Ad) > 1e-10:
        raise DomainError("reflection does not preserve m")
    prof = RadialProfile(model.desc, params)
    rng = np.random.default_rng(seed)
    worst = 0.0
    for _ in range(samples):
        w = model.random(rng, "m")
        w *= x / np.linalg.norm(w)
        u1, u2 = model.random(rng, "m"), model.random(rng, "m")
        xi1, xi2 = model.random(rng, "g"), model.random(rng, "g")
        base = delta_form_eval(model, params, w, u1, u2, xi1, xi2, prof)
        moved = delta_form_eval(model, params, Ad @ w, Ad @ u1, Ad @ u2, Ad @ xi1, Ad @ xi2, prof)
        worst = max(worst, abs(moved - base) / (1.0 + abs(base)))
    return Z2Result(worst < tol, worst, samples, {"x": x, "seed": seed})
