"""Radial data of the Ricci-flat family: f', f'', phi and the curve a(x).

Two regimes exist.  For spheres, quaternionic projective spaces and the
Cayley plane (case 1) the profile is a power of a hyperbolic-sine integral,

    f'(x) = (C * I(x) + C1)^(1/m),  I(x) = int_0^x sinh(2t)^me sinh(t)^mh dt,

while complex projective spaces (case 2) admit the extra parameter cZ and a
fully explicit f'.  Everything is evaluated in logarithmic form so that the
exponential growth at large x never overflows and the x -> 0 limits stay
accurate.
"""
from __future__ import annotations

import functools
import math

import numpy as np
from scipy import integrate, special

from .errors import DomainError, NumericError
from .registry import RadialParams, SpaceDescriptor, validate_params

QUAD_EPSREL = 1e-13
SERIES_CUTOFF = 0.1


# -- elementary stable functions ---------------------------------------------

def log_sinh(y: float) -> float:
    """log(sinh y) for y > 0 without overflow."""
    if y > 20.0:
        return y - math.log(2.0) + math.log1p(-math.exp(-2.0 * y))
    return math.log(math.sinh(y))


def log_shc(u: float) -> float:
    """log(sinh(u)/u) for u >= 0."""
    if u == 0.0:
        return 0.0
    if u > 20.0:
        return log_sinh(u) - math.log(u)
    return math.log(math.sinh(u) / u)


def q_coth(y: float) -> float:
    """(y coth y - 1)/y^2, the logarithmic derivative of sinh(y)/y divided by y."""
    if y < SERIES_CUTOFF:
        y2 = y * y
        # y coth y = sum 2^{2k} B_{2k} y^{2k} / (2k)!
        return 1 / 3 - y2 / 45 + 2 * y2**2 / 945 - y2**3 / 4725 + 2 * y2**4 / 93555
    return (y / math.tanh(y) - 1.0) / (y * y)


@functools.lru_cache(maxsize=None)
def _tanh_coeffs(K: int = 12):
    # tanh r = sum_{k>=1} t_k r^{2k-1}
    B = special.bernoulli(2 * K)
    return tuple(
        2 ** (2 * k) * (2 ** (2 * k) - 1) * B[2 * k] / math.factorial(2 * k) for k in range(1, K + 1)
    )


@functools.lru_cache(maxsize=None)
def _sech_coeffs(K: int = 12):
    # sech r = sum_{k>=0} a_k r^{2k}, a_k = E_{2k}/(2k)!
    E = special.euler(2 * K)
    return tuple(E[2 * k] / math.factorial(2 * k) for k in range(0, K + 1))


def shc(r: float) -> float:
    return 1.0 if r == 0 else math.sinh(r) / r


def thc(r: float) -> float:
    return 1.0 if r == 0 else math.tanh(r) / r


def shc_d_over_r(r: float) -> float:
    """(r cosh r - sinh r)/r^3 = (sinh(r)/r)'/r."""
    if r < SERIES_CUTOFF:
        return sum(2 * k * r ** (2 * k - 2) / math.factorial(2 * k + 1) for k in range(1, 9))
    return (r * math.cosh(r) - math.sinh(r)) / r**3


def thc_d_over_r(r: float) -> float:
    """(r sech^2 r - tanh r)/r^3 = (tanh(r)/r)'/r."""
    if r < SERIES_CUTOFF:
        t = _tanh_coeffs()
        return sum((2 * k - 2) * t[k - 1] * r ** (2 * k - 4) for k in range(2, len(t) + 1))
    return (r / math.cosh(r) ** 2 - math.tanh(r)) / r**3


def phi(x: float) -> float:
    return 1.0 / math.cosh(x)


def dphi(x: float) -> float:
    return -math.tanh(x) / math.cosh(x)


def phi_m1_over_r2(r: float) -> float:
    """(phi(r) - 1)/r^2 = -2 (sinh(r/2)/r)^2 / cosh r."""
    if r == 0:
        return -0.5
    return -2.0 * (math.sinh(r / 2) / r) ** 2 / math.cosh(r)


def phi_k4(r: float) -> float:
    """(r phi'(r) - 2(phi(r) - 1))/r^4, equal to 5/12 at r = 0."""
    if r < SERIES_CUTOFF:
        a = _sech_coeffs()
        return sum((2 * k - 2) * a[k] * r ** (2 * k - 4) for k in range(2, len(a)))
    return (2.0 * (1.0 - phi(r)) - r * math.tanh(r) * phi(r)) / r**4


# -- the case-1 integral --------------------------------------------------------

def _log_weight(s, x, me, mh):
    """log of (2s)^me s^mh shc(2xs)^me shc(xs)^mh."""
    out = 0.0
    if me:
        out += me * (math.log(2 * s) + log_shc(2 * x * s))
    if mh:
        out += mh * (math.log(s) + log_shc(x * s))
    return out


def _quad01(fn):
    val, err = integrate.quad(fn, 0.0, 1.0, epsabs=0.0, epsrel=QUAD_EPSREL, limit=200)
    if not math.isfinite(val) or val <= 0:
        raise NumericError(f"quadrature returned {val}")
    return val


@functools.lru_cache(maxsize=65536)
def log_J(me: int, mh: int, x: float) -> float:
    """log J(x) with I(x) = x^m J(x), J(x) = int_0^1 (sinh(2xs)/x)^me (sinh(xs)/x)^mh ds.

    The integrand is rescaled by its value at s = 1 so that quad sees O(1) numbers.
    """
    if me == 0 and mh == 0:
        return 0.0
    L1 = _log_weight(1.0, x, me, mh)

    def fn(s):
        return 0.0 if s <= 0 else math.exp(_log_weight(s, x, me, mh) - L1)

    return L1 + math.log(_quad01(fn))


@functools.lru_cache(maxsize=65536)
def J_prime_over_x_ratio(me: int, mh: int, x: float) -> float:
    """J'(x) / (x J(x)), finite as x -> 0."""
    L1 = _log_weight(1.0, x, me, mh)

    def w(s):
        return 0.0 if s <= 0 else math.exp(_log_weight(s, x, me, mh) - L1)

    def fn(s):
        if s <= 0:
            return 0.0
        return w(s) * s * s * (4 * me * q_coth(2 * x * s) + mh * q_coth(x * s))

    num, _ = integrate.quad(fn, 0.0, 1.0, epsabs=0.0, epsrel=QUAD_EPSREL, limit=200)
    return num / _quad01(w)


def _sinh_power_closed(k: int, U: float) -> float:
    """S_k(U) = int_0^U sinh^k u du by the reduction formula."""
    if k == 0:
        return U
    if k == 1:
        return 2.0 * math.sinh(U / 2) ** 2
    return math.sinh(U) ** (k - 1) * math.cosh(U) / k - (k - 1) / k * _sinh_power_closed(k - 2, U)


def sinh_power_integral(me: int, mh: int, x: float, method: str = "auto") -> float:
    """I(x) = int_0^x sinh(2t)^me sinh(t)^mh dt.

    ``method`` is ``"quad"`` (log-scaled adaptive quadrature), ``"closed"``
    (reduction formula, only for mh = 0) or ``"auto"``.
    """
    x = _require_x(x)
    m = 1 + me + mh
    if method == "closed" or (method == "auto" and mh == 0 and x >= 0.25):
        if mh != 0:
            raise DomainError("closed form only available for m_half = 0")
        val = 0.5 * _sinh_power_closed(me, 2.0 * x)
        if math.isfinite(val) and val > 0:
            return val
        if method == "closed":
            raise NumericError(f"closed form overflowed at x = {x}")
    return math.exp(m * math.log(x) + log_J(me, mh, x))


def _require_x(x) -> float:
    x = float(x)
    if not (x > 0) or not math.isfinite(x):
        raise DomainError(f"x must be positive and finite, got {x}")
    return x


# -- profiles ---------------------------------------------------------------------

class RadialProfile:
    """f', f'' and the Delta-form kernels for one space and parameter set.

    Instances are immutable; evaluation caches live in module-level
    ``lru_cache`` tables keyed by (multiplicities, x), which makes concurrent
    evaluation return identical values.
    """

    def __init__(self, desc: SpaceDescriptor, params: RadialParams, fast_path: bool = True):
        self.desc = desc
        self.params = validate_params(desc, params)
        self.fast_path = fast_path

    @property
    def me(self):
        return self.desc.m_eps

    @property
    def mh(self):
        return self.desc.m_half

    @property
    def m(self):
        return self.desc.m_total

    @property
    def case(self):
        return self.desc.radial_case

    # -- log f' ---------------------------------------------------------------
    def _log_case1_core(self, x):
        """log(C * I(x))."""
        C = self.params.C
        if self.fast_path and self.mh == 0 and x >= 0.25:
            I = sinh_power_integral(self.me, 0, x, "auto")
            return math.log(C) + math.log(I)
        return math.log(C) + self.m * math.log(x) + log_J(self.me, self.mh, x)

    def _log_P_root(self, x):
        """log (C^n sinh^{2n} x + C1)^{1/n} for case 2."""
        n, C, C1 = self.desc.n, self.params.C, self.params.C1
        a = n * math.log(C) + 2 * n * log_sinh(x)
        if C1 == 0:
            return a / n
        return float(np.logaddexp(a, math.log(C1))) / n

    def log_f_prime(self, x: float) -> float:
        x = _require_x(x)
        if self.case == 1:
            core = self._log_case1_core(x)
            C1 = self.params.C1
            if C1 > 0:
                core = float(np.logaddexp(core, math.log(C1)))
            return core / self.m
        cZ = self.params.cZ
        lp = self._log_P_root(x)
        if cZ == 0:
            return lp / 2
        return float(np.logaddexp(lp, 2 * math.log(abs(cZ) * math.tanh(x)))) / 2

    def f_prime(self, x):
        return _vec(lambda t: math.exp(self.log_f_prime(t)), x)

    def f_double_prime(self, x):
        return _vec(self._fpp, x)

    def _fpp(self, x):
        x = _require_x(x)
        lfp = self.log_f_prime(x)
        if self.case == 1:
            lg = 0.0
            if self.me:
                lg += self.me * log_sinh(2 * x)
            if self.mh:
                lg += self.mh * log_sinh(x)
            return math.exp(math.log(self.params.C) + lg - math.log(self.m) - (self.m - 1) * lfp)
        n, C, cZ = self.desc.n, self.params.C, self.params.cZ
        # C^n P^{(1-n)/n} sinh^{2n-1} x cosh x with P^{1/n} = exp(lp)
        lp = self._log_P_root(x)
        log_t1 = n * math.log(C) + (1 - n) * lp + (2 * n - 1) * log_sinh(x) + math.log(math.cosh(x))
        t2 = cZ * cZ * math.sinh(x) / math.cosh(x) ** 3
        return math.exp(log_t1 - lfp) + t2 * math.exp(-lfp)

    def log_fu_radicand(self, x: float) -> float:
        """log(f' f'' + cZ^2 phi phi').

        On CP^n the cZ^2 parts of f' f'' and phi phi' cancel identically, leaving
        C^n P^{(1-n)/n} sinh^{2n-1} x cosh x with P = C^n sinh^{2n} x + C1; using
        that form avoids the cancellation, which is total when C1 > 0 and x -> 0.
        """
        x = _require_x(x)
        if self.case == 1:
            lg = 0.0
            if self.me:
                lg += self.me * log_sinh(2 * x)
            if self.mh:
                lg += self.mh * log_sinh(x)
            return math.log(self.params.C) + lg - math.log(self.m) + (2 - self.m) * self.log_f_prime(x)
        n, C = self.desc.n, self.params.C
        return (n * math.log(C) + (1 - n) * self._log_P_root(x) + (2 * n - 1) * log_sinh(x)
                + math.log(math.cosh(x)))

    # -- kernels used by the Delta-form ---------------------------------------------
    def fp_over_r(self, r: float) -> float:
        """f'(r)/r, with the r = 0 limit when C1 = 0."""
        if r == 0:
            if self.params.C1 > 0:
                return math.inf
            return self.fp_over_r_limit()
        if self.params.C1 == 0:
            if self.case == 1:
                return math.exp((math.log(self.params.C) + log_J(self.me, self.mh, r)) / self.m)
            Q = self.params.C * shc(r) ** 2 + self.params.cZ**2 * thc(r) ** 2
            return math.sqrt(Q)
        return float(self.f_prime(r)) / r

    def fp_over_r_limit(self) -> float:
        """lim_{x->0} f'(x)/x for C1 = 0."""
        C, cZ = self.params.C, self.params.cZ
        if self.case == 1:
            return (2.0**self.me * C / self.m) ** (1.0 / self.m)
        return math.sqrt(C + cZ * cZ)

    def k2(self, r: float) -> float:
        """(1/r) (f'(r)/r)' = (r f''(r) - f'(r))/r^3."""
        if self.params.C1 == 0:
            F = self.fp_over_r(r)
            if self.case == 1:
                return F * J_prime_over_x_ratio(self.me, self.mh, r) / self.m
            C, cZ = self.params.C, self.params.cZ
            return (C * shc(r) * shc_d_over_r(r) + cZ * cZ * thc(r) * thc_d_over_r(r)) / F
        if r == 0:
            return -math.inf
        return (r * float(self.f_double_prime(r)) - float(self.f_prime(r))) / r**3


def _vec(fn, x):
    if np.ndim(x) == 0:
        return fn(float(x))
    arr = np.asarray(x, dtype=float)
    return np.array([fn(float(v)) for v in arr.ravel()]).reshape(arr.shape)


def f_prime(desc: SpaceDescriptor, params: RadialParams, x):
    return RadialProfile(desc, params).f_prime(x)


def f_double_prime(desc: SpaceDescriptor, params: RadialParams, x):
    return RadialProfile(desc, params).f_double_prime(x)


def vector_a_parts(model, params: RadialParams, x: float, profile: RadialProfile | None = None):
    """a(x) as a list of (coefficient, unit basis vector) pairs.

    On CP^n, a = f' X + cZ phi Z - cZ/2 Z1 is assembled as f' X + cZ (phi - 1) Z - cZ Z0
    (using Z1 = 2(Z + Z0)): Z0 commutes with k, so the O(cZ/x^2) pieces that
    the first form produces against S_x-images never have to cancel.
    """
    prof = profile or RadialProfile(model.desc, params)
    x = _require_x(x)
    parts = [(float(prof.f_prime(x)), model.X)]
    cZ = prof.params.cZ
    if model.desc.is_complex_proj and cZ != 0:
        parts.append((cZ * x * x * phi_m1_over_r2(x), model.special["Z"]))
        parts.append((-cZ, model.special["Z0"]))
    return parts


def vector_a(model, params: RadialParams, x: float, profile: RadialProfile | None = None) -> np.ndarray:
    """a(x) = f'(x) X + cZ phi(x) Z - cZ/2 Z1 (coordinates); f'(x) X off CP^n."""
    return sum(c * v for c, v in vector_a_parts(model, params, x, profile))


def vector_a_prime(model, params: RadialParams, x: float, profile: RadialProfile | None = None) -> np.ndarray:
    """a'(x) = f''(x) X + cZ phi'(x) Z, differentiated analytically."""
    prof = profile or RadialProfile(model.desc, params)
    x = _require_x(x)
    a = prof.f_double_prime(x) * model.X
    cZ = prof.params.cZ
    if model.desc.is_complex_proj and cZ != 0:
        a = a + cZ * dphi(x) * model.special["Z"]
    return a
