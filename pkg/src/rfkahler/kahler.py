"""Hermitian matrix functions w_H(x), w_*(x) and the Kaehler / Ricci-flat checks.

Two independent routes produce the same matrices:

* ``w_closed_form`` evaluates the explicit entries in terms of f', f'';
* ``w_structural_oracle`` rebuilds them from Lie brackets: it forms the
  complexified fields T_j at (e, x), the 2-form
  w~((xi1, t1), (xi2, t2)) = t1 <a', xi2> - t2 <a', xi1> - <a, [xi1, xi2]>,
  and returns w_jk = i w~(T_j, conj T_k).

The index order of the T_j is X, xi_eps^1..m_eps, xi_half^1..m_half; the
first one or two indices form the w_H block, the rest form w_*.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import mpmath
import numpy as np

from .algebra import EPS, HALF, LAMBDA_PRIME, AlgebraModel, R_matrix, S_matrix
from .errors import OracleUnavailableError
from .radial import RadialProfile, _require_x, phi, vector_a_parts, vector_a_prime
from .registry import RadialParams, SpaceDescriptor

CLOSED_FORM = "closed_form"
STRUCTURAL_ORACLE = "structural_oracle"


@dataclass
class HermitianBlock:
    """w_H and the diagonal blocks of w_* at one radius ``x``."""

    x: float
    wH: np.ndarray
    wStar: list
    source: str
    residuals: dict = field(default_factory=dict)
    wH_det: float | None = None  # accurate det w_H when cancellation makes the entries unreliable

    def det_product(self) -> float:
        d = np.linalg.det(self.wH).real
        for b in self.wStar:
            d *= np.linalg.det(b).real
        return float(d)

    def blocks(self):
        return [self.wH, *self.wStar]


def _profile(desc, params, profile):
    return profile if profile is not None else RadialProfile(desc, params)


def _h_size(desc: SpaceDescriptor) -> int:
    return 2 if desc.sigma_H_nonempty else 1


def w_closed_form(desc: SpaceDescriptor, params: RadialParams, x: float, profile=None) -> HermitianBlock:
    """Explicit w_H, w_* entries.

    ``profile`` may be any object with ``f_prime``/``f_double_prime`` and a
    ``params`` attribute; it defaults to the family's own RadialProfile.
    """
    x = _require_x(x)
    prof = _profile(desc, params, profile)
    fp = float(prof.f_prime(x))
    fpp = float(prof.f_double_prime(x))
    cZ = prof.params.cZ
    ch, sh = math.cosh(x), math.sinh(x)
    w_eps = 2.0 * fp / (ch * sh)
    w_half = fp / (math.cosh(x / 2) * math.sinh(x / 2))

    if desc.is_complex_proj:
        off = 2j * cZ / ch**2
        wH = np.array([[2 * fpp, off], [np.conj(off), w_eps]], dtype=complex)
        off_s = 2j * cZ / ch  # equals i cZ (1 - 1/cosh x) / sinh^2(x/2)
        blk = np.array([[w_half, off_s], [np.conj(off_s), w_half]], dtype=complex)
        wStar = [blk.copy() for _ in range(desc.n - 1)]
        # det w_H = 4 (f' f'' + cZ^2 phi phi') / (cosh x sinh x)
        det = 4.0 * math.exp(prof.log_fu_radicand(x)) / (ch * sh) if hasattr(prof, "log_fu_radicand") else None
        return HermitianBlock(x, wH, wStar, CLOSED_FORM, wH_det=det)

    diag = [w_eps] * desc.m_eps + [w_half] * desc.m_half
    k = _h_size(desc) - 1
    wH = np.diag([2 * fpp] + diag[:k]).astype(complex)
    wStar = [np.array([[v]], dtype=complex) for v in diag[k:]]
    return HermitianBlock(x, wH, wStar, CLOSED_FORM)


# -- structural oracle ----------------------------------------------------------

def omega_matrix(model: AlgebraModel, a: np.ndarray, a_prime: np.ndarray) -> np.ndarray:
    """Matrix Omega of w~ on g x R at (e, x): w~(u, v) = u^T Omega v.

    The last coordinate is the radial component t.
    """
    d = model.dim
    Om = np.zeros((d + 1, d + 1))
    Om[:d, :d] = -np.einsum("c,abc->ab", a, model.F)
    Om[d, :d] = a_prime
    Om[:d, d] = -a_prime
    return Om


def _bracket_form(model: AlgebraModel, v: np.ndarray) -> np.ndarray:
    """B_ab = <v, [e_a, e_b]> with structural zeros cleared.

    Entries such as <Z0, [k, k]> vanish identically but come out near 1e-16;
    the oracle multiplies them by 1/sinh^2(x/2), so they are removed here,
    relative to the unit vector v and independent of any coefficient.
    """
    B = np.einsum("c,abc->ab", v, model.F)
    B[np.abs(B) < 1e-14] = 0.0
    return B


def omega_matrix_parts(model: AlgebraModel, parts, a_prime: np.ndarray) -> np.ndarray:
    """Omega for a = sum(c * v for c, v in parts), see ``omega_matrix``."""
    d = model.dim
    Om = np.zeros((d + 1, d + 1))
    for c, v in parts:
        Om[:d, :d] -= c * _bracket_form(model, v)
    Om[d, :d] = a_prime
    Om[:d, d] = -a_prime
    return Om


def z_fields(model: AlgebraModel, x: float) -> np.ndarray:
    """Columns are the complex fields T_j = Z^X, Z^{xi_eps^j}, Z^{xi_half^k} at (e, x)."""
    d = model.dim
    cols = [np.concatenate([model.X, [-1j]])]
    # R_x xi = xi / cosh(l x), S_x xi = T xi / sinh(l x) = -zeta / sinh(l x); using the
    # paired basis directly avoids projector round-off, which 1/sinh^2 would amplify
    for lam, xis, zetas in ((EPS, model.basis_m_eps, model.basis_k_eps),
                            (HALF, model.basis_m_half, model.basis_k_half)):
        lx = LAMBDA_PRIME[lam] * x
        for xi, zeta in zip(xis, zetas):
            cols.append(np.concatenate([xi / np.cosh(lx) + 1j * zeta / np.sinh(lx), [0.0]]))
    return np.array(cols, dtype=complex).T.reshape(d + 1, -1)


def _oracle_parts(model, params, x, profile=None):
    if not model.desc.has_matrix_model:
        raise OracleUnavailableError(f"{model.desc.name}: no matrix model")
    prof = _profile(model.desc, params, profile)
    parts = vector_a_parts(model, params, x, prof)
    ap = vector_a_prime(model, params, x, prof)
    Om = omega_matrix_parts(model, parts, ap)
    Tf = z_fields(model, x)
    return Om, Tf


def w_structural_oracle(model: AlgebraModel, params: RadialParams, x: float, profile=None) -> HermitianBlock:
    """w_jk = i w~(T_j, conj T_k) from brackets, plus structural residuals.

    ``residuals`` holds the largest |w~(T_j, T_k)| (must vanish), the largest
    entry outside the block pattern, and the Hermitian defect.
    """
    x = _require_x(x)
    Om, Tf = _oracle_parts(model, params, x, profile)
    W = 1j * (Tf.T @ Om @ Tf.conj())
    holo = Tf.T @ Om @ Tf
    desc = model.desc
    p = _h_size(desc)
    mask = np.zeros(W.shape, dtype=bool)
    mask[:p, :p] = True
    if desc.is_complex_proj:
        blocks = [(p + 2 * j, p + 2 * j + 2) for j in range(desc.n - 1)]
    else:
        blocks = [(i, i + 1) for i in range(p, W.shape[0])]
    for lo, hi in blocks:
        mask[lo:hi, lo:hi] = True
    scale = max(1.0, float(np.max(np.abs(W))))
    residuals = {
        "holomorphic": float(np.max(np.abs(holo))) / scale,
        "off_block": float(np.max(np.abs(W[~mask]), initial=0.0)) / scale,
        "hermitian": float(np.max(np.abs(W - W.conj().T))) / scale,
    }
    wH = W[:p, :p]
    wStar = [W[lo:hi, lo:hi] for lo, hi in blocks]
    return HermitianBlock(x, wH, wStar, STRUCTURAL_ORACLE, residuals)


def omega_kernel(model: AlgebraModel, params: RadialParams, x: float, tol: float = 1e-9):
    """Null space of w~ on g x R at (e, x), as orthonormal rows."""
    prof = RadialProfile(model.desc, params)
    Om = omega_matrix_parts(model, vector_a_parts(model, params, x, prof), vector_a_prime(model, params, x, prof))
    U, s, Vt = np.linalg.svd(Om)
    rank = int(np.sum(s > tol * s[0]))
    return Vt[rank:]


def closedness_residual(model: AlgebraModel, a: np.ndarray, xi, eta, zeta) -> float:
    """<a, [[xi, eta], zeta]> + cyclic; zero by the Jacobi identity."""
    br = model.br
    return float(abs(a @ (br(br(xi, eta), zeta) + br(br(eta, zeta), xi) + br(br(zeta, xi), eta))))


# -- commutation relations -------------------------------------------------------

def check_commutation(model: AlgebraModel, params: RadialParams, x: float,
                      c1: float | None = None, cY: float = 0.0) -> tuple[float, float]:
    """Residuals of the two commutation relations on m+, relative to their largest term.

    With a^k = cZ phi(x) Z, z_h = c1 Z1 and a^m = cY/sinh(x) Y (CP^n) the
    relations hold exactly for c1 = -cZ/2, cY = 0; other values can be
    supplied as negative controls.  Off CP^n all three components vanish.
    """
    x = _require_x(x)
    d = model.dim
    R = R_matrix(model, x)
    S = S_matrix(model, x)
    if model.desc.is_complex_proj:
        cZ = params.cZ
        c1 = -0.5 * cZ if c1 is None else c1
        sp = model.special
        ak = cZ * phi(x) * sp["Z"]
        zh = c1 * sp["Z1"]
        am = cY / math.sinh(x) * sp["Y"]
    else:
        ak = zh = am = np.zeros(d)
    ad = model.ad
    op1 = R @ ad(ak) @ R + S @ ad(ak) @ S + (R @ R + S @ S) @ ad(zh)
    op2 = R @ ad(am) @ S - S @ ad(am) @ R
    B = model.basis_m_plus
    if B.shape[0] == 0:
        return 0.0, 0.0
    # the terms grow like 1/sinh^2 x as x -> 0 and cancel; measure the sum against them
    terms1 = (R @ ad(ak) @ R, S @ ad(ak) @ S, (R @ R + S @ S) @ ad(zh))
    terms2 = (R @ ad(am) @ S, S @ ad(am) @ R)
    scale1 = max(1.0, max(float(np.linalg.norm(t @ v)) for t in terms1 for v in B))
    scale2 = max(1.0, max(float(np.linalg.norm(t @ v)) for t in terms2 for v in B))
    r1 = max(float(np.linalg.norm(op1 @ v)) for v in B) / scale1
    r2 = max(float(np.linalg.norm(op2 @ v)) for v in B) / scale2
    return r1, r2


# -- positivity --------------------------------------------------------------------

@dataclass
class PositivityResult:
    positive: bool
    wH_min_eig: float
    wStar_min_eig: float  # nan when w_* is empty
    minors_positive: bool

    @property
    def min_eig(self) -> float:
        return float(np.nanmin([self.wH_min_eig, self.wStar_min_eig]))


def _leading_minors_positive(M: np.ndarray) -> bool:
    return all(np.linalg.det(M[:k, :k]).real > 0 for k in range(1, M.shape[0] + 1))


def _min_eig_2x2(M: np.ndarray, det: float) -> float:
    """Smaller eigenvalue of a 2x2 Hermitian matrix as det / (larger eigenvalue)."""
    a, d = M[0, 0].real, M[1, 1].real
    big = 0.5 * (a + d + math.hypot(a - d, 2 * abs(M[0, 1])))
    return det / big


def check_positivity(block: HermitianBlock) -> PositivityResult:
    """Smallest eigenvalues of w_H and the w_* blocks; Sylvester minors as cross-check.

    When the block carries an accurate det w_H (2 x 2 case), the small
    eigenvalue and the second minor of w_H are taken from it.
    """
    if block.wH_det is not None and block.wH.shape == (2, 2):
        eH = _min_eig_2x2(block.wH, block.wH_det)
        minors_H = block.wH[0, 0].real > 0 and block.wH_det > 0
    else:
        eH = float(np.min(np.linalg.eigvalsh(block.wH)))
        minors_H = _leading_minors_positive(block.wH)
    eS = min((float(np.min(np.linalg.eigvalsh(b))) for b in block.wStar), default=float("nan"))
    pos = eH > 0 and (math.isnan(eS) or eS > 0)
    minors = minors_H and all(_leading_minors_positive(b) for b in block.wStar)
    return PositivityResult(pos, eH, eS, minors)


# -- Ricci-flatness certificate ----------------------------------------------------

def det_product_constant(desc: SpaceDescriptor, params: RadialParams) -> float:
    """Value of det w_H * det w_* along the Ricci-flat family.

    Case 1: 2^{2 m_eps + m_half + 1} C / m.  CP^n: 2^{2n} C^n.
    """
    if desc.is_complex_proj:
        return 2.0 ** (2 * desc.n) * params.C**desc.n
    return 2.0 ** (2 * desc.m_eps + desc.m_half + 1) * params.C / desc.m_total


MP_DPS = 60


def _cp_entries_mp(n: int, params: RadialParams, x: float):
    """f', f'' and the hyperbolic factors of CP^n at ``MP_DPS`` digits."""
    with mpmath.workdps(MP_DPS):
        C, C1, cZ, x = (mpmath.mpf(v) for v in (params.C, params.C1, params.cZ, x))
        ch, sh = mpmath.cosh(x), mpmath.sinh(x)
        P = C**n * sh ** (2 * n) + C1
        fp = mpmath.sqrt(P ** (mpmath.mpf(1) / n) + cZ**2 * (sh / ch) ** 2)
        fpp = (C**n * P ** (mpmath.mpf(1 - n) / n) * sh ** (2 * n - 1) * ch + cZ**2 * sh / ch**3) / fp
        return C, cZ, fp, fpp, ch, sh, mpmath.cosh(x / 2), mpmath.sinh(x / 2)


def det_product(desc: SpaceDescriptor, params: RadialParams, x: float, profile=None) -> float:
    """det w_H * det w_* from the closed-form entries.

    On CP^n with C1 > 0 and cZ != 0, det w_H tends to 0 as x -> 0 while its
    two terms stay O(cZ^2), so double precision loses every digit; the
    entries are therefore evaluated with mpmath on that family.
    """
    if profile is not None or not desc.is_complex_proj:
        return w_closed_form(desc, params, x, profile).det_product()
    n = desc.n
    with mpmath.workdps(MP_DPS):
        C, cZ, fp, fpp, ch, sh, hch, hsh = _cp_entries_mp(n, params, x)
        dH = 2 * fpp * 2 * fp / (ch * sh) - 4 * cZ**2 / ch**4
        dS = (fp / (hch * hsh)) ** 2 - (cZ * (1 - 1 / ch) / hsh**2) ** 2
        return float(dH * dS ** (n - 1))


def grouped_product(desc: SpaceDescriptor, params: RadialParams, x: float, profile=None) -> float:
    """(f''f'/(ch sh) - cZ^2/ch^4) * (f'^2/(ch^2(x/2) sh^2(x/2)) - cZ^2 (1 - 1/ch)^2/sh^4(x/2))^{n-1}."""
    if profile is None and desc.is_complex_proj:
        with mpmath.workdps(MP_DPS):
            C, cZ, fp, fpp, ch, sh, hch, hsh = _cp_entries_mp(desc.n, params, x)
            b = fpp * fp / (ch * sh) - cZ**2 / ch**4
            dd = fp * fp / (hch * hsh) ** 2 - cZ**2 * (1 - 1 / ch) ** 2 / hsh**4
            return float(b * dd ** (desc.n - 1))
    prof = _profile(desc, params, profile)
    fp, fpp = float(prof.f_prime(x)), float(prof.f_double_prime(x))
    cZ = prof.params.cZ
    ch, sh = math.cosh(x), math.sinh(x)
    b = fpp * fp / (ch * sh) - cZ**2 / ch**4
    hch, hsh = math.cosh(x / 2), math.sinh(x / 2)
    dd = fp * fp / (hch * hsh) ** 2 - cZ**2 * (1 - 1 / ch) ** 2 / hsh**4
    return b * dd ** (desc.n - 1)


@dataclass
class DetConstancyResult:
    constant: float
    max_rel_deviation: float
    expected: float
    grouped_rel_error: float | None  # CP^n only
    passed: bool
    values: np.ndarray


def check_det_constancy(desc: SpaceDescriptor, params: RadialParams, grid, tol: float = 1e-8,
                        profile=None) -> DetConstancyResult:
    """det w_H * det w_* over ``grid``; PASS iff the relative spread is below ``tol``."""
    vals = np.array([det_product(desc, params, x, profile) for x in grid])
    const = float(np.mean(vals))
    dev = float(np.max(np.abs(vals - const)) / abs(const))
    grouped = None
    if desc.is_complex_proj:
        target = 2.0 ** (2 * desc.n - 2) * params.C**desc.n
        g = np.array([grouped_product(desc, params, x, profile) for x in grid])
        grouped = float(np.max(np.abs(g - target)) / target)
    ok = dev < tol and (grouped is None or grouped < tol)
    return DetConstancyResult(const, dev, det_product_constant(desc, params), grouped, ok, vals)


class CustomProfile:
    """Ad-hoc (f', f'') pair, e.g. a non-solution used as a negative control."""

    def __init__(self, fp, fpp, params: RadialParams):
        self._fp, self._fpp, self.params = fp, fpp, params

    def f_prime(self, x):
        return self._fp(x)

    def f_double_prime(self, x):
        return self._fpp(x)


def compare_blocks(a: HermitianBlock, b: HermitianBlock) -> float:
    """max |a - b| / (1 + |b|) entrywise over all blocks."""
    worst = 0.0
    for A, B in zip(a.blocks(), b.blocks()):
        worst = max(worst, float(np.max(np.abs(A - B) / (1.0 + np.abs(B)))))
    return worst
