"""Matrix models of so(n+1), su(n+1) and sp(n+1) with the symmetric-pair grading.

Elements of g are skew-Hermitian matrices.  Internally every model works in
real coordinates with respect to an orthonormal basis ``E`` of g, so that

* the invariant form <A, B> = -s tr(AB) becomes the Euclidean dot product,
* brackets are evaluated from precomputed structure constants,
* operators (ad, sigma, T, R_x, S_x, J) are plain ``d x d`` real matrices.

Complexified vectors of g^C are complex coordinate vectors; the bracket and
the form extend complex-bilinearly simply because both are written as
multilinear contractions of the coordinates.
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np
import scipy.linalg

from .errors import DomainError, ModelConstructionError, UnsupportedModelError
from .registry import Family, SpaceDescriptor

EIG_TOL = 1e-8
EPS, HALF = "eps", "half"
LAMBDA_PRIME = {EPS: 1.0, HALF: 0.5}


def _unit(N: int, i: int, j: int) -> np.ndarray:
    E = np.zeros((N, N), dtype=complex)
    E[i, j] = 1.0
    return E


def bracket(u: np.ndarray, v: np.ndarray) -> np.ndarray:
    """Matrix commutator ``uv - vu``."""
    u = np.asarray(u)
    v = np.asarray(v)
    if u.shape != v.shape or u.ndim != 2 or u.shape[0] != u.shape[1]:
        raise DomainError(f"bracket of incompatible shapes {u.shape} and {v.shape}")
    return u @ v - v @ u


def _mgs(vectors, tol=1e-9):
    """Modified Gram-Schmidt on rows of ``vectors`` (Euclidean), dropping dependent ones."""
    basis: list[np.ndarray] = []
    for v in np.asarray(vectors, dtype=float):
        w = v.copy()
        for _ in range(2):  # second pass for numerical orthogonality
            for b in basis:
                w -= (b @ w) * b
        nrm = np.linalg.norm(w)
        if nrm > tol:
            basis.append(w / nrm)
    if not basis:
        return np.zeros((0, np.asarray(vectors).shape[-1]))
    return np.array(basis)


# -- canonical spanning sets --------------------------------------------------

def _su_span(N: int) -> list[np.ndarray]:
    out = []
    for j in range(N):
        for k in range(j + 1, N):
            out.append(_unit(N, j, k) - _unit(N, k, j))
            out.append(1j * (_unit(N, j, k) + _unit(N, k, j)))
    for j in range(N - 1):
        out.append(1j * (_unit(N, j, j) - _unit(N, j + 1, j + 1)))
    return out


def _so_span(N: int) -> list[np.ndarray]:
    return [_unit(N, j, k) - _unit(N, k, j) for j in range(N) for k in range(j + 1, N)]


def _sp_embed(A: np.ndarray, B: np.ndarray) -> np.ndarray:
    return np.block([[A, B], [-B.conj(), A.conj()]])


def _sp_span(N: int) -> list[np.ndarray]:
    """sp(N) as 2N x 2N matrices [[A, B], [-conj B, conj A]], A in u(N), B symmetric."""
    zero = np.zeros((N, N), dtype=complex)
    out = []
    for j in range(N):
        for k in range(j + 1, N):
            out.append(_sp_embed(_unit(N, j, k) - _unit(N, k, j), zero))
            out.append(_sp_embed(1j * (_unit(N, j, k) + _unit(N, k, j)), zero))
    for j in range(N):
        out.append(_sp_embed(1j * _unit(N, j, j), zero))
    for j in range(N):
        for k in range(j, N):
            S = _unit(N, j, k) + _unit(N, k, j) if j != k else _unit(N, j, j)
            out.append(_sp_embed(zero, S))
            out.append(_sp_embed(zero, 1j * S))
    return out


@dataclass(frozen=True, eq=False)
class AlgebraModel:
    """Explicit realisation of g = k + m for a rank-one symmetric pair.

    All vector-valued attributes are coordinate arrays in the orthonormal
    basis ``E`` (shape ``(dim_g, N, N)``).  Graded bases are stored as row
    stacks, e.g. ``basis_m_eps[j]`` is the coordinate vector of xi_eps^{j+1}.
    """

    desc: SpaceDescriptor
    E: np.ndarray
    inner_scale: float
    F: np.ndarray  # structure constants: [E_a, E_b] = F[a, b, c] E_c
    sigma: np.ndarray
    sigma_matrix: np.ndarray  # D with sigma(A) = D A D^{-1}
    X: np.ndarray
    basis_m_eps: np.ndarray
    basis_m_half: np.ndarray
    basis_k_eps: np.ndarray
    basis_k_half: np.ndarray
    basis_h: np.ndarray
    special: dict = field(default_factory=dict)

    # -- sizes and conversions ------------------------------------------------
    @property
    def dim(self) -> int:
        return self.E.shape[0]

    @property
    def size(self) -> int:
        return self.E.shape[1]

    def matrix(self, c) -> np.ndarray:
        """Matrix of the (possibly complex) coordinate vector ``c``."""
        return np.tensordot(np.asarray(c), self.E, axes=(0, 0))

    def coords(self, M) -> np.ndarray:
        """Coordinates of a real element given as a matrix."""
        M = np.asarray(M)
        if M.shape != self.E.shape[1:]:
            raise DomainError(f"matrix of shape {M.shape} does not belong to a {self.size}x{self.size} model")
        return -self.inner_scale * np.einsum("aij,ji->a", self.E, M).real

    # -- algebra in coordinates -------------------------------------------------
    def br(self, u, v) -> np.ndarray:
        """Bracket in coordinates; complex-bilinear."""
        return np.einsum("a,b,abc->c", np.asarray(u), np.asarray(v), self.F)

    @staticmethod
    def ip(u, v):
        """Invariant form in coordinates; complex-bilinear (no conjugation)."""
        return np.asarray(u) @ np.asarray(v)

    def ad(self, u) -> np.ndarray:
        """Matrix of ad_u acting on coordinate column vectors."""
        return np.einsum("a,abc->cb", np.asarray(u), self.F)

    def Ad(self, g: np.ndarray) -> np.ndarray:
        """Matrix of Ad_g for a group element given as a matrix."""
        ginv = np.linalg.inv(g)
        cols = [self.coords(g @ Eb @ ginv) for Eb in self.E]
        return np.array(cols).T

    def Ad_exp(self, kappa) -> np.ndarray:
        """Ad_{exp kappa} = exp(ad_kappa) in coordinates."""
        return scipy.linalg.expm(self.ad(kappa))

    # -- projectors -------------------------------------------------------------
    @staticmethod
    def _proj(B: np.ndarray) -> np.ndarray:
        return B.T @ B

    @property
    def P_a(self):
        return np.outer(self.X, self.X)

    @property
    def P_h(self):
        return self._proj(self.basis_h)

    def P_m_lam(self, lam: str):
        return self._proj(self.basis_m_eps if lam == EPS else self.basis_m_half)

    def P_k_lam(self, lam: str):
        return self._proj(self.basis_k_eps if lam == EPS else self.basis_k_half)

    def P_lam(self, lam: str):
        return self.P_m_lam(lam) + self.P_k_lam(lam)

    @property
    def P_m(self):
        return (np.eye(self.dim) - self.sigma) / 2

    @property
    def P_k(self):
        return (np.eye(self.dim) + self.sigma) / 2

    @property
    def P_m_plus(self):
        return self.P_m_lam(EPS) + self.P_m_lam(HALF)

    @property
    def P_k_plus(self):
        return self.P_k_lam(EPS) + self.P_k_lam(HALF)

    @property
    def basis_m(self) -> np.ndarray:
        """Orthonormal basis X, xi_eps^j, xi_half^k of m."""
        return np.vstack([self.X[None, :], self.basis_m_eps, self.basis_m_half])

    @property
    def basis_m_plus(self) -> np.ndarray:
        return np.vstack([self.basis_m_eps, self.basis_m_half])

    @property
    def basis_k_plus(self) -> np.ndarray:
        return np.vstack([self.basis_k_eps, self.basis_k_half])

    @property
    def I(self) -> np.ndarray:
        """Complex structure ad_{Z0} on m (CP^n models only), zero on k."""
        if "Z0" not in self.special:
            raise DomainError("I = ad_{Z0} exists only on complex projective models")
        return self.ad(self.special["Z0"]) @ self.P_m

    def random(self, rng: np.random.Generator, part: str = "g") -> np.ndarray:
        """Random coordinate vector in g, m, k, m+, k+, m+k+ or h."""
        v = rng.standard_normal(self.dim)
        P = {
            "g": np.eye(self.dim), "m": self.P_m, "k": self.P_k,
            "m+": self.P_m_plus, "k+": self.P_k_plus,
            "mk+": self.P_m + self.P_k_plus, "h": self.P_h,
        }[part]
        return P @ v

    def dump_bases_json(self) -> str:
        """Graded bases as JSON: lists of matrices, row-major, entries [re, im]."""
        def mats(B):
            return [[[[float(z.real), float(z.imag)] for z in row] for row in self.matrix(b)] for b in B]

        payload = {
            "space": self.desc.name,
            "inner_scale": self.inner_scale,
            "X": mats(self.X[None, :])[0],
            "m_eps": mats(self.basis_m_eps),
            "m_half": mats(self.basis_m_half),
            "k_eps": mats(self.basis_k_eps),
            "k_half": mats(self.basis_k_half),
            "h": mats(self.basis_h),
        }
        return json.dumps(payload)


def inner(model: AlgebraModel, u, v) -> float:
    """<u, v> = -s tr(uv) for elements given as matrices."""
    u = np.asarray(u)
    v = np.asarray(v)
    if u.shape != v.shape or u.shape != model.E.shape[1:]:
        raise DomainError(f"inner product of shapes {u.shape}, {v.shape} in a {model.size}x{model.size} model")
    return float(-model.inner_scale * np.trace(u @ v).real)


# -- construction ---------------------------------------------------------------

def _raw_setup(desc: SpaceDescriptor):
    n = desc.n
    N = n + 1
    d = np.ones(N)
    d[0] = -1.0
    if desc.family is Family.COMPLEX_PROJ:
        span = _su_span(N)
        D = np.diag(d).astype(complex)
        X0 = _unit(N, 0, 1) - _unit(N, 1, 0)
    elif desc.is_sphere_like:
        span = _so_span(N)
        D = np.diag(d).astype(complex)
        X0 = _unit(N, 0, 1) - _unit(N, 1, 0)
    elif desc.family is Family.QUAT_PROJ:
        span = _sp_span(N)
        D = np.diag(np.concatenate([d, d])).astype(complex)
        X0 = _sp_embed(_unit(N, 0, 1) - _unit(N, 1, 0), np.zeros((N, N), dtype=complex))
    else:
        raise UnsupportedModelError(f"no matrix model for {desc.name}")
    return span, D, X0


def _orthonormal_matrices(span, s):
    """Orthonormalise matrices under -s Re tr(AB) (Gram-Schmidt in matrix form)."""
    out: list[np.ndarray] = []
    for A in span:
        W = A.copy()
        for _ in range(2):
            for B in out:
                W = W - (-s * np.trace(B @ W).real) * B
        nrm2 = -s * np.trace(W @ W).real
        if nrm2 > 1e-18:
            out.append(W / np.sqrt(nrm2))
    return np.array(out)


def _spectral_projector(M: np.ndarray, target: float, levels) -> np.ndarray:
    P = np.eye(M.shape[0])
    for nu in levels:
        if nu != target:
            P = P @ (M - nu * np.eye(M.shape[0])) / (target - nu)
    return P


def build_model(desc: SpaceDescriptor) -> AlgebraModel:
    """Build the matrix model of ``desc`` and verify its structural invariants."""
    if not desc.has_matrix_model:
        raise UnsupportedModelError(f"{desc.name} has no matrix model; only closed-form checks apply")
    span, D, X0 = _raw_setup(desc)

    # provisional unit-scale basis to read off the spectrum of ad_{X0}
    E1 = _orthonormal_matrices(span, 1.0)
    co1 = lambda M: -np.einsum("aij,ji->a", E1, M).real
    adX0 = np.array([co1(bracket(X0, Eb)) for Eb in E1]).T
    mu_max = np.max(np.linalg.eigvalsh(-(adX0 @ adX0)))
    X_mat = X0 / np.sqrt(mu_max)
    s = 1.0 / (-np.trace(X_mat @ X_mat).real)

    E = E1 / np.sqrt(s)
    dim = E.shape[0]
    coords = lambda M: -s * np.einsum("aij,ji->a", E, M).real
    F = np.empty((dim, dim, dim))
    for a in range(dim):
        for b in range(dim):
            F[a, b] = coords(bracket(E[a], E[b]))
    # rounding noise in structure constants is amplified by 1/sinh^2 near x = 0
    F[np.abs(F) < 1e-14] = 0.0
    Dinv = np.linalg.inv(D)
    sigma = np.array([coords(D @ Eb @ Dinv) for Eb in E]).T
    X = coords(X_mat)

    return grade_by_adX(desc, E, s, F, sigma, D, X)


def grade_by_adX(desc, E, s, F, sigma, D, X) -> AlgebraModel:
    """Split m and k into eigenspaces of -ad_X^2 and build the paired bases.

    Raises ModelConstructionError when the spectrum is not {0, 1, 1/4} with
    the multiplicities of the registry entry.
    """
    dim = E.shape[0]
    adX = np.einsum("a,abc->cb", X, F)
    M = -(adX @ adX)
    M = (M + M.T) / 2
    levels = (0.0, 1.0, 0.25)
    mu = np.linalg.eigvalsh(M)
    stray = [m for m in mu if min(abs(m - t) for t in levels) > EIG_TOL]
    if stray:
        raise ModelConstructionError(f"{desc.name}: -ad_X^2 has eigenvalues {stray} outside {{0, 1, 1/4}}")
    counts = {t: int(sum(abs(mu - t) < EIG_TOL)) for t in levels}
    expected = {0.0: 1 + desc.h_dim, 1.0: 2 * desc.m_eps, 0.25: 2 * desc.m_half}
    if counts != expected:
        raise ModelConstructionError(f"{desc.name}: multiplicities {counts}, expected {expected}")

    Pm = (np.eye(dim) - sigma) / 2
    Pk = (np.eye(dim) + sigma) / 2
    proj = {t: _spectral_projector(M, t, levels) for t in levels}
    canon = np.eye(dim)

    def eigbasis(t, P):
        return _mgs((proj[t] @ P @ canon).T)

    special = {}
    if desc.is_complex_proj:
        n = desc.n
        N = n + 1
        Ymat = 0.5j * (_unit(N, 0, 1) + _unit(N, 1, 0))
        Zmat = -0.5j * _unit(N, 0, 0) + 0.5j * _unit(N, 1, 1)
        b0 = n / (n + 1)
        b1 = (n - 1) / (n + 1)
        Z0mat = np.diag([1j * b0] + [1j * (b0 - 1)] * n)
        Z1mat = np.diag([1j * b1] * 2 + [1j * (b1 - 1)] * (n - 1)) if n >= 2 else np.zeros((N, N), complex)
        co = lambda Mx: -s * np.einsum("aij,ji->a", E, Mx).real
        special = {"Y": co(Ymat), "Z": co(Zmat), "Z0": co(Z0mat), "Z1": co(Z1mat)}
        m_eps = special["Y"][None, :]
        half = []
        for j in range(1, n):
            half.append(co(0.5 * _unit(N, 0, 1 + j) - 0.5 * _unit(N, 1 + j, 0)))
            half.append(co(0.5j * _unit(N, 0, 1 + j) + 0.5j * _unit(N, 1 + j, 0)))
        m_half = np.array(half) if half else np.zeros((0, dim))
        for B, t in ((m_eps, 1.0), (m_half, 0.25)):
            for v in B:
                if np.linalg.norm(M @ v - t * v) > 1e-10 or np.linalg.norm(Pk @ v) > 1e-10:
                    raise ModelConstructionError(f"{desc.name}: fixed basis vector not in m eigenspace {t}")
    else:
        m_eps = eigbasis(1.0, Pm)
        m_half = eigbasis(0.25, Pm)
    if m_half.size == 0:
        m_half = np.zeros((0, dim))
    a_basis = eigbasis(0.0, Pm)
    h = eigbasis(0.0, Pk)
    if h.size == 0:
        h = np.zeros((0, dim))
    if a_basis.shape[0] != 1 or abs(abs(a_basis[0] @ X) - 1) > 1e-10:
        raise ModelConstructionError(f"{desc.name}: Cartan subspace is not spanned by X")

    k_eps = np.array([-(adX @ v) / LAMBDA_PRIME[EPS] for v in m_eps]).reshape(-1, dim)
    k_half = np.array([-(adX @ v) / LAMBDA_PRIME[HALF] for v in m_half]).reshape(-1, dim)
    # canonical coordinates are simple algebraic numbers; clear round-off dust
    for arr in (X, m_eps, m_half, k_eps, k_half, h, *special.values()):
        arr[np.abs(arr) < 1e-14] = 0.0

    model = AlgebraModel(
        desc=desc, E=E, inner_scale=float(s), F=F, sigma=sigma, sigma_matrix=D, X=X,
        basis_m_eps=m_eps, basis_m_half=m_half, basis_k_eps=k_eps, basis_k_half=k_half,
        basis_h=h, special=special,
    )
    _check_model(model)
    return model


def _check_model(model: AlgebraModel, tol: float = 1e-10) -> None:
    d = model.dim
    if np.linalg.norm(model.sigma @ model.sigma - np.eye(d)) > tol:
        raise ModelConstructionError("sigma is not an involution")
    if abs(model.X @ model.X - 1) > tol:
        raise ModelConstructionError("<X, X> != 1")
    full = np.vstack([model.basis_m, model.basis_k_plus, model.basis_h])
    if full.shape[0] != d or np.linalg.norm(full @ full.T - np.eye(d)) > 1e-9:
        raise ModelConstructionError("graded bases do not form an orthonormal basis of g")


# -- operators -------------------------------------------------------------------

def _require_x(x: float) -> float:
    x = float(x)
    if not x > 0 or not np.isfinite(x):
        raise DomainError(f"x must be a positive finite number, got {x}")
    return x


def T_matrix(model: AlgebraModel) -> np.ndarray:
    """T = ad_X / lambda'(X) on each m_lambda + k_lambda, zero on a + h."""
    adX = model.ad(model.X)
    return sum(adX @ model.P_lam(lam) / LAMBDA_PRIME[lam] for lam in (EPS, HALF))


def R_matrix(model: AlgebraModel, x: float) -> np.ndarray:
    x = _require_x(x)
    return sum(model.P_lam(lam) / np.cosh(LAMBDA_PRIME[lam] * x) for lam in (EPS, HALF))


def S_matrix(model: AlgebraModel, x: float) -> np.ndarray:
    x = _require_x(x)
    T = T_matrix(model)
    return sum(T @ model.P_lam(lam) / np.sinh(LAMBDA_PRIME[lam] * x) for lam in (EPS, HALF))


def _require_in(model: AlgebraModel, v, P, what: str, tol: float = 1e-10):
    v = np.asarray(v)
    resid = np.linalg.norm(v - P @ v)
    if resid > tol * max(1.0, np.linalg.norm(v)):
        raise DomainError(f"vector has a component of norm {resid:.3g} outside {what}")
    return v


def operator_T(model: AlgebraModel, v) -> np.ndarray:
    """Apply T to ``v`` in m+ + k+; components in a + h are rejected."""
    v = _require_in(model, v, model.P_m_plus + model.P_k_plus, "m+ + k+")
    return T_matrix(model) @ v


def apply_R(model: AlgebraModel, x: float, v) -> np.ndarray:
    return R_matrix(model, x) @ np.asarray(v)


def apply_S(model: AlgebraModel, x: float, v) -> np.ndarray:
    return S_matrix(model, x) @ np.asarray(v)


def J_matrix(model: AlgebraModel, x: float) -> np.ndarray:
    """Complex structure at (o, x) on (m + k+) x R as a (d+1) x (d+1) matrix.

    The last coordinate is the radial component t (coefficient of d/dx).
    """
    x = _require_x(x)
    d = model.dim
    T = T_matrix(model)
    J = np.zeros((d + 1, d + 1))
    for lam in (EPS, HALF):
        lx = LAMBDA_PRIME[lam] * x
        J[:d, :d] += T @ model.P_m_lam(lam) / np.tanh(lx) + T @ model.P_k_lam(lam) * np.tanh(lx)
    J[d, :d] = model.X  # (X, 0) -> (0, d/dx)
    J[:d, d] = -model.X  # (0, d/dx) -> (-X, 0)
    return J


def apply_Jc(model: AlgebraModel, x: float, v, t: float = 0.0):
    """Apply J_c^K(o, x) to the tangent vector (v, t d/dx); returns (v', t')."""
    v = _require_in(model, v, model.P_m + model.P_k_plus, "m + k+")
    out = J_matrix(model, x) @ np.concatenate([v, [t]])
    return out[:-1], float(out[-1])


def structure_residuals(model: AlgebraModel) -> dict:
    """Residuals of the structural identities of ``model`` (all should vanish).

    Every model: the multiplicities of -ad_X^2 against the registry, sigma as a
    Lie algebra automorphism, T orthogonal on m+ + k+ with T^2 = -id there.
    CP^n models add the su(2) relations of X, Y, Z, the expressions of ad_Y and
    ad_Z through I and ad_X, and ad_{Z1} = I on m_half with Z - Z1/2 = -Z0.
    """
    desc = model.desc
    d = model.dim
    adX = model.ad(model.X)
    mu = np.linalg.eigvalsh(-(adX @ adX))
    counts = {t: int(np.sum(np.abs(mu - t) < EIG_TOL)) for t in (0.0, 1.0, 0.25)}
    expected = {0.0: 1 + desc.h_dim, 1.0: 2 * desc.m_eps, 0.25: 2 * desc.m_half}
    res = {"multiplicities": float(sum(abs(counts[t] - expected[t]) for t in counts))}

    sig = model.sigma
    res["sigma_automorphism"] = float(np.max(np.abs(
        np.einsum("ad,be,dec->abc", sig, sig, model.F) - np.einsum("abd,cd->abc", model.F, sig))))

    T = T_matrix(model)
    P = model.P_m_plus + model.P_k_plus
    res["T_orthogonal"] = float(np.max(np.abs(T.T @ T - P)))
    res["T_squared"] = float(np.max(np.abs(T @ T + P)))

    if desc.is_complex_proj:
        X, br, ad = model.X, model.br, model.ad
        Y, Z, Z0, Z1 = (model.special[k] for k in ("Y", "Z", "Z0", "Z1"))
        I, Pm, Pk = model.I, model.P_m, model.P_k
        gram = np.array([X, Y, Z]) @ np.array([X, Y, Z]).T
        res["XYZ_orthonormal"] = float(np.max(np.abs(gram - np.eye(3))))
        res["Y_Z_definition"] = max(float(np.max(np.abs(br(Z0, X) - Y))), float(np.max(np.abs(br(Y, X) - Z))))
        res["su2_relations"] = max(float(np.max(np.abs(v))) for v in (br(X, Y) + Z, br(X, Z) - Y, br(Z, Y) - X))
        adX2 = adX @ adX
        res["adY_on_m"] = float(np.max(np.abs(ad(Y) @ Pm + adX @ I)))
        res["adY_on_k"] = float(np.max(np.abs(ad(Y) @ Pk - I @ adX @ Pk)))
        res["adZ_on_m"] = float(np.max(np.abs(ad(Z) @ Pm - (I @ adX2 + adX2 @ I) @ Pm)))
        res["adZ_on_k"] = float(np.max(np.abs(ad(Z) @ Pk + 2 * adX @ I @ adX @ Pk)))
        Ph = model.P_m_lam(HALF)
        res["adZ1_on_m_half"] = float(np.max(np.abs(ad(Z1) @ Ph - I @ Ph))) if desc.n > 1 else 0.0
        res["Z_minus_half_Z1"] = float(np.max(np.abs(Z - Z1 / 2 + Z0)))
        res["I_squared"] = float(np.max(np.abs(I @ I + Pm)))
    return res
