"""Registry of the rank-one compact symmetric spaces and the metric parameters.

Every compact rank-one symmetric space G/K has restricted roots contained in
{+-eps, +-eps/2}; the multiplicities of eps and eps/2 fix everything the
radial formulas need.  The registry below is the single source for them.
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass, replace

from .errors import DomainError, ParameterError


class Family(str, enum.Enum):
    SPHERE = "sphere"
    REAL_PROJ = "rpn"
    COMPLEX_PROJ = "cpn"
    QUAT_PROJ = "hpn"
    CAYLEY = "cayley"

    @classmethod
    def parse(cls, name: str | "Family") -> "Family":
        if isinstance(name, cls):
            return name
        key = str(name).strip().lower()
        aliases = {
            "s": cls.SPHERE, "sn": cls.SPHERE, "sphere": cls.SPHERE,
            "rp": cls.REAL_PROJ, "rpn": cls.REAL_PROJ, "realproj": cls.REAL_PROJ,
            "cp": cls.COMPLEX_PROJ, "cpn": cls.COMPLEX_PROJ, "complexproj": cls.COMPLEX_PROJ,
            "hp": cls.QUAT_PROJ, "hpn": cls.QUAT_PROJ, "quatproj": cls.QUAT_PROJ,
            "cayley": cls.CAYLEY, "caop2": cls.CAYLEY, "f4": cls.CAYLEY,
        }
        try:
            return aliases[key]
        except KeyError:
            valid = ", ".join(f.value for f in cls)
            raise DomainError(f"unknown space family {name!r}; expected one of {valid}") from None


# smallest admissible n per family; Cayley plane is the single value n = 2
_MIN_N = {
    Family.SPHERE: 2,
    Family.REAL_PROJ: 2,
    Family.COMPLEX_PROJ: 1,
    Family.QUAT_PROJ: 1,
}


@dataclass(frozen=True)
class SpaceDescriptor:
    """One row of the classification table of rank-one symmetric spaces."""

    family: Family
    n: int
    dim: int
    m_eps: int
    m_half: int
    m_total: int
    sigma_H_nonempty: bool
    h_label: str
    h_dim: int
    has_matrix_model: bool

    @property
    def name(self) -> str:
        return f"{self.family.value}({self.n})"

    @property
    def is_complex_proj(self) -> bool:
        return self.family is Family.COMPLEX_PROJ

    @property
    def is_sphere_like(self) -> bool:
        """Spheres and real projective spaces share the so(n+1) model."""
        return self.family in (Family.SPHERE, Family.REAL_PROJ)

    @property
    def radial_case(self) -> int:
        """1 for the potential-type solutions, 2 for the CP^n family with c_Z."""
        return 2 if self.is_complex_proj else 1


def _valid_range(family: Family) -> str:
    if family is Family.CAYLEY:
        return "n = 2"
    return f"n >= {_MIN_N[family]}"


def lookup_space(family, n: int) -> SpaceDescriptor:
    """Return the descriptor of ``family`` with rank parameter ``n``.

    Raises DomainError naming the valid range when ``n`` is out of range.
    """
    fam = Family.parse(family)
    if isinstance(n, bool) or int(n) != n:
        raise DomainError(f"n must be an integer, got {n!r}")
    n = int(n)
    if fam is Family.CAYLEY:
        if n != 2:
            raise DomainError(f"{fam.value}: {_valid_range(fam)} (got n = {n})")
    elif n < _MIN_N[fam]:
        raise DomainError(f"{fam.value}: {_valid_range(fam)} (got n = {n})")

    if fam in (Family.SPHERE, Family.REAL_PROJ):
        m_eps, m_half = n - 1, 0
        h_label, h_dim = f"so({n - 1})", (n - 1) * (n - 2) // 2
        sigma_h = fam is Family.REAL_PROJ and n == 2
        has_model = True
    elif fam is Family.COMPLEX_PROJ:
        m_eps, m_half = 1, 2 * n - 2
        h_label, h_dim = f"R+su({n - 1})", (n - 1) ** 2
        sigma_h = True
        has_model = True
    elif fam is Family.QUAT_PROJ:
        m_eps, m_half = 3, 4 * n - 4
        h_label, h_dim = f"sp(1)+sp({n - 1})", 3 + (n - 1) * (2 * n - 1)
        sigma_h = False
        has_model = True
    else:
        m_eps, m_half = 7, 8
        h_label, h_dim = "so(7)", 21
        sigma_h = False
        has_model = False

    dim = 1 + m_eps + m_half
    return SpaceDescriptor(
        family=fam,
        n=n,
        dim=dim,
        m_eps=m_eps,
        m_half=m_half,
        m_total=dim,
        sigma_H_nonempty=sigma_h,
        h_label=h_label,
        h_dim=h_dim,
        has_matrix_model=has_model,
    )


def registered_spaces(max_n: int = 6) -> list[SpaceDescriptor]:
    """All registered descriptors with n <= max_n (Cayley always included)."""
    out = []
    for fam, lo in _MIN_N.items():
        out.extend(lookup_space(fam, n) for n in range(lo, max_n + 1))
    out.append(lookup_space(Family.CAYLEY, 2))
    return out


@dataclass(frozen=True)
class RadialParams:
    """Parameters (C, C1, c_Z) of the Ricci-flat family; C > 0, C1 >= 0."""

    C: float = 1.0
    C1: float = 0.0
    cZ: float = 0.0

    def with_(self, **changes) -> "RadialParams":
        return replace(self, **changes)


def validate_params(desc: SpaceDescriptor, p: RadialParams) -> RadialParams:
    """Check ``p`` against ``desc`` and return it with floats normalised."""
    try:
        C, C1, cZ = float(p.C), float(p.C1), float(p.cZ)
    except (TypeError, ValueError) as exc:
        raise ParameterError(f"non-numeric parameter in {p!r}") from exc
    if not all(math.isfinite(v) for v in (C, C1, cZ)):
        raise ParameterError(f"parameters must be finite, got {p!r}")
    if C <= 0:
        raise ParameterError(f"C must be > 0, got {C}")
    if C1 < 0:
        raise ParameterError(f"C1 must be >= 0, got {C1}")
    if cZ != 0 and not desc.is_complex_proj:
        raise ParameterError(
            f"cZ = {cZ} is only admissible for complex projective spaces; "
            f"{desc.name} admits a(x) = f'(x) X only"
        )
    return RadialParams(C, C1, cZ)
