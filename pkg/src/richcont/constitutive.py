"""Van Genuchten-Mualem retention and relative permeability.

All functions accept floats, numpy arrays or :class:`~richcont.dual.Dual`
inputs. Material parameters may themselves be arrays (see
:func:`stack_materials`), which lets the discretizations evaluate every
cell in one call.

Units: heads in m, conductivity in m/day, alpha in 1/m.
"""

from __future__ import annotations

import enum
import functools
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from . import dual as D
from .dual import Dual

# Lower bound on Kr. It keeps fully dry cells from making the Jacobian
# singular; it is set well below the physical Kr of the dry capillary-barrier
# gravel (about 5e-17 at psi = -3 m) so that it does not alter that physics.
KR_FLOOR = 1e-20


class ContinuationKind(enum.Enum):
    POWER = "power"
    LINEAR = "linear"


@dataclass(frozen=True)
class VgmMaterial:
    """Saturated conductivity plus van Genuchten-Mualem parameters.

    ``K`` is a scalar (isotropic) or a diagonal given as (Kxx, Kzz) or
    (Kxx, Kyy, Kzz). ``kr_override`` replaces the relative permeability by a
    constant, which turns the flow problem linear.
    """

    K: float | tuple[float, ...]
    alpha: float
    n: float
    theta_r: float
    theta_s: float
    name: str = ""
    kr_override: float | None = None
    m: float = field(init=False)

    def __post_init__(self):
        if not self.n > 1.0:
            raise ValueError(f"{self.name or 'material'}: n must exceed 1, got {self.n}")
        if not self.alpha > 0.0:
            raise ValueError(f"{self.name or 'material'}: alpha must be positive, got {self.alpha}")
        if not 0.0 <= self.theta_r < self.theta_s <= 1.0:
            raise ValueError(
                f"{self.name or 'material'}: need 0 <= theta_r < theta_s <= 1, "
                f"got {self.theta_r}, {self.theta_s}"
            )
        if np.any(np.asarray(self.K, dtype=float) <= 0.0):
            raise ValueError(f"{self.name or 'material'}: K must be positive, got {self.K}")
        object.__setattr__(self, "m", 1.0 - 1.0 / self.n)

    def tensor2d(self) -> np.ndarray:
        """In-plane (x, z) conductivity tensor."""
        k = np.atleast_1d(np.asarray(self.K, dtype=float))
        if k.size == 1:
            return k[0] * np.eye(2)
        if k.size == 2:
            return np.diag(k)
        if k.size == 3:
            return np.diag([k[0], k[2]])
        raise ValueError(f"K must have 1, 2 or 3 entries, got {k.size}")


@dataclass(frozen=True)
class CellParameters:
    """Per-cell arrays of material parameters, duck-typed like VgmMaterial."""

    alpha: np.ndarray
    n: np.ndarray
    m: np.ndarray
    theta_r: np.ndarray
    theta_s: np.ndarray
    kr_override: np.ndarray  # nan where the regular curve applies


def stack_materials(materials: Sequence[VgmMaterial], ids: np.ndarray) -> CellParameters:
    ids = np.asarray(ids, dtype=int)

    def col(attr):
        return np.array([getattr(mat, attr) for mat in materials], dtype=float)[ids]

    ov = np.array(
        [np.nan if mat.kr_override is None else mat.kr_override for mat in materials], dtype=float
    )[ids]
    return CellParameters(col("alpha"), col("n"), col("m"), col("theta_r"), col("theta_s"), ov)


def _quiet(fn):
    # both branches of every where() get evaluated; silence the discarded one
    @functools.wraps(fn)
    def wrapped(*args, **kwargs):
        with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
            return fn(*args, **kwargs)

    return wrapped


def _override(material):
    ov = material.kr_override
    if ov is None:
        return None
    ov = np.asarray(ov, dtype=float)
    if np.all(np.isnan(ov)):
        return None
    return ov


def _unsaturated(psi):
    """psi restricted to strictly negative values (dummy -1 elsewhere)."""
    return D.where(D.value(psi) < 0.0, psi, -1.0)


@_quiet
def water_content(material, psi):
    """Volumetric water content; theta_s for psi >= 0."""
    psi_neg = _unsaturated(psi)
    s = -material.alpha * psi_neg
    u = D.exp(material.n * D.log(s))
    se = D.exp(-material.m * D.log1p(u))
    theta = material.theta_r + (material.theta_s - material.theta_r) * se
    return D.where(D.value(psi) < 0.0, theta, material.theta_s * np.ones_like(D.value(psi)))


def _check_theta(material, theta):
    t = D.value(theta)
    lo, hi = material.theta_r, material.theta_s
    tol = 1e-12
    if np.any(t < np.asarray(lo) - tol) or np.any(t > np.asarray(hi) + tol):
        raise ValueError("water content outside [theta_r, theta_s]")


def effective_saturation(material, theta):
    _check_theta(material, theta)
    return (theta - material.theta_r) / (material.theta_s - material.theta_r)


def _mualem(se, m):
    se = D.where(D.value(se) < 1.0, se, 0.5)
    inner = 1.0 - (1.0 - se ** (1.0 / m)) ** m
    return se**0.5 * inner * inner


@_quiet
def kr_of_theta(material, theta, kr_floor: float = KR_FLOOR):
    """Mualem relative permeability of the water content, clamped below at ``kr_floor``."""
    se = effective_saturation(material, theta)
    sv = D.value(se)
    kr = _mualem(se, material.m)
    kr = D.where(sv >= 1.0, np.ones_like(sv), kr)
    kr = D.where(sv <= 0.0, np.zeros_like(sv), kr)
    kr = D.maximum(kr, kr_floor)
    ov = _override(material)
    if ov is not None:
        kr = D.where(np.isnan(ov), kr, np.where(np.isnan(ov), 0.0, ov) * np.ones_like(sv))
    return kr


@_quiet
def kr_of_psi(material, psi, kr_floor: float = KR_FLOOR):
    """Relative permeability as a function of pressure head.

    Same curve as ``kr_of_theta(water_content(psi))`` but written in terms of
    u = |alpha psi|^n so that neither extreme (near saturation, very dry)
    loses precision to cancellation.
    """
    pv = D.value(psi)
    psi_neg = _unsaturated(psi)
    log_s = D.log(-material.alpha * psi_neg)
    log_u = material.n * log_s
    u = D.exp(log_u)
    log_se = -material.m * D.log1p(u)
    # log(1 + 1/u), evaluated without cancellation on both sides of u = 1
    big = D.value(u) > 1.0
    u_safe = D.where(big, u, 2.0)
    l_big = D.log1p(1.0 / u_safe)
    l_small = D.log1p(D.where(big, 0.5, u)) - D.where(big, 0.0, log_u)
    l = D.where(big, l_big, l_small)
    inner = -D.expm1(-material.m * l)
    kr = D.exp(0.5 * log_se) * inner * inner
    kr = D.maximum(kr, kr_floor)
    kr = D.where(pv < 0.0, kr, np.ones_like(pv))
    ov = _override(material)
    if ov is not None:
        kr = D.where(np.isnan(ov), kr, np.where(np.isnan(ov), 0.0, ov) * np.ones_like(pv))
    return kr


def kr_of_head(material, h, z, kr_floor: float = KR_FLOOR):
    """Relative permeability at hydraulic head ``h`` and elevation ``z``."""
    return kr_of_psi(material, h - z, kr_floor)


def apply_continuation(kr, q: float, kind: ContinuationKind = ContinuationKind.POWER):
    """Continuation-parametrized permeability from a relative permeability value.

    Equals one at q = 0 and ``kr`` at q = 1, exactly.
    """
    if not 0.0 <= q <= 1.0:
        raise ValueError(f"continuation parameter must lie in [0, 1], got {q}")
    kind = ContinuationKind(kind)
    if q == 1.0:
        return kr
    if q == 0.0:
        one = np.ones_like(np.asarray(D.value(kr), dtype=float))
        if isinstance(kr, Dual):
            return Dual(one, np.zeros_like(one))
        return one if one.ndim else 1.0
    if kind is ContinuationKind.POWER:
        return kr**q
    return 1.0 + q * (kr - 1.0)


def continuation_kr(material, h, z, q: float, kind=ContinuationKind.POWER, kr_floor: float = KR_FLOOR):
    return apply_continuation(kr_of_head(material, h, z, kr_floor), q, kind)


def continuation_kr_dkr(kr: np.ndarray, q: float, kind=ContinuationKind.POWER) -> tuple[np.ndarray, np.ndarray]:
    """Value and derivative d(cK)/d(kr) of the continuation map for plain arrays."""
    out = apply_continuation(Dual(kr, np.ones_like(kr)), q, kind)
    return out.val, out.der
