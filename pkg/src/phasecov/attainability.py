"""Which channels can be reached by semigroup or CP-divisible dynamics."""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .channel import PhaseCovChannel, cp_margin, is_cp
from .errors import NotInInterior
from .verdict import EPS, Verdict


def class_l_margin(lam, lz, tz):
    lam = np.asarray(lam, dtype=float)
    return np.minimum.reduce(np.broadcast_arrays(cp_margin(lam, lz, tz), lam, np.asarray(lz) - lam**2))


def class_l_rotated_margin(lam, lz, tz):
    lam = np.asarray(lam, dtype=float)
    return np.minimum(cp_margin(lam, lz, tz), np.asarray(lz) - lam**2)


def class_cp_margin(lam, lz, tz):
    lam = np.asarray(lam, dtype=float)
    either = np.maximum(np.asarray(lz) - lam**2, -np.abs(lam))
    return np.minimum(cp_margin(lam, lz, tz), either)


def in_class_L(ch: PhaseCovChannel, tol: float = EPS) -> Verdict:
    """Reachable by a dissipative semigroup (closure included)."""
    return Verdict.from_margin(class_l_margin(*ch.as_tuple()), tol)


def in_class_phcov_cp(ch: PhaseCovChannel, tol: float = EPS) -> Verdict:
    """Reachable by CP-divisible phase covariant dynamics; the same set as :func:`in_class_L`."""
    return in_class_L(ch, tol)


def in_class_L_rotated(ch: PhaseCovChannel, tol: float = EPS) -> Verdict:
    """Reachable once coherent z-rotations are allowed; the sign of ``lam`` is free.

    The same predicate describes CP-divisible dynamics with rotations.
    """
    return Verdict.from_margin(class_l_rotated_margin(*ch.as_tuple()), tol)


def in_class_cp(ch: PhaseCovChannel, tol: float = EPS) -> Verdict:
    """Reachable by general (not necessarily phase covariant) CP-divisible qubit dynamics."""
    return Verdict.from_margin(class_cp_margin(*ch.as_tuple()), tol)


@dataclass(frozen=True)
class ClassMembership:
    in_c_l: Verdict
    in_c_l_rotated: Verdict
    in_c_phcov_cp: Verdict
    in_c_cp: Verdict

    @classmethod
    def of(cls, ch: PhaseCovChannel, tol: float = EPS) -> "ClassMembership":
        return cls(in_class_L(ch, tol), in_class_L_rotated(ch, tol), in_class_phcov_cp(ch, tol), in_class_cp(ch, tol))

    def to_dict(self) -> dict:
        return {k: getattr(self, k).status.value
                for k in ("in_c_l", "in_c_l_rotated", "in_c_phcov_cp", "in_c_cp")}


def semigroup_generator_from_channel(ch: PhaseCovChannel) -> tuple[float, float, float]:
    """Constant rates ``(gamma_+, gamma_-, gamma_z)`` with ``exp(L) = ch``.

    Only defined in the strict interior ``lam > 0``, ``1 > lambda_z > lam**2``
    of a CP channel; ``lambda_z = 1`` is rejected rather than taken as a limit.
    """
    lam, lz, tz = ch.as_tuple()
    if not lam > 0:
        raise NotInInterior(f"need lambda > 0, got {lam}")
    if not 1.0 > lz > lam**2:
        raise NotInInterior(f"need 1 > lambda_z > lambda^2, got lambda_z={lz}, lambda^2={lam**2}")
    if is_cp(ch).fails:
        raise NotInInterior(f"channel {ch.as_tuple()} is not completely positive")
    log_ratio = -math.log(lz) / (2.0 * (1.0 - lz))
    gamma_plus = (1.0 - lz + tz) * log_ratio
    gamma_minus = (1.0 - lz - tz) * log_ratio
    gamma_z = 0.25 * math.log(lz / lam**2)
    return gamma_plus, gamma_minus, gamma_z
