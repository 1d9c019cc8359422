"""Memory kernels of the convolution master equation in the Laplace domain.

The kernel is given by three rational transforms ``(kappa_+)_s``,
``(kappa_-)_s`` and ``(kappa_z)_s``. Admissibility is tested through complete
monotonicity of six derived functions; because the monotonicity condition
ranges over all orders and all ``s``, a sampled check can only refute it.
A ``passes`` report means no violation was found up to ``depth`` on ``grid``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import DegenerateKernel, DomainError, PoleOnGrid
from .rational import RationalLaplace, eval_derivative, require_nonzero
from .verdict import EPS, Status, Verdict

DEFAULT_DEPTH = 8
DEFAULT_GRID = np.logspace(-3, 3, 64)

PASSES, FAILS, INCONCLUSIVE = "passes", "fails_at", "inconclusive"


@dataclass(frozen=True)
class KernelSpec:
    kappa_plus_s: RationalLaplace
    kappa_minus_s: RationalLaplace
    kappa_z_s: RationalLaplace

    @classmethod
    def zero(cls) -> "KernelSpec":
        z = RationalLaplace.zero()
        return cls(z, z, z)

    def to_dict(self) -> dict:
        return {"kappa_plus": self.kappa_plus_s.to_dict(), "kappa_minus": self.kappa_minus_s.to_dict(),
                "kappa_z": self.kappa_z_s.to_dict()}

    @classmethod
    def from_dict(cls, data: dict) -> "KernelSpec":
        try:
            return cls(*(RationalLaplace.from_dict(data[k]) for k in ("kappa_plus", "kappa_minus", "kappa_z")))
        except KeyError as exc:
            raise DomainError(f"kernel spec missing {exc.args[0]!r}") from None


@dataclass
class CMReport:
    function_id: str
    depth_checked: int
    grid: np.ndarray
    verdict: str
    witness: dict | None = None
    # smallest (-1)^n f^(n)(s) over everything checked
    min_value: float = math.inf
    function: RationalLaplace | None = field(default=None, repr=False)

    @property
    def passes(self) -> bool:
        return self.verdict == PASSES

    @property
    def fails(self) -> bool:
        return self.verdict == FAILS

    def to_dict(self) -> dict:
        out = {"function_id": self.function_id, "depth_checked": self.depth_checked,
               "grid": [float(s) for s in self.grid], "verdict": self.verdict,
               "witness": self.witness, "min_value": self.min_value}
        if self.function is not None:
            out["function"] = self.function.to_dict()
        return out


def is_completely_monotone(f: RationalLaplace, depth: int = DEFAULT_DEPTH, grid=None,
                           tol: float = EPS, function_id: str = "f") -> CMReport:
    """Check ``(-1)^n f^(n)(s) >= -tol`` for ``n = 0..depth`` at every grid point."""
    if depth < 1:
        raise DomainError("depth must be at least 1")
    grid = DEFAULT_GRID if grid is None else np.asarray(grid, dtype=float)
    if grid.size == 0 or np.any(grid <= 0):
        raise DomainError("grid must be non-empty with all s > 0")
    poles = f.real_poles()
    for p in poles:
        if np.any(np.abs(grid - p) < 1e-6):
            raise PoleOnGrid(f"{function_id}: real pole at s={p} lies on the grid")
    min_value = math.inf
    finite = True
    for n in range(depth + 1):
        vals = (-1) ** n * eval_derivative(f, n, grid)
        if not np.all(np.isfinite(vals)):
            finite = False
            vals = np.where(np.isfinite(vals), vals, np.inf)
        bad = np.nonzero(vals < -tol)[0]
        if bad.size:
            i = bad[np.argmin(vals[bad])]
            return CMReport(function_id, n, grid, FAILS,
                            {"s": float(grid[i]), "n": n, "value": float(vals[i])},
                            min_value=float(vals[i]), function=f)
        min_value = min(min_value, float(np.min(vals)))
    return CMReport(function_id, depth, grid, PASSES if finite else INCONCLUSIVE,
                    min_value=min_value, function=f)


def _sum_rates(k: KernelSpec):
    s = RationalLaplace.s()
    total = k.kappa_plus_s + k.kappa_minus_s
    longitudinal = s + total
    transverse = s + (total + 4.0 * k.kappa_z_s) * 0.5
    return s, longitudinal, transverse


def laplace_params_from_kernel(k: KernelSpec):
    """Laplace transforms ``(lam_s, (lambda_z)_s, (t_z)_s)`` of the induced trajectory."""
    s, longitudinal, transverse = _sum_rates(k)
    require_nonzero(longitudinal, "s + kappa_+ + kappa_-")
    require_nonzero(transverse, "s + (kappa_+ + kappa_- + 4 kappa_z)/2")
    lam_s = 1.0 / transverse
    lam_z_s = 1.0 / longitudinal
    t_z_s = (k.kappa_plus_s - k.kappa_minus_s) / (s * longitudinal)
    return lam_s, lam_z_s, t_z_s


def admissibility_functions(k: KernelSpec) -> dict[str, RationalLaplace]:
    """The six functions whose complete monotonicity makes the kernel admissible."""
    s, longitudinal, transverse = _sum_rates(k)
    require_nonzero(longitudinal, "s + kappa_+ + kappa_-")
    require_nonzero(transverse, "s + (kappa_+ + kappa_- + 4 kappa_z)/2")
    base = s * longitudinal
    lam_s = 1.0 / transverse
    out = {}
    for tag, kappa in (("plus", k.kappa_plus_s), ("minus", k.kappa_minus_s)):
        out[f"kappa_{tag}/(s(s+K))"] = kappa / base
        shifted = (s + kappa) / base
        out[f"(s+kappa_{tag})/(s(s+K))+lambda_s"] = shifted + lam_s
        out[f"(s+kappa_{tag})/(s(s+K))-lambda_s"] = shifted - lam_s
    return out


def kernel_admissible(k: KernelSpec, depth: int = DEFAULT_DEPTH, grid=None, tol: float = EPS):
    """Sufficient admissibility test; returns ``(Verdict, [CMReport] * 6)``.

    The status follows the reports: holds iff all six pass, fails if any has a
    witness, marginal otherwise. The margin is the slack against the ``-tol``
    threshold, ``min (-1)^n f^(n)(s) + tol``. Complete monotone functions
    decay at large ``s``, so a passing margin is typically tiny and is not
    re-banded.
    """
    reports = [is_completely_monotone(f, depth, grid, tol, name)
               for name, f in admissibility_functions(k).items()]
    margin = min(r.min_value for r in reports) + tol
    if any(r.fails for r in reports):
        status = Status.FAILS
    elif all(r.passes for r in reports):
        status = Status.HOLDS
    else:
        status = Status.MARGINAL
    return Verdict(status, margin), reports


def example_kernel(a: float, a_plus: float, a_minus: float, f_s: RationalLaplace) -> KernelSpec:
    """Kernel whose trajectory moves along a straight line driven by ``f``."""
    if not (a_plus > 0 and a_minus > 0 and a >= a_plus and a >= a_minus):
        raise DomainError("need a >= a_plus > 0 and a >= a_minus > 0")
    s = RationalLaplace.s()
    total = a_plus + a_minus
    one_minus_total = 1.0 - total * f_s
    one_minus_a = 1.0 - a * f_s
    if one_minus_total.is_zero() or one_minus_a.is_zero():
        raise DegenerateKernel("1 - (a_+ + a_-) f_s or 1 - a f_s vanishes identically")
    kappa_plus = a_plus * s * f_s / one_minus_total
    kappa_minus = a_minus * s * f_s / one_minus_total
    kappa_z = s * f_s * (2 * a - total - a * total * f_s) / (4.0 * one_minus_a * one_minus_total)
    return KernelSpec(kappa_plus, kappa_minus, kappa_z)


def invert_params(params, t) -> dict:
    """Time-domain trajectory from Laplace parameters by partial fractions."""
    lam_s, lam_z_s, t_z_s = params
    t = np.asarray(t, dtype=float)
    return {
        "lambda": lam_s.inverse_laplace()(t),
        "lambda_z": lam_z_s.inverse_laplace()(t),
        "t_z": t_z_s.inverse_laplace()(t),
    }
