"""Time-dependent phase covariant dynamics.

Conversion between decoherence rates ``(gamma_plus, gamma_minus, gamma_z)`` and
trajectories ``(lam(t), lambda_z(t), t_z(t))``, intermediate propagators, and
per-time divisibility classifiers.
"""
from __future__ import annotations

import functools
import math
import threading
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from .channel import EPS_INV, PhaseCovChannel, compose, invert
from .errors import DomainError, QuadratureFailure, SingularChannel
from .quadrature import GAUSS_WEIGHTS, KRONROD_WEIGHTS, evaluate, nodes_on
from .verdict import EPS, Status, Verdict

Fn = Callable[[float], float]


def fd_step(t: float) -> float:
    return max(1e-6, 1e-6 * abs(t))


def derivative(f: Fn, t: float, h: Optional[float] = None) -> float:
    """Five-point finite difference; one-sided near ``t = 0`` so ``f`` is never queried below 0."""
    h = fd_step(t) if h is None else h
    if t - 2 * h >= 0:
        return (f(t - 2 * h) - 8 * f(t - h) + 8 * f(t + h) - f(t + 2 * h)) / (12 * h)
    f0, f1, f2, f3, f4 = (f(t + k * h) for k in range(5))
    return (-25 * f0 + 48 * f1 - 36 * f2 + 16 * f3 - 3 * f4) / (12 * h)


@dataclass(frozen=True)
class RateTriple:
    gamma_plus: Fn
    gamma_minus: Fn
    gamma_z: Fn
    d_gamma_z: Optional[Fn] = None
    name: str = "custom"
    spec: Optional[dict] = field(default=None, compare=False)

    def __call__(self, t: float) -> tuple[float, float, float]:
        return float(self.gamma_plus(t)), float(self.gamma_minus(t)), float(self.gamma_z(t))

    def d_gamma_z_at(self, t: float) -> float:
        if self.d_gamma_z is not None:
            return float(self.d_gamma_z(t))
        return derivative(lambda s: float(self.gamma_z(s)), t)

    @classmethod
    def constant(cls, gamma_plus: float, gamma_minus: float, gamma_z: float) -> "RateTriple":
        vals = tuple(float(v) for v in (gamma_plus, gamma_minus, gamma_z))
        if not all(math.isfinite(v) for v in vals):
            raise DomainError(f"rates must be finite, got {vals}")
        gp, gm, gz = vals
        return cls(
            lambda t: gp + 0.0 * np.asarray(t),
            lambda t: gm + 0.0 * np.asarray(t),
            lambda t: gz + 0.0 * np.asarray(t),
            d_gamma_z=lambda t: 0.0,
            name="constant",
            spec={"kind": "constant", "params": {"gamma_plus": gp, "gamma_minus": gm, "gamma_z": gz}},
        )

    @classmethod
    def from_samples(cls, t, gamma_plus, gamma_minus, gamma_z) -> "RateTriple":
        """Cubic-spline interpolation of sampled rates (natural boundary conditions)."""
        from scipy.interpolate import CubicSpline

        t = np.asarray(t, dtype=float)
        if t.ndim != 1 or t.size < 2 or np.any(np.diff(t) <= 0) or t[0] != 0.0:
            raise DomainError("sample times must be strictly increasing and start at 0")
        splines = [CubicSpline(t, np.asarray(v, dtype=float), bc_type="natural")
                   for v in (gamma_plus, gamma_minus, gamma_z)]
        spec = {"kind": "samples", "t": t.tolist(), "gamma_plus": list(map(float, gamma_plus)),
                "gamma_minus": list(map(float, gamma_minus)), "gamma_z": list(map(float, gamma_z))}
        return cls(splines[0], splines[1], splines[2], d_gamma_z=splines[2].derivative(),
                   name="samples", spec=spec)


@dataclass(frozen=True)
class Trajectory:
    """``(lam, lambda_z, t_z)`` as functions of time, with optional analytic derivatives."""

    lam: Fn
    lambda_z: Fn
    t_z: Fn
    d_lam: Optional[Fn] = None
    d_lambda_z: Optional[Fn] = None
    d_t_z: Optional[Fn] = None
    name: str = "custom"
    spec: Optional[dict] = field(default=None, compare=False)

    def values(self, t: float) -> tuple[float, float, float]:
        return float(self.lam(t)), float(self.lambda_z(t)), float(self.t_z(t))

    def channel_at(self, t: float) -> PhaseCovChannel:
        return PhaseCovChannel(*self.values(t))

    def derivatives(self, t: float) -> tuple[float, float, float]:
        out = []
        for fn, dfn in ((self.lam, self.d_lam), (self.lambda_z, self.d_lambda_z), (self.t_z, self.d_t_z)):
            out.append(float(dfn(t)) if dfn is not None else derivative(lambda s, fn=fn: float(fn(s)), t))
        return tuple(out)

    def without_derivatives(self) -> "Trajectory":
        """Same functions, derivatives by finite differences."""
        return Trajectory(self.lam, self.lambda_z, self.t_z, name=self.name, spec=self.spec)

    @classmethod
    def from_samples(cls, t, lam, lambda_z, t_z) -> "Trajectory":
        from scipy.interpolate import CubicSpline

        t = np.asarray(t, dtype=float)
        if t.ndim != 1 or t.size < 2 or np.any(np.diff(t) <= 0) or t[0] != 0.0:
            raise DomainError("sample times must be strictly increasing and start at 0")
        splines = [CubicSpline(t, np.asarray(v, dtype=float)) for v in (lam, lambda_z, t_z)]
        spec = {"kind": "samples", "t": t.tolist(), "lambda": list(map(float, lam)),
                "lambda_z": list(map(float, lambda_z)), "t_z": list(map(float, t_z))}
        return cls(*splines, *(s.derivative() for s in splines), name="samples", spec=spec)


def identity_trajectory() -> Trajectory:
    one, zero = (lambda t: 1.0), (lambda t: 0.0)
    return Trajectory(one, one, zero, zero, zero, zero, name="identity")


# --- rates <-> trajectory ----------------------------------------------------------

def rates_from_trajectory(tr: Trajectory, t: float) -> tuple[float, float, float]:
    lam, lz, tz = tr.values(t)
    if abs(lam) <= EPS_INV or abs(lz) <= EPS_INV:
        raise SingularChannel(f"trajectory is not invertible at t={t}")
    d_lam, d_lz, d_tz = tr.derivatives(t)
    rate_z = d_lz / lz
    gamma_plus = 0.5 * (d_tz - (1.0 + tz) * rate_z)
    gamma_minus = 0.5 * (-d_tz - (1.0 - tz) * rate_z)
    gamma_z = 0.25 * rate_z - 0.5 * d_lam / lam
    return gamma_plus, gamma_minus, gamma_z


class _RateSweep:
    """Forward sweep producing ``G = Gamma_+ + Gamma_-``, ``Z = Gamma_z`` and ``t_z``.

    Per panel ``[a, b]`` it integrates ``G`` and ``Z`` and the damped source
    ``J = int_a^b (gamma_+ - gamma_-)(s) exp(-int_s^b (gamma_+ + gamma_-)) ds``,
    so that ``t_z(b) = t_z(a) exp(-dG) + J``. This is the inverse relation with
    the growing factor ``exp(Gamma_+ + Gamma_-)`` cancelled analytically.
    """

    def __init__(self, rates: RateTriple, step: float = 0.125, tol: float = 1e-10, max_depth: int = 40):
        self.rates = rates
        self.step = step
        self.tol = tol
        self.max_depth = max_depth
        self._states = [(0.0, 0.0, 0.0)]
        self._lock = threading.Lock()

    def _sums(self, xs):
        gp = evaluate(self.rates.gamma_plus, xs)
        gm = evaluate(self.rates.gamma_minus, xs)
        gz = evaluate(self.rates.gamma_z, xs)
        return gp + gm, gp - gm, gz

    def _panel_once(self, a, b):
        half = 0.5 * (b - a)
        xs = nodes_on(a, b)
        total, diff, gz = self._sums(xs)
        d_g_k, d_g_g = half * (KRONROD_WEIGHTS @ total), half * (GAUSS_WEIGHTS @ total)
        d_z_k, d_z_g = half * (KRONROD_WEIGHTS @ gz), half * (GAUSS_WEIGHTS @ gz)
        # tail integrals int_x^b (gamma_+ + gamma_-) at every node
        tails = np.empty_like(xs)
        for i, x in enumerate(xs):
            inner = nodes_on(x, b)
            tails[i] = 0.5 * (b - x) * (KRONROD_WEIGHTS @ self._sums(inner)[0])
        src = diff * np.exp(-tails)
        j_k, j_g = half * (KRONROD_WEIGHTS @ src), half * (GAUSS_WEIGHTS @ src)
        vals = (float(d_g_k), float(d_z_k), float(j_k))
        if not all(math.isfinite(v) for v in vals):
            raise QuadratureFailure(f"non-finite rates on [{a}, {b}]")
        err = max(abs(d_g_k - d_g_g), abs(d_z_k - d_z_g), abs(j_k - j_g))
        return vals, err

    def _panel(self, a, b, depth=0):
        vals, err = self._panel_once(a, b)
        scale = max(1.0, *(abs(v) for v in vals))
        if err <= self.tol * scale * max(b - a, 1e-3):
            return vals
        if depth >= self.max_depth:
            raise QuadratureFailure(f"rate sweep did not converge on [{a}, {b}] (error {err:.3e})")
        mid = 0.5 * (a + b)
        g1, z1, j1 = self._panel(a, mid, depth + 1)
        g2, z2, j2 = self._panel(mid, b, depth + 1)
        return g1 + g2, z1 + z2, j1 * math.exp(-g2) + j2

    @staticmethod
    def _advance(state, panel):
        g, z, tz = state
        dg, dz, j = panel
        return g + dg, z + dz, tz * math.exp(-dg) + j

    def state(self, t: float):
        if t < 0:
            raise DomainError(f"trajectory queried at negative time {t}")
        k = int(t // self.step)
        with self._lock:
            while len(self._states) <= k:
                j = len(self._states) - 1
                self._states.append(self._advance(self._states[-1], self._panel(j * self.step, (j + 1) * self.step)))
            base = self._states[k]
        lo = k * self.step
        if t == lo:
            return base
        return self._advance(base, self._panel(lo, t))


def trajectory_from_rates(rates: RateTriple, step: float = 0.125, tol: float = 1e-10) -> Trajectory:
    """Integrate the time-local master equation for the given rates.

    Derivatives of the result come from the generator itself, e.g.
    ``d lambda_z/dt = -(gamma_+ + gamma_-) lambda_z``.
    """
    sweep = _RateSweep(rates, step=step, tol=tol)

    @functools.lru_cache(maxsize=4096)
    def values(t):
        g, z, tz = sweep.state(float(t))
        return math.exp(-0.5 * g - 2.0 * z), math.exp(-g), tz

    def d_lam(t):
        gp, gm, gz = rates(t)
        return -(0.5 * (gp + gm) + 2.0 * gz) * values(float(t))[0]

    def d_lambda_z(t):
        gp, gm, _ = rates(t)
        return -(gp + gm) * values(float(t))[1]

    def d_t_z(t):
        gp, gm, _ = rates(t)
        return (gp - gm) - (gp + gm) * values(float(t))[2]

    return Trajectory(
        lambda t: values(float(t))[0],
        lambda t: values(float(t))[1],
        lambda t: values(float(t))[2],
        d_lam, d_lambda_z, d_t_z,
        name=f"from_rates({rates.name})",
    )


def generator_pauli_transfer(gamma_plus: float, gamma_minus: float, gamma_z: float) -> np.ndarray:
    """Transfer matrix of the time-local generator on ``(1, rx, ry, rz)``."""
    transverse = 0.5 * (gamma_plus + gamma_minus) + 2.0 * gamma_z
    return np.array([
        [0.0, 0.0, 0.0, 0.0],
        [0.0, -transverse, 0.0, 0.0],
        [0.0, 0.0, -transverse, 0.0],
        [gamma_plus - gamma_minus, 0.0, 0.0, -(gamma_plus + gamma_minus)],
    ])


def first_order_propagator(gamma_plus, gamma_minus, gamma_z, dt) -> PhaseCovChannel:
    """``Id + L dt`` as a channel triple."""
    return PhaseCovChannel(
        1.0 - 0.5 * (gamma_plus + gamma_minus + 4.0 * gamma_z) * dt,
        1.0 - (gamma_plus + gamma_minus) * dt,
        (gamma_plus - gamma_minus) * dt,
    )


def intermediate_map(tr: Trajectory, t1: float, t2: float) -> PhaseCovChannel:
    """Propagator from ``t1`` to ``t2``: ``Phi(t2) Phi(t1)^-1``."""
    if not 0 <= t1 <= t2:
        raise DomainError(f"need 0 <= t1 <= t2, got t1={t1}, t2={t2}")
    try:
        inv = invert(tr.channel_at(t1))
    except SingularChannel as exc:
        raise SingularChannel(f"{exc} (at t1={t1})") from None
    return compose(tr.channel_at(t2), inv)


def population(tr: Trajectory, rho0_z: float, t: float) -> float:
    """Excited-state population ``(1 + tr[rho(t) sigma_z]) / 2`` for initial ``tr[rho(0) sigma_z] = rho0_z``."""
    if not -1.0 <= rho0_z <= 1.0:
        raise DomainError(f"rho0_z must lie in [-1, 1], got {rho0_z}")
    _, lz, tz = tr.values(t)
    return 0.5 * (1.0 + tz + lz * rho0_z)


# --- divisibility ------------------------------------------------------------------

def is_cp_divisible_at(r: RateTriple, t: float, tol: float = EPS) -> Verdict:
    return Verdict.from_margin(min(r(t)), tol)


def p_divisibility_margin(gamma_plus, gamma_minus, gamma_z, d_gamma_z=None, tol: float = EPS) -> float:
    """Signed slack of the P-divisibility conditions.

    Negative gain/loss rates fail outright. Otherwise the slack is
    ``sqrt(gamma_+ gamma_-) + 2 gamma_z``; on its zero set the second-order
    condition ``d gamma_z/dt - gamma_z (gamma_+ + gamma_-)`` decides instead.
    """
    lowest = min(gamma_plus, gamma_minus)
    if lowest < -tol:
        return lowest
    s = math.sqrt(max(gamma_plus, 0.0) * max(gamma_minus, 0.0)) + 2.0 * gamma_z
    if abs(s) > tol or d_gamma_z is None:
        return s
    return d_gamma_z - gamma_z * (gamma_plus + gamma_minus)


def is_p_divisible_at(r: RateTriple, t: float, tol: float = EPS) -> Verdict:
    gp, gm, gz = r(t)
    lowest = min(gp, gm)
    s = math.sqrt(max(gp, 0.0) * max(gm, 0.0)) + 2.0 * gz
    d_gz = r.d_gamma_z_at(t) if lowest >= -tol and abs(s) <= tol else None
    return Verdict.from_margin(p_divisibility_margin(gp, gm, gz, d_gz, tol), tol)


def blp_monotone_at(r: RateTriple, t: float, tol: float = EPS) -> Verdict:
    """Monotone trace distance: ``gamma_+ + gamma_- >= 0`` and ``gamma_+ + gamma_- + 4 gamma_z >= 0``."""
    gp, gm, gz = r(t)
    return Verdict.from_margin(min(gp + gm, gp + gm + 4.0 * gz), tol)


CLASSIFIERS = {
    "cp_divisible": is_cp_divisible_at,
    "p_divisible": is_p_divisible_at,
    "blp_monotone": blp_monotone_at,
}


@dataclass
class DivisibilityReport:
    grid: np.ndarray
    verdicts: dict
    intervals: dict
    crossings: dict
    chain_violations: list

    @property
    def cp_divisible(self) -> list:
        return self.verdicts["cp_divisible"]

    @property
    def p_divisible(self) -> list:
        return self.verdicts["p_divisible"]

    @property
    def blp_monotone(self) -> list:
        return self.verdicts["blp_monotone"]

    def to_dict(self) -> dict:
        props = {}
        for name, verdicts in self.verdicts.items():
            props[name] = {
                "status": [v.status.value for v in verdicts],
                "margin": [v.margin for v in verdicts],
                "intervals": self.intervals[name],
                "crossings": self.crossings[name],
            }
        return {
            "schema": "phasecov/1",
            "grid": [float(t) for t in self.grid],
            "properties": props,
            "chain_violations": self.chain_violations,
        }


def _merge_runs(grid, statuses):
    runs = {s.value: [] for s in Status}
    start = 0
    for i in range(1, len(statuses) + 1):
        if i == len(statuses) or statuses[i] is not statuses[start]:
            runs[statuses[start].value].append([float(grid[start]), float(grid[i - 1])])
            start = i
    return runs


def _refine_crossing(classify, r, lo, hi, status_lo, tol, t_tol=1e-8):
    while hi - lo > t_tol:
        mid = 0.5 * (lo + hi)
        status = classify(r, mid, tol).status
        if status is Status.MARGINAL:
            return mid
        if status is status_lo:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def classify_intervals(r: RateTriple, t_max: float, n_grid: int, tol: float = EPS,
                       refine: bool = True) -> DivisibilityReport:
    """Evaluate the divisibility classifiers on a uniform grid and merge equal runs.

    Where a classifier flips between holds and fails, the crossing is refined
    by bisection to 1e-8 in ``t``; interval endpoints stay on the grid.
    """
    if not t_max > 0:
        raise DomainError(f"t_max must be positive, got {t_max}")
    if n_grid < 2:
        raise DomainError(f"n_grid must be at least 2, got {n_grid}")
    grid = np.linspace(0.0, t_max, n_grid)
    verdicts, intervals, crossings = {}, {}, {}
    for name, classify in CLASSIFIERS.items():
        row = []
        for t in grid:
            try:
                row.append(classify(r, float(t), tol))
            except Exception as exc:
                raise type(exc)(f"{exc} (at t={float(t)})") from exc
        verdicts[name] = row
        statuses = [v.status for v in row]
        intervals[name] = _merge_runs(grid, statuses)
        found = []
        if refine:
            for i in range(len(grid) - 1):
                a, b = statuses[i], statuses[i + 1]
                if a is not b and Status.MARGINAL not in (a, b):
                    found.append(_refine_crossing(classify, r, float(grid[i]), float(grid[i + 1]), a, tol))
        crossings[name] = found
    violations = []
    for i, t in enumerate(grid):
        cp, p, blp = (verdicts[k][i] for k in ("cp_divisible", "p_divisible", "blp_monotone"))
        if cp.holds and p.fails:
            violations.append({"t": float(t), "chain": "cp_divisible => p_divisible"})
        if p.holds and blp.fails:
            violations.append({"t": float(t), "chain": "p_divisible => blp_monotone"})
    return DivisibilityReport(grid, verdicts, intervals, crossings, violations)


# --- serialisation -----------------------------------------------------------------

def rates_from_spec(spec: dict) -> RateTriple:
    """Build rates from ``{"kind": "constant", "params": {...}}`` or ``{"kind": "samples", ...}``."""
    kind = spec.get("kind")
    if kind == "constant":
        p = spec.get("params", {})
        try:
            return RateTriple.constant(p["gamma_plus"], p["gamma_minus"], p["gamma_z"])
        except KeyError as exc:
            raise DomainError(f"constant rates missing {exc.args[0]!r}") from None
    if kind == "samples":
        try:
            return RateTriple.from_samples(spec["t"], spec["gamma_plus"], spec["gamma_minus"], spec["gamma_z"])
        except KeyError as exc:
            raise DomainError(f"sampled rates missing {exc.args[0]!r}") from None
    raise DomainError(f"unknown rate kind {kind!r}")


def trajectory_from_spec(spec: dict) -> Trajectory:
    if spec.get("kind") != "samples":
        raise DomainError(f"unknown trajectory kind {spec.get('kind')!r}")
    try:
        return Trajectory.from_samples(spec["t"], spec["lambda"], spec["lambda_z"], spec["t_z"])
    except KeyError as exc:
        raise DomainError(f"sampled trajectory missing {exc.args[0]!r}") from None
