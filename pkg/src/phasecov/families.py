"""Built-in dynamics with closed-form trajectories and rates.

Trajectory derivatives are differentiated by hand from the closed forms; the
rates are the independently stated closed forms, so ``rates_from_trajectory``
applied to a family is a genuine consistency check.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .dynamics import RateTriple, Trajectory, rates_from_trajectory
from .errors import DomainError
from .quadrature import RunningIntegral


def _require(cond: bool, message: str) -> None:
    if not cond:
        raise DomainError(message)


def _const(value):
    return lambda t: value + 0.0 * np.asarray(t, dtype=float)


def semigroup(gamma_plus: float, gamma_minus: float, gamma_z: float):
    """Constant non-negative rates; ``t_z`` uses its pure-dephasing limit when ``gamma_+ + gamma_- = 0``."""
    _require(min(gamma_plus, gamma_minus, gamma_z) >= 0, "semigroup rates must be non-negative")
    g = gamma_plus + gamma_minus
    transverse = 0.5 * (g + 4.0 * gamma_z)
    shift = (gamma_plus - gamma_minus) / g if g > 0 else 0.0

    lam = lambda t: np.exp(-transverse * np.asarray(t, dtype=float))
    lam_z = lambda t: np.exp(-g * np.asarray(t, dtype=float))
    t_z = lambda t: shift * -np.expm1(-g * np.asarray(t, dtype=float))
    params = {"gamma_plus": gamma_plus, "gamma_minus": gamma_minus, "gamma_z": gamma_z}
    tr = Trajectory(
        lam, lam_z, t_z,
        lambda t: -transverse * lam(t),
        lambda t: -g * lam_z(t),
        lambda t: (gamma_plus - gamma_minus) * lam_z(t),
        name="semigroup", spec={"kind": "semigroup", "params": params},
    )
    rates = RateTriple(_const(gamma_plus), _const(gamma_minus), _const(gamma_z), _const(0.0),
                       name="semigroup", spec={"kind": "semigroup", "params": params})
    return tr, rates


def rotated_semigroup(gamma_plus: float, gamma_minus: float, gamma_z: float, omega: float):
    """Semigroup with an extra coherent term ``-i omega [sigma_z, rho]``.

    The transverse block of the true map is ``lam(t)`` times a rotation by
    ``2 omega t``. The returned trajectory reports its diagonal entry
    ``lam(t) cos(2 omega t)``, which equals the map exactly when
    ``sin(2 omega t) = 0``; at odd multiples of ``pi / (2 omega)`` this is the
    sign-flipped channel. The rates are the dissipative part only, so
    ``rates_from_trajectory`` does not reproduce them.
    """
    tr0, rates = semigroup(gamma_plus, gamma_minus, gamma_z)
    lam = lambda t: tr0.lam(t) * np.cos(2.0 * omega * np.asarray(t, dtype=float))
    d_lam = lambda t: (tr0.d_lam(t) * np.cos(2.0 * omega * np.asarray(t, dtype=float))
                       - 2.0 * omega * tr0.lam(t) * np.sin(2.0 * omega * np.asarray(t, dtype=float)))
    params = {"gamma_plus": gamma_plus, "gamma_minus": gamma_minus, "gamma_z": gamma_z, "omega": omega}
    tr = Trajectory(lam, tr0.lambda_z, tr0.t_z, d_lam, tr0.d_lambda_z, tr0.d_t_z,
                    name="rotated_semigroup", spec={"kind": "rotated_semigroup", "params": params})
    return tr, rates


def rotated_semigroup_pauli_transfer(gamma_plus, gamma_minus, gamma_z, omega, t) -> np.ndarray:
    """Full 4x4 transfer matrix of the rotated semigroup, including the xy rotation."""
    tr, _ = rotated_semigroup(gamma_plus, gamma_minus, gamma_z, omega)
    lam = float(semigroup(gamma_plus, gamma_minus, gamma_z)[0].lam(t))
    c, s = math.cos(2 * omega * t), math.sin(2 * omega * t)
    out = np.zeros((4, 4))
    out[0, 0] = 1.0
    out[1:3, 1:3] = lam * np.array([[c, -s], [s, c]])
    out[3, 0] = float(tr.t_z(t))
    out[3, 3] = float(tr.lambda_z(t))
    return out


def nonmonotone_population(nu: float, omega: float):
    """CP-divisible dynamics whose population oscillates for every initial state."""
    _require(nu > 0 and omega > 0, "nu and omega must be positive")
    norm = math.sqrt(4 * nu**2 + omega**2)
    amp = 2 * nu / norm
    arr = lambda t: np.asarray(t, dtype=float)

    lam = lambda t: np.exp(-nu * arr(t))
    lam_z = lambda t: np.exp(-2 * nu * arr(t))
    t_z = lambda t: amp * np.sin(omega * arr(t))
    osc = lambda t: (nu / norm) * (2 * nu * np.sin(omega * arr(t)) + omega * np.cos(omega * arr(t)))
    d_osc = lambda t: (nu * omega / norm) * (2 * nu * np.cos(omega * arr(t)) - omega * np.sin(omega * arr(t)))
    params = {"nu": nu, "omega": omega}
    tr = Trajectory(
        lam, lam_z, t_z,
        lambda t: -nu * lam(t),
        lambda t: -2 * nu * lam_z(t),
        lambda t: amp * omega * np.cos(omega * arr(t)),
        name="nonmonotone_population", spec={"kind": "nonmonotone_population", "params": params},
    )
    rates = RateTriple(lambda t: nu + osc(t), lambda t: nu - osc(t), _const(0.0), _const(0.0),
                       name="nonmonotone_population", spec=tr.spec)
    return tr, rates


def nonmonotone_threshold(nu: float, omega: float) -> float:
    """Time after which the population is non-monotone for every initial state."""
    return math.log(math.sqrt(4 * nu**2 + omega**2) / (2 * nu)) / (2 * nu)


def eternal_commutative(a: float, nu: float):
    """Non-unital commutative dynamics with ``gamma_z(t) < 0`` for all ``t > 0``."""
    _require(abs(a) < 1, f"|a| must be < 1, got {a}")
    _require(nu > 0, f"nu must be positive, got {nu}")
    arr = lambda t: np.asarray(t, dtype=float)
    u = lambda t: np.exp(-2 * nu * arr(t))

    def lam(t):
        x = u(t)
        return 0.5 * np.sqrt((1 + x) ** 2 - a**2 * (1 - x) ** 2)

    def d_lam(t):
        x = u(t)
        return -2 * nu * x * ((1 + x) + a**2 * (1 - x)) / (4 * lam(t))

    def gamma_z(t):
        t = arr(t)
        return -nu * (1 - a**2) * np.sinh(2 * nu * t) / (2 * (1 + a**2 + (1 - a**2) * np.cosh(2 * nu * t)))

    params = {"a": a, "nu": nu}
    spec = {"kind": "eternal_commutative", "params": params}
    tr = Trajectory(
        lam, u, lambda t: a * (1 - u(t)),
        d_lam, lambda t: -2 * nu * u(t), lambda t: 2 * nu * a * u(t),
        name="eternal_commutative", spec=spec,
    )
    rates = RateTriple(_const(nu * (1 + a)), _const(nu * (1 - a)), gamma_z, name="eternal_commutative", spec=spec)
    return tr, rates


def eternal_noncommutative(b: float, nu: float):
    """Non-unital, non-commutative dynamics with ``gamma_z(t) < 0`` for all ``t > 0``."""
    _require(0 < abs(b) <= 1, f"need 0 < |b| <= 1, got {b}")
    _require(nu > 0, f"nu must be positive, got {nu}")
    arr = lambda t: np.asarray(t, dtype=float)
    v = lambda t: np.exp(-nu * arr(t))

    def lam(t):
        x = v(t) ** 2
        return 0.5 * np.sqrt((1 + x) ** 2 - b**2 * x * (1 - x) ** 2)

    def d_lam(t):
        x = v(t) ** 2
        dq = 2 * (1 + x) - b**2 * (1 - x) * (1 - 3 * x)
        return -2 * nu * x * dq / (8 * lam(t))

    def gamma_shift(t):
        t = arr(t)
        return b * np.exp(-2 * nu * t) * np.cosh(nu * t)

    def gamma_z(t):
        t = arr(t)
        num = nu * (1 - np.exp(-2 * nu * t)) * (np.exp(3 * nu * t) * np.cosh(nu * t) - b**2)
        den = 4 * (np.exp(2 * nu * t) * np.cosh(nu * t) ** 2 - b**2 * np.sinh(nu * t) ** 2)
        return -num / den

    params = {"b": b, "nu": nu}
    spec = {"kind": "eternal_noncommutative", "params": params}
    tr = Trajectory(
        lam, lambda t: v(t) ** 2, lambda t: b * v(t) * (1 - v(t) ** 2),
        d_lam, lambda t: -2 * nu * v(t) ** 2, lambda t: b * nu * v(t) * (3 * v(t) ** 2 - 1),
        name="eternal_noncommutative", spec=spec,
    )
    rates = RateTriple(lambda t: nu * (1 + gamma_shift(t)), lambda t: nu * (1 - gamma_shift(t)), gamma_z,
                       name="eternal_noncommutative", spec=spec)
    return tr, rates


# --- kernel-example family ---------------------------------------------------------

@dataclass(frozen=True)
class ExpDecay:
    c: float
    rate: float

    def __call__(self, t):
        return self.c * np.exp(-self.rate * np.asarray(t, dtype=float))

    def integral(self, t):
        t = np.asarray(t, dtype=float)
        if self.rate == 0:
            return self.c * t
        return self.c * -np.expm1(-self.rate * t) / self.rate

    def laplace(self):
        from .rational import RationalLaplace
        return RationalLaplace([self.c], [self.rate, 1.0])

    def to_dict(self):
        return {"kind": "exp_decay", "c": self.c, "rate": self.rate}


@dataclass(frozen=True)
class Cosine:
    c: float
    omega: float

    def __call__(self, t):
        return self.c * np.cos(self.omega * np.asarray(t, dtype=float))

    def integral(self, t):
        t = np.asarray(t, dtype=float)
        if self.omega == 0:
            return self.c * t
        return self.c * np.sin(self.omega * t) / self.omega

    def laplace(self):
        from .rational import RationalLaplace
        return RationalLaplace([0.0, self.c], [self.omega**2, 0.0, 1.0])

    def to_dict(self):
        return {"kind": "cosine", "c": self.c, "omega": self.omega}


@dataclass(frozen=True)
class Constant:
    c: float

    def __call__(self, t):
        return self.c + 0.0 * np.asarray(t, dtype=float)

    def integral(self, t):
        return self.c * np.asarray(t, dtype=float)

    def laplace(self):
        from .rational import RationalLaplace
        return RationalLaplace([self.c], [0.0, 1.0])

    def to_dict(self):
        return {"kind": "constant", "c": self.c}


def kernel_function_from_dict(data: dict):
    kind = data.get("kind")
    try:
        if kind == "exp_decay":
            return ExpDecay(float(data["c"]), float(data["rate"]))
        if kind == "cosine":
            return Cosine(float(data["c"]), float(data["omega"]))
        if kind == "constant":
            return Constant(float(data["c"]))
    except KeyError as exc:
        raise DomainError(f"kernel function {kind!r} missing {exc.args[0]!r}") from None
    raise DomainError(f"unknown kernel function kind {kind!r}")


DEFAULT_CHECK_GRID = np.linspace(0.0, 10.0, 201)


def kernel_example(a: float, a_plus: float, a_minus: float, f, check_grid=None):
    """Straight-line trajectories driven by ``F(t) = int_0^t f``.

    ``f`` is one of the named functions (closed-form ``F``) or any callable, in
    which case ``F`` is a cached adaptive running integral. ``F`` must stay in
    ``[0, 2 / (a + max(a_plus, a_minus))]``; this is checked on ``check_grid``
    and again at every queried time.
    """
    _require(a_plus > 0 and a_minus > 0, "a_plus and a_minus must be positive")
    _require(a >= a_plus and a >= a_minus, "need a >= a_plus and a >= a_minus")
    big_f = f.integral if hasattr(f, "integral") else RunningIntegral(f)
    upper = 2.0 / (a + max(a_plus, a_minus))
    tol = 1e-12

    def checked_f(t):
        value = float(big_f(t))
        if not -tol <= value <= upper + tol:
            raise DomainError(f"int_0^t f = {value} leaves [0, {upper}] at t={float(t)}")
        return value

    grid = DEFAULT_CHECK_GRID if check_grid is None else np.asarray(check_grid, dtype=float)
    for t in grid:
        checked_f(float(t))

    total = a_plus + a_minus
    params = {"a": a, "a_plus": a_plus, "a_minus": a_minus}
    if hasattr(f, "to_dict"):
        params["f"] = f.to_dict()
    spec = {"kind": "kernel_example", "params": params}
    tr = Trajectory(
        lambda t: 1.0 - a * checked_f(t),
        lambda t: 1.0 - total * checked_f(t),
        lambda t: (a_plus - a_minus) * checked_f(t),
        lambda t: -a * float(f(t)),
        lambda t: -total * float(f(t)),
        lambda t: (a_plus - a_minus) * float(f(t)),
        name="kernel_example", spec=spec,
    )
    rates = RateTriple(
        lambda t: rates_from_trajectory(tr, t)[0],
        lambda t: rates_from_trajectory(tr, t)[1],
        lambda t: rates_from_trajectory(tr, t)[2],
        name="kernel_example", spec=spec,
    )
    return tr, rates


# --- specs -------------------------------------------------------------------------

FAMILIES = {
    "semigroup": (semigroup, ("gamma_plus", "gamma_minus", "gamma_z"),
                  "constant rates, all >= 0"),
    "rotated_semigroup": (rotated_semigroup, ("gamma_plus", "gamma_minus", "gamma_z", "omega"),
                          "rates >= 0, omega real"),
    "nonmonotone_population": (nonmonotone_population, ("nu", "omega"), "nu > 0, omega > 0"),
    "eternal_commutative": (eternal_commutative, ("a", "nu"), "|a| < 1, nu > 0"),
    "eternal_noncommutative": (eternal_noncommutative, ("b", "nu"), "0 < |b| <= 1, nu > 0"),
    "kernel_example": (kernel_example, ("a", "a_plus", "a_minus", "f"),
                       "a >= a_plus > 0, a >= a_minus > 0, 0 <= int_0^t f <= 2/(a + max(a_plus, a_minus))"),
}


@dataclass(frozen=True)
class FamilySpec:
    kind: str
    params: dict = field(default_factory=dict)

    def build(self):
        """Return ``(Trajectory, RateTriple)``."""
        if self.kind not in FAMILIES:
            raise DomainError(f"unknown family {self.kind!r}; choose from {sorted(FAMILIES)}")
        fn, names, _ = FAMILIES[self.kind]
        missing = [n for n in names if n not in self.params]
        extra = [n for n in self.params if n not in names]
        if missing or extra:
            raise DomainError(f"family {self.kind!r} expects parameters {list(names)}; "
                              f"missing {missing}, unexpected {extra}")
        args = dict(self.params)
        if self.kind == "kernel_example":
            f = args["f"]
            args["f"] = kernel_function_from_dict(f) if isinstance(f, dict) else f
        else:
            args = {k: float(v) for k, v in args.items()}
        return fn(**args)

    def to_dict(self) -> dict:
        return {"kind": self.kind, "params": self.params}

    @classmethod
    def from_dict(cls, data: dict) -> "FamilySpec":
        if "kind" not in data:
            raise DomainError("family spec needs a 'kind'")
        return cls(data["kind"], dict(data.get("params", {})))


def family_catalog() -> list[dict]:
    return [{"kind": k, "params": list(names), "domain": dom} for k, (_, names, dom) in FAMILIES.items()]
