"""Phase covariant qubit channels.

A channel is fixed by three reals ``(lam, lambda_z, t_z)``; it contracts the
transverse Bloch components by ``lam``, the longitudinal one by ``lambda_z`` and
shifts the result by ``t_z`` along z. Classifiers return :class:`Verdict` values;
the ``*_margin`` helpers are the same inequalities vectorised over numpy arrays
(used by region scans).
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import DomainError, NoNormalForm, SingularChannel
from .verdict import EPS, Verdict

EPS_INV = 1e-12

I2 = np.eye(2, dtype=complex)
SX = np.array([[0, 1], [1, 0]], dtype=complex)
SY = np.array([[0, -1j], [1j, 0]], dtype=complex)
SZ = np.array([[1, 0], [0, -1]], dtype=complex)
PAULIS = (I2, SX, SY, SZ)


@dataclass(frozen=True)
class PhaseCovChannel:
    lam: float
    lambda_z: float
    t_z: float

    def __post_init__(self):
        for name in ("lam", "lambda_z", "t_z"):
            value = getattr(self, name)
            if not isinstance(value, (int, float, np.floating, np.integer)) or not math.isfinite(value):
                raise DomainError(f"{name} must be a finite real, got {value!r}")
            object.__setattr__(self, name, float(value))

    @classmethod
    def identity(cls) -> "PhaseCovChannel":
        return cls(1.0, 1.0, 0.0)

    def as_tuple(self) -> tuple[float, float, float]:
        return (self.lam, self.lambda_z, self.t_z)

    def to_dict(self) -> dict:
        return {"lambda": self.lam, "lambda_z": self.lambda_z, "t_z": self.t_z}

    @classmethod
    def from_dict(cls, data: dict) -> "PhaseCovChannel":
        try:
            return cls(data["lambda"], data["lambda_z"], data["t_z"])
        except KeyError as exc:
            raise DomainError(f"channel object missing key {exc.args[0]!r}") from None

    def __matmul__(self, other: "PhaseCovChannel") -> "PhaseCovChannel":
        return compose(self, other)


@dataclass(frozen=True)
class BlochVector:
    rx: float
    ry: float
    rz: float

    def as_array(self) -> np.ndarray:
        return np.array([self.rx, self.ry, self.rz])

    @property
    def norm(self) -> float:
        return float(np.linalg.norm(self.as_array()))

    def density_matrix(self) -> np.ndarray:
        return 0.5 * (I2 + self.rx * SX + self.ry * SY + self.rz * SZ)

    @classmethod
    def from_density_matrix(cls, rho) -> "BlochVector":
        rho = np.asarray(rho, dtype=complex)
        return cls(*(float(np.real(np.trace(s @ rho))) for s in (SX, SY, SZ)))


@dataclass(frozen=True)
class SinkhornForm:
    """Unital normal form ``Upsilon[rho] = A Phi[B rho B^+] A^+``.

    ``lt_x`` and ``lt_z`` are the closed-form contraction parameters of the
    unital map; ``a_op`` and ``b_op`` come from the numerical scaling iteration.
    """

    lt_x: float
    lt_z: float
    a_op: np.ndarray
    b_op: np.ndarray
    iterations: int

    def unital_map(self, rho) -> np.ndarray:
        return apply_operator(PhaseCovChannel(self.lt_x, self.lt_z, 0.0), rho)

    def reconstruct(self, rho) -> np.ndarray:
        """Recover ``Phi[rho]`` from the normal form."""
        a_inv = np.linalg.inv(self.a_op)
        b_inv = np.linalg.inv(self.b_op)
        inner = b_inv @ np.asarray(rho, dtype=complex) @ b_inv.conj().T
        return a_inv @ self.unital_map(inner) @ a_inv.conj().T


# --- action and algebra -------------------------------------------------------

def apply(ch: PhaseCovChannel, r: BlochVector) -> BlochVector:
    return BlochVector(ch.lam * r.rx, ch.lam * r.ry, ch.lambda_z * r.rz + ch.t_z)


def apply_operator(ch: PhaseCovChannel, x) -> np.ndarray:
    """Act on an arbitrary 2x2 operator through the trace formula of the map."""
    x = np.asarray(x, dtype=complex)
    tr = np.trace(x)
    out = tr * (I2 + ch.t_z * SZ)
    out = out + ch.lam * (np.trace(SX @ x) * SX + np.trace(SY @ x) * SY)
    out = out + ch.lambda_z * np.trace(SZ @ x) * SZ
    return 0.5 * out


def compose(outer: PhaseCovChannel, inner: PhaseCovChannel) -> PhaseCovChannel:
    """``outer`` after ``inner``."""
    return PhaseCovChannel(
        outer.lam * inner.lam,
        outer.lambda_z * inner.lambda_z,
        outer.lambda_z * inner.t_z + outer.t_z,
    )


def invert(ch: PhaseCovChannel, eps_inv: float = EPS_INV) -> PhaseCovChannel:
    if abs(ch.lam) <= eps_inv or abs(ch.lambda_z) <= eps_inv:
        raise SingularChannel(f"channel {ch.as_tuple()} is not invertible")
    return PhaseCovChannel(1.0 / ch.lam, 1.0 / ch.lambda_z, -ch.t_z / ch.lambda_z)


def pauli_transfer(ch: PhaseCovChannel) -> np.ndarray:
    """Real 4x4 matrix acting on ``(1, rx, ry, rz)``."""
    return np.array([
        [1.0, 0.0, 0.0, 0.0],
        [0.0, ch.lam, 0.0, 0.0],
        [0.0, 0.0, ch.lam, 0.0],
        [ch.t_z, 0.0, 0.0, ch.lambda_z],
    ])


def from_pauli_transfer(ptm, atol: float = 1e-9) -> PhaseCovChannel:
    ptm = np.asarray(ptm, dtype=float)
    ch = PhaseCovChannel(ptm[1, 1], ptm[3, 3], ptm[3, 0])
    if ptm.shape != (4, 4) or not np.allclose(ptm, pauli_transfer(ch), atol=atol):
        raise DomainError("matrix is not the transfer matrix of a phase covariant channel")
    if abs(ptm[2, 2] - ptm[1, 1]) > atol:
        raise DomainError("transverse contractions differ")
    return ch


def pauli_transfer_from_map(fn) -> np.ndarray:
    """Transfer matrix of an arbitrary linear qubit map given as a callable on 2x2 operators."""
    return np.array([
        [0.5 * np.real(np.trace(pk @ fn(pl))) for pl in PAULIS] for pk in PAULIS
    ])


# --- representations ----------------------------------------------------------

def _apply_operator_batch(lam, lz, tz, x):
    """``apply_operator`` broadcast over parameter arrays of shape (n,)."""
    lam, lz, tz = (np.asarray(v, dtype=float)[..., None, None] for v in (lam, lz, tz))
    tr = np.trace(x)
    out = tr * (I2 + tz * SZ)
    out = out + lam * (np.trace(SX @ x) * SX + np.trace(SY @ x) * SY)
    out = out + lz * np.trace(SZ @ x) * SZ
    return 0.5 * out


def choi_batch(lam, lz, tz) -> np.ndarray:
    """Choi states ``(Phi x Id)[|psi+><psi+|]`` for arrays of parameters, shape (n, 4, 4).

    Built by applying the map to the matrix units ``|i><j|``; the first tensor
    factor is the output of the channel.
    """
    lam = np.atleast_1d(np.asarray(lam, dtype=float))
    out = np.zeros(lam.shape + (2, 2, 2, 2), dtype=complex)
    for i in range(2):
        for j in range(2):
            unit = np.zeros((2, 2), dtype=complex)
            unit[i, j] = 1.0
            # out[..., a, i, b, j] = Phi(|i><j|)[a, b] / 2
            out[..., :, i, :, j] = 0.5 * _apply_operator_batch(lam, lz, tz, unit)
    return out.reshape(lam.shape + (4, 4))


def to_choi(ch: PhaseCovChannel) -> np.ndarray:
    return choi_batch(ch.lam, ch.lambda_z, ch.t_z)[0]


def min_choi_eigenvalue(lam, lz, tz) -> np.ndarray:
    return np.linalg.eigvalsh(choi_batch(lam, lz, tz))[..., 0]


# --- vectorised inequality slacks ----------------------------------------------

def cp_margin(lam, lz, tz):
    lam, lz, tz = np.broadcast_arrays(*(np.asarray(v, dtype=float) for v in (lam, lz, tz)))
    m1 = 1.0 - np.abs(lz) - np.abs(tz)
    m2 = (1.0 + lz) ** 2 - 4.0 * lam**2 - tz**2
    return np.minimum(m1, m2)


def _positivity_sum(lz, tz):
    plus = np.sqrt(np.maximum((1.0 + lz) ** 2 - tz**2, 0.0))
    minus = np.sqrt(np.maximum((1.0 - lz) ** 2 - tz**2, 0.0))
    return plus + minus


def positive_margin(lam, lz, tz):
    lam, lz, tz = np.broadcast_arrays(*(np.asarray(v, dtype=float) for v in (lam, lz, tz)))
    m1 = 1.0 - np.abs(lz) - np.abs(tz)
    total = _positivity_sum(lz, tz)
    m2 = total - 2.0 * np.abs(lam)
    m3 = total**2 - 4.0 * np.abs(lz)
    # outside the first inequality the square roots are meaningless; report it alone
    return np.where(m1 < 0, m1, np.minimum(m1, np.minimum(m2, m3)))


def polyhedron_margin(lam, lz, tz):
    lam, lz, tz = np.broadcast_arrays(*(np.asarray(v, dtype=float) for v in (lam, lz, tz)))
    base = np.abs(tz)
    return np.minimum.reduce([
        1.0 + 2.0 * lam + lz - base,
        1.0 - 2.0 * lam + lz - base,
        1.0 - lz - base,
    ])


def r_max_array(lam, lz, tz):
    """Largest Bloch-vector length in the image of the Bloch ball.

    The interior stationary point of ``|r|`` on the image ellipsoid exists only
    when ``|lz * tz| <= lam**2 - lz**2``; otherwise the maximum sits at a pole.
    """
    lam, lz, tz = np.broadcast_arrays(*(np.asarray(v, dtype=float) for v in (lam, lz, tz)))
    endpoint = np.abs(lz) + np.abs(tz)
    gap = lam**2 - lz**2
    # gap > 0 rather than |lam| > |lz| so underflowed squares never divide by zero
    interior = (gap > 0) & (np.abs(lz * tz) <= gap)
    ratio = np.divide(tz**2, gap, out=np.zeros_like(gap), where=interior)
    return np.where(interior, np.abs(lam) * np.sqrt(1.0 + ratio), endpoint)


# --- scalar classifiers ------------------------------------------------------------

def is_cp(ch: PhaseCovChannel, tol: float = EPS) -> Verdict:
    return Verdict.from_margin(cp_margin(*ch.as_tuple()), tol)


def is_positive(ch: PhaseCovChannel, tol: float = EPS) -> Verdict:
    return Verdict.from_margin(positive_margin(*ch.as_tuple()), tol)


def in_polyhedron(ch: PhaseCovChannel, tol: float = EPS) -> Verdict:
    return Verdict.from_margin(polyhedron_margin(*ch.as_tuple()), tol)


def r_max(ch: PhaseCovChannel) -> float:
    return float(r_max_array(*ch.as_tuple()))


def unital_form_parameters(ch: PhaseCovChannel) -> tuple[float, float]:
    """Closed-form ``(lt_x, lt_z)`` of the unital normal form."""
    total = float(_positivity_sum(ch.lambda_z, ch.t_z))
    return 2.0 * ch.lam / total, 4.0 * ch.lambda_z / total**2


def _inv_sqrt(h: np.ndarray) -> np.ndarray:
    w, v = np.linalg.eigh(h)
    if w[0] <= 0:
        raise NoNormalForm("scaling operator lost positivity")
    return (v / np.sqrt(w)) @ v.conj().T


def _dual_apply(ch: PhaseCovChannel, y) -> np.ndarray:
    """Adjoint map with respect to the Hilbert-Schmidt product."""
    coeffs = np.array([np.trace(p @ y) for p in PAULIS])
    out = pauli_transfer(ch).T @ coeffs
    return 0.5 * sum(c * p for c, p in zip(out, PAULIS))


def sinkhorn_form(ch: PhaseCovChannel, max_iter: int = 10_000, match_tol: float = 1e-10) -> SinkhornForm:
    """Scale ``ch`` to a unital trace preserving map by operator Sinkhorn iteration.

    Each sweep applies ``A <- Psi(I)^(-1/2) A`` (unital step) and then
    ``B <- B Psi*(I)^(-1/2)`` (trace preserving step), where
    ``Psi[X] = A Phi[B X B^+] A^+``.
    """
    if abs(ch.lambda_z) + abs(ch.t_z) >= 1.0:
        raise NoNormalForm(f"|lambda_z| + |t_z| >= 1 for {ch.as_tuple()}: no normal form")
    lt_x, lt_z = unital_form_parameters(ch)

    def psi(a, b, x):
        return a @ apply_operator(ch, b @ x @ b.conj().T) @ a.conj().T

    def psi_dual(a, b, y):
        return b.conj().T @ _dual_apply(ch, a.conj().T @ y @ a) @ b

    a_op = I2.copy()
    b_op = I2.copy()
    it = 0
    for it in range(1, max_iter + 1):
        a_op = _inv_sqrt(psi(a_op, b_op, I2)) @ a_op
        b_op = b_op @ _inv_sqrt(psi_dual(a_op, b_op, I2))
        if np.linalg.norm(psi(a_op, b_op, I2) - I2) < 1e-14:
            break
    num_x = 0.5 * np.real(np.trace(SX @ psi(a_op, b_op, SX)))
    num_z = 0.5 * np.real(np.trace(SZ @ psi(a_op, b_op, SZ)))
    if abs(num_x - lt_x) > match_tol or abs(num_z - lt_z) > match_tol:
        raise NoNormalForm(
            f"scaling iteration stalled after {it} sweeps: ({num_x}, {num_z}) vs ({lt_x}, {lt_z})"
        )
    return SinkhornForm(lt_x, lt_z, a_op, b_op, it)
