"""Tri-state verdicts for inequality-based classifiers."""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np

#: Global classification tolerance; ``|margin| <= EPS`` reports marginal.
EPS = 1e-9


class Status(str, enum.Enum):
    HOLDS = "holds"
    FAILS = "fails"
    MARGINAL = "marginal"


@dataclass(frozen=True)
class Verdict:
    """Outcome of a classifier.

    ``margin`` is the signed slack of the tightest inequality: positive inside the
    region, negative outside. The status is derived from it so the two never
    disagree.
    """

    status: Status
    margin: float

    @classmethod
    def from_margin(cls, margin: float, tol: float = EPS) -> "Verdict":
        margin = float(margin)
        if math.isnan(margin):
            raise ValueError("margin is NaN")
        if abs(margin) <= tol:
            return cls(Status.MARGINAL, margin)
        return cls(Status.HOLDS if margin > 0 else Status.FAILS, margin)

    @property
    def holds(self) -> bool:
        return self.status is Status.HOLDS

    @property
    def fails(self) -> bool:
        return self.status is Status.FAILS

    @property
    def marginal(self) -> bool:
        return self.status is Status.MARGINAL

    @property
    def satisfied(self) -> bool:
        """True unless the verdict fails, i.e. membership in the closed region."""
        return self.status is not Status.FAILS

    def to_dict(self) -> dict:
        return {"status": self.status.value, "margin": self.margin}

    def __bool__(self):
        raise TypeError("Verdict is tri-state; use .holds, .satisfied or .status")


def status_codes(margin, tol: float = EPS) -> np.ndarray:
    """Vectorised status: +1 holds, -1 fails, 0 marginal."""
    margin = np.asarray(margin, dtype=float)
    code = np.sign(margin).astype(np.int8)
    code[np.abs(margin) <= tol] = 0
    return code


CODE_NAMES = {1: Status.HOLDS.value, -1: Status.FAILS.value, 0: Status.MARGINAL.value}
