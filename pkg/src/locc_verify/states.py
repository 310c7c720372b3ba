"""Named single- and two-qubit vectors built from the Schmidt coefficient.

The target is ``|Psi> = sqrt(1 - lam)|00> + sqrt(lam)|11>`` with
``lam`` in ``[0, 1/2]``.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property

import numpy as np

from .algebra import ket, proj
from .errors import OutOfRangeLambda, SingularDenominator

KET0 = ket(1, 0)
KET1 = ket(0, 1)
PLUS = ket(1, 1) / np.sqrt(2)
MINUS = ket(1, -1) / np.sqrt(2)
# eigenstates of Pauli Y, written |T> ("top") and |_|_> ("bot")
TOP = ket(1, 1j) / np.sqrt(2)
BOT = ket(1, -1j) / np.sqrt(2)

KET00 = ket(1, 0, 0, 0)
KET01 = ket(0, 1, 0, 0)
KET10 = ket(0, 0, 1, 0)
KET11 = ket(0, 0, 0, 1)

_DENOM_EPS = 1e-15


def check_lambda(lam: float) -> float:
    lam = float(lam)
    if not (0.0 <= lam <= 0.5):
        raise OutOfRangeLambda(f"Schmidt coefficient must lie in [0, 1/2], got {lam!r}")
    return lam


@dataclass(frozen=True)
class TargetState:
    lam: float

    def __post_init__(self):
        check_lambda(self.lam)

    @cached_property
    def psi(self) -> np.ndarray:
        return ket(np.sqrt(1 - self.lam), 0, 0, np.sqrt(self.lam))

    @cached_property
    def psi_perp(self) -> np.ndarray:
        return ket(np.sqrt(self.lam), 0, 0, -np.sqrt(1 - self.lam))

    @cached_property
    def projector(self) -> np.ndarray:
        return proj(self.psi)

    @cached_property
    def eigenbasis(self) -> np.ndarray:
        """Columns ``|Psi>, |Psi_perp>, |01>, |10>``: the common eigenbasis of every twirled strategy."""
        return np.column_stack([self.psi, self.psi_perp, KET01, KET10])


def make_target(lam: float) -> TargetState:
    return TargetState(check_lambda(lam))


def local_phase_unitary(theta: float) -> tuple[np.ndarray, np.ndarray]:
    """Return ``(U_theta, U_-theta)`` with ``U_theta = |0><0| + e^{i theta}|1><1|``."""
    u = np.diag([1.0, np.exp(1j * theta)]).astype(complex)
    return u, u.conj()


@dataclass(frozen=True)
class OneWayVectors:
    v_plus: np.ndarray
    v_minus: np.ndarray
    w_plus: np.ndarray
    w_minus: np.ndarray


def one_way_vectors(lam: float) -> OneWayVectors:
    lam = check_lambda(lam)
    a, b = np.sqrt(1 - lam), np.sqrt(lam)
    return OneWayVectors(
        v_plus=ket(a, b),
        v_minus=ket(a, -b),
        w_plus=ket(a, 1j * b),
        w_minus=ket(a, -1j * b),
    )


@dataclass(frozen=True)
class TwoWayVectors:
    """Unnormalized vectors entering the three-step two-way POVM elements."""

    lam: float
    delta: float
    A: float
    B: float
    vtilde_plus: np.ndarray
    vtilde_minus: np.ndarray
    wtilde_plus: np.ndarray
    wtilde_minus: np.ndarray


def two_way_denominator(lam: float, delta: float) -> float:
    return 1.0 - delta + lam * delta


def make_two_way_vectors(lam: float, delta: float) -> TwoWayVectors:
    lam = check_lambda(lam)
    delta = float(delta)
    if not (0.0 <= delta <= 1.0):
        raise ValueError(f"delta must lie in [0, 1], got {delta!r}")
    den = two_way_denominator(lam, delta)
    if den <= _DENOM_EPS:
        raise SingularDenominator(f"1 - delta + lambda*delta = {den!r} at lambda={lam}, delta={delta}")
    A = (1 - lam) * (1 - delta) / den
    B = lam / den
    a, b = np.sqrt((1 - delta) * A), np.sqrt(B)
    return TwoWayVectors(
        lam=lam,
        delta=delta,
        A=A,
        B=B,
        vtilde_plus=ket(a, b),
        vtilde_minus=ket(a, -b),
        wtilde_plus=ket(a, 1j * b),
        wtilde_minus=ket(a, -1j * b),
    )


@dataclass(frozen=True)
class AliceDirectionState:
    """Alice's direction ``|t,s>`` and Bob's matching unit vector ``|t,s,B>``."""

    t: float
    s: float
    ket_a: np.ndarray
    ket_b: np.ndarray


def alice_direction(t: float, s: float, lam: float) -> AliceDirectionState:
    lam = check_lambda(lam)
    if not (0.0 <= t <= 1.0):
        raise ValueError(f"t must lie in [0, 1], got {t!r}")
    ket_a = ket(np.sqrt(t), np.exp(1j * s) * np.sqrt(1 - t))
    raw = ket(np.sqrt(t * (1 - lam)), np.exp(-1j * s) * np.sqrt((1 - t) * lam))
    n = np.linalg.norm(raw)
    if n <= _DENOM_EPS:
        # only t=0 at lam=0: Psi has no weight on this branch; keep the lam -> 0+ limit
        ket_b = ket(0, np.exp(-1j * s))
    else:
        ket_b = raw / n
    return AliceDirectionState(t=float(t), s=float(s), ket_a=ket_a, ket_b=ket_b)
