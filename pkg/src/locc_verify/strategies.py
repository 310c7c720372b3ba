"""POVM elements and verification strategies as explicit 4x4 operators.

Every strategy operator is *assembled* from its mixture of pass elements,
``Omega = sum_l p_l T_l``; closed-form spectra are only used by the tests and
oracles that check these assemblies.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum

import numpy as np

from .algebra import I4, eigvals_desc, proj, swap_conjugate, tensor
from .errors import MeanConstraintViolated, OutOfRangeP, SingularDenominator, UnknownStrategy
from .states import (
    BOT,
    KET0,
    KET00,
    KET01,
    KET1,
    KET10,
    MINUS,
    PLUS,
    TOP,
    alice_direction,
    check_lambda,
    make_target,
    make_two_way_vectors,
    one_way_vectors,
    two_way_denominator,
)

PSD_TOL = 1e-10
DIRECTIONS = ("AtoB", "BtoA")


class StrategyClass(str, Enum):
    ONE_WAY_AB = "oneWayAB"
    ONE_WAY_BA = "oneWayBA"
    TWO_STEP_TWO_WAY = "twoStepTwoWay"
    THREE_STEP_TWO_WAY = "threeStepTwoWay"
    SEPARABLE_HOMOGENEOUS = "separableHomogeneous"
    NONLOCAL = "nonlocal"
    PLM_REFERENCE = "plmReference"


@dataclass(frozen=True)
class ProtocolSpec:
    """How a pass element is physically measured; consumed by the simulator.

    ``kind`` is ``"one_way"`` (projective measurement by ``first`` in
    ``basis``, outcome sent to the partner), ``"two_way"`` (the three-step
    procedure started by ``first``) or ``"joint"`` (a global two-outcome
    measurement on the element itself).  ``notify`` prepends Alice's
    "you start" message when Bob opens the protocol on her request.
    """

    kind: str
    lam: float
    first: str = "A"
    basis: str | None = None
    delta: float | None = None
    notify: bool = False


@dataclass(frozen=True)
class PovmElement:
    op: np.ndarray
    label: str
    comm_steps: int
    protocol: ProtocolSpec | None = None

    def __post_init__(self):
        op = np.array(self.op, dtype=complex)
        op.setflags(write=False)
        object.__setattr__(self, "op", op)

    def is_valid(self, tol: float = PSD_TOL) -> bool:
        w = eigvals_desc(self.op)
        return bool(w[-1] >= -tol and w[0] <= 1 + tol)

    def passes(self, psi, tol: float = 1e-10) -> bool:
        return bool(np.max(np.abs(self.op @ psi - psi)) <= tol)


@dataclass(frozen=True)
class Strategy:
    op: np.ndarray
    kind: StrategyClass
    params: dict
    mixture: tuple = field(default=())
    label: str = ""

    def __post_init__(self):
        op = np.array(self.op, dtype=complex)
        op.setflags(write=False)
        object.__setattr__(self, "op", op)
        if self.mixture:
            weights = np.array([w for w, _ in self.mixture], dtype=float)
            if np.any(weights < 0) or abs(weights.sum() - 1.0) > 1e-12:
                raise ValueError(f"mixture weights must be a probability vector, got {weights}")

    @property
    def lam(self) -> float:
        return self.params["lambda"]

    def weights(self) -> np.ndarray:
        return np.array([w for w, _ in self.mixture], dtype=float)

    def elements(self) -> list[PovmElement]:
        return [t for _, t in self.mixture]

    def assembled(self) -> np.ndarray:
        return sum(w * t.op for w, t in self.mixture)


def _assemble(mixture) -> np.ndarray:
    return sum(w * t.op for w, t in mixture)


def _check_p(p: float) -> float:
    p = float(p)
    if not (0.0 <= p <= 1.0):
        raise OutOfRangeP(f"mixing weight p must lie in [0, 1], got {p!r}")
    return p


def _check_direction(direction: str) -> str:
    if direction not in DIRECTIONS:
        raise ValueError(f"direction must be one of {DIRECTIONS}, got {direction!r}")
    return direction


def _first(direction: str) -> str:
    return "A" if direction == "AtoB" else "B"


# ---------------------------------------------------------------- one-way


def t_one_way(lam: float, which: str, direction: str = "AtoB") -> PovmElement:
    """One-way pass element: the first party measures X, Y or Z and the partner
    checks the conditional target state."""
    lam = check_lambda(lam)
    _check_direction(direction)
    vecs = one_way_vectors(lam)
    if which == "X":
        op = tensor(proj(PLUS), proj(vecs.v_plus)) + tensor(proj(MINUS), proj(vecs.v_minus))
        name = "T1"
    elif which == "Y":
        op = tensor(proj(TOP), proj(vecs.w_minus)) + tensor(proj(BOT), proj(vecs.w_plus))
        name = "T2"
    elif which == "Z":
        op = tensor(proj(KET0), proj(KET0)) + tensor(proj(KET1), proj(KET1))
        name = "T3"
    else:
        raise ValueError(f"which must be X, Y or Z, got {which!r}")
    if direction == "BtoA":
        op = swap_conjugate(op)
        name += "^{B->A}"
    spec = ProtocolSpec(kind="one_way", lam=lam, first=_first(direction), basis=which)
    return PovmElement(op=op, label=name, comm_steps=1, protocol=spec)


def optimal_p_one_way(lam: float) -> float:
    lam = check_lambda(lam)
    return (1 - lam) / (2 - lam)


def _one_way_mixture(lam: float, p: float, direction: str) -> list:
    return [
        ((1 - p) / 2, t_one_way(lam, "X", direction)),
        ((1 - p) / 2, t_one_way(lam, "Y", direction)),
        (p, t_one_way(lam, "Z", direction)),
    ]


def omega_one_way(lam: float, p: float | None = None, direction: str = "AtoB") -> Strategy:
    lam = check_lambda(lam)
    p = optimal_p_one_way(lam) if p is None else _check_p(p)
    _check_direction(direction)
    mixture = tuple(_one_way_mixture(lam, p, direction))
    kind = StrategyClass.ONE_WAY_AB if direction == "AtoB" else StrategyClass.ONE_WAY_BA
    return Strategy(
        op=_assemble(mixture),
        kind=kind,
        params={"lambda": lam, "p": p, "direction": direction},
        mixture=mixture,
        label="one_way" if direction == "AtoB" else "one_way_ba",
    )


def omega_hat_two_step(lam: float, p: float = 1 / 3) -> Strategy:
    """Fair-coin mixture of the two one-way directions (two communication steps)."""
    lam = check_lambda(lam)
    p = _check_p(p)
    mixture = []
    for w, t in _one_way_mixture(lam, p, "AtoB"):
        mixture.append((w / 2, PovmElement(t.op, t.label, 2, t.protocol)))
    for w, t in _one_way_mixture(lam, p, "BtoA"):
        spec = ProtocolSpec(kind="one_way", lam=lam, first="B", basis=t.protocol.basis, notify=True)
        mixture.append((w / 2, PovmElement(t.op, t.label, 2, spec)))
    mixture = tuple(mixture)
    return Strategy(
        op=_assemble(mixture),
        kind=StrategyClass.TWO_STEP_TWO_WAY,
        params={"lambda": lam, "p": p},
        mixture=mixture,
        label="two_step",
    )


# ---------------------------------------------------------------- two-way


def optimal_two_way_params(lam: float) -> tuple[float, float]:
    """Return ``(delta*, p*)`` for the three-step two-way strategy."""
    lam = check_lambda(lam)
    c = np.sqrt(lam * (1 - lam))
    return 1 - np.sqrt(lam / (1 - lam)), lam / (1 + c)


def two_way_optimum(lam: float) -> float:
    """Optimal second eigenvalue ``sqrt(lam(1-lam)) / (1 + sqrt(lam(1-lam)))``."""
    c = np.sqrt(check_lambda(lam) * (1 - lam))
    return c / (1 + c)


def two_way_eigenvalues(lam: float, delta: float, p: float) -> tuple[float, float]:
    """Closed-form ``(lambda_2, lambda_3)`` of the two-way mixture at ``(delta, p)``.

    At ``lam = 0`` the common factor ``1 - delta`` cancels, which also defines
    the ``delta = 1`` endpoint.
    """
    if lam == 0.0:
        return p, (1 - p) * (1 - delta) / 2
    den = two_way_denominator(lam, delta)
    l2 = (p * (1 - delta) + lam * delta) / den
    l3 = (1 - p) * (lam + (1 - lam) * (1 - delta) ** 2) / (2 * den)
    return l2, l3


def _t_two_way_op(lam: float, delta: float, which: str) -> np.ndarray:
    base = delta * tensor(proj(KET0), proj(KET0))
    if two_way_denominator(lam, delta) <= 1e-15:
        # lam=0, delta=1: the only surviving branch is the |00> check
        return base
    vecs = make_two_way_vectors(lam, delta)
    if which == "X":
        return base + tensor(proj(vecs.vtilde_plus), proj(PLUS)) + tensor(proj(vecs.vtilde_minus), proj(MINUS))
    if which == "Y":
        return base + tensor(proj(vecs.wtilde_minus), proj(TOP)) + tensor(proj(vecs.wtilde_plus), proj(BOT))
    raise ValueError(f"which must be X or Y, got {which!r}")


def _two_way_element(lam: float, delta: float, which: str, direction: str) -> PovmElement:
    op = _t_two_way_op(lam, delta, which)
    name = "T1" if which == "X" else "T2"
    if direction == "BtoA":
        op = swap_conjugate(op)
        name += "^{B->A}"
    else:
        name += "^{A->B}"
    spec = ProtocolSpec(
        kind="two_way", lam=lam, first=_first(direction), basis=which, delta=delta, notify=direction == "BtoA"
    )
    return PovmElement(op=op, label=name, comm_steps=3, protocol=spec)


def t_two_way(lam: float, delta: float, which: str, direction: str = "AtoB") -> PovmElement:
    """Three-step two-way pass element ``T_1`` (``which="X"``) or ``T_2`` (``"Y"``)."""
    lam = check_lambda(lam)
    delta = float(delta)
    if not (0.0 <= delta <= 1.0):
        raise ValueError(f"delta must lie in [0, 1], got {delta!r}")
    _check_direction(direction)
    if two_way_denominator(lam, delta) <= 1e-15:
        raise SingularDenominator("two-way element is undefined at lambda=0, delta=1")
    return _two_way_element(lam, delta, which, direction)


def omega_two_way(lam: float, delta: float | None = None, p: float | None = None) -> Strategy:
    lam = check_lambda(lam)
    d_opt, p_opt = optimal_two_way_params(lam)
    delta = d_opt if delta is None else float(delta)
    p = p_opt if p is None else _check_p(p)
    if two_way_denominator(lam, delta) <= 1e-15:
        if abs(p - p_opt) > 1e-15:
            raise SingularDenominator("two-way strategy at lambda=0, delta=1 is only defined for p=p*=0")
        make = _two_way_element
    else:
        make = t_two_way
    q = (1 - p) / 4
    mixture = (
        (q, make(lam, delta, "X", "AtoB")),
        (q, make(lam, delta, "Y", "AtoB")),
        (q, make(lam, delta, "X", "BtoA")),
        (q, make(lam, delta, "Y", "BtoA")),
        (p, t_one_way(lam, "Z", "AtoB")),
    )
    return Strategy(
        op=_assemble(mixture),
        kind=StrategyClass.THREE_STEP_TWO_WAY,
        params={"lambda": lam, "delta": delta, "p": p},
        mixture=mixture,
        label="two_way",
    )


# ---------------------------------------------------------------- separable and references


def _joint_element(op, label: str, lam: float) -> PovmElement:
    return PovmElement(op=op, label=label, comm_steps=0, protocol=ProtocolSpec(kind="joint", lam=lam))


def t4_separable(lam: float) -> PovmElement:
    target = make_target(lam)
    c = np.sqrt(target.lam * (1 - target.lam))
    op = target.projector + c * (proj(KET01) + proj(KET10))
    return _joint_element(op, "T4", target.lam)


def separable_threshold(lam: float) -> float:
    """Least homogeneous parameter with positive partial transpose."""
    return two_way_optimum(lam)


def homogeneous(lam: float, delta: float) -> np.ndarray:
    target = make_target(lam)
    return target.projector + delta * (I4 - target.projector)


def omega_sep(lam: float, delta: float | None = None) -> Strategy:
    lam = check_lambda(lam)
    delta = separable_threshold(lam) if delta is None else float(delta)
    if not (0.0 <= delta < 1.0):
        raise ValueError(f"homogeneous parameter must lie in [0, 1), got {delta!r}")
    op = homogeneous(lam, delta)
    return Strategy(
        op=op,
        kind=StrategyClass.SEPARABLE_HOMOGENEOUS,
        params={"lambda": lam, "delta": delta},
        mixture=((1.0, _joint_element(op, "Omega_sep", lam)),),
        label="sep",
    )


def omega_nonlocal(lam: float) -> Strategy:
    target = make_target(lam)
    op = target.projector
    return Strategy(
        op=op,
        kind=StrategyClass.NONLOCAL,
        params={"lambda": target.lam},
        mixture=((1.0, _joint_element(op, "Psi projector", target.lam)),),
        label="nonlocal",
    )


def plm_second_eigenvalue(lam: float) -> float:
    """Reference curve for the non-adaptive locally projective strategy."""
    c = np.sqrt(check_lambda(lam) * (1 - lam))
    return (2 + 2 * c) / (4 + 2 * c)


def one_way_general(lam: float, dist) -> Strategy:
    """General one-way strategy ``2 sum_i w_i |t_i,s_i><t_i,s_i| (x) |t_i,s_i,B><t_i,s_i,B|``.

    ``dist`` is a sequence of ``(weight, t, s)``.  Only the diagonal part of
    Alice's completeness condition, ``E[T] = 1/2``, is enforced; the strategy
    passes ``|Psi>`` exactly when the off-diagonal moment
    ``E[sqrt(T(1-T)) e^{-iS}]`` also vanishes, which ``params`` records.
    """
    lam = check_lambda(lam)
    atoms = [(float(w), float(t), float(s)) for w, t, s in dist]
    weights = np.array([a[0] for a in atoms])
    if np.any(weights < 0) or abs(weights.sum() - 1.0) > 1e-12:
        raise ValueError("weights must be nonnegative and sum to 1")
    mean_t = sum(w * t for w, t, _ in atoms)
    if abs(mean_t - 0.5) > 1e-10:
        raise MeanConstraintViolated(f"E[T] = {mean_t!r}, expected 1/2")
    op = np.zeros((4, 4), dtype=complex)
    off = 0j
    for w, t, s in atoms:
        d = alice_direction(t, s, lam)
        op += 2 * w * tensor(proj(d.ket_a), proj(d.ket_b))
        off += w * np.sqrt(t * (1 - t)) * np.exp(-1j * s)
    complete = abs(off) <= 1e-10
    element = PovmElement(op=op, label="one-way general", comm_steps=1)
    return Strategy(
        op=op,
        kind=StrategyClass.ONE_WAY_AB,
        params={"lambda": lam, "atoms": tuple(atoms), "alice_povm_complete": complete},
        mixture=((1.0, element),),
        label="one_way_general",
    )


STRATEGY_NAMES = ("one_way", "one_way_ba", "two_step", "two_way", "sep", "nonlocal", "plm")


def build_strategy(name: str, lam: float, *, p: float | None = None, delta: float | None = None) -> Strategy:
    """Catalog strategy by CLI name at its optimal (or overridden) parameters."""
    if name == "one_way":
        return omega_one_way(lam, p, "AtoB")
    if name == "one_way_ba":
        return omega_one_way(lam, p, "BtoA")
    if name == "two_step":
        return omega_hat_two_step(lam, 1 / 3 if p is None else p)
    if name == "two_way":
        return omega_two_way(lam, delta, p)
    if name == "sep":
        return omega_sep(lam, delta)
    if name == "nonlocal":
        return omega_nonlocal(lam)
    if name == "plm":
        raise UnknownStrategy("plm exists only as a reference eigenvalue curve, not an operator")
    raise UnknownStrategy(f"unknown strategy {name!r}; choose from {', '.join(STRATEGY_NAMES)}")
