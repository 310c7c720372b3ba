"""Strategy analytics: second eigenvalue, averaging, worst-case states and test counts."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .algebra import I4, SWAP, as_hermitian, eig_hermitian, proj
from .errors import DegenerateStrategy, NotPsiPassing
from .states import make_target

PSI_PASS_TOL = 1e-8
QUADRATURE_POINTS = 1024

# eigen-phase of |00>,|01>,|10>,|11> under U_theta (x) U_-theta, in units of theta
_TWIRL_CHARGES = np.array([0, -1, 1, 0])
_TWIRL_MASK = _TWIRL_CHARGES[:, None] == _TWIRL_CHARGES[None, :]


@dataclass(frozen=True)
class VerificationSpec:
    """Fidelity gap ``epsilon`` and failure probability ``confidence_delta``.

    ``confidence_delta`` is the target failure probability (confidence
    ``1 - confidence_delta``); it is unrelated to the two-way parameter delta.
    """

    epsilon: float
    confidence_delta: float

    def __post_init__(self):
        for name in ("epsilon", "confidence_delta"):
            v = getattr(self, name)
            if not (0.0 < v < 1.0):
                raise ValueError(f"{name} must lie strictly inside (0, 1), got {v!r}")


@dataclass(frozen=True)
class NTests:
    n_exact: int
    n_approx: float


@dataclass(frozen=True)
class AnalysisReport:
    lambda2_down: float
    n_exact: int
    n_approx: float
    worst_pass: float


def second_largest(op) -> float:
    return float(eig_hermitian(op).eigenvalues[1])


def _require_psi_passing(op, lam: float) -> np.ndarray:
    psi = make_target(lam).psi
    op = as_hermitian(op)
    defect = float(np.max(np.abs(op @ psi - psi)))
    if defect > PSI_PASS_TOL:
        raise NotPsiPassing(f"strategy does not accept |Psi> with certainty (defect {defect:.3e})")
    return op


def worst_case_pass(op, epsilon: float, lam: float) -> float:
    """Largest pass probability over states with fidelity at most ``1 - epsilon``."""
    if not (0.0 < epsilon < 1.0):
        raise ValueError(f"epsilon must lie in (0, 1), got {epsilon!r}")
    op = _require_psi_passing(op, lam)
    return 1.0 - (1.0 - second_largest(op)) * epsilon


def worst_case_state(op, epsilon: float, lam: float) -> np.ndarray:
    """Pure state of fidelity exactly ``1 - epsilon`` that maximizes ``tr(op sigma)``.

    The bad component is a top eigenvector of ``op`` restricted to the
    complement of ``|Psi>``; when ``|Psi_perp>`` belongs to that eigenspace it
    is chosen, so homogeneous strategies give a deterministic answer.
    """
    if not (0.0 < epsilon < 1.0):
        raise ValueError(f"epsilon must lie in (0, 1), got {epsilon!r}")
    target = make_target(lam)
    op = _require_psi_passing(op, lam)
    perp = I4 - target.projector
    restricted = perp @ op @ perp
    spec = eig_hermitian(restricted)
    top = spec.eigenvalues[0]
    if np.vdot(target.psi_perp, restricted @ target.psi_perp).real >= top - 1e-10:
        phi = target.psi_perp
    else:
        phi = perp @ spec.eigenvectors[:, 0]
        phi = phi / np.linalg.norm(phi)
        k = int(np.argmax(np.abs(phi)))
        phi = phi * (abs(phi[k]) / phi[k])
    chi = np.sqrt(1 - epsilon) * target.psi + np.sqrt(epsilon) * phi
    return proj(chi)


def num_tests(lambda2: float, epsilon: float, confidence: float) -> NTests:
    """Number of i.i.d. tests that certify fidelity gap ``epsilon`` at failure probability ``confidence``.

    ``n_exact`` is the least ``n`` with ``(1 - (1 - lambda2) epsilon)^n <= confidence``;
    ``n_approx`` is the first-order rate ``ln(1/confidence) / ((1 - lambda2) epsilon)``.
    """
    spec = VerificationSpec(epsilon, confidence)
    if not (lambda2 < 1.0):
        raise DegenerateStrategy(f"second eigenvalue {lambda2!r} >= 1 cannot reject any bad state")
    if lambda2 < 0:
        raise ValueError(f"second eigenvalue must be nonnegative, got {lambda2!r}")
    gap = (1.0 - lambda2) * spec.epsilon
    log_q = math.log1p(-gap)
    log_d = math.log(spec.confidence_delta)
    n = max(1, math.ceil(log_d / log_q))
    while n * log_q > log_d:
        n += 1
    while n > 1 and (n - 1) * log_q <= log_d:
        n -= 1
    return NTests(n_exact=n, n_approx=-log_d / gap)


def twirl(op, mode: str = "analytic", points: int = QUADRATURE_POINTS) -> np.ndarray:
    """Average ``op`` over the local phase family ``U_theta (x) U_-theta``.

    ``mode="analytic"`` keeps only entries inside the three eigenspaces
    ``span{|00>,|11>}``, ``{|01>}`` and ``{|10>}``; ``mode="quadrature"``
    integrates with the periodic trapezoid rule on ``points`` nodes.
    """
    op = np.asarray(op, dtype=complex)
    if mode == "analytic":
        return np.where(_TWIRL_MASK, op, 0)
    if mode == "quadrature":
        if points < 1:
            raise ValueError("quadrature needs at least one node")
        thetas = 2 * np.pi * np.arange(points) / points
        phases = np.exp(1j * np.outer(thetas, _TWIRL_CHARGES))  # diag of U_theta (x) U_-theta
        acc = np.einsum("ti,ij,tj->ij", phases, op, phases.conj())
        return acc / points
    raise ValueError(f"unknown twirl mode {mode!r}")


def swap_symmetrize(op) -> np.ndarray:
    op = np.asarray(op, dtype=complex)
    return 0.5 * (op + SWAP @ op @ SWAP)


def analyze(op, lam: float, epsilon: float, confidence: float) -> AnalysisReport:
    l2 = second_largest(op)
    n = num_tests(l2, epsilon, confidence)
    return AnalysisReport(
        lambda2_down=l2,
        n_exact=n.n_exact,
        n_approx=n.n_approx,
        worst_pass=worst_case_pass(op, epsilon, lam),
    )
