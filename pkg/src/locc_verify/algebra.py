"""Small dense linear algebra on one and two qubits.

Operators are plain ``numpy`` complex arrays.  Two-qubit operators use the
basis order ``|00>, |01>, |10>, |11>`` everywhere, i.e. the first tensor factor
is Alice's qubit and the second is Bob's.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ConvergenceError, InvalidDensityOperator, NonHermitianInput

HERMITIAN_TOL = 1e-9
JACOBI_TOL = 1e-14
JACOBI_MAX_SWEEPS = 100

I2 = np.eye(2, dtype=complex)
I4 = np.eye(4, dtype=complex)
PAULI_X = np.array([[0, 1], [1, 0]], dtype=complex)
PAULI_Y = np.array([[0, -1j], [1j, 0]], dtype=complex)
PAULI_Z = np.array([[1, 0], [0, -1]], dtype=complex)

# qubit-swap permutation |ab> -> |ba>
SWAP = np.eye(4, dtype=complex)[[0, 2, 1, 3]]


def ket(*amplitudes) -> np.ndarray:
    return np.asarray(amplitudes, dtype=complex)


def proj(v) -> np.ndarray:
    """Return ``|v><v|`` (no normalization is applied)."""
    v = np.asarray(v, dtype=complex)
    return np.outer(v, v.conj())


def normalize(v, tol: float = 1e-15) -> np.ndarray:
    v = np.asarray(v, dtype=complex)
    n = np.linalg.norm(v)
    if n <= tol:
        raise ValueError("cannot normalize a zero vector")
    return v / n


def is_normalized(v, tol: float = 1e-12) -> bool:
    return abs(np.vdot(v, v).real - 1.0) <= tol


def dagger(a) -> np.ndarray:
    return np.asarray(a).conj().T


def tensor(a, b) -> np.ndarray:
    """Kronecker product; Alice's factor first."""
    return np.kron(np.asarray(a, dtype=complex), np.asarray(b, dtype=complex))


def hermiticity_defect(op) -> float:
    op = np.asarray(op)
    return float(np.max(np.abs(op - op.conj().T)))


def as_hermitian(op, tol: float = HERMITIAN_TOL) -> np.ndarray:
    """Validate ``op`` as Hermitian and return its exactly Hermitian part."""
    op = np.asarray(op, dtype=complex)
    if op.ndim != 2 or op.shape[0] != op.shape[1]:
        raise NonHermitianInput(f"expected a square matrix, got shape {op.shape}")
    defect = hermiticity_defect(op)
    if not np.isfinite(defect) or defect > tol:
        raise NonHermitianInput(f"operator is not Hermitian (defect {defect:.3e})")
    return 0.5 * (op + op.conj().T)


@dataclass(frozen=True)
class Spectrum:
    """Eigen-decomposition with eigenvalues sorted in descending order.

    ``eigenvectors[:, i]`` is the unit eigenvector for ``eigenvalues[i]``.
    """

    eigenvalues: np.ndarray
    eigenvectors: np.ndarray

    def reconstruct(self) -> np.ndarray:
        v = self.eigenvectors
        return (v * self.eigenvalues) @ v.conj().T


def _offdiag_norm(a: np.ndarray) -> float:
    off = a - np.diag(np.diag(a))
    return float(np.sqrt(np.sum(off.real**2 + off.imag**2)))


def jacobi_eigh(op, tol: float = JACOBI_TOL, max_sweeps: int = JACOBI_MAX_SWEEPS) -> tuple[np.ndarray, np.ndarray]:
    """Cyclic complex Jacobi diagonalization of a Hermitian matrix.

    Each rotation first removes the phase of the pivot ``a[p, q]`` and then
    applies a real Givens rotation, so the pivot is annihilated exactly.
    Returns unsorted ``(eigenvalues, eigenvectors)``.
    """
    a = np.array(op, dtype=complex)
    n = a.shape[0]
    v = np.eye(n, dtype=complex)
    scale = max(1.0, float(np.linalg.norm(a)))
    for _ in range(max_sweeps):
        if _offdiag_norm(a) < tol * scale:
            return a.diagonal().real.copy(), v
        for p in range(n - 1):
            for q in range(p + 1, n):
                apq = a[p, q]
                mag = abs(apq)
                if mag < 1e-300:
                    continue
                phase = apq / mag
                app = a[p, p].real
                aqq = a[q, q].real
                theta = (aqq - app) / (2.0 * mag)
                if abs(theta) > 1e150:
                    t = 0.5 / theta
                else:
                    t = (1.0 if theta >= 0 else -1.0) / (abs(theta) + np.sqrt(theta * theta + 1.0))
                c = 1.0 / np.sqrt(t * t + 1.0)
                s = t * c
                # U acts on the (p, q) plane: columns p, q of D @ R with D = diag(1, conj(phase))
                up_p, up_q = c, s
                uq_p, uq_q = -s * np.conj(phase), c * np.conj(phase)
                col_p = a[:, p].copy()
                col_q = a[:, q].copy()
                a[:, p] = col_p * up_p + col_q * uq_p
                a[:, q] = col_p * up_q + col_q * uq_q
                row_p = a[p, :].copy()
                row_q = a[q, :].copy()
                a[p, :] = np.conj(up_p) * row_p + np.conj(uq_p) * row_q
                a[q, :] = np.conj(up_q) * row_p + np.conj(uq_q) * row_q
                a[p, q] = 0.0
                a[q, p] = 0.0
                a[p, p] = a[p, p].real
                a[q, q] = a[q, q].real
                vp = v[:, p].copy()
                vq = v[:, q].copy()
                v[:, p] = vp * up_p + vq * uq_p
                v[:, q] = vp * up_q + vq * uq_q
    if _offdiag_norm(a) < tol * scale:
        return a.diagonal().real.copy(), v
    raise ConvergenceError(f"Jacobi did not converge in {max_sweeps} sweeps")


def eig_hermitian(op) -> Spectrum:
    """Spectrum of a Hermitian operator, eigenvalues descending."""
    h = as_hermitian(op)
    w, v = jacobi_eigh(h)
    order = np.argsort(-w, kind="stable")
    return Spectrum(eigenvalues=w[order], eigenvectors=v[:, order])


def eigvals_desc(op) -> np.ndarray:
    return eig_hermitian(op).eigenvalues


def partial_transpose_b(op) -> np.ndarray:
    """Transpose the second (Bob's) tensor factor of a 4x4 operator."""
    op = np.asarray(op, dtype=complex)
    return op.reshape(2, 2, 2, 2).transpose(0, 3, 2, 1).reshape(4, 4)


def swap_conjugate(op) -> np.ndarray:
    """Exchange the roles of Alice and Bob: ``S op S``."""
    op = np.asarray(op, dtype=complex)
    return SWAP @ op @ SWAP


def lift(local, party: str) -> np.ndarray:
    """Embed a single-qubit operator on Alice (``"A"``) or Bob (``"B"``)."""
    if party == "A":
        return tensor(local, I2)
    if party == "B":
        return tensor(I2, local)
    raise ValueError(f"unknown party {party!r}")


def check_density(sigma, tol: float = 1e-10) -> np.ndarray:
    """Validate a density operator: Hermitian, unit trace, positive semidefinite."""
    try:
        s = as_hermitian(sigma)
    except NonHermitianInput as exc:
        raise InvalidDensityOperator(str(exc)) from exc
    tr = np.trace(s).real
    if abs(tr - 1.0) > tol:
        raise InvalidDensityOperator(f"trace is {tr!r}, expected 1")
    lo = eig_hermitian(s).eigenvalues[-1]
    if lo < -tol:
        raise InvalidDensityOperator(f"negative eigenvalue {lo:.3e}")
    return s


def fidelity_with_pure(psi, sigma) -> float:
    """``<psi|sigma|psi>`` for a normalized ``psi``, clamped to [0, 1]."""
    psi = np.asarray(psi, dtype=complex)
    if not is_normalized(psi):
        raise ValueError("psi must be normalized")
    s = check_density(sigma)
    f = float(np.vdot(psi, s @ psi).real)
    return min(1.0, max(0.0, f))
