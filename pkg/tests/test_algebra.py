import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import random_hermitian
from locc_verify.algebra import (
    I2,
    I4,
    PAULI_X,
    PAULI_Y,
    PAULI_Z,
    SWAP,
    as_hermitian,
    check_density,
    eig_hermitian,
    eigvals_desc,
    fidelity_with_pure,
    jacobi_eigh,
    lift,
    partial_transpose_b,
    proj,
    swap_conjugate,
    tensor,
)
from locc_verify.errors import ConvergenceError, InvalidDensityOperator, NonHermitianInput
from locc_verify.states import KET01, make_target


def kron_by_loops(a, b):
    out = np.zeros((4, 4), dtype=complex)
    for i in range(2):
        for j in range(2):
            for k in range(2):
                for m in range(2):
                    out[2 * i + k, 2 * j + m] = a[i, j] * b[k, m]
    return out


def test_tensor_examples():
    assert np.array_equal(tensor(I2, I2), I4)
    assert np.array_equal(tensor(proj([1, 0]), proj([0, 1])), proj(KET01))
    assert np.array_equal(tensor(PAULI_X, PAULI_X), np.fliplr(np.eye(4)))


def test_tensor_matches_index_oracle(rng):
    for _ in range(20):
        a = rng.normal(size=(2, 2)) + 1j * rng.normal(size=(2, 2))
        b = rng.normal(size=(2, 2)) + 1j * rng.normal(size=(2, 2))
        assert np.allclose(tensor(a, b), kron_by_loops(a, b), atol=1e-15)


def test_lift_places_operator_on_correct_qubit():
    assert np.array_equal(lift(PAULI_Z, "A"), tensor(PAULI_Z, I2))
    assert np.array_equal(lift(PAULI_Z, "B"), tensor(I2, PAULI_Z))
    with pytest.raises(ValueError):
        lift(PAULI_Z, "C")


def test_eig_examples():
    assert np.allclose(eigvals_desc(I4), [1, 1, 1, 1], atol=1e-15)
    assert np.allclose(eigvals_desc(make_target(0.25).projector), [1, 0, 0, 0], atol=1e-14)
    assert np.allclose(eigvals_desc(np.diag([0.2, 0.9, 0.5, 0.1])), [0.9, 0.5, 0.2, 0.1], atol=1e-15)


def test_jacobi_matches_numpy_oracle(rng):
    worst = 0.0
    for _ in range(300):
        a = random_hermitian(rng, scale=rng.choice([1e-6, 1.0, 1e3]))
        ours = eigvals_desc(a)
        ref = np.linalg.eigvalsh(a)[::-1]
        worst = max(worst, np.max(np.abs(ours - ref)) / max(1.0, np.max(np.abs(ref))))
    assert worst < 1e-12


def test_jacobi_eigenvectors_reconstruct(rng):
    for _ in range(50):
        a = random_hermitian(rng)
        spec = eig_hermitian(a)
        v = spec.eigenvectors
        assert np.allclose(v.conj().T @ v, I4, atol=1e-12)
        assert np.allclose(spec.reconstruct(), a, atol=1e-12)


def test_jacobi_handles_degenerate_and_2x2(rng):
    target = make_target(0.3)
    op = target.projector + 0.4 * (I4 - target.projector)
    assert np.allclose(eigvals_desc(op), [1, 0.4, 0.4, 0.4], atol=1e-14)
    w, _ = jacobi_eigh(PAULI_Y)
    assert np.allclose(np.sort(w), [-1, 1], atol=1e-15)


def test_jacobi_reports_nonconvergence():
    with pytest.raises(ConvergenceError):
        jacobi_eigh(PAULI_X, max_sweeps=0)


def test_non_hermitian_rejected():
    with pytest.raises(NonHermitianInput):
        eig_hermitian(np.array([[0, 1], [0, 0]], dtype=complex))
    # tiny asymmetry is tolerated and symmetrized away
    a = np.diag([1.0, 2.0, 3.0, 4.0]).astype(complex)
    a[0, 1] = 1e-12
    assert np.allclose(as_hermitian(a), as_hermitian(a).conj().T)


@settings(max_examples=60, deadline=None)
@given(st.lists(st.floats(-5, 5), min_size=16, max_size=16))
def test_spectrum_trace_and_norm_invariants(entries):
    a = np.array(entries).reshape(4, 4)
    a = a + a.T
    w = eigvals_desc(a)
    assert np.all(np.diff(w) <= 1e-12)
    assert abs(w.sum() - np.trace(a)) <= 1e-10 * max(1.0, np.abs(a).max())
    assert abs(np.sum(w**2) - np.sum(a**2)) <= 1e-9 * max(1.0, np.sum(a**2))


def test_partial_transpose_examples(rng):
    assert np.array_equal(partial_transpose_b(I4), I4)
    bell = make_target(0.5).projector
    assert np.allclose(eigvals_desc(partial_transpose_b(bell)), [0.5, 0.5, 0.5, -0.5], atol=1e-14)
    for _ in range(10):
        a = random_hermitian(rng, n=2)
        b = random_hermitian(rng, n=2)
        assert np.allclose(partial_transpose_b(tensor(a, b)), tensor(a, b.T), atol=1e-15)


def test_partial_transpose_index_oracle(rng):
    op = random_hermitian(rng)
    pt = partial_transpose_b(op)
    for a in range(2):
        for b in range(2):
            for c in range(2):
                for d in range(2):
                    assert pt[2 * a + b, 2 * c + d] == op[2 * a + d, 2 * c + b]


def test_swap_conjugate_exchanges_parties(rng):
    a = random_hermitian(rng, n=2)
    b = random_hermitian(rng, n=2)
    assert np.allclose(swap_conjugate(tensor(a, b)), tensor(b, a), atol=1e-15)
    assert np.allclose(SWAP @ SWAP, I4)


def test_fidelity_examples():
    target = make_target(0.25)
    psi = target.psi
    assert fidelity_with_pure(psi, target.projector) == pytest.approx(1.0, abs=1e-15)
    assert fidelity_with_pure(psi, proj(KET01)) == 0.0
    assert fidelity_with_pure(psi, I4 / 4) == pytest.approx(0.25, abs=1e-15)


def test_check_density_rejects_bad_states():
    with pytest.raises(InvalidDensityOperator):
        check_density(np.eye(4))
    with pytest.raises(InvalidDensityOperator):
        check_density(np.diag([1.5, -0.5, 0, 0]))
    assert np.allclose(check_density(np.eye(4) / 4), np.eye(4) / 4)
