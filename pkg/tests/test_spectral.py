import math

import numpy as np
import pytest

from conftest import random_hermitian, random_pure
from locc_verify.algebra import I4, proj
from locc_verify.errors import DegenerateStrategy, NotPsiPassing
from locc_verify.spectral import (
    VerificationSpec,
    analyze,
    num_tests,
    second_largest,
    swap_symmetrize,
    twirl,
    worst_case_pass,
    worst_case_state,
)
from locc_verify.states import KET01, KET10, make_target
from locc_verify.strategies import omega_hat_two_step, omega_one_way, omega_two_way
from locc_verify.algebra import PAULI_X, tensor


def random_psi_passing(rng, lam):
    """Random operator 0 <= Omega <= 1 with Omega |Psi> = |Psi>."""
    target = make_target(lam)
    basis = target.eigenbasis
    h = random_hermitian(rng, n=3)
    w, v = np.linalg.eigh(h)
    w = rng.uniform(0, 1, size=3)
    block = (v * w) @ v.conj().T
    m = np.zeros((4, 4), dtype=complex)
    m[0, 0] = 1
    m[1:, 1:] = block
    return basis @ m @ basis.conj().T


def test_second_largest_examples():
    assert second_largest(make_target(0.3).projector) == pytest.approx(0, abs=1e-14)
    assert second_largest(omega_hat_two_step(0.1).op) == pytest.approx(1 / 3)
    assert second_largest(I4) == 1.0


def test_worst_case_pass_examples():
    assert worst_case_pass(omega_hat_two_step(0.2).op, 0.1, 0.2) == pytest.approx(0.9333333333333333)
    assert worst_case_pass(make_target(0.2).projector, 0.1, 0.2) == pytest.approx(0.9)


def test_worst_case_pass_requires_psi_passing():
    with pytest.raises(NotPsiPassing):
        worst_case_pass(np.diag([0.5, 0, 0, 1]), 0.1, 0.2)
    with pytest.raises(ValueError):
        worst_case_pass(I4, 1.5, 0.2)


def _sampled_max(op, lam, eps, rng, samples=10_000):
    """Brute force over sqrt(1-eps)|Psi> + sqrt(eps)|phi>, phi orthogonal to Psi, with local polishing."""
    target = make_target(lam)
    perp = I4 - target.projector
    best, best_phi = -1.0, None
    for _ in range(samples):
        phi = perp @ random_pure(rng)
        phi /= np.linalg.norm(phi)
        chi = np.sqrt(1 - eps) * target.psi + np.sqrt(eps) * phi
        val = np.vdot(chi, op @ chi).real
        if val > best:
            best, best_phi = val, phi
    # shifted power iteration on the restricted operator starting from the best sample
    restricted = perp @ op @ perp + 2 * perp
    phi = best_phi
    for _ in range(2000):
        phi = restricted @ phi
        phi /= np.linalg.norm(phi)
    chi = np.sqrt(1 - eps) * target.psi + np.sqrt(eps) * phi
    return best, np.vdot(chi, op @ chi).real


@pytest.mark.parametrize("lam", [0.1, 0.25])
def test_worst_case_pass_matches_brute_force(lam, rng):
    eps = 0.1
    for op in (omega_one_way(lam).op, omega_two_way(lam).op, random_psi_passing(rng, lam)):
        bound = worst_case_pass(op, eps, lam)
        sampled, polished = _sampled_max(op, lam, eps, rng)
        assert sampled <= bound + 1e-12
        assert polished == pytest.approx(bound, abs=1e-6)


def test_worst_case_state_properties(rng):
    lam = 0.25
    target = make_target(lam)
    for op, eps in ((omega_hat_two_step(lam).op, 0.2), (omega_two_way(lam).op, 0.1), (random_psi_passing(rng, lam), 0.3)):
        sigma = worst_case_state(op, eps, lam)
        assert np.vdot(target.psi, sigma @ target.psi).real == pytest.approx(1 - eps, abs=1e-10)
        assert np.trace(op @ sigma).real == pytest.approx(worst_case_pass(op, eps, lam), abs=1e-10)
    sigma = worst_case_state(omega_hat_two_step(lam).op, 0.2, lam)
    assert np.trace(omega_hat_two_step(lam).op @ sigma).real == pytest.approx(0.8666666666666667)
    sigma = worst_case_state(target.projector, 0.1, lam)
    assert np.trace(target.projector @ sigma).real == pytest.approx(0.9)


def test_worst_case_state_is_deterministic():
    a = worst_case_state(omega_two_way(0.3).op, 0.05, 0.3)
    b = worst_case_state(omega_two_way(0.3).op, 0.05, 0.3)
    assert np.array_equal(a, b)


def test_num_tests_examples():
    n = num_tests(1 / 3, 0.01, 0.001)
    assert n.n_exact == 1033
    assert n.n_approx == pytest.approx(1036.163, abs=1e-3)
    assert num_tests(0.0, 0.5, 0.5).n_exact == 1
    ratio = num_tests(0.6, 0.01, 0.001).n_approx / num_tests(1 / 3, 0.01, 0.001).n_approx
    assert 1 / ratio == pytest.approx(0.6)


def test_num_tests_is_minimal(rng):
    for _ in range(200):
        l2, eps, conf = rng.uniform(0, 0.95), rng.uniform(1e-3, 0.5), rng.uniform(1e-6, 0.5)
        n = num_tests(l2, eps, conf).n_exact
        q = 1 - (1 - l2) * eps
        assert n * math.log(q) <= math.log(conf)
        assert n == 1 or (n - 1) * math.log(q) > math.log(conf)


def test_num_tests_errors():
    with pytest.raises(DegenerateStrategy):
        num_tests(1.0, 0.1, 0.1)
    with pytest.raises(ValueError):
        VerificationSpec(0.0, 0.1)
    with pytest.raises(ValueError):
        VerificationSpec(0.1, 1.0)


def test_twirl_examples():
    d = np.diag([0.1, 0.2, 0.3, 0.4]).astype(complex)
    assert np.array_equal(twirl(d), d)
    expected = np.zeros((4, 4))
    expected[0, 3] = expected[3, 0] = 1
    assert np.allclose(twirl(tensor(PAULI_X, PAULI_X)), expected)


def test_twirl_analytic_matches_quadrature(rng):
    for _ in range(20):
        a = random_hermitian(rng)
        assert np.allclose(twirl(a), twirl(a, "quadrature"), atol=1e-12)
    # a few nodes are already exact: the phase charges span -2..2
    a = random_hermitian(rng)
    assert np.allclose(twirl(a), twirl(a, "quadrature", points=5), atol=1e-12)
    with pytest.raises(ValueError):
        twirl(a, "midpoint")


def test_twirl_and_swap_never_hurt(rng):
    for _ in range(100):
        lam = rng.uniform(0, 0.5)
        op = random_psi_passing(rng, lam)
        tw = twirl(op)
        assert second_largest(tw) <= second_largest(op) + 1e-12
        assert second_largest(swap_symmetrize(tw)) <= second_largest(tw) + 1e-12


def test_swap_symmetrize_examples():
    assert np.allclose(swap_symmetrize(proj(KET01)), (proj(KET01) + proj(KET10)) / 2)
    p = make_target(0.2).projector
    assert np.allclose(swap_symmetrize(p), p)


def test_analyze_report():
    r = analyze(omega_hat_two_step(0.3).op, 0.3, 0.01, 0.001)
    assert r.n_exact == 1033
    assert r.lambda2_down == pytest.approx(1 / 3)
    assert r.worst_pass == pytest.approx(1 - (2 / 3) * 0.01)
