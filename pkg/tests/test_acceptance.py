"""Acceptance criteria 1-9, each at its stated tolerance.

Every test records one ``CRITERION k: PASS|FAIL`` line; the lines are printed
in the pytest terminal summary and also when this file is run directly.
"""

import csv
import io
import json
import math
import time

import numpy as np

from conftest import random_density, random_hermitian
from locc_verify.algebra import eig_hermitian, partial_transpose_b
from locc_verify.cli import main as cli_main
from locc_verify.oracles import (
    TDistribution,
    is_ppt_feasible,
    one_way_oracle,
    povm_relations,
    ppt_eigenvalues,
    ppt_min_delta,
    two_way_grid_search,
)
from locc_verify.simulator import simulate_strategy
from locc_verify.spectral import num_tests, twirl
from locc_verify.states import make_target
from locc_verify.strategies import (
    build_strategy,
    homogeneous,
    omega_hat_two_step,
    omega_one_way,
    omega_sep,
    omega_two_way,
    optimal_two_way_params,
    plm_second_eigenvalue,
)

RESULTS: dict[int, str] = {}
GRID = np.linspace(0.0, 0.5, 51)


def record(k: int, ok: bool, detail: str) -> None:
    line = f"CRITERION {k}: {'PASS' if ok else 'FAIL'} - {detail}"
    RESULTS[k] = line
    print(line)
    assert ok, line


def lam_star(lam):
    c = math.sqrt(lam * (1 - lam))
    return c / (1 + c)


def lambda2(op):
    return eig_hermitian(op).eigenvalues[1]


def test_criterion_1_closed_forms():
    start = time.perf_counter()
    err = 0.0
    for lam in GRID:
        c = math.sqrt(lam * (1 - lam))
        err = max(
            err,
            abs(lambda2(omega_one_way(lam).op) - (1 - lam) / (2 - lam)),
            abs(lambda2(omega_hat_two_step(lam).op) - 1 / 3),
            abs(lambda2(omega_two_way(lam).op) - lam_star(lam)),
            abs(plm_second_eigenvalue(lam) - (2 + 2 * c) / (4 + 2 * c)),
        )
    elapsed = time.perf_counter() - start
    record(1, err <= 1e-10 and elapsed < 1.0, f"max |eig - closed form| = {err:.2e} (tol 1e-10), {elapsed:.3f} s (< 1 s)")


def test_criterion_2_separable_equals_two_way():
    err = max(abs(omega_sep(lam).params["delta"] - lambda2(omega_two_way(lam).op)) for lam in GRID)
    record(2, err < 1e-12, f"max |delta*_sep - lambda2(two-way)| = {err:.2e} (tol 1e-12)")


def test_criterion_3_ppt_certification():
    search_err, eig_err, edges_ok = 0.0, 0.0, True
    for lam in GRID:
        d_star = lam_star(lam)
        search_err = max(search_err, abs(ppt_min_delta(lam, tol=1e-9).oracle_value - d_star))
        op_pt = partial_transpose_b(homogeneous(lam, d_star))
        numeric = eig_hermitian(op_pt).eigenvalues
        eig_err = max(eig_err, float(np.max(np.abs(numeric - np.sort(ppt_eigenvalues(lam, d_star))[::-1]))))
        below = d_star - 1e-6
        if below >= 0:
            edges_ok &= not is_ppt_feasible(lam, below)
        edges_ok &= is_ppt_feasible(lam, d_star + 1e-6)
    ok = search_err <= 1e-9 and eig_err <= 1e-10 and edges_ok
    record(
        3,
        ok,
        f"bisection error {search_err:.2e} (tol 1e-9), eigenvalue error {eig_err:.2e} (tol 1e-10), "
        f"feasibility edges {'ok' if edges_ok else 'wrong'}",
    )


def test_criterion_4_two_way_grid_search():
    start = time.perf_counter()
    worst_arg, worst_val = 0.0, 0.0
    for lam in (0.05, 0.25, 0.5):
        cert = two_way_grid_search(lam, grid=1000)
        d, p = optimal_two_way_params(lam)
        worst_arg = max(worst_arg, abs(cert.argmin["delta"] - d), abs(cert.argmin["p"] - p))
        worst_val = max(worst_val, abs(cert.oracle_value - lam_star(lam)))
    elapsed = time.perf_counter() - start
    ok = worst_arg <= 2e-3 and worst_val <= 1e-5 and elapsed < 10.0
    record(4, ok, f"argmin error {worst_arg:.2e} (tol 2e-3), value error {worst_val:.2e} (tol 1e-5), {elapsed:.2f} s (< 10 s)")


def test_criterion_5_one_way_oracle():
    gap = max(abs(one_way_oracle(lam, grid=1000).oracle_value - (1 - lam) / (2 - lam)) for lam in (0.0, 0.25, 0.5))
    rng = np.random.default_rng(5)
    rel = 0.0
    for _ in range(1000):
        n = int(rng.integers(1, 7))
        w = rng.dirichlet(np.ones(n))
        t = rng.uniform(0, 1, n)
        shift = t - w @ t
        t = 0.5 + shift * min(1.0, 0.5 / max(np.max(np.abs(shift)), 1e-300))
        lam = rng.uniform(1e-3, 0.5)
        r1, r2 = povm_relations(TDistribution(tuple(zip(w, t))), lam)
        rel = max(rel, abs(r1 - 1), abs(r2 - 1))
    record(5, gap <= 1e-4 and rel <= 1e-12, f"oracle gap {gap:.2e} (tol 1e-4), POVM relation error {rel:.2e} (tol 1e-12)")


def _random_psi_passing(rng, lam):
    basis = make_target(lam).eigenbasis
    h = random_hermitian(rng, n=3)
    _, v = np.linalg.eigh(h)
    block = (v * rng.uniform(0, 1, 3)) @ v.conj().T
    m = np.zeros((4, 4), dtype=complex)
    m[0, 0] = 1
    m[1:, 1:] = block
    return basis @ m @ basis.conj().T


def test_criterion_6_twirl():
    rng = np.random.default_rng(6)
    quad_err = max(
        float(np.max(np.abs(twirl(a) - twirl(a, "quadrature", points=1024))))
        for a in (random_hermitian(rng) for _ in range(100))
    )
    increases = 0
    for _ in range(100):
        op = _random_psi_passing(rng, rng.uniform(0, 0.5))
        if lambda2(twirl(op)) > lambda2(op) + 1e-12:
            increases += 1
    record(6, quad_err <= 1e-9 and increases == 0, f"quadrature error {quad_err:.2e} (tol 1e-9), {increases} of 100 twirls increased lambda2")


def test_criterion_7_sample_count():
    n = num_tests(1 / 3, 0.01, 0.001).n_exact
    q = 1 - (2 / 3) * 0.01
    ok = n == 1033 and q**1033 <= 0.001 and q**1032 > 0.001
    record(7, ok, f"n_exact = {n}, q^1033 = {q**1033:.6g}, q^1032 = {q**1032:.6g}")


def test_criterion_8_simulator_fidelity():
    start = time.perf_counter()
    rng = np.random.default_rng(8)
    names = ("one_way", "one_way_ba", "two_step", "two_way", "sep", "nonlocal")
    worst_z, runs = 0.0, 0
    honest_ok = True
    for name in names:
        for k in range(20):
            lam = float(rng.uniform(0, 0.5))
            strategy = build_strategy(name, lam)
            sigma = random_density(rng)
            r = simulate_strategy(strategy, sigma, 100_000, seed=1000 * runs + k)
            se = math.sqrt(r.predicted_rate * (1 - r.predicted_rate) / r.trials)
            worst_z = max(worst_z, abs(r.empirical_rate - r.predicted_rate) / se)
            runs += 1
        honest = simulate_strategy(strategy, make_target(lam).projector, 100_000, seed=7)
        honest_ok &= honest.empirical_rate == 1.0
    s = omega_two_way(0.25)
    sigma = random_density(rng)
    a = json.dumps(simulate_strategy(s, sigma, 100_000, seed=99).to_dict(), sort_keys=True)
    b = json.dumps(simulate_strategy(s, sigma, 100_000, seed=99).to_dict(), sort_keys=True)
    elapsed = time.perf_counter() - start
    ok = worst_z <= 5.0 and honest_ok and a == b and elapsed < 60.0
    record(
        8,
        ok,
        f"{runs} runs, max |z| = {worst_z:.2f} (< 5), honest rate exactly 1: {honest_ok}, "
        f"byte-identical: {a == b}, {elapsed:.1f} s (< 60 s)",
    )


def test_criterion_9_sweep_shape(capsys):
    code = cli_main(["sweep", "--steps", "101"])
    out = capsys.readouterr().out
    curves: dict[str, list] = {}
    for row in csv.DictReader(io.StringIO(out)):
        curves.setdefault(row["strategy"], []).append((float(row["lambda"]), float(row["lambda2"])))
    lam = np.array([x for x, _ in curves["plm"]])
    val = {k: np.array([y for _, y in v]) for k, v in curves.items()}
    pos = lam > 0
    below = all(np.all(val[k][pos] < val["plm"][pos]) for k in ("one_way", "two_step", "two_way"))
    two_up = bool(np.all(np.diff(val["two_way"]) > 0))
    one_down = bool(np.all(np.diff(val["one_way"]) < 0))
    meet = lam[-1] == 0.5 and all(abs(val[k][-1] - 1 / 3) <= 1e-9 for k in ("one_way", "two_step", "two_way"))
    zero = lam[0] == 0.0 and val["two_way"][0] == 0.0
    ok = code == 0 and len(lam) == 101 and below and two_up and one_down and meet and zero
    record(
        9,
        ok,
        f"below PLM {below}, two-way increasing {two_up}, one-way decreasing {one_down}, "
        f"meet at 1/3 {meet}, two-way(0) = 0 {zero}",
    )


if __name__ == "__main__":
    import pytest

    raise SystemExit(pytest.main([__file__, "-q"]))
