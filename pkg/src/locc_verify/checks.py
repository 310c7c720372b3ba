"""Self-check suite run by ``locc-verify check``.

Each check rebuilds a strategy or oracle from scratch and compares it with an
independent expression.  The suite is meant to be quick (a few seconds).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .algebra import eigvals_desc, partial_transpose_b, proj
from .oracles import is_ppt_feasible, one_way_oracle, ppt_eigenvalues, ppt_min_delta, two_way_grid_search
from .simulator import iter_steps, protocol_tree, tree_accept_operator
from .spectral import num_tests, second_largest, twirl
from .states import make_target
from .strategies import (
    build_strategy,
    omega_hat_two_step,
    omega_one_way,
    omega_sep,
    omega_two_way,
    plm_second_eigenvalue,
    two_way_optimum,
)
from .sweep import curves, sweep_rows

LAMBDAS = np.linspace(0.0, 0.5, 11)
CATALOG = ("one_way", "one_way_ba", "two_step", "two_way", "sep", "nonlocal")


@dataclass(frozen=True)
class CheckResult:
    name: str
    passed: bool
    detail: str

    def line(self) -> str:
        return f"[{'PASS' if self.passed else 'FAIL'}] {self.name}: {self.detail}"


def _result(name: str, error: float, tol: float) -> CheckResult:
    return CheckResult(name, bool(error <= tol), f"max error {error:.2e} (tol {tol:g})")


def check_closed_forms() -> CheckResult:
    err = 0.0
    for lam in LAMBDAS:
        c = np.sqrt(lam * (1 - lam))
        err = max(
            err,
            abs(second_largest(omega_one_way(lam).op) - (1 - lam) / (2 - lam)),
            abs(second_largest(omega_hat_two_step(lam).op) - 1 / 3),
            abs(second_largest(omega_two_way(lam).op) - c / (1 + c)),
            abs(plm_second_eigenvalue(lam) - (2 + 2 * c) / (4 + 2 * c)),
        )
    return _result("closed-form second eigenvalues", err, 1e-10)


def check_separable_matches_two_way() -> CheckResult:
    err = max(abs(omega_sep(lam).params["delta"] - second_largest(omega_two_way(lam).op)) for lam in LAMBDAS)
    return _result("separable threshold equals two-way optimum", err, 1e-12)


def check_ppt() -> CheckResult:
    err, ok = 0.0, True
    for lam in LAMBDAS:
        cert = ppt_min_delta(lam)
        ok &= cert.passed
        d = two_way_optimum(lam)
        target = make_target(lam)
        op = target.projector + d * (np.eye(4) - target.projector)
        numeric = eigvals_desc(partial_transpose_b(op))
        err = max(err, float(np.max(np.abs(numeric - np.sort(ppt_eigenvalues(lam, d))[::-1]))))
        if d >= 1e-6:
            ok &= not is_ppt_feasible(lam, d - 1e-6)
        ok &= is_ppt_feasible(lam, d + 1e-6)
    res = _result("partial-transpose threshold", err, 1e-10)
    return CheckResult(res.name, res.passed and bool(ok), res.detail)


def check_oracles(grid: int = 400) -> CheckResult:
    failures = []
    for lam in (0.05, 0.25, 0.5):
        for cert in (one_way_oracle(lam, grid), two_way_grid_search(lam, grid)):
            if not cert.passed:
                failures.append(f"{cert.claim} at lambda={lam}: gap {cert.gap:.2e}")
    return CheckResult("grid oracles", not failures, "; ".join(failures) or f"all certificates pass at grid={grid}")


def check_protocol_trees() -> CheckResult:
    err, kraus = 0.0, 0.0
    for lam in (0.0, 0.1, 0.25, 0.5):
        for name in CATALOG:
            for element in build_strategy(name, lam).elements():
                tree = protocol_tree(element)
                err = max(err, float(np.max(np.abs(tree_accept_operator(tree) - element.op))))
                kraus = max([kraus] + [s.completeness_defect() for s in iter_steps(tree)])
    ok = err <= 1e-10 and kraus <= 1e-10
    return CheckResult(
        "measurement trees realize their pass elements",
        ok,
        f"operator error {err:.2e}, Kraus completeness defect {kraus:.2e}",
    )


def check_twirl(samples: int = 20) -> CheckResult:
    rng = np.random.default_rng(2024)
    err = 0.0
    for _ in range(samples):
        a = rng.normal(size=(4, 4)) + 1j * rng.normal(size=(4, 4))
        a = a + a.conj().T
        err = max(err, float(np.max(np.abs(twirl(a) - twirl(a, "quadrature")))))
    return _result("analytic twirl equals quadrature", err, 1e-9)


def check_sample_count() -> CheckResult:
    n = num_tests(1 / 3, 0.01, 0.001).n_exact
    q = 1 - (2 / 3) * 0.01
    ok = n == 1033 and q**1033 <= 0.001 < q**1032
    return CheckResult("sample count", ok, f"n_exact(1/3, 0.01, 0.001) = {n}")


def check_sweep_shape() -> CheckResult:
    c = curves(sweep_rows(steps=101, strategies=("one_way", "two_step", "two_way", "plm")))
    lam, plm = c["plm"]
    pos = lam > 0
    below = all(np.all(c[k][1][pos] < plm[pos]) for k in ("one_way", "two_step", "two_way"))
    two_up = bool(np.all(np.diff(c["two_way"][1]) > 0))
    one_down = bool(np.all(np.diff(c["one_way"][1]) < 0))
    meet = all(abs(c[k][1][-1] - 1 / 3) < 1e-10 for k in ("one_way", "two_step", "two_way"))
    zero = c["two_way"][1][0] == 0.0
    ok = below and two_up and one_down and meet and zero
    return CheckResult(
        "sweep curve shape",
        ok,
        f"below plm={below}, two-way increasing={two_up}, one-way decreasing={one_down}, "
        f"meet at 1/3={meet}, two-way(0)=0 {zero}",
    )


def check_honest_acceptance() -> CheckResult:
    worst = 0.0
    for lam in LAMBDAS:
        rho = make_target(lam).projector
        for name in CATALOG:
            worst = max(worst, abs(1.0 - float(np.trace(build_strategy(name, lam).op @ rho).real)))
    return _result("target state always passes", worst, 1e-12)


ALL_CHECKS = (
    check_closed_forms,
    check_separable_matches_two_way,
    check_ppt,
    check_oracles,
    check_protocol_trees,
    check_twirl,
    check_sample_count,
    check_sweep_shape,
    check_honest_acceptance,
)


def run_checks() -> list[CheckResult]:
    return [check() for check in ALL_CHECKS]
