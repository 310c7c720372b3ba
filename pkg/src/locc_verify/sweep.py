"""Second-eigenvalue sweeps over the Schmidt coefficient."""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass

import numpy as np

from .errors import InvalidRange, UnknownStrategy
from .spectral import num_tests, second_largest
from .strategies import build_strategy, plm_second_eigenvalue

SWEEP_STRATEGIES = ("one_way", "two_step", "two_way", "sep", "plm", "nonlocal")
CSV_HEADER = ("lambda", "strategy", "lambda2", "n_approx")


@dataclass(frozen=True)
class SweepRow:
    lam: float
    strategy: str
    lambda2_down: float
    n_approx: float

    def cells(self) -> list[str]:
        return [fmt(self.lam), self.strategy, fmt(self.lambda2_down), fmt(self.n_approx)]


def fmt(x: float) -> str:
    return f"{x:.9g}"


def strategy_lambda2(name: str, lam: float) -> float:
    """Second largest eigenvalue of a catalog strategy at its optimal parameters."""
    if name == "plm":
        return float(plm_second_eigenvalue(lam))
    value = second_largest(build_strategy(name, lam).op)
    # roundoff around an exact zero eigenvalue (two-way at lambda=0, nonlocal)
    return 0.0 if abs(value) < 1e-13 else value


def lambda_grid(lambda_min: float, lambda_max: float, steps: int) -> np.ndarray:
    if steps < 2:
        raise InvalidRange(f"steps must be at least 2, got {steps}")
    if not (0.0 <= lambda_min <= lambda_max <= 0.5):
        raise InvalidRange(f"need 0 <= lambda_min <= lambda_max <= 1/2, got [{lambda_min}, {lambda_max}]")
    return np.linspace(lambda_min, lambda_max, steps)


def sweep_rows(
    lambda_min: float = 0.0,
    lambda_max: float = 0.5,
    steps: int = 101,
    strategies=SWEEP_STRATEGIES,
    epsilon: float = 0.01,
    confidence: float = 0.001,
) -> list[SweepRow]:
    unknown = [s for s in strategies if s not in SWEEP_STRATEGIES and s != "one_way_ba"]
    if unknown:
        raise UnknownStrategy(f"unknown strategy {unknown[0]!r}; choose from {', '.join(SWEEP_STRATEGIES)}")
    rows = []
    for lam in lambda_grid(lambda_min, lambda_max, steps):
        lam = float(lam)
        for name in strategies:
            l2 = strategy_lambda2(name, lam)
            rows.append(SweepRow(lam, name, l2, num_tests(l2, epsilon, confidence).n_approx))
    return rows


def rows_to_csv(rows) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(CSV_HEADER)
    for row in rows:
        writer.writerow(row.cells())
    return buf.getvalue()


def curves(rows) -> dict[str, tuple[np.ndarray, np.ndarray]]:
    """Group rows by strategy into ``(lambdas, values)`` arrays."""
    out: dict[str, list] = {}
    for row in rows:
        out.setdefault(row.strategy, []).append((row.lam, row.lambda2_down))
    return {k: tuple(np.array(c) for c in zip(*v)) for k, v in out.items()}
