"""Independent numerical certification of the optimality claims.

Each oracle searches a family of strategies by brute force and compares the
best value it finds with the corresponding closed form, producing an
:class:`OptimalityCertificate`.
"""

from __future__ import annotations

from dataclasses import asdict, dataclass, field

import numpy as np

from .algebra import eig_hermitian, partial_transpose_b
from .errors import MeanConstraintViolated, NotSymmetrizedForm
from .states import check_lambda, make_target
from .strategies import (
    homogeneous,
    optimal_p_one_way,
    optimal_two_way_params,
    separable_threshold,
    t4_separable,
    t_one_way,
    two_way_optimum,
)

PPT_FEASIBILITY_TOL = 1e-12


@dataclass(frozen=True)
class TDistribution:
    """Finitely supported law of Alice's direction parameter ``T``."""

    atoms: tuple  # of (weight, t)

    def __post_init__(self):
        atoms = tuple((float(w), float(t)) for w, t in self.atoms)
        object.__setattr__(self, "atoms", atoms)
        w = np.array([a[0] for a in atoms])
        t = np.array([a[1] for a in atoms])
        if np.any(w < 0) or abs(w.sum() - 1.0) > 1e-12:
            raise ValueError("weights must be nonnegative and sum to 1")
        if np.any((t < 0) | (t > 1)):
            raise ValueError("atoms must lie in [0, 1]")
        if abs(float(w @ t) - 0.5) > 1e-10:
            raise MeanConstraintViolated(f"E[T] = {float(w @ t)!r}, expected 1/2")

    @property
    def weights(self) -> np.ndarray:
        return np.array([a[0] for a in self.atoms])

    @property
    def points(self) -> np.ndarray:
        return np.array([a[1] for a in self.atoms])


@dataclass(frozen=True)
class XiFunctional:
    xi: float
    lambda2: float
    lambda3: float
    lambda4: float

    @property
    def second_largest(self) -> float:
        return max(self.lambda2, self.lambda3, self.lambda4)


@dataclass(frozen=True)
class OptimalityCertificate:
    claim: str
    closed_form: float
    oracle_value: float
    gap: float
    grid_resolution: float
    tolerance: float
    argmin: dict = field(default_factory=dict)
    details: dict = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return bool(self.gap <= self.tolerance) and all(
            v for k, v in self.details.items() if k.endswith("_ok")
        )

    def to_dict(self) -> dict:
        d = asdict(self)
        d["passed"] = self.passed
        return d


def _xi_summand(t, lam: float):
    """``t(1-t)/D`` with ``D = t(1-lam) + (1-t)lam``.

    Atoms at ``t`` in {0, 1} contribute zero; at ``lam = 0`` the interior
    summand reduces to ``1 - t``.
    """
    t = np.asarray(t, dtype=float)
    num = t * (1 - t)
    if lam == 0.0:
        return np.where(num == 0, 0.0, 1 - t)
    den = t * (1 - lam) + (1 - t) * lam
    return num / den


def xi_of(dist: TDistribution, lam: float) -> XiFunctional:
    lam = check_lambda(lam)
    xi = float(2 * dist.weights @ _xi_summand(dist.points, lam))
    return XiFunctional(xi=xi, lambda2=1 - xi, lambda3=xi * lam, lambda4=xi * (1 - lam))


def povm_relations(dist: TDistribution, lam: float) -> tuple[float, float]:
    """Left-hand sides of the two diagonal completeness relations (both equal 1)."""
    lam = check_lambda(lam)
    t, w = dist.points, dist.weights
    d = t * (1 - lam) + (1 - t) * lam
    xi = xi_of(dist, lam).xi
    r1 = 2 * (1 - lam) * float(w @ (t**2 / d)) + lam * xi
    r2 = 2 * lam * float(w @ ((1 - t) ** 2 / d)) + (1 - lam) * xi
    return r1, r2


def twirled_one_way_matrix(dist: TDistribution, lam: float) -> np.ndarray:
    """Standard-basis matrix of an averaged one-way strategy in terms of ``Xi``."""
    xi = xi_of(dist, lam).xi
    c = np.sqrt(lam * (1 - lam))
    m = np.zeros((4, 4), dtype=complex)
    m[0, 0] = 1 - lam * xi
    m[3, 3] = 1 - (1 - lam) * xi
    m[0, 3] = m[3, 0] = xi * c
    m[1, 1] = xi * lam
    m[2, 2] = xi * (1 - lam)
    return m


def one_way_oracle(lam: float, grid: int = 1000) -> OptimalityCertificate:
    """Sweep two-atom laws ``t1 <= 1/2 <= t2`` with the weight fixed by ``E[T] = 1/2``."""
    lam = check_lambda(lam)
    if grid < 2:
        raise ValueError("grid must be at least 2")
    t1 = np.linspace(0.0, 0.5, grid)[:, None]
    t2 = np.linspace(0.5, 1.0, grid)[None, :]
    with np.errstate(invalid="ignore", divide="ignore"):
        w1 = np.where(t2 > t1, (t2 - 0.5) / (t2 - t1), 1.0)
    xi = 2 * (w1 * _xi_summand(t1, lam) + (1 - w1) * _xi_summand(t2, lam))
    # lambda_3 = xi*lam never exceeds lambda_4 = xi*(1-lam) on [0, 1/2]
    value = np.maximum(1 - xi, xi * (1 - lam))
    i, j = np.unravel_index(np.argmin(value), value.shape)
    best = float(value[i, j])
    closed = optimal_p_one_way(lam)
    return OptimalityCertificate(
        claim="one-way optimum (1-lam)/(2-lam)",
        closed_form=closed,
        oracle_value=best,
        gap=abs(best - closed),
        grid_resolution=0.5 / (grid - 1),
        tolerance=1e-4,
        argmin={"t1": float(t1[i, 0]), "t2": float(t2[0, j]), "w1": float(w1[i, j]), "xi": float(xi[i, j])},
        details={"xi_closed_form": 1 / (2 - lam), "never_below_closed_form_ok": bool(best >= closed - 1e-9)},
    )


def two_way_lambda2(lam: float, delta, p):
    """Closed-form ``lambda_2(delta, p)`` on arrays (``nan`` where undefined)."""
    delta = np.asarray(delta, dtype=float)
    p = np.asarray(p, dtype=float)
    if lam == 0.0:
        return p + 0 * delta
    with np.errstate(invalid="ignore", divide="ignore"):
        return (p * (1 - delta) + lam * delta) / (1 - delta + lam * delta)


def two_way_lambda3(lam: float, delta, p):
    delta = np.asarray(delta, dtype=float)
    p = np.asarray(p, dtype=float)
    if lam == 0.0:
        return (1 - p) * (1 - delta) / 2
    with np.errstate(invalid="ignore", divide="ignore"):
        return (1 - p) * (lam + (1 - lam) * (1 - delta) ** 2) / (2 * (1 - delta + lam * delta))


def ridge_p(lam: float, delta):
    """Weight ``p*(delta)`` solving ``lambda_2 = lambda_3``."""
    d = np.asarray(delta, dtype=float)
    return (-lam * d**2 + d**2 - 2 * d + 1) / (2 * lam * d - lam * d**2 + d**2 - 4 * d + 3)


def ridge_value(lam: float, delta):
    d = np.asarray(delta, dtype=float)
    return (2 * lam * d - lam * d**2 + d**2 - 2 * d + 1) / (2 * lam * d - lam * d**2 + d**2 - 4 * d + 3)


def ridge_slope(lam: float, delta):
    d = np.asarray(delta, dtype=float)
    den = (2 * lam * d - lam * d**2 + d**2 - 4 * d + 3) ** 2
    return -2 * (1 - lam) * (d**2 - 2 * d + (1 - 2 * lam) / (1 - lam)) / den


def two_way_grid_search(lam: float, grid: int = 1000) -> OptimalityCertificate:
    """Minimize ``max(lambda_2, lambda_3)`` over a ``grid x grid`` mesh of ``(delta, p)``.

    Both branches are affine in ``p`` for fixed ``delta``, so inside the mesh
    cell where their difference changes sign the crossing is located exactly
    by linear interpolation of the mesh values.  The mesh minimum and the
    per-row crossings are merged by a plain minimum.
    """
    lam = check_lambda(lam)
    if grid < 2:
        raise ValueError("grid must be at least 2")
    deltas = np.linspace(0.0, 1.0, grid)
    ps = np.linspace(0.0, 1.0, grid)
    l2 = two_way_lambda2(lam, deltas[:, None], ps[None, :])
    l3 = two_way_lambda3(lam, deltas[:, None], ps[None, :])
    f = np.maximum(l2, l3)
    f = np.where(np.isfinite(f), f, np.inf)

    j_mesh = np.argmin(f, axis=1)
    rows = np.arange(grid)
    row_best = f[rows, j_mesh]
    row_p = ps[j_mesh]

    g = l2 - l3
    finite_row = np.all(np.isfinite(g), axis=1)
    j = np.sum(g < 0, axis=1) - 1
    cell = finite_row & (j >= 0) & (j < grid - 1)
    jj = np.clip(j, 0, grid - 2)
    g0, g1 = g[rows, jj], g[rows, jj + 1]
    with np.errstate(invalid="ignore", divide="ignore"):
        frac = np.where(g1 != g0, g0 / (g0 - g1), 0.0)
    p_cross = ps[jj] + frac * (ps[jj + 1] - ps[jj])
    v_cross = l2[rows, jj] + frac * (l2[rows, jj + 1] - l2[rows, jj])
    better = cell & (v_cross < row_best)
    row_best = np.where(better, v_cross, row_best)
    row_p = np.where(better, p_cross, row_p)

    r = int(np.argmin(row_best))
    best = float(row_best[r])
    d_star, p_star = optimal_two_way_params(lam)
    closed = two_way_optimum(lam)

    # mesh crossings versus the closed-form weight p*(delta)
    ok_rows = cell & (deltas < 1.0)
    ridge_err = float(np.max(np.abs(p_cross[ok_rows] - ridge_p(lam, deltas[ok_rows])))) if ok_rows.any() else 0.0

    # derivative sign pattern: decreasing before delta_-, increasing after it (inside [0, 1])
    d_minus = 1 - np.sqrt(lam / (1 - lam)) if lam < 0.5 else 0.0
    probe = np.linspace(0.0, 1.0, 201)
    probe = probe[(probe < 1.0) & (np.abs(probe - d_minus) > 1e-3)]
    slope = ridge_slope(lam, probe)
    sign_ok = bool(np.all(slope[probe < d_minus] < 0) and np.all(slope[probe > d_minus] > 0))
    # finite-difference check of the slope formula on the same probes
    h = 1e-6
    fd = (ridge_value(lam, probe + h) - ridge_value(lam, probe - h)) / (2 * h)
    slope_err = float(np.max(np.abs(np.where(probe > h, fd, slope) - slope)))

    # monotonicity in p at a fixed delta (lambda_2 increasing, lambda_3 decreasing)
    d_probe = min(0.4, d_star) if lam > 0 else 0.4
    l2_row = two_way_lambda2(lam, d_probe, ps)
    l3_row = two_way_lambda3(lam, d_probe, ps)
    mono_ok = bool(np.all(np.diff(l2_row) >= 0) and np.all(np.diff(l3_row) <= 0))

    return OptimalityCertificate(
        claim="two-way optimum sqrt(lam(1-lam))/(1+sqrt(lam(1-lam)))",
        closed_form=closed,
        oracle_value=best,
        gap=abs(best - closed),
        grid_resolution=1.0 / (grid - 1),
        tolerance=1e-5,
        argmin={
            "delta": float(deltas[r]),
            "p": float(row_p[r]),
            "delta_star": float(d_star),
            "p_star": float(p_star),
            "delta_gap": abs(float(deltas[r]) - float(d_star)),
            "p_gap": abs(float(row_p[r]) - float(p_star)),
        },
        details={
            "ridge_p_max_error": ridge_err,
            "ridge_p_ok": ridge_err <= 1e-9,
            "slope_sign_ok": sign_ok,
            "slope_fd_max_error": slope_err,
            "slope_formula_ok": slope_err <= 1e-6,
            "p_monotonicity_ok": mono_ok,
            "never_below_closed_form_ok": bool(best >= closed - 1e-9),
        },
    )


def ppt_eigenvalues(lam: float, delta: float) -> np.ndarray:
    """Closed-form spectrum of the partial transpose of the homogeneous strategy."""
    c = np.sqrt(lam * (1 - lam))
    return np.array(
        [1 - lam + lam * delta, lam + delta - lam * delta, delta + (1 - delta) * c, delta - (1 - delta) * c]
    )


def ppt_min_eigenvalue(lam: float, delta: float) -> float:
    return float(eig_hermitian(partial_transpose_b(homogeneous(lam, delta))).eigenvalues[-1])


def is_ppt_feasible(lam: float, delta: float) -> bool:
    return ppt_min_eigenvalue(lam, delta) >= -PPT_FEASIBILITY_TOL


def ppt_min_delta(lam: float, tol: float = 1e-9) -> OptimalityCertificate:
    """Bisection for the least homogeneous parameter whose partial transpose is positive.

    The bracket is narrowed to ``tol / 2`` and its feasible end is reported,
    so the result is within ``tol`` of the threshold with margin to spare.
    """
    lam = check_lambda(lam)
    if tol <= 0:
        raise ValueError("tol must be positive")
    lo, hi = 0.0, 1.0
    steps = 0
    if is_ppt_feasible(lam, lo):
        hi = lo
    else:
        while hi - lo > tol / 2:
            mid = 0.5 * (lo + hi)
            if is_ppt_feasible(lam, mid):
                hi = mid
            else:
                lo = mid
            steps += 1
    closed = separable_threshold(lam)

    eig_err = 0.0
    for d in np.linspace(0.0, 1.0, 11):
        numeric = eig_hermitian(partial_transpose_b(homogeneous(lam, d))).eigenvalues
        expected = np.sort(ppt_eigenvalues(lam, d))[::-1]
        eig_err = max(eig_err, float(np.max(np.abs(numeric - expected))))
    below = closed - 1e-6
    above = closed + 1e-6
    below_infeasible = (below < 0) or not is_ppt_feasible(lam, below)
    return OptimalityCertificate(
        claim="separable homogeneous threshold delta* (PPT)",
        closed_form=closed,
        oracle_value=hi,
        gap=abs(hi - closed),
        grid_resolution=tol,
        tolerance=max(tol, 1e-9),
        argmin={"delta": hi, "bisection_steps": steps},
        details={
            "closed_form_eigenvalue_max_error": eig_err,
            "closed_form_eigenvalues_ok": eig_err <= 1e-10,
            "below_infeasible_ok": bool(below_infeasible),
            "above_feasible_ok": bool(is_ppt_feasible(lam, above)),
        },
    )


def symmetrized_coefficients(op, lam: float, tol: float = 1e-8) -> tuple[float, float]:
    """Return ``(lambda_2, lambda_3)`` of an operator in the swap-symmetrized averaged form."""
    target = make_target(lam)
    basis = target.eigenbasis
    m = basis.conj().T @ np.asarray(op, dtype=complex) @ basis
    off = m - np.diag(np.diag(m))
    residual = max(
        float(np.max(np.abs(off))),
        abs(m[0, 0] - 1.0),
        abs(m[2, 2] - m[3, 3]),
    )
    if residual > tol:
        raise NotSymmetrizedForm(f"operator is not in the symmetrized averaged form (residual {residual:.3e})")
    return float(m[1, 1].real), float(m[2, 2].real)


def homogenizing_weight(op, lam: float) -> tuple[float, str]:
    """Mixing weight and partner (``"T4"``, ``"T3"`` or ``""``) that equalize the spectrum."""
    l2, l3 = symmetrized_coefficients(op, lam)
    c = np.sqrt(lam * (1 - lam))
    if abs(l2 - l3) <= 1e-15:
        return 0.0, ""
    if l2 > l3:
        # T4 has lambda_2 = 0 and lambda_3 = c
        if c == 0.0:
            return 1.0, "T4"
        return (l2 - l3) / (l2 - l3 + c), "T4"
    # T3 has lambda_2 = 1 and lambda_3 = 0
    return (l3 - l2) / (1 + l3 - l2), "T3"


def homogenize(op, lam: float) -> np.ndarray:
    """Mix a symmetrized strategy with ``T4`` or ``T3`` until it becomes homogeneous."""
    lam = check_lambda(lam)
    weight, partner = homogenizing_weight(op, lam)
    op = np.asarray(op, dtype=complex)
    if not partner:
        return op.copy()
    other = t4_separable(lam).op if partner == "T4" else t_one_way(lam, "Z").op
    return (1 - weight) * op + weight * other
