"""Monte-Carlo execution of the verification protocols.

Each pass element is turned into a measurement tree of local Kraus steps and
classical messages.  Branch probabilities are obtained by applying the Kraus
maps to the full two-qubit density operator, so every conditional choice
sees the correct post-measurement correlations.  Trials then sample a path
through the tree.

Randomness is counter based: trial ``i`` of a run seeded with ``seed`` reads
the four 64-bit words of the Philox block ``counter = i`` under ``key = seed``.
Any trial can therefore be regenerated on its own, and chunked or parallel
runs give bit-identical results.
"""

from __future__ import annotations

import json
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np

from .algebra import I2, check_density, eig_hermitian, lift, proj
from .errors import InvalidDensityOperator
from .spectral import worst_case_state
from .states import BOT, KET0, KET1, MINUS, PLUS, TOP, make_target, one_way_vectors
from .strategies import PovmElement, Strategy, StrategyClass, omega_one_way, omega_two_way

ZERO_BRANCH = 1e-15
KRAUS_TOL = 1e-10
UNIFORMS_PER_TRIAL = 4
MAX_DEPTH = UNIFORMS_PER_TRIAL - 1
ACCEPT, REJECT = -2, -1

_BASES = {"X": (PLUS, MINUS), "Y": (TOP, BOT), "Z": (KET0, KET1)}


# ---------------------------------------------------------------- randomness


def block_uniforms(seed: int, start: int, count: int) -> np.ndarray:
    """Uniforms in [0, 1) for Philox blocks ``start .. start+count-1``; shape ``(count, 4)``."""
    if seed < 0:
        raise ValueError("seed must be nonnegative")
    bits = np.random.Philox(key=seed, counter=start).random_raw(UNIFORMS_PER_TRIAL * count)
    return ((bits >> np.uint64(11)).astype(np.float64) * 2.0**-53).reshape(count, UNIFORMS_PER_TRIAL)


@dataclass(frozen=True)
class TrialStream:
    """Randomness of a single trial, derived from ``(seed, index)``."""

    seed: int
    index: int = 0

    def uniforms(self) -> np.ndarray:
        return block_uniforms(self.seed, self.index, 1)[0]


# ---------------------------------------------------------------- measurement trees


@dataclass(frozen=True)
class KrausStep:
    operators: tuple
    party: str  # "A", "B", or "AB" for a joint two-qubit step
    outcome_labels: tuple = (0, 1)

    def completeness_defect(self) -> float:
        dim = self.operators[0].shape[0]
        total = sum(k.conj().T @ k for k in self.operators)
        return float(np.max(np.abs(total - np.eye(dim))))

    def is_complete(self, tol: float = KRAUS_TOL) -> bool:
        return self.completeness_defect() <= tol

    def lifted(self) -> list[np.ndarray]:
        if self.party == "AB":
            return [np.asarray(k, dtype=complex) for k in self.operators]
        return [lift(k, self.party) for k in self.operators]


@dataclass
class Node:
    step: KrausStep
    announce: bool
    children: list  # Node, or True (accept) / False (reject)


def _projective(vec, party: str) -> KrausStep:
    p = proj(vec)
    return KrausStep((p, I2 - p), party, ("pass", "fail"))


def _basis_step(basis: str, party: str) -> KrausStep:
    e0, e1 = _BASES[basis]
    return KrausStep((proj(e0), proj(e1)), party)


def _other(party: str) -> str:
    return "B" if party == "A" else "A"


def _check_leaf():
    return [True, False]


def _one_way_tree(lam: float, first: str, basis: str) -> Node:
    vecs = one_way_vectors(lam)
    conditional = {
        "X": (vecs.v_plus, vecs.v_minus),
        "Y": (vecs.w_minus, vecs.w_plus),
        "Z": (KET0, KET1),
    }[basis]
    second = _other(first)
    return Node(
        _basis_step(basis, first),
        announce=True,
        children=[Node(_projective(c, second), False, _check_leaf()) for c in conditional],
    )


def two_way_kraus(delta: float) -> tuple[np.ndarray, np.ndarray]:
    """Kraus operators of the opening two-outcome measurement ``{delta|0><0|, (1-delta)|0><0| + |1><1|}``."""
    k0 = np.diag([np.sqrt(delta), 0.0]).astype(complex)
    k1 = np.diag([np.sqrt(1 - delta), 1.0]).astype(complex)
    return k0, k1


def conditional_target(lam: float, delta: float, basis: str, j: int) -> np.ndarray | None:
    """Opening party's normalized post-measurement state for input ``|Psi>``.

    Computed as ``(K_1 (x) <e_j|) |Psi>``; ``None`` when that branch has zero
    weight (``lam = 0``, ``delta = 1``).
    """
    psi = make_target(lam).psi.reshape(2, 2)  # rows: opening party, columns: partner
    _, k1 = two_way_kraus(delta)
    e = _BASES[basis][j]
    v = k1 @ psi @ e.conj()
    n = np.linalg.norm(v)
    if n <= ZERO_BRANCH:
        return None
    return v / n


def _two_way_tree(lam: float, first: str, basis: str, delta: float) -> Node:
    second = _other(first)
    k0, k1 = two_way_kraus(delta)
    finals = []
    for j in (0, 1):
        target = conditional_target(lam, delta, basis, j)
        if target is None:
            finals.append(False)
        else:
            finals.append(Node(_projective(target, first), False, _check_leaf()))
    return Node(
        KrausStep((k0, k1), first, ("M0", "M1")),
        announce=True,
        children=[
            Node(_basis_step("Z", second), False, _check_leaf()),
            Node(_basis_step(basis, second), True, finals),
        ],
    )


def _psd_sqrt(op) -> np.ndarray:
    spec = eig_hermitian(op)
    w = np.clip(spec.eigenvalues, 0.0, None)
    v = spec.eigenvectors
    return (v * np.sqrt(w)) @ v.conj().T


def _joint_tree(op) -> Node:
    op = np.asarray(op, dtype=complex)
    step = KrausStep((_psd_sqrt(op), _psd_sqrt(np.eye(4) - op)), "AB", ("pass", "fail"))
    return Node(step, False, _check_leaf())


def protocol_tree(element: PovmElement) -> Node:
    spec = element.protocol
    if spec is None:
        raise ValueError(f"element {element.label!r} carries no protocol description")
    if spec.kind == "one_way":
        return _one_way_tree(spec.lam, spec.first, spec.basis)
    if spec.kind == "two_way":
        return _two_way_tree(spec.lam, spec.first, spec.basis, spec.delta)
    if spec.kind == "joint":
        return _joint_tree(element.op)
    raise ValueError(f"unknown protocol kind {spec.kind!r}")


def iter_steps(node):
    if isinstance(node, Node):
        yield node.step
        for c in node.children:
            yield from iter_steps(c)


def tree_accept_operator(node) -> np.ndarray:
    """POVM element realized by a tree: ``sum over accepting paths of K^dagger K``."""
    if node is True:
        return np.eye(4, dtype=complex)
    if node is False:
        return np.zeros((4, 4), dtype=complex)
    total = np.zeros((4, 4), dtype=complex)
    for k, child in zip(node.step.lifted(), node.children):
        total += k.conj().T @ tree_accept_operator(child) @ k
    return total


# ---------------------------------------------------------------- compiled sampling tables


@dataclass
class _Table:
    """Flattened trees for one strategy evaluated on one state."""

    cum: np.ndarray  # (nodes, width) cumulative conditional probabilities
    child: np.ndarray  # (nodes, width) next node, ACCEPT or REJECT
    announce: np.ndarray  # (nodes,) bool
    party: list
    roots: np.ndarray  # root node per element
    element_cum: np.ndarray  # cumulative element weights
    labels: list
    notify: list


def _cumulative(probs: np.ndarray) -> np.ndarray:
    probs = np.where(probs < ZERO_BRANCH, 0.0, probs)
    total = probs.sum()
    if total <= 0:
        raise InvalidDensityOperator("all branches of a measurement have zero probability")
    cum = np.cumsum(probs / total)
    last = int(np.flatnonzero(probs > 0)[-1])
    cum[last:] = 1.0
    return cum


def _compile(strategy: Strategy, sigma: np.ndarray) -> _Table:
    width = 2
    rows_cum, rows_child, rows_announce, rows_party = [], [], [], []

    def visit(node: Node, rho: np.ndarray, weight: float) -> int:
        idx = len(rows_cum)
        rows_cum.append(None)
        rows_child.append(None)
        rows_announce.append(node.announce)
        rows_party.append(node.step.party)
        ops = node.step.lifted()
        if len(ops) > width:
            raise ValueError("measurement trees are limited to two outcomes per step")
        posts = [k @ rho @ k.conj().T for k in ops]
        joint = np.array([max(0.0, float(np.trace(r).real)) for r in posts])
        # zero-probability branches are never sampled
        cond = np.where(joint < ZERO_BRANCH, 0.0, joint)
        if weight <= ZERO_BRANCH or cond.sum() <= 0:
            cond = np.zeros(len(ops))
            cond[0] = 1.0
        cum = np.ones(width)
        cum[: len(ops)] = _cumulative(cond)
        children = np.full(width, REJECT)
        for o, child in enumerate(node.children):
            if child is True:
                children[o] = ACCEPT
            elif child is False:
                children[o] = REJECT
            else:
                norm = joint[o]
                nxt = posts[o] / norm if norm > ZERO_BRANCH else posts[o]
                children[o] = visit(child, nxt, weight * (joint[o] if norm > ZERO_BRANCH else 0.0))
        rows_cum[idx] = cum
        rows_child[idx] = children
        return idx

    roots, labels, notify = [], [], []
    for _, element in strategy.mixture:
        roots.append(visit(protocol_tree(element), sigma, 1.0))
        labels.append(element.label)
        notify.append(bool(element.protocol.notify))
    return _Table(
        cum=np.array(rows_cum),
        child=np.array(rows_child, dtype=np.int64),
        announce=np.array(rows_announce, dtype=bool),
        party=rows_party,
        roots=np.array(roots, dtype=np.int64),
        element_cum=_cumulative(strategy.weights()),
        labels=labels,
        notify=notify,
    )


def _pick(cum: np.ndarray, u: np.ndarray) -> np.ndarray:
    return np.minimum(np.sum(u[..., None] >= cum, axis=-1), cum.shape[-1] - 1)


def _sample(table: _Table, u: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Vectorized walk; ``u`` has shape ``(n, 4)``.  Returns ``(accepted, element_index)``."""
    element = _pick(table.element_cum, u[:, 0])
    state = table.roots[element]
    for level in range(MAX_DEPTH):
        active = state >= 0
        if not active.any():
            break
        nodes = state[active]
        outcome = _pick(table.cum[nodes], u[active, level + 1])
        state[active] = table.child[nodes, outcome]
    if np.any(state >= 0):
        raise RuntimeError("measurement tree deeper than the per-trial randomness budget")
    return state == ACCEPT, element


# ---------------------------------------------------------------- devices


@dataclass(frozen=True)
class DeviceModel:
    """Source of the emitted two-qubit states.

    ``kind`` is ``"honest"``, ``"worst"`` (fidelity exactly ``1 - epsilon``,
    worst for the strategy under test), ``"fixed"`` or ``"mixture"``.  A
    mixture device emits ``sum_k w_k rho_k`` on every run.
    """

    kind: str
    epsilon: float | None = None
    state: np.ndarray | None = None
    components: tuple = ()

    @classmethod
    def honest(cls) -> "DeviceModel":
        return cls("honest")

    @classmethod
    def worst_case(cls, epsilon: float) -> "DeviceModel":
        if not (0.0 < epsilon < 1.0):
            raise ValueError("epsilon must lie in (0, 1)")
        return cls("worst", epsilon=float(epsilon))

    @classmethod
    def fixed(cls, rho) -> "DeviceModel":
        return cls("fixed", state=check_density(rho))

    @classmethod
    def mixture(cls, components) -> "DeviceModel":
        comps = tuple((float(w), check_density(r)) for w, r in components)
        w = np.array([c[0] for c in comps])
        if np.any(w < 0) or abs(w.sum() - 1.0) > 1e-12:
            raise ValueError("mixture weights must be a probability vector")
        return cls("mixture", components=comps)

    def emitted_state(self, strategy: Strategy) -> np.ndarray:
        lam = strategy.lam
        if self.kind == "honest":
            rho = make_target(lam).projector
        elif self.kind == "worst":
            rho = worst_case_state(strategy.op, self.epsilon, lam)
        elif self.kind == "fixed":
            rho = self.state
        elif self.kind == "mixture":
            rho = sum(w * r for w, r in self.components)
        else:
            raise ValueError(f"unknown device kind {self.kind!r}")
        return check_density(rho)


def load_device_file(path) -> DeviceModel:
    """Read a 4x4 density matrix stored as nested ``[[ [re, im], ... ], ...]`` JSON."""
    data = json.loads(Path(path).read_text())
    try:
        rho = np.array([[complex(re, im) for re, im in row] for row in data], dtype=complex)
    except (TypeError, ValueError) as exc:
        raise InvalidDensityOperator(f"{path}: expected a 4x4 array of [re, im] pairs") from exc
    if rho.shape != (4, 4):
        raise InvalidDensityOperator(f"{path}: expected shape (4, 4), got {rho.shape}")
    return DeviceModel.fixed(rho)


def dump_density(rho) -> list:
    rho = np.asarray(rho, dtype=complex)
    return [[[float(z.real), float(z.imag)] for z in row] for row in rho]


# ---------------------------------------------------------------- single trials


@dataclass(frozen=True)
class TrialRecord:
    test_label: str
    message_transcript: tuple
    accepted: bool
    seed: int
    index: int = 0


def run_trial(strategy: Strategy, sigma, stream: TrialStream) -> TrialRecord:
    """Run one round of ``strategy`` on ``sigma``, recording the classical messages."""
    sigma = check_density(sigma)
    table = _compile(strategy, sigma)
    u = stream.uniforms()
    element = int(_pick(table.element_cum, u[:1])[0])
    transcript = [("A", 1)] if table.notify[element] else []
    node = int(table.roots[element])
    level = 0
    while node >= 0:
        outcome = int(_pick(table.cum[node][None, :], u[level + 1 : level + 2])[0])
        if table.announce[node]:
            transcript.append((table.party[node], outcome))
        node = int(table.child[node, outcome])
        level += 1
    return TrialRecord(
        test_label=table.labels[element],
        message_transcript=tuple(transcript),
        accepted=node == ACCEPT,
        seed=stream.seed,
        index=stream.index,
    )


def run_one_way_trial(lam: float, p: float, sigma, stream: TrialStream, direction: str = "AtoB") -> TrialRecord:
    return run_trial(omega_one_way(lam, p, direction), sigma, stream)


def run_two_way_trial(lam: float, delta: float, p: float, sigma, stream: TrialStream) -> TrialRecord:
    return run_trial(omega_two_way(lam, delta, p), sigma, stream)


# ---------------------------------------------------------------- batches and campaigns


@dataclass(frozen=True)
class VerificationReport:
    trials: int
    accepts: int
    empirical_rate: float
    predicted_rate: float
    std_error: float
    seed: int
    n_tests: int = 1
    sigma_bound: float = 5.0
    details: dict = field(default_factory=dict)

    @property
    def binomial_sigma(self) -> float:
        p = self.predicted_rate
        return math.sqrt(max(p * (1 - p), 0.0) / self.trials)

    @property
    def within_bound(self) -> bool:
        """Empirical rate within ``sigma_bound`` binomial standard errors of the prediction."""
        return abs(self.empirical_rate - self.predicted_rate) <= self.sigma_bound * self.binomial_sigma + 1e-12

    def to_dict(self) -> dict:
        d = asdict(self)
        d["binomial_sigma"] = self.binomial_sigma
        d["verdict"] = "pass" if self.within_bound else "fail"
        return d


def _report(accepts: int, trials: int, predicted: float, seed: int, n_tests: int = 1, **details) -> VerificationReport:
    rate = accepts / trials
    return VerificationReport(
        trials=trials,
        accepts=accepts,
        empirical_rate=rate,
        predicted_rate=float(predicted),
        std_error=math.sqrt(rate * (1 - rate) / trials),
        seed=seed,
        n_tests=n_tests,
        details=details,
    )


def _chunks(total: int, size: int):
    for start in range(0, total, size):
        yield start, min(size, total - start)


def _count(table: _Table, seed: int, trials: int, chunk: int, workers: int) -> int:
    def work(span):
        start, count = span
        accepted, _ = _sample(table, block_uniforms(seed, start, count))
        return int(accepted.sum())

    spans = list(_chunks(trials, chunk))
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            return sum(pool.map(work, spans))
    return sum(map(work, spans))


def pass_probability(strategy: Strategy, sigma) -> float:
    return float(np.trace(strategy.op @ np.asarray(sigma)).real)


def simulate_strategy(
    strategy: Strategy, sigma, trials: int, seed: int, *, chunk: int = 1 << 16, workers: int = 1
) -> VerificationReport:
    """Accept frequency of single rounds of ``strategy`` on the fixed state ``sigma``."""
    if trials < 1:
        raise ValueError("trials must be positive")
    sigma = check_density(sigma)
    table = _compile(strategy, sigma)
    accepts = _count(table, seed, trials, chunk, workers)
    return _report(accepts, trials, pass_probability(strategy, sigma), seed, strategy=strategy.label)


def simulate_element(element: PovmElement, sigma, trials: int, seed: int, lam: float | None = None) -> VerificationReport:
    """Accept frequency of one pass element, compared with ``tr(T sigma)``."""
    lam = element.protocol.lam if lam is None else lam
    single = Strategy(op=element.op, kind=StrategyClass.NONLOCAL, params={"lambda": lam}, mixture=((1.0, element),))
    sigma = check_density(sigma)
    table = _compile(single, sigma)
    accepts = _count(table, seed, trials, 1 << 16, 1)
    return _report(accepts, trials, float(np.trace(element.op @ sigma).real), seed, element=element.label)


def run_campaign(
    strategy: Strategy, device: DeviceModel, n_tests: int, trials: int, seed: int, *, workers: int = 1
) -> VerificationReport:
    """Simulate ``trials`` campaigns of ``n_tests`` rounds; report how many pass every round.

    Campaign ``i`` consumes the Philox blocks ``i*n_tests .. (i+1)*n_tests - 1``.
    """
    if n_tests < 1 or trials < 1:
        raise ValueError("n_tests and trials must be positive")
    sigma = device.emitted_state(strategy)
    table = _compile(strategy, sigma)
    per_chunk = max(1, (1 << 18) // n_tests)

    def work(span):
        start, count = span
        u = block_uniforms(seed, start * n_tests, count * n_tests)
        accepted, _ = _sample(table, u)
        return int(accepted.reshape(count, n_tests).all(axis=1).sum())

    spans = list(_chunks(trials, per_chunk))
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            accepts = sum(pool.map(work, spans))
    else:
        accepts = sum(map(work, spans))
    single = pass_probability(strategy, sigma)
    return _report(
        accepts,
        trials,
        single**n_tests,
        seed,
        n_tests=n_tests,
        strategy=strategy.label,
        device=device.kind,
        single_round_pass=single,
    )
