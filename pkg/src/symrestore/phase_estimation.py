"""Phase estimation, iterative phase-estimation projection and the Rodeo filter."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from .errors import EmptySectorError, ValidationError
from .pauli import PauliSum
from .rng import SeedLike, as_generator
from .statevector import Circuit, Statevector, dense_gate, evolve, h, phase, qft_matrix
from .symmetry import Projector, SymmetryOperator
from .trotter import PhaseScaling, propagator_unitary, qpe_scaling

ApplyFn = Callable[[np.ndarray], np.ndarray]


@dataclass
class ProjectionOutcome:
    """Result of one projection attempt (or its exact-mode bookkeeping)."""

    state: Statevector | None
    accepted: bool
    ancilla_readout: int | str | None
    success_probability: float
    attempts: int = 1
    rounds: int = 0
    history: list[float] = field(default_factory=list)

    @property
    def expected_attempts(self) -> float:
        return 1 / self.success_probability if self.success_probability > 0 else float("inf")


def _amps(state) -> np.ndarray:
    return np.asarray(getattr(state, "amplitudes", state), dtype=complex)


def _as_apply(unitary: Circuit | ApplyFn) -> ApplyFn:
    if isinstance(unitary, Circuit):
        return lambda a: evolve(a, unitary)
    return unitary


# ---------------------------------------------------------------------------
# QPE
# ---------------------------------------------------------------------------


@dataclass
class QpeResult:
    n_a: int
    probabilities: np.ndarray
    joint: np.ndarray = field(repr=False)
    outcome: int | None = None
    state: Statevector | None = None

    def branch(self, m: int) -> tuple[float, np.ndarray]:
        """Probability of ancilla reading ``m`` and the (unnormalized) system branch."""
        vec = self.joint[m]
        return float(np.vdot(vec, vec).real), vec


def qpe_joint_state(state, unitary: Circuit | ApplyFn, n_a: int) -> np.ndarray:
    """Register after Hadamards, controlled powers U^(2^j) and the inverse QFT.

    Row a of the returned (2^n_a, 2^n) array is the system amplitude paired
    with ancilla reading a (ancilla j is bit j of a, placed above the system).
    Controlled powers are applied as U^a on the a-th branch, which is what
    the cascade of controlled U^(2^j) gates produces.
    """
    if n_a < 1:
        raise ValidationError("n_a must be at least 1")
    apply = _as_apply(unitary)
    psi = _amps(state)
    size = 1 << n_a
    rows = np.empty((size, psi.size), dtype=complex)
    cur = psi
    for a in range(size):
        rows[a] = cur
        if a + 1 < size:
            cur = apply(cur)
    rows /= np.sqrt(size)
    return qft_matrix(n_a, inverse=True) @ rows


def qpe_run(
    state,
    unitary: Circuit | ApplyFn,
    n_a: int,
    shots: int | None = None,
    rng_seed: SeedLike = None,
) -> tuple[np.ndarray, QpeResult]:
    """Ancilla distribution (exact) or sampled counts, plus the full result.

    With ``shots`` the histogram holds counts and one collapse is drawn
    for ``QpeResult.outcome``/``state``.
    """
    joint = qpe_joint_state(state, unitary, n_a)
    probs = np.sum(np.abs(joint) ** 2, axis=1)
    result = QpeResult(n_a, probs, joint)
    if shots is None:
        return probs, result
    if shots < 1:
        raise ValidationError("shots must be positive")
    rng = as_generator(rng_seed)
    p = probs / probs.sum()
    counts = rng.multinomial(shots, p)
    m = int(rng.choice(len(p), p=p))
    _, vec = result.branch(m)
    result.outcome = m
    result.state = Statevector(vec, normalize=True)
    return counts, result


def qpe_circuit(unitary: Circuit, n_a: int) -> Circuit:
    """Gate-level QPE on n + n_a qubits (ancillas above the system)."""
    n = unitary.n_qubits
    circ = Circuit(n + n_a)
    for j in range(n_a):
        circ.append(h(n + j))
    for j in range(n_a):
        circ.extend(unitary.power(1 << j).controlled(n + j, n_qubits=n + n_a))
    circ.append(dense_gate(tuple(range(n, n + n_a)), qft_matrix(n_a, inverse=True), "QFT^-1"))
    return circ


class SpectralEvolution:
    """exp(-i t H) applied through a dense eigendecomposition (verification path)."""

    def __init__(self, h: PauliSum):
        self.h = h
        self.energies, self.vectors = np.linalg.eigh(h.to_matrix())

    def apply(self, amps: np.ndarray, t: float, shift: float = 0.0) -> np.ndarray:
        c = self.vectors.conj().T @ amps
        return self.vectors @ (np.exp(-1j * t * (self.energies - shift)) * c)

    def decompose(self, state) -> tuple[np.ndarray, np.ndarray]:
        c = self.vectors.conj().T @ _amps(state)
        return self.energies, np.abs(c) ** 2


def hamiltonian_qpe(
    state,
    h: PauliSum,
    n_a: int,
    scaling: PhaseScaling | None = None,
    trotter_steps: int | None = 1,
    order: int = 1,
    shots: int | None = None,
    rng_seed: SeedLike = None,
) -> tuple[np.ndarray, np.ndarray, QpeResult]:
    """QPE of U = exp(-2 pi i tau (H - E)); returns (bin energies, histogram, result).

    ``trotter_steps=None`` uses the exact propagator instead of a product formula.
    """
    scaling = scaling or qpe_scaling(h)
    if trotter_steps is None:
        spec = SpectralEvolution(h)
        t = 2 * np.pi * scaling.tau
        unitary: Circuit | ApplyFn = lambda a: spec.apply(a, t, scaling.e_shift)
    else:
        unitary = propagator_unitary(h, scaling.tau, scaling.e_shift, steps=trotter_steps, order=order)
    hist, result = qpe_run(state, unitary, n_a, shots, rng_seed)
    energies = scaling.energy_of(np.arange(1 << n_a) / (1 << n_a))
    return energies, hist, result


def default_symmetry_ancillas(sym: SymmetryOperator) -> int:
    return max(1, int(np.ceil(np.log2(sym.m_omega + 1))))


def symmetry_phase_unitary(sym: SymmetryOperator, n_a: int, trotter_steps: int | None = None) -> ApplyFn:
    """U_S = exp(2 pi i (S - lambda0)/(c 2^n_a)); exact unless ``trotter_steps`` is given."""
    gamma = 2 * np.pi / (sym.c * (1 << n_a))
    glob = np.exp(-1j * gamma * sym.lambda0)
    if trotter_steps is None:
        return lambda a: glob * sym.exp_apply(a, gamma)
    circ = sym.evolution(gamma, trotter_steps)
    return lambda a: glob * evolve(a, circ)


def qpe_project(
    state,
    sym: SymmetryOperator,
    lambda_target: float,
    n_a: int | None = None,
    mode: str = "exact",
    rng_seed: SeedLike = None,
    trotter_steps: int | None = None,
) -> ProjectionOutcome:
    """Project with QPE on U_S; the target sector reads ancilla m' = (lambda' - lambda0)/c."""
    m_target = sym.index_of(lambda_target)
    n_a = default_symmetry_ancillas(sym) if n_a is None else n_a
    if (1 << n_a) < sym.m_omega + 1:
        raise ValidationError("too few ancillas to resolve the symmetry spectrum")
    joint = qpe_joint_state(state, symmetry_phase_unitary(sym, n_a, trotter_steps), n_a)
    probs = np.sum(np.abs(joint) ** 2, axis=1)
    p = float(probs[m_target])
    if mode == "exact":
        if p < 1e-14:
            raise EmptySectorError("state has no weight in the target sector")
        return ProjectionOutcome(Statevector(joint[m_target], normalize=True), True, m_target, p, rounds=1)
    if mode != "sample":
        raise ValidationError("mode must be 'exact' or 'sample'")
    rng = as_generator(rng_seed)
    m = int(rng.choice(len(probs), p=probs / probs.sum()))
    accepted = m == m_target
    out = Statevector(joint[m], normalize=True)
    return ProjectionOutcome(out if accepted else None, accepted, m, p, rounds=1)


# ---------------------------------------------------------------------------
# iterative QPE projection
# ---------------------------------------------------------------------------


def iqpe_rounds(sym: SymmetryOperator, lambda_target: float) -> int:
    """floor(log2 max(m', m_omega - m')) + 1 (zero when the lattice has one point)."""
    m = sym.index_of(lambda_target)
    spread = max(m, sym.m_omega - m)
    return 0 if spread == 0 else int(np.floor(np.log2(spread))) + 1


def hadamard_round(amps: np.ndarray, apply_v: ApplyFn, ancilla_phase: float) -> tuple[np.ndarray, np.ndarray]:
    """Ancilla branches (|0>, |1>) after H, controlled V, phase, H on a |0> ancilla."""
    v = np.exp(1j * ancilla_phase) * apply_v(amps)
    return 0.5 * (amps + v), 0.5 * (amps - v)


def iqpe_round_circuit(v: Circuit, ancilla_phase: float) -> Circuit:
    """Gate-level version of one round, ancilla on qubit n."""
    n = v.n_qubits
    circ = Circuit(n + 1)
    circ.append(h(n))
    circ.extend(v.controlled(n, n_qubits=n + 1))
    circ.append(phase(n, ancilla_phase))
    circ.append(h(n))
    return circ


def _v_apply(sym: SymmetryOperator, gamma: float, trotter_steps: int | None) -> ApplyFn:
    if trotter_steps is None:
        return lambda a: sym.exp_apply(a, gamma)
    circ = sym.evolution(gamma, trotter_steps)
    return lambda a: evolve(a, circ)


def iqpe_project(
    state,
    sym: SymmetryOperator,
    lambda_target: float,
    mode: str = "exact",
    rng_seed: SeedLike = None,
    rounds: int | None = None,
    max_attempts: int = 1000,
    trotter_steps: int | None = None,
) -> ProjectionOutcome:
    """Iterative projection: round k uses phi_k = pi/2^k, V = exp(i phi_k S/c) and
    ancilla phase -phi_k lambda'/c, keeping the ancilla-0 branch.

    Exact mode multiplies the per-round ancilla-0 probabilities. Sample mode
    measures each round and restarts from the input on a 1 outcome.
    """
    n_rounds = iqpe_rounds(sym, lambda_target) if rounds is None else rounds
    psi0 = _amps(state)
    c = sym.c
    ops = []
    for k in range(n_rounds):
        phi = np.pi / 2**k
        ops.append((_v_apply(sym, phi / c, trotter_steps), -phi * lambda_target / c))

    if mode == "exact":
        cur, total, history = psi0, 1.0, []
        for apply_v, ph in ops:
            b0, _ = hadamard_round(cur, apply_v, ph)
            p0 = float(np.vdot(b0, b0).real)
            if p0 < 1e-14:
                raise EmptySectorError("state has no weight in the target sector")
            total *= p0
            history.append(total)
            cur = b0 / np.sqrt(p0)
        return ProjectionOutcome(Statevector(cur, normalize=True), True, "0" * n_rounds, total, 1, n_rounds, history)

    if mode != "sample":
        raise ValidationError("mode must be 'exact' or 'sample'")
    rng = as_generator(rng_seed)
    p_total = Projector(sym, lambda_target).probability(psi0) if n_rounds else 1.0
    for attempt in range(1, max_attempts + 1):
        cur, ok = psi0, True
        for apply_v, ph in ops:
            b0, _ = hadamard_round(cur, apply_v, ph)
            p0 = float(np.vdot(b0, b0).real)
            if rng.random() >= p0:
                ok = False
                break
            cur = b0 / np.sqrt(p0)
        if ok:
            return ProjectionOutcome(Statevector(cur, normalize=True), True, "0" * n_rounds, p_total, attempt, n_rounds)
    return ProjectionOutcome(None, False, None, p_total, max_attempts, n_rounds)


# ---------------------------------------------------------------------------
# Rodeo
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class RodeoConfig:
    """Rodeo settings. ``fixed`` uses tau_k = tau/2^(k-1) with
    tau = pi 2^(n_r-2)/|e_up - e_low|; ``gaussian`` draws tau_k ~ Normal(0, sigma^2)."""

    n_r: int = 3
    mode: str = "gaussian"
    sigma: float = 1.0
    e_low: float | None = None
    e_up: float | None = None
    target: float = 0.0

    def __post_init__(self):
        if self.n_r < 1:
            raise ValidationError("n_r must be at least 1")
        if self.mode not in ("fixed", "gaussian"):
            raise ValidationError("mode must be 'fixed' or 'gaussian'")
        if self.mode == "gaussian" and self.sigma <= 0:
            raise ValidationError("sigma must be positive")
        if self.mode == "fixed" and (self.e_low is None or self.e_up is None or self.e_low == self.e_up):
            raise ValidationError("fixed-time mode needs distinct e_low and e_up")

    def fixed_times(self) -> np.ndarray:
        tau = np.pi * 2 ** (self.n_r - 2) / abs(self.e_up - self.e_low)
        return tau / 2.0 ** np.arange(self.n_r)

    def draw_times(self, rng: np.random.Generator) -> np.ndarray:
        if self.mode == "fixed":
            return self.fixed_times()
        return rng.normal(0.0, self.sigma, self.n_r)


def symmetry_rodeo_config(sym: SymmetryOperator, lambda_target: float, n_r: int | None = None) -> RodeoConfig:
    """Fixed-time settings that filter the integer lattice of S/c exactly.

    With |e_up - e_low| = 2^(n_r-2) the times are pi, pi/2, ..., which zero
    every lattice offset 0 < |d| < 2^n_r.
    """
    n_r = iqpe_rounds(sym, lambda_target) if n_r is None else n_r
    n_r = max(n_r, 1)
    m = sym.index_of(lambda_target)
    return RodeoConfig(n_r, "fixed", e_low=0.0, e_up=2.0 ** (n_r - 2), target=float(m))


class _Generator:
    """exp(-i tau (G - E)) on amplitudes, for a symmetry (in units of c) or a Hamiltonian."""

    def __init__(self, generator: SymmetryOperator | PauliSum):
        if isinstance(generator, SymmetryOperator):
            self.sym = generator
            vals, vecs = generator.eigen
            self.values = (vals - generator.lambda0) / generator.c
            self.vectors = vecs
        else:
            self.sym = None
            self.values, self.vectors = np.linalg.eigh(generator.to_matrix())

    def coefficients(self, amps: np.ndarray) -> np.ndarray:
        return amps if self.vectors is None else self.vectors.conj().T @ amps

    def back(self, coeffs: np.ndarray) -> np.ndarray:
        return coeffs if self.vectors is None else self.vectors @ coeffs


def rodeo_probability(values: np.ndarray, weights: np.ndarray, energy, sigma: float, n_r: int) -> np.ndarray:
    """Gaussian-averaged survival sum_j w_j ((1 + exp(-(E_j - E)^2 sigma^2/2))/2)^n_r."""
    e = np.atleast_1d(np.asarray(energy, dtype=float))
    d = values[None, :] - e[:, None]
    factor = (0.5 * (1 + np.exp(-0.5 * (d * sigma) ** 2))) ** n_r
    return factor @ weights


def rodeo(
    state,
    generator: SymmetryOperator | PauliSum,
    config: RodeoConfig,
    mode: str = "exact",
    rng_seed: SeedLike = None,
    times: Sequence[float] | None = None,
) -> ProjectionOutcome:
    """Apply n_r rounds of the Rodeo filter and keep the all-zero ancilla branch.

    For a symmetry the generator is (S - lambda0)/c and ``config.target`` is
    a lattice index. Exact mode returns the filtered branch and its
    probability for the given (or drawn) times; sample mode measures each
    ancilla and rejects on a 1.
    """
    gen = _Generator(generator)
    rng = as_generator(rng_seed)
    taus = np.asarray(times, dtype=float) if times is not None else config.draw_times(rng)
    coeffs = gen.coefficients(_amps(state))
    d = gen.values - config.target
    total, history = 1.0, []
    for tau in taus:
        branch = 0.5 * (1 + np.exp(-1j * d * tau)) * coeffs
        p0 = float(np.vdot(branch, branch).real)
        if mode == "sample":
            if rng.random() >= p0:
                return ProjectionOutcome(None, False, None, total * p0, 1, len(taus), history)
        elif mode != "exact":
            raise ValidationError("mode must be 'exact' or 'sample'")
        if p0 < 1e-300:
            raise EmptySectorError("filtered branch vanished")
        total *= p0
        history.append(total)
        coeffs = branch / np.sqrt(p0)
    return ProjectionOutcome(Statevector(gen.back(coeffs), normalize=True), True, "0" * len(taus), total, 1, len(taus), history)


def rodeo_scan(
    state,
    generator: SymmetryOperator | PauliSum,
    energies: Sequence[float],
    sigma: float,
    n_r: int = 3,
    draws: int | None = None,
    rng_seed: SeedLike = None,
) -> tuple[np.ndarray, np.ndarray | None]:
    """p_{0^n_r}(E) on a grid.

    Without ``draws`` the Gaussian-marginalized closed form is returned.
    With ``draws`` each grid point averages exact survival probabilities over
    independent time draws; the second return value is the standard error.
    """
    gen = _Generator(generator)
    weights = np.abs(gen.coefficients(_amps(state))) ** 2
    e = np.asarray(energies, dtype=float)
    if draws is None:
        return rodeo_probability(gen.values, weights, e, sigma, n_r), None
    rng = as_generator(rng_seed)
    samples = np.empty((draws, e.size))
    for r in range(draws):
        taus = rng.normal(0.0, sigma, (e.size, n_r))
        d = gen.values[None, None, :] - e[:, None, None]
        factor = np.prod(np.cos(0.5 * d * taus[:, :, None]) ** 2, axis=1)
        samples[r] = factor @ weights
    return samples.mean(axis=0), samples.std(axis=0, ddof=1) / np.sqrt(draws)
