"""Linear combination of unitaries: ancilla-conditioned application of sum_k a_k V_k."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from .errors import EmptySectorError, ValidationError
from .oracles import Oracle
from .phase_estimation import ProjectionOutcome
from .rng import SeedLike, as_generator
from .statevector import Circuit, Gate, Statevector, dense_gate, evolve
from .symmetry import Projector

B_CHOICES = ("sqrt_amp", "amp")
E_CHOICES = ("bdag", "hadamard", "ldag")
MAX_ANCILLAS = 6


def _amps(state) -> np.ndarray:
    return np.asarray(getattr(state, "amplitudes", state), dtype=complex)


def unitary_with_first_column(col: np.ndarray) -> np.ndarray:
    """Householder reflection (times a phase) whose first column is the unit vector ``col``."""
    v = np.asarray(col, dtype=complex)
    v = v / np.linalg.norm(v)
    e0 = np.zeros_like(v)
    e0[0] = 1.0
    phase = v[0] / abs(v[0]) if abs(v[0]) > 1e-15 else 1.0
    w = e0 - v / phase
    norm = np.linalg.norm(w)
    if norm < 1e-15:
        return phase * np.eye(v.size, dtype=complex)
    w /= norm
    return phase * (np.eye(v.size, dtype=complex) - 2 * np.outer(w, w.conj()))


@dataclass(eq=False)
class LcuPlan:
    """A = sum_k coefficients[k] V_k realized with n_lcu = ceil(log2 m) ancillas.

    ``b_choice``: ``sqrt_amp`` loads sqrt(a_k) (needs a_k >= 0) and pairs with
    ``e_choice="bdag"``; ``amp`` loads a_k and pairs with ``hadamard`` or ``ldag``.
    ``unitaries`` holds circuits (gate-level path available) or callables.
    """

    coefficients: np.ndarray
    unitaries: Sequence[Circuit | Callable[[np.ndarray], np.ndarray]]
    b_choice: str = "amp"
    e_choice: str = "ldag"
    n_lcu: int = field(init=False)

    def __post_init__(self):
        self.coefficients = np.asarray(self.coefficients, dtype=complex)
        m = self.coefficients.size
        if m == 0 or len(self.unitaries) != m:
            raise ValidationError("need one unitary per nonempty coefficient")
        if np.any(np.abs(self.coefficients) == 0):
            raise ValidationError("coefficients must be nonzero")
        if self.b_choice not in B_CHOICES or self.e_choice not in E_CHOICES:
            raise ValidationError("unknown B or E choice")
        if self.b_choice == "sqrt_amp":
            if np.any(np.abs(self.coefficients.imag) > 1e-14) or np.any(self.coefficients.real < 0):
                raise ValidationError("sqrt_amp loading needs nonnegative real coefficients")
            if self.e_choice != "bdag":
                raise ValidationError("sqrt_amp loading pairs with e_choice='bdag'")
        elif self.e_choice == "bdag":
            raise ValidationError("amp loading pairs with 'hadamard' or 'ldag'")
        self.n_lcu = int(np.ceil(np.log2(m))) if m > 1 else 0
        if self.n_lcu > MAX_ANCILLAS:
            raise ValidationError(f"at most {MAX_ANCILLAS} LCU ancillas are supported")

    @property
    def m(self) -> int:
        return self.coefficients.size

    @property
    def norm_b(self) -> float:
        return float(np.sqrt(np.abs(self.coefficients).sum()))

    @property
    def norm_h(self) -> float:
        return float(np.sqrt((np.abs(self.coefficients) ** 2).sum()))

    def prep_column(self) -> np.ndarray:
        col = np.zeros(1 << self.n_lcu, dtype=complex)
        if self.b_choice == "sqrt_amp":
            col[: self.m] = np.sqrt(self.coefficients.real) / self.norm_b
        else:
            col[: self.m] = self.coefficients / self.norm_h
        return col

    def prep_matrix(self) -> np.ndarray:
        return unitary_with_first_column(self.prep_column())

    def unprep_matrix(self) -> np.ndarray:
        size = 1 << self.n_lcu
        if self.e_choice == "bdag":
            return self.prep_matrix().conj().T
        if self.e_choice == "hadamard":
            k = np.arange(size)
            signs = (-1.0) ** np.bitwise_count(k[:, None] & k[None, :]).astype(int)
            return signs / np.sqrt(size)
        col = np.zeros(size, dtype=complex)
        col[: self.m] = 1 / np.sqrt(self.m)
        return unitary_with_first_column(col).conj().T

    def apply_unitary(self, k: int, amps: np.ndarray) -> np.ndarray:
        u = self.unitaries[k]
        return evolve(amps, u) if isinstance(u, Circuit) else u(amps)

    def operator_apply(self, amps) -> np.ndarray:
        """A|psi> computed directly."""
        psi = _amps(amps)
        return sum(a * self.apply_unitary(k, psi) for k, a in enumerate(self.coefficients))


def lcu_joint_state(state, plan: LcuPlan) -> np.ndarray:
    """Rows indexed by the ancilla value after B, SELECT and E (ancillas above the system)."""
    psi = _amps(state)
    col = plan.prep_column()
    rows = np.zeros((1 << plan.n_lcu, psi.size), dtype=complex)
    for k in range(plan.m):
        rows[k] = col[k] * plan.apply_unitary(k, psi)
    return plan.unprep_matrix() @ rows


def lcu_circuit(plan: LcuPlan, n: int) -> Circuit:
    """Gate-level LCU on n + n_lcu qubits; needs every V_k as a Circuit."""
    if not all(isinstance(u, Circuit) for u in plan.unitaries):
        raise ValidationError("gate-level LCU needs circuit unitaries")
    na = plan.n_lcu
    anc = tuple(range(n, n + na))
    circ = Circuit(n + na)
    if na:
        circ.append(dense_gate(anc, plan.prep_matrix(), "B"))
    for k, u in enumerate(plan.unitaries):
        gates = list(u.gates)
        if u.global_phase % (2 * np.pi):
            gates.append(Gate((0,), np.exp(1j * u.global_phase) * np.eye(2), "gphase"))
        for g in gates:
            for j, q in enumerate(anc):
                g = g.with_control(q, (k >> j) & 1)
            circ.append(g)
    if na:
        circ.append(dense_gate(anc, plan.unprep_matrix(), "E"))
    return circ


def lcu_success_prob(plan: LcuPlan, state) -> float:
    """Closed forms: |A psi|^2/N_B^4, |A psi|^2/(2^n_lcu N_H^2) or |A psi|^2/(m N_H^2)."""
    a_psi = plan.operator_apply(state)
    norm2 = float(np.vdot(a_psi, a_psi).real)
    if plan.e_choice == "bdag":
        return norm2 / plan.norm_b**4
    if plan.e_choice == "hadamard":
        return norm2 / ((1 << plan.n_lcu) * plan.norm_h**2)
    return norm2 / (plan.m * plan.norm_h**2)


def lcu_apply(state, plan: LcuPlan, mode: str = "exact", rng_seed: SeedLike = None) -> ProjectionOutcome:
    """Post-select the all-zero ancilla readout; the kept state is A|psi>/|A psi|."""
    joint = lcu_joint_state(state, plan)
    probs = np.sum(np.abs(joint) ** 2, axis=1)
    p0 = float(probs[0])
    if mode == "exact":
        readout = 0
    elif mode == "sample":
        readout = int(as_generator(rng_seed).choice(probs.size, p=probs / probs.sum()))
    else:
        raise ValidationError("mode must be 'exact' or 'sample'")
    if readout != 0:
        return ProjectionOutcome(None, False, readout, p0, rounds=1)
    if p0 < 1e-14:
        raise EmptySectorError("all-zero ancilla readout has zero probability")
    return ProjectionOutcome(Statevector(joint[0], normalize=True), True, 0, p0, rounds=1)


def lcu_acceptance_frequency(state, plan: LcuPlan, trials: int, rng_seed: SeedLike = None) -> tuple[float, float]:
    """Fraction of simulated ancilla readouts equal to zero over ``trials`` runs, with its stderr."""
    if trials < 1:
        raise ValidationError("trials must be positive")
    joint = lcu_joint_state(state, plan)
    probs = np.sum(np.abs(joint) ** 2, axis=1)
    counts = as_generator(rng_seed).multinomial(trials, probs / probs.sum())
    freq = counts[0] / trials
    return float(freq), float(np.sqrt(max(freq * (1 - freq), 1e-300) / trials))


def _symmetry_plan(pairs: Sequence[tuple[complex, float]], projector: Projector, b_choice: str,
                   e_choice: str, circuits: bool, trotter_steps: int) -> LcuPlan:
    """Unitaries exp(i phi_k S); for sqrt_amp each coefficient phase moves into its unitary."""
    sym = projector.symmetry
    coeffs, units = [], []
    for a, ang in pairs:
        if abs(a) < 1e-15:
            continue
        chi = float(np.angle(a)) if b_choice == "sqrt_amp" else 0.0
        coeffs.append(abs(a) if b_choice == "sqrt_amp" else a)
        if circuits:
            units.append(sym.evolution(ang, trotter_steps).add_phase(chi))
        else:
            units.append(lambda v, ang=ang, chi=chi: np.exp(1j * chi) * sym.exp_apply(v, ang))
    return LcuPlan(np.array(coeffs), units, b_choice, e_choice)


def projector_plan(projector: Projector, b_choice: str = "amp", e_choice: str = "ldag",
                   circuits: bool = False, trotter_steps: int = 1) -> LcuPlan:
    return _symmetry_plan(list(projector.terms()), projector, b_choice, e_choice, circuits, trotter_steps)


def oracle_plan(oracle: Oracle, b_choice: str = "amp", e_choice: str = "ldag",
                circuits: bool = False, trotter_steps: int = 1) -> LcuPlan:
    return _symmetry_plan(oracle.lcu_coefficients(), oracle.projector, b_choice, e_choice, circuits, trotter_steps)


def number_oracle_success(n: int, phi: float, mu: float) -> dict[str, float]:
    """Success probabilities of the particle-number oracle plans (state independent).

    With x = 2n(1 - cos(phi - mu))/(n+1)^2 the coefficients satisfy
    |beta_0|^2 = 1 - x and sum_{k>0} |beta_k| = sqrt(n x), so
    N_B^2 = sqrt(1 - x) + sqrt(n x) and N_H = 1.
    """
    x = 2 * n * (1 - np.cos(phi - mu)) / (n + 1) ** 2
    nb2 = np.sqrt(max(1 - x, 0.0)) + np.sqrt(n * x)
    return {
        "bdag": 1 / nb2**2,
        "hadamard": 1 / 2 ** int(np.ceil(np.log2(n + 1))),
        "ldag": 1 / (n + 1),
    }


def number_projector_success(n: int, p_good: float) -> dict[str, float]:
    """Projector plans: N_B = 1 and N_H^2 = 1/(n+1)."""
    return {
        "bdag": p_good,
        "hadamard": p_good * (n + 1) / 2 ** int(np.ceil(np.log2(n + 1))),
        "ldag": p_good,
    }
