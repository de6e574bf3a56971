"""Product-formula circuits for e^{-iHt} and the QPE propagator scaling."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np
import scipy.linalg as sla

from .errors import ValidationError
from .pauli import PauliString, PauliSum
from .statevector import Circuit, cnot, h, rz, rzz, sdg, xx_plus_yy

COEFF_TOL = 1e-14


@dataclass(frozen=True)
class TrotterPlan:
    order: int = 1
    steps: int = 1
    time: float = 1.0

    def __post_init__(self):
        if self.order not in (1, 2):
            raise ValidationError("Trotter order must be 1 or 2")
        if self.steps < 1:
            raise ValidationError("Trotter steps must be at least 1")

    @property
    def dt(self) -> float:
        return self.time / self.steps


def _key_string(n: int, key: tuple[int, int]) -> PauliString:
    return PauliString(n, key[0], key[1])


def pauli_rotation(p: PauliString, theta: float, n: int | None = None) -> Circuit:
    """Circuit for exp(-i theta/2 P) with P a Hermitian Pauli string (phase ignored).

    Uses a basis change onto Z, a CNOT ladder collecting parity on the highest
    support qubit, and one Rz.
    """
    n = p.n if n is None else n
    circ = Circuit(n)
    support = p.support
    if not support:
        return circ.add_phase(-theta / 2)
    pre = Circuit(n)
    for q in support:
        sym = p.symbol(q)
        if sym == "X":
            pre.append(h(q))
        elif sym == "Y":
            pre.append(sdg(q))
            pre.append(h(q))
    ladder = [cnot(a, b) for a, b in zip(support[:-1], support[1:])]
    circ.extend(pre)
    circ.extend(ladder)
    circ.append(rz(support[-1], theta))
    circ.extend(reversed(ladder))
    circ.extend(pre.inverse())
    return circ


def _xx_yy_pairs(terms: dict) -> tuple[list[tuple[int, int, float]], dict]:
    """Pull out XX+YY pairs with equal real weight; return them and the leftover terms."""
    rest = dict(terms)
    pairs = []
    for (x, z), w in terms.items():
        if (x, z) not in rest or bin(x).count("1") != 2 or z != 0:
            continue
        ykey = (x, x)
        if ykey in rest and abs(rest[ykey] - w) < 1e-14 and abs(complex(w).imag) < 1e-14:
            a, b = [q for q in range(x.bit_length()) if (x >> q) & 1]
            pairs.append((a, b, float(np.real(w))))
            del rest[(x, z)]
            del rest[ykey]
    return pairs, rest


def group_exponential(group: PauliSum, t: float) -> Circuit:
    """Exact circuit for exp(-i t G) when all terms of G commute.

    Z and ZZ terms map to Rz/Rzz, matched XX+YY pairs to the two-qubit
    exchange gate, identity to a global phase, anything else to a generic
    Pauli rotation.
    """
    if not group.is_hermitian(1e-12):
        raise ValidationError("group must be Hermitian")
    n = group.n
    circ = Circuit(n)
    pairs, rest = _xx_yy_pairs(group.terms)
    for (x, z), w in sorted(rest.items()):
        w = float(np.real(w))
        if abs(w) < COEFF_TOL:
            continue
        p = _key_string(n, (x, z))
        support = p.support
        if x == 0 and len(support) == 0:
            circ.add_phase(-t * w)
        elif x == 0 and len(support) == 1:
            circ.append(rz(support[0], 2 * t * w))
        elif x == 0 and len(support) == 2:
            circ.append(rzz(support[0], support[1], 2 * t * w))
        else:
            circ.extend(pauli_rotation(p, 2 * t * w))
    for a, b, w in pairs:
        circ.append(xx_plus_yy(a, b, 2 * t * w))
    return circ


def check_groups(groups: Sequence[PauliSum]) -> None:
    for i, g in enumerate(groups):
        if not g.terms_commute_pairwise():
            raise ValidationError(f"group {i} contains non-commuting terms")


def commuting_groups(h: PauliSum) -> list[PauliSum]:
    """Diagonal terms first, then a greedy packing of the rest into commuting groups."""
    diag = {k: w for k, w in h.terms.items() if k[0] == 0}
    groups: list[dict] = []
    for key, w in sorted(h.terms.items()):
        if key[0] == 0:
            continue
        p = _key_string(h.n, key)
        for g in groups:
            if all(p.commutes_with(_key_string(h.n, k)) for k in g):
                g[key] = w
                break
        else:
            groups.append({key: w})
    out = [PauliSum(h.n, diag)] if diag else []
    return out + [PauliSum(h.n, g) for g in groups]


def trotter_circuit(groups: Sequence[PauliSum], plan: TrotterPlan, validate: bool = True) -> Circuit:
    """First- or second-order product formula over the ordered groups."""
    if not groups:
        raise ValidationError("need at least one group")
    n = groups[0].n
    if any(g.n != n for g in groups):
        raise ValidationError("groups act on different registers")
    if validate:
        check_groups(groups)
    dt = plan.dt
    step = Circuit(n)
    if plan.order == 1:
        for g in groups:
            step.extend(group_exponential(g, dt))
    else:
        for g in groups[:-1]:
            step.extend(group_exponential(g, dt / 2))
        step.extend(group_exponential(groups[-1], dt))
        for g in reversed(groups[:-1]):
            step.extend(group_exponential(g, dt / 2))
    return step.power(plan.steps)


def exact_propagator(h: PauliSum, t: float) -> np.ndarray:
    """Dense exp(-iHt) (verification oracle)."""
    return sla.expm(-1j * t * h.to_matrix())


# ---------------------------------------------------------------------------
# QPE propagator
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class PhaseScaling:
    """U = exp(-2 pi i tau (H - E)); eigenphase theta_j = -tau (E_j - E) in [0, 1)."""

    tau: float
    e_shift: float

    def phase_of(self, energy):
        return -self.tau * (np.asarray(energy) - self.e_shift)

    def energy_of(self, theta):
        return self.e_shift - np.asarray(theta) / self.tau


def qpe_scaling(h: PauliSum, n_a: int | None = None, spectrum: tuple[float, float] | None = None) -> PhaseScaling:
    """Default scaling uses E = -|H|, tau = -1/(2|H|) with |H| the sum of |weights|.

    With ``spectrum=(E_min, E_max)`` the known-spectrum choice is used:
    E = E_min, tau = -1/(Emax' - E_min) where Emax' = E_max 2^n_a/(2^n_a - 1).
    """
    if spectrum is None:
        norm = h.norm1
        if norm == 0:
            return PhaseScaling(-0.5, 0.0)
        return PhaseScaling(-1 / (2 * norm), -norm)
    if n_a is None or n_a < 1:
        raise ValidationError("known-spectrum scaling needs n_a >= 1")
    e_min, e_max = spectrum
    top = e_max * 2**n_a / (2**n_a - 1)
    if top <= e_min:
        raise ValidationError("known-spectrum scaling needs E_max' > E_min")
    return PhaseScaling(-1 / (top - e_min), e_min)


def propagator_unitary(
    h: PauliSum,
    tau: float | None = None,
    e_shift: float | None = None,
    groups: Sequence[PauliSum] | None = None,
    steps: int = 1,
    order: int = 1,
) -> Circuit:
    """Trotterized circuit for exp(-2 pi i tau (H - E)); defaults from :func:`qpe_scaling`."""
    default = qpe_scaling(h)
    tau = default.tau if tau is None else tau
    e_shift = default.e_shift if e_shift is None else e_shift
    if groups is None:
        groups = commuting_groups(h)
    circ = Circuit(h.n)
    if groups:
        circ = trotter_circuit(groups, TrotterPlan(order, steps, 2 * np.pi * tau))
    return circ.add_phase(2 * np.pi * tau * e_shift)

