"""Symmetry operators with integer-lattice spectra and their exact projectors."""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property
from typing import Iterator

import numpy as np

from .errors import EmptySectorError, ValidationError
from .pauli import PauliString, PauliSum, single
from .statevector import Circuit, phase, rz, rzz, xx_plus_yy
from .trotter import TrotterPlan, commuting_groups, pauli_rotation, trotter_circuit

KINDS = ("number", "parity", "sz", "s2", "custom")
LATTICE_TOL = 1e-9


@dataclass(eq=False)
class SymmetryOperator:
    """Hermitian operator whose eigenvalues are lambda0 + c * m with m in {0..m_omega}."""

    op: PauliSum
    lambda0: float
    c: float
    m_omega: int
    kind: str = "custom"

    def __post_init__(self):
        if self.c <= 0:
            raise ValidationError("spacing c must be positive")
        if self.m_omega < 0:
            raise ValidationError("m_omega must be nonnegative")
        if not self.op.is_hermitian(1e-12):
            raise ValidationError("symmetry operator must be Hermitian")
        self.kind = self.kind.lower()
        if self.kind not in KINDS:
            raise ValidationError(f"unknown symmetry kind {self.kind!r}")

    @property
    def n(self) -> int:
        return self.op.n

    @property
    def is_diagonal(self) -> bool:
        return self.op.is_diagonal()

    def index_of(self, value: float) -> int:
        """Lattice index m = (value - lambda0)/c; raises when off the lattice."""
        m = (value - self.lambda0) / self.c
        k = int(round(m))
        if abs(m - k) > LATTICE_TOL or not 0 <= k <= self.m_omega:
            raise ValidationError(f"eigenvalue {value} is not on the lattice of this operator")
        return k

    def value_of(self, index: int) -> float:
        return self.lambda0 + self.c * index

    @cached_property
    def eigen(self) -> tuple[np.ndarray, np.ndarray | None]:
        """(eigenvalues, eigenvectors); eigenvectors are None for diagonal operators."""
        if self.is_diagonal:
            return self.op.diagonal().real, None
        vals, vecs = np.linalg.eigh(self.op.to_matrix())
        return vals, vecs

    def lattice_indices(self) -> np.ndarray:
        vals = self.eigen[0]
        return np.rint((vals - self.lambda0) / self.c).astype(int)

    def check_lattice(self) -> bool:
        vals = self.eigen[0]
        m = (vals - self.lambda0) / self.c
        return bool(np.all(np.abs(m - np.rint(m)) < LATTICE_TOL) and m.min() > -LATTICE_TOL and m.max() < self.m_omega + LATTICE_TOL)

    def spectral_apply(self, amps: np.ndarray, weights_of) -> np.ndarray:
        """f(S)|psi> where ``weights_of`` maps eigenvalues to f(eigenvalues)."""
        vals, vecs = self.eigen
        amps = np.asarray(amps, dtype=complex)
        if vecs is None:
            return weights_of(vals) * amps
        return vecs @ (weights_of(vals) * (vecs.conj().T @ amps))

    def exp_apply(self, amps: np.ndarray, gamma: float) -> np.ndarray:
        """exp(i gamma S)|psi> without Trotter error."""
        return self.spectral_apply(amps, lambda v: np.exp(1j * gamma * v))

    def evolution(self, gamma: float, trotter_steps: int = 1) -> Circuit:
        return symmetry_evolution(self, gamma, trotter_steps)


def _number_op(n: int) -> PauliSum:
    return 0.5 * (n * PauliSum.identity(n) - sum((single(n, q, "Z") for q in range(n)), PauliSum.zero(n)))


def total_spin_squared(n: int) -> PauliSum:
    op = PauliSum.identity(n, 0.75 * n)
    for l in range(n):
        for j in range(l):
            for sym in "XYZ":
                op = op + PauliSum.from_ops({j: sym, l: sym}, n, 0.5)
    return op


def symmetry_operator(kind: str, n: int) -> SymmetryOperator:
    """Particle number, parity (Z on every qubit), S_z = sum Z/2, or total spin S^2."""
    if n < 1:
        raise ValidationError("n must be at least 1")
    kind = kind.lower()
    if kind in ("number", "n"):
        return SymmetryOperator(_number_op(n), 0.0, 1.0, n, "number")
    if kind == "parity":
        return SymmetryOperator(PauliSum.from_string(PauliString(n, 0, (1 << n) - 1)), -1.0, 2.0, 1, "parity")
    if kind == "sz":
        op = sum((single(n, q, "Z", 0.5) for q in range(n)), PauliSum.zero(n))
        return SymmetryOperator(op, -n / 2, 1.0, n, "sz")
    if kind in ("s2", "spin"):
        lam0 = 0.0 if n % 2 == 0 else 0.75
        s_max = n / 2
        return SymmetryOperator(total_spin_squared(n), lam0, 1.0, int(round(s_max * (s_max + 1) - lam0)), "s2")
    raise ValidationError(f"unknown symmetry kind {kind!r}")


def custom_symmetry(op: PauliSum, lambda0: float, c: float, m_omega: int, validate: bool = True) -> SymmetryOperator:
    sym = SymmetryOperator(op, lambda0, c, m_omega, "custom")
    if validate and not sym.check_lattice():
        raise ValidationError("operator spectrum is not on the declared lattice")
    return sym


def symmetry_evolution(sym: SymmetryOperator, gamma: float, trotter_steps: int = 1) -> Circuit:
    """Circuit for exp(i gamma S).

    Number, parity and S_z are exact. For S^2 the constant and ZZ parts are
    exact and the XX+YY part is split into ``trotter_steps`` symmetric
    layers (the two parts commute, so only the XX+YY layer carries Trotter
    error).
    """
    n = sym.n
    circ = Circuit(n)
    if sym.kind == "number":
        for q in range(n):
            circ.append(phase(q, gamma))
        return circ
    if sym.kind == "parity":
        return pauli_rotation(PauliString(n, 0, (1 << n) - 1), -2 * gamma)
    if sym.kind == "sz":
        for q in range(n):
            circ.append(rz(q, -gamma))
        return circ
    if sym.kind == "s2":
        if trotter_steps < 1:
            raise ValidationError("trotter_steps must be at least 1")
        circ.add_phase(0.75 * n * gamma)
        pairs = [(j, l) for l in range(n) for j in range(l)]
        for j, l in pairs:
            circ.append(rzz(j, l, -gamma))
        half = -gamma / (2 * trotter_steps)
        forward = [xx_plus_yy(j, l, half) for j, l in pairs]
        layer = Circuit(n, forward + forward[::-1])
        return circ.extend(layer.power(trotter_steps))
    return trotter_circuit(commuting_groups(-gamma * sym.op), TrotterPlan(1, trotter_steps, 1.0))


# ---------------------------------------------------------------------------
# exact projector
# ---------------------------------------------------------------------------


@dataclass(eq=False)
class Projector:
    """P = sum_k alpha_k exp(i phi_k S) onto the eigenvalue ``target`` of S.

    alpha_k = exp(-i phi_k target)/(M+1), phi_k = 2 pi k/(c (M+1)), M = m_omega.
    Numerically the sum collapses to an indicator on the spectrum of S.
    """

    symmetry: SymmetryOperator
    target: float

    def __post_init__(self):
        self.index = self.symmetry.index_of(self.target)

    @property
    def n(self) -> int:
        return self.symmetry.n

    @property
    def size(self) -> int:
        return self.symmetry.m_omega + 1

    def terms(self) -> Iterator[tuple[complex, float]]:
        """(alpha_k, phi_k) pairs of the unitary expansion."""
        m1, c = self.size, self.symmetry.c
        for k in range(m1):
            phi = 2 * np.pi * k / (c * m1)
            yield np.exp(-1j * phi * self.target) / m1, phi

    def weights(self, eigenvalues: np.ndarray) -> np.ndarray:
        return (np.abs(np.asarray(eigenvalues) - self.target) < LATTICE_TOL * max(1.0, self.symmetry.c)).astype(float)

    def expansion_weights(self, eigenvalues: np.ndarray) -> np.ndarray:
        """sum_k alpha_k exp(i phi_k lambda): the projector evaluated through its expansion."""
        lam = np.asarray(eigenvalues, dtype=float)
        return sum(a * np.exp(1j * phi * lam) for a, phi in self.terms())

    def apply(self, amps) -> np.ndarray:
        amps = getattr(amps, "amplitudes", amps)
        return self.symmetry.spectral_apply(amps, self.weights)

    def probability(self, amps) -> float:
        """<psi|P|psi>."""
        out = self.apply(amps)
        return float(np.vdot(out, out).real)

    def project(self, amps) -> np.ndarray:
        """Normalized P|psi>; raises when the sector is empty."""
        out = self.apply(amps)
        norm = np.linalg.norm(out)
        if norm < 1e-12:
            raise EmptySectorError("state has no weight in the target sector")
        return out / norm

    def matrix(self) -> np.ndarray:
        return np.column_stack([self.apply(col) for col in np.eye(1 << self.n, dtype=complex)])

    def expectation(self, amps, observable: PauliSum | None = None) -> complex:
        """<psi|A P|psi> (A defaults to the identity)."""
        amps = np.asarray(getattr(amps, "amplitudes", amps), dtype=complex)
        p_psi = self.apply(amps)
        if observable is None:
            return complex(np.vdot(amps, p_psi))
        return complex(np.vdot(amps, observable.apply(p_psi)))

    def projected_expectation(self, amps, observable: PauliSum) -> float:
        """<A P>/<P>."""
        denom = self.probability(amps)
        if denom < 1e-12:
            raise EmptySectorError("state has no weight in the target sector")
        return float(self.expectation(amps, observable).real / denom)


def exact_projector(symmetry: SymmetryOperator, lambda_target: float) -> Projector:
    return Projector(symmetry, lambda_target)


@dataclass(eq=False)
class ProductProjector:
    """Product of commuting projectors, e.g. onto a joint (S^2, S_z) sector."""

    parts: tuple[Projector, ...]

    @property
    def n(self) -> int:
        return self.parts[0].n

    def apply(self, amps) -> np.ndarray:
        out = np.asarray(getattr(amps, "amplitudes", amps), dtype=complex)
        for p in self.parts:
            out = p.apply(out)
        return out

    def probability(self, amps) -> float:
        out = self.apply(amps)
        return float(np.vdot(out, out).real)

    def project(self, amps) -> np.ndarray:
        out = self.apply(amps)
        norm = np.linalg.norm(out)
        if norm < 1e-12:
            raise EmptySectorError("state has no weight in the target sector")
        return out / norm


def spin_projector(n: int, s: float, m: float) -> ProductProjector:
    """Projector onto total spin s and projection m."""
    if abs(m) > s + 1e-12 or s > n / 2 + 1e-12 or abs((n / 2 - s) - round(n / 2 - s)) > 1e-12:
        raise ValidationError(f"(s, m) = ({s}, {m}) is not a valid {n}-qubit spin sector")
    if abs((s - m) - round(s - m)) > 1e-12:
        raise ValidationError("s - m must be an integer")
    return ProductProjector((Projector(symmetry_operator("s2", n), s * (s + 1)), Projector(symmetry_operator("sz", n), m)))
