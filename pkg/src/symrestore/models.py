"""Pairing and Fermi-Hubbard Hamiltonians plus the exact-diagonalization oracle."""

from __future__ import annotations

from dataclasses import dataclass, field
from itertools import combinations
from typing import Sequence

import numpy as np
import scipy.linalg as sla

from .encodings import FermionTerm, encode_terms, hopping
from .errors import ValidationError
from .pauli import PauliString, PauliSum, single
from .statevector import Statevector

MAX_DIAG_QUBITS = 14


@dataclass(frozen=True)
class PairingModel:
    """Seniority-zero pairing model: one qubit per doubly degenerate level.

    ``epsilons`` defaults to ``p * delta_e`` for ``p = 1..n_levels``.  With
    ``self_energy_shift`` (the default) each level is raised by ``g/2`` before
    the qubit Hamiltonian is built, compensating the pair self-scattering.
    """

    n_levels: int
    g: float
    a_pairs: int
    epsilons: tuple[float, ...] | None = None
    delta_e: float = 1.0
    self_energy_shift: bool = True

    def __post_init__(self):
        if self.n_levels < 1:
            raise ValidationError("n_levels must be at least 1")
        if not 0 <= self.a_pairs <= self.n_levels:
            raise ValidationError("a_pairs must lie in [0, n_levels]")
        if self.epsilons is not None:
            eps = tuple(float(e) for e in self.epsilons)
            if len(eps) != self.n_levels:
                raise ValidationError("need one level energy per level")
            object.__setattr__(self, "epsilons", eps)

    @property
    def levels(self) -> np.ndarray:
        if self.epsilons is not None:
            return np.array(self.epsilons)
        return self.delta_e * np.arange(1, self.n_levels + 1, dtype=float)

    @property
    def shifted_levels(self) -> np.ndarray:
        return self.levels + (0.5 * self.g if self.self_energy_shift else 0.0)

    @property
    def n_qubits(self) -> int:
        return self.n_levels

    def with_g(self, g: float) -> "PairingModel":
        return PairingModel(self.n_levels, g, self.a_pairs, self.epsilons, self.delta_e, self.self_energy_shift)


@dataclass(frozen=True)
class HubbardModel:
    """Open 1-D Fermi-Hubbard chain; qubits 0..M-1 spin up, M..2M-1 spin down."""

    m_sites: int
    u: float
    j: float
    n_particles: int | None = None

    def __post_init__(self):
        if self.m_sites < 1:
            raise ValidationError("m_sites must be at least 1")
        if self.n_particles is not None and not 0 <= self.n_particles <= 2 * self.m_sites:
            raise ValidationError("n_particles outside [0, 2 M]")

    @property
    def n_qubits(self) -> int:
        return 2 * self.m_sites


# ---------------------------------------------------------------------------
# builders
# ---------------------------------------------------------------------------


def _xx_yy(n: int, p: int, q: int) -> PauliSum:
    return PauliSum.from_ops({p: "X", q: "X"}, n) + PauliSum.from_ops({p: "Y", q: "Y"}, n)


def build_pairing(model: PairingModel) -> PauliSum:
    n = model.n_levels
    h = PauliSum.zero(n)
    for p, e in enumerate(model.shifted_levels):
        h = h + e * (PauliSum.identity(n) - single(n, p, "Z"))
    for p in range(n):
        for q in range(p):
            h = h + (-0.5 * model.g) * _xx_yy(n, p, q)
    return h.real()


def pairing_hf_energy(model: PairingModel) -> float:
    """Energy of the lowest A_p levels filled (twice the shifted level sum)."""
    return float(2 * np.sort(model.shifted_levels)[: model.a_pairs].sum())


def pairing_hf_state(model: PairingModel) -> Statevector:
    order = np.argsort(model.shifted_levels, kind="stable")[: model.a_pairs]
    return Statevector.basis_state(model.n_levels, int(sum(1 << int(p) for p in order)))


def hubbard_bonds(model: HubbardModel) -> list[tuple[int, int]]:
    """Adjacent same-spin qubit pairs; the spin-block boundary is excluded."""
    m = model.m_sites
    bonds = [(a, a + 1) for a in range(m - 1)]
    return bonds + [(a + m, a + m + 1) for a in range(m - 1)]


def hubbard_fermion_terms(model: HubbardModel) -> list[FermionTerm]:
    m = model.m_sites
    terms: list[FermionTerm] = []
    for a, b in hubbard_bonds(model):
        terms += hopping(a, b, -model.j)
    for a in range(m):
        terms.append(FermionTerm(((a, True), (a, False), (a + m, True), (a + m, False)), model.u))
    return terms


def build_hubbard(model: HubbardModel, scheme: str = "jw") -> PauliSum:
    """Hubbard Hamiltonian; the Jordan-Wigner form is written out directly."""
    n, m = model.n_qubits, model.m_sites
    if scheme.lower() not in ("jw", "jordan-wigner", "jordanwigner"):
        return encode_terms(hubbard_fermion_terms(model), scheme, n).real()
    h = PauliSum.zero(n)
    for a, b in hubbard_bonds(model):
        h = h + (-0.5 * model.j) * _xx_yy(n, a, b)
    ident = PauliSum.identity(n)
    for a in range(m):
        h = h + (0.25 * model.u) * ((ident - single(n, a, "Z")) * (ident - single(n, a + m, "Z")))
    return h.real()


# ---------------------------------------------------------------------------
# commuting groups for Trotterization
# ---------------------------------------------------------------------------


def _split(h: PauliSum, keys: Sequence[tuple[int, int]]) -> PauliSum:
    terms = h.terms
    return PauliSum(h.n, {k: terms[k] for k in keys if k in terms})


def _greedy_disjoint(pairs: Sequence[tuple[int, int]]) -> list[list[tuple[int, int]]]:
    groups: list[tuple[set, list]] = []
    for p, q in pairs:
        for used, members in groups:
            if p not in used and q not in used:
                used.update((p, q))
                members.append((p, q))
                break
        else:
            groups.append(({p, q}, [(p, q)]))
    return [members for _used, members in groups]


def _pair_groups(h: PauliSum, pair_groups: list[list[tuple[int, int]]]) -> list[PauliSum]:
    out = []
    for members in pair_groups:
        keys = []
        for p, q in members:
            for sym in ("X", "Y"):
                ps = PauliString.from_ops({p: sym, q: sym}, h.n)
                keys.append((ps.x, ps.z))
        out.append(_split(h, keys))
    return out


def diagonal_part(h: PauliSum) -> PauliSum:
    return _split(h, [k for k in h.terms if k[0] == 0])


def pairing_groups(model: PairingModel) -> list[PauliSum]:
    """All (I-Z) terms first, then XX+YY terms greedily packed on disjoint qubits."""
    h = build_pairing(model)
    pairs = [(q, p) for p in range(model.n_levels) for q in range(p)]
    groups = [diagonal_part(h)] + _pair_groups(h, _greedy_disjoint(pairs))
    return [g for g in groups if len(g)]


def hubbard_groups(model: HubbardModel) -> list[PauliSum]:
    """On-site interaction, then even bonds, then odd bonds (JW form)."""
    h = build_hubbard(model)
    bonds = hubbard_bonds(model)
    m = model.m_sites
    even = [b for b in bonds if (b[0] % m) % 2 == 0]
    odd = [b for b in bonds if (b[0] % m) % 2 == 1]
    groups = [diagonal_part(h)] + _pair_groups(h, [even, odd])
    return [g for g in groups if len(g)]


def term_groups(h: PauliSum) -> list[PauliSum]:
    """Fallback grouping: one term per group (always internally commuting)."""
    return [PauliSum(h.n, {k: w}) for k, w in sorted(h.terms.items())]


# ---------------------------------------------------------------------------
# exact diagonalization oracle
# ---------------------------------------------------------------------------


def exact_diagonalize(h: PauliSum, n: int | None = None, basis: Sequence[int] | None = None):
    """Ascending eigenvalues and eigenvectors of ``h`` (dense Hermitian solve).

    With ``basis`` (computational indices spanning an invariant subspace) the
    solve is restricted to that block; eigenvectors are returned embedded in
    the full space.
    """
    n = h.n if n is None else n
    if n != h.n:
        raise ValidationError("register size does not match the operator")
    if n > MAX_DIAG_QUBITS:
        raise ValidationError(f"dense oracle limited to {MAX_DIAG_QUBITS} qubits")
    if not h.is_hermitian(1e-12):
        raise ValidationError("operator is not Hermitian")
    mat = h.to_sparse()
    if basis is not None:
        idx = np.asarray(basis, dtype=np.int64)
        block = mat[idx][:, idx].toarray()
        vals, small = sla.eigh(block)
        vecs = np.zeros((1 << n, len(idx)), dtype=complex)
        vecs[idx] = small
        return vals, vecs
    dense = mat.toarray()
    if np.allclose(dense.imag, 0):
        vals, vecs = sla.eigh(dense.real)
        return vals, vecs.astype(complex)
    return sla.eigh(dense)


def number_sector(n: int, count: int) -> np.ndarray:
    """Computational indices with exactly ``count`` ones."""
    k = np.arange(1 << n, dtype=np.int64)
    return k[np.bitwise_count(k) == count]


def hubbard_sector(model: HubbardModel, n_up: int, n_down: int) -> np.ndarray:
    m = model.m_sites
    k = np.arange(1 << (2 * m), dtype=np.int64)
    up = np.bitwise_count(k & ((1 << m) - 1))
    down = np.bitwise_count(k >> m)
    return k[(up == n_up) & (down == n_down)]


def sector_dimension(n: int, count: int) -> int:
    return len(number_sector(n, count))


def hubbard_double_occupancy_state(model: HubbardModel, n_doubles: int) -> Statevector:
    """Equal-weight superposition of all determinants with ``n_doubles`` doubly occupied sites."""
    m = model.m_sites
    amps = np.zeros(1 << (2 * m), dtype=complex)
    for sites in combinations(range(m), n_doubles):
        idx = sum((1 << s) | (1 << (s + m)) for s in sites)
        amps[idx] = 1.0
    return Statevector(amps, normalize=True)


@dataclass
class Spectrum:
    """Eigen-decomposition of a state on a Hamiltonian: energies and weights |c_k|^2."""

    energies: np.ndarray
    weights: np.ndarray
    amplitudes: np.ndarray = field(repr=False, default=None)

    def merged(self, tol: float = 1e-9, min_weight: float = 0.0) -> "Spectrum":
        """Combine degenerate levels and drop weights below ``min_weight``."""
        order = np.argsort(self.energies)
        e, w = self.energies[order], self.weights[order]
        out_e, out_w = [], []
        for ei, wi in zip(e, w):
            if out_e and abs(ei - out_e[-1]) <= tol:
                out_w[-1] += wi
            else:
                out_e.append(ei)
                out_w.append(wi)
        out_e, out_w = np.array(out_e), np.array(out_w)
        keep = out_w > min_weight
        return Spectrum(out_e[keep], out_w[keep])


def state_spectrum(state: Statevector | np.ndarray, h: PauliSum, basis: Sequence[int] | None = None) -> Spectrum:
    """Energies E_k and overlaps |<E_k|psi>|^2 from the dense oracle."""
    amps = state.amplitudes if isinstance(state, Statevector) else np.asarray(state, dtype=complex)
    vals, vecs = exact_diagonalize(h, basis=basis)
    c = vecs.conj().T @ amps
    return Spectrum(vals, np.abs(c) ** 2, c)
