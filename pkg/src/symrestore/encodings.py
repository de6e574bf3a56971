"""Fermion-to-qubit mappings: Jordan-Wigner, parity and Bravyi-Kitaev."""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache, reduce
from typing import Sequence

import numpy as np

from .errors import ValidationError
from .pauli import PauliSum

SCHEMES = ("jw", "parity", "bk")


def _scheme(name: str) -> str:
    key = name.lower().replace("-", "").replace("_", "")
    aliases = {"jw": "jw", "jordanwigner": "jw", "parity": "parity", "bk": "bk", "bravyikitaev": "bk"}
    if key not in aliases:
        raise ValidationError(f"unknown encoding scheme {name!r}")
    return aliases[key]


@dataclass(frozen=True)
class FermionTerm:
    """Product of ladder operators applied right-to-left as written, times ``coeff``.

    ``ops`` lists ``(mode, dagger)`` pairs in written order, so
    ``[(2, True), (0, False)]`` is ``c_2^dagger c_0``.
    """

    ops: tuple[tuple[int, bool], ...]
    coeff: complex = 1.0

    def __post_init__(self):
        object.__setattr__(self, "ops", tuple((int(m), bool(d)) for m, d in self.ops))

    def adjoint(self) -> "FermionTerm":
        return FermionTerm(tuple((m, not d) for m, d in reversed(self.ops)), np.conj(self.coeff))

    @property
    def max_mode(self) -> int:
        return max((m for m, _ in self.ops), default=-1)


# ---------------------------------------------------------------------------
# binary transformation matrices
# ---------------------------------------------------------------------------


def parity_matrix(n: int) -> np.ndarray:
    """Lower-triangular all-ones matrix: qubit i stores the parity of modes <= i."""
    return np.tril(np.ones((n, n), dtype=np.uint8))


def bk_matrix(n: int) -> np.ndarray:
    """Bravyi-Kitaev matrix beta_n: top-left block of the next power-of-two recursion."""
    if n < 1:
        raise ValidationError("n must be positive")
    beta = np.ones((1, 1), dtype=np.uint8)
    while beta.shape[0] < n:
        m = beta.shape[0]
        nxt = np.zeros((2 * m, 2 * m), dtype=np.uint8)
        nxt[:m, :m] = beta
        nxt[m:, m:] = beta
        nxt[-1, :m] = 1
        beta = nxt
    return beta[:n, :n].copy()


def gf2_inverse(mat: np.ndarray) -> np.ndarray:
    """Inverse over GF(2) by Gauss-Jordan elimination."""
    a = np.array(mat, dtype=np.uint8) % 2
    n = a.shape[0]
    aug = np.concatenate([a, np.eye(n, dtype=np.uint8)], axis=1)
    for col in range(n):
        pivots = np.nonzero(aug[col:, col])[0]
        if not pivots.size:
            raise ValidationError("matrix is singular over GF(2)")
        p = col + pivots[0]
        if p != col:
            aug[[col, p]] = aug[[p, col]]
        for r in range(n):
            if r != col and aug[r, col]:
                aug[r] ^= aug[col]
    return aug[:, n:]


def encoding_matrix(scheme: str, n: int) -> np.ndarray:
    scheme = _scheme(scheme)
    if scheme == "jw":
        return np.eye(n, dtype=np.uint8)
    if scheme == "parity":
        return parity_matrix(n)
    return bk_matrix(n)


def encode_occupations(bits: Sequence[int], scheme: str) -> np.ndarray:
    """Map occupation numbers (index = mode) to qubit values (index = qubit)."""
    b = np.asarray(bits, dtype=np.uint8)
    return (encoding_matrix(scheme, len(b)).astype(np.int64) @ b) % 2


def decode_qubits(qubits: Sequence[int], scheme: str) -> np.ndarray:
    q = np.asarray(qubits, dtype=np.uint8)
    inv = gf2_inverse(encoding_matrix(scheme, len(q)))
    return (inv.astype(np.int64) @ q) % 2


def basis_permutation(scheme: str, n: int) -> np.ndarray:
    """perm[k] = qubit-basis index holding Fock state k (bit j of k = occupation of mode j)."""
    mat = encoding_matrix(scheme, n).astype(np.int64)
    k = np.arange(1 << n)
    occ = (k[:, None] >> np.arange(n)) & 1
    qub = (occ @ mat.T) % 2
    return qub @ (1 << np.arange(n))


# ---------------------------------------------------------------------------
# Bravyi-Kitaev sets
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class BkSets:
    n: int
    update: tuple[frozenset, ...]
    parity: tuple[frozenset, ...]
    flip: tuple[frozenset, ...]

    @property
    def remainder(self) -> tuple[frozenset, ...]:
        return tuple(p - f for p, f in zip(self.parity, self.flip))

    @property
    def rho(self) -> tuple[frozenset, ...]:
        return tuple(self.parity[i] if i % 2 == 0 else self.remainder[i] for i in range(self.n))


@lru_cache(maxsize=None)
def bk_sets(n: int) -> BkSets:
    """Update, parity and flip sets read off beta_n, pi_n beta_n^-1 and beta_n^-1."""
    beta = bk_matrix(n)
    beta_inv = gf2_inverse(beta)
    pi = (parity_matrix(n) - np.eye(n, dtype=np.uint8)) % 2
    pi_beta_inv = (pi.astype(np.int64) @ beta_inv) % 2
    update = tuple(frozenset(int(i) for i in range(j + 1, n) if beta[i, j]) for j in range(n))
    parity = tuple(frozenset(int(j) for j in range(i) if pi_beta_inv[i, j]) for i in range(n))
    flip = tuple(frozenset(int(j) for j in range(i) if beta_inv[i, j]) for i in range(n))
    return BkSets(n, update, parity, flip)


# ---------------------------------------------------------------------------
# operator encodings
# ---------------------------------------------------------------------------


def _string(n: int, ops: dict[int, str]) -> PauliSum:
    return PauliSum.from_ops(ops, n)


def ladder_operator(mode: int, dagger: bool, scheme: str, n: int) -> PauliSum:
    """Encoded c_mode^dagger (dagger=True) or c_mode."""
    scheme = _scheme(scheme)
    if not 0 <= mode < n:
        raise ValidationError(f"mode {mode} outside {n} modes")
    sign = -1j if dagger else 1j
    if scheme == "jw":
        tail = {q: "Z" for q in range(mode)}
        return 0.5 * (_string(n, {**tail, mode: "X"}) + sign * _string(n, {**tail, mode: "Y"}))
    if scheme == "parity":
        up = {q: "X" for q in range(mode + 1, n)}
        xpart = {**up, mode: "X"}
        if mode > 0:
            xpart[mode - 1] = "Z"
        return 0.5 * (_string(n, xpart) + sign * _string(n, {**up, mode: "Y"}))
    sets = bk_sets(n)
    up = {q: "X" for q in sets.update[mode]}
    xpart = {**up, mode: "X", **{q: "Z" for q in sets.parity[mode]}}
    ypart = {**up, mode: "Y", **{q: "Z" for q in sets.rho[mode]}}
    return 0.5 * (_string(n, xpart) + sign * _string(n, ypart))


def encode_operator(term: FermionTerm, scheme: str, n: int) -> PauliSum:
    """Encode a product of ladder operators; factors are multiplied in written order."""
    if term.max_mode >= n:
        raise ValidationError(f"term uses mode {term.max_mode} but only {n} modes exist")
    factors = [ladder_operator(m, d, scheme, n) for m, d in term.ops]
    out = reduce(lambda a, b: a * b, factors, PauliSum.identity(n))
    return out * term.coeff


def encode_terms(terms: Sequence[FermionTerm], scheme: str, n: int) -> PauliSum:
    total = PauliSum.zero(n)
    for t in terms:
        total = total + encode_operator(t, scheme, n)
    return total


def number_op(mode: int) -> FermionTerm:
    return FermionTerm(((mode, True), (mode, False)))


def hopping(a: int, b: int, coeff: complex = 1.0) -> list[FermionTerm]:
    """coeff * (c_a^dagger c_b + c_b^dagger c_a)."""
    return [FermionTerm(((a, True), (b, False)), coeff), FermionTerm(((b, True), (a, False)), np.conj(coeff))]
