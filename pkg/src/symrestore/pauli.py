"""Pauli strings and weighted Pauli sums.

A Pauli string on ``n`` qubits is stored in symplectic form: bit ``q`` of
``x`` (resp. ``z``) is set when the factor on qubit ``q`` contains an X
(resp. Z).  A Y factor sets both bits.  The operator represented by
``(x, z, phase)`` is ``i**phase * prod_q sigma_q`` where each ``sigma_q`` is
one of I, X, Y, Z (Y itself, not XZ).

Text labels print qubit ``n-1`` leftmost, matching the bitstring convention of
:mod:`symrestore.statevector`.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterator, Mapping

import numpy as np
import scipy.sparse as sp

from .errors import ValidationError

PRUNE_TOL = 1e-14

_SYMBOL_BITS = {"I": (0, 0), "X": (1, 0), "Y": (1, 1), "Z": (0, 1)}
_PHASES = (1, 1j, -1, -1j)


def _popcount(v: int) -> int:
    return bin(v).count("1")


@dataclass(frozen=True)
class PauliString:
    n: int
    x: int
    z: int
    phase: int = 0  # power of i

    def __post_init__(self):
        if self.n < 0:
            raise ValidationError("register size must be nonnegative")
        limit = 1 << self.n
        if not (0 <= self.x < limit and 0 <= self.z < limit):
            raise ValidationError("Pauli masks exceed register size")
        object.__setattr__(self, "phase", self.phase % 4)

    @classmethod
    def from_label(cls, label: str, phase: int = 0) -> "PauliString":
        """Build from a label such as ``"XZI"`` (qubit n-1 leftmost)."""
        n = len(label)
        x = z = 0
        for pos, ch in enumerate(label.upper()):
            if ch not in _SYMBOL_BITS:
                raise ValidationError(f"unknown Pauli symbol {ch!r}")
            q = n - 1 - pos
            bx, bz = _SYMBOL_BITS[ch]
            x |= bx << q
            z |= bz << q
        return cls(n, x, z, phase)

    @classmethod
    def from_ops(cls, ops: Mapping[int, str], n: int, phase: int = 0) -> "PauliString":
        """Build from ``{qubit: symbol}``; unspecified qubits carry identity."""
        x = z = 0
        for q, ch in ops.items():
            if not 0 <= q < n:
                raise ValidationError(f"qubit {q} outside register of size {n}")
            bx, bz = _SYMBOL_BITS[ch.upper()]
            x |= bx << q
            z |= bz << q
        return cls(n, x, z, phase)

    @classmethod
    def identity(cls, n: int) -> "PauliString":
        return cls(n, 0, 0)

    def symbol(self, q: int) -> str:
        return "IXZY"[((self.x >> q) & 1) + 2 * ((self.z >> q) & 1)]

    @property
    def label(self) -> str:
        return "".join(self.symbol(q) for q in reversed(range(self.n)))

    @property
    def coefficient(self) -> complex:
        return _PHASES[self.phase]

    @property
    def support(self) -> tuple[int, ...]:
        mask = self.x | self.z
        return tuple(q for q in range(self.n) if (mask >> q) & 1)

    @property
    def weight(self) -> int:
        return _popcount(self.x | self.z)

    def commutes_with(self, other: "PauliString") -> bool:
        return (_popcount(self.x & other.z) + _popcount(self.z & other.x)) % 2 == 0

    def __mul__(self, other: "PauliString") -> "PauliString":
        return pauli_product(self, other)

    def matrix(self) -> np.ndarray:
        return PauliSum.from_string(self).to_matrix()

    def __str__(self) -> str:
        sign = ("", "i", "-", "-i")[self.phase]
        return sign + self.label


def pauli_product(a: PauliString, b: PauliString) -> PauliString:
    """Product ``a @ b`` with the exact phase."""
    if a.n != b.n:
        raise ValidationError(f"length mismatch: {a.n} vs {b.n}")
    x = a.x ^ b.x
    z = a.z ^ b.z
    # i^{y} X^x Z^z form: Y = i X Z; moving Z^{z_a} past X^{x_b} gives (-1)^{|z_a & x_b|}
    ya, yb, y = _popcount(a.x & a.z), _popcount(b.x & b.z), _popcount(x & z)
    phase = a.phase + b.phase + ya + yb - y + 2 * _popcount(a.z & b.x)
    return PauliString(a.n, x, z, phase)


class PauliSum:
    """Weighted sum of Pauli strings, canonicalized by symplectic key."""

    __slots__ = ("n", "_terms", "_cache")

    def __init__(self, n: int, terms: Mapping[tuple[int, int], complex] | None = None):
        self.n = int(n)
        self._terms: dict[tuple[int, int], complex] = {}
        self._cache: dict = {}
        if terms:
            for key, w in terms.items():
                self._add_term(key, complex(w))
            self._prune()

    # construction -------------------------------------------------------
    @classmethod
    def identity(cls, n: int, coeff: complex = 1.0) -> "PauliSum":
        return cls(n, {(0, 0): coeff})

    @classmethod
    def zero(cls, n: int) -> "PauliSum":
        return cls(n)

    @classmethod
    def from_string(cls, p: PauliString, coeff: complex = 1.0) -> "PauliSum":
        return cls(p.n, {(p.x, p.z): coeff * p.coefficient})

    @classmethod
    def from_label(cls, label: str, coeff: complex = 1.0) -> "PauliSum":
        return cls.from_string(PauliString.from_label(label), coeff)

    @classmethod
    def from_ops(cls, ops: Mapping[int, str], n: int, coeff: complex = 1.0) -> "PauliSum":
        return cls.from_string(PauliString.from_ops(ops, n), coeff)

    @classmethod
    def from_terms(cls, n: int, terms: list[tuple[complex, PauliString]]) -> "PauliSum":
        out = cls(n)
        for w, p in terms:
            out._add_term((p.x, p.z), complex(w) * p.coefficient)
        out._prune()
        return out

    def _add_term(self, key: tuple[int, int], w: complex) -> None:
        self._terms[key] = self._terms.get(key, 0.0) + w

    def _prune(self, tol: float = PRUNE_TOL) -> None:
        for key in [k for k, w in self._terms.items() if abs(w) < tol]:
            del self._terms[key]

    # access ---------------------------------------------------------------
    @property
    def terms(self) -> dict[tuple[int, int], complex]:
        return dict(self._terms)

    def items(self) -> Iterator[tuple[PauliString, complex]]:
        for (x, z) in sorted(self._terms):
            yield PauliString(self.n, x, z), self._terms[(x, z)]

    def coefficient(self, p: PauliString | str) -> complex:
        if isinstance(p, str):
            p = PauliString.from_label(p)
        return self._terms.get((p.x, p.z), 0.0) * p.coefficient.conjugate()

    def __len__(self) -> int:
        return len(self._terms)

    def __iter__(self):
        return self.items()

    @property
    def norm1(self) -> float:
        """Sum of absolute weights, an upper bound on the spectral radius."""
        return float(sum(abs(w) for w in self._terms.values()))

    # algebra --------------------------------------------------------------
    def _check(self, other: "PauliSum") -> None:
        if other.n != self.n:
            raise ValidationError(f"register mismatch: {self.n} vs {other.n}")

    def copy(self) -> "PauliSum":
        return PauliSum(self.n, self._terms)

    def __add__(self, other):
        if isinstance(other, (int, float, complex, np.number)):
            other = PauliSum.identity(self.n, other)
        if not isinstance(other, PauliSum):
            return NotImplemented
        self._check(other)
        out = PauliSum(self.n, self._terms)
        for key, w in other._terms.items():
            out._add_term(key, w)
        out._prune()
        return out

    __radd__ = __add__

    def __neg__(self) -> "PauliSum":
        return PauliSum(self.n, {k: -w for k, w in self._terms.items()})

    def __sub__(self, other):
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if isinstance(other, (int, float, complex, np.number)):
            return PauliSum(self.n, {k: other * w for k, w in self._terms.items()})
        if not isinstance(other, PauliSum):
            return NotImplemented
        self._check(other)
        out = PauliSum(self.n)
        for (xa, za), wa in self._terms.items():
            pa = PauliString(self.n, xa, za)
            for (xb, zb), wb in other._terms.items():
                prod = pauli_product(pa, PauliString(self.n, xb, zb))
                out._add_term((prod.x, prod.z), wa * wb * prod.coefficient)
        out._prune()
        return out

    def __rmul__(self, other):
        if isinstance(other, (int, float, complex, np.number)):
            return self * other
        return NotImplemented

    def __truediv__(self, other):
        return self * (1.0 / other)

    def adjoint(self) -> "PauliSum":
        return PauliSum(self.n, {k: np.conj(w) for k, w in self._terms.items()})

    def commutator(self, other: "PauliSum") -> "PauliSum":
        return self * other - other * self

    def anticommutator(self, other: "PauliSum") -> "PauliSum":
        return self * other + other * self

    def simplify(self, tol: float = PRUNE_TOL) -> "PauliSum":
        out = self.copy()
        out._prune(tol)
        return out

    def real(self) -> "PauliSum":
        """Drop imaginary parts of the weights (after a Hermiticity check)."""
        return PauliSum(self.n, {k: w.real for k, w in self._terms.items()})

    def is_hermitian(self, tol: float = 1e-12) -> bool:
        return all(abs(w.imag) <= tol for w in self._terms.values())

    def is_diagonal(self) -> bool:
        return all(x == 0 for (x, _z) in self._terms)

    def allclose(self, other: "PauliSum", tol: float = 1e-12) -> bool:
        self._check(other)
        keys = set(self._terms) | set(other._terms)
        return all(abs(self._terms.get(k, 0) - other._terms.get(k, 0)) <= tol for k in keys)

    def terms_commute_pairwise(self) -> bool:
        strings = [PauliString(self.n, x, z) for (x, z) in self._terms]
        return all(a.commutes_with(b) for i, a in enumerate(strings) for b in strings[i + 1:])

    # numerics -------------------------------------------------------------
    def _action(self, key):
        """Index map and phases for one term acting on basis states."""
        cache = self._cache.setdefault("action", {})
        if key not in cache:
            x, z = key
            k = np.arange(1 << self.n, dtype=np.int64)
            sign = 1 - 2 * (np.bitwise_count(k & z) & 1).astype(np.int8)
            yphase = _PHASES[_popcount(x & z) % 4]
            cache[key] = (k ^ x, yphase * sign)
        return cache[key]

    def apply(self, amplitudes: np.ndarray) -> np.ndarray:
        """Return ``A @ psi`` without forming a matrix."""
        psi = np.asarray(amplitudes, dtype=complex)
        if psi.shape[0] != 1 << self.n:
            raise ValidationError("state dimension does not match register")
        out = np.zeros_like(psi)
        for key, w in self._terms.items():
            target, phase = self._action(key)
            # (X^x Z^z)|k> = (-1)^{|k&z|} |k^x>
            if psi.ndim == 1:
                out[target] += w * phase * psi
            else:
                out[target] += (w * phase)[:, None] * psi
        return out

    def diagonal(self) -> np.ndarray:
        if not self.is_diagonal():
            raise ValidationError("operator is not diagonal in the computational basis")
        k = np.arange(1 << self.n, dtype=np.int64)
        out = np.zeros(1 << self.n, dtype=complex)
        for (_x, z), w in self._terms.items():
            out += w * (1 - 2 * (np.bitwise_count(k & z) & 1).astype(np.int8))
        return out

    def to_sparse(self) -> sp.csr_matrix:
        if "sparse" not in self._cache:
            dim = 1 << self.n
            rows, cols, data = [], [], []
            k = np.arange(dim, dtype=np.int64)
            for key, w in self._terms.items():
                target, phase = self._action(key)
                rows.append(target)
                cols.append(k)
                data.append(w * phase)
            if rows:
                mat = sp.coo_matrix(
                    (np.concatenate(data), (np.concatenate(rows), np.concatenate(cols))),
                    shape=(dim, dim),
                ).tocsr()
            else:
                mat = sp.csr_matrix((dim, dim), dtype=complex)
            mat.sum_duplicates()
            self._cache["sparse"] = mat
        return self._cache["sparse"]

    def to_matrix(self) -> np.ndarray:
        return self.to_sparse().toarray()

    def expectation(self, amplitudes: np.ndarray) -> complex:
        psi = np.asarray(amplitudes, dtype=complex)
        return complex(np.vdot(psi, self.to_sparse() @ psi))

    # text -----------------------------------------------------------------
    def to_text(self) -> str:
        lines = []
        for p, w in self.items():
            lines.append(f"{w.real:.17g} {w.imag:.17g} {p.label}")
        return "\n".join(lines) + ("\n" if lines else "")

    @classmethod
    def from_text(cls, text: str, n: int | None = None) -> "PauliSum":
        terms = []
        for raw in text.splitlines():
            raw = raw.strip()
            if not raw or raw.startswith("#"):
                continue
            re_s, im_s, label = raw.split()
            terms.append((complex(float(re_s), float(im_s)), PauliString.from_label(label)))
        if n is None:
            if not terms:
                raise ValidationError("cannot infer register size from empty text")
            n = terms[0][1].n
        return cls.from_terms(n, terms)

    def __repr__(self) -> str:
        body = " + ".join(f"({w:.6g}){p.label}" for p, w in self.items()) or "0"
        return f"PauliSum(n={self.n}: {body})"


def single(n: int, qubit: int, symbol: str, coeff: complex = 1.0) -> PauliSum:
    return PauliSum.from_ops({qubit: symbol}, n, coeff)


def number_operator(n: int, qubit: int) -> PauliSum:
    """(I - Z_q) / 2, the occupation of qubit ``q``."""
    return 0.5 * (PauliSum.identity(n) - single(n, qubit, "Z"))
