"""Dense statevector simulation.

Qubit 0 is the least significant bit of a basis index.  Bitstrings are
printed with qubit ``n-1`` leftmost, so ``"0011"`` is index 3 with qubits 0
and 1 set.

Gate matrices use the same little-endian convention over their own target
list: ``targets[0]`` is the low bit of the matrix index.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

from .errors import EmptySectorError, ValidationError
from .pauli import PauliSum
from .rng import SeedLike, as_generator

UNITARY_TOL = 1e-12
NORM_TOL = 1e-10


def bitstring(index: int, n: int) -> str:
    return format(index, f"0{n}b") if n else ""


def index_of(bits: str) -> int:
    return int(bits, 2) if bits else 0


# ---------------------------------------------------------------------------
# gates and circuits
# ---------------------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class Gate:
    targets: tuple[int, ...]
    matrix: np.ndarray
    label: str = "U"
    controls: tuple[int, ...] = ()
    control_values: tuple[int, ...] = ()

    def __post_init__(self):
        targets = tuple(int(t) for t in self.targets)
        controls = tuple(int(c) for c in self.controls)
        values = tuple(int(v) for v in self.control_values) or (1,) * len(controls)
        if len(values) != len(controls):
            raise ValidationError("one control value per control qubit required")
        if len(set(targets + controls)) != len(targets) + len(controls):
            raise ValidationError("gate qubits must be distinct")
        mat = np.array(self.matrix, dtype=complex)
        dim = 1 << len(targets)
        if mat.shape != (dim, dim):
            raise ValidationError(f"matrix shape {mat.shape} does not match {len(targets)} targets")
        if not np.allclose(mat.conj().T @ mat, np.eye(dim), atol=UNITARY_TOL, rtol=0):
            raise ValidationError(f"gate {self.label!r} is not unitary")
        mat.flags.writeable = False
        object.__setattr__(self, "targets", targets)
        object.__setattr__(self, "controls", controls)
        object.__setattr__(self, "control_values", values)
        object.__setattr__(self, "matrix", mat)

    @property
    def qubits(self) -> tuple[int, ...]:
        return self.controls + self.targets

    @property
    def is_diagonal(self) -> bool:
        return bool(np.all(self.matrix == np.diag(np.diag(self.matrix))))

    def inverse(self) -> "Gate":
        return Gate(self.targets, self.matrix.conj().T, self.label + "†", self.controls, self.control_values)

    def with_control(self, qubit: int, value: int = 1) -> "Gate":
        return Gate(self.targets, self.matrix, self.label, self.controls + (qubit,), self.control_values + (value,))


class Circuit:
    """Ordered gate list on ``n_qubits`` plus an explicit global phase.

    The global phase matters once a circuit is controlled, so it is tracked
    rather than discarded.
    """

    def __init__(self, n_qubits: int, gates: Iterable[Gate] = (), global_phase: float = 0.0):
        self.n_qubits = int(n_qubits)
        self.gates: list[Gate] = []
        self.global_phase = float(global_phase)
        for g in gates:
            self.append(g)

    def append(self, gate: Gate) -> "Circuit":
        if any(q < 0 or q >= self.n_qubits for q in gate.qubits):
            raise ValidationError(f"gate {gate.label} acts outside a {self.n_qubits}-qubit register")
        self.gates.append(gate)
        return self

    def extend(self, other: "Circuit | Iterable[Gate]") -> "Circuit":
        if isinstance(other, Circuit):
            if other.n_qubits > self.n_qubits:
                raise ValidationError("cannot extend with a circuit on a larger register")
            for g in other.gates:
                self.append(g)
            self.global_phase += other.global_phase
        else:
            for g in other:
                self.append(g)
        return self

    def add_phase(self, phase: float) -> "Circuit":
        self.global_phase += float(phase)
        return self

    def copy(self) -> "Circuit":
        return Circuit(self.n_qubits, self.gates, self.global_phase)

    def inverse(self) -> "Circuit":
        return Circuit(self.n_qubits, [g.inverse() for g in reversed(self.gates)], -self.global_phase)

    def power(self, k: int) -> "Circuit":
        if k < 0:
            return self.inverse().power(-k)
        out = Circuit(self.n_qubits)
        for _ in range(k):
            out.extend(self)
        return out

    def embed(self, n_qubits: int) -> "Circuit":
        if n_qubits < self.n_qubits:
            raise ValidationError("embedding register must not be smaller")
        return Circuit(n_qubits, self.gates, self.global_phase)

    def controlled(self, control: int, value: int = 1, n_qubits: int | None = None) -> "Circuit":
        """Condition every gate on ``control``; the global phase becomes a phase gate."""
        size = n_qubits if n_qubits is not None else max(self.n_qubits, control + 1)
        out = Circuit(size, [g.with_control(control, value) for g in self.gates])
        if self.global_phase % (2 * np.pi):
            ph = np.exp(1j * self.global_phase)
            mat = np.diag([1.0, ph]) if value == 1 else np.diag([ph, 1.0])
            out.append(Gate((control,), mat, "phase"))
        return out

    def __len__(self) -> int:
        return len(self.gates)

    def __repr__(self) -> str:
        return f"Circuit(n_qubits={self.n_qubits}, gates={len(self.gates)}, phase={self.global_phase:.4g})"


# standard gate library ---------------------------------------------------
_SQ2 = 1 / np.sqrt(2)
H_MAT = np.array([[_SQ2, _SQ2], [_SQ2, -_SQ2]], dtype=complex)
X_MAT = np.array([[0, 1], [1, 0]], dtype=complex)
Y_MAT = np.array([[0, -1j], [1j, 0]], dtype=complex)
Z_MAT = np.diag([1.0, -1.0]).astype(complex)
S_MAT = np.diag([1.0, 1j])


def h(q: int) -> Gate:
    return Gate((q,), H_MAT, "H")


def x(q: int) -> Gate:
    return Gate((q,), X_MAT, "X")


def y(q: int) -> Gate:
    return Gate((q,), Y_MAT, "Y")


def z(q: int) -> Gate:
    return Gate((q,), Z_MAT, "Z")


def s(q: int) -> Gate:
    return Gate((q,), S_MAT, "S")


def sdg(q: int) -> Gate:
    return Gate((q,), S_MAT.conj(), "S†")


def phase(q: int, phi: float) -> Gate:
    """P(phi) = diag(1, e^{i phi})."""
    return Gate((q,), np.diag([1.0, np.exp(1j * phi)]), "P")


def rx(q: int, theta: float) -> Gate:
    c, s_ = np.cos(theta / 2), np.sin(theta / 2)
    return Gate((q,), np.array([[c, -1j * s_], [-1j * s_, c]]), "Rx")


def ry(q: int, theta: float) -> Gate:
    c, s_ = np.cos(theta / 2), np.sin(theta / 2)
    return Gate((q,), np.array([[c, -s_], [s_, c]], dtype=complex), "Ry")


def rz(q: int, theta: float) -> Gate:
    return Gate((q,), np.diag([np.exp(-0.5j * theta), np.exp(0.5j * theta)]), "Rz")


def cnot(control: int, target: int) -> Gate:
    # targets=(control, target): control is the low bit of the 4x4 index
    mat = np.array([[1, 0, 0, 0], [0, 0, 0, 1], [0, 0, 1, 0], [0, 1, 0, 0]], dtype=complex)
    return Gate((control, target), mat, "CNOT")


def cz(a: int, b: int) -> Gate:
    return Gate((a, b), np.diag([1, 1, 1, -1]).astype(complex), "CZ")


def swap(a: int, b: int) -> Gate:
    mat = np.array([[1, 0, 0, 0], [0, 0, 1, 0], [0, 1, 0, 0], [0, 0, 0, 1]], dtype=complex)
    return Gate((a, b), mat, "SWAP")


def rzz(a: int, b: int, theta: float) -> Gate:
    """exp(-i theta/2 Z_a Z_b)."""
    e, f = np.exp(-0.5j * theta), np.exp(0.5j * theta)
    return Gate((a, b), np.diag([e, f, f, e]), "Rzz")


def xx_plus_yy(a: int, b: int, theta: float) -> Gate:
    """exp(-i theta/2 (X_a X_b + Y_a Y_b)); mixes |01> and |10> only."""
    c, s_ = np.cos(theta), np.sin(theta)
    mat = np.array([[1, 0, 0, 0], [0, c, -1j * s_, 0], [0, -1j * s_, c, 0], [0, 0, 0, 1]], dtype=complex)
    return Gate((a, b), mat, "XX+YY")


def pair_occupation_phase(a: int, b: int, theta: float) -> Gate:
    """exp(i theta (I-Z_a)(I-Z_b)): a controlled phase e^{4 i theta} on |11>."""
    return Gate((a, b), np.diag([1, 1, 1, np.exp(4j * theta)]), "CP")


def dense_gate(targets: Sequence[int], matrix: np.ndarray, label: str = "U") -> Gate:
    """Register-level unitary; reserved for small ancilla registers (e.g. the QFT)."""
    return Gate(tuple(targets), matrix, label)


def qft_matrix(n: int, inverse: bool = False) -> np.ndarray:
    dim = 1 << n
    k = np.arange(dim)
    sign = -1 if inverse else 1
    return np.exp(sign * 2j * np.pi * np.outer(k, k) / dim) / np.sqrt(dim)


# ---------------------------------------------------------------------------
# statevector
# ---------------------------------------------------------------------------


class Statevector:
    """Immutable unit-norm amplitude vector over ``n_qubits``."""

    __slots__ = ("n_qubits", "_amps")

    def __init__(self, amplitudes, n_qubits: int | None = None, normalize: bool = False):
        amps = np.array(amplitudes, dtype=complex).reshape(-1)
        dim = amps.shape[0]
        n = int(round(np.log2(dim))) if dim else -1
        if dim == 0 or (1 << n) != dim:
            raise ValidationError("amplitude count must be a power of two")
        if n_qubits is not None and n_qubits != n:
            raise ValidationError(f"{dim} amplitudes do not describe {n_qubits} qubits")
        norm = np.linalg.norm(amps)
        if normalize:
            if norm == 0:
                raise ValidationError("cannot normalize the zero vector")
            amps = amps / norm
        elif abs(norm - 1) > NORM_TOL:
            raise ValidationError(f"state norm {norm} differs from 1")
        amps.flags.writeable = False
        self.n_qubits = n
        self._amps = amps

    @classmethod
    def zero(cls, n: int) -> "Statevector":
        return cls.basis_state(n, 0)

    @classmethod
    def basis_state(cls, n: int, index: int) -> "Statevector":
        amps = np.zeros(1 << n, dtype=complex)
        amps[index] = 1.0
        return cls(amps)

    @classmethod
    def from_bitstring(cls, bits: str) -> "Statevector":
        return cls.basis_state(len(bits), index_of(bits))

    @classmethod
    def uniform(cls, n: int) -> "Statevector":
        return cls(np.full(1 << n, (1 << n) ** -0.5, dtype=complex))

    @property
    def amplitudes(self) -> np.ndarray:
        return self._amps

    @property
    def dim(self) -> int:
        return self._amps.shape[0]

    def probabilities(self) -> np.ndarray:
        return np.abs(self._amps) ** 2

    def inner(self, other: "Statevector | np.ndarray") -> complex:
        other_amps = other.amplitudes if isinstance(other, Statevector) else np.asarray(other)
        return complex(np.vdot(self._amps, other_amps))

    def fidelity(self, other: "Statevector | np.ndarray") -> float:
        return abs(self.inner(other)) ** 2

    def tensor(self, other: "Statevector") -> "Statevector":
        """``other`` occupies the qubits above this register."""
        return Statevector(np.kron(other.amplitudes, self._amps))

    def marginal(self, qubits: Sequence[int]) -> np.ndarray:
        """Probabilities of the listed qubits; qubits[0] is the low bit of the result index."""
        probs = self.probabilities().reshape((2,) * self.n_qubits)
        axes = [self.n_qubits - 1 - q for q in qubits]
        keep = tuple(reversed(axes))
        drop = tuple(a for a in range(self.n_qubits) if a not in axes)
        reduced = probs.sum(axis=drop) if drop else probs
        # reduced axes follow ascending original axis order; reorder to keep
        order = sorted(axes)
        reduced = np.moveaxis(reduced, [order.index(a) for a in keep], range(len(keep)))
        return reduced.reshape(-1)

    def __repr__(self) -> str:
        return f"Statevector(n_qubits={self.n_qubits})"


def _amps_of(state: "Statevector | np.ndarray") -> np.ndarray:
    return state.amplitudes if isinstance(state, Statevector) else np.asarray(state, dtype=complex)


def _apply_gate_inplace(t: np.ndarray, gate: Gate, n: int) -> None:
    """Apply ``gate`` to the rank-n tensor ``t`` (axis a <-> qubit n-1-a)."""
    k = len(gate.targets)
    idx = [slice(None)] * n
    for c, v in zip(gate.controls, gate.control_values):
        idx[n - 1 - c] = v
    idx = tuple(idx)
    sub = t[idx]
    remaining = [q for q in range(n - 1, -1, -1) if q not in gate.controls]
    pos = {q: i for i, q in enumerate(remaining)}
    sub_axes = [pos[gate.targets[j]] for j in range(k - 1, -1, -1)]
    if gate.is_diagonal:
        diag = np.diag(gate.matrix).reshape((2,) * k)
        shape = [1] * sub.ndim
        for i, a in enumerate(sub_axes):
            shape[a] = 2
        # diag axes follow targets[k-1..0]; align with sub_axes order
        order = np.argsort(sub_axes)
        diag = np.transpose(diag, order).reshape(shape)
        sub *= diag
        return
    mat = gate.matrix.reshape((2,) * (2 * k))
    res = np.tensordot(mat, sub, axes=(list(range(k, 2 * k)), sub_axes))
    res = np.moveaxis(res, list(range(k)), sub_axes)
    t[idx] = res


def evolve(amplitudes: np.ndarray, circuit: Circuit) -> np.ndarray:
    """Apply a circuit to a raw amplitude array (no norm checks)."""
    n = circuit.n_qubits
    psi = np.array(amplitudes, dtype=complex)
    if psi.shape[0] != 1 << n:
        raise ValidationError(f"state has {psi.shape[0]} amplitudes, circuit needs {1 << n}")
    t = psi.reshape((2,) * n) if n else psi
    for gate in circuit.gates:
        _apply_gate_inplace(t, gate, n)
    out = t.reshape(-1)
    if circuit.global_phase:
        out *= np.exp(1j * circuit.global_phase)
    return out


def apply_circuit(state: Statevector, circuit: Circuit) -> Statevector:
    """Return ``U_m ... U_1 |psi>`` for the gates of ``circuit`` in order."""
    if circuit.n_qubits != state.n_qubits:
        raise ValidationError(f"circuit acts on {circuit.n_qubits} qubits, state has {state.n_qubits}")
    return Statevector(evolve(state.amplitudes, circuit))


def circuit_unitary(circuit: Circuit) -> np.ndarray:
    """Dense matrix of a circuit (verification only)."""
    dim = 1 << circuit.n_qubits
    return np.column_stack([evolve(col, circuit) for col in np.eye(dim, dtype=complex)])


def expectation(state: Statevector, observable: PauliSum, tol: float = 1e-10) -> float:
    """<psi|A|psi> for a Hermitian Pauli sum."""
    if observable.n != state.n_qubits:
        raise ValidationError("observable and state registers differ")
    if not observable.is_hermitian(tol):
        raise ValidationError("observable is not Hermitian")
    val = observable.expectation(state.amplitudes)
    if abs(val.imag) > tol:
        raise ValidationError(f"expectation has imaginary residue {val.imag}")
    return float(val.real)


@dataclass
class MeasurementCounts:
    shots: int
    counts: dict[str, int] = field(default_factory=dict)

    def probabilities(self) -> dict[str, float]:
        return {k: v / self.shots for k, v in self.counts.items()}

    def as_array(self, n: int) -> np.ndarray:
        arr = np.zeros(1 << n, dtype=np.int64)
        for bits, c in self.counts.items():
            arr[index_of(bits)] = c
        return arr


def sample_measurements(state: Statevector, shots: int, rng_seed: SeedLike = None) -> MeasurementCounts:
    """Draw ``shots`` full-register outcomes from the Born distribution."""
    if shots < 1:
        raise ValidationError("shots must be positive")
    rng = as_generator(rng_seed)
    probs = state.probabilities()
    draws = rng.multinomial(shots, probs / probs.sum())
    counts = {bitstring(i, state.n_qubits): int(c) for i, c in enumerate(draws) if c}
    return MeasurementCounts(shots, counts)


def _branch(amps: np.ndarray, n: int, qubits: Sequence[int], outcome: int) -> np.ndarray:
    """Zero all amplitudes inconsistent with ``outcome`` on ``qubits``."""
    k = np.arange(1 << n)
    mask = np.ones(1 << n, dtype=bool)
    for j, q in enumerate(qubits):
        mask &= ((k >> q) & 1) == ((outcome >> j) & 1)
    out = np.where(mask, amps, 0)
    return out


def partial_collapse(
    state: Statevector,
    qubits: Sequence[int],
    rng_seed: SeedLike = None,
    outcome: str | None = None,
) -> tuple[str, Statevector]:
    """Measure a subset of qubits and return (bitstring, renormalized state).

    The bitstring lists the measured qubits from highest index to lowest.
    Passing ``outcome`` forces that result (raises if it has zero probability).
    """
    qs = sorted(set(int(q) for q in qubits))
    if not qs:
        raise ValidationError("no qubits to measure")
    if qs[0] < 0 or qs[-1] >= state.n_qubits:
        raise ValidationError("measured qubit outside register")
    marg = state.marginal(qs)
    if outcome is None:
        rng = as_generator(rng_seed)
        value = int(rng.choice(len(marg), p=marg / marg.sum()))
    else:
        value = index_of(outcome)
    p = marg[value]
    if p <= 1e-15:
        raise EmptySectorError(f"outcome {bitstring(value, len(qs))} has zero probability")
    post = _branch(state.amplitudes, state.n_qubits, qs, value) / np.sqrt(p)
    return bitstring(value, len(qs)), Statevector(post, normalize=True)


def postselect(amps: np.ndarray, n: int, qubits: Sequence[int], outcome: int) -> tuple[float, np.ndarray]:
    """Probability of ``outcome`` on ``qubits`` and the unnormalized branch."""
    branch = _branch(amps, n, qubits, outcome)
    return float(np.vdot(branch, branch).real), branch


def reduce_register(amps: np.ndarray, n_keep: int) -> np.ndarray:
    """Drop high qubits known to be in a definite state (sum over their index)."""
    dim = 1 << n_keep
    return amps.reshape(-1, dim).sum(axis=0)


def hadamard_test(
    state: Statevector,
    unitary: Circuit,
    part: str = "real",
    shots: int | None = None,
    rng_seed: SeedLike = None,
) -> float:
    """Estimate Re or Im of <psi|U|psi> with one ancilla interferometer.

    The ancilla is placed above the system register.  After H, controlled-U,
    an optional phase and a final H, ``p0 - p1`` equals the requested part.
    For the imaginary part the ancilla phase is -pi/2 (an S-dagger gate); this
    is the sign that reproduces the direct inner product.
    Exact mode (``shots is None``) returns p0 - p1 from the full statevector.
    """
    if part not in ("real", "imag", "imaginary"):
        raise ValidationError("part must be 'real' or 'imag'")
    n = state.n_qubits
    if unitary.n_qubits != n:
        raise ValidationError("unitary and state registers differ")
    anc = n
    circ = Circuit(n + 1)
    circ.append(h(anc))
    circ.extend(unitary.controlled(anc, n_qubits=n + 1))
    if part != "real":
        circ.append(sdg(anc))
    circ.append(h(anc))
    full = Statevector(np.kron([1.0, 0.0], state.amplitudes))
    out = apply_circuit(full, circ)
    p0 = float(out.marginal([anc])[0])
    if shots is None:
        return 2 * p0 - 1
    if shots < 1:
        raise ValidationError("shots must be positive")
    rng = as_generator(rng_seed)
    zeros = rng.binomial(shots, min(max(p0, 0.0), 1.0))
    return (2 * zeros - shots) / shots


def hadamard_stderr(value: float, shots: int) -> float:
    """Standard error of a shot-sampled p0 - p1 estimate."""
    return float(np.sqrt(max(1 - value**2, 0.0) / shots))
