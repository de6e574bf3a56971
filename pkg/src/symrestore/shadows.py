"""Random-Pauli classical shadows: sampling, estimation and projected estimators.

Per-qubit snapshot operators are 3 U^dag|b><b|U - I, so the trace of any
single-qubit Pauli against one of them is 1 (identity), +-3 (matching basis)
or 0. Every estimator below reduces to these integer tables.
"""

from __future__ import annotations

from dataclasses import dataclass
from math import factorial
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from .errors import EmptySectorError, ValidationError
from .pauli import PauliString, PauliSum
from .rng import SeedLike, as_generator
from .statevector import Circuit, Statevector, evolve, h, sdg
from .symmetry import spin_projector

SYMBOLS = "IXYZ"
CODE = {s: i for i, s in enumerate(SYMBOLS)}
DENOM_TOL = 1e-6

_PAULI = np.array(
    [
        [[1, 0], [0, 1]],
        [[0, 1], [1, 0]],
        [[0, -1j], [1j, 0]],
        [[1, 0], [0, -1]],
    ],
    dtype=complex,
)


@dataclass(frozen=True)
class Snapshot:
    """Basis symbols and outcome bits, both written with qubit n-1 leftmost."""

    bases: str
    outcome: str

    def __post_init__(self):
        if len(self.bases) != len(self.outcome):
            raise ValidationError("bases and outcome lengths differ")
        if set(self.bases) - set("XYZ") or set(self.outcome) - set("01"):
            raise ValidationError("bases must be X/Y/Z and outcomes 0/1")

    @property
    def n(self) -> int:
        return len(self.bases)


class Shadow:
    """Snapshot arrays: ``bases[i, q]`` in {1, 2, 3} (X, Y, Z) and ``bits[i, q]`` in {0, 1}."""

    def __init__(self, bases: np.ndarray, bits: np.ndarray, seed: int | None = None):
        bases = np.asarray(bases, dtype=np.int8)
        bits = np.asarray(bits, dtype=np.int8)
        if bases.shape != bits.shape or bases.ndim != 2:
            raise ValidationError("bases and bits must be equal-shape 2-D arrays")
        self.bases, self.bits, self.seed = bases, bits, seed

    @property
    def n_qubits(self) -> int:
        return self.bases.shape[1]

    def __len__(self) -> int:
        return self.bases.shape[0]

    def __getitem__(self, item) -> "Shadow":
        if isinstance(item, int):
            item = slice(item, item + 1)
        return Shadow(self.bases[item], self.bits[item], self.seed)

    def snapshot(self, i: int) -> Snapshot:
        return Snapshot(
            "".join(SYMBOLS[c] for c in self.bases[i, ::-1]),
            "".join(str(b) for b in self.bits[i, ::-1]),
        )

    @classmethod
    def from_snapshots(cls, snaps: Sequence[Snapshot], seed: int | None = None) -> "Shadow":
        if not snaps:
            raise ValidationError("need at least one snapshot")
        bases = np.array([[CODE[c] for c in s.bases[::-1]] for s in snaps])
        bits = np.array([[int(c) for c in s.outcome[::-1]] for s in snaps])
        return cls(bases, bits, seed)

    def restrict(self, qubits: Sequence[int]) -> "Shadow":
        return Shadow(self.bases[:, list(qubits)], self.bits[:, list(qubits)], self.seed)

    def trace_table(self) -> np.ndarray:
        """(N, n, 4) per-qubit traces Tr(sigma rho_hat_j) for sigma = I, X, Y, Z."""
        n_snap, n = self.bases.shape
        table = np.zeros((n_snap, n, 4), dtype=np.int8)
        table[:, :, 0] = 1
        sign = (3 - 6 * self.bits).astype(np.int8)
        np.put_along_axis(table, self.bases[:, :, None].astype(np.intp), sign[:, :, None], axis=2)
        return table

    def patterns(self) -> tuple[np.ndarray, np.ndarray]:
        """Distinct (basis, bit) rows and the index of each snapshot's row."""
        key = (self.bases.astype(np.int64) - 1) * 2 + self.bits
        uniq, inverse = np.unique(key, axis=0, return_inverse=True)
        shadow = Shadow(uniq // 2 + 1, uniq % 2)
        return shadow.trace_table(), inverse.reshape(-1)

    def save(self, path: str | Path) -> None:
        lines = [f"# n={self.n_qubits} seed={self.seed}"]
        lines += [f"{s.bases} {s.outcome}" for s in (self.snapshot(i) for i in range(len(self)))]
        Path(path).write_text("\n".join(lines) + "\n")

    @classmethod
    def load(cls, path: str | Path) -> "Shadow":
        seed = None
        snaps = []
        for line in Path(path).read_text().splitlines():
            line = line.strip()
            if not line:
                continue
            if line.startswith("#"):
                for field in line[1:].split():
                    key, _, val = field.partition("=")
                    if key == "seed" and val not in ("", "None"):
                        seed = int(val)
                continue
            bases, outcome = line.split()
            snaps.append(Snapshot(bases, outcome))
        return cls.from_snapshots(snaps, seed)


def _rotation_circuit(n: int, pattern: Sequence[int]) -> Circuit:
    circ = Circuit(n)
    for q, c in enumerate(pattern):
        if c == 1:
            circ.append(h(q))
        elif c == 2:
            circ.append(sdg(q))
            circ.append(h(q))
    return circ


def measure_in_bases(state, bases: np.ndarray, rng_seed: SeedLike = None) -> np.ndarray:
    """Outcome bits for each row of ``bases`` (codes 1..3), sampled from the rotated state.

    Rows sharing a basis pattern are sampled together, patterns in sorted order,
    so the result depends only on the seed and ``bases``.
    """
    amps = np.asarray(getattr(state, "amplitudes", state), dtype=complex)
    bases = np.asarray(bases)
    n = bases.shape[1]
    rng = as_generator(rng_seed)
    bits = np.zeros(bases.shape, dtype=np.int8)
    uniq, inverse = np.unique(bases, axis=0, return_inverse=True)
    inverse = inverse.reshape(-1)
    shifts = np.arange(n)
    for u, pattern in enumerate(uniq):
        rows = np.nonzero(inverse == u)[0]
        probs = np.abs(evolve(amps, _rotation_circuit(n, pattern))) ** 2
        idx = rng.choice(probs.size, size=rows.size, p=probs / probs.sum())
        bits[rows] = (idx[:, None] >> shifts) & 1
    return bits


def sample_snapshots(state, count: int, rng_seed: int | None = None) -> Shadow:
    """Uniform random X/Y/Z basis per qubit, then one Born-rule outcome per snapshot."""
    if count < 1:
        raise ValidationError("count must be at least 1")
    amps = getattr(state, "amplitudes", state)
    n = int(np.log2(len(amps)))
    rng = as_generator(rng_seed)
    bases = rng.integers(1, 4, size=(count, n))
    return Shadow(bases, measure_in_bases(amps, bases, rng), rng_seed if isinstance(rng_seed, int) else None)


def _codes(pauli: PauliString) -> np.ndarray:
    return np.array([CODE[pauli.symbol(q)] for q in range(pauli.n)])


def snapshot_trace(snap: Snapshot | Shadow, pauli: PauliString | str) -> float | np.ndarray:
    """prod_j Tr(P_j rho_hat_j); a scalar for a Snapshot, an array over a Shadow."""
    if isinstance(pauli, str):
        pauli = PauliString.from_label(pauli)
    shadow = Shadow.from_snapshots([snap]) if isinstance(snap, Snapshot) else snap
    if pauli.n != shadow.n_qubits:
        raise ValidationError("Pauli string and snapshot sizes differ")
    table = shadow.trace_table().astype(np.int64)
    vals = np.take_along_axis(table, _codes(pauli)[None, :, None], axis=2)[:, :, 0].prod(axis=1)
    return float(vals[0]) if isinstance(snap, Snapshot) else vals.astype(float)


def median_of_means(values: np.ndarray, k: int = 1) -> float:
    """Median of k contiguous block means (block size floor(N/k), leftovers dropped)."""
    values = np.asarray(values)
    if k < 1 or k > values.size:
        raise ValidationError("K must lie in [1, number of snapshots]")
    if k == 1:
        return float(np.mean(values).real)
    size = values.size // k
    means = values[: size * k].reshape(k, size).mean(axis=1).real
    return float(np.median(means))


def observable_values(shadow: Shadow, observable: PauliSum) -> np.ndarray:
    """Per-snapshot single-shot estimates of <O>."""
    vals = np.zeros(len(shadow), dtype=complex)
    for p, w in observable.items():
        vals += w * p.coefficient * snapshot_trace(shadow, p)
    return vals


def estimate(shadow: Shadow, observable: PauliSum, k: int = 1, return_error: bool = False):
    """Shadow estimate of <O>; ``return_error`` adds the sample standard error."""
    vals = observable_values(shadow, observable)
    est = median_of_means(vals, k)
    if not return_error:
        return est
    return est, float(np.std(vals.real, ddof=1) / np.sqrt(len(vals))) if len(vals) > 1 else float("nan")


def reconstruct_single_qubit(shadow: Shadow) -> np.ndarray:
    """Average of 3 U^dag|b><b|U - I; Hermitian with unit trace by construction."""
    if shadow.n_qubits != 1:
        raise ValidationError("single-qubit reconstruction needs a 1-qubit shadow")
    table = shadow.trace_table()[:, 0, :].astype(float)
    bloch = table[:, 1:].mean(axis=0)
    return 0.5 * (_PAULI[0] + np.einsum("a,aij->ij", bloch, _PAULI[1:]))


def trace_distance(a: np.ndarray, b: np.ndarray) -> float:
    return float(0.5 * np.abs(np.linalg.eigvalsh(a - b)).sum())


# ---------------------------------------------------------------------------
# measurement budgets and derandomization
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class ShadowPlan:
    n_snapshots: int
    k_blocks: int
    m_per_block: float


def plan_budget(n_observables: int, delta: float, epsilon: float, norms: Iterable[float]) -> ShadowPlan:
    """K = ceil(2 ln(2L/delta)), M = 34 max(norms)/eps^2, N = ceil(M K)."""
    if epsilon <= 0 or delta <= 0 or delta >= 1:
        raise ValidationError("need epsilon > 0 and 0 < delta < 1")
    if n_observables < 1:
        raise ValidationError("need at least one observable")
    norms = np.asarray(list(norms), dtype=float)
    if norms.size == 0 or np.any(norms < 0):
        raise ValidationError("norms must be a nonempty nonnegative list")
    k = max(1, int(np.ceil(2 * np.log(2 * n_observables / delta) - 1e-9)))
    m = 34 * float(norms.max()) / epsilon**2
    return ShadowPlan(max(k, int(np.ceil(m * k - 1e-9))), k, m)


def compatible(bases: str, pauli: PauliString | str) -> bool:
    """True when every non-identity factor of the observable is measured in its own basis."""
    label = pauli if isinstance(pauli, str) else pauli.label
    return all(p == "I" or p == b for p, b in zip(label, bases))


def derandomize(observables: Sequence[PauliString | str], budget: int, eta: float = 0.9) -> list[str]:
    """Greedy basis choice, qubit by qubit, maximizing the weighted count of compatible observables.

    An observable's weight decays as exp(-eta * hits) once it has been
    measured, so later rounds turn to the ones still uncovered. Ties pick
    Z, then X, then Y.
    """
    if budget < 1:
        raise ValidationError("budget must be at least 1")
    labels = [o if isinstance(o, str) else o.label for o in observables]
    if not labels:
        raise ValidationError("need at least one observable")
    n = len(labels[0])
    if any(len(l) != n for l in labels):
        raise ValidationError("observables act on different registers")
    hits = np.zeros(len(labels))
    rounds = []
    for _ in range(budget):
        weights = np.exp(-eta * hits)
        alive = np.ones(len(labels), dtype=bool)
        chosen = []
        for pos in range(n):
            best, best_score = "Z", -1.0
            for b in "ZXY":
                ok = alive & np.array([l[pos] in ("I", b) for l in labels])
                score = float(weights[ok].sum())
                if score > best_score + 1e-12:
                    best, best_score = b, score
            chosen.append(best)
            alive &= np.array([l[pos] in ("I", best) for l in labels])
        protocol = "".join(chosen)
        hits += alive
        rounds.append(protocol)
    return rounds


def sample_protocol(state, protocols: Sequence[str], rng_seed: int | None = None) -> Shadow:
    """Measure once per listed basis string (qubit n-1 leftmost)."""
    bases = np.array([[CODE[c] for c in p[::-1]] for p in protocols])
    return Shadow(bases, measure_in_bases(state, bases, rng_seed), rng_seed)


def derandomized_estimate(shadow: Shadow, pauli: PauliString | str) -> tuple[float, int]:
    """Mean of the +-1 parity over snapshots compatible with ``pauli`` and how many there were."""
    if isinstance(pauli, str):
        pauli = PauliString.from_label(pauli)
    vals = snapshot_trace(shadow, pauli)
    hit = vals != 0
    if not hit.any():
        raise EmptySectorError("no compatible measurement for this observable")
    scale = 3.0 ** pauli.weight
    return float(np.mean(vals[hit]) / scale), int(hit.sum())


def hit_count(protocols: Sequence[str], observables: Sequence[PauliString | str]) -> int:
    return sum(compatible(p, o) for p in protocols for o in observables)


# ---------------------------------------------------------------------------
# projected traces
# ---------------------------------------------------------------------------


def pauli_coefficients(mat: np.ndarray) -> np.ndarray:
    """c_sigma with M = sum c_sigma sigma, c_sigma = Tr(sigma M)/2."""
    return 0.5 * np.einsum("sij,...ji->...s", _PAULI, mat)


def phase_gate(lam) -> np.ndarray:
    """diag(1, e^{i lam}) = e^{i lam/2}[cos(lam/2) I - i sin(lam/2) Z]."""
    lam = np.asarray(lam, dtype=float)
    out = np.zeros(lam.shape + (2, 2), dtype=complex)
    out[..., 0, 0] = 1
    out[..., 1, 1] = np.exp(1j * lam)
    return out


def rz_matrix(a) -> np.ndarray:
    a = np.asarray(a, dtype=float)
    out = np.zeros(a.shape + (2, 2), dtype=complex)
    out[..., 0, 0] = np.exp(-0.5j * a)
    out[..., 1, 1] = np.exp(0.5j * a)
    return out


def ry_matrix(b) -> np.ndarray:
    b = np.asarray(b, dtype=float)
    c, s = np.cos(b / 2), np.sin(b / 2)
    return np.stack([np.stack([c, -s], -1), np.stack([s, c], -1)], -2).astype(complex)


def euler_pauli_coefficients(alpha, beta, gamma) -> np.ndarray:
    """Pauli coefficients (I, X, Y, Z) of Rz(alpha) Ry(beta) Rz(gamma).

    With c = cos(beta/2), s = sin(beta/2), p = (alpha + gamma)/2 and
    m = (alpha - gamma)/2: c_I = c cos p, c_X = i s sin m, c_Y = -i s cos m,
    c_Z = -i c sin p.
    """
    c, s = np.cos(np.asarray(beta) / 2), np.sin(np.asarray(beta) / 2)
    p = 0.5 * (np.asarray(alpha) + np.asarray(gamma))
    m = 0.5 * (np.asarray(alpha) - np.asarray(gamma))
    return np.stack([c * np.cos(p) + 0j, 1j * s * np.sin(m), -1j * s * np.cos(m), -1j * c * np.sin(p)], -1)


def wigner_small_d(s: float, m1: float, m2: float, beta) -> np.ndarray:
    """d^s_{m1 m2}(beta) = <s m1| exp(-i beta S_y) |s m2> from the explicit factorial sum."""
    beta = np.asarray(beta, dtype=float)
    if abs(m1) > s + 1e-12 or abs(m2) > s + 1e-12:
        raise ValidationError("|m| must not exceed s")
    a, b = int(round(s + m1)), int(round(s - m1))
    c, d = int(round(s + m2)), int(round(s - m2))
    two_s = int(round(2 * s))
    dm = int(round(m1 - m2))
    pref = np.sqrt(float(factorial(a) * factorial(b) * factorial(c) * factorial(d)))
    cos_h, sin_h = np.cos(beta / 2), np.sin(beta / 2)
    total = np.zeros_like(beta)
    for k in range(max(0, -dm), min(c, b) + 1):
        den = factorial(c - k) * factorial(k) * factorial(b - k) * factorial(k + dm)
        total = total + (-1) ** (k + dm) * cos_h ** (two_s - 2 * k - dm) * sin_h ** (2 * k + dm) / den
    return pref * total


def wigner_big_d(s: float, m: float, alpha, beta, gamma) -> np.ndarray:
    """D^s_{mm}(alpha, beta, gamma) = e^{-i m alpha} d^s_{mm}(beta) e^{-i m gamma}."""
    return np.exp(-1j * m * (np.asarray(alpha) + np.asarray(gamma))) * wigner_small_d(s, m, m, beta)


@dataclass(frozen=True)
class NumberProjection:
    """P_N = sum_k alpha_k prod_j R_j(phi_k) with R the phase gate diag(1, e^{i phi})."""

    n_particles: int

    def terms(self, n: int) -> tuple[np.ndarray, np.ndarray]:
        """(weights alpha_k, per-qubit operators R(phi_k))."""
        if not 0 <= self.n_particles <= n:
            raise ValidationError(f"particle number {self.n_particles} outside [0, {n}]")
        phis = 2 * np.pi * np.arange(n + 1) / (n + 1)
        return np.exp(-1j * phis * self.n_particles) / (n + 1), phase_gate(phis)


@dataclass(frozen=True)
class SpinProjection:
    """Discretized rotation-group integral for |s, m><s, m| on a left-endpoint n_p^3 grid."""

    s: float
    m: float
    n_p: int = 10

    def grid(self) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        if self.n_p < 1:
            raise ValidationError("n_p must be at least 1")
        a = 2 * np.pi * np.arange(self.n_p) / self.n_p
        b = np.pi * np.arange(self.n_p) / self.n_p
        return np.meshgrid(a, b, a, indexing="ij")

    def terms(self, n: int) -> tuple[np.ndarray, np.ndarray]:
        spin_projector(n, self.s, self.m)  # validates (s, m)
        al, be, ga = (g.ravel() for g in self.grid())
        da, db = 2 * np.pi / self.n_p, np.pi / self.n_p
        weights = (2 * self.s + 1) / (8 * np.pi**2) * da * db * da * np.sin(be) * np.conj(wigner_big_d(self.s, self.m, al, be, ga))
        # the grid operators do not depend on (s, m); only the weights do
        return weights, rz_matrix(al) @ ry_matrix(be) @ rz_matrix(ga)


Projection = NumberProjection | SpinProjection


def _pattern_products(shadow: Shadow, pauli: PauliString, ops: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """prod_j Tr(P_j R_jk rho_hat_j) for each distinct snapshot pattern (U, K) and the pattern index."""
    if pauli.n != shadow.n_qubits:
        raise ValidationError("Pauli string and snapshot sizes differ")
    p_mats = _PAULI[_codes(pauli)]  # (n, 2, 2)
    coeffs = pauli_coefficients(p_mats[None, :, :, :] @ ops[:, None, :, :])  # (K, n, 4)
    table, inverse = shadow.patterns()
    table = table.astype(complex)
    prods = np.ones((table.shape[0], ops.shape[0]), dtype=complex)
    for j in range(shadow.n_qubits):
        prods *= table[:, j, :] @ coeffs[:, j, :].T
    return prods, inverse


def _pattern_means(shadow: Shadow, pauli: PauliString, ops: np.ndarray) -> np.ndarray:
    prods, inverse = _pattern_products(shadow, pauli, ops)
    counts = np.bincount(inverse, minlength=prods.shape[0]).astype(float)
    return counts @ prods / len(shadow)


def _as_pauli(pauli: PauliString | str | None, n: int) -> PauliString:
    if pauli is None:
        return PauliString.identity(n)
    return PauliString.from_label(pauli) if isinstance(pauli, str) else pauli


def projected_trace(snap: Snapshot | Shadow, pauli: PauliString | str, projection: Projection):
    """Tr(P_obs P rho_hat); scalar for one Snapshot, array over a Shadow."""
    shadow = Shadow.from_snapshots([snap]) if isinstance(snap, Snapshot) else snap
    weights, ops = projection.terms(shadow.n_qubits)
    prods, inverse = _pattern_products(shadow, _as_pauli(pauli, shadow.n_qubits), ops)
    vals = (prods @ weights)[inverse]
    return complex(vals[0]) if isinstance(snap, Snapshot) else vals


def projected_mean(shadow: Shadow, pauli: PauliString | str | None, projection: Projection) -> complex:
    """Shadow average of Tr(P_obs P rho_hat), an estimate of <O P>."""
    weights, ops = projection.terms(shadow.n_qubits)
    return complex(weights @ _pattern_means(shadow, _as_pauli(pauli, shadow.n_qubits), ops))


def number_profile(shadow: Shadow, pauli: PauliString | str | None = None) -> np.ndarray:
    """<O P_N> for every N = 0..n from one pass over the snapshot products."""
    n = shadow.n_qubits
    _w, ops = NumberProjection(0).terms(n)
    means = _pattern_means(shadow, _as_pauli(pauli, n), ops)
    return np.array([complex(NumberProjection(k).terms(n)[0] @ means) for k in range(n + 1)])


def spin_sectors(n: int) -> list[tuple[float, float]]:
    """All (s, m) pairs of n spin-1/2 particles, s ascending then m ascending."""
    out = []
    s = n / 2
    while s >= -1e-12:
        out.append(s)
        s -= 1
    return [(s, m) for s in sorted(out) for m in np.arange(-s, s + 0.5, 1.0)]


def spin_profile(shadow: Shadow, n_p: int = 10, pauli: PauliString | str | None = None,
                 sectors: Sequence[tuple[float, float]] | None = None) -> dict[tuple[float, float], complex]:
    """<O P_{s,m}> for every listed sector, sharing the grid products."""
    n = shadow.n_qubits
    sectors = spin_sectors(n) if sectors is None else sectors
    _w, ops = SpinProjection(sectors[0][0], sectors[0][1], n_p).terms(n)
    means = _pattern_means(shadow, _as_pauli(pauli, n), ops)
    return {(s, m): complex(SpinProjection(s, m, n_p).terms(n)[0] @ means) for s, m in sectors}


def projected_energy(shadow: Shadow, h: PauliSum, projection: Projection) -> float:
    """<H P>/<P> estimated term by term from the shadow."""
    den = projected_mean(shadow, PauliString.identity(shadow.n_qubits), projection)
    if abs(den) < DENOM_TOL:
        raise EmptySectorError("estimated sector weight below 1e-6")
    num = sum(w * p.coefficient * projected_mean(shadow, p, projection) for p, w in h.items())
    return float((num / den).real)


def exact_shadow_average(state, pauli: PauliString | str, projection: Projection | None = None) -> complex:
    """Expectation of the single-snapshot estimator over all 3^n bases and outcomes (test oracle)."""
    amps = np.asarray(getattr(state, "amplitudes", state), dtype=complex)
    n = int(np.log2(amps.size))
    if isinstance(pauli, str):
        pauli = PauliString.from_label(pauli)
    total = 0j
    all_bits = ((np.arange(1 << n)[:, None] >> np.arange(n)) & 1).astype(np.int8)
    for code in range(3**n):
        pattern = np.array([(code // 3**q) % 3 + 1 for q in range(n)])
        probs = np.abs(evolve(amps, _rotation_circuit(n, pattern))) ** 2
        shadow = Shadow(np.tile(pattern, (1 << n, 1)), all_bits)
        if projection is None:
            vals = snapshot_trace(shadow, pauli)
        else:
            vals = projected_trace(shadow, pauli, projection)
        total += probs @ vals / 3**n
    return complex(total)


def discretized_spin_projector(n: int, projection: SpinProjection) -> np.ndarray:
    """Dense matrix of the discretized integral (what the spin estimator targets)."""
    weights, ops = projection.terms(n)
    out = np.zeros((1 << n, 1 << n), dtype=complex)
    for w, op in zip(weights, ops):
        full = np.ones((1, 1), dtype=complex)
        for _ in range(n):
            full = np.kron(op, full)
        out += w * full
    return out


def gaussian_register_state(n: int, mu: float | None = None, sigma: float | None = None) -> Statevector:
    """Real Gaussian profile exp(-((k - mu)/sigma)^2/2) over basis indices k."""
    k = np.arange(1 << n, dtype=float)
    mu = (k[-1]) / 2 if mu is None else mu
    sigma = mu / 3 if sigma is None else sigma
    return Statevector(np.exp(-0.5 * ((k - mu) / sigma) ** 2), normalize=True)
