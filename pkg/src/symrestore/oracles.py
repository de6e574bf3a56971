"""Generalized phase oracles and the projection methods built on them.

An oracle multiplies the Good sector by e^{i phi} and the rest by e^{i mu}.
Everything here runs on full registers: the Grover-Hoyer rotation is applied
with the preparation circuit rather than in a reduced two-level model.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from .errors import EmptySectorError, ValidationError
from .pauli import PauliSum
from .phase_estimation import ProjectionOutcome
from .rng import SeedLike, as_generator
from .statevector import Circuit, Statevector, evolve
from .symmetry import Projector, ProductProjector, SymmetryOperator

EMPTY_TOL = 1e-12
DENSE_CHECK_QUBITS = 8


def _amps(state) -> np.ndarray:
    return np.asarray(getattr(state, "amplitudes", state), dtype=complex)


class MaskProjector:
    """Projector onto the computational basis states selected by a mask or predicate."""

    def __init__(self, n: int, members: np.ndarray | Callable[[np.ndarray], np.ndarray]):
        self.n = n
        idx = np.arange(1 << n)
        mask = members(idx) if callable(members) else np.asarray(members)
        if mask.dtype != bool:
            full = np.zeros(1 << n, dtype=bool)
            full[mask] = True
            mask = full
        self.mask = mask

    def apply(self, amps) -> np.ndarray:
        return np.where(self.mask, _amps(amps), 0)

    def probability(self, amps) -> float:
        out = self.apply(amps)
        return float(np.vdot(out, out).real)


SectorProjector = Projector | ProductProjector | MaskProjector


@dataclass(eq=False)
class Oracle:
    """O = e^{i phi} P + e^{i mu} (I - P)."""

    projector: SectorProjector
    phi: float = np.pi
    mu: float = 0.0

    @property
    def n(self) -> int:
        return self.projector.n

    def apply(self, amps) -> np.ndarray:
        psi = _amps(amps)
        return np.exp(1j * self.mu) * psi + (np.exp(1j * self.phi) - np.exp(1j * self.mu)) * self.projector.apply(psi)

    def adjoint(self) -> "Oracle":
        return Oracle(self.projector, -self.phi, -self.mu)

    def matrix(self) -> np.ndarray:
        return np.column_stack([self.apply(col) for col in np.eye(1 << self.n, dtype=complex)])

    def lcu_coefficients(self) -> list[tuple[complex, float]]:
        """(beta_k, phi_k) with O = sum_k beta_k exp(i phi_k S); needs a symmetry projector."""
        if not isinstance(self.projector, Projector):
            raise ValidationError("unitary expansion needs a single-symmetry projector")
        out = []
        for k, (alpha, ang) in enumerate(self.projector.terms()):
            beta = (np.exp(1j * self.phi) - np.exp(1j * self.mu)) * alpha
            if k == 0:
                beta += np.exp(1j * self.mu)
            out.append((beta, ang))
        return out

    def lcu_apply(self, amps) -> np.ndarray:
        """Apply through the unitary expansion (each exp(i phi_k S) exactly)."""
        psi = _amps(amps)
        sym = self.projector.symmetry
        return sum(beta * sym.exp_apply(psi, ang) for beta, ang in self.lcu_coefficients())


def build_oracle(
    target: SectorProjector | SymmetryOperator | np.ndarray | Callable,
    phi: float = np.pi,
    mu: float = 0.0,
    lambda_target: float | None = None,
    n: int | None = None,
) -> Oracle:
    """Oracle from a projector, a (symmetry, eigenvalue) pair, or a basis-state membership rule."""
    if isinstance(target, SymmetryOperator):
        if lambda_target is None:
            raise ValidationError("a symmetry target needs lambda_target")
        return Oracle(Projector(target, lambda_target), phi, mu)
    if isinstance(target, (Projector, ProductProjector, MaskProjector)):
        return Oracle(target, phi, mu)
    if n is None:
        raise ValidationError("a membership rule needs the register size n")
    return Oracle(MaskProjector(n, target), phi, mu)


def projector_from_oracle(oracle: Oracle) -> np.ndarray:
    """(O - e^{i mu} I)/(e^{i phi} - e^{i mu}) as a dense matrix."""
    gap = np.exp(1j * oracle.phi) - np.exp(1j * oracle.mu)
    if abs(gap) < 1e-12:
        raise ValidationError("phi and mu give the same phase; the projector cannot be recovered")
    return (oracle.matrix() - np.exp(1j * oracle.mu) * np.eye(1 << oracle.n)) / gap


# ---------------------------------------------------------------------------
# amplitude amplification
# ---------------------------------------------------------------------------


def zero_reflection(amps: np.ndarray, phase: float = np.pi) -> np.ndarray:
    """I + (e^{i phase} - 1)|0><0|; phase pi gives I - 2|0><0|."""
    out = np.array(amps, dtype=complex)
    out[0] *= np.exp(1j * phase)
    return out


def reflect_about_prepared(amps: np.ndarray, prep: Circuit, phase: float = np.pi) -> np.ndarray:
    """-U O0(phase) U^dagger; with phase pi this is 2|psi><psi| - I."""
    inv = prep.inverse()
    return -evolve(zero_reflection(evolve(amps, inv), phase), prep)


def amplification_step(amps: np.ndarray, prep: Circuit, oracle: Oracle) -> np.ndarray:
    """One Grover iterate R_psi O."""
    return reflect_about_prepared(oracle.apply(amps), prep)


def amplitude_amplify(prep: Circuit, oracle: Oracle, m: int) -> tuple[Statevector, list[float]]:
    """Apply the Grover iterate m times to U|0>; returns the state and p_G after each step."""
    if m < 0:
        raise ValidationError("m must be nonnegative")
    amps = evolve(np.eye(1 << prep.n_qubits, dtype=complex)[0], prep)
    trace = [oracle.projector.probability(amps)]
    if trace[0] < EMPTY_TOL:
        raise EmptySectorError("prepared state has no Good component")
    for _ in range(m):
        amps = amplification_step(amps, prep, oracle)
        trace.append(oracle.projector.probability(amps))
    return Statevector(amps, normalize=True), trace


def grover_probability(theta: float, m) -> np.ndarray:
    return np.sin((2 * np.asarray(m) + 1) * theta) ** 2


# ---------------------------------------------------------------------------
# Grover-Hoyer exact rotation
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class HoyerParams:
    """Rotation angle and phases so that R(lambda) = e^{-iv} A^dag G(varphi_psi, phi_oracle) A.

    ``varphi_oracle`` is the phase of the reflection about the prepared
    state, ``phi_grover`` the Good-sector oracle phase, and A = diag(1, e^{iu}).
    """

    lam: float
    g: float
    varphi_oracle: float
    phi_grover: float
    u: float
    v: float


def grover_matrix(g: float, varphi: float, phi: float) -> np.ndarray:
    """G = U_psi O_phi in the {Bad, Good} basis of the prepared state."""
    w = 1 - np.exp(1j * varphi)
    r = np.sqrt(g * (1 - g))
    return np.array(
        [
            [-(w * g + np.exp(1j * varphi)), w * r * np.exp(1j * phi)],
            [w * r, (w * g - 1) * np.exp(1j * phi)],
        ]
    )


def rotation_matrix(lam: float) -> np.ndarray:
    return np.array([[np.cos(lam), -np.sin(lam)], [np.sin(lam), np.cos(lam)]])


def hoyer_residual(p: HoyerParams) -> float:
    a = np.diag([1.0, np.exp(1j * p.u)])
    rhs = np.exp(-1j * p.v) * a.conj().T @ grover_matrix(p.g, p.varphi_oracle, p.phi_grover) @ a
    return float(np.abs(rhs - rotation_matrix(p.lam)).max())


def hoyer_params(g: float, lam: float, tol: float = 1e-10) -> HoyerParams:
    """Solve for the reflection phase, oracle phase, u and v giving a rotation by lam."""
    if not 0 < g < 1:
        raise ValidationError("g must lie strictly between 0 and 1")
    theta = np.arcsin(np.sqrt(g))
    if lam < -1e-15 or lam > 2 * theta + 1e-12:
        raise ValidationError(f"rotation angle {lam} outside [0, 2 theta = {2 * theta}]")
    # for g > 1/2 the bound lam <= 2 theta is not enough; cos of the
    # reflection phase must stay in [-1, 1]
    if np.sin(lam) ** 2 > 4 * g * (1 - g) + 1e-12:
        raise ValidationError(f"rotation angle {lam} is not reachable for g = {g}")
    if abs(np.cos(lam)) < 1e-12:
        lam = lam - 1e-9
    cos_vp = np.clip(1 - np.sin(lam) ** 2 / (2 * g * (1 - g)), -1.0, 1.0)
    best = None
    # the half-angle relation fixes the oracle phase only modulo 2 pi, which
    # flips the sign of e^{iu}; both branches and both signs of the
    # reflection phase are tried and the identity decides
    for sign in (1.0, -1.0):
        vp = sign * np.arccos(cos_vp)
        v = float(np.angle(-((1 - np.exp(1j * vp)) * g + np.exp(1j * vp)) / np.cos(lam)))
        for branch in (0.0, 2 * np.pi):
            ph = 2 * np.arctan2(np.sin(vp / 2) * (1 - 2 * g), np.cos(vp / 2)) + branch
            params = HoyerParams(float(lam), float(g), float(vp), float(ph), float((np.pi - ph) / 2), v)
            res = hoyer_residual(params)
            if best is None or res < best[0]:
                best = (res, params)
    if best[0] > tol:
        raise ValidationError(f"rotation identity not satisfied (residual {best[0]:.2e})")
    return best[1]


def hoyer_schedule(g: float) -> tuple[str, int, float]:
    """('grover', k, 2 theta) when k = (pi/(2 theta) - 1)/2 is whole, else ('hoyer', m, lam)."""
    if not 0 < g < 1:
        raise ValidationError("g must lie strictly between 0 and 1")
    theta = np.arcsin(np.sqrt(g))
    k = 0.5 * (np.pi / (2 * theta) - 1)
    if abs(k - round(k)) < 1e-9:
        return "grover", int(round(k)), 2 * theta
    w = np.pi / 2 - theta
    m = int(np.ceil(w / (2 * theta) - 1e-12))
    return "hoyer", m, w / m


def grover_hoyer_project(prep: Circuit, target: SectorProjector, g: float | None = None) -> tuple[Statevector, dict]:
    """Rotate U|0> exactly onto its normalized Good component.

    ``g`` defaults to the Good probability read from the statevector.
    Returns the final state and a summary dict (method, iterations, params).
    """
    n = prep.n_qubits
    psi = evolve(np.eye(1 << n, dtype=complex)[0], prep)
    g = target.probability(psi) if g is None else g
    if g < EMPTY_TOL:
        raise EmptySectorError("prepared state has no Good component")
    if g > 1 - EMPTY_TOL:
        return Statevector(psi, normalize=True), {"method": "none", "iterations": 0}
    kind, m, lam = hoyer_schedule(g)
    if kind == "grover":
        state, trace = amplitude_amplify(prep, Oracle(target, np.pi, 0.0), m)
        return state, {"method": "grover", "iterations": m, "trace": trace}
    p = hoyer_params(g, lam)
    oracle = Oracle(target, p.phi_grover, 0.0)
    a = Oracle(target, p.u, 0.0)
    amps = a.apply(psi)
    for _ in range(m):
        amps = reflect_about_prepared(oracle.apply(amps), prep, p.varphi_oracle)
    amps = a.adjoint().apply(amps) * np.exp(-1j * m * p.v)
    return Statevector(amps, normalize=True), {"method": "hoyer", "iterations": m, "params": p}


# ---------------------------------------------------------------------------
# oracle + Hadamard test projection
# ---------------------------------------------------------------------------


def oracle_hadamard_branches(state, target: SectorProjector) -> tuple[np.ndarray, np.ndarray]:
    """Ancilla branches after H, controlled O(pi, 0), H: (|0> -> (I-P)psi, |1> -> P psi)."""
    psi = _amps(state)
    o = Oracle(target, np.pi, 0.0).apply(psi)
    return 0.5 * (psi + o), 0.5 * (psi - o)


def oracle_hadamard_project(
    state, target: SectorProjector, mode: str = "exact", rng_seed: SeedLike = None, keep: int = 1
) -> ProjectionOutcome:
    """Ancilla 1 selects P psi, ancilla 0 selects (I - P) psi (``keep`` picks which is accepted)."""
    b0, b1 = oracle_hadamard_branches(state, target)
    branches = (b0, b1)
    probs = [float(np.vdot(b, b).real) for b in branches]
    if mode == "exact":
        chosen = keep
    elif mode == "sample":
        chosen = int(as_generator(rng_seed).random() < probs[1])
    else:
        raise ValidationError("mode must be 'exact' or 'sample'")
    p_keep = probs[keep]
    if chosen != keep:
        return ProjectionOutcome(None, False, chosen, p_keep, rounds=1)
    if p_keep < 1e-14:
        raise EmptySectorError("requested branch has zero probability")
    return ProjectionOutcome(Statevector(branches[keep], normalize=True), True, chosen, p_keep, rounds=1)


# ---------------------------------------------------------------------------
# implicit projection
# ---------------------------------------------------------------------------


def check_commutes(observable: PauliSum, projector: Projector, tol: float = 1e-10) -> None:
    """Raise unless [A, P] = 0 (symbolic test on [A, S], dense fallback up to 8 qubits)."""
    if len(observable.commutator(projector.symmetry.op).simplify(tol)) == 0:
        return
    if observable.n > DENSE_CHECK_QUBITS:
        raise ValidationError("observable does not commute with the symmetry operator")
    a = observable.to_matrix()
    p = projector.matrix()
    if np.abs(a @ p - p @ a).max() > tol:
        raise ValidationError("observable does not commute with the projector")


def _sampled(value: complex, shots: int, rng: np.random.Generator) -> tuple[complex, float]:
    """Hadamard-test estimates of Re and Im of a unit-bounded value; returns (estimate, stderr)."""
    out, var = [], 0.0
    for part in (value.real, value.imag):
        p0 = min(max((1 + part) / 2, 0.0), 1.0)
        est = 2 * rng.binomial(shots, p0) / shots - 1
        out.append(est)
        var += max(1 - est**2, 0.0) / shots
    return complex(out[0], out[1]), float(np.sqrt(var))


def _unitary_expectations(psi: np.ndarray, observable: PauliSum | None, unitaries: Sequence[np.ndarray],
                          shots: int | None, rng) -> tuple[list[complex], float]:
    """<psi| A U_k |psi> for each precomputed U_k|psi>, exact or term-by-term sampled."""
    values, var = [], 0.0
    for upsi in unitaries:
        if observable is None:
            exact = complex(np.vdot(psi, upsi))
            if shots is None:
                values.append(exact)
            else:
                est, err = _sampled(exact, shots, rng)
                values.append(est)
                var += err**2
            continue
        total = 0j
        for p, w in observable.items():
            pauli = PauliSum.from_string(p)
            exact = complex(np.vdot(psi, pauli.apply(upsi)))
            if shots is None:
                total += w * exact
            else:
                est, err = _sampled(exact, shots, rng)
                total += w * est
                var += abs(w) ** 2 * err**2
        values.append(total)
    return values, float(np.sqrt(var))


def implicit_expectation(
    state,
    observable: PauliSum,
    symmetry: SymmetryOperator,
    lambda_target: float,
    via: str = "projector",
    shots: int | None = None,
    rng_seed: SeedLike = None,
    oracle_phases: tuple[float, float] = (np.pi, 0.0),
    return_error: bool = False,
):
    """<A P>/<P> assembled from unitary expectation values, never forming P psi.

    ``via="projector"`` sums alpha_k <A e^{i phi_k S}> and alpha_k <e^{i phi_k S}>;
    ``via="oracle"`` uses (<A O> - e^{i mu}<A>)/(<O> - e^{i mu}).
    Shot-sampled mode propagates per-term standard errors in quadrature.
    """
    proj = Projector(symmetry, lambda_target)
    check_commutes(observable, proj)
    psi = _amps(state)
    rng = as_generator(rng_seed) if shots is not None else None
    if via == "projector":
        terms = list(proj.terms())
        ups = [symmetry.exp_apply(psi, ang) for _a, ang in terms]
        alphas = np.array([a for a, _ang in terms])
        num_vals, num_err = _unitary_expectations(psi, observable, ups, shots, rng)
        den_vals, den_err = _unitary_expectations(psi, None, ups, shots, rng)
        num = complex(np.dot(alphas, num_vals))
        den = complex(np.dot(alphas, den_vals))
        num_err *= np.abs(alphas).max()
        den_err *= np.abs(alphas).max()
    elif via == "oracle":
        phi, mu = oracle_phases
        o_psi = Oracle(proj, phi, mu).apply(psi)
        (a_o, a_plain), num_err = _unitary_expectations(psi, observable, [o_psi, psi], shots, rng)
        (o_val,), den_err = _unitary_expectations(psi, None, [o_psi], shots, rng)
        gap = np.exp(1j * phi) - np.exp(1j * mu)
        num = (a_o - np.exp(1j * mu) * a_plain) / gap
        den = (o_val - np.exp(1j * mu)) / gap
        num_err /= abs(gap)
        den_err /= abs(gap)
    else:
        raise ValidationError("via must be 'projector' or 'oracle'")
    if abs(den) < EMPTY_TOL:
        raise EmptySectorError("<P> is below threshold; the sector is empty")
    value = float((num / den).real)
    if not return_error:
        return value
    err = abs(value) * np.hypot(num_err / max(abs(num), EMPTY_TOL), den_err / abs(den))
    return value, float(err)


def oracle_expectation(state, observable: PauliSum, oracle: Oracle) -> complex:
    """<V O> for a generalized oracle."""
    psi = _amps(state)
    return complex(np.vdot(psi, observable.apply(oracle.apply(psi))))


def oracle_vap_expectation(
    state,
    observable: PauliSum,
    symmetry: SymmetryOperator,
    lambda_target: float,
    normalized: bool = True,
    phases: tuple[float, float] = (0.0, np.pi / 2),
) -> float:
    """Re<V O> with (phi, mu) = (0, pi/2), which equals <Psi_G|V|Psi_G>.

    ``normalized`` divides by Re<O> = <P>, giving <V P>/<P>.
    """
    proj = Projector(symmetry, lambda_target)
    check_commutes(observable, proj)
    oracle = Oracle(proj, *phases)
    val = oracle_expectation(state, observable, oracle).real
    if not normalized:
        return float(val)
    den = complex(np.vdot(_amps(state), oracle.apply(state))).real
    if abs(den) < EMPTY_TOL:
        raise EmptySectorError("<P> is below threshold; the sector is empty")
    return float(val / den)
