"""BCS ansatz, number-constrained VQE and projected (Q-PAV / Q-VAP) energies."""

from __future__ import annotations

import json
from dataclasses import asdict, dataclass, field
from functools import reduce
from typing import Sequence

import numpy as np
from scipy.optimize import brentq, minimize

from .errors import EmptySectorError, NumericalError, ValidationError
from .models import PairingModel, build_pairing
from .oracles import Oracle, check_commutes, implicit_expectation
from .rng import as_generator
from .statevector import Circuit, Statevector, apply_circuit, ry
from .symmetry import Projector, symmetry_operator

EMPTY_TOL = 1e-12


@dataclass(frozen=True)
class BcsAnsatz:
    """Product state prod_k [sin t_k |0> + cos t_k |1>]."""

    thetas: tuple[float, ...]

    def __post_init__(self):
        object.__setattr__(self, "thetas", tuple(float(t) for t in self.thetas))

    @property
    def n(self) -> int:
        return len(self.thetas)

    def circuit(self) -> Circuit:
        return Circuit(self.n, [ry(k, np.pi - 2 * t) for k, t in enumerate(self.thetas)])

    def amplitudes(self) -> np.ndarray:
        return product_amplitudes([(np.sin(t), np.cos(t)) for t in self.thetas])


def product_amplitudes(factors: Sequence[tuple[complex, complex]]) -> np.ndarray:
    """Amplitudes of a product state; factors[k] = (a_0, a_1) for qubit k (qubit 0 least significant)."""
    return reduce(np.kron, [np.asarray(f, dtype=complex) for f in reversed(factors)], np.ones(1, dtype=complex))


def prepare_bcs(thetas: Sequence[float]) -> Statevector:
    """Run the R_y(pi - 2 theta_k) layer on |0...0>."""
    ansatz = BcsAnsatz(tuple(thetas))
    return apply_circuit(Statevector.zero(ansatz.n), ansatz.circuit())


def mean_pairs(thetas: Sequence[float]) -> float:
    return float(np.sum(np.cos(np.asarray(thetas)) ** 2))


def bcs_energy_closed_form(model: PairingModel, thetas: Sequence[float]) -> float:
    """<H> on the product state: 2 sum e_p v_p^2 - g [(sum u v)^2 - sum (u v)^2]."""
    t = np.asarray(thetas, dtype=float)
    v2 = np.cos(t) ** 2
    uv = np.sin(t) * np.cos(t)
    return float(2 * model.shifted_levels @ v2 - model.g * (uv.sum() ** 2 - (uv**2).sum()))


def pairing_gap(model: PairingModel, thetas: Sequence[float]) -> float:
    """Delta = g sum_p sin(theta_p) cos(theta_p)."""
    t = np.asarray(thetas, dtype=float)
    return float(model.g * np.sum(np.sin(t) * np.cos(t)))


def initial_fermi_energy(model: PairingModel) -> float:
    """Midpoint between the last filled and first empty level."""
    e = np.sort(model.shifted_levels)
    a = model.a_pairs
    if a == 0:
        return float(e[0] - model.delta_e)
    if a == model.n_levels:
        return float(e[-1] + model.delta_e)
    return float(0.5 * (e[a - 1] + e[a]))


class _Energy:
    """Cached sparse H and N for fast expectation values on a fixed register."""

    def __init__(self, model: PairingModel):
        self.model = model
        self.h = build_pairing(model)
        self.h_sparse = self.h.to_sparse()
        self.number = symmetry_operator("number", model.n_levels)
        self.n_diag = self.number.op.diagonal().real

    def amps(self, thetas) -> np.ndarray:
        return BcsAnsatz(tuple(thetas)).amplitudes()

    def energy(self, amps) -> float:
        return float(np.vdot(amps, self.h_sparse @ amps).real)

    def pairs(self, amps) -> float:
        return float(np.sum(self.n_diag * np.abs(amps) ** 2))


@dataclass
class VqeConfig:
    eps_tol: float = 1e-4
    max_outer_iters: int = 50
    opt_tol: float = 1e-12
    restarts: int = 3
    seed: int = 0

    def __post_init__(self):
        if self.eps_tol <= 0:
            raise ValidationError("eps_tol must be positive")
        if self.max_outer_iters < 1 or self.restarts < 1:
            raise ValidationError("max_outer_iters and restarts must be positive")


@dataclass
class VqeResult:
    thetas: list[float]
    lambda_f: float
    e_bcs: float
    n_mean: float
    gap: float
    e_pav: float | None = None
    e_vap: float | None = None
    thetas_vap: list[float] | None = None
    trace: list[dict] = field(default_factory=list)

    def to_dict(self) -> dict:
        return asdict(self)

    def to_json(self, **kwargs) -> str:
        return json.dumps(self.to_dict(), **kwargs)

    @classmethod
    def from_json(cls, text: str) -> "VqeResult":
        return cls(**json.loads(text))


def _local_minimize(fun, starts: Sequence[np.ndarray], tol: float) -> tuple[np.ndarray, float]:
    best = None
    for x0 in starts:
        res = minimize(fun, x0, method="L-BFGS-B", options={"ftol": tol, "gtol": 1e-10, "maxiter": 2000})
        if best is None or res.fun < best[1] - 1e-14:
            best = (res.x, float(res.fun))
    return best


def _starts(warm: np.ndarray | None, n: int, count: int, rng: np.random.Generator) -> list[np.ndarray]:
    starts = [] if warm is None else [np.asarray(warm, dtype=float)]
    while len(starts) < count:
        starts.append(rng.uniform(0.05, np.pi / 2 - 0.05, size=n))
    return starts


def vqe_minimize(model: PairingModel, config: VqeConfig | None = None) -> VqeResult:
    """Minimize <H - 2 lambda_F (N - A_p)> over the BCS angles, updating lambda_F by secant steps.

    lambda_F is a single-particle Fermi energy, so each pair carries 2 lambda_F.
    The inner minimization restarts from ``config.restarts`` seeded points
    (the previous optimum included) and lambda_F moves once per inner
    convergence until |<N> - A_p| <= eps_tol.
    """
    config = config or VqeConfig()
    ev = _Energy(model)
    rng = as_generator(config.seed)
    n, a = model.n_levels, model.a_pairs
    trace: list[dict] = []

    def inner(lam: float, warm):
        def cost(t):
            amps = ev.amps(t)
            return ev.energy(amps) - 2 * lam * (ev.pairs(amps) - a)

        x, c = _local_minimize(cost, _starts(warm, n, config.restarts, rng), config.opt_tol)
        amps = ev.amps(x)
        f = ev.pairs(amps) - a
        trace.append({"lambda_f": lam, "n_mean": f + a, "cost": c, "energy": ev.energy(amps)})
        return x, f

    lam0 = initial_fermi_energy(model)
    x, f0 = inner(lam0, None)
    lam_prev, f_prev = lam0, f0
    lam = lam0 - 0.1 * model.delta_e * np.sign(f0)
    lo = hi = None  # bracket: f(lo) < 0 < f(hi)
    for _ in range(config.max_outer_iters):
        if abs(f_prev) <= config.eps_tol:
            break
        if f_prev < 0:
            lo = lam_prev if lo is None else max(lo, lam_prev)
        else:
            hi = lam_prev if hi is None else min(hi, lam_prev)
        x, f = inner(lam, x)
        if abs(f) <= config.eps_tol:
            lam_prev, f_prev = lam, f
            break
        if f < 0:
            lo = lam if lo is None else max(lo, lam)
        else:
            hi = lam if hi is None else min(hi, lam)
        if abs(f - f_prev) > 1e-14:
            step = lam - f * (lam - lam_prev) / (f - f_prev)
        else:
            step = lam - 2 * (lam - lam_prev)
        if lo is not None and hi is not None and not min(lo, hi) < step < max(lo, hi):
            step = 0.5 * (lo + hi)
        lam_prev, f_prev, lam = lam, f, float(step)
    else:
        raise NumericalError(f"particle number not within {config.eps_tol} after {config.max_outer_iters} updates")
    if abs(f_prev) > config.eps_tol:
        raise NumericalError(f"particle number not within {config.eps_tol} after {config.max_outer_iters} updates")
    amps = ev.amps(x)
    return VqeResult(
        thetas=[float(t) for t in x],
        lambda_f=float(lam_prev),
        e_bcs=ev.energy(amps),
        n_mean=ev.pairs(amps),
        gap=pairing_gap(model, x),
        trace=trace,
    )


# ---------------------------------------------------------------------------
# classical reference
# ---------------------------------------------------------------------------


@dataclass
class ClassicalBcs:
    thetas: np.ndarray
    lambda_f: float
    gap: float
    energy: float
    iterations: int


def classical_bcs(model: PairingModel, tol: float = 1e-12, max_iter: int = 20000, damping: float = 0.5) -> ClassicalBcs:
    """Self-consistent gap equations for the same energy functional.

    v_p^2 = (1 - (e_p - lambda)/E_p)/2 with E_p = sqrt((e_p - lambda)^2 + D_p^2)
    and D_p = Delta - g u_p v_p (the pair does not scatter into itself).
    lambda is fixed each sweep by sum v_p^2 = A_p. Starting from a large gap
    the iteration either settles on the superfluid solution or collapses to
    the sharp Fermi surface.
    """
    e = model.shifted_levels
    a = model.a_pairs
    g = model.g
    if a in (0, model.n_levels) or g == 0:
        t = np.where(np.argsort(np.argsort(e)) < a, 0.0, np.pi / 2)
        return ClassicalBcs(t, initial_fermi_energy(model), 0.0, bcs_energy_closed_form(model, t), 0)
    uv = np.full(e.size, 0.5)
    lam = initial_fermi_energy(model)
    spread = float(np.ptp(e)) + 10 * abs(g) * e.size + 1.0

    def occupations(lmb, dp):
        ep = np.sqrt((e - lmb) ** 2 + dp**2)
        with np.errstate(invalid="ignore", divide="ignore"):
            v2 = np.where(ep > 0, 0.5 * (1 - (e - lmb) / np.where(ep > 0, ep, 1)), 0.5)
        return v2, ep

    for it in range(1, max_iter + 1):
        dp = g * (uv.sum() - uv)
        lam = brentq(lambda l: occupations(l, dp)[0].sum() - a, e.min() - spread, e.max() + spread, xtol=1e-15)
        v2, ep = occupations(lam, dp)
        new_uv = np.where(ep > 0, 0.5 * dp / np.where(ep > 0, ep, 1), 0.0)
        delta = np.abs(new_uv - uv).max()
        uv = damping * uv + (1 - damping) * new_uv
        if delta < tol:
            break
    thetas = np.arccos(np.sqrt(np.clip(v2, 0, 1)))
    return ClassicalBcs(thetas, float(lam), float(g * uv.sum()), bcs_energy_closed_form(model, thetas), it)


# ---------------------------------------------------------------------------
# projected energies
# ---------------------------------------------------------------------------


def _default_projector(model: PairingModel) -> Projector:
    return Projector(symmetry_operator("number", model.n_levels), model.a_pairs)


def q_pav(thetas: Sequence[float], model: PairingModel, projector: Projector | None = None, via: str = "exact") -> float:
    """<H P>/<P> on the optimized BCS state.

    ``via``: ``exact`` applies the projector, ``projector`` and ``oracle``
    assemble the ratio from unitary expectation values.
    """
    projector = projector or _default_projector(model)
    h = build_pairing(model)
    amps = BcsAnsatz(tuple(thetas)).amplitudes()
    if via == "exact":
        check_commutes(h, projector)
        return projector.projected_expectation(amps, h)
    return implicit_expectation(amps, h, projector.symmetry, projector.target, via=via)


def q_vap(
    model: PairingModel,
    projector: Projector | None = None,
    config: VqeConfig | None = None,
    route: str = "projector",
    start: Sequence[float] | None = None,
) -> tuple[np.ndarray, float]:
    """Minimize the projected energy directly over the BCS angles.

    ``route="oracle"`` evaluates Re<H O>/Re<O> with the (0, pi/2) oracle in
    place of <H P>/<P>. ``start`` (e.g. the BCS optimum) is always one of
    the restart points, so the result never exceeds the projected energy there.
    """
    config = config or VqeConfig()
    projector = projector or _default_projector(model)
    ev = _Energy(model)
    check_commutes(ev.h, projector)
    if route == "projector":
        def cost(t):
            amps = ev.amps(t)
            p_amps = projector.apply(amps)
            den = float(np.vdot(amps, p_amps).real)
            if den < EMPTY_TOL:
                return 1e6
            return float(np.vdot(amps, ev.h_sparse @ p_amps).real) / den
    elif route == "oracle":
        oracle = Oracle(projector, 0.0, np.pi / 2)

        def cost(t):
            amps = ev.amps(t)
            o_amps = oracle.apply(amps)
            den = float(np.vdot(amps, o_amps).real)
            if den < EMPTY_TOL:
                return 1e6
            return float(np.vdot(amps, ev.h_sparse @ o_amps).real) / den
    else:
        raise ValidationError("route must be 'projector' or 'oracle'")
    rng = as_generator(config.seed)
    starts = _starts(None if start is None else np.asarray(start, dtype=float), model.n_levels, config.restarts, rng)
    x, e = _local_minimize(cost, starts, config.opt_tol)
    if e >= 1e6:
        raise EmptySectorError("optimizer never found a state with weight in the target sector")
    return x, e


def relative_error(e_approx: float, e_exact: float) -> float:
    """|(E_approx - E_exact)/E_approx| * 100 for correlation energies."""
    if abs(e_approx) < 1e-300:
        raise ValidationError("approximate correlation energy is zero")
    return float(abs((e_approx - e_exact) / e_approx) * 100)


def qp_excited_state(thetas: Sequence[float], indices: Sequence[int]) -> Statevector:
    """Flip the factors on ``indices`` to -cos|0> + sin|1>, orthogonal to the BCS factor."""
    n = len(thetas)
    idx = set(indices)
    if len(idx) != len(indices):
        raise ValidationError("quasiparticle indices must be distinct")
    if any(not 0 <= i < n for i in idx):
        raise ValidationError("quasiparticle index out of range")
    factors = [(-np.cos(t), np.sin(t)) if k in idx else (np.sin(t), np.cos(t)) for k, t in enumerate(thetas)]
    return Statevector(product_amplitudes(factors))


def quasiparticle_energies(model: PairingModel, lambda_f: float, gap: float) -> np.ndarray:
    return np.sqrt((model.shifted_levels - lambda_f) ** 2 + gap**2)


def qp_energy(model: PairingModel, thetas: Sequence[float], lambda_f: float, indices: Sequence[int]) -> float:
    """E_BCS + 2 sum_i E_i with E_i = sqrt((e_i - lambda)^2 + Delta^2)."""
    if len(set(indices)) != len(indices):
        raise ValidationError("quasiparticle indices must be distinct")
    if any(not 0 <= i < model.n_levels for i in indices):
        raise ValidationError("quasiparticle index out of range")
    qp = quasiparticle_energies(model, lambda_f, pairing_gap(model, thetas))
    return bcs_energy_closed_form(model, thetas) + 2 * float(sum(qp[i] for i in indices))


def energy_hierarchy(model: PairingModel, config: VqeConfig | None = None, route: str = "projector") -> VqeResult:
    """BCS, Q-PAV and Q-VAP energies for one coupling, Q-VAP warm-started at the BCS angles."""
    res = vqe_minimize(model, config)
    res.e_pav = q_pav(res.thetas, model)
    x, e = q_vap(model, config=config, route=route, start=res.thetas)
    res.e_vap, res.thetas_vap = e, [float(t) for t in x]
    return res
