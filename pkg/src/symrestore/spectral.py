"""Generating functions, moments, t-expansion and Krylov spectral estimates."""

from __future__ import annotations

from dataclasses import dataclass, field
from math import comb, factorial
from typing import Sequence

import mpmath
import numpy as np
import scipy.linalg as sla
from scipy.integrate import solve_ivp
from scipy.optimize import brentq
from scipy.interpolate import pade

from .errors import NumericalError, ValidationError
from .models import Spectrum, state_spectrum
from .pauli import PauliSum
from .rng import SeedLike, as_generator
from .statevector import evolve
from .trotter import TrotterPlan, commuting_groups, trotter_circuit

MP_DIGITS = 60


def _amps(state) -> np.ndarray:
    return np.asarray(getattr(state, "amplitudes", state), dtype=complex)


# ---------------------------------------------------------------------------
# generating function
# ---------------------------------------------------------------------------


@dataclass
class GeneratingFunctionSeries:
    """F(t) = <psi|exp(-i t H)|psi> on an ascending time grid."""

    times: np.ndarray
    values: np.ndarray
    source: str = "exact"
    stderr: np.ndarray | None = None

    def __post_init__(self):
        self.times = np.asarray(self.times, dtype=float)
        self.values = np.asarray(self.values, dtype=complex)
        if self.times.shape != self.values.shape:
            raise ValidationError("times and values differ in length")
        if np.any(np.diff(self.times) <= 0):
            raise ValidationError("time grid must be strictly ascending")

    def step(self) -> float:
        d = np.diff(self.times)
        if d.size == 0 or np.ptp(d) > 1e-9 * max(abs(d[0]), 1e-300):
            raise ValidationError("operation needs a uniform time grid")
        return float(d.mean())

    def reflected(self) -> "GeneratingFunctionSeries":
        """Extend a t >= 0 series to negative times with F(-t) = conj F(t)."""
        if abs(self.times[0]) > 1e-12:
            raise ValidationError("reflection needs a series starting at t = 0")
        t = np.concatenate([-self.times[:0:-1], self.times])
        v = np.concatenate([np.conj(self.values[:0:-1]), self.values])
        err = None if self.stderr is None else np.concatenate([self.stderr[:0:-1], self.stderr])
        return GeneratingFunctionSeries(t, v, self.source, err)


def spectral_gf(spectrum: Spectrum, times) -> np.ndarray:
    t = np.asarray(times, dtype=float)
    return np.exp(-1j * np.outer(t, spectrum.energies)) @ spectrum.weights


def compute_gf(
    state,
    h: PauliSum,
    times: Sequence[float],
    source: str = "exact",
    trotter_steps: int = 1,
    order: int = 2,
    shots: int | None = None,
    rng_seed: SeedLike = None,
) -> GeneratingFunctionSeries:
    """F(t) from the eigendecomposition, Trotter circuits, or sampled Hadamard tests.

    ``trotter_steps`` is the number of product-formula steps per unit time
    (at least one per point). The ``hadamard`` source draws ``shots``
    ancilla readouts for the real and the imaginary part at each point from
    the exact Hadamard-test outcome probabilities (1 +- Re/Im F)/2.
    """
    times = np.asarray(times, dtype=float)
    if np.any(np.diff(times) <= 0):
        raise ValidationError("time grid must be strictly ascending")
    psi = _amps(state)
    if source == "exact":
        return GeneratingFunctionSeries(times, spectral_gf(state_spectrum(psi, h), times), "exact")
    if source == "trotter":
        groups = commuting_groups(h)
        vals = []
        for t in times:
            if t == 0:
                vals.append(complex(np.vdot(psi, psi)))
                continue
            steps = max(1, int(np.ceil(abs(t) * trotter_steps)))
            circ = trotter_circuit(groups, TrotterPlan(order, steps, float(t)))
            vals.append(complex(np.vdot(psi, evolve(psi, circ))))
        return GeneratingFunctionSeries(times, np.array(vals), f"trotter({trotter_steps})")
    if source == "hadamard":
        if shots is None or shots < 1:
            raise ValidationError("hadamard source needs shots >= 1")
        exact = spectral_gf(state_spectrum(psi, h), times)
        rng = as_generator(rng_seed)
        parts, errs = [], []
        for comp in (exact.real, exact.imag):
            p0 = np.clip((1 + comp) / 2, 0, 1)
            est = 2 * rng.binomial(shots, p0) / shots - 1
            parts.append(est)
            errs.append(np.sqrt(np.maximum(1 - est**2, 0) / shots))
        vals = parts[0] + 1j * parts[1]
        return GeneratingFunctionSeries(times, vals, f"hadamard({shots})", np.hypot(errs[0], errs[1]))
    raise ValidationError("source must be 'exact', 'trotter' or 'hadamard'")


# ---------------------------------------------------------------------------
# Fourier analysis
# ---------------------------------------------------------------------------


@dataclass
class SpectrumEstimate:
    energies: np.ndarray
    weights: np.ndarray
    resolution: float
    heights: np.ndarray
    frequencies: np.ndarray = field(repr=False, default=None)
    transform: np.ndarray = field(repr=False, default=None)
    flagged: bool = False


def fourier_transform(series: GeneratingFunctionSeries, zero_pad: int = 4) -> tuple[np.ndarray, np.ndarray, float]:
    """s(nu) = dt sum_j F(t_j) exp(-2 pi i nu t_j) over the symmetric window; returns (nu, s, T)."""
    if zero_pad < 1:
        raise ValidationError("zero_pad must be at least 1")
    full = series.reflected() if abs(series.times[0]) < 1e-12 else series
    dt = full.step()
    n = full.times.size
    n_fft = int(2 ** np.ceil(np.log2(n * zero_pad)))
    nu = np.fft.fftshift(np.fft.fftfreq(n_fft, dt))
    t0 = full.times[0]
    vals = np.zeros(n_fft, dtype=complex)
    vals[:n] = full.values
    # the FFT treats the first sample as t = 0; restore the true start time
    spec = dt * np.fft.fftshift(np.fft.fft(vals)) * np.exp(-2j * np.pi * nu * t0)
    return nu, spec, n * dt


def dirichlet_kernel(x, dt: float, n_points: int) -> np.ndarray:
    """dt sum_j exp(-2 pi i x t_j) for n_points samples symmetric about t = 0 (a real function)."""
    x = np.asarray(x, dtype=float)
    den = np.sin(np.pi * x * dt)
    small = np.abs(den) < 1e-14
    return dt * np.where(small, n_points, np.sin(np.pi * x * dt * n_points) / np.where(small, 1.0, den))


def fourier_peaks(
    series: GeneratingFunctionSeries,
    zero_pad: int = 4,
    prominence: float = 1e-3,
    min_separation: float | None = None,
    max_peaks: int = 500,
) -> SpectrumEstimate:
    """Peaks of Re s(nu) by successive subtraction of the finite-window line shape.

    The tallest remaining maximum of the residual transform is located on the
    zero-padded grid and refined to the root of its derivative; the matching
    component w exp(2 pi i nu t) is then removed from the time series. This
    stops when the residual maximum falls below ``prominence`` times the
    first peak or lands within 1/T of a level already found, so sidelobes of the rectangular window are not reported as
    levels. Energies are -2 pi nu. ``heights`` holds the raw weights (their
    sum approaches 1 for long windows); ``weights`` are normalized to sum 1.
    ``flagged`` is set when the resolution 2 pi/T exceeds ``min_separation``.
    """
    full = series.reflected() if abs(series.times[0]) < 1e-12 else series
    if abs(full.times[0] + full.times[-1]) > 1e-9 * max(1.0, abs(full.times[-1])):
        raise ValidationError("series must start at t = 0 or be symmetric about it")
    nu, spec, t_window = fourier_transform(full, zero_pad)
    dt, t = full.step(), full.times
    d_nu = nu[1] - nu[0]
    resid = full.values.copy()

    def slope(x: float) -> float:
        return float(np.real(dt * np.sum(resid * (-2j * np.pi * t) * np.exp(-2j * np.pi * x * t))))

    centres: list[float] = []
    heights = np.zeros(0)
    first = None
    for _ in range(max_peaks):
        _nu, grid, _t = fourier_transform(GeneratingFunctionSeries(t, resid), zero_pad)
        re = grid.real
        i = int(np.argmax(re))
        if first is None:
            first = re[i]
            if first <= 0:
                raise NumericalError("transform has no positive peak")
        if re[i] < prominence * first:
            break
        lo, hi = nu[i] - d_nu, nu[i] + d_nu
        if slope(lo) > 0 > slope(hi):
            centre = brentq(slope, lo, hi, xtol=1e-15, rtol=4 * np.finfo(float).eps)
        else:
            centre = nu[i]
        if centres and np.min(np.abs(np.array(centres) - centre)) < 1 / t_window:
            break  # what remains is leakage the window cannot resolve
        centres.append(centre)
        # joint refit: every weight is re-estimated so overlapping tails do not leak
        c = np.array(centres)
        gram = dirichlet_kernel(c[:, None] - c[None, :], 1.0, t.size)
        proj = np.array([np.real(np.sum(full.values * np.exp(-2j * np.pi * ck * t))) for ck in c])
        heights = np.linalg.solve(gram, proj)
        resid = full.values - np.exp(2j * np.pi * np.outer(t, c)) @ heights
    energies = -2 * np.pi * np.array(centres)
    heights = np.asarray(heights, dtype=float)
    order = np.argsort(energies)
    energies, heights = energies[order], heights[order]
    resolution = 2 * np.pi / t_window
    flagged = min_separation is not None and resolution > min_separation
    weights = heights / heights.sum()
    return SpectrumEstimate(energies, weights, resolution, heights, nu, spec, bool(flagged))


# ---------------------------------------------------------------------------
# moments and cumulants
# ---------------------------------------------------------------------------


@dataclass
class MomentSet:
    """<(H - shift)^k> for k = 0..k_max."""

    values: np.ndarray
    shift: float = 0.0
    errors: np.ndarray | None = None
    source: str = "spectrum"

    @property
    def k_max(self) -> int:
        return len(self.values) - 1

    def unshifted(self) -> np.ndarray:
        """<H^k> recovered by the binomial expansion (in extended precision)."""
        with mpmath.workdps(MP_DIGITS):
            m = [mpmath.mpf(v) for v in self.values]
            c = mpmath.mpf(self.shift)
            out = [sum(comb(k, j) * m[j] * c ** (k - j) for j in range(k + 1)) for k in range(len(m))]
            return np.array([float(v) for v in out])


@dataclass
class CumulantSet:
    """kappa_k for k = 1..k_max (index 0 unused and set to 0)."""

    values: np.ndarray

    @property
    def k_max(self) -> int:
        return len(self.values) - 1


def moments_from_spectrum(energies, weights, k_max: int, shift: float = 0.0) -> MomentSet:
    """sum_j w_j (E_j - shift)^k."""
    e = np.asarray(energies, dtype=float) - shift
    w = np.asarray(weights, dtype=float)
    with mpmath.workdps(MP_DIGITS):
        vals = [float(mpmath.fsum(mpmath.mpf(wi) * mpmath.mpf(ei) ** k for wi, ei in zip(w, e))) for k in range(k_max + 1)]
    return MomentSet(np.array(vals), shift, None, "spectrum")


def fornberg_weights(x0: float, grid: Sequence[float], order: int) -> np.ndarray:
    """Finite-difference weights for the ``order``-th derivative at x0 on an arbitrary grid."""
    x = np.asarray(grid, dtype=float)
    n = x.size
    if order >= n:
        raise ValidationError("stencil too small for this derivative order")
    c = np.zeros((n, order + 1))
    c[0, 0] = 1.0
    c1, c4 = 1.0, x[0] - x0
    for i in range(1, n):
        mn = min(i, order)
        c2, c5, c4 = 1.0, c4, x[i] - x0
        for j in range(i):
            c3 = x[i] - x[j]
            c2 *= c3
            if j == i - 1:
                for k in range(mn, 0, -1):
                    c[i, k] = c1 * (k * c[i - 1, k - 1] - c5 * c[i - 1, k]) / c2
                c[i, 0] = -c1 * c5 * c[i - 1, 0] / c2
            for k in range(mn, 0, -1):
                c[j, k] = (c4 * c[j, k] - k * c[j, k - 1]) / c3
            c[j, 0] = c4 * c[j, 0] / c3
        c1 = c2
    return c[:, order]


def central_points(order: int, accuracy: int) -> int:
    """Points in the central stencil for a derivative of ``order`` at even ``accuracy``."""
    return 2 * ((order + 1) // 2) - 1 + accuracy


def fdm_moments(series: GeneratingFunctionSeries, k_max: int, accuracy: int = 8) -> MomentSet:
    """<H^k> = i^k F^(k)(0) from central differences on the (reflected) series.

    The error column is the change when the accuracy order is lowered by two.
    """
    if accuracy < 2 or accuracy % 2:
        raise ValidationError("accuracy must be an even integer >= 2")
    full = series.reflected() if abs(series.times[0]) < 1e-12 else series
    h = full.step()
    zero = int(np.argmin(np.abs(full.times)))
    if abs(full.times[zero]) > 1e-12:
        raise ValidationError("series must contain t = 0")
    half_avail = min(zero, full.times.size - 1 - zero)
    vals, errs = [1.0], [0.0]

    def deriv(k, acc):
        half = central_points(k, acc) // 2
        if half > half_avail:
            raise ValidationError(f"grid too short for derivative {k} at accuracy {acc}")
        offs = np.arange(-half, half + 1)
        w = fornberg_weights(0.0, offs, k) / h**k
        return complex(w @ full.values[zero + offs])

    for k in range(1, k_max + 1):
        est = (1j**k * deriv(k, accuracy)).real
        low = (1j**k * deriv(k, accuracy - 2)).real if accuracy > 2 else est
        vals.append(est)
        errs.append(abs(est - low))
    return MomentSet(np.array(vals), 0.0, np.array(errs), f"fdm({accuracy})")


def moments(source, k_max: int, shift: float = 0.0, accuracy: int = 8) -> MomentSet:
    """Dispatch: a Spectrum or SpectrumEstimate (sum w E^k) or a series (finite differences)."""
    if isinstance(source, GeneratingFunctionSeries):
        return fdm_moments(source, k_max, accuracy)
    if isinstance(source, (Spectrum, SpectrumEstimate)):
        return moments_from_spectrum(source.energies, source.weights, k_max, shift)
    raise ValidationError("moments need a Spectrum, SpectrumEstimate or GeneratingFunctionSeries")


def cumulants(m: MomentSet) -> CumulantSet:
    """kappa_n = m_n - sum_{k=1}^{n-1} C(n-1, k-1) kappa_k m_{n-k}, with the shift restored in kappa_1."""
    with mpmath.workdps(MP_DIGITS):
        mom = [mpmath.mpf(v) for v in m.values]
        if abs(mom[0] - 1) > 1e-8:
            raise ValidationError("zeroth moment must be 1")
        kap = [mpmath.mpf(0)] * len(mom)
        for n in range(1, len(mom)):
            kap[n] = mom[n] - mpmath.fsum(comb(n - 1, k - 1) * kap[k] * mom[n - k] for k in range(1, n))
        out = np.array([float(v) for v in kap])
    if len(out) > 1:
        out[1] += m.shift
    return CumulantSet(out)


# ---------------------------------------------------------------------------
# t-expansion
# ---------------------------------------------------------------------------


@dataclass
class TExpansionResult:
    taus: np.ndarray
    energies: np.ndarray
    estimate: float
    pade_orders: tuple[int, int]
    derivative: np.ndarray
    taylor_derivative: np.ndarray
    integration_error: float


def derivative_series(kappa: CumulantSet, m: int) -> np.ndarray:
    """Taylor coefficients of dE/dtau: c_k = -(-1)^k kappa_{k+2}/k!, k = 0..m."""
    if kappa.k_max < m + 2:
        raise ValidationError(f"need {m + 2} cumulants, have {kappa.k_max}")
    return np.array([-((-1) ** k) * kappa.values[k + 2] / factorial(k) for k in range(m + 1)])


def _pade_singular(c: np.ndarray, i: int, j: int, tol: float = 1e-12) -> bool:
    """Relative pivot test on the denominator system sum_{l=1}^J b_l c_{k-l} = -c_k, k = I+1..I+J."""
    if j == 0:
        return False
    a = np.array([[c[i + 1 + r - l] if i + 1 + r - l >= 0 else 0.0 for l in range(1, j + 1)] for r in range(j)])
    _p, _l, u = sla.lu(a)
    piv = np.abs(np.diag(u))
    return bool(piv.max() == 0 or piv.min() / piv.max() < tol)


def pade_coefficients(c: np.ndarray, i: int, j: int) -> tuple[np.poly1d, np.poly1d, tuple[int, int]]:
    """[I/J] Pade of the series c; falls back to lower J (keeping J - I >= 2) if singular."""
    if j - i < 2:
        raise ValidationError("Pade orders need J - I >= 2")
    if i + j + 1 > len(c):
        raise ValidationError(f"[{i}/{j}] needs {i + j + 1} series coefficients, have {len(c)}")
    while j - i >= 2:
        if not _pade_singular(c, i, j):
            p, q = pade(c[: i + j + 1], j, i)
            return p, q, (i, j)
        j -= 1
    raise NumericalError("Pade system singular for every admissible denominator order")


def t_expansion(
    kappa: CumulantSet,
    m: int,
    pade_orders: tuple[int, int] = (3, 7),
    tau_max: float | None = None,
    n_points: int = 200,
) -> TExpansionResult:
    """E(tau) = kappa_1 + integral of the Pade-resummed dE/dtau, evaluated up to tau_max."""
    c = derivative_series(kappa, m)
    p, q, used = pade_coefficients(c, *pade_orders)
    if tau_max is None:
        k2 = abs(kappa.values[2])
        tau_max = 10 / np.sqrt(k2) if k2 > 0 else 1.0
    roots = q.roots
    bad = [r for r in np.atleast_1d(roots) if abs(r.imag) < 1e-9 and 0 <= r.real <= tau_max]
    if bad:
        raise NumericalError(f"Pade denominator vanishes at tau = {bad[0].real:.6g} inside the window")
    taus = np.linspace(0, tau_max, n_points)

    def rhs(t, _y):
        return [p(t) / q(t)]

    sol = solve_ivp(rhs, (0, tau_max), [kappa.values[1]], t_eval=taus, method="RK45", atol=1e-10, rtol=1e-10)
    if not sol.success:
        raise NumericalError(f"E(tau) integration failed: {sol.message}")
    coarse = solve_ivp(rhs, (0, tau_max), [kappa.values[1]], t_eval=[tau_max], method="RK45", atol=1e-8, rtol=1e-8)
    energies = sol.y[0]
    taylor = np.polyval(c[::-1], taus)
    return TExpansionResult(
        taus,
        energies,
        float(energies[-1]),
        used,
        p(taus) / q(taus),
        taylor,
        float(abs(coarse.y[0, -1] - energies[-1])),
    )


def imaginary_time_reference(state, h: PauliSum, taus: Sequence[float]) -> np.ndarray:
    """E(tau) = <H e^{-tau H}>/<e^{-tau H}> from the eigendecomposition (shifted for stability)."""
    spec = state_spectrum(state, h).merged(1e-10, 1e-28)
    return imaginary_time_energy(spec, taus)


def imaginary_time_energy(spec: Spectrum, taus: Sequence[float]) -> np.ndarray:
    e, w = spec.energies, spec.weights
    keep = w > 0
    e, w = e[keep], w[keep]
    t = np.asarray(taus, dtype=float)[:, None]
    boltz = w * np.exp(-t * (e - e.min()))
    return (boltz @ e) / boltz.sum(axis=1)


# ---------------------------------------------------------------------------
# Krylov methods
# ---------------------------------------------------------------------------


@dataclass
class GeneralizedEigen:
    """Eigenpairs of H c = E S c in the retained subspace.

    ``vectors[:, g]`` are coefficients of |E_g> on the normalized basis
    states; ``overlaps[g] = |<E_g|Phi_0>|^2``.
    """

    eigenvalues: np.ndarray
    vectors: np.ndarray
    overlaps: np.ndarray
    u: np.ndarray
    d: np.ndarray
    x: np.ndarray
    t: np.ndarray
    retained: int
    condition: float


def generalized_eigensolve(s, hmat, eps: float = 1e-10, precision: str = "double") -> GeneralizedEigen:
    """Normalize the basis, drop overlap eigenvalues below ``eps``, diagonalize X^dag H X.

    ``s[i, j] = <Phi_i|Phi_j>`` and ``hmat[i, j] = <Phi_i|H|Phi_j>``.
    ``precision="mp"`` runs the whole reduction in mpmath.
    """
    if precision == "mp":
        return _generalized_eigensolve_mp(s, hmat, eps)
    s = np.asarray(s, dtype=complex)
    hmat = np.asarray(hmat, dtype=complex)
    if s.shape != hmat.shape or s.shape[0] != s.shape[1]:
        raise ValidationError("overlap and Hamiltonian matrices must be square and equal-sized")
    if np.abs(s - s.conj().T).max() > 1e-8 * max(1.0, np.abs(s).max()):
        raise ValidationError("overlap matrix is not Hermitian")
    diag = s.diagonal().real
    if np.any(diag <= 0):
        raise ValidationError("basis state with nonpositive norm")
    scale = 1 / np.sqrt(diag)
    s_n = s * np.outer(scale, scale)
    h_n = hmat * np.outer(scale, scale)
    d, u = np.linalg.eigh(s_n)
    keep = d > eps
    if not keep.any():
        raise NumericalError("every overlap eigenvalue fell below the threshold")
    x = u[:, keep] / np.sqrt(d[keep])
    h_t = x.conj().T @ h_n @ x
    h_t = 0.5 * (h_t + h_t.conj().T)
    e, t = np.linalg.eigh(h_t)
    vec = x @ t
    ov = np.abs(vec.conj().T @ s_n[:, 0]) ** 2
    cond = float(d.max() / d[keep].min())
    return GeneralizedEigen(e, vec, ov, u, d, x, t, int(keep.sum()), cond)


def _generalized_eigensolve_mp(s, hmat, eps: float) -> GeneralizedEigen:
    with mpmath.workdps(MP_DIGITS):
        s_mp = mpmath.matrix(s)
        h_mp = mpmath.matrix(hmat)
        n = s_mp.rows
        scale = [1 / mpmath.sqrt(mpmath.re(s_mp[i, i])) for i in range(n)]
        for i in range(n):
            for j in range(n):
                s_mp[i, j] *= scale[i] * scale[j]
                h_mp[i, j] *= scale[i] * scale[j]
        s_mp = (s_mp + s_mp.H) / 2
        h_mp = (h_mp + h_mp.H) / 2
        d, u = mpmath.eighe(s_mp)
        keep = [k for k in range(n) if d[k] > eps]
        if not keep:
            raise NumericalError("every overlap eigenvalue fell below the threshold")
        x = mpmath.matrix(n, len(keep))
        for c, k in enumerate(keep):
            for i in range(n):
                x[i, c] = u[i, k] / mpmath.sqrt(d[k])
        h_t = x.H * h_mp * x
        h_t = (h_t + h_t.H) / 2
        e, t = mpmath.eighe(h_t)
        vec = x * t
        s0 = s_mp[:, 0]
        ov = [abs(sum(mpmath.conj(vec[i, g]) * s0[i] for i in range(n))) ** 2 for g in range(len(keep))]
        to_np = lambda m: np.array(m.tolist(), dtype=complex)
        d_np = np.array([float(mpmath.re(v)) for v in d])
        return GeneralizedEigen(
            np.array([float(mpmath.re(v)) for v in e]),
            to_np(vec),
            np.array([float(v) for v in ov]),
            to_np(u),
            d_np,
            to_np(x),
            to_np(t),
            len(keep),
            float(d_np.max() / d_np[keep].min()),
        )


@dataclass
class KrylovResult:
    """Per-dimension solutions; ``solutions[M]`` uses the first M basis states."""

    solutions: dict[int, GeneralizedEigen]
    shift: float = 0.0

    def eigenvalues(self, m: int) -> np.ndarray:
        return self.solutions[m].eigenvalues + self.shift

    def lowest(self) -> dict[int, float]:
        return {m: float(self.eigenvalues(m)[0]) for m in sorted(self.solutions)}

    def overlaps(self, m: int) -> np.ndarray:
        return self.solutions[m].overlaps

    def retained(self) -> dict[int, int]:
        return {m: sol.retained for m, sol in sorted(self.solutions.items())}


def krylov_from_moments(m: MomentSet, m_values: Sequence[int] | None = None, eps: float = 1e-12) -> KrylovResult:
    """Hankel matrices S_kl = <H^{k+l}>, H_kl = <H^{k+l+1}> (shifted moments), solved in mpmath."""
    max_m = (m.k_max + 1) // 2
    m_values = list(range(1, max_m + 1)) if m_values is None else list(m_values)
    if not m_values or max(m_values) > max_m or min(m_values) < 1:
        raise ValidationError(f"moments up to order {m.k_max} support M <= {max_m}")
    vals = m.values
    out = {}
    for dim in m_values:
        s = np.array([[vals[k + l] for l in range(dim)] for k in range(dim)])
        h = np.array([[vals[k + l + 1] for l in range(dim)] for k in range(dim)])
        out[dim] = generalized_eigensolve(s, h, eps, precision="mp")
    return KrylovResult(out, m.shift)


def survival_probability(result: KrylovResult, m: int, times: Sequence[float]) -> np.ndarray:
    """P_0(t) = |sum_g exp(-i E_g t) |<E_g|Phi_0>|^2|^2 in the M-dimensional subspace."""
    sol = result.solutions[m]
    t = np.asarray(times, dtype=float)
    amp = np.exp(-1j * np.outer(t, result.eigenvalues(m))) @ sol.overlaps
    return np.abs(amp) ** 2


def exact_survival(state, h: PauliSum, times: Sequence[float]) -> np.ndarray:
    return np.abs(spectral_gf(state_spectrum(state, h), times)) ** 2


def quantum_krylov(
    state,
    h: PauliSum,
    taus: Sequence[float],
    eps: float = 1e-6,
    m_values: Sequence[int] | None = None,
    spectrum: Spectrum | None = None,
    precision: str = "double",
) -> KrylovResult:
    """Basis exp(-i tau_k H)|Phi_0>; S_kl = F(tau_l - tau_k), H_kl = <H exp(-i(tau_l - tau_k)H)>.

    ``precision="mp"`` assembles and solves in mpmath (needs an equally spaced grid).
    """
    taus = np.asarray(taus, dtype=float)
    if taus.size == 0 or np.unique(np.round(taus, 12)).size != taus.size:
        raise ValidationError("times must be distinct")
    spec = spectrum or state_spectrum(state, h)
    m_values = list(range(1, taus.size + 1)) if m_values is None else list(m_values)
    if precision == "mp":
        s, hm = _toeplitz_mp(spec, taus)
        return KrylovResult({
            dim: generalized_eigensolve(s[:dim, :dim], hm[:dim, :dim], eps, precision="mp") for dim in m_values
        })
    diff = taus[None, :] - taus[:, None]
    phases = np.exp(-1j * diff[:, :, None] * spec.energies[None, None, :])
    s = phases @ spec.weights
    hm = phases @ (spec.weights * spec.energies)
    return KrylovResult({dim: generalized_eigensolve(s[:dim, :dim], hm[:dim, :dim], eps) for dim in m_values})


def _toeplitz_mp(spec: Spectrum, taus: np.ndarray):
    d = np.diff(taus)
    if d.size and np.ptp(d) > 1e-12 * abs(d[0]):
        raise ValidationError("extended precision needs an equally spaced time grid")
    n = taus.size
    with mpmath.workdps(MP_DIGITS):
        step = mpmath.mpf(float(d[0])) if d.size else mpmath.mpf(0)
        keep = spec.weights > 0
        e = [mpmath.mpf(float(v)) for v in spec.energies[keep]]
        w = [mpmath.mpf(float(v)) for v in spec.weights[keep]]
        f, g = {}, {}
        for lag in range(-(n - 1), n):
            ph = [wi * mpmath.expj(-lag * step * ei) for wi, ei in zip(w, e)]
            f[lag] = mpmath.fsum(ph)
            g[lag] = mpmath.fsum(p * ei for p, ei in zip(ph, e))
        s = mpmath.matrix(n, n)
        hm = mpmath.matrix(n, n)
        for i in range(n):
            for j in range(n):
                s[i, j] = f[j - i]
                hm[i, j] = g[j - i]
    return s, hm
