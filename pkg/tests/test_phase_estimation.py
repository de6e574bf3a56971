import numpy as np
import pytest

from conftest import random_state
from symrestore.errors import EmptySectorError, ValidationError
from symrestore.models import PairingModel, build_pairing, pairing_hf_state
from symrestore.phase_estimation import (
    RodeoConfig,
    hamiltonian_qpe,
    iqpe_project,
    iqpe_rounds,
    qpe_project,
    qpe_run,
    rodeo,
    rodeo_scan,
    symmetry_rodeo_config,
)
from symrestore.statevector import Circuit, Statevector, phase
from symrestore.symmetry import Projector, symmetry_operator


def test_qpe_on_phase_gate_is_exact():
    theta = 3 / 8
    counts, res = qpe_run(Statevector.from_bitstring("1"), Circuit(1, [phase(0, 2 * np.pi * theta)]), 3)
    assert np.argmax(counts) == 3
    assert counts[3] == pytest.approx(1)


@pytest.mark.parametrize("target", [0, 2, 4])
def test_qpe_projection_matches_projector(target):
    sym = symmetry_operator("number", 4)
    psi = random_state(4, target)
    out = qpe_project(psi, sym, target)
    proj = Projector(sym, target)
    assert out.success_probability == pytest.approx(proj.probability(psi))
    assert abs(abs(np.vdot(out.state.amplitudes, proj.project(psi))) - 1) < 1e-10


def test_iqpe_uniform_eight_qubits():
    sym = symmetry_operator("number", 8)
    psi = Statevector.uniform(8)
    assert iqpe_rounds(sym, 4) == 3
    out = iqpe_project(psi, sym, 4)
    assert out.rounds == 3
    assert out.success_probability == pytest.approx(70 / 256)
    fid = abs(np.vdot(out.state.amplitudes, Projector(sym, 4).project(psi.amplitudes))) ** 2
    assert fid == pytest.approx(1)
    assert np.all(np.diff(out.history) <= 1e-15)


def test_iqpe_sampling_acceptance_rate():
    sym = symmetry_operator("number", 4)
    psi = Statevector.uniform(4)
    accepted = [iqpe_project(psi, sym, 2, mode="sample", rng_seed=s, max_attempts=1).accepted for s in range(600)]
    p = 6 / 16
    assert abs(np.mean(accepted) - p) < 4 * np.sqrt(p * (1 - p) / 600)


def test_iqpe_empty_sector():
    with pytest.raises(EmptySectorError):
        iqpe_project(Statevector.zero(3), symmetry_operator("number", 3), 2)


def test_rodeo_fixed_times_filter_lattice_exactly():
    sym = symmetry_operator("number", 6)
    psi = random_state(6, 2)
    cfg = symmetry_rodeo_config(sym, 3)
    out = rodeo(psi, sym, cfg)
    proj = Projector(sym, 3)
    assert out.success_probability == pytest.approx(proj.probability(psi))
    assert abs(abs(np.vdot(out.state.amplitudes, proj.project(psi))) - 1) < 1e-10


def test_rodeo_scan_closed_form_vs_draws():
    m = PairingModel(4, 1.0, 2)
    h = build_pairing(m)
    grid = np.linspace(5, 20, 7)
    closed, _ = rodeo_scan(pairing_hf_state(m), h, grid, sigma=2.0, n_r=3)
    drawn, err = rodeo_scan(pairing_hf_state(m), h, grid, sigma=2.0, n_r=3, draws=3000, rng_seed=4)
    assert np.all(np.abs(drawn - closed) <= 5 * err + 1e-3)


def test_rodeo_config_validation():
    with pytest.raises(ValidationError):
        RodeoConfig(n_r=0)
    with pytest.raises(ValidationError):
        RodeoConfig(mode="fixed")


def test_hamiltonian_qpe_peaks_at_eigenvalue():
    m = PairingModel(3, 0.0, 1)
    h = build_pairing(m)
    energies, hist, _ = hamiltonian_qpe(pairing_hf_state(m), h, 6, trotter_steps=None)
    assert abs(energies[np.argmax(hist)] - 2.0) < abs(energies[1] - energies[0]) + 1e-9
