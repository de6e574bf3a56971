import numpy as np
import pytest

from symrestore.errors import ValidationError
from symrestore.models import (
    HubbardModel,
    PairingModel,
    Spectrum,
    build_hubbard,
    build_pairing,
    exact_diagonalize,
    hubbard_double_occupancy_state,
    hubbard_sector,
    number_sector,
    pairing_groups,
    pairing_hf_energy,
    pairing_hf_state,
    state_spectrum,
)
from symrestore.statevector import expectation
from symrestore.symmetry import symmetry_operator

E_GS = {1.0: 18.486586239939584, 2.0: 9.067123508944558, 0.5: 20.889170412332163}


@pytest.mark.parametrize("g,e_hf", [(1.0, 24.0), (2.0, 28.0), (0.2, 20.8)])
def test_hf_energy(g, e_hf):
    m = PairingModel(8, g, 4)
    assert pairing_hf_energy(m) == pytest.approx(e_hf)
    assert expectation(pairing_hf_state(m), build_pairing(m)) == pytest.approx(e_hf)


@pytest.mark.parametrize("g", sorted(E_GS))
def test_ground_energy_in_sector(g):
    m = PairingModel(8, g, 4)
    vals, _ = exact_diagonalize(build_pairing(m), basis=number_sector(8, 4))
    assert vals[0] == pytest.approx(E_GS[g], abs=1e-10)


def test_pairing_conserves_number():
    h = build_pairing(PairingModel(6, 0.8, 3))
    assert h.commutator(symmetry_operator("number", 6).op).allclose(h * 0)


def test_uncoupled_pairing_is_diagonal():
    m = PairingModel(4, 0.0, 2)
    h = build_pairing(m)
    assert h.is_diagonal()
    diag = h.diagonal().real
    for k in range(16):
        assert diag[k] == pytest.approx(2 * sum(p + 1 for p in range(4) if k >> p & 1))


def test_pairing_groups_sum_to_hamiltonian():
    m = PairingModel(5, 1.0, 2)
    groups = pairing_groups(m)
    total = groups[0]
    for g in groups[1:]:
        total = total + g
    assert total.allclose(build_pairing(m))
    assert all(g.terms_commute_pairwise() for g in groups)


def test_two_site_hubbard_half_filling():
    u, j = 4.0, 1.0
    model = HubbardModel(2, u, j)
    h = build_hubbard(model)
    vals, _ = exact_diagonalize(h, basis=hubbard_sector(model, 1, 1))
    assert vals[0] == pytest.approx(0.5 * (u - np.sqrt(u**2 + 16 * j**2)), abs=1e-12)


@pytest.mark.parametrize("scheme", ["parity", "bk"])
def test_hubbard_spectrum_scheme_independent(scheme):
    model = HubbardModel(2, 1.5, 0.7)
    ref = np.linalg.eigvalsh(build_hubbard(model).to_matrix())
    np.testing.assert_allclose(np.linalg.eigvalsh(build_hubbard(model, scheme).to_matrix()), ref, atol=1e-12)


def test_double_occupancy_state():
    model = HubbardModel(3, 1.0, 1.0)
    psi = hubbard_double_occupancy_state(model, 2)
    assert np.count_nonzero(np.abs(psi.amplitudes) > 0) == 3


def test_state_spectrum_weights_sum_to_one():
    m = PairingModel(4, 1.0, 2)
    spec = state_spectrum(pairing_hf_state(m), build_pairing(m))
    assert spec.weights.sum() == pytest.approx(1)
    assert spec.energies @ spec.weights == pytest.approx(pairing_hf_energy(m))


def test_spectrum_merge():
    s = Spectrum(np.array([1.0, 1.0 + 1e-12, 2.0]), np.array([0.2, 0.3, 0.5])).merged()
    np.testing.assert_allclose(s.weights, [0.5, 0.5])


def test_invalid_models_rejected():
    with pytest.raises(ValidationError):
        PairingModel(4, 1.0, 5)
    with pytest.raises(ValidationError):
        HubbardModel(2, 1.0, 1.0, n_particles=5)
    with pytest.raises(ValidationError):
        exact_diagonalize(build_pairing(PairingModel(2, 1.0, 1)), n=3)
