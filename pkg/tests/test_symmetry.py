import numpy as np
import pytest

from conftest import random_state
from symrestore.errors import EmptySectorError, ValidationError
from symrestore.pauli import PauliSum
from symrestore.statevector import Statevector, circuit_unitary
from symrestore.symmetry import (
    Projector,
    custom_symmetry,
    spin_projector,
    symmetry_evolution,
    symmetry_operator,
)


@pytest.mark.parametrize("kind", ["number", "parity", "sz", "s2"])
@pytest.mark.parametrize("n", [2, 3, 4])
def test_spectrum_on_lattice(kind, n):
    assert symmetry_operator(kind, n).check_lattice()


def test_number_eigenvalues():
    s = symmetry_operator("number", 3)
    np.testing.assert_allclose(s.eigen[0], [bin(k).count("1") for k in range(8)])


@pytest.mark.parametrize("kind", ["number", "parity", "sz"])
def test_projectors_are_complete_and_orthogonal(kind):
    n = 4
    sym = symmetry_operator(kind, n)
    mats = [Projector(sym, sym.value_of(m)).matrix() for m in range(sym.m_omega + 1)]
    np.testing.assert_allclose(sum(mats), np.eye(1 << n), atol=1e-12)
    for i, a in enumerate(mats):
        np.testing.assert_allclose(a @ a, a, atol=1e-12)
        np.testing.assert_allclose(a, a.conj().T, atol=1e-12)
        for b in mats[i + 1:]:
            np.testing.assert_allclose(a @ b, 0, atol=1e-12)


def test_expansion_matches_indicator():
    sym = symmetry_operator("number", 5)
    proj = Projector(sym, 2)
    lam = np.arange(6)
    np.testing.assert_allclose(proj.expansion_weights(lam), proj.weights(lam), atol=1e-12)


def test_evolution_circuit_matches_exponential():
    for kind in ("number", "parity", "sz"):
        sym = symmetry_operator(kind, 3)
        u = circuit_unitary(symmetry_evolution(sym, 0.37))
        np.testing.assert_allclose(u, np.diag(np.exp(0.37j * sym.eigen[0])), atol=1e-12)


def test_s2_evolution_trotter_converges():
    sym = symmetry_operator("s2", 3)
    vals, vecs = sym.eigen
    exact = vecs @ np.diag(np.exp(0.4j * vals)) @ vecs.conj().T
    errs = [np.linalg.norm(circuit_unitary(symmetry_evolution(sym, 0.4, r)) - exact, 2) for r in (1, 8)]
    assert errs[1] < errs[0] or errs[0] < 1e-10


def test_projected_state_and_probability():
    sym = symmetry_operator("number", 4)
    psi = random_state(4, 3)
    proj = Projector(sym, 2)
    out = proj.project(psi)
    assert abs(np.linalg.norm(out) - 1) < 1e-12
    assert np.allclose(sym.op.apply(out), 2 * out)
    p = sum(abs(psi[k]) ** 2 for k in range(16) if bin(k).count("1") == 2)
    assert proj.probability(psi) == pytest.approx(p)


def test_empty_sector_raises():
    proj = Projector(symmetry_operator("number", 3), 2)
    with pytest.raises(EmptySectorError):
        proj.project(Statevector.zero(3).amplitudes)


def test_off_lattice_target_rejected():
    with pytest.raises(ValidationError):
        Projector(symmetry_operator("number", 3), 1.5)
    with pytest.raises(ValidationError):
        Projector(symmetry_operator("number", 3), 4)


def test_spin_projector_singlet():
    singlet = np.zeros(4, dtype=complex)
    singlet[1], singlet[2] = 1 / np.sqrt(2), -1 / np.sqrt(2)
    assert spin_projector(2, 0, 0).probability(singlet) == pytest.approx(1)
    assert spin_projector(2, 1, 0).probability(singlet) == pytest.approx(0, abs=1e-12)
    with pytest.raises(ValidationError):
        spin_projector(2, 0.5, 0.5)


def test_custom_symmetry_validation():
    op = PauliSum.from_label("Z", 0.5)
    assert custom_symmetry(op, -0.5, 1.0, 1).check_lattice()
    with pytest.raises(ValidationError):
        custom_symmetry(op, -0.5, 0.7, 1)
