import numpy as np
import pytest

from symrestore.errors import ValidationError
from symrestore.models import PairingModel, build_pairing, pairing_groups
from symrestore.pauli import PauliString, PauliSum
from symrestore.statevector import circuit_unitary
from symrestore.trotter import (
    TrotterPlan,
    commuting_groups,
    exact_propagator,
    pauli_rotation,
    propagator_unitary,
    qpe_scaling,
    trotter_circuit,
)


def _err(h, groups, order, steps, t=1.0):
    u = circuit_unitary(trotter_circuit(groups, TrotterPlan(order, steps, t)))
    return np.linalg.norm(u - exact_propagator(h, t), 2)


@pytest.mark.parametrize("label", ["X", "ZZ", "XYZ", "YIX"])
def test_pauli_rotation_exact(label):
    p = PauliString.from_label(label)
    theta = 0.83
    u = circuit_unitary(pauli_rotation(p, theta))
    expected = exact_propagator(PauliSum.from_label(label, theta / 2), 1.0)
    np.testing.assert_allclose(u, expected, atol=1e-12)


def test_commuting_hamiltonian_has_no_trotter_error():
    h = PauliSum.from_label("ZZI", 0.4) + PauliSum.from_label("IZZ", -0.7) + PauliSum.from_label("ZIZ", 0.2)
    assert _err(h, commuting_groups(h), 1, 1) < 1e-12


def test_error_scaling_by_order():
    m = PairingModel(4, 1.0, 2)
    h = build_pairing(m)
    groups = pairing_groups(m)
    e1 = [_err(h, groups, 1, r) for r in (8, 16)]
    e2 = [_err(h, groups, 2, r) for r in (8, 16)]
    assert e1[0] / e1[1] == pytest.approx(2, rel=0.15)
    assert e2[0] / e2[1] == pytest.approx(4, rel=0.15)
    assert e2[1] < e1[1]


def test_commuting_groups_cover_hamiltonian():
    h = build_pairing(PairingModel(5, 0.7, 2))
    groups = commuting_groups(h)
    total = PauliSum.zero(h.n)
    for g in groups:
        assert g.terms_commute_pairwise()
        total = total + g
    assert total.allclose(h)


def test_non_commuting_group_rejected():
    bad = PauliSum.from_label("X") + PauliSum.from_label("Z")
    with pytest.raises(ValidationError):
        trotter_circuit([bad], TrotterPlan())


def test_plan_validation():
    with pytest.raises(ValidationError):
        TrotterPlan(order=3)
    with pytest.raises(ValidationError):
        TrotterPlan(steps=0)


def test_qpe_scaling_maps_spectrum_into_unit_interval():
    h = build_pairing(PairingModel(4, 1.0, 2))
    sc = qpe_scaling(h)
    vals = np.linalg.eigvalsh(h.to_matrix())
    phases = sc.phase_of(vals)
    assert np.all((phases >= 0) & (phases < 1))
    np.testing.assert_allclose(sc.energy_of(phases), vals)
    known = qpe_scaling(h, 4, (vals[0], vals[-1]))
    p = known.phase_of(vals)
    assert np.all((p >= -1e-12) & (p < 1))


def test_propagator_unitary_phases():
    h = PauliSum.from_label("Z", 0.3) + PauliSum.identity(1, 0.1)
    sc = qpe_scaling(h)
    u = circuit_unitary(propagator_unitary(h))
    expected = exact_propagator(h - PauliSum.identity(1, sc.e_shift), 2 * np.pi * sc.tau)
    np.testing.assert_allclose(u, expected, atol=1e-12)
