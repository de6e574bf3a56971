import itertools

import numpy as np
import pytest

from symrestore.errors import ValidationError
from symrestore.pauli import PauliString, PauliSum, number_operator, pauli_product

SINGLE = {
    "I": np.eye(2),
    "X": np.array([[0, 1], [1, 0]]),
    "Y": np.array([[0, -1j], [1j, 0]]),
    "Z": np.diag([1, -1]),
}


def test_single_qubit_products():
    assert pauli_product(PauliString.from_label("X"), PauliString.from_label("Y")).coefficient == 1j
    xy = PauliString.from_label("X") * PauliString.from_label("Y")
    assert xy.label == "Z"
    yx = PauliString.from_label("Y") * PauliString.from_label("X")
    assert yx.coefficient == -1j


@pytest.mark.parametrize("a,b", list(itertools.product("IXYZ", repeat=2)))
def test_products_match_matrices(a, b):
    prod = PauliString.from_label(a) * PauliString.from_label(b)
    np.testing.assert_allclose(prod.matrix(), SINGLE[a] @ SINGLE[b], atol=1e-15)


def test_labels_are_msb_first():
    p = PauliString.from_label("XZ")
    assert p.symbol(0) == "Z" and p.symbol(1) == "X"
    np.testing.assert_allclose(p.matrix(), np.kron(SINGLE["X"], SINGLE["Z"]))


def test_commutation_parity():
    assert PauliString.from_label("XX").commutes_with(PauliString.from_label("YY"))
    assert not PauliString.from_label("XI").commutes_with(PauliString.from_label("ZI"))


def test_support_and_weight():
    p = PauliString.from_ops({0: "X", 3: "Z"}, 5)
    assert p.support == (0, 3)
    assert p.weight == 2


def test_sum_arithmetic_matches_dense():
    a = PauliSum.from_label("XZ", 0.5) + PauliSum.from_label("YY", -1.2)
    b = PauliSum.from_label("ZI", 2.0) + PauliSum.identity(2, 0.3)
    np.testing.assert_allclose((a * b).to_matrix(), a.to_matrix() @ b.to_matrix(), atol=1e-12)
    np.testing.assert_allclose((a + b).to_matrix(), a.to_matrix() + b.to_matrix(), atol=1e-12)
    np.testing.assert_allclose(a.commutator(b).to_matrix(),
                               a.to_matrix() @ b.to_matrix() - b.to_matrix() @ a.to_matrix(), atol=1e-12)


def test_cancellation_prunes_terms():
    s = PauliSum.from_label("XY") - PauliSum.from_label("XY")
    assert len(s) == 0


def test_hermiticity_and_adjoint():
    h = PauliSum.from_label("XY", 1.0) + PauliSum.from_label("ZZ", 0.5)
    assert h.is_hermitian()
    assert not PauliSum.from_label("X", 1j).is_hermitian()
    a = PauliSum.from_label("X", 1 + 2j)
    np.testing.assert_allclose(a.adjoint().to_matrix(), a.to_matrix().conj().T)


def test_apply_matches_sparse():
    rng = np.random.default_rng(0)
    h = PauliSum.from_label("XYZ", 0.7) + PauliSum.from_label("ZIX", -0.4) + PauliSum.from_label("IYY", 1.1)
    v = rng.normal(size=8) + 1j * rng.normal(size=8)
    np.testing.assert_allclose(h.apply(v), h.to_sparse() @ v, atol=1e-12)


def test_number_operator_diagonal():
    nop = number_operator(3, 1)
    assert nop.is_diagonal()
    np.testing.assert_allclose(nop.diagonal().real, [(k >> 1) & 1 for k in range(8)])


def test_text_round_trip():
    h = PauliSum.from_label("XZ", 0.25) + PauliSum.from_label("YY", -1.5)
    assert PauliSum.from_text(h.to_text()).allclose(h)


def test_size_mismatch_rejected():
    with pytest.raises(ValidationError):
        PauliSum.from_label("X") + PauliSum.from_label("XX")
