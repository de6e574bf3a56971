"""Restoring particle number in a BCS trial state for the eight-level pairing model.

Run with ``python demos/pairing_projection.py``. The script walks from the
broken-symmetry variational state to its number-projected version, and checks
that every projection route lands on the same state.
"""

import numpy as np

from symrestore.lcu import lcu_apply, projector_plan
from symrestore.models import PairingModel, build_pairing, exact_diagonalize, number_sector
from symrestore.oracles import grover_hoyer_project, implicit_expectation, oracle_hadamard_project
from symrestore.phase_estimation import iqpe_project, qpe_project, rodeo, symmetry_rodeo_config
from symrestore.statevector import Statevector, expectation
from symrestore.symmetry import Projector, symmetry_operator
from symrestore.variational import BcsAnsatz, VqeConfig, energy_hierarchy

model = PairingModel(n_levels=8, g=1.0, a_pairs=4)
h = build_pairing(model)
e_gs = exact_diagonalize(h, basis=number_sector(8, 4))[0][0]

# The BCS optimum mixes particle numbers; its energy sits above the exact one.
res = energy_hierarchy(model, VqeConfig(seed=0))
print(f"exact ground state  {e_gs:.6f}")
print(f"BCS (VQE)           {res.e_bcs:.6f}   <N> = {res.n_mean:.4f}")
print(f"projected after VQE {res.e_pav:.6f}")
print(f"projected then VQE  {res.e_vap:.6f}")

ansatz = BcsAnsatz(tuple(res.thetas))
psi = Statevector(ansatz.amplitudes())
number = symmetry_operator("number", 8)
proj = Projector(number, 4)
target = proj.project(psi.amplitudes)
print(f"\nweight of the N=4 sector in the BCS state: {proj.probability(psi.amplitudes):.6f}")

routes = {
    "QPE": qpe_project(psi, number, 4).state,
    "iterative QPE": iqpe_project(psi, number, 4).state,
    "Rodeo": rodeo(psi, number, symmetry_rodeo_config(number, 4)).state,
    "oracle + Hadamard test": oracle_hadamard_project(psi, proj).state,
    "LCU": lcu_apply(psi, projector_plan(proj)).state,
    "exact amplitude amplification": grover_hoyer_project(ansatz.circuit(), proj)[0],
}
print("\nprojection route                 fidelity with P|psi>   energy")
for name, state in routes.items():
    fid = abs(np.vdot(target, state.amplitudes)) ** 2
    print(f"  {name:30s} {fid:.12f}        {expectation(state, h):.8f}")

# The implicit route never builds the projected state at all.
e_implicit = implicit_expectation(psi, h, number, 4, via="oracle")
print(f"  {'implicit <H P>/<P> via oracle':30s} {'-':>14s}        {e_implicit:.8f}")
