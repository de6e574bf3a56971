"""Ground-energy estimates from the survival amplitude of a Hartree-Fock state.

Run with ``python demos/spectral_estimates.py``. Everything below starts from
F(t) = <HF| exp(-iHt) |HF> or its moments, which is what a device would
measure; the dense diagonalization is only used to score the answers.
"""

import numpy as np

from symrestore.models import PairingModel, build_pairing, exact_diagonalize, number_sector, pairing_hf_state, state_spectrum
from symrestore.spectral import (
    compute_gf,
    cumulants,
    fdm_moments,
    krylov_from_moments,
    moments,
    quantum_krylov,
    t_expansion,
)

model = PairingModel(8, 1.0, 4)
h = build_pairing(model)
hf = pairing_hf_state(model)
spec = state_spectrum(hf, h)
e_gs = exact_diagonalize(h, basis=number_sector(8, 4))[0][0]
mean = float(spec.weights @ spec.energies)
print(f"E_HF = {mean:.6f}, exact E_GS = {e_gs:.8f}\n")

# Moments by finite differences of F(t) near t = 0 lose accuracy quickly with order.
series = compute_gf(hf, h, 0.01 * np.arange(201))
fdm = fdm_moments(series, 16).values
ref = moments(spec, 16).values
print("k   finite-difference relative error")
for k in (2, 6, 10, 14, 16):
    print(f"{k:2d}  {abs(fdm[k] - ref[k]) / abs(ref[k]):.2e}")

# Krylov from moments converges quickly in the subspace dimension.
kr = krylov_from_moments(moments(spec, 17, shift=mean))
print("\nM   Krylov lowest       error")
for m, e in sorted(kr.lowest().items()):
    print(f"{m}   {e:.10f}   {e - e_gs:.2e}")

# The t-expansion resums twelve cumulants with a Pade approximant.
res = t_expansion(cumulants(moments(spec, 12, shift=mean)), 10, (3, 7))
print(f"\nt-expansion Pade{list(res.pade_orders)} estimate {res.estimate:.6f} "
      f"({abs(res.estimate - e_gs) / abs(e_gs):.2%} from exact)")

# Real-time Krylov: basis states exp(-i k dtau H)|HF>.
qk = quantum_krylov(hf, h, 0.3 * np.arange(10), eps=1e-6, m_values=range(1, 11), spectrum=spec)
print("\nM   real-time Krylov lowest")
for m, e in sorted(qk.lowest().items()):
    print(f"{m:2d}  {e:.8f}")
