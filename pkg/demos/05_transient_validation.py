"""Path-wise validation of the polynomial surrogates in the time domain.

Simulates the coupled Galerkin system once, then compares the surrogate
output at sampled parameter points against a direct simulation of the
original circuit at those same points.  Increasing the total degree and
the reduced surrogate built on top of it should both track the direct
solution closely.
"""

import numpy as np

import sgmor as sg

psys = sg.mna_assemble(sg.lowpass_benchmark())

def u(t):
    return np.sin(2.0e6 * np.pi * t) * np.exp(-t / 2.0e-6)

horizon, step = 2.0e-5, 2.0e-8
rng = np.random.default_rng(3)
n_val = 100

spec2 = sg.BasisSpec.uniform(psys.parameter_bounds, sg.build_index_set(21, 2))
pts = spec2.sample(n_val, rng)

# reference: direct transient simulation of the circuit at every sample
direct = np.empty((1001, n_val))
for j in range(n_val):
    traj = sg.simulate_transient(psys.system_at(pts[j]).dense(), u, horizon, step)
    direct[:, j] = traj.outputs[:, 0]
scale = np.abs(direct).max()
print(f"direct reference: {n_val} simulations, max |y| = {scale:.4e}")

for d in (1, 2):
    spec = sg.BasisSpec.uniform(psys.parameter_bounds, sg.build_index_set(21, d))
    gsys = sg.assemble(psys, spec)
    traj = sg.simulate_transient(gsys.system, u, horizon, step)
    phi = sg.eval_basis_matrix(spec, pts)
    surrogate = traj.outputs @ phi.T
    err = np.abs(surrogate - direct).max()
    print(f"degree {d}: dimension {gsys.dimension:5d}, "
          f"max pathwise error = {err:.4e} ({err / scale:.2e} relative)")

# Krylov-reduced surrogate on the degree 2 system
gsys = sg.assemble(psys, spec2)
red = sg.arnoldi_reduce(gsys, 5.0e5, 40)
probe = sg.DescriptorSystem(red.system.E, red.system.A, red.system.B, np.eye(red.r))
vbar = sg.simulate_transient(probe, u, horizon, step).outputs
mor_vals = sg.reduced_output_surrogate(red, vbar, spec2, pts)
err = np.abs(mor_vals - direct).max()
print(f"reduced r=40 surrogate: max pathwise error = {err:.4e} "
      f"({err / scale:.2e} relative)")
