"""Assemble the stochastic Galerkin system of the low-pass benchmark.

The built-in circuit has 21 random parameters (7 capacitances, 6
inductances, 8 conductances, each uniform within 10% of its nominal
value).  With total degree d the polynomial basis has binom(21+d, d)
functions and the coupled system dimension is 20 times that.
"""

import numpy as np

import sgmor as sg

netlist = sg.lowpass_benchmark()
print("benchmark elements:", netlist.counts(), "-> q =", netlist.q)

psys = sg.mna_assemble(netlist)
print("inner dimension n =", psys.n, "(node voltages + inductor currents)")

nominal = psys.system_at(psys.nominal_parameters)
report = sg.pencil_spectrum(nominal.dense())
print("nominal pencil: stable =", report.stable,
      "| finite eigenvalues =", len(report.finite_eigenvalues),
      "| infinite =", report.infinite_count)
print("nominal H(0) =", sg.transfer_eval(nominal, 0.0)[0, 0].real)

for d in (1, 2, 3):
    spec = sg.BasisSpec.uniform(psys.parameter_bounds, sg.build_index_set(21, d))
    gsys = sg.assemble(psys, spec)
    A = gsys.system.A
    print(f"d={d}: m={gsys.m:5d} basis functions, dimension {gsys.dimension:6d}, "
          f"nnz(A) = {A.nnz}")

# the first output row corresponds to the constant basis function, so it
# carries the mean of the random output
spec = sg.BasisSpec.uniform(psys.parameter_bounds, sg.build_index_set(21, 2))
gsys = sg.assemble(psys, spec)
H0 = sg.transfer_eval(gsys.system, 0.0)[:, 0].real
print("coupled system H(0), first five outputs:", np.round(H0[:5], 6))
