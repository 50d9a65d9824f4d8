"""
The solvable cusp model
=======================

The zero Fourier mode of a hyperbolic cusp with a Dirichlet condition at
height ``a`` is the operator ``-y^2 d^2/dy^2`` on ``[a, inf)``.  Its heat
kernel is a difference of two Gaussians in ``log y``, and the relative
trace against ``a = 1`` has a closed form.  Here we compare that closed
form with direct quadrature of the kernel diagonal.
"""

# %%
import math

import numpy as np

from cusp_spectra import Domain, ModelCuspPair, model_heat_kernel, relative_trace_exact, relative_trace_quadrature

# %%
# The kernel vanishes on the Dirichlet boundary and is symmetric.
print(model_heat_kernel(2.0, 2.0, 3.0, 0.7))
print(model_heat_kernel(1.5, 2.5, 4.0, 0.3), model_heat_kernel(1.5, 4.0, 2.5, 0.3))

# %%
# On the full half-line the relative trace is -exp(-t/4) log(a) / sqrt(4 pi t).
pair = ModelCuspPair(2.0, Domain.FULL)
t = np.geomspace(0.01, 10, 8)
exact = relative_trace_exact(pair, t)
quad = np.array([relative_trace_quadrature(pair, s, tol=1e-10) for s in t])
for row in zip(t, exact, quad, np.abs(exact - quad) / np.abs(exact)):
    print("t={:9.4f}  exact={: .15f}  quadrature={: .15f}  rel.err={:.1e}".format(*row))

# %%
# On the restricted space [a, inf) the trace involves the unnormalised error
# function and tends to -1/4 as t -> 0, up to O(sqrt(t)).
restricted = ModelCuspPair(4.0, Domain.RESTRICTED)
for s in (1e-2, 1e-4, 1e-6):
    value = float(relative_trace_exact(restricted, s))
    print(f"t={s:.0e}  R(t)={value:.12f}  R + 1/4 = {value + 0.25:.2e}  sqrt(t) = {math.sqrt(s):.1e}")
