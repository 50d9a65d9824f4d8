"""
Small-t expansion of a relative heat trace
==========================================

Relative traces on cusped surfaces behave like
``a0/t + (a10 + a11 log t)/sqrt(t) + a2 + O(sqrt(t))`` near ``t = 0``.
We compute the coefficients from the geometry, recover them by
least squares from samples, and look at the exponential decay at large t.
"""

# %%
import math

import numpy as np

from cusp_spectra import (
    ModelCuspPair,
    check_large_t,
    eval_expansion,
    expansion_from_geometry,
    fit_expansion,
    model_pair_trace,
    relative_trace_exact,
)
from cusp_spectra.errors import ConditioningError

# %%
# Coefficients for area 4 pi, Euler characteristic -1 and one cusp.
coeffs = expansion_from_geometry(4 * math.pi, -1, 1)
print(coeffs)

# %%
# Fit them back from samples polluted by a t^(3/2) remainder.  The fit uses
# sqrt(t) weights and nuisance columns for the remainder.
t = np.geomspace(1e-6, 1e-2, 40)
report = fit_expansion(t, eval_expansion(coeffs, 0, t) + 0.3 * t ** 1.5)
print("fitted  ", report.coeffs)
print("errors  ", np.abs(report.coeffs.as_array() - coeffs.as_array()))
print("cond    ", report.condition_number)

# %%
# The restricted model pair has constant term -1/4.
values = relative_trace_exact(ModelCuspPair(4.0, "restricted"), t)
print("restricted a2:", fit_expansion(t, values).coeffs.a2)

# %%
# A short linear grid cannot separate 1/t from log(t)/sqrt(t).
linear = np.linspace(1e-4, 1e-2, 8)
try:
    fit_expansion(linear, eval_expansion(coeffs, 0, linear))
except ConditioningError as exc:
    print("rejected:", exc)

# %%
# At large t the model trace decays like exp(-t/4).
decay = check_large_t(model_pair_trace(2.0), np.linspace(5, 60, 30))
print("fitted decay rate:", decay.rate)
