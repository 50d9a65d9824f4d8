"""Small-t expansion structure and large-t decay of relative heat traces.

A relative heat trace ``R(t)`` on a surface with ``m`` cusps behaves like

    R(t) = a0/t + (a10 + a11 log t)/sqrt(t) + a2 + O(sqrt(t))   (t -> 0)
    R(t) = h + O(exp(-c t))                                     (t -> inf)

where ``h`` is the kernel offset.  The helpers here build, evaluate and fit
that four-term model.
"""

import csv
import io
import math
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from .cusp_model import SQRT_4PI, Domain, ModelCuspPair, MultiCuspModel, relative_trace_exact
from .errors import ConditioningError, DomainError

# The constant gamma of the cusp expansion, taken to be Euler-Mascheroni.
EULER_GAMMA = float(np.euler_gamma)

# Above this the column-equilibrated design matrix is rejected.
MAX_CONDITION = 1e5


@dataclass(frozen=True)
class ExpansionCoeffs:
    """Coefficients of ``a0/t + (a10 + a11 log t)/sqrt(t) + a2``."""

    a0: float = 0.0
    a10: float = 0.0
    a11: float = 0.0
    a2: float = 0.0

    def __post_init__(self):
        for name in ("a0", "a10", "a11", "a2"):
            value = float(getattr(self, name))
            if not math.isfinite(value):
                raise DomainError(f"expansion coefficient {name} is not finite")
            object.__setattr__(self, name, value)

    def as_array(self):
        return np.array([self.a0, self.a10, self.a11, self.a2])

    def as_dict(self):
        return {"a0": self.a0, "a10": self.a10, "a11": self.a11, "a2": self.a2}

    def __add__(self, other):
        return ExpansionCoeffs(*(self.as_array() + other.as_array()))


@dataclass(frozen=True)
class RelativeTrace:
    """A relative heat trace with its asymptotic models attached.

    ``eval`` must be a pure, vectorised function of ``t`` so that it is
    safe to call concurrently.
    """

    eval: Callable
    coeffs: ExpansionCoeffs = field(default_factory=ExpansionCoeffs)
    kernel_offset: int = 0
    decay_rate: float = 1.0
    label: str = ""

    def __post_init__(self):
        if not self.decay_rate > 0:
            raise DomainError("decay rate must be positive")

    def __call__(self, t):
        return self.eval(t)

    def __add__(self, other):
        f, g = self.eval, other.eval
        return RelativeTrace(
            eval=lambda t: f(t) + g(t),
            coeffs=self.coeffs + other.coeffs,
            kernel_offset=self.kernel_offset + other.kernel_offset,
            decay_rate=min(self.decay_rate, other.decay_rate),
            label=f"{self.label}+{other.label}",
        )


def expansion_from_geometry(area, euler_char, cusps):
    """Small-t coefficients of ``tr(exp(-t D_h) - exp(-t D_{1,0}))``.

    Parameters
    ----------
    area : float
        Total area of the metric.
    euler_char : int
        Euler characteristic ``2 - 2p - m``.
    cusps : int
        Number of cusps ``m >= 1``.
    """
    if not area > 0:
        raise DomainError(f"area must be positive, got {area}")
    if int(cusps) != cusps or cusps < 1:
        raise DomainError(f"cusp count must be a positive integer, got {cusps}")
    m = int(cusps)
    return ExpansionCoeffs(
        a0=area / (4.0 * math.pi),
        a10=EULER_GAMMA * m / (2.0 * SQRT_4PI),
        a11=m / (2.0 * SQRT_4PI),
        a2=euler_char / 6.0 + m / 4.0,
    )


def eval_expansion(coeffs, h, t):
    """Evaluate the four-term model at ``t``.

    ``h`` is accepted for symmetry with the zeta integrand but is not
    subtracted here; callers form ``R(t) - h`` themselves.
    """
    t = np.asarray(t, dtype=float)
    if np.any(t <= 0):
        raise DomainError("expansion is only defined for t > 0")
    out = coeffs.a0 / t + (coeffs.a10 + coeffs.a11 * np.log(t)) / np.sqrt(t) + coeffs.a2
    return out[()] if out.ndim == 0 else out


def _basis(t):
    rt = np.sqrt(t)
    return np.column_stack([1.0 / t, 1.0 / rt, np.log(t) / rt, np.ones_like(t)])


def _remainder_basis(t, order):
    # sqrt(t), t, t^{3/2}, ...: the leading terms of an O(sqrt(t)) remainder
    return np.column_stack([t ** (0.5 * (k + 1)) for k in range(order)]) if order else np.empty((len(t), 0))


@dataclass
class FitReport:
    coeffs: ExpansionCoeffs
    remainder_coeffs: np.ndarray
    max_residual: float
    max_remainder_ratio: float
    condition_number: float
    n_samples: int

    def as_dict(self):
        return {
            "coeffs": self.coeffs.as_dict(),
            "remainder_coeffs": [float(c) for c in self.remainder_coeffs],
            "max_residual": self.max_residual,
            "max_remainder_ratio": self.max_remainder_ratio,
            "condition_number": self.condition_number,
            "n_samples": self.n_samples,
        }


def fit_expansion(t, values, remainder_terms=3):
    """Least-squares fit of the four-term small-t model.

    Each equation is weighted by ``sqrt(t_i)`` so that an ``O(sqrt(t))``
    remainder contributes an ``O(t)`` equation error.  The remainder itself
    is modelled by ``remainder_terms`` extra columns ``sqrt(t), t, t**1.5, ...``
    which are fitted alongside and then discarded; without them the
    remainder leaks into ``a2`` at the 1e-3 level on typical grids.

    Samples should be geometrically spaced.  Short linear grids leave the
    basis ill-conditioned and are rejected.

    Parameters
    ----------
    t, values : array_like
        Sample times and trace values.
    remainder_terms : int
        Number of nuisance remainder columns (0 gives the bare four-term fit).

    Returns
    -------
    FitReport
        ``max_remainder_ratio`` is ``max |R - model| / sqrt(t)`` for the
        four-term model, i.e. the empirical O(sqrt(t)) constant.

    Raises
    ------
    DomainError
        Fewer than eight samples, or fewer than two decades below 0.1.
    ConditioningError
        The equilibrated design matrix has condition number above
        ``MAX_CONDITION``.
    """
    t = np.asarray(t, dtype=float)
    values = np.asarray(values, dtype=float)
    if t.shape != values.shape or t.ndim != 1:
        raise DomainError("t and values must be 1-D arrays of equal length")
    if len(t) < 8:
        raise DomainError(f"need at least 8 samples, got {len(t)}")
    if np.any(t <= 0) or not np.all(np.isfinite(values)):
        raise DomainError("samples need t > 0 and finite values")
    small = t[t <= 0.1]
    if len(small) < 2 or math.log10(small.max() / small.min()) < 2.0 - 1e-9:
        raise DomainError("samples must span at least two decades of t below 0.1")
    if len(t) < 4 + remainder_terms + 1:
        raise DomainError("not enough samples for the requested remainder terms")

    weights = np.sqrt(t)
    design = np.column_stack([_basis(t), _remainder_basis(t, remainder_terms)]) * weights[:, None]
    rhs = values * weights
    norms = np.linalg.norm(design, axis=0)
    scaled = design / norms
    cond = float(np.linalg.cond(scaled))
    if not cond < MAX_CONDITION:
        raise ConditioningError(
            f"expansion basis is ill-conditioned on these samples (cond ~ {cond:.3e}); "
            "use a geometric grid",
            condition_number=cond,
        )
    sol, *_ = np.linalg.lstsq(scaled, rhs, rcond=None)
    sol = sol / norms
    coeffs = ExpansionCoeffs(*sol[:4])
    residual = values - eval_expansion(coeffs, 0, t)
    return FitReport(
        coeffs=coeffs,
        remainder_coeffs=sol[4:],
        max_residual=float(np.max(np.abs(residual))),
        max_remainder_ratio=float(np.max(np.abs(residual) / np.sqrt(t))),
        condition_number=cond,
        n_samples=len(t),
    )


@dataclass
class DecayReport:
    rate: Optional[float]
    intercept: Optional[float]
    exact_plateau: bool
    monotone: bool
    max_residual: float

    def as_dict(self):
        return {
            "rate": self.rate,
            "intercept": self.intercept,
            "exact_plateau": self.exact_plateau,
            "monotone": self.monotone,
            "max_residual": self.max_residual,
        }


def check_large_t(trace, t_grid):
    """Fit ``log|R(t) - h| ~ -c t + const`` on a large-t grid.

    Grid points where ``R(t) == h`` exactly are dropped; if that leaves
    fewer than two points the report flags an exact plateau instead of a
    rate.  ``monotone`` records whether ``|R - h|`` is non-increasing.
    """
    t = np.asarray(t_grid, dtype=float)
    if t.ndim != 1 or len(t) < 2:
        raise DomainError("need at least two grid points")
    if np.any(np.diff(t) <= 0):
        raise DomainError("t_grid must be strictly increasing")
    if t[0] < 1.0:
        raise DomainError("large-t grid must start at t >= 1")
    gap = np.abs(np.asarray(trace.eval(t), dtype=float) - trace.kernel_offset)
    keep = gap > 0
    if keep.sum() < 2:
        return DecayReport(None, None, True, True, 0.0)
    monotone = bool(np.all(np.diff(gap) <= 1e-12 * gap[:-1]))
    slope, intercept = np.polyfit(t[keep], np.log(gap[keep]), 1)
    resid = np.log(gap[keep]) - (slope * t[keep] + intercept)
    return DecayReport(float(-slope), float(intercept), False, monotone, float(np.max(np.abs(resid))))


def model_pair_trace(a, domain=Domain.FULL):
    """``RelativeTrace`` of a single model pair with its exact expansion.

    On the full half-line the expansion has ``a10 = -log(a)/sqrt(4 pi)`` and
    all other coefficients zero.  On the restricted space the trace tends to
    ``-1/4`` as ``t -> 0`` up to exponentially small terms, so ``a2 = -1/4``.
    """
    pair = ModelCuspPair(a, domain)
    if pair.domain is Domain.FULL:
        coeffs = ExpansionCoeffs(a10=-math.log(pair.a) / SQRT_4PI)
    else:
        coeffs = ExpansionCoeffs(a2=-0.25 if pair.a > 1.0 else 0.0)
    return RelativeTrace(
        eval=lambda t: relative_trace_exact(pair, t),
        coeffs=coeffs,
        kernel_offset=0,
        decay_rate=0.25,
        label=f"model(a={pair.a:g},{pair.domain.value})",
    )


def multi_cusp_relative_trace(starts):
    """Sum of full half-line model pairs over several cusps."""
    model = MultiCuspModel(tuple(starts))
    total = model_pair_trace(model.starts[0])
    for a in model.starts[1:]:
        total = total + model_pair_trace(a)
    return total


def read_samples_csv(source):
    """Read ``(t, value)`` pairs from CSV text or a path.

    Two numeric columns; an optional non-numeric header row; lines starting
    with ``#`` are ignored.
    """
    if hasattr(source, "read"):
        text = source.read()
    elif isinstance(source, str) and "\n" not in source and not source.lstrip().startswith("#"):
        with open(source, newline="") as fh:
            text = fh.read()
    else:
        text = str(source)
    rows = []
    lines = [ln for ln in text.splitlines() if ln.strip() and not ln.lstrip().startswith("#")]
    for lineno, row in enumerate(csv.reader(io.StringIO("\n".join(lines)))):
        if len(row) != 2:
            raise DomainError(f"CSV row {lineno + 1}: expected 2 columns, got {len(row)}")
        try:
            rows.append((float(row[0]), float(row[1])))
        except ValueError:
            if lineno == 0 and not rows:
                continue  # header
            raise DomainError(f"CSV row {lineno + 1}: non-numeric value {row!r}") from None
    if not rows:
        raise DomainError("CSV contains no samples")
    data = np.array(rows)
    return data[:, 0], data[:, 1]
