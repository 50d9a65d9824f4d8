"""Exactly solvable half-line cusp model.

The zero Fourier mode of the hyperbolic cusp Laplacian with a Dirichlet
condition at height ``a`` is the operator ``-y**2 d^2/dy^2`` on
``L^2([a, inf), y**-2 dy)``.  Its heat kernel has a closed form, and the
relative trace against the ``a = 1`` operator can be written down exactly.
This module provides the kernel, both closed-form traces, and a quadrature
oracle that integrates the kernel diagonal directly.
"""

import enum
import math
from dataclasses import dataclass, field

import numpy as np
from scipy import special

from .errors import DomainError
from .quadrature import integrate

SQRT_4PI = math.sqrt(4.0 * math.pi)


class Domain(enum.Enum):
    """Hilbert space on which the relative heat trace is taken."""

    FULL = "full"              # L^2([1, inf), y^-2 dy)
    RESTRICTED = "restricted"  # L^2([a, inf), y^-2 dy)

    @classmethod
    def parse(cls, value):
        if isinstance(value, cls):
            return value
        key = str(value).lower()
        aliases = {"full": cls.FULL, "fullhalfline": cls.FULL, "restricted": cls.RESTRICTED}
        if key not in aliases:
            raise DomainError(f"unknown domain {value!r}; expected 'full' or 'restricted'")
        return aliases[key]


@dataclass(frozen=True)
class ModelCuspPair:
    """The pair (Dirichlet operator at height ``a``, Dirichlet operator at 1)."""

    a: float
    domain: Domain = Domain.FULL

    def __post_init__(self):
        if not (math.isfinite(self.a) and self.a >= 1.0):
            raise DomainError(f"cusp start height must satisfy a >= 1, got {self.a}")
        object.__setattr__(self, "domain", Domain.parse(self.domain))


@dataclass(frozen=True)
class MultiCuspModel:
    """Direct sum of model pairs, one per cusp, traced on the full half-line."""

    starts: tuple = field(default_factory=tuple)

    def __post_init__(self):
        starts = tuple(float(a) for a in self.starts)
        if not starts:
            raise DomainError("a multi-cusp model needs at least one cusp")
        for a in starts:
            if not (math.isfinite(a) and a >= 1.0):
                raise DomainError(f"cusp start height must satisfy a >= 1, got {a}")
        object.__setattr__(self, "starts", starts)

    @property
    def m(self):
        return len(self.starts)


def erf_unnormalized(s):
    """``Erf(s) = int_0^s exp(-v**2) dv``, without the 2/sqrt(pi) factor.

    This is the only place where the conversion to the standard error
    function happens.
    """
    return 0.5 * math.sqrt(math.pi) * special.erf(s)


def _check_time(t):
    t = np.asarray(t, dtype=float)
    if np.any(~np.isfinite(t)) or np.any(t <= 0):
        raise DomainError("heat time t must be positive and finite")
    return t


def model_heat_kernel(a, y, yp, t):
    """Heat kernel of the Dirichlet model operator at height ``a``.

    Density with respect to ``yp**-2 dyp``.  Vectorised over ``y``, ``yp``
    and ``t``; the kernel vanishes identically when either height is ``<= a``.
    """
    if a < 1.0:
        raise DomainError(f"cusp start height must satisfy a >= 1, got {a}")
    t = _check_time(t)
    y = np.asarray(y, dtype=float)
    yp = np.asarray(yp, dtype=float)
    if np.any(y <= 0) or np.any(yp <= 0):
        raise DomainError("heights must be positive")
    log_a2 = 2.0 * math.log(a)
    direct = np.exp(-np.log(y / yp) ** 2 / (4.0 * t))
    image = np.exp(-(np.log(y * yp) - log_a2) ** 2 / (4.0 * t))
    value = np.exp(-t / 4.0) / np.sqrt(4.0 * np.pi * t) * np.sqrt(y * yp) * (direct - image)
    value = np.where((y <= a) | (yp <= a), 0.0, value)
    return value[()] if value.ndim == 0 else value


def relative_trace_exact(pair, t):
    """Closed-form relative heat trace ``tr(exp(-t D_a) - exp(-t D_1))``.

    On the full half-line this is ``-exp(-t/4) log(a) / sqrt(4 pi t)``; on the
    restricted space ``[a, inf)`` it is ``-exp(-t/4) Erf(log(a)/sqrt(t)) /
    sqrt(4 pi)`` with the unnormalised ``Erf``.
    """
    t = _check_time(t)
    if pair.a == 1.0:
        out = np.zeros_like(t)
        return out[()] if out.ndim == 0 else out
    log_a = math.log(pair.a)
    if pair.domain is Domain.FULL:
        out = -np.exp(-t / 4.0) * log_a / np.sqrt(4.0 * np.pi * t)
    else:
        out = -np.exp(-t / 4.0) / SQRT_4PI * erf_unnormalized(log_a / np.sqrt(t))
    return out[()] if out.ndim == 0 else out


def _diagonal_difference(a, t):
    """``u -> (p_a - p_1)(e^u, e^u, t) e^{-u}``, the trace density in ``u = log y``."""

    def density(u):
        y = np.exp(u)
        return (model_heat_kernel(a, y, y, t) - model_heat_kernel(1.0, y, y, t)) / y

    return density


def relative_trace_quadrature(pair, t, tol=1e-10, max_panels=4000):
    """Relative trace by direct integration of the kernel diagonal.

    Integrates ``(p_a - p_1)(y, y, t) y**-2 dy`` in the variable ``u = log y``
    where the weight becomes ``e^{-u} du`` and both kernels are Gaussians in
    ``u``.  Independent of :func:`relative_trace_exact`.

    Parameters
    ----------
    pair : ModelCuspPair
    t : float
        Heat time, positive.
    tol : float
        Relative accuracy target.
    max_panels : int
        Panel budget of the adaptive quadrature.

    Raises
    ------
    ConvergenceError
        When the panel budget is exhausted; carries the achieved estimate.
    """
    t = float(_check_time(t))
    if tol <= 0:
        raise DomainError("tolerance must be positive")
    if pair.a == 1.0:
        return 0.0
    log_a = math.log(pair.a)
    # Both diagonal Gaussians exp(-u^2/t) and exp(-(u - log a)^2/t) fall below
    # tol/100 of their peak once |u - centre| > sqrt(t * log(100/tol)).
    width = math.sqrt(t * math.log(100.0 / tol))
    upper = log_a + width
    lower = 0.0 if pair.domain is Domain.FULL else log_a
    density = _diagonal_difference(pair.a, t)
    breaks = [log_a] if pair.domain is Domain.FULL else []
    # The integrand is O(e^{-t/4}/sqrt(t)); scale the absolute target to it.
    scale = math.exp(-t / 4.0) / math.sqrt(4.0 * math.pi * t) * max(log_a, math.sqrt(t))
    value, _ = integrate(
        density, lower, upper,
        epsabs=0.01 * tol * scale, epsrel=0.01 * tol,
        breakpoints=breaks, max_panels=max_panels,
    )
    return value


def multi_cusp_trace(model, t):
    """Relative trace of a direct sum of model pairs on the full half-line."""
    if not isinstance(model, MultiCuspModel):
        model = MultiCuspModel(tuple(model))
    t = _check_time(t)
    total = np.zeros_like(t)
    for a in model.starts:
        total = total + relative_trace_exact(ModelCuspPair(a, Domain.FULL), t)
    return total[()] if total.ndim == 0 else total
