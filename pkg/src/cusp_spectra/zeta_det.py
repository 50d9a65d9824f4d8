"""Relative zeta function and relative determinant.

For a relative heat trace ``R`` with kernel offset ``h`` the relative zeta
function is the Mellin transform

    zeta(s) = 1/Gamma(s) * int_0^inf t^(s-1) (R(t) - h) dt,   Re s > 1.

It continues meromorphically by splitting the integral at ``t = split``:
on ``[0, split]`` the four-term small-t model is integrated in closed form
and only the ``O(sqrt(t))`` remainder ``theta`` is integrated numerically;
on ``[split, inf)`` the exponential approach to ``h`` makes the integral
entire.  The relative determinant is ``exp(-zeta'(0))``.
"""

import cmath
import math
from dataclasses import dataclass, field

import numpy as np
from scipy import special

from .errors import ConvergenceError, DomainError, InconsistencyError, ModelMismatchError
from .quadrature import integrate
from .trace_expansion import EULER_GAMMA, eval_expansion

EPS = np.finfo(float).eps


@dataclass(frozen=True)
class ZetaOptions:
    """Numerical knobs of the zeta pipeline.

    ``t_min`` is where direct quadrature of the remainder stops; below it
    the remainder is replaced by a least-squares fit in ``sqrt(t)``,
    ``sqrt(t) log t`` and ``t`` that is integrated analytically.  Going
    lower trades truncation error for cancellation error in ``theta``.
    """

    split: float = 1.0
    t_min: float = 1e-6
    epsabs: float = 1e-13
    epsrel: float = 1e-12
    max_panels: int = 4000
    remainder_growth: float = 10.0
    fd_step: float = 2e-3
    agreement_tol: float = 1e-6

    def __post_init__(self):
        for name in ("split", "t_min", "epsabs", "epsrel", "remainder_growth", "fd_step", "agreement_tol"):
            if not getattr(self, name) > 0:
                raise DomainError(f"option {name} must be positive")
        if not self.t_min < 1e-2 * self.split:
            raise DomainError("t_min must lie at least two decades below split")


DEFAULT_OPTIONS = ZetaOptions()


@dataclass
class ZetaResult:
    zeta_prime_at_zero: float
    determinant: float
    pole_part: dict
    diagnostics: dict = field(default_factory=dict)

    def as_dict(self):
        return {
            "zeta_prime_0": self.zeta_prime_at_zero,
            "determinant": self.determinant,
            "diagnostics": {"pole_part": dict(self.pole_part), **self.diagnostics},
        }


def _as_complex(s):
    s = complex(s)
    if not (math.isfinite(s.real) and math.isfinite(s.imag)):
        raise DomainError("s must be finite")
    return s


def _real_if_real(value, s):
    return value.real if s.imag == 0 else value


def theta(trace, t):
    """Small-t remainder ``R(t) - (a0/t + (a10 + a11 log t)/sqrt(t) + a2)``."""
    return np.asarray(trace.eval(t), dtype=float) - eval_expansion(trace.coeffs, trace.kernel_offset, t)


def _theta_noise(trace, t):
    # rounding error of theta: it is a small difference of large terms
    c = trace.coeffs
    scale = (np.abs(trace.eval(t)) + abs(c.a0) / t
             + (abs(c.a10) + np.abs(c.a11 * np.log(t))) / np.sqrt(t) + abs(c.a2))
    return 256.0 * EPS * scale


def check_remainder(trace, options=DEFAULT_OPTIONS):
    """Verify empirically that ``theta(t) = O(sqrt(t))``.

    ``|theta(t)|/sqrt(t)`` is sampled on a geometric grid from ``t_min`` to
    ``min(1e-2, split)``.  A genuine ``O(sqrt(t))`` remainder keeps this ratio
    roughly level; a wrong coefficient makes it grow like a negative power
    of ``t``.  The ratio at the smallest times may not exceed
    ``remainder_growth`` times the ratio at the largest.

    Returns
    -------
    dict
        ``{"t": grid, "ratio": ratios, "worst_t": ..., "growth": ...}``

    Raises
    ------
    ModelMismatchError
        Naming the sample time with the worst ratio.
    """
    t = np.geomspace(options.t_min, min(1e-2, 0.1 * options.split), 25)
    th = theta(trace, t)
    noise = _theta_noise(trace, t)
    ratio = np.maximum(np.abs(th) - noise, 0.0) / np.sqrt(t)
    reference = ratio[-4:].max()
    limit = options.remainder_growth * reference + 1e-9
    worst = int(np.argmax(ratio))
    report = {
        "t": t,
        "ratio": ratio,
        "worst_t": float(t[worst]),
        "growth": float(ratio[worst] / reference) if reference > 0 else (0.0 if ratio[worst] == 0 else math.inf),
    }
    if ratio[worst] > limit:
        raise ModelMismatchError(
            f"remainder is not O(sqrt(t)): |theta|/sqrt(t) = {ratio[worst]:.3e} at t = {t[worst]:.3e} "
            f"exceeds {limit:.3e}; check the expansion coefficients and kernel offset",
            worst_t=float(t[worst]),
            ratio=float(ratio[worst]),
        )
    return report


def _tail_integral(trace, s, options):
    """``int_split^inf t^(s-1) (R(t) - h) dt`` truncated by the decay model."""
    c = trace.decay_rate
    h = trace.kernel_offset
    split = options.split

    def f(t):
        return np.power(t, s - 1.0) * (np.asarray(trace.eval(t), dtype=float) - h)

    # Past T the integrand is bounded by |f(T)| exp(-c (t - T)) up to a slowly
    # varying power, so the neglected tail is about |f(T)|/c.
    for k in range(1, 65):
        upper = split + 20.0 * k / c
        probe = np.abs(f(np.array([upper, upper * 1.1, upper * 1.5])))
        if probe.max() / c < 0.1 * options.epsabs:
            break
    else:
        raise ModelMismatchError(
            f"relative trace does not approach its kernel offset h = {h} at rate {c} "
            f"(|t^(s-1)(R - h)| = {probe.max():.3e} at t = {upper:.3e})",
            worst_t=float(upper),
        )
    breaks = np.geomspace(split, upper, 8)[1:-1] if upper > 2 * split else ()
    return integrate(f, split, upper, epsabs=options.epsabs, epsrel=options.epsrel,
                     breakpoints=breaks, max_panels=options.max_panels)


def _head_direct(trace, s, options):
    """``int_0^split t^(s-1) (R(t) - h) dt`` for ``Re s > 1`` in ``u = log(split/t)``."""
    h = trace.kernel_offset
    split = options.split
    sigma = s.real

    def f(u):
        t = split * np.exp(-u)
        return np.power(t, s) * (np.asarray(trace.eval(t), dtype=float) - h)

    # Slowest possible decay in u is exp(-(Re s - 1) u), from the a0/t term.
    rate = sigma - 1.0
    upper = 32.0
    while True:
        if abs(f(np.array([upper]))[0]) / rate < 0.1 * options.epsabs:
            break
        upper *= 1.5
        if upper > 690.0:
            raise ConvergenceError(
                f"direct Mellin integral near t = 0 does not decay fast enough at s = {s}",
                estimate=abs(f(np.array([690.0]))[0]) / rate,
            )
    return integrate(f, 0.0, upper, epsabs=options.epsabs, epsrel=options.epsrel,
                     breakpoints=np.arange(8.0, upper, 8.0), max_panels=options.max_panels)


# Powers and log flags of the remainder model used below t_min: the
# half-integer ladder with logs, as produced by exp(-c t) times the expansion.
_REMAINDER_TERMS = ((0.5, 0), (0.5, 1), (1.0, 0), (1.5, 0), (1.5, 1), (2.0, 0), (2.5, 0), (2.5, 1), (3.0, 0))

# Fit windows [t_min, w t_min]; the first is used, the spread to the second
# is reported as the error of the below-t_min piece.
_FIT_WINDOWS = (1e4, 1e3)


def _remainder_fit(trace, options, window=_FIT_WINDOWS[0]):
    t = np.geomspace(options.t_min, window * options.t_min, 24)
    design = np.column_stack([t ** p * np.log(t) ** k for p, k in _REMAINDER_TERMS])
    norms = np.linalg.norm(design, axis=0)
    coef, *_ = np.linalg.lstsq(design / norms, theta(trace, t), rcond=None)
    return coef / norms


def _below_t_min(trace, s, options, window):
    # int_0^tau t^(s-1+p) dt = tau^q/q and int_0^tau t^(s-1+p) log t dt = tau^q (log tau/q - 1/q^2)
    tau = options.t_min
    log_tau = math.log(tau)
    below = 0j
    for coef, (power, has_log) in zip(_remainder_fit(trace, options, window), _REMAINDER_TERMS):
        q = s + power
        below += coef * tau ** q * ((log_tau / q - 1.0 / q ** 2) if has_log else 1.0 / q)
    return below


def _head_theta(trace, s, options):
    """``int_0^split t^(s-1) theta(t) dt`` for ``Re s > -1/2``.

    Quadrature down to ``t_min``; below it ``theta`` is replaced by a fitted
    power/log series integrated exactly.  The accuracy of that piece decays
    like ``t_min^(s+1/2)/(s+1/2)`` as ``Re s -> -1/2``; the returned error
    includes the spread between two fit windows.
    """
    split = options.split
    upper = math.log(split / options.t_min)

    def f(u):
        t = split * np.exp(-u)
        return np.power(t, s) * theta(trace, t)

    grid = np.linspace(0.0, upper, 200)
    tg = split * np.exp(-grid)
    noise = np.trapezoid(np.abs(np.power(tg, s)) * _theta_noise(trace, tg), grid)
    value, err = integrate(f, 0.0, upper, epsabs=max(options.epsabs, 4.0 * noise), epsrel=options.epsrel,
                           breakpoints=np.arange(2.0, upper, 2.0), max_panels=options.max_panels)
    below, alt = (_below_t_min(trace, s, options, w) for w in _FIT_WINDOWS)
    return value + below, err + abs(below - alt)


def pole_part(trace, s, split=1.0):
    """Closed-form ``int_0^split t^(s-1) (model(t) - h) dt`` excluding the constant term.

    The constant term ``(a2 - h) split^s / s`` is handled separately because
    ``1/Gamma(s)`` cancels its pole at ``s = 0``.
    """
    c = trace.coeffs
    log_tau = math.log(split)
    half = s - 0.5
    out = 0j
    if c.a0:
        out += c.a0 * split ** (s - 1.0) / (s - 1.0)
    if c.a10:
        out += c.a10 * split ** half / half
    if c.a11:
        out += c.a11 * split ** half * (log_tau / half - 1.0 / half ** 2)
    return out


def _check_poles(trace, s):
    c = trace.coeffs
    if c.a0 and abs(s - 1.0) < 1e-12:
        raise DomainError("s = 1 is a pole of the relative zeta function")
    if (c.a10 or c.a11) and abs(s - 0.5) < 1e-12:
        raise DomainError("s = 1/2 is a pole of the relative zeta function")
    if s.real <= -0.5:
        raise DomainError("continuation only implemented for Re s > -1/2")


def relative_zeta(trace, s, options=DEFAULT_OPTIONS, return_error=False):
    """Relative zeta function from the direct Mellin integral, ``Re s > 1``."""
    s = _as_complex(s)
    if not s.real > 1.0:
        raise DomainError("direct Mellin integral requires Re s > 1")
    head, e1 = _head_direct(trace, s, options)
    tail, e2 = _tail_integral(trace, s, options)
    value = _real_if_real(special.rgamma(s) * (head + tail), s)
    return (value, e1 + e2) if return_error else value


def _continued_parts(trace, s, options):
    head, e1 = _head_theta(trace, s, options)
    tail, e2 = _tail_integral(trace, s, options)
    return head, tail, e1 + e2


def relative_zeta_continued(trace, s, options=DEFAULT_OPTIONS, check=True, return_error=False):
    """Meromorphically continued relative zeta function.

    Valid for ``Re s > -1/2`` away from the poles at 1 and 1/2; regular at 0.
    """
    s = _as_complex(s)
    _check_poles(trace, s)
    if check:
        check_remainder(trace, options)
    head, tail, err = _continued_parts(trace, s, options)
    const = trace.coeffs.a2 - trace.kernel_offset
    regular = special.rgamma(s) * (pole_part(trace, s, options.split) + head + tail)
    # (a2 - h) split^s / (s Gamma(s)) = (a2 - h) split^s / Gamma(s + 1)
    value = regular + const * options.split ** s * special.rgamma(s + 1.0)
    value = _real_if_real(value, s)
    return (value, err) if return_error else value


def zeta_prime_zero(trace, options=DEFAULT_OPTIONS):
    """``zeta'(0)`` by two independent routes, with the determinant.

    The analytic route differentiates the split representation using
    ``1/Gamma(s) = s + gamma s^2 + O(s^3)``.  With ``split = 1`` this gives

        zeta'(0) = -a0 - 2 a10 - 4 a11 + gamma (a2 - h)
                   + int_0^1 theta(t) dt/t + int_1^inf (R(t) - h) dt/t.

    The second route is a fourth-order central difference of
    :func:`relative_zeta_continued` across ``s = 0``.

    Raises
    ------
    InconsistencyError
        If the two routes differ by more than ``options.agreement_tol``.
    """
    remainder = check_remainder(trace, options)
    c = trace.coeffs
    h = trace.kernel_offset
    tau = options.split
    log_tau = math.log(tau)

    head, tail, err = _continued_parts(trace, 0j, options)
    head, tail = head.real, tail.real
    poles = {
        "a0/(s-1)": -c.a0 / tau,
        "a10/(s-1/2)": -2.0 * c.a10 / math.sqrt(tau),
        "-a11/(s-1/2)^2": c.a11 * (-2.0 * log_tau - 4.0) / math.sqrt(tau),
        "(a2-h)/s": (c.a2 - h) * (log_tau + EULER_GAMMA),
    }
    analytic = math.fsum([*poles.values(), head, tail])

    d = options.fd_step
    f = {k: relative_zeta_continued(trace, k * d, options, check=False) for k in (-2, -1, 1, 2)}
    finite_diff = (8.0 * (f[1] - f[-1]) - (f[2] - f[-2])) / (12.0 * d)
    zeta_zero = relative_zeta_continued(trace, 0.0, options, check=False)

    gap = abs(analytic - finite_diff)
    if not gap <= options.agreement_tol:
        raise InconsistencyError(
            f"zeta'(0) routes disagree: analytic {analytic!r} vs finite difference {finite_diff!r}",
            values=(analytic, finite_diff),
        )
    pole_terms = {
        "a0": c.a0, "a10": c.a10, "a11": c.a11, "a2_minus_h": c.a2 - h,
    }
    return ZetaResult(
        zeta_prime_at_zero=analytic,
        determinant=math.exp(-analytic),
        pole_part=pole_terms,
        diagnostics={
            "zeta_prime_0_finite_difference": finite_diff,
            "method_gap": gap,
            "zeta_0": zeta_zero,
            "pole_contributions": poles,
            "theta_integral": head,
            "tail_integral": tail,
            "quadrature_error": err,
            "remainder_growth": remainder["growth"],
            "remainder_worst_t": remainder["worst_t"],
            "split": tau,
            "kernel_offset": h,
        },
    )


def relative_determinant(trace, options=DEFAULT_OPTIONS):
    """``det = exp(-zeta'(0))`` of the relative pair."""
    return zeta_prime_zero(trace, options).determinant


def synthetic_trace(a0=0.0, a10=0.0, a11=0.0, b=0.0, h=0, rate=1.0):
    """Trace ``h + exp(-rate t) (a0/t + (a10 + a11 log t)/sqrt(t) + b)`` with known zeta.

    Its expansion coefficients are ``(a0, a10, a11, h + b - rate a0)`` and
    its zeta function is available in closed form from
    :func:`synthetic_zeta`; a test oracle for the whole pipeline.
    """
    from .trace_expansion import ExpansionCoeffs, RelativeTrace

    def f(t):
        t = np.asarray(t, dtype=float)
        return h + np.exp(-rate * t) * (a0 / t + (a10 + a11 * np.log(t)) / np.sqrt(t) + b)

    return RelativeTrace(
        eval=f,
        coeffs=ExpansionCoeffs(a0=a0, a10=a10, a11=a11, a2=h + b - rate * a0),
        kernel_offset=h,
        decay_rate=rate,
        label="synthetic",
    )


def synthetic_zeta(s, a0=0.0, a10=0.0, a11=0.0, b=0.0, rate=1.0):
    """Closed-form zeta of :func:`synthetic_trace` via Gamma-function Mellin transforms."""
    s = _as_complex(s)
    r = rate
    out = b * r ** (-s)
    if a0:
        out += a0 * r ** (1.0 - s) / (s - 1.0)
    ratio = special.gamma(s - 0.5) * special.rgamma(s)
    scale = r ** (0.5 - s)
    out += a10 * scale * ratio
    out += a11 * scale * ratio * (special.digamma(s - 0.5) - cmath.log(r))
    return _real_if_real(out, s)
