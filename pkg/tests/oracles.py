"""Independent high-precision oracles used by the tests."""

import mpmath as mp


def synthetic_zeta_mp(s, a0=0, a10=0, a11=0, b=0, rate=1):
    """Mellin transform of ``exp(-r t) (a0/t + (a10 + a11 log t)/sqrt(t) + b)`` divided by Gamma(s)."""
    r = mp.mpf(rate)
    out = b * r ** (-s) + a0 * r ** (1 - s) / (s - 1)
    ratio = mp.gamma(s - mp.mpf(1) / 2) * mp.rgamma(s)
    out += r ** (mp.mpf(1) / 2 - s) * ratio * (a10 + a11 * (mp.digamma(s - mp.mpf(1) / 2) - mp.log(r)))
    return out


def synthetic_zeta_prime_zero(**kw):
    with mp.workdps(30):
        return float(mp.diff(lambda s: synthetic_zeta_mp(s, **kw), 0))


def synthetic_zeta_value(s, **kw):
    with mp.workdps(30):
        return complex(synthetic_zeta_mp(mp.mpc(s), **kw))


def model_pair_zeta(a, s):
    """Zeta of the full half-line model pair: -(log a/sqrt(4 pi)) Gamma(s-1/2) 4^(s-1/2) / Gamma(s)."""
    with mp.workdps(30):
        s = mp.mpc(s)
        value = -mp.log(a) / mp.sqrt(4 * mp.pi) * mp.gamma(s - 0.5) * mp.power(4, s - 0.5) * mp.rgamma(s)
        return complex(value)
