"""Batch command-line front end.

Every subcommand writes one machine-readable document (CSV or JSON) to
``--out`` or standard output.  Floats are printed with 17 significant
digits, so identical inputs and seeds give byte-identical output.

Exit codes: 0 success, 2 usage or input parse error, 3 contract
violation, 4 numerical failure (non-convergence, ill-conditioning, model
mismatch, inconsistent methods).
"""

import argparse
import json
import math
import os
import sys
from pathlib import Path

import numpy as np
from scipy import interpolate

from . import polyakov, surface, trace_expansion, zeta_det
from .cusp_model import Domain, ModelCuspPair, relative_trace_exact, relative_trace_quadrature
from .errors import (
    ConditioningError,
    ContractError,
    ConvergenceError,
    CuspSpectraError,
    DomainError,
    InconsistencyError,
    ModelMismatchError,
    SurfaceLoadError,
)

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_CONTRACT = 3
EXIT_NUMERICAL = 4

THREADS_ENV = "CUSP_SPECTRA_THREADS"


class UsageError(Exception):
    """Bad command line or unreadable input; maps to exit code 2."""


# --------------------------------------------------------------------------
# formatting


def fmt(x):
    """17-significant-digit rendering used for every float the CLI emits."""
    return format(float(x), ".17g")


def _encode(obj, indent, level):
    pad = " " * (indent * (level + 1))
    end = " " * (indent * level)
    if isinstance(obj, bool) or obj is None:
        return json.dumps(obj)
    if isinstance(obj, (int, np.integer)):
        return str(int(obj))
    if isinstance(obj, (float, np.floating)):
        return fmt(obj) if math.isfinite(obj) else "null"
    if isinstance(obj, str):
        return json.dumps(obj)
    if isinstance(obj, dict):
        if not obj:
            return "{}"
        items = [f"{pad}{json.dumps(str(k))}: {_encode(obj[k], indent, level + 1)}" for k in sorted(obj)]
        return "{\n" + ",\n".join(items) + "\n" + end + "}"
    if isinstance(obj, (list, tuple, np.ndarray)):
        if len(obj) == 0:
            return "[]"
        if all(isinstance(v, (int, float, np.integer, np.floating)) and not isinstance(v, bool) for v in obj):
            return "[" + ", ".join(_encode(v, indent, level + 1) for v in obj) + "]"
        return "[\n" + ",\n".join(pad + _encode(v, indent, level + 1) for v in obj) + "\n" + end + "]"
    raise TypeError(f"cannot encode {type(obj).__name__}")


def dumps(obj):
    """Deterministic JSON with sorted keys and 17-digit floats; non-finite floats become null."""
    return _encode(obj, 2, 0) + "\n"


def _emit(text, out):
    if out is None:
        sys.stdout.write(text)
    else:
        Path(out).write_text(text)


# --------------------------------------------------------------------------
# argument parsing helpers


def parse_grid(spec):
    """Parse ``start:stop:geometric|linear:count`` (spacing defaults to geometric).

    ``start:stop:count`` is accepted as shorthand for a geometric grid, and a
    single number gives a one-point grid.
    """
    parts = spec.split(":")
    try:
        if len(parts) == 1:
            grid = np.array([float(parts[0])])
        else:
            if len(parts) == 3:
                parts = [parts[0], parts[1], "geometric", parts[2]]
            if len(parts) != 4:
                raise ValueError
            start, stop, kind, count = float(parts[0]), float(parts[1]), parts[2].lower(), int(parts[3])
            if count < 1 or kind not in ("geometric", "linear"):
                raise ValueError
            if kind == "geometric":
                if start <= 0 or stop <= 0:
                    raise UsageError(f"geometric grid needs positive end points: {spec!r}")
                grid = np.geomspace(start, stop, count)
            else:
                grid = np.linspace(start, stop, count)
    except ValueError:
        raise UsageError(f"bad grid {spec!r}; expected start:stop:geometric|linear:count") from None
    if not np.all(np.isfinite(grid)) or np.any(grid <= 0):
        raise UsageError(f"grid {spec!r} must contain positive finite times")
    return grid


def _positive(kind):
    def convert(text):
        try:
            value = kind(text)
        except ValueError:
            raise argparse.ArgumentTypeError(f"not a valid {kind.__name__}: {text!r}") from None
        if not value > 0:
            raise argparse.ArgumentTypeError(f"must be positive, got {text!r}")
        return value

    return convert


def resolve_threads(requested):
    """Thread count: ``CUSP_SPECTRA_THREADS`` overrides ``--threads``."""
    env = os.environ.get(THREADS_ENV)
    if env is not None and env.strip():
        try:
            value = int(env)
        except ValueError:
            raise UsageError(f"{THREADS_ENV} must be a positive integer, got {env!r}") from None
        if value < 1:
            raise UsageError(f"{THREADS_ENV} must be a positive integer, got {env!r}")
        return value
    return requested


def _load_surface(name):
    path = Path(name)
    if not path.exists():
        if name in surface.BUNDLED:
            return surface.bundled_surface(name)
        raise UsageError(f"surface file not found: {name}")
    try:
        return surface.load_surface(path)
    except SurfaceLoadError as exc:
        raise UsageError(f"{name}: {exc} [{exc.invariant}]") from None


def _load_field(name, surf):
    """A per-site field from JSON (list, or object with ``values``) or one value per line."""
    path = Path(name)
    if not path.exists():
        raise UsageError(f"field file not found: {name}")
    text = path.read_text()
    try:
        data = json.loads(text)
        if isinstance(data, dict):
            data = data.get("values", data.get("minimizer"))
        values = np.asarray(data, dtype=float)
    except (json.JSONDecodeError, TypeError, ValueError):
        try:
            values = np.array([float(ln) for ln in text.split() if ln.strip()])
        except ValueError:
            raise UsageError(f"{name}: not a JSON list or a column of numbers") from None
    if values.shape != (surf.n_sites,):
        raise UsageError(f"{name}: expected {surf.n_sites} values, got {values.size}")
    if not np.all(np.isfinite(values)):
        raise UsageError(f"{name}: field contains non-finite values")
    return values


def _read_samples(name):
    if not Path(name).exists():
        raise UsageError(f"samples file not found: {name}")
    try:
        return trace_expansion.read_samples_csv(name)
    except DomainError as exc:
        raise UsageError(f"{name}: {exc}") from None


# --------------------------------------------------------------------------
# commands


def cmd_model_trace(args):
    """CSV of ``(t, exact, quadrature, abs_diff)``; exit 4 if any difference exceeds ``--tol``."""
    tol = args.tol if args.tol is not None else 1e-8
    pair = ModelCuspPair(args.a, Domain.parse(args.domain))
    grid = parse_grid(args.t)
    exact = np.atleast_1d(relative_trace_exact(pair, grid))
    quad = np.array([relative_trace_quadrature(pair, t, tol=min(1e-10, 1e-2 * tol)) for t in grid])
    diff = np.abs(exact - quad)
    lines = ["t,exact,quadrature,abs_diff"]
    lines += [",".join(fmt(v) for v in row) for row in zip(grid, exact, quad, diff)]
    _emit("\n".join(lines) + "\n", args.out)
    if np.any(diff > tol):
        print(f"model-trace: max |diff| {diff.max():.3e} exceeds tolerance {tol:.1e}", file=sys.stderr)
        return EXIT_NUMERICAL
    return EXIT_OK


def sampled_trace(t, values, coeffs, h=0):
    """A :class:`RelativeTrace` interpolating tabulated samples.

    The remainder ``R - expansion`` is interpolated by a cubic spline in
    ``log t``; below the first sample it is continued as ``c sqrt(t)`` and
    beyond the last sample ``R - h`` is continued exponentially with the
    rate fitted to the last four samples.

    Raises
    ------
    ModelMismatchError
        If the samples do not approach ``h`` at large ``t``.
    """
    order = np.argsort(t)
    t, values = np.asarray(t, float)[order], np.asarray(values, float)[order]
    if len(t) < 8 or np.any(np.diff(t) <= 0):
        raise DomainError("need at least 8 samples at distinct times")
    rem = values - trace_expansion.eval_expansion(coeffs, h, t)
    spline = interpolate.CubicSpline(np.log(t), rem)
    tail_t, tail_gap = t[-4:], values[-4:] - h
    if np.any(tail_gap == 0) or np.any(np.sign(tail_gap) != np.sign(tail_gap[0])):
        rate = math.inf
    else:
        rate = -np.polyfit(tail_t, np.log(np.abs(tail_gap)), 1)[0]
    if not rate > 0:
        raise ModelMismatchError(
            f"samples do not decay towards h = {h} at large t (fitted rate {rate:.3e})",
            worst_t=float(t[-1]), ratio=float(abs(values[-1] - h)),
        )
    t_lo, t_hi = t[0], t[-1]
    r_lo, gap_hi = rem[0], values[-1] - h

    def evaluate(s):
        s = np.asarray(s, dtype=float)
        out = np.empty_like(s)
        lo, hi = s < t_lo, s > t_hi
        mid = ~(lo | hi)
        out[mid] = trace_expansion.eval_expansion(coeffs, h, s[mid]) + spline(np.log(s[mid]))
        out[lo] = trace_expansion.eval_expansion(coeffs, h, s[lo]) + r_lo * np.sqrt(s[lo] / t_lo)
        out[hi] = h + (0.0 if math.isinf(rate) else gap_hi * np.exp(-rate * (s[hi] - t_hi)))
        return out[()] if out.ndim == 0 else out

    return trace_expansion.RelativeTrace(
        eval=evaluate, coeffs=coeffs, kernel_offset=h, decay_rate=float(min(rate, 1e3)), label="samples",
    )


def cmd_det(args):
    """JSON ``ZetaResult`` for the builtin model pair or tabulated samples."""
    if args.samples is not None:
        if args.coeffs is None:
            raise UsageError("--samples needs --coeffs a0,a10,a11,a2")
        try:
            c = [float(v) for v in args.coeffs.split(",")]
        except ValueError:
            raise UsageError(f"bad --coeffs {args.coeffs!r}") from None
        if len(c) != 4:
            raise UsageError("--coeffs needs exactly four values a0,a10,a11,a2")
        t, values = _read_samples(args.samples)
        trace = sampled_trace(t, values, trace_expansion.ExpansionCoeffs(*c), args.h)
        t_min = max(1e-6, 10.0 * float(np.min(t)))
        options = zeta_det.ZetaOptions(t_min=min(t_min, 1e-3))
    else:
        trace = trace_expansion.model_pair_trace(args.a, Domain.parse(args.domain))
        options = zeta_det.ZetaOptions()
    if args.tol is not None:
        options = zeta_det.ZetaOptions(**{**options.__dict__, "agreement_tol": args.tol})
    result = zeta_det.zeta_prime_zero(trace, options)
    _emit(dumps(result.as_dict()), args.out)
    return EXIT_OK


def cmd_fit_expansion(args):
    """JSON ``FitReport`` from a two-column CSV of ``(t, value)``."""
    t, values = _read_samples(args.csv_in)
    report = trace_expansion.fit_expansion(t, values, remainder_terms=args.remainder_terms)
    _emit(dumps(report.as_dict()), args.out)
    return EXIT_OK


def _random_field(surf, seed, amplitude):
    return surface.random_decaying_factor(surf, np.random.default_rng(seed), amplitude=amplitude).values


def cmd_polyakov(args):
    """JSON ``PolyakovDelta``, optionally with a cocycle check against a second random field."""
    surf = _load_surface(args.surface)
    if args.phi is not None:
        phi = _load_field(args.phi, surf)
    else:
        seed = args.random_seed if args.random_seed is not None else args.seed
        phi = _random_field(surf, seed, args.amplitude)
    doc = {"surface": surf.name, "delta": polyakov.polyakov_delta(surf, phi).as_dict()}
    status = EXIT_OK
    if args.cocycle:
        seed = (args.random_seed if args.random_seed is not None else args.seed) + 1
        psi = _random_field(surf, seed, args.amplitude)
        residual = polyakov.cocycle_residual(surf, phi, psi)
        bound = args.tol if args.tol is not None else 10.0 * surf.tolerance
        doc["cocycle"] = {"residual": residual, "bound": bound, "passed": abs(residual) < bound}
        if not abs(residual) < bound:
            status = EXIT_NUMERICAL
    _emit(dumps(doc), args.out)
    return status


def cmd_uniformize(args):
    """JSON ``ExtremalReport``; the iteration history goes to ``--history`` as CSV."""
    surf = _load_surface(args.surface)
    if args.phi is not None:
        phi0 = _load_field(args.phi, surf)
    elif args.perturbation > 0:
        phi0 = _random_field(surf, args.seed, args.perturbation)
    else:
        phi0 = np.zeros(surf.n_sites)
    options = polyakov.MinimizeOptions(
        step_rule=args.step_rule,
        max_iter=args.max_iter,
        grad_tol=args.tol if args.tol is not None else polyakov.MinimizeOptions.grad_tol,
        area_normalization=args.area_normalization,
    )
    report = polyakov.minimize_ops(surf, phi0, options)
    doc = report.as_dict()
    if not args.include_minimizer:
        doc.pop("minimizer")
    doc["relative_stddev"] = report.curvature_stddev / abs(report.curvature_mean)
    _emit(dumps(doc), args.out)
    if args.history is not None:
        Path(args.history).write_text(report.history_csv())
    return EXIT_OK


def cmd_gauss_bonnet(args):
    """JSON Gauss-Bonnet report; with ``--samples K`` also the invariance under K seeded factors."""
    surf = _load_surface(args.surface)
    report = surface.gauss_bonnet(surf)
    doc = {"surface": surf.name, "euler_char": surf.euler_char, "report": report.as_dict()}
    passed = report.passed
    if args.samples:
        bound = 10.0 * surf.tolerance
        diffs = []
        for k in range(args.samples):
            phi = _random_field(surf, args.seed + k, args.amplitude)
            h = surface.conformal_transform(surf, phi)
            diffs.append(h.total_curvature - surf.total_curvature)
        worst = float(np.max(np.abs(diffs)))
        doc["invariance"] = {"differences": diffs, "max_abs": worst, "bound": bound, "passed": worst < bound}
        passed = passed and worst < bound
    _emit(dumps(doc), args.out)
    return EXIT_OK if passed else EXIT_CONTRACT


# --------------------------------------------------------------------------
# entry point


class _Parser(argparse.ArgumentParser):
    def __init__(self, *args, **kwargs):
        kwargs.setdefault("allow_abbrev", False)
        super().__init__(*args, **kwargs)

    def error(self, message):
        raise UsageError(message)


def _global_flags(suppress):
    # Subparsers repeat the global flags with suppressed defaults so that a
    # flag given before the subcommand is not overwritten by a default.
    def default(value):
        return argparse.SUPPRESS if suppress else value

    common = _Parser(add_help=False)
    common.add_argument("--tol", type=_positive(float), default=default(None),
                        help="command tolerance (comparison, agreement or gradient tolerance)")
    common.add_argument("--out", default=default(None), help="output file (default: stdout)")
    common.add_argument("--seed", type=int, default=default(0), help="seed for random fields")
    common.add_argument("--threads", type=_positive(int), default=default(1),
                        help=f"worker threads; {THREADS_ENV} overrides")
    return common


def build_parser():
    parser = _Parser(prog="cusp-spectra", description=__doc__.split("\n")[0], parents=[_global_flags(False)])
    common = _global_flags(True)
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("model-trace", parents=[common], help="closed form vs quadrature of the model trace")
    p.add_argument("--a", type=float, required=True)
    p.add_argument("--domain", default="full", choices=["full", "restricted"])
    p.add_argument("--t", required=True, help="time grid start:stop:geometric|linear:count")
    p.set_defaults(func=cmd_model_trace)

    p = sub.add_parser("det", parents=[common], help="relative zeta'(0) and determinant")
    p.add_argument("--a", type=float, default=4.0, help="builtin model pair start height")
    p.add_argument("--domain", default="full", choices=["full", "restricted"])
    p.add_argument("--samples", default=None, help="CSV of (t, R(t)) instead of the builtin model")
    p.add_argument("--coeffs", default=None, help="a0,a10,a11,a2 for --samples")
    p.add_argument("--h", type=int, default=0, help="kernel offset for --samples")
    p.set_defaults(func=cmd_det)

    p = sub.add_parser("fit-expansion", parents=[common], help="fit small-t coefficients to samples")
    p.add_argument("csv_in")
    p.add_argument("--remainder-terms", type=int, default=3)
    p.set_defaults(func=cmd_fit_expansion)

    p = sub.add_parser("polyakov", parents=[common], help="conformal change of log det")
    p.add_argument("--surface", required=True, help="surface JSON file or bundled name")
    p.add_argument("--phi", default=None, help="conformal factor file")
    p.add_argument("--random-seed", type=int, default=None, help="seeded random decaying factor")
    p.add_argument("--amplitude", type=_positive(float), default=0.3)
    p.add_argument("--cocycle", action="store_true", help="also check the cocycle identity")
    p.set_defaults(func=cmd_polyakov)

    p = sub.add_parser("uniformize", parents=[common], help="minimise the convex functional")
    p.add_argument("--surface", required=True)
    p.add_argument("--phi", default=None, help="starting conformal factor file")
    p.add_argument("--perturbation", type=float, default=0.0, help="amplitude of a seeded random start")
    p.add_argument("--step-rule", default="sobolev", choices=["sobolev", "gradient", "newton"])
    p.add_argument("--max-iter", type=int, default=5000)
    p.add_argument("--area-normalization", action="store_true")
    p.add_argument("--history", default=None, help="CSV file for (iteration, Phi, grad_norm)")
    p.add_argument("--include-minimizer", action="store_true")
    p.set_defaults(func=cmd_uniformize)

    p = sub.add_parser("gauss-bonnet", parents=[common], help="check total curvature")
    p.add_argument("--surface", required=True)
    p.add_argument("--samples", type=int, default=0, help="number of seeded conformal factors")
    p.add_argument("--amplitude", type=_positive(float), default=0.3)
    p.set_defaults(func=cmd_gauss_bonnet)
    return parser


def main(argv=None):
    try:
        args = build_parser().parse_args(argv)
        args.threads = resolve_threads(args.threads)
        return args.func(args)
    except UsageError as exc:
        print(f"cusp-spectra: usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (ConvergenceError, ConditioningError, ModelMismatchError, InconsistencyError) as exc:
        print(f"cusp-spectra: numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    except (ContractError, DomainError) as exc:
        print(f"cusp-spectra: contract violation: {exc}", file=sys.stderr)
        return EXIT_CONTRACT
    except CuspSpectraError as exc:
        print(f"cusp-spectra: error: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL


if __name__ == "__main__":
    sys.exit(main())
