"""Polyakov's formula and the extremal problem for the relative determinant.

For ``h = exp(2 phi) g`` with ``phi`` decaying in the cusps,

    log det(D_h, D_{1,0}) - log det(D_g, D_{1,0})
        = -1/(12 pi) int |grad phi|^2 dA_g - 1/(6 pi) int K_g phi dA_g + log(A_h / A_g).

The constant is written as ``log(A_h/A_g)`` so the formula vanishes at
``phi = 0`` and satisfies the cocycle identity.  Maximising the determinant
at fixed area is equivalent to minimising the convex functional

    Phi(phi) = 1/2 int |grad phi|^2 dA_g + int K_g phi dA_g - pi chi log int exp(2 phi) dA_g

(for ``chi < 0``), whose critical points are the constant-curvature metrics.
"""

import csv
import io
import json
import math
from dataclasses import dataclass, field

import numpy as np
from scipy import sparse
from scipy.sparse import linalg as splinalg

from .errors import ContractError, ConvergenceError, DomainError, LineSearchError
from .surface import ConformalFactor, as_factor, conformal_transform, dirichlet_energy

FOUR_PI = 4.0 * math.pi


@dataclass
class PolyakovDelta:
    energy_term: float
    curvature_term: float
    area_term: float

    @property
    def total(self):
        return self.energy_term + self.curvature_term + self.area_term

    def as_dict(self):
        return {
            "energy_term": self.energy_term,
            "curvature_term": self.curvature_term,
            "area_term": self.area_term,
            "total": self.total,
        }


def _values(phi, surf):
    return as_factor(phi, surf).values


def _exp_area(surf, phi):
    return math.fsum(surf.weights * np.exp(2.0 * phi))


def polyakov_delta(surf, phi):
    """Change of ``log det`` under ``g -> exp(2 phi) g``.

    Raises
    ------
    ContractError
        If ``phi`` is a :class:`ConformalFactor` outside its decay class.
    """
    phi = _values(phi, surf)
    return PolyakovDelta(
        energy_term=-dirichlet_energy(surf, phi) / (12.0 * math.pi),
        curvature_term=-surf.integrate(surf.curvature * phi) / (6.0 * math.pi),
        area_term=math.log(_exp_area(surf, phi) / surf.area),
    )


def polyakov_directional(surf, phi, psi):
    """Derivative of :func:`polyakov_delta` at ``phi`` in direction ``psi``.

    ``-1/(6 pi) int psi (Delta_g phi + K_g) dA_g + (2/A_h) int psi exp(2 phi) dA_g``
    """
    phi = _values(phi, surf)
    psi = _values(psi, surf)
    e2 = np.exp(2.0 * phi)
    curv = math.fsum(psi * (surf.laplacian @ phi)) + surf.integrate(psi * surf.curvature)
    return -curv / (6.0 * math.pi) + 2.0 * surf.integrate(psi * e2) / _exp_area(surf, phi)


def cocycle_residual(surf, phi, psi):
    """``F(g, phi + psi) - F(g, phi) - F(exp(2 phi) g, psi)`` for the total of the formula."""
    phi = _values(phi, surf)
    psi = _values(psi, surf)
    h = conformal_transform(surf, phi)
    terms = [polyakov_delta(surf, phi + psi).total, -polyakov_delta(surf, phi).total,
             -polyakov_delta(h, psi).total]
    return math.fsum(terms)


def ops_functional(surf, phi):
    """The convex functional ``Phi``; translation invariant when Gauss-Bonnet holds."""
    phi = _values(phi, surf)
    return (0.5 * dirichlet_energy(surf, phi) + surf.integrate(surf.curvature * phi)
            - math.pi * surf.euler_char * math.log(_exp_area(surf, phi)))


def ops_gradient(surf, phi):
    """``L^2(dA_g)`` gradient of ``Phi``: ``Delta_g phi + K_g - 2 pi chi exp(2 phi) / int exp(2 phi) dA_g``.

    Vanishes exactly when ``K_h`` equals the constant ``2 pi chi / A_h``.
    """
    phi = _values(phi, surf)
    e2 = np.exp(2.0 * phi)
    return surf.apply_laplacian(phi) + surf.curvature - 2.0 * math.pi * surf.euler_char * e2 / _exp_area(surf, phi)


@dataclass
class CurvatureStats:
    mean: float
    stddev: float
    target: float
    max_interior_deviation: float
    relative_stddev: float

    def as_dict(self):
        return dict(self.__dict__)


def curvature_constancy(surf, phi):
    """Area-weighted statistics of ``K_h`` over interior sites.

    Sites on cusp truncation rows are excluded from all statistics.
    """
    phi = _values(phi, surf)
    h = conformal_transform(surf, phi)
    interior = ~surf.boundary_mask()
    k = h.curvature[interior]
    w = h.weights[interior]
    mean = math.fsum(w * k) / math.fsum(w)
    std = math.sqrt(max(math.fsum(w * (k - mean) ** 2) / math.fsum(w), 0.0))
    target = 2.0 * math.pi * surf.euler_char / h.area
    return CurvatureStats(
        mean=mean,
        stddev=std,
        target=target,
        max_interior_deviation=float(np.max(np.abs(k - target))),
        relative_stddev=std / abs(mean) if mean else math.inf,
    )


@dataclass
class MinimizeOptions:
    """Settings for :func:`minimize_ops`.

    ``step_rule`` picks the descent direction: ``"gradient"`` is the
    ``L^2(dA_g)`` gradient, ``"sobolev"`` its ``H^1`` Riesz representative
    ``(L + mu W)^-1 W r`` and ``"newton"`` a damped Newton step.  All use
    Armijo backtracking on ``Phi``.
    """

    step_rule: str = "sobolev"
    max_iter: int = 5000
    grad_tol: float = 1e-6
    area_normalization: bool = False
    armijo_c: float = 1e-4
    backtrack: float = 0.5
    max_backtracks: int = 60
    sobolev_mass: float = None
    freeze_boundary: bool = True

    def __post_init__(self):
        if self.step_rule not in ("gradient", "sobolev", "newton"):
            raise DomainError(f"unknown step rule {self.step_rule!r}")
        if not (self.grad_tol > 0 and self.max_iter >= 0):
            raise DomainError("grad_tol must be positive and max_iter non-negative")


@dataclass
class ExtremalReport:
    minimizer: ConformalFactor
    curvature_mean: float
    curvature_stddev: float
    target: float
    iterations: int
    final_gradient_norm: float
    functional_value: float
    area: float
    max_interior_deviation: float
    boundary_decay_exponent: float = float("nan")
    history: list = field(default_factory=list)

    def as_dict(self):
        return {
            "curvature_mean": self.curvature_mean,
            "curvature_stddev": self.curvature_stddev,
            "target": self.target,
            "iterations": self.iterations,
            "final_gradient_norm": self.final_gradient_norm,
            "functional_value": self.functional_value,
            "area": self.area,
            "max_interior_deviation": self.max_interior_deviation,
            "boundary_decay_exponent": self.boundary_decay_exponent,
            "minimizer": [float(v) for v in self.minimizer.values],
        }

    def history_csv(self):
        out = io.StringIO()
        writer = csv.writer(out, lineterminator="\n")
        writer.writerow(["iteration", "phi", "grad_norm"])
        for it, value, norm in self.history:
            writer.writerow([it, f"{value:.17g}", f"{norm:.17g}"])
        return out.getvalue()


def _fitted_decay_exponent(surf, phi):
    """Slope of ``log|phi|`` against ``log y`` over cusp rows, excluding truncation rows."""
    y = surf.cusp_heights()
    use = ~np.isnan(y) & ~surf.boundary_mask() & (np.abs(phi) > 1e-14)
    if use.sum() < 3 or np.ptp(y[use]) == 0:
        return float("nan")
    slope, _ = np.polyfit(np.log(y[use]), np.log(np.abs(phi[use])), 1)
    return float(-slope)


def minimize_ops(surf, phi0=None, options=None, callback=None):
    """Minimise ``Phi`` over the conformal class by descent with Armijo backtracking.

    Sites on the cusp truncation rows stay at ``phi = 0``, the discrete
    stand-in for the decay condition.  With ``area_normalization`` the
    minimiser is shifted by a constant so that ``A_h = 2 pi (2p + m - 2)``,
    which makes the constant curvature equal to ``-1``.  The shift is
    global, truncation rows included.

    Raises
    ------
    ContractError
        If ``chi >= 0``.
    LineSearchError
        If backtracking cannot decrease ``Phi``.
    ConvergenceError
        If ``max_iter`` is reached before ``grad_tol``.
    """
    options = options or MinimizeOptions()
    chi = surf.euler_char
    if chi >= 0:
        raise ContractError(f"minimisation needs negative Euler characteristic, got chi = {chi}")
    n = surf.n_sites
    phi = np.zeros(n) if phi0 is None else np.array(_values(phi0, surf), dtype=float)
    frozen = surf.boundary_mask() if options.freeze_boundary else np.zeros(n, dtype=bool)
    free = ~frozen
    phi[frozen] = 0.0
    w = surf.weights
    lap = surf.laplacian

    idx = np.flatnonzero(free)
    lap_ff = lap[idx][:, idx].tocsc()
    w_f = w[idx]
    solver = None
    if options.step_rule == "sobolev":
        # default mass matches the diagonal of the log-area Hessian at phi = 0
        mu = options.sobolev_mass if options.sobolev_mass is not None else -4.0 * math.pi * chi / surf.area
        solver = splinalg.factorized((lap_ff + mu * sparse.diags(w_f)).tocsc())

    def direction(phi, grad):
        g = grad[idx]
        if options.step_rule == "gradient":
            d = -g
        elif options.step_rule == "sobolev":
            d = -solver(w_f * g)
        else:
            # Hessian of Phi on free sites: L + 4 pi |chi| (diag(v)/Z - v v^T / Z^2), v = w e^{2 phi}
            v = w_f * np.exp(2.0 * phi[idx])
            z = _exp_area(surf, phi)
            c = -4.0 * math.pi * chi
            hess = (lap_ff + sparse.diags(c * v / z)).tocsc()
            lu = splinalg.splu(hess)
            rhs = -w_f * g
            u = lu.solve(rhs)
            q = lu.solve(v)
            # Sherman-Morrison for the rank-one term -beta v v^T.  Without frozen
            # sites Phi is translation invariant and the exact Hessian kills
            # constants; halving beta restores definiteness and only changes
            # the (irrelevant) constant component of the step.
            beta = c / z ** 2 if frozen.any() else 0.5 * c / z ** 2
            d = u + q * beta * (v @ u) / (1.0 - beta * (v @ q))
        full = np.zeros(n)
        full[idx] = d
        return full

    def grad_norm(grad):
        return math.sqrt(math.fsum(w_f * grad[idx] ** 2))

    value = ops_functional(surf, phi)
    grad = ops_gradient(surf, phi)
    norm = grad_norm(grad)
    history = [(0, value, norm)]
    step = 1.0
    it = 0
    while norm >= options.grad_tol:
        if it >= options.max_iter:
            raise ConvergenceError(
                f"minimize_ops stopped after {it} iterations with gradient norm {norm:.3e}",
                estimate=norm,
            )
        d = direction(phi, grad)
        slope = math.fsum(w * grad * d)
        if slope >= 0:
            d = -grad * free
            slope = math.fsum(w * grad * d)
        alpha = min(1.0, 2.0 * step) if options.step_rule != "gradient" else 2.0 * step
        for _ in range(options.max_backtracks):
            trial = phi + alpha * d
            with np.errstate(over="ignore"):
                trial_value = ops_functional(surf, trial)
            if math.isfinite(trial_value) and trial_value <= value + options.armijo_c * alpha * slope:
                break
            alpha *= options.backtrack
        else:
            if abs(slope) < 1e-14 * max(1.0, abs(value)):
                break  # at machine precision; the stationary point is reached
            raise LineSearchError(
                f"Armijo backtracking failed at iteration {it} (gradient norm {norm:.3e})",
                estimate=norm,
            )
        phi, value, step = trial, trial_value, alpha
        grad = ops_gradient(surf, phi)
        norm = grad_norm(grad)
        it += 1
        history.append((it, value, norm))
        if callback is not None:
            callback(it, phi, value, norm)

    if options.area_normalization:
        # Phi is translation invariant, so a global constant shift stays optimal
        phi = phi + 0.5 * math.log(-2.0 * math.pi * chi / _exp_area(surf, phi))

    stats = curvature_constancy(surf, phi)
    factor = ConformalFactor(phi, decay_order=0.0)
    return ExtremalReport(
        minimizer=factor,
        curvature_mean=stats.mean,
        curvature_stddev=stats.stddev,
        target=stats.target,
        iterations=it,
        final_gradient_norm=norm,
        functional_value=ops_functional(surf, phi),
        area=_exp_area(surf, phi),
        max_interior_deviation=stats.max_interior_deviation,
        boundary_decay_exponent=_fitted_decay_exponent(surf, phi),
        history=history,
    )


def report_json(report):
    return json.dumps(report.as_dict(), indent=2, sort_keys=True)
