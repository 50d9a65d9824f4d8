"""Discrete surfaces with cusps.

A :class:`DiscreteSurface` stores per-site area masses ``w`` (quadrature
weights for ``dA_g``), a symmetric positive-semidefinite stiffness form
``L`` with ``L @ 1 = 0`` (so that ``u @ L @ v`` approximates
``int <grad u, grad v> dA_g``), per-site Gaussian curvature and topology.
The Laplace-Beltrami operator is ``Delta_g u = (L @ u) / w``.

In two dimensions the Dirichlet form is conformally invariant, so a
conformal change ``h = exp(2 phi) g`` keeps ``L`` and only rescales the
weights: ``Delta_h = exp(-2 phi) Delta_g`` holds exactly at the discrete
level.
"""

import json
import math
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Optional

import numpy as np
from scipy import sparse
from scipy.sparse import linalg as splinalg

from .errors import ContractError, DomainError, SurfaceLoadError

TWO_PI = 2.0 * math.pi


def _frozen(a, dtype=float):
    a = np.array(a, dtype=dtype)
    a.setflags(write=False)
    return a


@dataclass(frozen=True)
class Cusp:
    """Sites of one (truncated) cusp and their height coordinate ``y >= 1``."""

    sites: np.ndarray
    y: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "sites", _frozen(self.sites, int))
        object.__setattr__(self, "y", _frozen(self.y))
        if self.sites.shape != self.y.shape:
            raise DomainError("cusp sites and heights must have the same length")
        if len(self.y) and self.y.min() < 1.0:
            raise DomainError("cusp heights must satisfy y >= 1")

    @property
    def outer_sites(self):
        """Sites on the truncation row (largest ``y``)."""
        if not len(self.y):
            return self.sites
        return self.sites[np.isclose(self.y, self.y.max(), rtol=1e-12, atol=0.0)]


@dataclass(frozen=True)
class DiscreteSurface:
    """Sampled surface with cusps; immutable once built.

    Parameters
    ----------
    weights : (N,) array
        Positive area masses.
    laplacian : (N, N) sparse matrix
        Symmetric stiffness form with zero row sums.
    curvature : (N,) array
        Gaussian curvature at each site.
    genus : int
    cusps : tuple of Cusp
    tolerance : float
        Mesh tolerance used by the Gauss-Bonnet check.
    complete : bool
        False for fragments (e.g. a lone cusp grid) whose total curvature
        is not tied to a closed topology.
    coords : (N, 2) array, optional
        Parameter-space coordinates, for plotting only.
    """

    weights: np.ndarray
    laplacian: sparse.csr_matrix
    curvature: np.ndarray
    genus: int = 0
    cusps: tuple = ()
    tolerance: float = 1e-8
    complete: bool = True
    coords: Optional[np.ndarray] = None
    name: str = ""

    def __post_init__(self):
        w = _frozen(self.weights)
        k = _frozen(self.curvature)
        n = len(w)
        if w.ndim != 1 or k.shape != w.shape:
            raise DomainError("weights and curvature must be 1-D arrays of equal length")
        if not np.all(w > 0):
            raise DomainError("all area weights must be positive")
        if not np.all(np.isfinite(k)):
            raise DomainError("curvature must be finite")
        lap = sparse.csr_matrix(self.laplacian, dtype=float)
        if lap.shape != (n, n):
            raise DomainError(f"laplacian has shape {lap.shape}, expected {(n, n)}")
        lap.sort_indices()
        scale = abs(lap).max() if lap.nnz else 1.0
        if lap.nnz and abs(lap - lap.T).max() > 1e-12 * scale:
            raise DomainError("laplacian form is not symmetric")
        if lap.nnz and np.abs(lap @ np.ones(n)).max() > 1e-10 * scale:
            raise DomainError("laplacian does not annihilate constants")
        if self.genus < 0:
            raise DomainError("genus must be non-negative")
        if not self.tolerance > 0:
            raise DomainError("tolerance must be positive")
        cusps = tuple(c if isinstance(c, Cusp) else Cusp(**c) for c in self.cusps)
        for c in cusps:
            if len(c.sites) and (c.sites.min() < 0 or c.sites.max() >= n):
                raise DomainError("cusp site index out of range")
        object.__setattr__(self, "weights", w)
        object.__setattr__(self, "curvature", k)
        object.__setattr__(self, "laplacian", lap)
        object.__setattr__(self, "cusps", cusps)
        if self.coords is not None:
            object.__setattr__(self, "coords", _frozen(self.coords))

    @property
    def n_sites(self):
        return len(self.weights)

    @property
    def m(self):
        return len(self.cusps)

    @property
    def euler_char(self):
        return 2 - 2 * self.genus - self.m

    @property
    def area(self):
        return math.fsum(self.weights)

    @property
    def total_curvature(self):
        return math.fsum(self.weights * self.curvature)

    def apply_laplacian(self, u):
        """Discrete ``Delta_g u = (L u) / w``."""
        return (self.laplacian @ np.asarray(u, dtype=float)) / self.weights

    def integrate(self, f):
        return math.fsum(self.weights * np.asarray(f, dtype=float))

    def cusp_heights(self):
        """Per-site height ``y`` (NaN off the cusps)."""
        y = np.full(self.n_sites, np.nan)
        for c in self.cusps:
            y[c.sites] = c.y
        return y

    def boundary_mask(self):
        """True on the truncation rows of the cusps."""
        mask = np.zeros(self.n_sites, dtype=bool)
        for c in self.cusps:
            mask[c.outer_sites] = True
        return mask


@dataclass(frozen=True)
class ConformalFactor:
    """Conformal exponent ``phi`` (``h = exp(2 phi) g``) with a declared cusp decay.

    ``bound`` caps ``|phi| y**decay_order`` on cusp sites; when omitted it is
    taken from the values themselves.
    """

    values: np.ndarray
    decay_order: float = 19.0
    bound: Optional[float] = None

    def __post_init__(self):
        object.__setattr__(self, "values", _frozen(self.values))
        if not np.all(np.isfinite(self.values)):
            raise DomainError("conformal factor must be finite")

    def decay_constant(self, surf):
        y = surf.cusp_heights()
        on = ~np.isnan(y)
        if not on.any():
            return 0.0
        return float(np.max(np.abs(self.values[on]) * y[on] ** self.decay_order))

    def check(self, surf):
        """Raise :class:`ContractError` unless ``phi`` fits ``surf`` and its decay class."""
        if self.values.shape != (surf.n_sites,):
            raise ContractError(
                f"conformal factor has {self.values.shape} values, surface has {surf.n_sites} sites"
            )
        if self.bound is not None:
            c = self.decay_constant(surf)
            if c > self.bound * (1.0 + 1e-12):
                raise ContractError(
                    f"conformal factor leaves its decay class: max |phi| y^{self.decay_order:g} = "
                    f"{c:.3e} > {self.bound:.3e}"
                )
        return self


def as_factor(phi, surf=None):
    if isinstance(phi, ConformalFactor):
        factor = phi
    else:
        factor = ConformalFactor(np.asarray(phi, dtype=float))
    if surf is not None:
        factor.check(surf)
    return factor


# --------------------------------------------------------------------------
# construction


def _cylinder_stiffness(s, n_x, circumference=TWO_PI):
    """Five-point finite-volume stiffness on rows at axial positions ``s`` times a periodic ring."""
    s = np.asarray(s, dtype=float)
    n_rows = len(s)
    dx = circumference / n_x
    gaps = np.diff(s)
    if np.any(gaps <= 0):
        raise DomainError("row positions must be strictly increasing")
    dual = np.empty(n_rows)
    dual[0] = gaps[0] / 2.0
    dual[-1] = gaps[-1] / 2.0
    dual[1:-1] = (gaps[:-1] + gaps[1:]) / 2.0

    idx = np.arange(n_rows * n_x).reshape(n_rows, n_x)
    rows, cols, vals = [], [], []
    # ring edges (x direction)
    left = idx
    right = np.roll(idx, -1, axis=1)
    ring_w = np.repeat(dual / dx, n_x).reshape(n_rows, n_x)
    rows.append(left.ravel()); cols.append(right.ravel()); vals.append(ring_w.ravel())
    # axial edges
    lower = idx[:-1]
    upper = idx[1:]
    axial_w = np.repeat(dx / gaps, n_x).reshape(n_rows - 1, n_x)
    rows.append(lower.ravel()); cols.append(upper.ravel()); vals.append(axial_w.ravel())
    r = np.concatenate(rows)
    c = np.concatenate(cols)
    v = np.concatenate(vals)
    n = n_rows * n_x
    off = sparse.coo_matrix((-v, (r, c)), shape=(n, n))
    off = off + off.T
    diag = -np.asarray(off.sum(axis=1)).ravel()
    return (off + sparse.diags(diag)).tocsr(), dual


def _geometric_rows(a, Y, n):
    return a * (Y / a) ** (np.arange(n) / (n - 1))


def _hyperbolic_row_areas(edges, n_x, circumference=TWO_PI):
    # int over [lo, hi] x S^1 of y^-2 dy dx, split evenly over the ring
    return circumference * (1.0 / edges[:-1] - 1.0 / edges[1:]) / n_x


def build_cusp_grid(a, Y, n_y, n_x):
    """Tensor grid on the hyperbolic cusp ``[a, Y] x S^1`` with metric ``y^-2 (dy^2 + dx^2)``.

    Rows are geometric in ``y`` (equal hyperbolic length per row), columns
    uniform in ``x``.  Weights integrate ``y^-2`` exactly over each dual
    cell, so the total area is ``2 pi (1/a - 1/Y)``.  The result is a
    fragment: Gauss-Bonnet is not checked on it.
    """
    if not (a >= 1.0 and Y > a):
        raise DomainError(f"need 1 <= a < Y, got a={a}, Y={Y}")
    if n_y < 8 or n_x < 4:
        raise DomainError("cusp grid needs n_y >= 8 and n_x >= 4")
    y = _geometric_rows(a, Y, n_y)
    stiffness, _ = _cylinder_stiffness(y, n_x)
    edges = np.concatenate([[a], 0.5 * (y[:-1] + y[1:]), [Y]])
    weights = np.repeat(_hyperbolic_row_areas(edges, n_x), n_x)
    yy = np.repeat(y, n_x)
    xx = np.tile(TWO_PI * np.arange(n_x) / n_x, n_y)
    n = n_x * n_y
    return DiscreteSurface(
        weights=weights,
        laplacian=stiffness,
        curvature=-np.ones(n),
        genus=0,
        cusps=(Cusp(np.arange(n), yy),),
        tolerance=1e-8,
        complete=False,
        coords=np.column_stack([xx, yy]),
        name=f"cusp_grid(a={a:g},Y={Y:g})",
    )


def build_cusped_surface(genus=1, cusps=1, n_x=32, n_y=48, n_core=24, a=2.0, Y=200.0,
                         curvature_bump=0.0, tolerance=1e-8):
    """Synthetic surface of genus ``p`` with one or two hyperbolic cusps.

    The sites form one long cylinder: exact hyperbolic cusp grids on
    ``[a, Y] x S^1`` at one or both ends, joined through a core of
    ``n_core`` rows.  The core carries constant area density chosen so the
    total area equals ``2 pi (2p + m - 2)``; curvature is ``-1`` plus an
    optional smooth bump on the core, corrected so that Gauss-Bonnet holds
    to rounding.  Only the combinatorics of the core is synthetic; the cusp
    rows are a faithful discretisation.

    Parameters
    ----------
    genus : int
    cusps : {0, 1, 2}
    n_x, n_y, n_core : int
        Ring size, rows per cusp, rows in the core.
    a, Y : float
        Cusp start height and truncation height.
    curvature_bump : float
        Amplitude of a non-constant core curvature perturbation.
    """
    if cusps not in (0, 1, 2):
        raise DomainError("synthetic cusped surfaces support 0, 1 or 2 cusps")
    chi = 2 - 2 * genus - cusps
    if chi >= 0:
        raise DomainError("synthetic hyperbolic surfaces need negative Euler characteristic")
    target_area = -TWO_PI * chi

    y = _geometric_rows(a, Y, n_y) if cusps else np.empty(0)
    core_len = a / 2.0
    ds = core_len / n_core
    core_s = a - ds * np.arange(n_core, 0, -1)  # below the upper cusp's bottom row
    segments = [core_s]
    kinds = [np.full(n_core, -1)]
    heights = [np.full(n_core, np.nan)]
    if cusps >= 1:
        segments.append(y)
        kinds.append(np.zeros(n_y, int))
        heights.append(y)
    if cusps == 2:
        # mirror image below the core: axial position a - core_len - ds - (y - a)
        base = core_s[0] - ds
        segments.insert(0, (base - (y - a))[::-1])
        kinds.insert(0, np.ones(n_y, int))
        heights.insert(0, y[::-1])
    s = np.concatenate(segments)
    kind = np.concatenate(kinds)
    height = np.concatenate(heights)

    stiffness, dual = _cylinder_stiffness(s, n_x)
    n_rows = len(s)
    row_area = np.empty(n_rows)
    edges = np.concatenate([[s[0]], 0.5 * (s[:-1] + s[1:]), [s[-1]]])
    dx = TWO_PI / n_x
    for j in range(n_rows):
        if kind[j] >= 0:
            # map the dual cell back to this cusp's height coordinate
            lo, hi = sorted([height[j] + (edges[j] - s[j]) * (1 if kind[j] == 0 else -1),
                             height[j] + (edges[j + 1] - s[j]) * (1 if kind[j] == 0 else -1)])
            lo = max(lo, a)
            row_area[j] = dx * (1.0 / lo - 1.0 / hi)
    cusp_area = n_x * row_area[kind >= 0].sum()
    core_area = target_area - cusp_area
    if core_area <= 0:
        raise DomainError("cusps already exceed the total area; raise the cusp start height a")
    core = kind < 0
    row_area[core] = core_area * dual[core] / (n_x * dual[core].sum())

    weights = np.repeat(row_area, n_x)
    n = len(weights)
    kind_site = np.repeat(kind, n_x)
    xx = np.tile(TWO_PI * np.arange(n_x) / n_x, n_rows)
    ss = np.repeat(s, n_x)
    curvature = -np.ones(n)
    if curvature_bump:
        core_site = kind_site < 0
        u = (ss[core_site] - core_s[0]) / core_len
        curvature[core_site] += curvature_bump * np.sin(np.pi * u) ** 2 * (1.0 + 0.5 * np.cos(xx[core_site]))
    # enforce Gauss-Bonnet on the core
    core_site = kind_site < 0
    defect = TWO_PI * chi - math.fsum(weights * curvature)
    curvature[core_site] += defect / math.fsum(weights[core_site])

    cusp_list = []
    for j in range(cusps):
        sites = np.flatnonzero(kind_site == j)
        cusp_list.append(Cusp(sites, np.repeat(height[kind == j], n_x)))
    return DiscreteSurface(
        weights=weights,
        laplacian=stiffness,
        curvature=curvature,
        genus=genus,
        cusps=tuple(cusp_list),
        tolerance=tolerance,
        complete=True,
        coords=np.column_stack([xx, ss]),
        name=f"cusped(p={genus},m={cusps},n={n})",
    )


def build_closed_surface(genus, n=32, curvature=None, weight_variation=0.0, seed=0, tolerance=1e-8,
                         total_area=None):
    """Synthetic closed surface on a doubly periodic ``n x n`` grid.

    The stiffness is the flat five-point form on the torus graph; weights
    and curvature are prescribed.  Gauss-Bonnet ``sum w K = 2 pi chi`` is
    imposed exactly by shifting the curvature.  With ``genus=1``, uniform
    weights and zero curvature this is a faithful flat torus; for other
    genera the data is synthetic.

    Parameters
    ----------
    genus : int
    n : int
        Grid size.
    curvature : {None, "smooth"}
        ``None`` gives constant curvature ``2 pi chi / area``; ``"smooth"``
        adds a seeded smooth perturbation.
    weight_variation : float
        Relative amplitude of smooth variation in the area weights.
    total_area : float, optional
        Defaults to ``4 pi^2`` for the torus and ``2 pi |chi|`` otherwise.
    """
    if n < 4:
        raise DomainError("grid size must be at least 4")
    chi = 2 - 2 * genus
    if total_area is None:
        total_area = TWO_PI ** 2 if chi == 0 else TWO_PI * abs(chi)
    rng = np.random.default_rng(seed)
    h = TWO_PI / n
    # square cells: every edge of the torus graph has weight dx/dy = 1
    ring = sparse.diags([-np.ones(n - 1), 2 * np.ones(n), -np.ones(n - 1)], [-1, 0, 1], format="lil")
    ring[0, n - 1] = ring[n - 1, 0] = -1.0
    eye = sparse.identity(n)
    stiffness = sparse.kron(ring, eye) + sparse.kron(eye, ring)
    x, yv = np.meshgrid(h * np.arange(n), h * np.arange(n))
    x, yv = x.ravel(), yv.ravel()

    def smooth_field():
        p1, p2 = rng.uniform(0, TWO_PI, 2)
        return np.sin(x + p1) * np.cos(yv + p2) + 0.5 * np.cos(2 * x - yv + p1)

    weights = np.ones(n * n)
    if weight_variation:
        weights = weights * np.exp(weight_variation * smooth_field())
    weights *= total_area / weights.sum()
    k = np.full(n * n, TWO_PI * chi / total_area)
    if curvature == "smooth":
        k = k + 0.5 * smooth_field()
    k = k + (TWO_PI * chi - math.fsum(weights * k)) / total_area
    return DiscreteSurface(
        weights=weights,
        laplacian=stiffness.tocsr(),
        curvature=k,
        genus=genus,
        cusps=(),
        tolerance=tolerance,
        complete=True,
        coords=np.column_stack([x, yv]),
        name=f"closed(p={genus},n={n})",
    )


# --------------------------------------------------------------------------
# file format


def surface_to_dict(surf):
    lap = sparse.triu(surf.laplacian).tocoo()
    entries = [[int(i), int(j), float(v)] for i, j, v in zip(lap.row, lap.col, lap.data)]
    return {
        "sites": surf.n_sites,
        "weights": [float(w) for w in surf.weights],
        "laplacian": {"format": "triplets", "symmetric_storage": "upper", "entries": entries},
        "curvature": [float(k) for k in surf.curvature],
        "genus": int(surf.genus),
        "cusps": [{"sites": [int(i) for i in c.sites], "y": [float(v) for v in c.y]} for c in surf.cusps],
        "tolerance": float(surf.tolerance),
        "complete": bool(surf.complete),
        "name": surf.name,
    }


def save_surface(surf, path):
    Path(path).write_text(json.dumps(surface_to_dict(surf), separators=(",", ":")))


def _require(data, key, kind):
    if key not in data:
        raise SurfaceLoadError(f"surface file is missing '{key}'", invariant="schema")
    if not isinstance(data[key], kind):
        raise SurfaceLoadError(f"'{key}' has the wrong type", invariant="schema")
    return data[key]


def surface_from_dict(data):
    """Validate a decoded surface document and build the surface.

    Triplets may list each off-diagonal pair once (upper storage, flagged
    by ``"symmetric_storage": "upper"``) or both ways; full storage is
    symmetrised and asymmetry beyond 1e-12 is reported as a load error.
    """
    if not isinstance(data, dict):
        raise SurfaceLoadError("surface document must be a JSON object", invariant="schema")
    n = _require(data, "sites", int)
    weights = np.asarray(_require(data, "weights", list), dtype=float)
    curvature = np.asarray(_require(data, "curvature", list), dtype=float)
    genus = _require(data, "genus", int)
    lap_doc = _require(data, "laplacian", dict)
    if lap_doc.get("format") != "triplets":
        raise SurfaceLoadError("laplacian format must be 'triplets'", invariant="schema")
    entries = np.asarray(lap_doc.get("entries", []), dtype=float).reshape(-1, 3)
    if weights.shape != (n,) or curvature.shape != (n,):
        raise SurfaceLoadError("weights/curvature length does not match 'sites'", invariant="schema")
    if np.any(weights <= 0):
        raise SurfaceLoadError("area weights must be positive", invariant="positive_weights")
    i, j, v = entries[:, 0].astype(int), entries[:, 1].astype(int), entries[:, 2]
    if len(i) and (min(i.min(), j.min()) < 0 or max(i.max(), j.max()) >= n):
        raise SurfaceLoadError("laplacian index out of range", invariant="schema")
    mat = sparse.coo_matrix((v, (i, j)), shape=(n, n)).tocsr()
    if lap_doc.get("symmetric_storage") == "upper":
        mat = mat + sparse.triu(mat, k=1).T
    else:
        scale = abs(mat).max() if mat.nnz else 1.0
        asym = abs(mat - mat.T).max() if mat.nnz else 0.0
        if asym > 1e-12 * max(scale, 1.0):
            raise SurfaceLoadError(f"laplacian triplets are not symmetric (max asymmetry {asym:.3e})",
                                   invariant="symmetric_laplacian")
        mat = 0.5 * (mat + mat.T)
    rowsum = np.abs(mat @ np.ones(n)).max() if n else 0.0
    if rowsum > 1e-10 * max(abs(mat).max() if mat.nnz else 1.0, 1.0):
        raise SurfaceLoadError(f"laplacian does not annihilate constants (max row sum {rowsum:.3e})",
                               invariant="constant_kernel")
    cusps = []
    for c in data.get("cusps", []):
        try:
            cusps.append(Cusp(np.asarray(c["sites"], int), np.asarray(c["y"], float)))
        except (KeyError, TypeError, DomainError) as exc:
            raise SurfaceLoadError(f"invalid cusp descriptor: {exc}", invariant="cusp_heights") from None
    try:
        surf = DiscreteSurface(
            weights=weights, laplacian=mat, curvature=curvature, genus=genus, cusps=tuple(cusps),
            tolerance=float(data.get("tolerance", 1e-8)), complete=bool(data.get("complete", True)),
            name=str(data.get("name", "")),
        )
    except DomainError as exc:
        raise SurfaceLoadError(str(exc), invariant="surface") from None
    if surf.complete:
        report = gauss_bonnet(surf)
        if not report.passed:
            raise SurfaceLoadError(
                f"Gauss-Bonnet fails: sum w K - 2 pi chi = {report.residual:.3e} "
                f"exceeds tolerance {surf.tolerance:.1e}",
                invariant="gauss_bonnet",
            )
    return surf


def load_surface(path):
    """Read and validate a surface JSON file (see :func:`surface_from_dict`)."""
    try:
        data = json.loads(Path(path).read_text())
    except FileNotFoundError:
        raise
    except json.JSONDecodeError as exc:
        raise SurfaceLoadError(f"{path}: not valid JSON ({exc})", invariant="schema") from None
    return surface_from_dict(data)


BUNDLED = ("synthetic_genus2", "flat_torus", "cusp_surface")

# Recipes for the shipped files; ``write_bundled_surfaces`` regenerates them.
_RECIPES = {
    "synthetic_genus2": lambda: build_closed_surface(2, n=32, curvature="smooth", weight_variation=0.3, seed=2),
    "flat_torus": lambda: build_closed_surface(1, n=32),
    "cusp_surface": lambda: build_cusped_surface(genus=1, cusps=1, n_x=32, n_y=40, n_core=24),
}


def write_bundled_surfaces(directory=None):
    """Rebuild the bundled surface files deterministically; returns the paths."""
    directory = Path(directory) if directory is not None else Path(__file__).parent / "data"
    directory.mkdir(parents=True, exist_ok=True)
    paths = []
    for name in BUNDLED:
        surf = replace(_RECIPES[name](), name=name)
        path = directory / f"{name}.json"
        save_surface(surf, path)
        paths.append(path)
    return paths


def bundled_surface(name):
    """Load one of the surfaces shipped in ``cusp_spectra/data``."""
    path = Path(__file__).parent / "data" / f"{name}.json"
    if not path.exists():
        raise DomainError(f"no bundled surface named {name!r}; choose from {BUNDLED}")
    return load_surface(path)


# --------------------------------------------------------------------------
# geometry


def conformal_transform(surf, phi):
    """Surface with metric ``exp(2 phi) g``.

    Weights scale by ``exp(2 phi)``; curvature becomes
    ``exp(-2 phi) (Delta_g phi + K_g)``; the stiffness form is unchanged.
    """
    phi = as_factor(phi, surf).values
    e2 = np.exp(2.0 * phi)
    return replace(
        surf,
        weights=surf.weights * e2,
        curvature=(surf.apply_laplacian(phi) + surf.curvature) / e2,
        name=f"{surf.name}|conformal" if surf.name else "",
    )


@dataclass
class GaussBonnetReport:
    total_curvature: float
    expected: float
    residual: float
    tolerance: float
    passed: bool

    def as_dict(self):
        return dict(self.__dict__)


def gauss_bonnet(surf):
    """Compare ``sum w K`` with ``2 pi chi``.

    Raises
    ------
    ContractError
        On fragments not flagged complete.
    """
    if not surf.complete:
        raise ContractError("Gauss-Bonnet needs a complete surface; this is a fragment")
    total = surf.total_curvature
    expected = TWO_PI * surf.euler_char
    residual = total - expected
    return GaussBonnetReport(total, expected, residual, surf.tolerance, abs(residual) <= surf.tolerance)


def dirichlet_energy(surf, phi):
    """``int |grad phi|^2 dA = phi . L phi``."""
    phi = np.asarray(getattr(phi, "values", phi), dtype=float)
    return float(phi @ (surf.laplacian @ phi))


def random_decaying_factor(surf, rng, amplitude=0.3, decay_order=19.0, smoothing=0.05):
    """Seeded smooth random conformal factor that decays like ``y^-k`` in the cusps.

    White noise is smoothed by one implicit heat step ``(W + tau L)^-1 W``
    with ``tau = smoothing * area``, normalised to ``amplitude`` in the
    max norm, then multiplied by ``(y0 / y)^k`` on each cusp.  The truncation
    rows are set to zero.
    """
    if isinstance(rng, (int, np.integer)) or rng is None:
        rng = np.random.default_rng(rng)
    noise = rng.standard_normal(surf.n_sites)
    w = sparse.diags(surf.weights)
    tau = smoothing * surf.area
    phi = splinalg.spsolve((w + tau * surf.laplacian).tocsc(), surf.weights * noise)
    phi = phi - surf.integrate(phi) / surf.area
    phi *= amplitude / np.abs(phi).max()
    for c in surf.cusps:
        y0 = c.y.min()
        phi[c.sites] *= (y0 / c.y) ** decay_order
    phi[surf.boundary_mask()] = 0.0
    factor = ConformalFactor(phi, decay_order)
    return ConformalFactor(phi, decay_order, bound=factor.decay_constant(surf))
