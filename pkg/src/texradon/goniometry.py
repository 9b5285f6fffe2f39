"""Pole figures, the Friedel null space, synthetic ODFs and even-part reconstruction.

A goniometer cannot tell ``h`` from ``-h``, so it samples

    P f(h, r) = (R f(h, r) + R f(-h, r)) / 2,

which annihilates every odd degree of ``f``.  Reconstruction therefore
targets only the even-degree coefficients.
"""

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.spatial import SphericalVoronoi

from .config import check_bandlimit
from .errors import FormatError, ModelError, RankDeficiencyError
from .harmonics import (
    FOUR_PI,
    HarmonicCoeffsSO3,
    PairHarmonicCoeffs,
    s2s2_function,
    s2s2_synthesize,
    so3_function,
    sph_harm_table,
    wigner_D_matrix,
)
from .inversion import invert_backprojection, invert_slice
from .radon import DEFAULT_FIBER_NODES, radon_geometric, radon_harmonic
from .rotations import (
    TWO_PI,
    Rotation,
    so3_quadrature,
    spherical_to_vector,
    unit_vector,
    vector_to_spherical,
    _gauss_cos,
)

RANK_TOL = 1e-10


@dataclass(frozen=True)
class PoleFigureGrid:
    """Sampled ``P f(h, r)`` for one crystal direction ``h``.

    ``weights`` are quadrature weights of the specimen grid (summing to
    4 pi); ``shape`` is ``(ntheta, nphi)`` for lattice grids and ``None``
    for scattered points.
    """

    h: np.ndarray
    grid: np.ndarray
    values: np.ndarray
    bandlimit: int = None
    weights: np.ndarray = None
    shape: tuple = None
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        grid = np.atleast_2d(np.asarray(self.grid, dtype=float))
        values = np.asarray(self.values, dtype=float).ravel()
        if grid.shape[0] != values.size:
            raise ValueError("grid and values have different lengths")
        if not np.all(np.isfinite(values)):
            raise ValueError("pole figure values must be finite")
        object.__setattr__(self, "h", unit_vector(self.h))
        object.__setattr__(self, "grid", grid)
        object.__setattr__(self, "values", values)
        if self.weights is None:
            object.__setattr__(self, "weights", grid_weights(grid))

    @property
    def angles(self):
        # files keep their own angles so a rewrite is byte-identical
        if "angles" in self.meta:
            return self.meta["angles"]
        return vector_to_spherical(self.grid)

    def max_location(self):
        return self.grid[int(np.argmax(self.values))]

    def as_matrix(self):
        """Values as a (ntheta, nphi) array; lattice grids only."""
        if self.shape is None:
            raise ValueError("pole figure is not on a lattice grid")
        return self.values.reshape(self.shape)


def default_grid(L, ntheta=None, nphi=None):
    """Gauss-Legendre polar nodes times uniform azimuths.

    Returns ``(points, weights, shape)``.  The default sizes integrate
    products of two degree-``L`` harmonics exactly.
    """
    if ntheta is None:
        ntheta = L + 1
    if nphi is None:
        nphi = 2 * L + 2
    if ntheta < 1 or nphi < 1:
        raise ValueError("grid sizes must be positive")
    theta, wt = _gauss_cos(ntheta)
    phi = TWO_PI * np.arange(nphi) / nphi
    T, P = np.meshgrid(theta, phi, indexing="ij")
    pts = spherical_to_vector(T.ravel(), P.ravel())
    w = np.broadcast_to((wt * TWO_PI / nphi)[:, None], T.shape).ravel().copy()
    return pts, w, (ntheta, nphi)


def grid_weights(points):
    """Spherical Voronoi cell areas, or equal weights when that is impossible."""
    pts = unit_vector(points)
    n = pts.shape[0]
    uniq = np.unique(np.round(pts, 12), axis=0)
    if n >= 4 and uniq.shape[0] == n:
        try:
            sv = SphericalVoronoi(pts, radius=1.0, threshold=1e-10)
            return np.asarray(sv.calculate_areas(), dtype=float)
        except (ValueError, RuntimeError):
            pass
    return np.full(n, FOUR_PI / n)


def _rf(c, h, grid):
    pair = radon_harmonic(c)
    vals = s2s2_synthesize(pair, np.broadcast_to(h, grid.shape), grid)
    return vals


def pole_figure(c, h, grid=None, raw=False, weights=None, shape=None):
    """``P f(h, r)`` on ``grid`` via the harmonic path.

    ``raw=True`` returns the unsymmetrized ``R f(h, r)`` instead.  Without a
    grid, :func:`default_grid` at the table's band limit is used.
    """
    h = unit_vector(h)
    if grid is None:
        grid, weights, shape = default_grid(c.L)
    grid = unit_vector(grid)
    vals = _rf(c, h, grid)
    if not raw:
        vals = 0.5 * (vals + _rf(c, -h, grid))
    if c.realness_defect() <= 1e-12 * max(1.0, c.max_abs()):
        vals = vals.real
    elif np.max(np.abs(vals.imag)) > 1e-12 * max(1.0, np.max(np.abs(vals))):
        raise ValueError("coefficient table does not describe a real function")
    else:
        vals = vals.real
    return PoleFigureGrid(
        h,
        grid,
        vals,
        bandlimit=c.L,
        weights=weights,
        shape=shape,
        meta={"raw": bool(raw), "path": "harmonic"},
    )


def pole_figure_geometric(f, h, grid, nodes=DEFAULT_FIBER_NODES):
    """Fiber-quadrature evaluation of ``P f(h, r)`` for a callable ``f``."""
    h = unit_vector(h)
    grid = unit_vector(grid)
    hh = np.broadcast_to(h, grid.shape)
    return 0.5 * (radon_geometric(f, hh, grid, nodes) + radon_geometric(f, -hh, grid, nodes))


def even_projector(c):
    """Zero every odd-degree block."""
    return c.map_blocks(lambda l, b: b if l % 2 == 0 else np.zeros_like(b))


# ---------------------------------------------------------------------------
# synthetic ODFs

TAIL_TOL = 0.05


@dataclass(frozen=True)
class OdfModel:
    """``uniform`` or ``unimodal`` density; ``concentration`` sharpens the peak."""

    kind: str
    center: Rotation = None
    concentration: float = 0.0
    bandlimit: int = 0

    def __post_init__(self):
        if self.kind not in ("uniform", "unimodal"):
            raise ModelError(f"unknown ODF model {self.kind!r}")
        if not self.concentration >= 0 or not math.isfinite(self.concentration):
            raise ModelError("concentration must be finite and nonnegative")
        check_bandlimit(self.bandlimit)
        if self.center is None:
            object.__setattr__(self, "center", Rotation.identity())


def _generator(kappa, A):
    """Half-band weights ``b_a = exp(-a(a+1)/kappa)`` for ``a = 0..A``."""
    a = np.arange(A + 2)
    if kappa == 0:
        b = (a == 0).astype(float)
    else:
        b = np.exp(-a * (a + 1) / kappa)
    return b[: A + 1], b[A + 1]


def minimum_bandlimit(kappa):
    """Smallest even ``L`` whose truncated generator tail is below ``TAIL_TOL``."""
    if kappa == 0:
        return 0
    A = 0
    while math.exp(-(A + 1) * (A + 2) / kappa) > TAIL_TOL:
        A += 1
    return 2 * A


def unimodal_profile(kappa, L):
    """Degree weights ``a_l`` of the identity-centered kernel.

    The kernel is the square of a half-band class function, normalized to
    unit mass, so it is nonnegative at every band limit.  Its coefficient
    table is ``fhat_l = a_l * I``.
    """
    A = L // 2
    b, tail = _generator(kappa, A)
    if tail > TAIL_TOL:
        raise ModelError(
            f"concentration {kappa} is too sharp for L={L}; use L >= {minimum_bandlimit(kappa)}"
        )
    H = (2 * np.arange(A + 1) + 1) * b
    # chi_a chi_b = sum_{c=|a-b|}^{a+b} chi_c
    coef = np.zeros(2 * A + 1)
    for i in range(A + 1):
        for j in range(A + 1):
            coef[abs(i - j) : i + j + 1] += H[i] * H[j]
    coef /= coef[0]
    out = np.zeros(L + 1)
    degrees = np.arange(2 * A + 1)
    out[: 2 * A + 1] = coef / (2 * degrees + 1)
    return out


def odf_checks(c, n_test=10_000, seed=0):
    """``(min f, int f dg)``: minimum over seeded Haar-random points plus the
    exact product rule at ``2L``, and the integral by that rule."""
    rule = so3_quadrature(2 * c.L)
    f = so3_function(c, real=True)
    on_rule = f(rule.nodes)
    fmin = min(float(on_rule.min()), float(f(Rotation.random(n_test, seed)).min()))
    return fmin, float(np.sum(rule.weights * on_rule))


def make_odf(model):
    """Coefficient table of an :class:`OdfModel`."""
    L = model.bandlimit
    if model.kind == "uniform":
        return HarmonicCoeffsSO3.single(L, 0, 0, 0, 1.0)
    prof = unimodal_profile(model.concentration, L)
    center = model.center
    blocks = [prof[l] * wigner_D_matrix(l, center) for l in range(L + 1)]
    return HarmonicCoeffsSO3(blocks)


# ---------------------------------------------------------------------------
# even-part reconstruction


@dataclass(frozen=True)
class Reconstruction:
    coeffs: HarmonicCoeffsSO3
    pair: PairHarmonicCoeffs
    residuals: tuple
    condition: float
    method: str
    unknowns: int


def _even_index(L):
    ls, ms, ns = [], [], []
    for l in range(0, L + 1, 2):
        for m in range(-l, l + 1):
            for n in range(-l, l + 1):
                ls.append(l)
                ms.append(m)
                ns.append(n)
    return np.array(ls), np.array(ms), np.array(ns)


def _distinct_axes(hs):
    """Crystal directions modulo sign."""
    out = []
    for h in hs:
        if not any(abs(abs(float(np.dot(h, o))) - 1.0) < 1e-12 for o in out):
            out.append(h)
    return np.array(out)


def _degree_deficits(pole_figures, L):
    """Lower bounds on the unobserved dimension of each even degree.

    At degree ``l`` a pole figure for ``h`` observes ``C_l`` only through
    ``Y_l(h)^T C_l`` sampled on its grid, so the observable dimension is at
    most ``min(rank_h (2l+1), sum of grid ranks)``.
    """
    hs = _distinct_axes([pf.h for pf in pole_figures])
    Yh = sph_harm_table(L, hs)
    Yr = [sph_harm_table(L, pf.grid) for pf in pole_figures]
    deficits = {}
    for l in range(0, L + 1, 2):
        sl = slice(l * l, (l + 1) ** 2)
        rank_h = np.linalg.matrix_rank(Yh[:, sl], tol=1e-9)
        rank_r = sum(np.linalg.matrix_rank(y[:, sl], tol=1e-9) for y in Yr)
        missing = (2 * l + 1) ** 2 - min(rank_h * (2 * l + 1), rank_r)
        if missing > 0:
            deficits[l] = int(missing)
    return deficits, len(hs)


def _deficit_message(deficits, n_axes):
    parts = []
    for l, d in sorted(deficits.items()):
        parts.append(
            f"degree {l}: {d} undetermined coefficients "
            f"(needs >= {2 * l + 1} distinct crystal directions, have {n_axes})"
        )
    return "pole figures do not determine the even part; " + "; ".join(parts)


def reconstruct_even(pole_figures, L, method="slice"):
    """Least-squares even-degree coefficients from sampled pole figures.

    Fits the pair coefficients of the symmetrized data by weighted normal
    equations, then inverts with ``method`` ``"slice"`` (:func:`invert_slice`)
    or ``"backprojection"`` (:func:`invert_backprojection` applied to the
    fitted pole-density function).  Odd degrees are left at zero.
    """
    L = check_bandlimit(L)
    if method not in ("slice", "backprojection"):
        raise ValueError(f"unknown method {method!r}")
    pole_figures = list(pole_figures)
    if not pole_figures:
        raise ValueError("at least one pole figure is required")

    deficits, n_axes = _degree_deficits(pole_figures, L)
    if deficits:
        raise RankDeficiencyError(_deficit_message(deficits, n_axes), deficits)

    ls, ms, ns = _even_index(L)
    lm_cols = ls * ls + ls + ms
    ln_cols = ls * ls + ls + ns
    U = ls.size
    normal = np.zeros((U, U), dtype=complex)
    rhs = np.zeros(U, dtype=complex)
    designs = []
    for pf in pole_figures:
        a = sph_harm_table(L, pf.h)[lm_cols]
        yr = np.conj(sph_harm_table(L, pf.grid)[:, ln_cols])
        A = FOUR_PI**2 * a[None, :] * yr
        Aw = np.conj(A) * pf.weights[:, None]
        normal += Aw.T @ A
        rhs += Aw.T @ pf.values
        designs.append(A)

    evals, evecs = np.linalg.eigh(normal)
    top = evals[-1]
    null = evals <= RANK_TOL * top
    if np.any(null):
        energy = np.abs(evecs[:, null]) ** 2
        found = {}
        for l in np.unique(ls):
            dim = int(round(float(energy[ls == l].sum())))
            if dim > 0:
                found[int(l)] = dim
        raise RankDeficiencyError(
            _deficit_message(found or {int(ls[np.argmax(energy.sum(axis=1))]): int(null.sum())}, n_axes),
            found,
            condition=math.inf,
        )
    condition = math.sqrt(top / evals[0])
    x = evecs @ ((evecs.conj().T @ rhs) / evals)

    residuals = []
    for pf, A in zip(pole_figures, designs):
        res = (A @ x).real - pf.values
        residuals.append(
            {
                "h": tuple(float(v) for v in pf.h),
                "max": float(np.max(np.abs(res))),
                "rms": float(math.sqrt(np.sum(pf.weights * res**2) / np.sum(pf.weights))),
            }
        )

    blocks = [np.zeros((2 * l + 1, 2 * l + 1), dtype=complex) for l in range(L + 1)]
    for val, l, m, n in zip(x, ls, ms, ns):
        blocks[l][m + l, n + l] = val
    pair = PairHarmonicCoeffs(blocks).real_part()

    if method == "slice":
        coeffs = invert_slice(pair)
    else:
        coeffs = even_projector(invert_backprojection(s2s2_function(pair, real=True), L))
    return Reconstruction(coeffs, pair, tuple(residuals), condition, method, U)


# ---------------------------------------------------------------------------
# text format: "polefig v1 h=<x,y,z> n=<points>" then "theta phi value"


def format_polefig(pf):
    hx, hy, hz = pf.h
    lines = [f"polefig v1 h={hx:.17g},{hy:.17g},{hz:.17g} n={pf.values.size}"]
    theta, phi = pf.angles
    for t, p, v in zip(theta, phi, pf.values):
        lines.append(f"{t:.17g} {p:.17g} {v:.17g}")
    return "\n".join(lines) + "\n"


def parse_polefig(text, path=None):
    lines = text.splitlines()
    if not lines:
        raise FormatError("empty file", path, 1)
    head = lines[0].split()
    if len(head) != 4 or head[:2] != ["polefig", "v1"]:
        raise FormatError("expected header 'polefig v1 h=<x,y,z> n=<points>'", path, 1)
    try:
        if not head[2].startswith("h=") or not head[3].startswith("n="):
            raise ValueError
        h = np.array([float(x) for x in head[2][2:].split(",")])
        n = int(head[3][2:])
        if h.size != 3 or n < 1:
            raise ValueError
    except ValueError:
        raise FormatError("malformed h= or n= field", path, 1)
    rows = []
    for lineno, line in enumerate(lines[1:], start=2):
        if not line.strip() or line.lstrip().startswith("#"):
            continue
        parts = line.split()
        if len(parts) != 3:
            raise FormatError("expected 'theta phi value'", path, lineno)
        try:
            rows.append([float(p) for p in parts])
        except ValueError:
            raise FormatError("unparsable number", path, lineno)
    if len(rows) != n:
        raise FormatError(f"header announces {n} points, found {len(rows)}", path, len(lines))
    arr = np.array(rows)
    grid = spherical_to_vector(arr[:, 0], arr[:, 1])
    try:
        return PoleFigureGrid(h, grid, arr[:, 2], meta={"angles": (arr[:, 0], arr[:, 1])})
    except ValueError as exc:
        raise FormatError(str(exc), path)


def write_polefig(path, pf):
    with open(path, "w") as fh:
        fh.write(format_polefig(pf))


def read_polefig(path):
    with open(path) as fh:
        return parse_polefig(fh.read(), path=str(path))


def format_matrix(pf):
    """gnuplot nonuniform-matrix layout: first row ``n phi...``, then ``theta values...``."""
    M = pf.as_matrix()
    theta, phi = pf.angles
    theta = theta.reshape(pf.shape)[:, 0]
    phi = phi.reshape(pf.shape)[0]
    lines = [" ".join([str(M.shape[1])] + [f"{p:.17g}" for p in phi])]
    for t, row in zip(theta, M):
        lines.append(" ".join([f"{t:.17g}"] + [f"{v:.17g}" for v in row]))
    return "\n".join(lines) + "\n"
