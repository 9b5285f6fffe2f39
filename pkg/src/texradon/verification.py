"""Seeded numerical self-checks run by ``texradon verify``."""

from dataclasses import dataclass

import numpy as np

from .goniometry import (
    default_grid,
    even_projector,
    pole_figure,
    pole_figure_geometric,
    reconstruct_even,
)
from .harmonics import (
    HarmonicCoeffsSO3,
    s2s2_analyze,
    s2s2_function,
    s2s2_synthesize,
    so3_analyze,
    so3_function,
    wigner_D_matrix,
    wigner_d_table,
)
from .inversion import invert_backprojection, invert_slice
from .radon import radon_geometric, radon_harmonic, s3_circle_integral
from .rotations import Rotation, so3_quadrature, unit_vector


@dataclass(frozen=True)
class Check:
    name: str
    metric: float
    tolerance: float

    @property
    def passed(self):
        return bool(np.isfinite(self.metric) and self.metric < self.tolerance)

    def line(self):
        status = "PASS" if self.passed else "FAIL"
        return f"{self.name} {status} {self.metric:.3e} {self.tolerance:.1e}"


def random_directions(rng, n):
    return unit_vector(rng.standard_normal((n, 3)))


def random_odf_table(L, rng):
    """Real band-limited table with a unit mean (not necessarily nonnegative)."""
    c = HarmonicCoeffsSO3.random(L, rng)
    c = c.map_blocks(lambda l, b: b / (2 * l + 1) ** 1.5)
    return c.map_blocks(lambda l, b: np.ones((1, 1)) if l == 0 else b)


def suite_slice(L=8, seed=7, n_odfs=20, n_pairs=100, nodes=256):
    rng = np.random.default_rng(seed)
    worst = 0.0
    for _ in range(n_odfs):
        c = random_odf_table(L, rng)
        h, r = random_directions(rng, n_pairs), random_directions(rng, n_pairs)
        geo = radon_geometric(so3_function(c), h, r, nodes)
        har = s2s2_synthesize(radon_harmonic(c), h, r).real
        worst = max(worst, float(np.max(np.abs(geo - har)) / np.max(np.abs(har))))
    h, r = random_directions(rng, 1000), random_directions(rng, 1000)
    one = radon_geometric(lambda g: np.ones(g.shape), h, r, nodes)
    return [
        Check("slice.geometric_vs_harmonic", worst, 1e-8),
        Check("slice.normalization", float(np.max(np.abs(one - 1.0))), 1e-13),
    ]


def suite_roundtrip(L=8, seed=7, n_odfs=2):
    rng = np.random.default_rng(seed)
    checks = []
    c = HarmonicCoeffsSO3.random(L, rng)
    checks.append(Check("roundtrip.analyze_synthesize", so3_analyze(so3_function(c), L).max_abs_diff(c), 1e-11))
    c16 = HarmonicCoeffsSO3.random(max(L, 16), rng)
    checks.append(Check("roundtrip.invert_slice", invert_slice(radon_harmonic(c16)).max_abs_diff(c16), 1e-13))
    worst = 0.0
    for _ in range(n_odfs):
        c = random_odf_table(L, rng)
        F = s2s2_function(radon_harmonic(c))
        a = invert_slice(s2s2_analyze(F, L))
        b = invert_backprojection(F, L)
        worst = max(worst, a.max_abs_diff(b))
    checks.append(Check("roundtrip.backprojection_vs_slice", worst, 1e-8))
    c = random_odf_table(L, rng)
    pts, w, shape = default_grid(L)
    hs = random_directions(rng, 2 * L + 1)
    pfs = [pole_figure(c, h, pts, weights=w, shape=shape) for h in hs]
    rec = reconstruct_even(pfs, L)
    checks.append(Check("roundtrip.reconstruct_even", rec.coeffs.max_abs_diff(even_projector(c)), 1e-8))
    return checks


def suite_friedel(L=8, seed=7):
    rng = np.random.default_rng(seed)
    pts, _, _ = default_grid(L)
    c = random_odf_table(L, rng)
    odd = c - even_projector(c)
    sup = max(float(np.max(np.abs(pole_figure(odd, h, pts).values))) for h in random_directions(rng, 5))
    # {g : h = g r} and {g : -h = g(-r)} are the same fiber
    f = so3_function(c)
    h, r = random_directions(rng, 50), random_directions(rng, 50)
    same = radon_geometric(f, h, r) - radon_geometric(f, -h, -r)
    h = h[0]
    geometric = pole_figure_geometric(f, h, pts[:50])
    harmonic = pole_figure(c, h, pts[:50]).values
    return [
        Check("friedel.odd_annihilation", sup, 1e-10),
        Check("friedel.fiber_reversal", float(np.max(np.abs(same))), 1e-12),
        Check("friedel.harmonic_vs_geometric", float(np.max(np.abs(harmonic - geometric))), 1e-9),
    ]


def suite_s3(L=8, seed=7, n_eval=20, nodes=512):
    rng = np.random.default_rng(seed)
    c = random_odf_table(L, rng)
    f = so3_function(c)
    h, r = random_directions(rng, n_eval), random_directions(rng, n_eval)
    geo = radon_geometric(f, h, r, nodes)
    circ = s3_circle_integral(f, h, r, nodes)
    return [Check("s3.fiber_vs_great_circle", float(np.max(np.abs(geo - circ))), 1e-9)]


def suite_parseval(L=8, seed=7, n_funcs=20):
    rng = np.random.default_rng(seed)
    checks = []
    worst = 0.0
    rule = so3_quadrature(2 * L)
    for _ in range(n_funcs):
        c = HarmonicCoeffsSO3.random(L, rng)
        vals = so3_function(c)(rule.nodes)
        direct = float(np.sum(rule.weights * np.abs(vals) ** 2))
        worst = max(worst, abs(direct - c.energy()) / c.energy())
    checks.append(Check("parseval.energy", worst, 1e-10))
    g = Rotation.random(20, rng)
    uni = 0.0
    for l in range(17):
        D = wigner_D_matrix(l, g)
        eye = np.eye(2 * l + 1)
        uni = max(uni, float(np.max(np.abs(D @ np.conj(np.swapaxes(D, -1, -2)) - eye))))
    checks.append(Check("parseval.unitarity", uni, 1e-11))
    bound = 0.0
    for chunk in np.array_split(np.linspace(0.0, np.pi, 1000), 20):
        bound = max(bound, max(float(np.max(np.abs(b))) for b in wigner_d_table(64, chunk)))
    checks.append(Check("parseval.wigner_d_bound", max(bound - 1.0, 0.0), 1e-9))
    return checks


SUITES = {
    "slice": suite_slice,
    "roundtrip": suite_roundtrip,
    "friedel": suite_friedel,
    "s3": suite_s3,
    "parseval": suite_parseval,
}


def run_suites(names, L=8, seed=7):
    checks = []
    for name in names:
        checks.extend(SUITES[name](L=L, seed=seed))
    return checks
