"""Harmonic multipliers and the two inversion formulae.

Both square-root operators act on degree ``l`` by ``2l+1``:

* on S2 x S2, ``-Delta`` has eigenvalue ``2l(l+1)`` on an equal-degree pair,
  so ``(-2 Delta + 1)^(1/2)`` gives ``sqrt(4l(l+1) + 1) = 2l+1``;
* on SO(3) with the bi-invariant metric in which ``D^l`` has Laplace
  eigenvalue ``-l(l+1)``, ``(-4 Delta + 1)^(1/2)`` gives the same value.

The dual transform :func:`~texradon.radon.dual_radon` averages with a
probability measure; its composition with the Radon transform acts on
degree ``l`` by a scalar ``kappa_l`` that is measured, frozen to a text
table and checked on use.  Writing the formulae with the dual transform
scaled by ``c = 1 / (4 pi kappa_0)`` makes both

    f = 4 pi  dual( (-2 Delta + 1)^(1/2) R f )
    f = 4 pi  (-4 Delta + 1)^(1/2) dual( R f )

hold exactly, provided ``kappa_l (2l+1)`` is independent of ``l``.
"""

import functools
import math
from dataclasses import dataclass
from importlib import resources

import numpy as np

from .config import check_bandlimit
from .errors import CalibrationError, FormatError
from .harmonics import (
    FOUR_PI,
    HarmonicCoeffsSO3,
    PairHarmonicCoeffs,
    parse_table,
    s2s2_function,
    so3_analyze,
)
from .radon import dual_radon, radon_harmonic

CALIBRATION_TOL = 1e-6
SCALAR_TOL = 1e-9


@dataclass(frozen=True)
class MultiplierSpec:
    """Per-degree scalars ``mu_l``, all strictly positive."""

    values: tuple

    def __post_init__(self):
        vals = tuple(float(v) for v in self.values)
        if not vals or min(vals) <= 0:
            raise ValueError("multiplier symbols must be strictly positive")
        object.__setattr__(self, "values", vals)

    @property
    def L(self):
        return len(self.values) - 1

    def __call__(self, table):
        if table.L > self.L:
            raise ValueError(f"multiplier defined up to l={self.L}, table has L={table.L}")
        return table.map_blocks(lambda l, b: self.values[l] * b)

    def compose(self, other):
        L = min(self.L, other.L)
        return MultiplierSpec(tuple(a * b for a, b in zip(self.values[: L + 1], other.values[: L + 1])))


def s2s2_sqrt_symbol(L):
    """``(-2 Delta_{S2xS2} + 1)^(1/2)`` from the eigenvalue ``-2l(l+1)``."""
    return MultiplierSpec(tuple(math.sqrt(-2.0 * (-2.0 * l * (l + 1)) + 1.0) for l in range(L + 1)))


def so3_sqrt_symbol(L):
    """``(-4 Delta_{SO3} + 1)^(1/2)`` from the eigenvalue ``-l(l+1)``."""
    return MultiplierSpec(tuple(math.sqrt(-4.0 * (-1.0 * l * (l + 1)) + 1.0) for l in range(L + 1)))


def sqrt_multiplier_s2s2(P):
    return s2s2_sqrt_symbol(P.L)(P)


def invert_slice(P):
    """SO(3) coefficients ``4 pi C_l`` from the pair coefficients of ``Rf``."""
    return HarmonicCoeffsSO3([FOUR_PI * b for b in P.blocks])


def invert_formula_a(P):
    """``4 pi dual((-2 Delta + 1)^(1/2) Rf)`` evaluated blockwise.

    The averaging dual sends a pair block ``C_l`` to the SO(3) block
    ``4 pi kappa_l C_l``; with the scale ``c`` the formula reduces to
    :func:`invert_slice` whenever the symbols are consistent.
    """
    sym = dual_symbol(P.L)
    c = dual_scale(sym)
    _check_consistency(sym)
    weighted = sqrt_multiplier_s2s2(P)
    blocks = [
        FOUR_PI * c * sym[l] * FOUR_PI * b for l, b in enumerate(weighted.blocks)
    ]
    return HarmonicCoeffsSO3(blocks)


# ---------------------------------------------------------------------------
# dual symbol calibration


def _probe(l):
    """Single-degree test table used to read the dual symbol at degree ``l``."""
    blocks = [np.zeros((2 * k + 1, 2 * k + 1), dtype=complex) for k in range(l + 1)]
    blocks[l][l, l] = 1.0
    if l > 0:
        blocks[l][2 * l, 0] = 0.5
    return HarmonicCoeffsSO3(blocks)


def measure_dual_symbol(l):
    """Send a degree-``l`` table through ``R`` and the dual; return the scalar response."""
    probe = _probe(l)
    F = s2s2_function(radon_harmonic(probe))
    resp = so3_analyze(lambda g: dual_radon(F, g, 2 * l), l)
    kappa = resp[l, 0, 0] / probe[l, 0, 0]
    off = (resp - probe * kappa).max_abs()
    if off > SCALAR_TOL or abs(kappa.imag) > SCALAR_TOL:
        raise CalibrationError(
            f"dual composition is not scalar on degree {l}: off-diagonal response {off:.3e}"
        )
    return float(kappa.real)


def calibrate_dual_symbol(L):
    """Measured ``kappa_l`` for ``l = 0..L``."""
    L = check_bandlimit(L)
    return tuple(measure_dual_symbol(l) for l in range(L + 1))


def format_dual_symbol(kappas):
    L = len(kappas) - 1
    lines = [f"dualsym v1 L={L}"]
    lines += [f"{l} 0 0 {k:.17g} 0" for l, k in enumerate(kappas)]
    return "\n".join(lines) + "\n"


def parse_dual_symbol(text, path=None):
    table = parse_table(text, "dualsym", PairHarmonicCoeffs, path=path)
    kappas = []
    for l in range(table.L + 1):
        b = table.blocks[l]
        if np.count_nonzero(b) != 1 or b[l, l] == 0 or b[l, l].imag != 0:
            raise FormatError(f"degree {l} must carry a single real entry at (m, n) = (0, 0)", path)
        kappas.append(float(b[l, l].real))
    return tuple(kappas)


def write_dual_symbol(path, kappas):
    with open(path, "w") as fh:
        fh.write(format_dual_symbol(kappas))


def read_dual_symbol(path):
    with open(path) as fh:
        return parse_dual_symbol(fh.read(), path=str(path))


@functools.lru_cache(maxsize=1)
def frozen_dual_symbol():
    """Table shipped with the package (``data/dualsym.txt``)."""
    text = resources.files("texradon").joinpath("data/dualsym.txt").read_text()
    return parse_dual_symbol(text, path="texradon/data/dualsym.txt")


@functools.lru_cache(maxsize=8)
def _calibrated(L):
    return calibrate_dual_symbol(L)


def dual_symbol(L):
    """``kappa_l`` up to ``L``: frozen values, measured beyond the frozen range."""
    frozen = frozen_dual_symbol()
    if L < len(frozen):
        return frozen[: L + 1]
    return _calibrated(L)


def dual_scale(kappas):
    """Constant ``c`` that turns the averaging dual into the formulae's dual."""
    return 1.0 / (FOUR_PI * kappas[0] * so3_sqrt_symbol(0).values[0])


def _check_consistency(kappas):
    mu = so3_sqrt_symbol(len(kappas) - 1).values
    c = dual_scale(kappas)
    for l, (k, m) in enumerate(zip(kappas, mu)):
        resid = abs(FOUR_PI * c * m * k - 1.0)
        if resid > CALIBRATION_TOL:
            raise CalibrationError(
                f"dual symbol at degree {l} is {k!r}; the inversion formula needs "
                f"{1.0 / (FOUR_PI * c * m)!r} (residual {resid:.3e})"
            )


def required_multiplier(kappas):
    """Symbol that makes ``4 pi mu_l c kappa_l = 1``, for cross-checking ``2l+1``."""
    c = dual_scale(kappas)
    return tuple(1.0 / (FOUR_PI * c * k) for k in kappas)


def invert_backprojection(F, L):
    """``4 pi (-4 Delta + 1)^(1/2) dual(F)`` as SO(3) coefficients up to ``L``.

    ``F(h, r)`` should lie in the range of the Radon transform at band
    limit ``L``; energy above ``L`` is discarded.
    """
    L = check_bandlimit(L)
    kappas = dual_symbol(L)
    _check_consistency(kappas)
    c = dual_scale(kappas)
    back = so3_analyze(lambda g: dual_radon(F, g, 2 * L), L)
    return so3_sqrt_symbol(L)(back) * (FOUR_PI * c)
