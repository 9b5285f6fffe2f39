"""Wigner functions, spherical harmonics and Fourier analysis on SO(3) and S2 x S2.

Conventions
-----------
``D^l_{mn}(alpha, beta, gamma) = exp(-i m alpha) d^l_{mn}(beta) exp(-i n gamma)``
with ``g = R_z(alpha) R_y(beta) R_z(gamma)``; ``D^l`` is a unitary
representation, ``D^l(g1 g2) = D^l(g1) D^l(g2)``.  Spherical harmonics carry
the Condon-Shortley phase and are orthonormal on the unit sphere, with
``Y_l^m(theta, phi) = sqrt((2l+1)/4pi) exp(i m phi) d^l_{m0}(theta)``.

SO(3) coefficients use the analysis integral against ``D^l_{mn}(g)`` without
conjugation; the matching synthesis conjugates::

    fhat_l^{mn} = int f(g) D^l_{mn}(g) dg
    f(g)        = sum_l (2l+1) sum_{mn} fhat_l^{mn} conj(D^l_{mn}(g))
                = sum_l (2l+1) sum_{mn} fhat_l^{mn} D^l_{nm}(g^-1)

A real ``f`` satisfies ``fhat_l^{-m,-n} = (-1)^(m-n) conj(fhat_l^{mn})``.

Pair coefficients on S2 x S2 keep only equal degrees in both factors and use
the normalized measure ``dh dr / (4pi)^2``::

    C_l^{mn} = (4pi)^-2 int int F(h, r) conj(Y_l^m(h)) Y_l^n(r) dh dr
    F(h, r)  = (4pi)^2 sum_l sum_{mn} C_l^{mn} Y_l^m(h) conj(Y_l^n(r))

With this pairing the Radon transform maps ``fhat_l`` to ``fhat_l / 4pi``.
"""

import functools
import math
from concurrent.futures import ThreadPoolExecutor

import numpy as np

from . import config
from .config import check_bandlimit
from .errors import FormatError, IndexRangeError
from .rotations import Rotation, s2_quadrature, so3_quadrature, vector_to_spherical

FOUR_PI = 4.0 * np.pi


def _check_index(l, m, n=0):
    if int(l) != l or l < 0 or abs(m) > l or abs(n) > l:
        raise IndexRangeError(f"invalid harmonic index l={l}, m={m}, n={n}")
    check_bandlimit(l)


# ---------------------------------------------------------------------------
# Wigner d by three-term recurrence in l


def _d_seed(l0, m, n, c, s):
    """Closed form of ``d^{l0}_{mn}`` at ``l0 = max(|m|, |n|)``.

    ``m``, ``n``, ``l0`` are integer arrays of shape (K,); ``c``, ``s`` are
    ``cos(beta/2)``, ``sin(beta/2)`` of shape (P, 1).
    """
    m_top = m == l0
    m_bot = (-m == l0) & ~m_top
    n_top = (n == l0) & ~m_top & ~m_bot
    # remaining case: -n == l0
    k = np.where(m_top | m_bot, l0 + n, l0 + m)
    binom = np.sqrt(np.array([float(math.comb(2 * a, b)) for a, b in zip(l0, k)]))
    pc = np.select([m_top, m_bot, n_top], [l0 + n, l0 - n, l0 + m], l0 - m)
    ps = np.select([m_top, m_bot, n_top], [l0 - n, l0 + n, l0 - m], l0 + m)
    sign = np.select(
        [m_top, m_bot, n_top],
        [(-1.0) ** ((l0 - n) % 2), 1.0, 1.0],
        (-1.0) ** ((m + l0) % 2),
    )
    return sign * binom * c**pc * s**ps


def _d_recurrence(L, m, n, beta):
    """Yield ``(l, d^l_{mn}(beta))`` for ``l = 0..L`` on flat index arrays.

    Values have shape (P, K); entries with ``l < max(|m|, |n|)`` are zero.
    """
    m = np.asarray(m, dtype=np.int64)
    n = np.asarray(n, dtype=np.int64)
    beta = np.asarray(beta, dtype=float).reshape(-1, 1)
    c, s = np.cos(0.5 * beta), np.sin(0.5 * beta)
    cb = np.cos(beta)
    l0 = np.maximum(np.abs(m), np.abs(n))
    seed = _d_seed(l0, m, n, c, s)
    mf, nf = m.astype(float), n.astype(float)
    mn = mf * nf
    prev2 = np.zeros((beta.shape[0], m.size))
    prev = np.zeros_like(prev2)
    for l in range(L + 1):
        # rows with l <= l0 have zero history, so the update leaves them at zero
        cur = np.zeros_like(prev)
        if l > 0:
            j = l - 1.0
            den = np.sqrt(np.maximum((l * l - mf**2) * (l * l - nf**2), 1.0))
            a = l * (2 * j + 1) / den
            ashift = a * mn / (j * l) if j > 0 else np.zeros_like(mn)
            b = l * np.sqrt(np.maximum((j * j - mf**2) * (j * j - nf**2), 0.0)) / (max(j, 1.0) * den)
            np.multiply(cb, a, out=cur)
            cur -= ashift
            cur *= prev
            cur -= b * prev2
        start = l0 == l
        cur[:, start] = seed[:, start]
        yield l, cur
        prev2, prev = prev, cur


def wigner_d(l, m, n, beta):
    """Little Wigner ``d^l_{mn}(beta)``; ``beta`` may be an array."""
    _check_index(l, m, n)
    beta = np.asarray(beta, dtype=float)
    out = None
    for _, out in _d_recurrence(l, np.array([m]), np.array([n]), beta.ravel()):
        pass
    out = out[:, 0].reshape(beta.shape)
    return out[()] if out.ndim == 0 else out


def _full_index(L):
    idx = np.arange(-L, L + 1)
    M, N = np.meshgrid(idx, idx, indexing="ij")
    return M.ravel(), N.ravel()


def wigner_d_table(L, beta):
    """Blocks ``d^l(beta)`` for ``l = 0..L``, each of shape (P, 2l+1, 2l+1)."""
    check_bandlimit(L)
    M, N = _full_index(L)
    beta = np.atleast_1d(np.asarray(beta, dtype=float))
    blocks = []
    for l, vals in _d_recurrence(L, M, N, beta):
        full = vals.reshape(beta.size, 2 * L + 1, 2 * L + 1)
        blocks.append(full[:, L - l : L + l + 1, L - l : L + l + 1].copy())
    return blocks


def wigner_d_matrix(l, beta):
    """``d^l(beta)`` as a (2l+1, 2l+1) matrix (leading axes follow ``beta``)."""
    _check_index(l, 0)
    beta = np.asarray(beta, dtype=float)
    blk = wigner_d_table(l, beta.ravel())[l]
    return blk.reshape(beta.shape + blk.shape[1:])


@functools.lru_cache(maxsize=None)
def _delta_blocks(L):
    """``d^l(pi/2)`` for ``l <= L``, read-only."""
    out = []
    for blk in wigner_d_table(L, np.array([0.5 * np.pi])):
        b = blk[0]
        b.setflags(write=False)
        out.append(b)
    return tuple(out)


# ---------------------------------------------------------------------------
# Wigner D and spherical harmonics


def _euler_arrays(g):
    e = g.as_euler()
    return np.asarray(e.alpha), np.asarray(e.beta), np.asarray(e.gamma)


def wigner_D_matrix(l, g):
    """``D^l(g)`` with shape ``g.shape + (2l+1, 2l+1)``."""
    _check_index(l, 0)
    a, b, c = _euler_arrays(g)
    d = wigner_d_matrix(l, b)
    k = np.arange(-l, l + 1)
    left = np.exp(-1j * a[..., None] * k)
    right = np.exp(-1j * c[..., None] * k)
    return left[..., :, None] * d * right[..., None, :]


def wigner_D(l, m, n, g):
    _check_index(l, m, n)
    a, b, c = _euler_arrays(g)
    out = np.exp(-1j * m * a) * wigner_d(l, m, n, b) * np.exp(-1j * n * c)
    return out[()] if np.ndim(out) == 0 else out


def _phase_powers(x, L):
    """``exp(i k x)`` for ``k = -L..L`` as columns, by repeated multiplication."""
    z = np.exp(1j * np.asarray(x, dtype=float))
    out = np.empty((z.size, 2 * L + 1), dtype=complex)
    out[:, L] = 1.0
    for k in range(1, L + 1):
        out[:, L + k] = out[:, L + k - 1] * z
    out[:, :L] = np.conj(out[:, : L : -1])
    return out


@functools.lru_cache(maxsize=None)
def _m_columns(L):
    """Column of ``exp(i m x)`` in :func:`_phase_powers` for each ``(l, m)``."""
    return np.concatenate([np.arange(L - l, L + l + 1) for l in range(L + 1)])


@functools.lru_cache(maxsize=None)
def _legendre_fourier(L):
    """Matrix ``M`` with ``Y_l^m(theta, 0) = sum_k M[lm, k] e^{i k theta}``."""
    M = np.zeros(((L + 1) ** 2, 2 * L + 1), dtype=complex)
    for l, delta in enumerate(_delta_blocks(L)):
        m = np.arange(-l, l + 1)
        # d^l_{m0}(theta) = i^(-m) sum_k delta_{km} delta_{k0} e^{i k theta}
        coef = math.sqrt((2 * l + 1) / FOUR_PI) * (1j) ** ((-m) % 4)
        M[l * l : (l + 1) ** 2, L - l : L + l + 1] = coef[:, None] * (delta * delta[:, l][:, None]).T
    M.setflags(write=False)
    return M


def sph_harm_table(L, v):
    """All ``Y_l^m(v)`` for ``l <= L``; column ``l*l + l + m``.

    ``v`` has shape (..., 3); the result has shape (..., (L+1)**2).
    """
    check_bandlimit(L)
    v = np.asarray(v, dtype=float)
    lead = v.shape[:-1]
    theta, phi = vector_to_spherical(v.reshape(-1, 3))
    out = _phase_powers(theta, L) @ _legendre_fourier(L).T
    out *= _phase_powers(phi, L)[:, _m_columns(L)]
    return out.reshape(lead + (out.shape[-1],))


def sph_harm(l, m, v):
    """Orthonormal ``Y_l^m`` with Condon-Shortley phase at unit vectors ``v``."""
    _check_index(l, m)
    v = np.asarray(v, dtype=float)
    theta, phi = vector_to_spherical(v)
    d = wigner_d(l, m, 0, theta)
    out = math.sqrt((2 * l + 1) / FOUR_PI) * np.exp(1j * m * phi) * d
    return out[()] if np.ndim(out) == 0 else out


# ---------------------------------------------------------------------------
# coefficient tables


class _BlockTable:
    """Degree-indexed list of square complex blocks; block ``l`` is (2l+1)^2.

    Entry ``(l, m, n)`` lives at ``blocks[l][m + l, n + l]``.
    """

    __slots__ = ("_blocks",)

    def __init__(self, blocks):
        checked = []
        for l, b in enumerate(blocks):
            b = np.array(b, dtype=complex)
            if b.shape != (2 * l + 1, 2 * l + 1):
                raise ValueError(f"block {l} must be {(2 * l + 1,) * 2}, got {b.shape}")
            b.setflags(write=False)
            checked.append(b)
        if not checked:
            raise ValueError("a coefficient table needs at least the l = 0 block")
        self._blocks = tuple(checked)

    @classmethod
    def zeros(cls, L):
        return cls([np.zeros((2 * l + 1, 2 * l + 1)) for l in range(L + 1)])

    @classmethod
    def single(cls, L, l, m, n, value=1.0):
        _check_index(l, m, n)
        if l > L:
            raise IndexRangeError(f"degree {l} above band limit {L}")
        blocks = [np.zeros((2 * k + 1, 2 * k + 1), dtype=complex) for k in range(L + 1)]
        blocks[l][m + l, n + l] = value
        return cls(blocks)

    @classmethod
    def random(cls, L, rng=None, real=True):
        """Gaussian random table; ``real=True`` imposes the real-function symmetry."""
        rng = np.random.default_rng(rng)
        blocks = []
        for l in range(L + 1):
            b = rng.standard_normal((2 * l + 1,) * 2) + 1j * rng.standard_normal((2 * l + 1,) * 2)
            blocks.append(b)
        out = cls(blocks)
        return out.real_part() if real else out

    @property
    def L(self):
        return len(self._blocks) - 1

    @property
    def blocks(self):
        return self._blocks

    def __getitem__(self, lmn):
        l, m, n = lmn
        _check_index(l, m, n)
        if l > self.L:
            return 0j
        return complex(self._blocks[l][m + l, n + l])

    def __iter__(self):
        """Iterate ``(l, m, n, value)`` in lexicographic order."""
        for l, b in enumerate(self._blocks):
            for i in range(2 * l + 1):
                for j in range(2 * l + 1):
                    yield l, i - l, j - l, complex(b[i, j])

    def map_blocks(self, fn):
        return type(self)([fn(l, b) for l, b in enumerate(self._blocks)])

    def resized(self, L):
        blocks = list(self._blocks[: L + 1])
        for l in range(len(blocks), L + 1):
            blocks.append(np.zeros((2 * l + 1, 2 * l + 1)))
        return type(self)(blocks)

    def _binary(self, other, op):
        if type(other) is not type(self):
            return NotImplemented
        L = max(self.L, other.L)
        a, b = self.resized(L), other.resized(L)
        return type(self)([op(x, y) for x, y in zip(a.blocks, b.blocks)])

    def __add__(self, other):
        return self._binary(other, np.add)

    def __sub__(self, other):
        return self._binary(other, np.subtract)

    def __mul__(self, scalar):
        if not np.isscalar(scalar):
            return NotImplemented
        return self.map_blocks(lambda l, b: scalar * b)

    __rmul__ = __mul__

    def __neg__(self):
        return self * -1.0

    def max_abs(self):
        return max(float(np.max(np.abs(b))) for b in self._blocks)

    def max_abs_diff(self, other):
        return (self - other).max_abs()

    def to_vector(self):
        return np.concatenate([b.ravel() for b in self._blocks])

    @classmethod
    def from_vector(cls, vec, L):
        blocks, pos = [], 0
        for l in range(L + 1):
            k = (2 * l + 1) ** 2
            blocks.append(np.asarray(vec[pos : pos + k]).reshape(2 * l + 1, 2 * l + 1))
            pos += k
        return cls(blocks)

    def conjugate_partner(self):
        """Table of ``(-1)^(m-n) conj(c_l^{-m,-n})``."""

        def flip(l, b):
            k = np.arange(-l, l + 1)
            sign = (-1.0) ** ((k[:, None] - k[None, :]) % 2)
            return sign * np.conj(b[::-1, ::-1])

        return self.map_blocks(flip)

    def real_part(self):
        """Projection onto tables of real-valued functions."""
        return (self + self.conjugate_partner()) * 0.5

    def realness_defect(self):
        return self.max_abs_diff(self.conjugate_partner())

    def __eq__(self, other):
        if type(other) is not type(self) or other.L != self.L:
            return NotImplemented
        return all(np.array_equal(a, b) for a, b in zip(self._blocks, other._blocks))

    def __repr__(self):
        return f"{type(self).__name__}(L={self.L})"


class HarmonicCoeffsSO3(_BlockTable):
    """Coefficients ``fhat_l^{mn}`` of a function on SO(3)."""

    __slots__ = ()

    def energy(self):
        """``int |f|^2 dg`` by Parseval."""
        return float(sum((2 * l + 1) * np.sum(np.abs(b) ** 2) for l, b in enumerate(self.blocks)))


class PairHarmonicCoeffs(_BlockTable):
    """Diagonal-degree coefficients ``C_l^{mn}`` of a function on S2 x S2."""

    __slots__ = ()


# ---------------------------------------------------------------------------
# analysis and synthesis


def _chunked(fn, n, chunk=8192):
    """Evaluate ``fn(slice)`` over ``range(n)`` and concatenate in order."""
    slices = [slice(i, min(i + chunk, n)) for i in range(0, n, chunk)] or [slice(0, 0)]
    workers = config.threads()
    if workers > 1 and len(slices) > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            parts = list(pool.map(fn, slices))
    else:
        parts = [fn(s) for s in slices]
    return np.concatenate(parts)


def _as_rotation(g):
    return g if isinstance(g, Rotation) else Rotation(g)


def so3_analyze(f, L):
    """Coefficients of ``f`` by the product rule exact at degree ``2L``.

    ``f`` takes a batched :class:`Rotation` and returns values of the same
    shape.
    """
    L = check_bandlimit(L)
    rule = so3_quadrature(2 * L)
    alpha, beta, _ = rule.axes
    na, nb = alpha.size, beta.size
    vals = np.asarray(f(rule.nodes), dtype=complex).reshape(na, nb, na)
    if not np.all(np.isfinite(vals)):
        raise ValueError("function returned non-finite values on the quadrature grid")
    k = np.arange(-L, L + 1)
    E = np.exp(-1j * np.outer(alpha, k))
    G = np.einsum("abc,am,cn->bmn", vals, E, E) / na**2
    wb = 0.5 * rule.axis_weights
    dblocks = wigner_d_table(L, beta)
    blocks = []
    for l, d in enumerate(dblocks):
        sl = slice(L - l, L + l + 1)
        blocks.append(np.einsum("b,bmn,bmn->mn", wb, d, G[:, sl, sl]))
    return HarmonicCoeffsSO3(blocks)


def _trig_tensor(c):
    """Coefficients ``T[m, k, n]`` with ``f = sum T e^{i m alpha} e^{i k beta} e^{i n gamma}``."""
    L = c.L
    deltas = _delta_blocks(L)
    T = np.zeros((2 * L + 1,) * 3, dtype=complex)
    for l, (fb, delta) in enumerate(zip(c.blocks, deltas)):
        k = np.arange(-l, l + 1)
        # d^l_{mn}(beta) = i^(n-m) sum_k delta_{km} delta_{kn} e^{i k beta}
        phase = (1j) ** ((k[None, :] - k[:, None]) % 4)
        coef = (2 * l + 1) * fb * phase
        sl = slice(L - l, L + l + 1)
        T[sl, sl, sl] += np.einsum("mn,km,kn->mkn", coef, delta, delta)
    return T


def so3_synthesize(c, g):
    """Evaluate ``sum_l (2l+1) sum_mn c_l^{mn} conj(D^l_{mn}(g))`` at rotations ``g``."""
    g = _as_rotation(g)
    L = c.L
    T = _trig_tensor(c)
    a, b, cc = _euler_arrays(g)
    shape = a.shape
    a, b, cc = a.ravel(), b.ravel(), cc.ravel()
    Tm = T.reshape(-1, 2 * L + 1)

    def part(s):
        inner = (_phase_powers(cc[s], L) @ Tm.T).reshape(-1, 2 * L + 1, 2 * L + 1)  # [p, m, k]
        inner = np.einsum("pmk,pk->pm", inner, _phase_powers(b[s], L))
        return np.sum(inner * _phase_powers(a[s], L), axis=1)

    return _chunked(part, a.size).reshape(shape)


def so3_function(c, real=None):
    """Callable ``g -> f(g)``; real-valued when the table has the real symmetry."""
    if real is None:
        real = c.realness_defect() <= 1e-12 * max(1.0, c.max_abs())

    def f(g):
        v = so3_synthesize(c, g)
        return v.real if real else v

    f.coeffs = c
    return f


def s2s2_analyze(F, L):
    """Diagonal-degree coefficients of ``F(h, r)`` by tensor quadrature exact at ``2L``."""
    L = check_bandlimit(L)
    rule = s2_quadrature(2 * L)
    x = rule.nodes
    q = x.shape[0]
    H = np.repeat(x, q, axis=0)
    R = np.tile(x, (q, 1))
    vals = np.asarray(F(H, R), dtype=complex).reshape(q, q)
    if not np.all(np.isfinite(vals)):
        raise ValueError("function returned non-finite values on the quadrature grid")
    Y = sph_harm_table(L, x)
    Wv = rule.weights[:, None] * vals * rule.weights[None, :]
    blocks = []
    for l in range(L + 1):
        Yl = Y[:, l * l : (l + 1) ** 2]
        blocks.append(np.conj(Yl).T @ Wv @ Yl / FOUR_PI**2)
    return PairHarmonicCoeffs(blocks)


def s2s2_synthesize(P, h, r):
    """Evaluate ``(4pi)^2 sum C_l^{mn} Y_l^m(h) conj(Y_l^n(r))`` at paired points."""
    h = np.asarray(h, dtype=float)
    r = np.asarray(r, dtype=float)
    h, r = np.broadcast_arrays(h, r)
    shape = h.shape[:-1]
    h = h.reshape(-1, 3)
    r = r.reshape(-1, 3)
    L = P.L

    def part(s):
        Yh = sph_harm_table(L, h[s])
        Yr = np.conj(sph_harm_table(L, r[s]))
        out = np.zeros(Yh.shape[0], dtype=complex)
        for l, B in enumerate(P.blocks):
            sl = slice(l * l, (l + 1) ** 2)
            out += np.sum((Yh[:, sl] @ B) * Yr[:, sl], axis=1)
        return FOUR_PI**2 * out

    return _chunked(part, h.shape[0]).reshape(shape)


def s2s2_function(P, real=None):
    if real is None:
        real = P.realness_defect() <= 1e-12 * max(1.0, P.max_abs())

    def F(h, r):
        v = s2s2_synthesize(P, h, r)
        return v.real if real else v

    F.coeffs = P
    return F


# ---------------------------------------------------------------------------
# text format: "<kind> v1 L=<L>" then "l m n re im"


def format_table(table, kind="so3coef", skip_zero=True):
    lines = [f"{kind} v1 L={table.L}"]
    for l, m, n, v in table:
        if skip_zero and v == 0:
            continue
        lines.append(f"{l} {m} {n} {v.real:.17g} {v.imag:.17g}")
    return "\n".join(lines) + "\n"


def parse_table(text, kind="so3coef", cls=HarmonicCoeffsSO3, path=None):
    lines = text.splitlines()
    if not lines:
        raise FormatError("empty file", path, 1)
    head = lines[0].split()
    if len(head) != 3 or head[0] != kind or head[1] != "v1" or not head[2].startswith("L="):
        raise FormatError(f"expected header '{kind} v1 L=<L>'", path, 1)
    try:
        L = int(head[2][2:])
    except ValueError:
        raise FormatError("band limit in header is not an integer", path, 1)
    if L < 0:
        raise FormatError("negative band limit", path, 1)
    blocks = [np.zeros((2 * l + 1, 2 * l + 1), dtype=complex) for l in range(L + 1)]
    for lineno, line in enumerate(lines[1:], start=2):
        if not line.strip() or line.lstrip().startswith("#"):
            continue
        parts = line.split()
        if len(parts) != 5:
            raise FormatError("expected 'l m n re im'", path, lineno)
        try:
            l, m, n = (int(p) for p in parts[:3])
            re, im = float(parts[3]), float(parts[4])
        except ValueError:
            raise FormatError("unparsable number", path, lineno)
        if l > L:
            raise FormatError(f"degree {l} exceeds header band limit L={L}", path, lineno)
        if l < 0 or abs(m) > l or abs(n) > l:
            raise FormatError(f"invalid index ({l}, {m}, {n})", path, lineno)
        blocks[l][m + l, n + l] = complex(re, im)
    return cls(blocks)


def write_so3coef(path, c):
    with open(path, "w") as fh:
        fh.write(format_table(c, "so3coef"))


def read_so3coef(path):
    with open(path) as fh:
        return parse_table(fh.read(), "so3coef", HarmonicCoeffsSO3, path=str(path))
