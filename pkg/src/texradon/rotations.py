"""Rotations of R^3, the fiber of the Radon transform, and quadrature rules.

Convention: a rotation ``g`` maps specimen coordinates to crystal
coordinates, ``h = g r``.  An active crystal orientation in the opposite
sense is obtained with :meth:`Rotation.inv`.

Rotations are stored as unit quaternions ``(w, x, y, z)``; Euler angles and
matrices are conversion views.  Euler angles follow the ZYZ convention
``g = R_z(alpha) R_y(beta) R_z(gamma)``.
"""

import functools
from dataclasses import dataclass

import numpy as np

from .config import HARD_LMAX, check_bandlimit

TWO_PI = 2.0 * np.pi

#: ratio of the Riemannian volume element ``sin(beta) da db dc`` to the
#: Haar probability measure ``dg``.
RIEMANNIAN_TO_HAAR = 8.0 * np.pi**2

ANTIPODAL_TOL = 1e-9


def qmul(p, q):
    """Hamilton product of quaternion arrays (broadcasting)."""
    p = np.asarray(p, dtype=float)
    q = np.asarray(q, dtype=float)
    pw, px, py, pz = np.moveaxis(p, -1, 0)
    qw, qx, qy, qz = np.moveaxis(q, -1, 0)
    return np.stack(
        [
            pw * qw - px * qx - py * qy - pz * qz,
            pw * qx + px * qw + py * qz - pz * qy,
            pw * qy - px * qz + py * qw + pz * qx,
            pw * qz + px * qy - py * qx + pz * qw,
        ],
        axis=-1,
    )


def _normalize(a):
    return a / np.linalg.norm(a, axis=-1, keepdims=True)


def unit_vector(v):
    """Return ``v`` scaled to unit length along the last axis."""
    v = np.asarray(v, dtype=float)
    if v.shape[-1] != 3:
        raise ValueError(f"expected 3-vectors, got shape {v.shape}")
    n = np.linalg.norm(v, axis=-1, keepdims=True)
    if np.any(n == 0) or not np.all(np.isfinite(n)):
        raise ValueError("cannot normalize a zero or non-finite vector")
    return v / n


def spherical_to_vector(theta, phi):
    """Polar angle ``theta`` and azimuth ``phi`` to unit vectors."""
    theta = np.asarray(theta, dtype=float)
    phi = np.asarray(phi, dtype=float)
    st = np.sin(theta)
    return np.stack([st * np.cos(phi), st * np.sin(phi), np.cos(theta)], axis=-1)


def vector_to_spherical(v):
    """Inverse of :func:`spherical_to_vector`; ``phi`` is wrapped to [0, 2pi)."""
    v = np.asarray(v, dtype=float)
    theta = np.arctan2(np.hypot(v[..., 0], v[..., 1]), v[..., 2])
    phi = np.mod(np.arctan2(v[..., 1], v[..., 0]), TWO_PI)
    return theta, phi


@dataclass(frozen=True)
class EulerZYZ:
    """ZYZ Euler angles in radians; arrays broadcast elementwise."""

    alpha: np.ndarray
    beta: np.ndarray
    gamma: np.ndarray

    @classmethod
    def canonical(cls, alpha, beta, gamma):
        """Wrap ``alpha``, ``gamma`` into [0, 2pi) and clamp ``beta`` to [0, pi]."""
        beta = np.asarray(beta, dtype=float)
        if np.any((beta < -1e-12) | (beta > np.pi + 1e-12)):
            raise ValueError("beta must lie in [0, pi]")
        return cls(
            np.mod(np.asarray(alpha, dtype=float), TWO_PI),
            np.clip(beta, 0.0, np.pi),
            np.mod(np.asarray(gamma, dtype=float), TWO_PI),
        )


class Rotation:
    """One rotation or an array of rotations, backed by unit quaternions.

    ``q`` has shape ``(..., 4)``.  Quaternions are renormalized on
    construction and after every composition; ``q`` and ``-q`` denote the
    same rotation.
    """

    __slots__ = ("_q",)

    def __init__(self, q):
        q = np.asarray(q, dtype=float)
        if q.shape[-1:] != (4,):
            raise ValueError(f"quaternions need a trailing axis of length 4, got {q.shape}")
        if not np.all(np.isfinite(q)):
            raise ValueError("non-finite quaternion")
        q = _normalize(q)
        q.setflags(write=False)
        self._q = q

    # construction -----------------------------------------------------

    @classmethod
    def identity(cls, shape=()):
        if isinstance(shape, int):
            shape = (shape,)
        q = np.zeros(tuple(shape) + (4,))
        q[..., 0] = 1.0
        return cls(q)

    @classmethod
    def from_axis_angle(cls, axis, angle):
        axis = unit_vector(axis)
        return cls(_axis_angle_quat(axis, angle))

    @classmethod
    def from_euler(cls, alpha, beta, gamma):
        """``R_z(alpha) R_y(beta) R_z(gamma)``."""
        a, b, c = np.broadcast_arrays(
            *(0.5 * np.asarray(x, dtype=float) for x in (alpha, beta, gamma))
        )
        cb, sb = np.cos(b), np.sin(b)
        s, d = a + c, a - c
        return cls(np.stack([cb * np.cos(s), -sb * np.sin(d), sb * np.cos(d), cb * np.sin(s)], axis=-1))

    @classmethod
    def from_matrix(cls, m):
        m = np.asarray(m, dtype=float)
        # Shepperd's method, choosing the largest pivot for stability
        tr = np.trace(m, axis1=-2, axis2=-1)
        diag = np.diagonal(m, axis1=-2, axis2=-1)
        cand = np.stack([tr, diag[..., 0], diag[..., 1], diag[..., 2]], axis=-1)
        k = np.argmax(cand, axis=-1)
        q = np.empty(m.shape[:-2] + (4,))
        m00, m11, m22 = diag[..., 0], diag[..., 1], diag[..., 2]
        m01, m02, m10 = m[..., 0, 1], m[..., 0, 2], m[..., 1, 0]
        m12, m20, m21 = m[..., 1, 2], m[..., 2, 0], m[..., 2, 1]
        rows = [
            np.stack([1 + tr, m21 - m12, m02 - m20, m10 - m01], axis=-1),
            np.stack([m21 - m12, 1 + m00 - m11 - m22, m01 + m10, m02 + m20], axis=-1),
            np.stack([m02 - m20, m01 + m10, 1 - m00 + m11 - m22, m12 + m21], axis=-1),
            np.stack([m10 - m01, m02 + m20, m12 + m21, 1 - m00 - m11 + m22], axis=-1),
        ]
        for i in range(4):
            sel = k == i
            q[sel] = rows[i][sel]
        return cls(q)

    @classmethod
    def random(cls, n=None, rng=None):
        """Haar-uniform random rotations."""
        rng = np.random.default_rng(rng)
        shape = (4,) if n is None else (n, 4)
        return cls(rng.standard_normal(shape))

    # views -------------------------------------------------------------

    @property
    def q(self):
        return self._q

    @property
    def shape(self):
        return self._q.shape[:-1]

    def __len__(self):
        if self._q.ndim == 1:
            raise TypeError("single rotation has no len()")
        return self._q.shape[0]

    def __getitem__(self, idx):
        if self._q.ndim == 1:
            raise TypeError("single rotation is not subscriptable")
        return Rotation(self._q[idx])

    def __repr__(self):
        return f"Rotation(q={self._q!r})"

    def as_matrix(self):
        w, x, y, z = np.moveaxis(self._q, -1, 0)
        return np.stack(
            [
                np.stack([1 - 2 * (y * y + z * z), 2 * (x * y - w * z), 2 * (x * z + w * y)], axis=-1),
                np.stack([2 * (x * y + w * z), 1 - 2 * (x * x + z * z), 2 * (y * z - w * x)], axis=-1),
                np.stack([2 * (x * z - w * y), 2 * (y * z + w * x), 1 - 2 * (x * x + y * y)], axis=-1),
            ],
            axis=-2,
        )

    def as_euler(self):
        """ZYZ angles; at gimbal lock the whole in-plane angle goes to ``alpha``."""
        w, x, y, z = np.moveaxis(self._q, -1, 0)
        beta = 2.0 * np.arctan2(np.hypot(x, y), np.hypot(w, z))
        s = 2.0 * np.arctan2(z, w)
        d = 2.0 * np.arctan2(-x, y)
        lock0 = np.hypot(x, y) < 1e-15
        lock1 = np.hypot(w, z) < 1e-15
        d = np.where(lock0, s, d)
        s = np.where(lock1, d, s)
        return EulerZYZ.canonical(0.5 * (s + d), beta, 0.5 * (s - d))

    # group operations ----------------------------------------------------

    def __mul__(self, other):
        if not isinstance(other, Rotation):
            return NotImplemented
        return Rotation(qmul(self._q, other._q))

    def inv(self):
        return Rotation(self._q * np.array([1.0, -1.0, -1.0, -1.0]))

    def apply(self, v):
        """Rotate vectors: ``q v q*``."""
        v = np.asarray(v, dtype=float)
        w = self._q[..., :1]
        u = self._q[..., 1:]
        t = 2.0 * np.cross(u, v)
        return v + w * t + np.cross(u, t)

    def angle(self):
        """Rotation angle in [0, pi]."""
        w = np.abs(self._q[..., 0])
        return 2.0 * np.arctan2(np.linalg.norm(self._q[..., 1:], axis=-1), w)

    def equals(self, other, atol=1e-12):
        """Elementwise equality as rotations (sign of ``q`` ignored)."""
        d = np.abs(np.sum(self._q * other._q, axis=-1))
        return np.abs(1.0 - d) <= atol


def _axis_angle_quat(axis, angle):
    half = 0.5 * np.asarray(angle, dtype=float)[..., None]
    vec = np.sin(half) * axis
    w = np.broadcast_to(np.cos(half), vec.shape[:-1] + (1,))
    return np.concatenate([w, vec], axis=-1)


def euler_to_rotation(e):
    return Rotation.from_euler(e.alpha, e.beta, e.gamma)


def rotate(g, v):
    """Coordinate transform ``h = g r``."""
    return g.apply(v)


def _orthogonal_axis(r):
    """Deterministic unit axis orthogonal to ``r``: e1 projected, else e2."""
    r = np.asarray(r, dtype=float)
    e1 = np.array([1.0, 0.0, 0.0])
    e2 = np.array([0.0, 1.0, 0.0])
    use_e2 = np.abs(r[..., :1]) > 1.0 - 1e-6
    base = np.where(use_e2, e2, e1)
    proj = base - np.sum(base * r, axis=-1, keepdims=True) * r
    return _normalize(proj)


def fiber_base(h, r):
    """Quaternion of the shortest rotation taking ``r`` to ``h``."""
    h = np.asarray(h, dtype=float)
    r = np.asarray(r, dtype=float)
    h, r = np.broadcast_arrays(h, r)
    s = h + r
    ns = np.linalg.norm(s, axis=-1, keepdims=True)
    anti = ns < ANTIPODAL_TOL
    # bisector b of r and h: q0 = (r.b, r x b)
    b = s / np.where(anti, 1.0, ns)
    q = np.concatenate([np.sum(r * b, axis=-1, keepdims=True), np.cross(r, b)], axis=-1)
    if np.any(anti):
        ax = _orthogonal_axis(r)
        qa = np.concatenate([np.zeros(ax.shape[:-1] + (1,)), ax], axis=-1)
        q = np.where(anti, qa, q)
    return q


def fiber_rotation(h, r, t):
    """Rotation ``g0 * Rot(r, t)`` mapping ``r`` onto ``h`` for every ``t``.

    As ``t`` runs over [0, 2pi) the result traces the circle
    ``{g : h = g r}`` exactly once.
    """
    q0 = fiber_base(h, r)
    return Rotation(qmul(q0, _axis_angle_quat(r, t)))


@dataclass(frozen=True)
class QuadratureRule:
    """Product quadrature on ``S2`` or ``SO3``.

    For ``SO3`` the nodes are ordered as ``meshgrid(alpha, beta, gamma,
    indexing="ij")`` and the weights sum to 1 (Haar probability).  For
    ``S2`` they follow ``meshgrid(theta, phi, indexing="ij")`` and the
    weights sum to 4 pi.
    """

    domain: str
    nodes: object
    weights: np.ndarray
    bandlimit: int
    axes: tuple
    axis_weights: np.ndarray


def _gauss_cos(k):
    x, w = np.polynomial.legendre.leggauss(k)
    # ascending polar angle
    order = np.argsort(-x)
    return np.arccos(x[order]), w[order]


def _check_quad_limit(L):
    return check_bandlimit(L, ceiling=HARD_LMAX)


@functools.lru_cache(maxsize=64)
def so3_quadrature(L):
    """Rule exact for every ``D^l_{mn}`` with ``l <= L``."""
    L = _check_quad_limit(L)
    n = L + 1
    k = L // 2 + 1
    ang = TWO_PI * np.arange(n) / n
    beta, wb = _gauss_cos(k)
    A, B, C = np.meshgrid(ang, beta, ang, indexing="ij")
    W = np.broadcast_to((0.5 * wb / n**2)[None, :, None], A.shape)
    weights = np.ascontiguousarray(W).ravel()
    weights.setflags(write=False)
    nodes = Rotation.from_euler(A.ravel(), B.ravel(), C.ravel())
    return QuadratureRule("SO3", nodes, weights, L, (ang, beta, ang), wb)


@functools.lru_cache(maxsize=64)
def s2_quadrature(L):
    """Rule exact for every ``Y_l^m`` with ``l <= L``; nodes are unit vectors."""
    L = _check_quad_limit(L)
    n = L + 1
    k = L // 2 + 1
    theta, wt = _gauss_cos(k)
    phi = TWO_PI * np.arange(n) / n
    T, P = np.meshgrid(theta, phi, indexing="ij")
    weights = np.ascontiguousarray(np.broadcast_to((wt * TWO_PI / n)[:, None], T.shape)).ravel()
    weights.setflags(write=False)
    nodes = spherical_to_vector(T.ravel(), P.ravel())
    nodes.setflags(write=False)
    return QuadratureRule("S2", nodes, weights, L, (theta, phi), wt)
