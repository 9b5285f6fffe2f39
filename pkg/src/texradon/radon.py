"""One-dimensional Radon transform on SO(3) and its dual.

``Rf(h, r)`` is the mean of ``f`` over the circle ``{g : h = g r}``,
normalized so that the constant density maps to the constant 1.  In this
normalization the SO(3) coefficients of ``f`` equal 4 pi times the pair
coefficients of ``Rf`` (see :mod:`texradon.harmonics` for the pairing).

Measuring arc length along a fiber by the rotation angle ``t`` about ``r``
(fiber length 2 pi), the raw arc-length integral times
:data:`ARC_NORMALIZATION` is the value returned by :func:`radon_geometric`.
On the double cover in S3 the same fiber is a great circle of length 2 pi
traversed at half speed, which is why :func:`s3_circle_integral` needs no
separate constant.
"""

import numpy as np

from .errors import PropagationError
from .harmonics import FOUR_PI, PairHarmonicCoeffs
from .rotations import Rotation, fiber_rotation, qmul, s2_quadrature

DEFAULT_FIBER_NODES = 256

#: factor between the raw arc-length integral ``int_0^{2pi} f(g(t)) dt`` and
#: the normalized transform (so that ``R1 = 1``).
ARC_NORMALIZATION = 1.0 / (2.0 * np.pi)


def _check_finite(vals, what="f"):
    bad = ~np.isfinite(vals)
    if np.any(bad):
        idx = np.argwhere(bad)[0]
        raise PropagationError(f"non-finite {what} value at node {tuple(int(i) for i in idx)}")


def fiber_nodes(nodes):
    if nodes < 4:
        raise ValueError("at least 4 fiber nodes are required")
    return 2.0 * np.pi * np.arange(nodes) / nodes


def radon_geometric(f, h, r, nodes=DEFAULT_FIBER_NODES):
    """Trapezoid rule on the closed fiber ``t -> fiber_rotation(h, r, t)``.

    ``h`` and ``r`` broadcast against each other along leading axes; ``f``
    receives a batched :class:`Rotation` of shape ``lead + (nodes,)``.
    """
    t = fiber_nodes(nodes)
    h = np.asarray(h, dtype=float)
    r = np.asarray(r, dtype=float)
    h, r = np.broadcast_arrays(h, r)
    g = fiber_rotation(h[..., None, :], r[..., None, :], t)
    vals = np.asarray(f(g))
    _check_finite(vals)
    out = vals.mean(axis=-1)
    return out[()] if out.ndim == 0 else out


def radon_harmonic(c):
    """Pair coefficients of ``Rf`` from the SO(3) coefficients of ``f``."""
    return PairHarmonicCoeffs([b / FOUR_PI for b in c.blocks])


def dual_radon(F, g, degree):
    """Mean of ``F(h, g^-1 h)`` over ``h`` in S2.

    The mean uses :func:`s2_quadrature` of exactness ``degree``; a pair
    function of band limit ``L`` needs ``degree >= 2L``.  ``g`` may be
    batched; the result has shape ``g.shape``.
    """
    if degree < 0:
        raise ValueError("degree must be nonnegative")
    rule = s2_quadrature(degree)
    x = rule.nodes
    gi = g.inv()
    gshape = gi.shape
    qi = gi.q.reshape(-1, 4)
    r = Rotation(qi[:, None, :]).apply(x[None, :, :])
    h = np.broadcast_to(x, r.shape)
    vals = np.asarray(F(h.reshape(-1, 3), r.reshape(-1, 3))).reshape(r.shape[:-1])
    _check_finite(vals, "F")
    out = vals @ rule.weights / FOUR_PI
    out = out.reshape(gshape)
    return out[()] if out.ndim == 0 else out


def _left_matrix(p):
    """4x4 matrices of ``q -> p q``."""
    eye = np.eye(4)
    return np.stack([qmul(p, eye[j]) for j in range(4)], axis=-1)


def _right_matrix(p):
    """4x4 matrices of ``q -> q p``."""
    eye = np.eye(4)
    return np.stack([qmul(eye[j], p) for j in range(4)], axis=-1)


def great_circle_basis(h, r):
    """Orthonormal pair ``(u, v)`` spanning the unit quaternions with ``q r q* = h``.

    The solution set is the kernel of ``q -> (0,h) q - q (0,r)``, a
    2-plane; its unit circle double covers the fiber in SO(3).
    """
    h = np.asarray(h, dtype=float)
    r = np.asarray(r, dtype=float)
    h, r = np.broadcast_arrays(h, r)
    zero = np.zeros(h.shape[:-1] + (1,))
    ph = np.concatenate([zero, h], axis=-1)
    pr = np.concatenate([zero, r], axis=-1)
    M = _left_matrix(ph) - _right_matrix(pr)
    _, _, vt = np.linalg.svd(M)
    return vt[..., 2, :], vt[..., 3, :]


def s3_circle_integral(f, h, r, nodes=512):
    """Mean of ``f`` over the great circle of S3 lifting the fiber ``{g : h = g r}``."""
    if nodes < 4:
        raise ValueError("at least 4 nodes are required")
    u, v = great_circle_basis(h, r)
    s = 2.0 * np.pi * np.arange(nodes) / nodes
    q = np.cos(s)[:, None] * u[..., None, :] + np.sin(s)[:, None] * v[..., None, :]
    vals = np.asarray(f(Rotation(q)))
    _check_finite(vals)
    out = vals.mean(axis=-1)
    return out[()] if out.ndim == 0 else out
