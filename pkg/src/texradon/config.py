"""Band-limit ceiling and worker-count settings."""

import os

from .errors import BandLimitError

DEFAULT_LMAX = 64
HARD_LMAX = 128

_threads = 1


def lmax():
    """Current band-limit ceiling; ``TEXRADON_LMAX`` overrides the default."""
    raw = os.environ.get("TEXRADON_LMAX")
    if raw is None or raw.strip() == "":
        return DEFAULT_LMAX
    try:
        value = int(raw)
    except ValueError:
        raise BandLimitError(f"TEXRADON_LMAX must be an integer, got {raw!r}")
    if not 0 <= value <= HARD_LMAX:
        raise BandLimitError(f"TEXRADON_LMAX must lie in [0, {HARD_LMAX}], got {value}")
    return value


def check_bandlimit(L, ceiling=None):
    if ceiling is None:
        ceiling = lmax()
    if int(L) != L or L < 0:
        raise BandLimitError(f"band limit must be a nonnegative integer, got {L!r}")
    if L > ceiling:
        raise BandLimitError(f"band limit L={L} exceeds L_max={ceiling}")
    return int(L)


def set_threads(n):
    global _threads
    if n < 1:
        raise ValueError("thread count must be >= 1")
    _threads = int(n)


def threads():
    return _threads
