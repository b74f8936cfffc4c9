"""Gaussian kernel g_t and its first two spatial derivatives.

All three functions broadcast over numpy arrays. ``t`` is the variance of
the kernel (``sigma**2 * T`` for a scaled process).
"""

from __future__ import annotations

import numpy as np

from .errors import DomainError

# beyond this many standard deviations every kernel is returned as exactly 0
UNDERFLOW_SIGMAS = 40.0

_SQRT_2PI = np.sqrt(2.0 * np.pi)


def _check(x, t):
    x = np.asarray(x, dtype=float)
    t = np.asarray(t, dtype=float)
    if not np.all(np.isfinite(x)):
        raise DomainError("kernel argument must be finite")
    if not np.all(np.isfinite(t)) or np.any(t <= 0):
        raise DomainError("kernel variance t must be positive and finite")
    return x, t


def _scalar(out):
    return float(out) if np.ndim(out) == 0 else out


def _gauss(x, t):
    # exp(-x^2 / 2t) with the far tail clamped to 0
    far = np.abs(x) > UNDERFLOW_SIGMAS * np.sqrt(t)
    return np.where(far, 0.0, np.exp(-0.5 * x * x / t))


def g(x, t):
    """Normal density with mean 0 and variance ``t`` evaluated at ``x``."""
    x, t = _check(x, t)
    return _scalar(_gauss(x, t) / (_SQRT_2PI * np.sqrt(t)))


def g_prime(x, t):
    """First derivative of :func:`g` in ``x``: ``-x g(x, t) / t``."""
    x, t = _check(x, t)
    return _scalar(-x * _gauss(x, t) / (_SQRT_2PI * np.sqrt(t) ** 3))


def g_second(x, t):
    """Second derivative of :func:`g` in ``x``: ``(x^2 - t) g(x, t) / t^2``."""
    x, t = _check(x, t)
    return _scalar((x * x - t) * _gauss(x, t) / (_SQRT_2PI * np.sqrt(t) ** 5))
