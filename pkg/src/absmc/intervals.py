"""Scalar interval arithmetic used by the interval dynamics and labeling.

Intervals are plain ``(lo, hi)`` tuples of floats with ``lo <= hi``.
Trigonometric bounds locate contained extrema (multiples of pi/2) instead
of evaluating endpoints only, so sin/cos bounds are tight.
"""

from __future__ import annotations

import math

TWO_PI = 2.0 * math.pi


def iadd(a, b):
    return (a[0] + b[0], a[1] + b[1])


def isub(a, b):
    return (a[0] - b[1], a[1] - b[0])


def iscale(a, c: float):
    if c >= 0:
        return (c * a[0], c * a[1])
    return (c * a[1], c * a[0])


def ishift(a, c: float):
    return (a[0] + c, a[1] + c)


def imul(a, b):
    ps = (a[0] * b[0], a[0] * b[1], a[1] * b[0], a[1] * b[1])
    return (min(ps), max(ps))


def idiv(a, b):
    if b[0] <= 0.0 <= b[1]:
        raise ZeroDivisionError(f"interval division by {b} containing zero")
    return imul(a, (1.0 / b[1], 1.0 / b[0]))


def isquare(a):
    lo, hi = abs(a[0]), abs(a[1])
    if a[0] <= 0.0 <= a[1]:
        return (0.0, max(lo, hi) ** 2)
    m = min(lo, hi)
    return (m * m, max(lo, hi) ** 2)


def iabs(a):
    if a[0] >= 0:
        return a
    if a[1] <= 0:
        return (-a[1], -a[0])
    return (0.0, max(-a[0], a[1]))


def iclip(a, lo: float, hi: float):
    return (min(max(a[0], lo), hi), min(max(a[1], lo), hi))


def ihull(a, b):
    return (min(a[0], b[0]), max(a[1], b[1]))


def _hits(l: float, u: float, offset: float, period: float = TWO_PI) -> bool:
    """Whether some offset + k*period (integer k) lies in [l, u]."""
    return math.ceil((l - offset) / period) <= math.floor((u - offset) / period)


def isin(a):
    l, u = a
    if u - l >= TWO_PI:
        return (-1.0, 1.0)
    hi = 1.0 if _hits(l, u, math.pi / 2) else max(math.sin(l), math.sin(u))
    lo = -1.0 if _hits(l, u, -math.pi / 2) else min(math.sin(l), math.sin(u))
    return (lo, hi)


def icos(a):
    l, u = a
    if u - l >= TWO_PI:
        return (-1.0, 1.0)
    hi = 1.0 if _hits(l, u, 0.0) else max(math.cos(l), math.cos(u))
    lo = -1.0 if _hits(l, u, math.pi) else min(math.cos(l), math.cos(u))
    return (lo, hi)
