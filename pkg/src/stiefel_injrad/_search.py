"""Scalar search helpers."""

import math

_INVPHI = (math.sqrt(5.0) - 1.0) / 2.0


def golden_section(f, a, b, width):
    """Minimize a unimodal ``f`` on ``[a, b]`` until the bracket is narrower than ``width``.

    Returns ``(x, f(x))`` for the best point seen.
    """
    c = b - _INVPHI * (b - a)
    d = a + _INVPHI * (b - a)
    fc, fd = f(c), f(d)
    best = min((fc, c), (fd, d))
    while b - a > width:
        if fc <= fd:
            b, d, fd = d, c, fc
            c = b - _INVPHI * (b - a)
            fc = f(c)
            best = min(best, (fc, c))
        else:
            a, c, fc = c, d, fd
            d = a + _INVPHI * (b - a)
            fd = f(d)
            best = min(best, (fd, d))
    mid = 0.5 * (a + b)
    fm = f(mid)
    best = min(best, (fm, mid))
    return best[1], best[0]
