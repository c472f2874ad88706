"""Golden-section minimisation."""

import math

INV_PHI = (math.sqrt(5.0) - 1.0) / 2.0
INV_PHI2 = (3.0 - math.sqrt(5.0)) / 2.0


def golden_section(f, a, b, xtol=1e-10, diff=None):
    """Minimise a unimodal ``f`` on [a, b]; returns (x, f(x)).

    ``diff(x1, x2)`` may supply f(x1) - f(x2) directly.  Near a flat minimum
    the plain difference of two rounded values loses all significant digits,
    so an accurate ``diff`` lets the bracket shrink well below sqrt(eps).
    """
    if diff is None:
        def diff(x1, x2):
            return f(x1) - f(x2)

    if not (math.isfinite(a) and math.isfinite(b)) or a == b:
        raise ValueError(f"bracket [{a!r}, {b!r}] must be finite with nonzero width")
    a, b = min(a, b), max(a, b)
    h = b - a
    if h > xtol:
        n = int(math.ceil(math.log(xtol / h) / math.log(INV_PHI)))
        c = a + INV_PHI2 * h
        d = a + INV_PHI * h
        for _ in range(n):
            h *= INV_PHI
            if diff(c, d) < 0:
                b, d = d, c
                c = a + INV_PHI2 * h
            else:
                a, c = c, d
                d = a + INV_PHI * h
    x = 0.5 * (a + b)
    return x, f(x)

