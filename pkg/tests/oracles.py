"""Independent reference computations shared by several test modules."""

from fractions import Fraction


def enumerate_polar_grid(n, wavelength, beta, rho_min, far_column=True):
    """Independent count of the (angle, distance) grid in exact rational arithmetic.

    Distances at angle theta: N^2 d^2 (1 - theta^2) / (2 lambda beta^2 s), s >= 1, kept while >= rho_min.
    """
    lam = Fraction(wavelength)
    d = lam / 2
    b = Fraction(beta)
    rho = Fraction(rho_min)
    total = 0
    for k in range(1, n + 1):
        theta = Fraction(2 * k - n - 1, n)
        base = Fraction(n * n) * d * d * (1 - theta * theta) / (2 * lam * b * b)
        s = 1
        while base / s >= rho:
            total += 1
            s += 1
        total += 1 if far_column else 0
    return total
