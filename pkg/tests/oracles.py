"""Independent reference evaluations used by the tests.

None of these call into the package; they rebuild each quantity from a
different representation (lattice sums, fixed-length theta partial sums,
finite differences).
"""
import cmath
import math

import numpy as np

PI = math.pi


def _csc2(x):
    """``csc^2`` written through ``exp(+-2ix)`` so it stays finite far off the real axis."""
    x = np.asarray(x, dtype=complex)
    e = np.exp(2j * np.where(x.imag >= 0, x, -x))
    return -4 * e / (1 - e) ** 2


def lattice_wp(z, tau, rows=60):
    """``wp`` by summing the lattice row by row.

    Each row ``sum_m 1/(z + m + n tau)^2`` is ``pi^2 csc^2(pi (z + n tau))``, and
    the subtracted constants ``sum' 1/omega^2`` are ordered the same way.
    """
    z = complex(z)
    tau = complex(tau)
    n = np.arange(-rows, rows + 1)
    total = np.sum(PI**2 * _csc2(PI * (z + n * tau)))
    nz = n[n != 0]
    const = PI**2 / 3.0 + np.sum(PI**2 * _csc2(PI * nz * tau))
    return complex(total - const)


def lattice_wp_naive(z, tau, N=200):
    """Plain double sum over ``|m|, |n| <= N`` (symmetric ordering); accurate to ~1e-5."""
    m = np.arange(-N, N + 1)
    M, Nn = np.meshgrid(m, m)
    w = (M + Nn * complex(tau)).ravel()
    w = w[w != 0]
    return complex(1 / z**2 + np.sum(1 / (z - w) ** 2 - 1 / w**2))


def eisenstein_G2(tau, rows=60):
    """``sum_n sum_m' (m + n tau)^-2`` with the inner sum over m; equals ``eta_1``."""
    n = np.arange(1, rows + 1)
    return complex(PI**2 / 3.0 + 2 * np.sum(PI**2 * _csc2(PI * n * complex(tau))))


def eisenstein_G4(tau, rows=60):
    """``sum' omega^-4`` from ``sum_m (x + m)^-4 = pi^4 (csc^4 - 2/3 csc^2)(pi x)``."""
    n = np.arange(1, rows + 1)
    c2 = _csc2(PI * n * complex(tau))
    row = PI**4 * (c2 * c2 - 2.0 / 3.0 * c2)
    return complex(2 * PI**4 / 90.0 + 2 * np.sum(row))


def eisenstein_G6(tau, rows=60):
    """``sum' omega^-6`` from ``sum_m (x + m)^-6 = pi^6 (csc^6 - csc^4 + 2/15 csc^2)(pi x)``."""
    n = np.arange(1, rows + 1)
    c2 = _csc2(PI * n * complex(tau))
    row = PI**6 * (c2**3 - c2**2 + 2.0 / 15.0 * c2)
    return complex(2 * PI**6 / 945.0 + 2 * np.sum(row))


def theta1_partial(v, nome, terms=200):
    """``2 sum_{n < terms} (-1)^n q^((n+1/2)^2) sin((2n+1) v)`` without early stopping."""
    v = complex(v)
    q = complex(nome)
    logq = cmath.log(q)
    total = 0j
    for n in range(terms):
        e = cmath.exp(logq * (n + 0.5) ** 2)
        if e == 0:
            break
        total += 2 * (-1) ** n * e * cmath.sin((2 * n + 1) * v)
    return total


def green(z, tau, terms=60):
    """Green function of the torus up to an additive constant."""
    tau = complex(tau)
    z = complex(z)
    nome = cmath.exp(1j * PI * tau)
    th = theta1_partial(PI * z, nome, terms)
    return -math.log(abs(th)) / (2 * PI) + z.imag**2 / (2 * tau.imag)


def green_dz(z, tau, h=1e-5):
    """``dG/dz = (G_x - i G_y) / 2`` by central differences."""
    gx = (green(z + h, tau) - green(z - h, tau)) / (2 * h)
    gy = (green(z + 1j * h, tau) - green(z - 1j * h, tau)) / (2 * h)
    return 0.5 * (gx - 1j * gy)


def green_hessian_det(z, tau, h=1e-4):
    """Determinant of the real Hessian of G by second differences."""
    g = lambda dx, dy: green(z + dx + 1j * dy, tau)
    gxx = (g(h, 0) - 2 * g(0, 0) + g(-h, 0)) / h**2
    gyy = (g(0, h) - 2 * g(0, 0) + g(0, -h)) / h**2
    gxy = (g(h, h) - g(h, -h) - g(-h, h) + g(-h, -h)) / (4 * h * h)
    return gxx * gyy - gxy * gxy


def complex_fd(f, z, h=1e-5):
    """Central difference of a holomorphic function along the real direction."""
    return (f(z + h) - f(z - h)) / (2 * h)
