"""Seeded sampling helpers: complex spheres, interior points, direction grids.

All randomness flows from a single 64-bit seed through numpy Generators, so
every probe in the package replays byte-identically for a fixed seed.
"""

from __future__ import annotations

import numpy as np


def rng_from(seed) -> np.random.Generator:
    if isinstance(seed, np.random.Generator):
        return seed
    return np.random.default_rng(seed)


def complex_gaussian(rng, shape):
    return rng.standard_normal(shape) + 1j * rng.standard_normal(shape)


def sample_unit_sphere(rng, dim, n) -> np.ndarray:
    """n points on the unit Euclidean sphere of C^dim."""
    z = complex_gaussian(rng, (n, dim))
    nrm = np.linalg.norm(z, axis=1, keepdims=True)
    # resample exact zeros is overkill at float precision; nudge instead
    nrm[nrm == 0] = 1.0
    return z / nrm


def sample_unit_p_sphere(rng, dim, n, p) -> np.ndarray:
    z = complex_gaussian(rng, (n, dim))
    if np.isinf(p):
        nrm = np.max(np.abs(z), axis=1, keepdims=True)
    else:
        nrm = np.sum(np.abs(z) ** p, axis=1, keepdims=True) ** (1.0 / p)
    nrm[nrm == 0] = 1.0
    return z / nrm


def fibonacci_sphere_s3(n: int) -> np.ndarray:
    """Deterministic quasi-uniform lattice on the unit sphere of C^2.

    Uses Hopf coordinates (cos(eta) e^{i phi1}, sin(eta) e^{i phi2}) fed by a
    rank-3 Kronecker lattice with plastic-number increments; the eta component
    is pushed through the exact area-preserving transform for S^3.
    """
    # plastic number: real root of x^3 = x + 1
    phi3 = 1.3247179572447460
    a1 = 1.0 / phi3
    a2 = 1.0 / phi3 ** 2
    a3 = 1.0 / phi3 ** 3
    k = np.arange(n, dtype=np.float64) + 0.5
    u1 = np.mod(k * a1, 1.0)
    u2 = np.mod(k * a2, 1.0)
    u3 = np.mod(k * a3, 1.0)
    eta = np.arcsin(np.sqrt(u1))  # density sin(2*eta) on [0, pi/2]
    phi1 = 2.0 * np.pi * u2
    phi2 = 2.0 * np.pi * u3
    return np.stack([np.cos(eta) * np.exp(1j * phi1),
                     np.sin(eta) * np.exp(1j * phi2)], axis=1)


def direction_grid(dim: int, n: int, seed=0) -> np.ndarray:
    """Quasi-uniform direction grid on the unit sphere of C^dim.

    C^2 gets the deterministic Fibonacci-style lattice; higher dimensions
    fall back to a seeded Gaussian sphere sample.
    """
    if dim == 2:
        return fibonacci_sphere_s3(n)
    return sample_unit_sphere(rng_from(seed), dim, n)


def sample_interior(domain, rng, n, radial_power: float = 1.0) -> np.ndarray:
    """Seeded interior samples of a balanced domain: u/h(u) * r with r < 1."""
    from .domains import dim as domain_dim
    from .domains import minkowski_batch

    d = domain_dim(domain)
    u = sample_unit_sphere(rng, d, n)
    h = minkowski_batch(domain, u)
    # unbounded directions (h == 0) stay as drawn: they are interior on any ray
    scale = np.where(h > 0, 1.0 / np.where(h > 0, h, 1.0), 1.0)
    r = rng.uniform(0.0, 1.0, size=n) ** radial_power
    return u * (scale * r)[:, None]


RATIONAL_UNIMODULARS = (
    complex(1, 0), complex(-1, 0), complex(0, 1), complex(0, -1),
    complex(3, 4) / 5, complex(3, -4) / 5, complex(-3, 4) / 5,
    complex(5, 12) / 13, complex(8, -15) / 17, complex(20, 21) / 29,
)


def exact_unimodular(rng) -> complex:
    """A unimodular complex number with rational re/im (exact |w| = 1)."""
    return RATIONAL_UNIMODULARS[int(rng.integers(len(RATIONAL_UNIMODULARS)))]
