"""Random materials and fields shared by several test modules."""

import numpy as np

from orthoplate.elasticity import OrthotropicConstants, TransverselyIsotropicConstants, MaterialError, delta
from orthoplate.fields import modal_field


def random_orthotropic(rng) -> OrthotropicConstants:
    """Admissible orthotropic constants with moduli in [1e9, 1e11] Pa."""
    while True:
        E = 10.0 ** rng.uniform(9, 11, size=3)
        nu12, nu13, nu23 = rng.uniform(0.05, 0.45, size=3)
        mu = 10.0 ** rng.uniform(8.5, 10.5, size=3)
        try:
            k = OrthotropicConstants.from_mapping(
                dict(E1=E[0], E2=E[1], E3=E[2], nu12=nu12, nu13=nu13, nu23=nu23,
                     mu12=mu[0], mu13=mu[1], mu23=mu[2])
            )
            delta(k)
        except MaterialError:
            continue
        return k


def random_transverse(rng) -> TransverselyIsotropicConstants:
    E2 = 10.0 ** rng.uniform(9, 10)
    E1 = E2 * 10.0 ** rng.uniform(0.1, 2.5)
    return TransverselyIsotropicConstants(
        E1, E2, rng.uniform(0.05, 0.45), rng.uniform(-0.5, 0.5), 10.0 ** rng.uniform(8.5, 10)
    )


def random_modal_field(rng, L, ell, nx=101, ny=21, terms=3):
    """Smooth hinged field ``sum a_m sin(m pi x / L) P_m(y)`` with cubic ``P_m``."""
    x = np.linspace(0.0, L, nx)
    y = np.linspace(-ell, ell, ny)
    parts = []
    for m in rng.choice(np.arange(1, 7), size=terms, replace=False):
        c = rng.normal(size=4)
        s = y / ell
        P = c[0] + c[1] * s + c[2] * s**2 + c[3] * s**3
        P1 = (c[1] + 2 * c[2] * s + 3 * c[3] * s**2) / ell
        P2 = (2 * c[2] + 6 * c[3] * s) / ell**2
        P3 = np.full_like(y, 6 * c[3] / ell**3)
        P4 = np.zeros_like(y)
        parts.append((m * np.pi / L, rng.normal(), np.vstack([P, P1, P2, P3, P4])))
    return modal_field(x, y, parts)
