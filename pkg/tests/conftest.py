"""Shared problem instances, assembled and solved once per session.

Three regimes recur across the suite: the classical limit (beta = 0,
constant weight, diagnostic mode), the mixed operator with the
quarter-split sign-changing weight, and the pure-fractional operator
used for the exterior-residual refinement study.
"""

import numpy as np
import pytest

from mixneu import (OperatorParams, PiecewiseField, assemble, build_mesh,
                    solve_spectrum)


def constant_weight(a=0.0, b=1.0, value=1.0):
    return PiecewiseField(a, b, (), (value,), role="weight")


def quarter_weight(a=0.0, b=1.0):
    # +1 on the first quarter, -1 on the rest; integral is -1/2
    cut = a + 0.25 * (b - a)
    return PiecewiseField(a, b, (cut,), (1.0, -1.0), role="weight")


@pytest.fixture(scope="session")
def classical512():
    """beta = 0, m = 1 on (0,1): discrete Neumann Laplacian at n_in = 512."""
    mesh = build_mesh(0.0, 1.0, 512, 1.0, 8)
    params = OperatorParams(alpha=1.0, beta=0.0, s=0.5)
    forms = assemble(params, mesh, constant_weight())
    spectrum = solve_spectrum(forms, 5, 0, diagnostic=True)
    return mesh, forms, spectrum


@pytest.fixture(scope="session")
def signchange64():
    """Mixed operator, quarter-split weight, n_in = 64."""
    mesh = build_mesh(0.0, 1.0, 64, 1.0, 16)
    params = OperatorParams(alpha=1.0, beta=1.0, s=0.5)
    forms = assemble(params, mesh, quarter_weight())
    spectrum = solve_spectrum(forms, 3, 3)
    return mesh, forms, spectrum


@pytest.fixture(scope="session")
def signchange128():
    """One refinement of signchange64 (gap-stability checks)."""
    mesh = build_mesh(0.0, 1.0, 128, 1.0, 32)
    params = OperatorParams(alpha=1.0, beta=1.0, s=0.5)
    forms = assemble(params, mesh, quarter_weight())
    spectrum = solve_spectrum(forms, 3, 3)
    return mesh, forms, spectrum


@pytest.fixture(scope="session")
def signchange256_forms():
    """4x refinement of signchange64; feeds the brute-force eigen oracle."""
    mesh = build_mesh(0.0, 1.0, 256, 1.0, 64)
    params = OperatorParams(alpha=1.0, beta=1.0, s=0.5)
    return mesh, assemble(params, mesh, quarter_weight())


@pytest.fixture(scope="session")
def frac_family():
    """Pure-fractional principal pairs at three mesh levels.

    alpha = 0, beta = 1, s = 0.5 on (0,1) with the quarter-split weight;
    collar width 1 so the collar grid contains the probe node x = -0.5
    at every level.
    """
    out = []
    for n_in, n_col in ((32, 8), (64, 16), (128, 32)):
        mesh = build_mesh(0.0, 1.0, n_in, 1.0, n_col)
        params = OperatorParams(alpha=0.0, beta=1.0, s=0.5)
        forms = assemble(params, mesh, quarter_weight())
        spectrum = solve_spectrum(forms, 2, 0)
        out.append((mesh, forms, spectrum.positives[0]))
    return out
