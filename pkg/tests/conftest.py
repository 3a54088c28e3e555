import numpy as np
import pytest

from shrira_lab import spectral_core as sc
from shrira_lab.spectral_core import GridSpec


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


@pytest.fixture
def grid16():
    return GridSpec.square(16)


@pytest.fixture
def grid64():
    return GridSpec.square(64)


def convolve_oracle(f, g, band=None):
    """Exact coefficient convolution by looping over every mode pair.

    Returns a dict {(m, n): coefficient}, unrestricted in range.
    """
    fm, fn = f.grid.wavenumbers()
    out = {}
    fa = f.coeffs if band is None else f.coeffs * band
    ga = g.coeffs if band is None else g.coeffs * band
    fi = [(int(fm[i]), int(fn[i]), fa[i]) for i in zip(*np.nonzero(fa))]
    gi = [(int(fm[i]), int(fn[i]), ga[i]) for i in zip(*np.nonzero(ga))]
    for m1, n1, a in fi:
        for m2, n2, b in gi:
            key = (m1 + m2, n1 + n2)
            out[key] = out.get(key, 0) + a * b
    return out


def field_from_dict(d, grid, real=True):
    c = np.zeros(grid.shape, dtype=complex)
    hx, hy = grid.modes_x // 2, grid.modes_y // 2
    for (m, n), v in d.items():
        if -hx <= m < hx and -hy <= n < hy:
            c[m % grid.modes_x, n % grid.modes_y] = v
    return c


def rand(grid, rng, sigma=2.0, **kw):
    return sc.random_field(grid, sigma, rng, **kw)


ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda s: int(s.split()[2].rstrip(":"))):
            terminalreporter.write_line(line)
