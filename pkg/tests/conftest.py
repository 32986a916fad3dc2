import numpy as np
import pytest
from hypothesis import HealthCheck, settings
from hypothesis import strategies as st

from plsgeom import EigenSpectrum, reference_spectrum

settings.register_profile("default", deadline=None, suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("default")

# Printed corner table for the exp(-|i-j|/3) spectrum: n, tau, omega_1..5, gdof, gdof_dp.
# Entries given in scientific notation or to one decimal are kept as printed.
CORNER_TABLE = """
2 1,2 1.00 1.00 0.49 0.30 0.23 3.03 3.67
2 1,3 1.00 1.96 1.00 0.62 0.47 5.05 3.65
2 1,4 1.00 3.12 1.61 1.00 0.76 7.50 0.05
2 1,5 1.00 4.06 2.11 1.31 1.00 9.48 -5.70
2 2,3 -14.15 1.00 1.00 0.69 0.54 -10.92 -224.84
2 2,4 -26.40 1.00 1.41 1.00 0.80 -22.19 -745.85
2 2,5 -36.27 1.00 1.74 1.25 1.00 -31.28 -1384.77
2 3,4 -81.42 -3.27 1.00 1.00 0.86 -81.83 -6807.00
2 3,5 -111.13 -5.15 1.00 1.14 1.00 -113.14 -12605.62
2 4,5 -201.77 -12.60 0.10 1.00 1.00 -212.27 -41297.69
3 1,2,3 1.00 1.00 1.00 0.71 0.57 4.28 4.73
3 1,2,4 1.00 1.00 1.36 1.00 0.81 5.16 4.84
3 1,2,5 1.00 1.00 1.64 1.23 1.00 5.88 4.53
3 1,3,4 1.00 -1.95 1.00 1.00 0.87 1.92 -3.73
3 1,3,5 1.00 -3.26 1.00 1.13 1.00 0.87 -13.13
3 1,4,5 1.00 -8.41 0.22 1.00 1.00 -5.19 -84.13
3 2,3,4 185.97 1.00 1.00 1.00 0.89 189.85 -34208.14
3 2,3,5 252.63 1.00 1.00 1.10 1.00 256.73 -63310.82
3 2,4,5 456.04 1.00 0.48 1.00 1.00 459.52 -207058.06
3 3,4,5 1369.96 19.9 1.00 1.00 1.00 1392.86 -1.87e6
4 1,2,3,4 1.00 1.00 1.00 1.00 0.89 4.89 4.99
4 1,2,3,5 1.00 1.00 1.00 1.10 1.00 5.10 4.99
4 1,2,4,5 1.00 1.00 0.55 1.00 1.00 4.55 4.79
4 1,3,4,5 1.00 14.07 1.00 1.00 1.00 18.07 -165.86
4 2,3,4,5 -3071.07 1.00 1.00 1.00 1.00 -3067.07 -9.44e6
"""


def corner_table_rows():
    rows = []
    for line in CORNER_TABLE.strip().splitlines():
        parts = line.split()
        rows.append((int(parts[0]), parts[1].replace(",", ";"), parts[2:]))
    return rows


def printed_tolerance(text: str) -> float:
    """+-0.01 for two-decimal entries, 0.5% relative for large or less precise ones."""
    value = float(text)
    if "e" in text or abs(value) >= 1000 or len(text.split(".")[-1]) != 2:
        return 0.005 * abs(value)
    return 0.01


@pytest.fixture(scope="session")
def ref_spectrum() -> EigenSpectrum:
    return reference_spectrum()


def random_spectrum(rng: np.random.Generator, m: int, min_log_gap: float = 0.1, max_log_gap: float = 0.6) -> EigenSpectrum:
    """Well separated decreasing eigenvalues with unit largest value."""
    gaps = rng.uniform(min_log_gap, max_log_gap, size=m - 1)
    return EigenSpectrum(np.exp(-np.concatenate(([0.0], np.cumsum(gaps)))))


@st.composite
def spectra(draw, min_m: int = 2, max_m: int = 8):
    m = draw(st.integers(min_m, max_m))
    gaps = draw(st.lists(st.floats(0.1, 0.6), min_size=m - 1, max_size=m - 1))
    scale = draw(st.floats(-2.0, 2.0))
    return EigenSpectrum(np.exp(scale - np.concatenate(([0.0], np.cumsum(gaps)))))


@st.composite
def positive_psi(draw, m: int):
    logs = draw(st.lists(st.floats(-3.0, 3.0), min_size=m, max_size=m))
    return np.exp(np.array(logs))


@st.composite
def spectrum_psi_n(draw, min_m: int = 2, max_m: int = 7):
    sp = draw(spectra(min_m, max_m))
    n = draw(st.integers(1, sp.m - 1))
    return sp, draw(positive_psi(sp.m)), n



ACCEPTANCE_LINES: list = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda s: int(s.split()[1].rstrip(":"))):
            terminalreporter.write_line(line)
