"""Shared fixtures and independent closed-form oracles.

The oracles here are written directly from the physics, without calling
into the package, so tests compare two separate derivations.
"""

from __future__ import annotations

import numpy as np
import pytest
from hypothesis import strategies as st

SQ2 = np.sqrt(2.0)


def pol_vec(theta_deg: float) -> np.ndarray:
    """sin(theta)|v> + cos(theta)|h> in (v, h) order."""
    t = np.radians(theta_deg)
    return np.array([np.sin(t), np.cos(t)], dtype=complex)


def elliptical_vec(gamma_deg: float) -> np.ndarray:
    """QWP at gamma acting on |v>: [(1 + i cos 2g)|v> + sin 2g |h>] / sqrt2."""
    g = np.radians(2.0 * gamma_deg)
    return np.array([1.0 + 1j * np.cos(g), np.sin(g)]) / SQ2


def branch_oracle(alpha: complex, beta: complex) -> dict[str, np.ndarray]:
    """Bob's (v, h) state per Bell outcome, read off the four-term expansion."""
    return {
        "c+": np.array([beta, alpha]),
        "c-": np.array([-beta, alpha]),
        "d+": np.array([alpha, beta]),
        "d-": np.array([-alpha, beta]),
    }


def phase_free_fidelity(u: np.ndarray, v: np.ndarray) -> float:
    return float(abs(np.vdot(u, v)) ** 2 / (np.vdot(u, u).real * np.vdot(v, v).real))


def trine_t_bloch(r: np.ndarray, s: np.ndarray) -> float:
    """T for the trine from Bloch vectors of phi_c and Omega.

    The trine Bloch vectors n_a lie in the x-z plane at 0, 240, 120 degrees
    and sum_a n_a n_a^T = (3/2) P_xz, so
    T = sum_a (1 + n_a.r)(1 + n_a.s)/4 = (3 + 1.5 r_p.s_p) / 4.
    """
    rp = np.array([r[0], r[2]])
    sp = np.array([s[0], s[2]])
    return (3.0 + 1.5 * rp @ sp) / 4.0


def bloch(psi: np.ndarray) -> np.ndarray:
    """Bloch vector of a (v, h) state with z along h - v and x along the 45 degree diagonal."""
    psi = psi / np.linalg.norm(psi)
    v, h = psi
    x = 2.0 * (np.conj(v) * h).real
    y = 2.0 * (np.conj(v) * h).imag
    z = abs(h) ** 2 - abs(v) ** 2
    return np.array([x, y, z])


def binomial_stderr(f: float, n: float, cells: int = 12) -> float:
    return float(np.sqrt(f * (1.0 - f) / n) / np.sqrt(cells))


angles = st.floats(min_value=-180.0, max_value=180.0, allow_nan=False)
gammas = st.floats(min_value=-90.0, max_value=90.0, allow_nan=False)


@st.composite
def unit_qubits(draw):
    """Random normalized (alpha, beta), bounded away from the zero vector."""
    parts = [draw(st.floats(-1.0, 1.0, allow_nan=False)) for _ in range(4)]
    z = np.array([parts[0] + 1j * parts[1], parts[2] + 1j * parts[3]])
    n = np.linalg.norm(z)
    if n < 1e-3:
        z, n = np.array([1.0, 0.0], dtype=complex), 1.0
    z = z / n
    return complex(z[0]), complex(z[1])


@pytest.fixture
def rng():
    return np.random.default_rng(20261018)


# one line per acceptance criterion, echoed after the run
ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
