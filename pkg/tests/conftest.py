import itertools
import math

import numpy as np
import pytest
from scipy.stats import unitary_group

from oscswap.fock import CutoffConfig, MultiModeState, fock_basis


@pytest.fixture
def rng():
    return np.random.default_rng(20051007)


def haar(n, seed):
    if n == 1:
        return np.array([[np.exp(1j * 0.7 * (seed + 1))]])
    return unitary_group.rvs(n, random_state=seed)


def grid_density(state: MultiModeState) -> np.ndarray:
    """Density matrix on the full product grid, levels 0..n_max per mode."""
    L = state.n_max + 1
    N = state.mode_count
    occ = fock_basis(state.cutoff).occupations
    flat = np.ravel_multi_index(occ.T, (L,) * N)
    rho = state.density_matrix()
    out = np.zeros((L ** N, L ** N), dtype=complex)
    out[np.ix_(flat, flat)] = rho
    return out


def grid_partial_trace(rho_grid, L, N, keep):
    t = rho_grid.reshape((L,) * (2 * N))
    traced = [m for m in range(N) if m not in keep]
    letters = "abcdefghijklmnopqrstuvwxyz"
    row = list(letters[:N])
    col = list(letters[N:2 * N])
    for m in traced:
        col[m] = row[m]
    out = "".join(row[m] for m in keep) + "".join(col[m] for m in keep)
    red = np.einsum("".join(row) + "".join(col) + "->" + out, t)
    k = L ** len(keep)
    return red.reshape(k, k)


def brute_fock_lift(u, cutoff: CutoffConfig):
    """Lift by expanding prod_j (sum_i u_ij a_i^dag)^{n_j} / sqrt(n_j!) on vacuum.

    Polynomials in creation operators are dicts {exponent tuple: coeff}.
    """
    N = cutoff.mode_count
    b = fock_basis(cutoff)
    out = np.zeros((b.dim, b.dim), dtype=complex)
    for col, n in enumerate(b.occupations.tolist()):
        poly = {(0,) * N: 1.0 + 0j}
        for j, nj in enumerate(n):
            for _ in range(nj):
                new = {}
                for mono, c in poly.items():
                    for i in range(N):
                        m = list(mono)
                        m[i] += 1
                        m = tuple(m)
                        new[m] = new.get(m, 0) + c * u[i, j]
                poly = new
            poly = {m: c / math.sqrt(math.factorial(nj)) for m, c in poly.items()}
        for mono, c in poly.items():
            # (a^dag)^m |0> = sqrt(m!) |m>
            out[b.index[mono], col] += c * math.sqrt(math.prod(math.factorial(x) for x in mono))
    return out


def pytest_terminal_summary(terminalreporter):
    lines = []
    for reports in terminalreporter.stats.values():
        for rep in reports:
            if getattr(rep, "when", None) != "call":
                continue
            lines += [v for k, v in getattr(rep, "user_properties", []) if k == "acceptance"]
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in sorted(lines):
            terminalreporter.write_line(line)
