"""Mode-level unitaries, their Reck compilation, and their lift to Fock space.

A mode matrix ``U`` acts on creation operators as
``U a_j^dag U^dag = sum_i a_i^dag U[i, j]``, so a single photon in mode ``j``
goes to column ``j`` of ``U``. Mode matrices are plain ``numpy`` arrays.

Convention for the DFT interferometer: ``Omega[i, j] = exp(-2 pi i ij / N) / sqrt(N)``
(0-based; numpy's forward FFT matrix) and phases ``theta_j = 2 pi j / N`` with
``D = diag(exp(-i theta))``. With these, ``Omega^dag D Omega`` is exactly the
cyclic shift ``[V]_{ij} = delta_{i, j+1 mod N}``. For ``N = 2`` the matrix is
the real 50/50 coupler ``[[1, 1], [1, -1]] / sqrt(2)``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Union

import numpy as np
import scipy.linalg

from .errors import DimensionError, NumericalDiagnosticError
from .fock import CutoffConfig, FockBasis, MultiModeState, fock_basis, sector_basis
from .permanent import permanent_batch

UNITARY_TOL = 1e-12


def unitarity_residual(u) -> float:
    u = np.asarray(u)
    return float(np.max(np.abs(u.conj().T @ u - np.eye(u.shape[0]))))


def check_unitary(u, tol=1e-10) -> np.ndarray:
    u = np.asarray(u, dtype=complex)
    if u.ndim != 2 or u.shape[0] != u.shape[1]:
        raise DimensionError(f"mode matrix must be square, got shape {u.shape}")
    res = unitarity_residual(u)
    if res > tol:
        raise NumericalDiagnosticError(f"mode matrix is not unitary (residual {res:.3e})", res)
    return u


def _root_of_unity(r: int, n: int) -> complex:
    """``exp(-2 pi i r / n)``, exact at the quarter turns."""
    r %= n
    if r == 0:
        return 1 + 0j
    if 2 * r == n:
        return -1 + 0j
    if 4 * r == n:
        return -1j
    if 4 * r == 3 * n:
        return 1j
    return complex(np.exp(-2j * np.pi * r / n))


def dft_matrix(N: int) -> np.ndarray:
    if N < 2:
        raise ValueError(f"the DFT interferometer needs N >= 2 oscillators, got N={N}")
    i = np.arange(N)
    table = np.array([_root_of_unity(r, N) for r in range(N)])
    return table[np.outer(i, i) % N] / math.sqrt(N)


def cyclic_shift_matrix(N: int) -> np.ndarray:
    """Mode matrix of the cyclic swap: photon in mode ``j`` moves to ``j + 1 mod N``."""
    v = np.zeros((N, N), dtype=complex)
    v[(np.arange(N) + 1) % N, np.arange(N)] = 1
    return v


@dataclass(frozen=True)
class PhaseVector:
    """Measurement phases ``theta_j`` in radians.

    When ``steps``/``denominator`` are set, ``theta_j = 2 pi steps_j / denominator``
    and weights are evaluated from an exact root-of-unity table.
    """

    theta: tuple[float, ...]
    steps: tuple[int, ...] | None = None
    denominator: int | None = None

    def __post_init__(self):
        object.__setattr__(self, "theta", tuple(float(t) for t in self.theta))
        if self.steps is not None:
            object.__setattr__(self, "steps", tuple(int(s) for s in self.steps))
            if len(self.steps) != len(self.theta):
                raise DimensionError("steps and theta lengths differ")

    def __len__(self):
        return len(self.theta)

    def diagonal(self, k: int = 1) -> np.ndarray:
        """Diagonal of the mode-level phase matrix ``D^k``."""
        if self.steps is not None:
            return np.array([_root_of_unity(k * s, self.denominator) for s in self.steps])
        return np.exp(-1j * k * np.asarray(self.theta))

    def repeat(self, width: int) -> "PhaseVector":
        """Each phase repeated ``width`` times (one per mode of a multi-mode slot)."""
        rep = lambda xs: tuple(x for x in xs for _ in range(width))
        steps = rep(self.steps) if self.steps is not None else None
        return PhaseVector(rep(self.theta), steps, self.denominator)


def phase_vector(N: int) -> PhaseVector:
    if N < 2:
        raise ValueError(f"phase vector needs N >= 2, got N={N}")
    return PhaseVector(tuple(2 * math.pi * j / N for j in range(N)), tuple(range(N)), N)


def verify_diagonalization(omega, theta: PhaseVector) -> float:
    """Max-entry residual ``|| Omega^dag D Omega - V_N ||``."""
    omega = np.asarray(omega)
    N = omega.shape[0]
    if len(theta) != N:
        raise DimensionError(f"phase vector has {len(theta)} entries, matrix is {N}x{N}")
    lhs = omega.conj().T @ np.diag(theta.diagonal()) @ omega
    return float(np.max(np.abs(lhs - cyclic_shift_matrix(N))))


def slot_dft_matrix(N: int, slot_modes: int = 1) -> np.ndarray:
    """DFT across ``N`` slots applied separately to each internal mode of a slot."""
    return np.kron(dft_matrix(N), np.eye(slot_modes))


def slot_shift_matrix(N: int, slot_modes: int = 1) -> np.ndarray:
    return np.kron(cyclic_shift_matrix(N), np.eye(slot_modes))


# ---------------------------------------------------------------- Reck mesh


@dataclass(frozen=True)
class TwoModeRotation:
    """Acts on modes ``(p, q)`` with block ``[[e^{i phi} cos t, -sin t], [e^{i phi} sin t, cos t]]``."""

    modes: tuple[int, int]
    angle: float
    phase: float

    def matrix(self, N: int) -> np.ndarray:
        p, q = self.modes
        c, s, e = math.cos(self.angle), math.sin(self.angle), np.exp(1j * self.phase)
        m = np.eye(N, dtype=complex)
        m[p, p], m[p, q] = e * c, -s
        m[q, p], m[q, q] = e * s, c
        return m


@dataclass(frozen=True)
class SinglePhase:
    mode: int
    phase: float

    def matrix(self, N: int) -> np.ndarray:
        m = np.eye(N, dtype=complex)
        m[self.mode, self.mode] = np.exp(1j * self.phase)
        return m


Element = Union[TwoModeRotation, SinglePhase]


@dataclass(frozen=True)
class ReckPlan:
    """Elements in the order light meets them; the unitary is ``M_last ... M_first``."""

    dim: int
    elements: tuple[Element, ...] = field(default_factory=tuple)

    @property
    def rotations(self) -> list[TwoModeRotation]:
        return [e for e in self.elements if isinstance(e, TwoModeRotation)]

    @property
    def phases(self) -> list[SinglePhase]:
        return [e for e in self.elements if isinstance(e, SinglePhase)]


def reck_decompose(u, tol=1e-10, skip_tol=1e-15) -> ReckPlan:
    """Triangular factorization into nearest-neighbour rotations and output phases.

    Elements below row ``i`` are nulled left to right by right-multiplying with
    inverse rotations on columns ``(j, j+1)``, rows processed bottom-up. What
    remains is diagonal. Rotations that would be the identity are skipped.
    """
    u = check_unitary(u, tol)
    N = u.shape[0]
    work = u.copy()
    applied = []
    for i in range(N - 1, 0, -1):
        for j in range(i):
            a, b = work[i, j], work[i, j + 1]
            if abs(a) <= skip_tol:
                continue
            angle = math.atan2(abs(a), abs(b))
            phase = float(np.angle(a) - np.angle(b)) if abs(b) > skip_tol else float(np.angle(a))
            rot = TwoModeRotation((j, j + 1), angle, phase)
            work = work @ rot.matrix(N).conj().T
            work[i, j] = 0
            applied.append(rot)
    phases = tuple(SinglePhase(m, float(np.angle(work[m, m]))) for m in range(N))
    # u = D T_K ... T_1, so T_1 is met first
    return ReckPlan(N, tuple(applied) + phases)


def reck_reconstruct(plan: ReckPlan) -> np.ndarray:
    u = np.eye(plan.dim, dtype=complex)
    for el in plan.elements:
        u = el.matrix(plan.dim) @ u
    return u


# ---------------------------------------------------------------- Fock lift


@dataclass(frozen=True, eq=False)
class FockUnitary:
    """Block-diagonal operator on a truncated Fock space, one block per sector."""

    blocks: tuple[np.ndarray, ...]
    cutoff: CutoffConfig

    @property
    def basis(self) -> FockBasis:
        return fock_basis(self.cutoff)

    def dense(self) -> np.ndarray:
        return scipy.linalg.block_diag(*self.blocks)

    def dagger(self) -> "FockUnitary":
        return FockUnitary(tuple(b.conj().T for b in self.blocks), self.cutoff)

    def __matmul__(self, other: "FockUnitary") -> "FockUnitary":
        if other.cutoff != self.cutoff:
            raise DimensionError("cutoff mismatch in composition")
        return FockUnitary(tuple(a @ b for a, b in zip(self.blocks, other.blocks)), self.cutoff)

    def apply_vector(self, psi: np.ndarray) -> np.ndarray:
        b = self.basis
        out = np.empty_like(psi, dtype=complex)
        for n, blk in enumerate(self.blocks):
            sl = b.sector_slice(n)
            out[sl] = blk @ psi[sl]
        return out

    def conjugate_matrix(self, rho: np.ndarray) -> np.ndarray:
        """``L rho L^dag`` computed block pair by block pair."""
        b = self.basis
        out = np.empty_like(rho, dtype=complex)
        for n, bn in enumerate(self.blocks):
            sn = b.sector_slice(n)
            left = bn @ rho[sn, :]
            for m, bm in enumerate(self.blocks):
                sm = b.sector_slice(m)
                out[sn, sm] = left[:, sm] @ bm.conj().T
        return out

    def diagonal_blocks_conjugated(self, rho: np.ndarray) -> list[np.ndarray]:
        """Only the sector-diagonal blocks of ``L rho L^dag``."""
        b = self.basis
        out = []
        for n, bn in enumerate(self.blocks):
            sn = b.sector_slice(n)
            out.append(bn @ rho[sn, sn] @ bn.conj().T)
        return out


def _repeat_index(occupations: np.ndarray) -> np.ndarray:
    """Row of mode labels, each mode repeated by its occupation."""
    return np.array([np.repeat(np.arange(len(o)), o) for o in occupations], dtype=np.int64)


def _factorial_norm(occupations: np.ndarray) -> np.ndarray:
    return np.sqrt(np.array([math.prod(math.factorial(int(k)) for k in o) for o in occupations], dtype=float))


def _lift_sector_permanent(u: np.ndarray, n: int, chunk=4096) -> np.ndarray:
    occ = np.array(sector_basis(n, u.shape[0]).elements, dtype=np.int64)
    S = len(occ)
    if n == 0:
        return np.ones((1, 1), dtype=complex)
    rows = _repeat_index(occ)  # (S, n)
    norms = _factorial_norm(occ)
    out = np.empty((S, S), dtype=complex)
    pairs = np.array([(a, b) for a in range(S) for b in range(S)], dtype=np.int64)
    for start in range(0, len(pairs), chunk):
        p = pairs[start:start + chunk]
        sub = u[rows[p[:, 0]][:, :, None], rows[p[:, 1]][:, None, :]]
        out[p[:, 0], p[:, 1]] = permanent_batch(sub)
    return out / np.outer(norms, norms)


def _sector_creation(n: int, N: int, mode: int) -> np.ndarray:
    """``a^dag_mode`` from sector ``n`` to sector ``n + 1``."""
    lo, hi = sector_basis(n, N), sector_basis(n + 1, N)
    op = np.zeros((len(hi), len(lo)))
    for i, occ in enumerate(lo.elements):
        tgt = list(occ)
        tgt[mode] += 1
        op[hi.index_of[tuple(tgt)], i] = math.sqrt(tgt[mode])
    return op


def _sector_hopping(n: int, N: int, h: np.ndarray) -> np.ndarray:
    """Matrix of ``sum_ij h[i, j] a_i^dag a_j`` inside sector ``n``."""
    sb = sector_basis(n, N)
    out = np.zeros((len(sb), len(sb)), dtype=complex)
    for col, occ in enumerate(sb.elements):
        for j in range(N):
            if occ[j] == 0:
                continue
            for i in range(N):
                tgt = list(occ)
                tgt[j] -= 1
                amp = math.sqrt(occ[j]) * math.sqrt(tgt[i] + 1)
                tgt[i] += 1
                out[sb.index_of[tuple(tgt)], col] += h[i, j] * amp
    return out


def mode_generator(u) -> np.ndarray:
    """Hermitian ``h`` with ``expm(-1j h) = u`` (principal branch, Schur based)."""
    t, z = scipy.linalg.schur(np.asarray(u, dtype=complex), output="complex")
    # u is normal, so its complex Schur form is diagonal
    log_diag = np.log(np.diag(t))
    h = 1j * (z * log_diag) @ z.conj().T
    return (h + h.conj().T) / 2


def _lift_generator(u: np.ndarray, n_max: int) -> list[np.ndarray]:
    h = mode_generator(u)
    blocks = []
    for n in range(n_max + 1):
        hn = _sector_hopping(n, u.shape[0], h)
        w, v = np.linalg.eigh((hn + hn.conj().T) / 2)
        blocks.append((v * np.exp(-1j * w)) @ v.conj().T)
    return blocks


def _lift_recursive(u: np.ndarray, n_max: int) -> list[np.ndarray]:
    # U_F |n> = (U a_j^dag U^dag) U_F |n - e_j> / sqrt(n_j), j = first occupied mode
    N = u.shape[0]
    blocks = [np.ones((1, 1), dtype=complex)]
    for n in range(1, n_max + 1):
        lo, hi = sector_basis(n - 1, N), sector_basis(n, N)
        prev = blocks[-1]
        creators = [_sector_creation(n - 1, N, i) for i in range(N)]
        blk = np.empty((len(hi), len(hi)), dtype=complex)
        by_mode: dict[int, list[tuple[int, int, float]]] = {}
        for col, occ in enumerate(hi.elements):
            j = next(m for m, k in enumerate(occ) if k)
            parent = list(occ)
            parent[j] -= 1
            by_mode.setdefault(j, []).append((col, lo.index_of[tuple(parent)], math.sqrt(occ[j])))
        for j, entries in by_mode.items():
            cols = [c for c, _, _ in entries]
            parents = [p for _, p, _ in entries]
            scale = np.array([s for _, _, s in entries])
            moved = sum(u[i, j] * creators[i] for i in range(N))
            blk[:, cols] = (moved @ prev[:, parents]) / scale
        blocks.append(blk)
    return blocks


LIFT_METHODS = ("permanent", "generator", "recursive", "auto")
PERMANENT_MAX_PHOTONS = 8


def lift_to_fock(u, cutoff: CutoffConfig, method: str = "permanent") -> FockUnitary:
    """Second-quantized action of the mode unitary ``u`` on every sector.

    ``permanent`` evaluates ``perm(U[m|n]) / sqrt(prod m_i! n_i!)`` per entry,
    ``generator`` exponentiates the lifted quadratic Hamiltonian, ``recursive``
    builds each column by applying transformed creation operators. ``auto``
    uses permanents up to 8 photons and recursion above.
    """
    u = check_unitary(u)
    if u.shape[0] != cutoff.mode_count:
        raise DimensionError(f"{u.shape[0]}x{u.shape[0]} mode matrix on {cutoff.mode_count} modes")
    if method == "permanent":
        blocks = [_lift_sector_permanent(u, n) for n in range(cutoff.max_total_photons + 1)]
    elif method == "generator":
        blocks = _lift_generator(u, cutoff.max_total_photons)
    elif method == "recursive":
        blocks = _lift_recursive(u, cutoff.max_total_photons)
    elif method == "auto":
        top = min(cutoff.max_total_photons, PERMANENT_MAX_PHOTONS)
        blocks = [_lift_sector_permanent(u, n) for n in range(top + 1)]
        if cutoff.max_total_photons > top:
            blocks += _lift_recursive(u, cutoff.max_total_photons)[top + 1:]
    else:
        raise ValueError(f"unknown lift method {method!r}; choose from {LIFT_METHODS}")
    return FockUnitary(tuple(blocks), cutoff)


@lru_cache(maxsize=32)
def dft_lift(N: int, slot_modes: int, n_max: int) -> FockUnitary:
    """Cached Fock lift of the slot DFT interferometer."""
    return lift_to_fock(slot_dft_matrix(N, slot_modes), CutoffConfig(n_max, N * slot_modes), method="auto")


def lift_phase_diag(theta: PhaseVector, k: int, cutoff: CutoffConfig) -> np.ndarray:
    """Diagonal of ``D^k`` on the occupation basis: ``prod_j exp(-i k theta_j n_j)``."""
    if len(theta) != cutoff.mode_count:
        raise DimensionError(f"{len(theta)} phases for {cutoff.mode_count} modes")
    occ = fock_basis(cutoff).occupations
    if theta.steps is not None:
        residues = (k * occ @ np.array(theta.steps)) % theta.denominator
        table = np.array([_root_of_unity(r, theta.denominator) for r in range(theta.denominator)])
        return table[residues]
    return np.exp(-1j * k * (occ @ np.asarray(theta.theta)))


def apply_to_state(lift: FockUnitary, state: MultiModeState) -> MultiModeState:
    if lift.cutoff != state.cutoff:
        raise DimensionError(f"lift cutoff {lift.cutoff} does not match state cutoff {state.cutoff}")
    if state.is_pure:
        data = lift.apply_vector(state.data)
    else:
        data = lift.conjugate_matrix(state.data)
    return MultiModeState(state.kind, data, state.cutoff, state.truncation_error)
