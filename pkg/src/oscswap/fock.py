"""Truncated multi-mode Fock space.

The Hilbert space of ``N`` modes is cut at a global total photon number
``n_max``. Basis vectors are occupation tuples, grouped in sectors of fixed
total photon number (sectors ascending, lexicographically descending inside a
sector). Passive linear optics preserves every sector, so evolution stays
exact under this truncation.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Iterable, Sequence

import numpy as np

from .errors import CutoffError, DimensionError, NumericalDiagnosticError

HERMITIAN_TOL = 1e-12
TRACE_TOL = 1e-12
PSD_TOL = 1e-10


@dataclass(frozen=True)
class CutoffConfig:
    max_total_photons: int
    mode_count: int

    def __post_init__(self):
        if int(self.max_total_photons) != self.max_total_photons or self.max_total_photons < 0:
            raise CutoffError(f"max_total_photons must be a nonnegative integer, got {self.max_total_photons!r}")
        if int(self.mode_count) != self.mode_count or self.mode_count < 1:
            raise CutoffError(f"mode_count must be a positive integer, got {self.mode_count!r}")
        object.__setattr__(self, "max_total_photons", int(self.max_total_photons))
        object.__setattr__(self, "mode_count", int(self.mode_count))

    @property
    def n_max(self) -> int:
        return self.max_total_photons

    @property
    def dim(self) -> int:
        return math.comb(self.max_total_photons + self.mode_count, self.mode_count)


@dataclass(frozen=True)
class SectorBasis:
    total_photons: int
    elements: tuple[tuple[int, ...], ...]
    index_of: dict = field(init=False, repr=False, compare=False, hash=False)

    def __post_init__(self):
        object.__setattr__(self, "index_of", {occ: i for i, occ in enumerate(self.elements)})

    def __len__(self):
        return len(self.elements)


def _compositions(total: int, parts: int):
    # lexicographically descending
    if parts == 1:
        yield (total,)
        return
    for first in range(total, -1, -1):
        for rest in _compositions(total - first, parts - 1):
            yield (first,) + rest


@lru_cache(maxsize=None)
def sector_basis(total_photons: int, mode_count: int) -> SectorBasis:
    return SectorBasis(total_photons, tuple(_compositions(total_photons, mode_count)))


def enumerate_basis(cutoff: CutoffConfig) -> list[SectorBasis]:
    """All photon-number sectors ``0..n_max`` of ``cutoff``, in canonical order."""
    return [sector_basis(n, cutoff.mode_count) for n in range(cutoff.max_total_photons + 1)]


@dataclass(frozen=True, eq=False)
class FockBasis:
    """Concatenated basis over all sectors, with global index lookups."""

    cutoff: CutoffConfig
    sectors: tuple[SectorBasis, ...]
    occupations: np.ndarray
    offsets: tuple[int, ...]
    index: dict

    @property
    def dim(self) -> int:
        return self.offsets[-1]

    def sector_slice(self, n: int) -> slice:
        return slice(self.offsets[n], self.offsets[n + 1])

    def photon_numbers(self) -> np.ndarray:
        return self.occupations.sum(axis=1)


@lru_cache(maxsize=None)
def fock_basis(cutoff: CutoffConfig) -> FockBasis:
    sectors = tuple(enumerate_basis(cutoff))
    offsets = [0]
    for s in sectors:
        offsets.append(offsets[-1] + len(s))
    occ = np.array([e for s in sectors for e in s.elements], dtype=np.int64).reshape(-1, cutoff.mode_count)
    occ.flags.writeable = False
    index = {e: i for i, e in enumerate(map(tuple, occ.tolist()))}
    return FockBasis(cutoff, sectors, occ, tuple(offsets), index)


def _frozen(a: np.ndarray) -> np.ndarray:
    a = np.array(a, dtype=complex)
    a.flags.writeable = False
    return a


@dataclass(frozen=True, eq=False)
class MultiModeState:
    """Pure state vector or density matrix over ``fock_basis(cutoff)``.

    ``truncation_error`` carries the norm dropped when the state was built
    from an untruncated expression (coherent states); it is a caveat, not an
    error.
    """

    kind: str
    data: np.ndarray
    cutoff: CutoffConfig
    truncation_error: float = 0.0

    def __post_init__(self):
        if self.kind not in ("pure", "mixed"):
            raise ValueError(f"kind must be 'pure' or 'mixed', got {self.kind!r}")
        data = _frozen(self.data)
        d = self.cutoff.dim
        expected = (d,) if self.kind == "pure" else (d, d)
        if data.shape != expected:
            raise DimensionError(f"{self.kind} state over {d} basis states needs shape {expected}, got {data.shape}")
        object.__setattr__(self, "data", data)

    @property
    def mode_count(self) -> int:
        return self.cutoff.mode_count

    @property
    def n_max(self) -> int:
        return self.cutoff.max_total_photons

    @property
    def dim(self) -> int:
        return self.cutoff.dim

    @property
    def basis(self) -> FockBasis:
        return fock_basis(self.cutoff)

    @property
    def is_pure(self) -> bool:
        return self.kind == "pure"

    def sector_block(self, n: int) -> np.ndarray:
        sl = self.basis.sector_slice(n)
        return self.data[sl] if self.is_pure else self.data[sl, sl]

    def density_matrix(self) -> np.ndarray:
        if self.is_pure:
            return np.outer(self.data, self.data.conj())
        return self.data

    def trace(self) -> float:
        if self.is_pure:
            return float(np.vdot(self.data, self.data).real)
        return float(np.trace(self.data).real)


def check_density(rho: np.ndarray, tol_herm=HERMITIAN_TOL, tol_trace=TRACE_TOL, tol_psd=PSD_TOL):
    herm = np.max(np.abs(rho - rho.conj().T)) if rho.size else 0.0
    if herm >= tol_herm:
        raise NumericalDiagnosticError(f"density matrix is not Hermitian (max deviation {herm:.3e})", herm)
    tr = np.trace(rho)
    if abs(tr - 1) > tol_trace:
        raise NumericalDiagnosticError(f"density matrix trace is {tr.real:.15g}, expected 1", abs(tr - 1))
    lo = np.linalg.eigvalsh((rho + rho.conj().T) / 2).min()
    if lo < -tol_psd:
        raise NumericalDiagnosticError(f"density matrix has negative eigenvalue {lo:.3e}", -lo)


def pure_state(amplitudes, cutoff: CutoffConfig, normalize=True, truncation_error=0.0) -> MultiModeState:
    psi = np.asarray(amplitudes, dtype=complex)
    if normalize:
        norm = np.linalg.norm(psi)
        if norm == 0:
            raise NumericalDiagnosticError("cannot normalize the zero vector")
        psi = psi / norm
    return MultiModeState("pure", psi, cutoff, truncation_error)


def density_state(matrix, cutoff: CutoffConfig, check=True, truncation_error=0.0) -> MultiModeState:
    rho = np.asarray(matrix, dtype=complex)
    if check:
        check_density(rho)
    return MultiModeState("mixed", rho, cutoff, truncation_error)


def single_mode_density(matrix) -> MultiModeState:
    """Density matrix of one mode in the number basis ``|0>, |1>, ... |d-1>``."""
    rho = np.asarray(matrix, dtype=complex)
    if rho.ndim != 2 or rho.shape[0] != rho.shape[1] or rho.shape[0] < 1:
        raise DimensionError(f"single-mode density matrix must be square, got shape {rho.shape}")
    return density_state(rho, CutoffConfig(rho.shape[0] - 1, 1))


def fock_state(cutoff: CutoffConfig, occ: Sequence[int]) -> MultiModeState:
    occ = tuple(int(n) for n in occ)
    if len(occ) != cutoff.mode_count:
        raise DimensionError(f"occupation {occ} has {len(occ)} modes, cutoff has {cutoff.mode_count}")
    if any(n < 0 for n in occ):
        raise CutoffError(f"occupation {occ} has a negative entry")
    if sum(occ) > cutoff.max_total_photons:
        raise CutoffError(
            f"occupation {occ} lies in sector {sum(occ)} but the cutoff keeps sectors 0..{cutoff.max_total_photons}"
        )
    psi = np.zeros(cutoff.dim, dtype=complex)
    psi[fock_basis(cutoff).index[occ]] = 1.0
    return MultiModeState("pure", psi, cutoff)


def vacuum(cutoff: CutoffConfig) -> MultiModeState:
    return fock_state(cutoff, (0,) * cutoff.mode_count)


def superpose(terms: Iterable[tuple[complex, MultiModeState]]) -> MultiModeState:
    """Normalized linear combination of pure states sharing one cutoff."""
    terms = list(terms)
    if not terms:
        raise ValueError("superpose needs at least one term")
    cutoff = terms[0][1].cutoff
    psi = np.zeros(cutoff.dim, dtype=complex)
    for c, s in terms:
        if not s.is_pure:
            raise ValueError("superpose only accepts pure states")
        if s.cutoff != cutoff:
            raise DimensionError(f"cutoff mismatch in superposition: {s.cutoff} vs {cutoff}")
        psi += complex(c) * s.data
    if np.linalg.norm(psi) < 1e-14:
        raise NumericalDiagnosticError("superposition vanishes (zero vector)")
    return pure_state(psi, cutoff)


def embed(state: MultiModeState, max_total_photons: int, drop_tol=1e-12) -> MultiModeState:
    """Re-express ``state`` under a different total-photon cutoff.

    Raising the cutoff pads with zeros. Lowering it is allowed only when the
    discarded weight is below ``drop_tol``.
    """
    if max_total_photons == state.n_max:
        return state
    new = CutoffConfig(max_total_photons, state.mode_count)
    keep = min(new.dim, state.dim)  # sectors share a common prefix
    if state.is_pure:
        dropped = float(np.sum(np.abs(state.data[keep:]) ** 2))
        data = np.zeros(new.dim, dtype=complex)
        data[:keep] = state.data[:keep]
    else:
        dropped = float(np.sum(np.diag(state.data)[keep:].real))
        data = np.zeros((new.dim, new.dim), dtype=complex)
        data[:keep, :keep] = state.data[:keep, :keep]
    if dropped > drop_tol:
        raise CutoffError(
            f"lowering cutoff {state.n_max} -> {max_total_photons} would drop weight {dropped:.3e}"
        )
    return MultiModeState(state.kind, data, new, state.truncation_error)


def _product_index(ca: CutoffConfig, cb: CutoffConfig, cc: CutoffConfig) -> np.ndarray:
    ba, bb, bc = fock_basis(ca), fock_basis(cb), fock_basis(cc)
    oa, ob = ba.occupations.tolist(), bb.occupations.tolist()
    return np.array([bc.index[tuple(x + y)] for x in oa for y in ob], dtype=np.int64)


def tensor(a: MultiModeState, b: MultiModeState) -> MultiModeState:
    """Tensor product; modes of ``a`` come first, cutoffs add."""
    cc = CutoffConfig(a.n_max + b.n_max, a.mode_count + b.mode_count)
    idx = _product_index(a.cutoff, b.cutoff, cc)
    trunc = 1 - (1 - a.truncation_error) * (1 - b.truncation_error)
    if a.is_pure and b.is_pure:
        psi = np.zeros(cc.dim, dtype=complex)
        psi[idx] = np.kron(a.data, b.data)
        return MultiModeState("pure", psi, cc, trunc)
    rho = np.zeros((cc.dim, cc.dim), dtype=complex)
    rho[np.ix_(idx, idx)] = np.kron(a.density_matrix(), b.density_matrix())
    return MultiModeState("mixed", rho, cc, trunc)


def tensor_power(s: MultiModeState, copies: int) -> MultiModeState:
    out = s
    for _ in range(copies - 1):
        out = tensor(out, s)
    return out


def to_density(s: MultiModeState) -> MultiModeState:
    if not s.is_pure:
        return s
    return MultiModeState("mixed", s.density_matrix(), s.cutoff, s.truncation_error)


def partial_trace(s: MultiModeState, keep: Iterable[int], max_total_photons: int | None = None) -> MultiModeState:
    """Reduced density operator on the modes in ``keep`` (kept in ascending order).

    The result inherits the input cutoff unless ``max_total_photons`` asks for a
    smaller one (see :func:`embed` for the drop check).
    """
    keep = sorted(set(int(k) for k in keep))
    if not keep:
        raise ValueError("partial_trace needs at least one mode to keep")
    if keep[0] < 0 or keep[-1] >= s.mode_count:
        raise DimensionError(f"keep={keep} out of range for {s.mode_count} modes")
    if len(keep) == s.mode_count:
        out = to_density(s)
    else:
        traced = [m for m in range(s.mode_count) if m not in keep]
        basis = s.basis
        ck = CutoffConfig(s.n_max, len(keep))
        kb = fock_basis(ck)
        occ = basis.occupations
        k_idx = np.array([kb.index[t] for t in map(tuple, occ[:, keep].tolist())])
        groups: dict[tuple, list[int]] = {}
        for i, t in enumerate(map(tuple, occ[:, traced].tolist())):
            groups.setdefault(t, []).append(i)
        rho_red = np.zeros((ck.dim, ck.dim), dtype=complex)
        if s.is_pure:
            psi = s.data
            for rows in groups.values():
                v = np.zeros(ck.dim, dtype=complex)
                v[k_idx[rows]] = psi[rows]
                rho_red += np.outer(v, v.conj())
        else:
            rho = s.data
            for rows in groups.values():
                kk = k_idx[rows]
                rho_red[np.ix_(kk, kk)] += rho[np.ix_(rows, rows)]
        out = MultiModeState("mixed", rho_red, ck, s.truncation_error)
    if max_total_photons is not None:
        out = embed(out, max_total_photons)
    return out


def inner(a: MultiModeState, b: MultiModeState) -> complex:
    """``<a|b>`` for pure states of equal mode count (cutoffs are aligned by padding)."""
    if not (a.is_pure and b.is_pure):
        raise ValueError("inner product needs pure states")
    if a.mode_count != b.mode_count:
        raise DimensionError(f"mode count mismatch: {a.mode_count} vs {b.mode_count}")
    n = max(a.n_max, b.n_max)
    return complex(np.vdot(embed(a, n).data, embed(b, n).data))


def align(a: MultiModeState, b: MultiModeState) -> tuple[MultiModeState, MultiModeState]:
    if a.mode_count != b.mode_count:
        raise DimensionError(f"mode count mismatch: {a.mode_count} vs {b.mode_count}")
    n = max(a.n_max, b.n_max)
    return embed(a, n), embed(b, n)


def coherent_state(alpha: complex, n_max: int) -> MultiModeState:
    """Single-mode coherent state truncated at ``n_max`` and renormalized.

    The dropped tail weight ``1 - sum_{n<=n_max} |c_n|^2`` is stored in
    ``truncation_error``.
    """
    alpha = complex(alpha)
    n = np.arange(n_max + 1)
    log_fact = np.array([math.lgamma(k + 1) for k in n])
    mag = np.exp(-abs(alpha) ** 2 / 2 + n * np.log(abs(alpha)) - log_fact / 2) if alpha != 0 else (n == 0).astype(float)
    amps = mag * np.exp(1j * np.angle(alpha) * n)
    kept = float(np.sum(np.abs(amps) ** 2))
    return pure_state(amps, CutoffConfig(n_max, 1), truncation_error=max(0.0, 1.0 - kept))


def random_pure_state(cutoff: CutoffConfig, rng: np.random.Generator) -> MultiModeState:
    v = rng.normal(size=cutoff.dim) + 1j * rng.normal(size=cutoff.dim)
    return pure_state(v, cutoff)


def random_density(cutoff: CutoffConfig, rng: np.random.Generator, rank: int | None = None) -> MultiModeState:
    """Ginibre-distributed density matrix of the given rank (full rank by default)."""
    d = cutoff.dim
    rank = d if rank is None else rank
    g = rng.normal(size=(d, rank)) + 1j * rng.normal(size=(d, rank))
    rho = g @ g.conj().T
    rho = (rho + rho.conj().T) / 2
    rho /= np.trace(rho).real
    return density_state(rho, cutoff)


def creation_operator(cutoff: CutoffConfig, mode: int) -> np.ndarray:
    """Dense matrix of ``a^dagger_mode``; the top sector is mapped out of the space."""
    b = fock_basis(cutoff)
    op = np.zeros((b.dim, b.dim))
    for i, occ in enumerate(b.occupations.tolist()):
        if sum(occ) == cutoff.max_total_photons:
            continue
        occ[mode] += 1
        op[b.index[tuple(occ)], i] = math.sqrt(occ[mode])
    return op
