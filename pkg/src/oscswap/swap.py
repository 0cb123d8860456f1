"""Definition-level cyclic swap and the functionals built on it.

Everything here is computed directly from density matrices and the swap
permutation; it is the reference the interferometer path is checked against.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum

import numpy as np

from .errors import DimensionError
from .fock import (
    CutoffConfig,
    MultiModeState,
    align,
    fock_basis,
    tensor_power,
    to_density,
)

WITNESS_TOL = 1e-9


@dataclass(frozen=True, eq=False)
class SwapOperator:
    """``V_N`` on ``N`` slots of ``slot_modes`` modes each.

    ``perm[i]`` is the basis index of ``V_N |i>``; slot contents move one
    slot to the right, cyclically.
    """

    n_slots: int
    slot_modes: int
    cutoff: CutoffConfig
    perm: np.ndarray
    power: int = 1

    @property
    def is_hermitian(self) -> bool:
        return (2 * self.power) % self.n_slots == 0

    def matrix(self) -> np.ndarray:
        d = len(self.perm)
        m = np.zeros((d, d))
        m[self.perm, np.arange(d)] = 1
        return m

    def __pow__(self, k: int) -> "SwapOperator":
        k = int(k)
        perm = np.arange(len(self.perm))
        for _ in range(k % self.n_slots):
            perm = self.perm[perm]
        return SwapOperator(self.n_slots, self.slot_modes, self.cutoff, perm, self.power * k)


def build_swap(cutoff: CutoffConfig, N: int, slot_modes: int = 1) -> SwapOperator:
    if N < 2:
        raise ValueError(f"swap needs N >= 2 slots, got {N}")
    if cutoff.mode_count != N * slot_modes:
        raise DimensionError(
            f"{N} slots of {slot_modes} mode(s) need {N * slot_modes} modes, cutoff has {cutoff.mode_count}"
        )
    b = fock_basis(cutoff)
    occ = b.occupations.reshape(-1, N, slot_modes)
    shifted = np.roll(occ, 1, axis=1).reshape(-1, cutoff.mode_count)
    perm = np.array([b.index[t] for t in map(tuple, shifted.tolist())], dtype=np.int64)
    perm.flags.writeable = False
    return SwapOperator(N, slot_modes, cutoff, perm)


def expect_swap_direct(rho: MultiModeState, V: SwapOperator, k: int = 1) -> complex:
    """``Tr(rho V^k)`` straight from the permutation."""
    if rho.cutoff != V.cutoff:
        raise DimensionError(f"state cutoff {rho.cutoff} does not match swap cutoff {V.cutoff}")
    perm = (V ** k).perm if k != 1 else V.perm
    if rho.is_pure:
        psi = rho.data
        return complex(np.vdot(psi[perm], psi))
    # Tr(rho V) = sum_i <i|rho|perm[i]>
    idx = np.arange(len(perm))
    return complex(np.sum(rho.data[idx, perm]))


def swap_expectation(state: MultiModeState, N: int, k: int = 1, slot_modes: int = 1) -> complex:
    return expect_swap_direct(state, build_swap(state.cutoff, N, slot_modes), k)


def _densities(a: MultiModeState, b: MultiModeState):
    a, b = align(a, b)
    return to_density(a).data, to_density(b).data


def overlap(rho_a: MultiModeState, rho_b: MultiModeState) -> float:
    """``Tr(rho_a rho_b)``."""
    ra, rb = _densities(rho_a, rho_b)
    return float(np.real(np.sum(ra * rb.T)))


def purity(rho: MultiModeState) -> float:
    if rho.is_pure:
        return float(np.vdot(rho.data, rho.data).real ** 2)
    r = rho.data
    return float(np.real(np.sum(r * r.T)))


def fidelity_pure(alpha: MultiModeState, rho: MultiModeState) -> float:
    """``<alpha| rho |alpha>`` for a pure reference state."""
    if not alpha.is_pure:
        raise ValueError("fidelity_pure needs a pure reference state")
    a, r = align(alpha, rho)
    r = to_density(r).data
    return float(np.real(np.vdot(a.data, r @ a.data)))


def power_trace(rho: MultiModeState, k: int) -> float:
    """``Tr(rho^k)`` by repeated multiplication."""
    if k < 1:
        raise ValueError(f"power must be >= 1, got {k}")
    r = to_density(rho).data
    return float(np.real(np.trace(np.linalg.matrix_power(r, k))))


def power_trace_via_swap(rho: MultiModeState, k: int) -> complex:
    """``Tr(rho^{(x)k} V_k)``; equals ``Tr(rho^k)`` for a single-slot ``rho``."""
    if k == 1:
        return complex(rho.trace())
    joint = tensor_power(rho, k)
    return swap_expectation(joint, k, slot_modes=rho.mode_count)


def hs_distance(rho_a: MultiModeState, rho_b: MultiModeState) -> float:
    """Squared Hilbert-Schmidt distance ``Tr[(rho_a - rho_b)^2]``."""
    return purity(rho_a) + purity(rho_b) - 2 * overlap(rho_a, rho_b)


class Verdict(str, Enum):
    WITNESSED_ENTANGLED = "witnessed_entangled"
    INCONCLUSIVE = "inconclusive"


@dataclass(frozen=True)
class WitnessResult:
    verdict: Verdict
    value: float
    tol: float


def classify_witness(value: float, tol: float = WITNESS_TOL) -> WitnessResult:
    # one-sided: a nonnegative value never certifies separability
    verdict = Verdict.WITNESSED_ENTANGLED if value < -tol else Verdict.INCONCLUSIVE
    return WitnessResult(verdict, float(value), float(tol))


def witness_verdict(rho_joint: MultiModeState, slot_modes: int | None = None, tol: float = WITNESS_TOL) -> WitnessResult:
    """Swap witness on a two-oscillator state, from ``Re Tr(rho V_2)``."""
    if slot_modes is None:
        if rho_joint.mode_count % 2:
            raise DimensionError(f"two equal oscillators need an even mode count, got {rho_joint.mode_count}")
        slot_modes = rho_joint.mode_count // 2
    value = swap_expectation(rho_joint, 2, slot_modes=slot_modes).real
    return classify_witness(value, tol)
