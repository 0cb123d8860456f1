"""Photon-counting half of the scheme.

The input is evolved by the DFT interferometer, photon numbers are recorded
on every mode, and ``<V_N^k>`` is read off as a complex-weighted sum of the
outcome probabilities with weights ``prod_j exp(-i k theta_j n_j)``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence, Union

import numpy as np

from .errors import DimensionError, NumericalDiagnosticError
from .fock import MultiModeState, fock_basis, tensor
from .interferometer import (
    FockUnitary,
    PhaseVector,
    _root_of_unity,
    apply_to_state,
    check_unitary,
    dft_lift,
    lift_to_fock,
    phase_vector,
)

NEGATIVE_PROB_TOL = 1e-12


@dataclass(frozen=True, eq=False)
class JointDistribution:
    """Photon-number outcomes (one row per outcome) and their probabilities."""

    occupations: np.ndarray
    probabilities: np.ndarray
    mode_count: int

    @property
    def total_mass(self) -> float:
        return float(np.sum(self.probabilities))

    def as_dict(self) -> dict:
        return {tuple(o): float(p) for o, p in zip(self.occupations.tolist(), self.probabilities)}

    def marginal(self, keep: Sequence[int]) -> "JointDistribution":
        """Distribution of the modes in ``keep``; outcomes in first-appearance order."""
        keep = list(keep)
        sub = self.occupations[:, keep]
        labels, first, inverse = np.unique(sub, axis=0, return_index=True, return_inverse=True)
        inverse = inverse.reshape(-1)
        probs = np.zeros(len(labels))
        np.add.at(probs, inverse, self.probabilities)
        order = np.argsort(first, kind="stable")
        return JointDistribution(labels[order], probs[order], len(keep))


@dataclass(frozen=True)
class EstimateResult:
    value: complex
    stderr_real: float
    stderr_imag: float
    shots: Union[int, str]
    method: str
    N: int | None = None
    k: int = 1
    seed: int | None = None
    truncation_error: float = 0.0
    histogram: dict | None = field(default=None, compare=False)

    @property
    def is_exact(self) -> bool:
        return self.method == "exact"


def evolve(rho: MultiModeState, U, method: str = "auto") -> MultiModeState:
    """``U_F rho U_F^dag`` for the Fock lift ``U_F`` of mode matrix ``U``."""
    lift = U if isinstance(U, FockUnitary) else lift_to_fock(check_unitary(U), rho.cutoff, method=method)
    return apply_to_state(lift, rho)


def _distribution_from_diagonal(cutoff, diag) -> JointDistribution:
    diag = np.asarray(diag, dtype=float)
    if diag.min(initial=0.0) < -NEGATIVE_PROB_TOL:
        raise NumericalDiagnosticError(f"negative outcome probability {diag.min():.3e}", float(-diag.min()))
    diag = np.where(diag < 0, 0.0, diag)
    return JointDistribution(fock_basis(cutoff).occupations, diag, cutoff.mode_count)


def joint_distribution(state: MultiModeState) -> JointDistribution:
    """Occupation-basis probabilities of ``state`` (the diagonal of its density matrix)."""
    if state.is_pure:
        diag = np.abs(state.data) ** 2
    else:
        diag = np.real(np.diag(state.data))
    return _distribution_from_diagonal(state.cutoff, diag)


def output_distribution(state: MultiModeState, lift: FockUnitary) -> JointDistribution:
    """Same as ``joint_distribution(evolve(state, lift))`` without the off-sector blocks."""
    if lift.cutoff != state.cutoff:
        raise DimensionError(f"lift cutoff {lift.cutoff} does not match state cutoff {state.cutoff}")
    if state.is_pure:
        diag = np.abs(lift.apply_vector(state.data)) ** 2
    else:
        diag = np.concatenate([np.real(np.diag(b)) for b in lift.diagonal_blocks_conjugated(state.data)])
    return _distribution_from_diagonal(state.cutoff, diag)


def _identity_modes(theta: PhaseVector, k: int) -> list[int]:
    if theta.steps is not None:
        return [j for j, s in enumerate(theta.steps) if (k * s) % theta.denominator == 0]
    return [j for j, t in enumerate(theta.theta) if t == 0.0]


def _residue_sum(occ, probs, theta: PhaseVector, k: int) -> complex:
    if theta.steps is not None:
        residues = (k * occ @ np.array(theta.steps, dtype=np.int64)) % theta.denominator
        mass = np.zeros(theta.denominator)
        np.add.at(mass, residues, probs)
        total = 0j
        for r, m in enumerate(mass):
            total += _root_of_unity(r, theta.denominator) * m
        return complex(total)
    w = np.exp(-1j * k * (occ @ np.asarray(theta.theta)))
    return complex(np.sum(w * probs))


def reduce_unweighted(dist: JointDistribution, theta: PhaseVector, k: int = 1):
    """Drop modes whose weight is identically 1; returns ``(marginal, phases)``.

    Those outcomes carry no information about ``<V_N^k>``, so they need not be
    measured at all.
    """
    if len(theta) != dist.mode_count:
        raise DimensionError(f"{len(theta)} phases for {dist.mode_count} measured modes")
    dropped = set(_identity_modes(theta, k))
    keep = [j for j in range(dist.mode_count) if j not in dropped]
    if not keep:
        return None, None
    sub = PhaseVector(
        tuple(theta.theta[j] for j in keep),
        tuple(theta.steps[j] for j in keep) if theta.steps is not None else None,
        theta.denominator,
    )
    return dist.marginal(keep), sub


def weighted_estimate(dist: JointDistribution, theta: PhaseVector, k: int = 1) -> EstimateResult:
    """Exact ``sum_n prod_j exp(-i k theta_j n_j) Pr(n)``."""
    if k < 1:
        raise ValueError(f"moment order k must be >= 1, got {k}")
    marg, sub = reduce_unweighted(dist, theta, k)
    if marg is None:
        value = complex(dist.total_mass)
    else:
        value = _residue_sum(marg.occupations, marg.probabilities, sub, k)
    return EstimateResult(value, 0.0, 0.0, "exact", "exact", N=len(theta), k=k)


def parity_estimate_n2(dist: JointDistribution) -> EstimateResult:
    """Average parity of mode 2, ``Pr(n_2 even) - Pr(n_2 odd)``; equals ``<V_2>``."""
    if dist.mode_count != 2:
        raise DimensionError(f"parity estimate needs 2 modes, got {dist.mode_count}")
    second = dist.marginal([1])
    odd = second.occupations[:, 0] % 2
    mass = np.zeros(2)
    np.add.at(mass, odd, second.probabilities)
    value = 1 * mass[0] + (-1 + 0j) * mass[1]
    return EstimateResult(complex(value), 0.0, 0.0, "exact", "exact", N=2, k=1)


def sample_outcomes(dist: JointDistribution, shots: int, seed=None) -> JointDistribution:
    """Empirical distribution of ``shots`` multinomial draws."""
    counts = sample_counts(dist, shots, seed)
    return JointDistribution(dist.occupations, counts / shots, dist.mode_count)


def sample_counts(dist: JointDistribution, shots: int, seed=None) -> np.ndarray:
    if int(shots) != shots or shots < 1:
        raise ValueError(f"shots must be a positive integer, got {shots!r}")
    p = np.asarray(dist.probabilities, dtype=float)
    if p.min(initial=0.0) < -NEGATIVE_PROB_TOL:
        raise NumericalDiagnosticError(f"negative outcome probability {p.min():.3e}", float(-p.min()))
    p = np.clip(p, 0, None)
    p = p / p.sum()
    rng = np.random.default_rng(seed)
    return rng.multinomial(int(shots), p)


def _shot_weights(dist: JointDistribution, theta: PhaseVector, k: int) -> np.ndarray:
    if theta.steps is not None:
        residues = (k * dist.occupations @ np.array(theta.steps, dtype=np.int64)) % theta.denominator
        table = np.array([_root_of_unity(r, theta.denominator) for r in range(theta.denominator)])
        return table[residues]
    return np.exp(-1j * k * (dist.occupations @ np.asarray(theta.theta)))


def sampled_estimate(dist: JointDistribution, theta: PhaseVector, k: int, shots: int, seed=None) -> EstimateResult:
    """Mean of per-shot complex weights with sample standard errors."""
    counts = sample_counts(dist, shots, seed)
    w = _shot_weights(dist, theta, k)
    mean = np.sum(counts * w) / shots
    if shots > 1:
        var_re = np.sum(counts * (w.real - mean.real) ** 2) / (shots - 1)
        var_im = np.sum(counts * (w.imag - mean.imag) ** 2) / (shots - 1)
    else:
        var_re = var_im = 0.0
    hist = {tuple(o): int(c) for o, c in zip(dist.occupations.tolist(), counts) if c}
    return EstimateResult(
        complex(mean), float(np.sqrt(var_re / shots)), float(np.sqrt(var_im / shots)),
        int(shots), "sampled", N=len(theta), k=k, seed=seed, histogram=hist,
    )


def combine_inputs(inputs) -> MultiModeState:
    if isinstance(inputs, MultiModeState):
        return inputs
    inputs = list(inputs)
    if not inputs:
        raise ValueError("no input states")
    joint = inputs[0]
    for s in inputs[1:]:
        joint = tensor(joint, s)
    return joint


def estimate_pipeline(
    inputs,
    N: int,
    k: int = 1,
    shots: Union[int, str, None] = "exact",
    seed=None,
    slot_modes: int | None = None,
    histogram: bool = False,
) -> EstimateResult:
    """Estimate ``<V_N^k>`` as an experiment would.

    ``inputs`` is either one joint state on ``N`` slots or a list of ``N``
    per-slot states, tensored in order. ``shots="exact"`` (or ``None``) uses
    the exact outcome distribution.
    """
    if k < 1:
        raise ValueError(f"moment order k must be >= 1, got {k}")
    joint = combine_inputs(inputs)
    if slot_modes is None:
        if joint.mode_count % N:
            raise DimensionError(f"{joint.mode_count} modes cannot be split into {N} equal slots")
        slot_modes = joint.mode_count // N
    if joint.mode_count != N * slot_modes:
        raise DimensionError(f"{N} slots x {slot_modes} modes != {joint.mode_count} modes")
    lift = dft_lift(N, slot_modes, joint.n_max)
    dist = output_distribution(joint, lift)
    theta = phase_vector(N).repeat(slot_modes)
    if shots in (None, "exact"):
        est = weighted_estimate(dist, theta, k)
        hist = dist.as_dict() if histogram else None
        return EstimateResult(est.value, 0.0, 0.0, "exact", "exact", N, k, seed, joint.truncation_error, hist)
    est = sampled_estimate(dist, theta, k, int(shots), seed)
    return EstimateResult(
        est.value, est.stderr_real, est.stderr_imag, est.shots, "sampled", N, k, seed,
        joint.truncation_error, est.histogram if histogram else None,
    )
