"""Quantities derived from power traces ``p_k = Tr(rho^k)``.

Power sums are turned into elementary symmetric polynomials by Newton's
identities; the eigenvalues are the roots of the resulting characteristic
polynomial.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from typing import Sequence

import numpy as np
from scipy import optimize

from .errors import NumericalDiagnosticError
from .estimator import EstimateResult, estimate_pipeline
from .fock import MultiModeState

IMAG_TOL = 1e-7
RESIDUAL_TOL = 1e-8
CLIP_TOL = 1e-6
ZERO_TOL = 1e-13
MAJORIZATION_TOL = 1e-9


@dataclass(frozen=True)
class Spectrum:
    eigenvalues: tuple[float, ...]
    source_dim: int
    residual: float
    raw: tuple[complex, ...] = ()

    def __len__(self):
        return len(self.eigenvalues)

    def as_array(self) -> np.ndarray:
        return np.array(self.eigenvalues)


def elementary_from_power_sums(p: Sequence[float]) -> np.ndarray:
    """``e_0..e_d`` from ``p_1..p_d`` via ``k e_k = sum_i (-1)^(i-1) e_(k-i) p_i``."""
    d = len(p)
    e = np.zeros(d + 1)
    e[0] = 1.0
    for k in range(1, d + 1):
        acc = 0.0
        for i in range(1, k + 1):
            acc += (-1) ** (i - 1) * e[k - i] * p[i - 1]
        e[k] = acc / k
    return e


def _raw_roots(p_full: Sequence[float]) -> np.ndarray:
    d = len(p_full)
    e = elementary_from_power_sums(p_full)
    coeffs = np.array([(-1) ** k * e[k] for k in range(d + 1)])
    # trailing ~0 coefficients are exact zero eigenvalues; split them off before rooting
    zeros = 0
    while zeros < d and abs(coeffs[d - zeros]) < ZERO_TOL:
        zeros += 1
    head = coeffs[: d + 1 - zeros]
    roots = np.roots(head) if len(head) > 1 else np.array([], dtype=complex)
    return np.concatenate([roots.astype(complex), np.zeros(zeros, dtype=complex)])


def _merge_clusters(roots: np.ndarray, radius: float) -> np.ndarray:
    """Replace each single-linkage cluster of roots by its mean real part.

    A k-fold eigenvalue perturbed by rounding spreads over a ring of radius
    ~eps^(1/k); the cluster mean is far better conditioned than its members.
    """
    order = np.argsort(roots.real)
    r = roots[order]
    out = np.empty(len(r))
    start = 0
    for i in range(1, len(r) + 1):
        if i == len(r) or abs(r[i] - r[i - 1]) > radius:
            out[start:i] = r[start:i].real.mean()
            start = i
    return out


def _power_residual(lam: np.ndarray, p_full: Sequence[float]) -> float:
    return float(max(abs(np.sum(lam ** (k + 1)) - p) for k, p in enumerate(p_full)))


def spectrum_from_power_traces(
    p: Sequence[float],
    d: int,
    imag_tol: float = IMAG_TOL,
    residual_tol: float = RESIDUAL_TOL,
    clip_tol: float = CLIP_TOL,
) -> Spectrum:
    """Eigenvalues of a ``d``-dimensional density matrix from ``p_2..p_d``.

    Roots with ``|Im| < imag_tol`` are taken as real. Larger imaginary parts
    are accepted only if the real parts still reproduce the power sums within
    ``residual_tol`` (clustered eigenvalues split into complex pairs under
    rounding). Otherwise, or if a root leaves ``[-clip_tol, 1 + clip_tol]``,
    :class:`NumericalDiagnosticError` is raised with the residual attached.
    The result is clipped to ``[0, 1]``, renormalized and sorted descending.
    """
    p = [float(np.real(x)) for x in p]
    if len(p) != d - 1:
        raise ValueError(f"need {d - 1} power traces p_2..p_{d}, got {len(p)}")
    p_full = [1.0] + p
    raw = _raw_roots(p_full)
    max_imag = float(np.max(np.abs(raw.imag))) if len(raw) else 0.0
    lam = raw.real.copy()
    if max_imag > imag_tol:
        lam = _merge_clusters(raw, 3 * max_imag)
    residual = _power_residual(lam, p_full)
    if max_imag > imag_tol and residual > residual_tol:
        raise NumericalDiagnosticError(
            f"power traces are inconsistent with a real spectrum (max |Im root| {max_imag:.3e}, residual {residual:.3e})",
            residual,
        )
    if len(lam) and (lam.min() < -clip_tol or lam.max() > 1 + clip_tol):
        raise NumericalDiagnosticError(
            f"recovered eigenvalue outside [0, 1]: [{lam.min():.3e}, {lam.max():.3e}]", residual
        )
    lam = np.clip(lam, 0.0, 1.0)
    if lam.sum() > 0:
        lam = lam / lam.sum()
    lam = np.sort(lam)[::-1]
    return Spectrum(tuple(float(x) for x in lam), d, residual, tuple(complex(x) for x in raw))


def spectrum_jacobian(eigenvalues: Sequence[float]) -> np.ndarray:
    """``d lambda_i / d p_k`` for ``k = 2..d`` at a spectrum, with ``sum lambda = 1`` held fixed.

    Inverts ``d p_k / d lambda_i = k lambda_i^(k-1)`` restricted to the
    simplex. Degenerate eigenvalues make the map singular; the affected
    entries come back as ``inf``.
    """
    lam = np.asarray(eigenvalues, dtype=float)
    d = len(lam)
    k = np.arange(2, d + 1)[:, None]
    # free coordinates lambda_1..lambda_(d-1); lambda_d = 1 - sum
    fwd = k * (lam[None, :-1] ** (k - 1) - lam[-1] ** (k - 1))
    jac = np.full((d, d - 1), np.inf)
    if np.linalg.cond(fwd) < 1 / np.finfo(float).eps:
        inv = np.linalg.inv(fwd)
        jac[:-1] = inv
        jac[-1] = -inv.sum(axis=0)
    return jac


def propagate_spectrum_sigma(spec, sigma: Sequence[float]) -> np.ndarray:
    """Linearized one-sigma uncertainty of each eigenvalue for independent errors on ``p_2..p_d``."""
    lam = spec.as_array() if isinstance(spec, Spectrum) else np.asarray(spec, dtype=float)
    jac = spectrum_jacobian(lam)
    with np.errstate(invalid="ignore"):
        var = np.where(np.isinf(jac), np.inf, jac ** 2) @ (np.asarray(sigma, dtype=float) ** 2)
    return np.sqrt(var)


def fit_spectrum(p: Sequence[float], d: int, sigma: Sequence[float] | None = None) -> Spectrum:
    """Closest spectrum on the probability simplex to noisy ``p_2..p_d`` (weighted least squares).

    With exact traces this reproduces :func:`spectrum_from_power_traces`.
    Shot noise can push the characteristic polynomial's roots off the real
    axis; the fit then returns the valid spectrum whose power sums lie
    nearest, in units of ``sigma``.
    """
    p = np.array([float(np.real(x)) for x in p])
    if len(p) != d - 1:
        raise ValueError(f"need {d - 1} power traces p_2..p_{d}, got {len(p)}")
    try:
        return spectrum_from_power_traces(p, d)
    except NumericalDiagnosticError:
        pass
    w = np.ones(d - 1) if sigma is None else 1 / np.maximum(np.asarray(sigma, dtype=float), 1e-15)
    k = np.arange(2, d + 1)[:, None]

    def chi2(lam):
        r = (np.sum(lam[None, :] ** k, axis=1) - p) * w
        grad = 2 * ((r * w)[:, None] * k * lam[None, :] ** (k - 1)).sum(axis=0)
        return float(r @ r), grad

    raw = _raw_roots([1.0] + list(p))
    start = np.clip(raw.real, 0, 1)
    starts = [start / start.sum() if start.sum() > 0 else np.full(d, 1 / d), np.full(d, 1 / d)]
    best = None
    for x0 in starts:
        res = optimize.minimize(
            chi2, x0, jac=True, method="SLSQP", bounds=[(0.0, 1.0)] * d,
            constraints=[{"type": "eq", "fun": lambda lam: lam.sum() - 1.0, "jac": lambda lam: np.ones(d)}],
            options={"ftol": 1e-14, "maxiter": 500},
        )
        if best is None or res.fun < best.fun:
            best = res
    lam = np.sort(np.clip(best.x, 0.0, 1.0))[::-1]
    lam = lam / lam.sum()
    residual = _power_residual(lam, [1.0] + list(p))
    return Spectrum(tuple(float(x) for x in lam), d, residual, tuple(complex(x) for x in raw))


def resample_spectrum_sigma(p: Sequence[float], sigma: Sequence[float], d: int, draws: int = 200, seed=None) -> np.ndarray:
    """Eigenvalue spread when ``p_2..p_d`` are redrawn from independent normals and refit.

    Unlike :func:`propagate_spectrum_sigma` this stays finite where the fit
    sits on a degenerate spectrum, which is where noisy traces usually land.
    """
    rng = np.random.default_rng(seed)
    p = np.asarray(p, dtype=float)
    sigma = np.asarray(sigma, dtype=float)
    fits = np.array([fit_spectrum(p + sigma * rng.standard_normal(len(p)), d, sigma).as_array() for _ in range(draws)])
    return fits.std(axis=0, ddof=1)


def _xlogx(x):
    x = np.asarray(x, dtype=float)
    out = np.zeros_like(x)
    pos = x > 0
    out[pos] = x[pos] * np.log(x[pos])
    return out


FUNCTIONALS = {
    "square": lambda lam, alpha: float(np.sum(lam ** 2)),
    "xlogx": lambda lam, alpha: float(np.sum(_xlogx(lam))),
    "von_neumann_entropy": lambda lam, alpha: float(-np.sum(_xlogx(lam))),
    "power": lambda lam, alpha: float(np.sum(lam ** alpha)),
    "linear_entropy": lambda lam, alpha: float(1.0 - np.sum(lam ** 2)),
}


def functional_trace(spec: Spectrum, f: str, alpha: float | None = None) -> float:
    """``Tr f(rho) = sum_i f(lambda_i)`` for ``f`` in :data:`FUNCTIONALS`."""
    if f not in FUNCTIONALS:
        raise ValueError(f"unknown functional {f!r}; available: {sorted(FUNCTIONALS)}")
    if f == "power" and alpha is None:
        raise ValueError("functional 'power' needs alpha")
    return FUNCTIONALS[f](spec.as_array(), alpha)


def _as_sorted(x, length):
    v = np.sort(np.asarray(x.eigenvalues if isinstance(x, Spectrum) else x, dtype=float))[::-1]
    return np.concatenate([v, np.zeros(length - len(v))])


def majorized_by(x, y, tol: float = MAJORIZATION_TOL) -> bool:
    """True if ``x`` is majorized by ``y``: every partial sum of sorted ``x`` is <= that of ``y``."""
    n = max(len(x), len(y))
    cx, cy = np.cumsum(_as_sorted(x, n)), np.cumsum(_as_sorted(y, n))
    return bool(np.all(cx <= cy + tol))


class MajorizationVerdict(str, Enum):
    ENTANGLED = "entangled"
    INCONCLUSIVE = "inconclusive"


def majorization_test(spec_joint, spec_a, spec_b, tol: float = MAJORIZATION_TOL) -> MajorizationVerdict:
    """Separable states have a joint spectrum majorized by both marginal spectra."""
    if majorized_by(spec_joint, spec_a, tol) and majorized_by(spec_joint, spec_b, tol):
        return MajorizationVerdict.INCONCLUSIVE
    return MajorizationVerdict.ENTANGLED


def estimate_power_traces(rho: MultiModeState, d: int, shots="exact", seed=None) -> list[EstimateResult]:
    """``Tr(rho^N)`` for ``N = 2..d`` from the interferometer on ``N`` copies of ``rho``."""
    ss = np.random.SeedSequence(seed)
    seeds = [int(s.generate_state(1)[0]) for s in ss.spawn(d - 1)]
    out = []
    for i, N in enumerate(range(2, d + 1)):
        s = None if shots in (None, "exact") else seeds[i]
        out.append(estimate_pipeline([rho] * N, N, 1, shots=shots, seed=s))
    return out


def spectrum_via_pipeline(rho: MultiModeState, d: int | None = None, shots="exact", seed=None, **kw):
    """Spectrum of ``rho`` from interferometric power traces; returns ``(Spectrum, estimates)``.

    Exact traces go through the characteristic polynomial; sampled traces
    through :func:`fit_spectrum`, weighted by their standard errors.
    """
    d = rho.dim if d is None else d
    ests = estimate_power_traces(rho, d, shots, seed)
    p = [e.value.real for e in ests]
    if shots in (None, "exact"):
        return spectrum_from_power_traces(p, d, **kw), ests
    return fit_spectrum(p, d, [e.stderr_real for e in ests]), ests
