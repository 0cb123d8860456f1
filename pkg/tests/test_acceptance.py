"""Acceptance criteria 1-8, each checked at its stated tolerance and time budget.

Every test records one ``criterion N: PASS|FAIL ...`` line, listed in the
"acceptance criteria" section of the pytest terminal summary (and printed
directly under ``-s``).
"""

import math
import time

import numpy as np

from oscswap.analysis import propagate_spectrum_sigma, resample_spectrum_sigma, spectrum_via_pipeline
from oscswap.estimator import estimate_pipeline, evolve, joint_distribution, parity_estimate_n2
from oscswap.fock import (
    CutoffConfig,
    creation_operator,
    fock_state,
    random_density,
    random_pure_state,
    single_mode_density,
    superpose,
)
from oscswap.interferometer import (
    cyclic_shift_matrix,
    dft_matrix,
    lift_to_fock,
    phase_vector,
    reck_decompose,
    reck_reconstruct,
)
from oscswap.swap import swap_expectation

from conftest import haar

C1 = CutoffConfig(1, 2)
SEED = 20051007


def report(request, n, ok, detail):
    line = f"criterion {n}: {'PASS' if ok else 'FAIL'}  {detail}"
    request.node.user_properties.append(("acceptance", line))
    print(line)
    assert ok, line


def antisymmetric():
    return superpose([(1, fock_state(C1, (0, 1))), (-1, fock_state(C1, (1, 0)))])


def test_criterion_1_witness(request):
    t0 = time.perf_counter()
    # full pipeline with the parity weights of mode 2
    anti = parity_estimate_n2(joint_distribution(evolve(antisymmetric(), dft_matrix(2)))).value
    prod = parity_estimate_n2(joint_distribution(evolve(fock_state(C1, (0, 1)), dft_matrix(2)))).value
    elapsed = time.perf_counter() - t0
    ok = abs(anti + 1) < 1e-10 and abs(prod) < 1e-10 and elapsed < 1
    report(request, 1, ok, f"<V2> antisym={anti.real:+.3e} product={prod.real:+.3e} ({elapsed:.3f}s)")


def test_criterion_2_diagonalization(request):
    t0 = time.perf_counter()
    worst = 0.0
    for N in range(2, 9):
        om = dft_matrix(N)
        d = np.diag(phase_vector(N).diagonal())
        worst = max(worst, np.max(np.abs(om.conj().T @ d @ om - cyclic_shift_matrix(N))))
    eq18 = np.array([[1, 1], [1, -1]]) / math.sqrt(2)
    n2 = np.max(np.abs(dft_matrix(2) - eq18))
    elapsed = time.perf_counter() - t0
    ok = worst < 1e-12 and n2 < 1e-15 and elapsed < 1
    report(request, 2, ok, f"max residual N=2..8 {worst:.2e}, N=2 vs 50/50 matrix {n2:.1e} ({elapsed:.3f}s)")


def test_criterion_3_oracle_equivalence(request):
    t0 = time.perf_counter()
    rng = np.random.default_rng(SEED)
    worst, count = 0.0, 0
    for N in (2, 3, 4):
        for n_max in (1, 2, 3):
            c = CutoffConfig(n_max, N)
            for i in range(50):
                rho = random_density(c, rng) if i % 2 else random_pure_state(c, rng)
                for k in sorted({1, 2, N}):
                    est = estimate_pipeline(rho, N, k).value
                    worst = max(worst, abs(est - swap_expectation(rho, N, k)))
                    count += 1
    elapsed = time.perf_counter() - t0
    ok = worst < 1e-9 and elapsed < 120
    report(request, 3, ok, f"{count} comparisons, max |pipeline - oracle| {worst:.2e} ({elapsed:.1f}s)")


def test_criterion_4_power_traces(request):
    t0 = time.perf_counter()
    rng = np.random.default_rng(SEED + 4)
    worst_re = worst_im = 0.0
    for dim in (2, 3, 4):
        for _ in range(3):
            rho = random_density(CutoffConfig(dim - 1, 1), rng)
            lam = np.linalg.eigvalsh(rho.data)
            for N in (2, 3, 4):
                est = estimate_pipeline([rho] * N, N).value
                worst_re = max(worst_re, abs(est.real - np.sum(lam ** N)))
                worst_im = max(worst_im, abs(est.imag))
    elapsed = time.perf_counter() - t0
    ok = worst_re < 1e-8 and worst_im < 1e-9 and elapsed < 60
    report(request, 4, ok, f"max |Re - sum lam^N| {worst_re:.2e}, max |Im| {worst_im:.2e} ({elapsed:.1f}s)")


def test_criterion_5_lift(request):
    t0 = time.perf_counter()
    vac_ok, s1, agree, conj = True, 0.0, 0.0, 0.0
    seed = 500
    for N in (1, 2, 3):
        for n_max in (1, 2, 3):
            c = CutoffConfig(n_max, N)
            for _ in range(3):
                u = haar(N, seed)
                seed += 1
                perm = lift_to_fock(u, c, method="permanent")
                gen = lift_to_fock(u, c, method="generator")
                vac_ok &= perm.blocks[0].shape == (1, 1) and perm.blocks[0][0, 0] == 1
                s1 = max(s1, np.max(np.abs(perm.blocks[1] - u)))
                agree = max(agree, max(np.max(np.abs(a - b)) for a, b in zip(perm.blocks, gen.blocks)))
                L = perm.dense()
                for j in range(N):
                    lhs = L @ creation_operator(c, j) @ L.conj().T
                    rhs = sum(creation_operator(c, i) * u[i, j] for i in range(N))
                    conj = max(conj, np.max(np.abs(lhs - rhs)))
    elapsed = time.perf_counter() - t0
    ok = vac_ok and s1 < 1e-12 and agree < 1e-9 and conj < 1e-9 and elapsed < 60
    report(request, 5, ok, f"vacuum exact={vac_ok}, sector-1 {s1:.1e}, permanent vs generator {agree:.1e}, "
                           f"conjugation {conj:.1e} ({elapsed:.2f}s)")


def test_criterion_6_reck(request):
    t0 = time.perf_counter()
    worst, count_ok = 0.0, True
    mats = [(N, haar(N, 900 + 10 * N + i)) for N in range(2, 7) for i in range(10)]
    mats += [(N, dft_matrix(N)) for N in range(2, 7)]
    for N, u in mats:
        plan = reck_decompose(u)
        worst = max(worst, np.max(np.abs(reck_reconstruct(plan) - u)))
        count_ok &= len(plan.rotations) <= N * (N - 1) // 2
    elapsed = time.perf_counter() - t0
    ok = worst < 1e-10 and count_ok and elapsed < 10
    report(request, 6, ok, f"{len(mats)} unitaries, max residual {worst:.1e}, "
                           f"two-mode element count within N(N-1)/2: {count_ok} ({elapsed:.2f}s)")


def test_criterion_7_sampling_convergence(request):
    t0 = time.perf_counter()
    shots_grid = (10 ** 2, 10 ** 3, 10 ** 4, 10 ** 5)
    anti = antisymmetric()
    mean_err, inside = [], 0
    for shots in shots_grid:
        errs = []
        for seed in range(20):
            est = estimate_pipeline(anti, 2, shots=shots, seed=seed)
            errs.append(abs(est.value.real + 1))
            if shots == 10 ** 4 and abs(est.value.real + 1) <= 5 * est.stderr_real:
                inside += 1
        mean_err.append(float(np.mean(errs)))
    with np.errstate(divide="ignore", invalid="ignore"):
        logs = np.log10(mean_err)
        slope = np.polyfit(np.log10(shots_grid), logs, 1)[0] if np.all(np.isfinite(logs)) else float("nan")
    elapsed = time.perf_counter() - t0
    slope_ok = bool(np.isfinite(slope) and abs(slope + 0.5) <= 0.1)
    ok = slope_ok and inside >= 19 and elapsed < 120
    # The antisymmetric state is a -1 eigenvector of the swap, so after the coupler every
    # shot reads n_2 odd and carries weight -1 exactly: the error is 0 at every shot count
    # and no log-log slope exists. See the convergence test on a mixed state in test_estimator.
    report(request, 7, ok, f"mean |error| per shots {mean_err}, fitted slope {slope}, "
                           f"{inside}/20 within 5 stderr at 1e4 ({elapsed:.2f}s)")


def test_criterion_8_spectrum(request):
    t0 = time.perf_counter()
    rng = np.random.default_rng(SEED + 8)
    exact_worst, ratio, resampled_ratio, n_spec = 0.0, 0.0, 0.0, 0
    for d in (2, 3, 4):
        for _ in range(3):
            lam = np.sort(rng.dirichlet(np.ones(d)))[::-1]
            rho = single_mode_density(np.diag(lam))
            spec, _ = spectrum_via_pipeline(rho, d)
            exact_worst = max(exact_worst, np.max(np.abs(spec.as_array() - lam)))
            got, noisy = spectrum_via_pipeline(rho, d, shots=10 ** 5, seed=int(rng.integers(2 ** 32)))
            stderr = [e.stderr_real for e in noisy]
            err = np.abs(got.as_array() - lam)
            # delta-method sigma: measured stderrs through the Jacobian at the true spectrum
            ratio = max(ratio, float(np.max(err / propagate_spectrum_sigma(lam, stderr))))
            sigma_rs = resample_spectrum_sigma([e.value.real for e in noisy], stderr, d, seed=0)
            resampled_ratio = max(resampled_ratio, float(np.max(err / sigma_rs)))
            n_spec += 1
    elapsed = time.perf_counter() - t0
    ok = exact_worst < 1e-6 and ratio <= 3 and elapsed < 60
    report(request, 8, ok, f"{n_spec} spectra, exact max error {exact_worst:.1e}, noisy max |error|/sigma "
                           f"{ratio:.2f} (resampled-sigma ratio {resampled_ratio:.2f}) ({elapsed:.1f}s)")
