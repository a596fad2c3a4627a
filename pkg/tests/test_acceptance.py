"""Acceptance suite: one test per criterion, each printing a PASS/FAIL line.

Run with `pytest tests/test_acceptance.py -v -s` to see the per-criterion
lines and timings.
"""

import time

import numpy as np
import pytest

from coherence_forge import (
    DiagonalFilter,
    FilterFamily,
    FilterTarget,
    QState,
    TWO_QUBIT_SPECTRUM,
    apply_filter,
    coherence,
    coherence_optimal_filter_pure,
    factorized_filter,
    mean_energy,
    mixed_scan,
    plateau_threshold,
    product_pure_state,
    success_probability,
    thermal_benchmark_state,
    trace_frontier,
    tsallis_optimal_filter,
    two_qubit_closed_form,
)
from coherence_forge.iterative import (
    compose_iteration,
    reduced_kraus,
    sequential_povm,
    simulate_sequential,
)
from coherence_forge.optics import (
    InterferometerSpec,
    PhaseProfile,
    choi_of_filter,
    compensate_phases,
    effective_filter,
    process_metrics,
)
from coherence_forge.oracle import grid_search, objective_value
from coherence_forge.synthesis import (
    TwoQubitFilterParams,
    coherence_lower_branch,
    coherence_upper_branch,
    energy_lower_branch,
    energy_upper_branch,
    solve_inverse_temperature,
    success_threshold,
)

SPECTRUM = TWO_QUBIT_SPECTRUM


def report(number: int, name: str, passed: bool, detail: str) -> None:
    status = "PASS" if passed else "FAIL"
    print(f"ACCEPTANCE {number:02d} {name}: {status} ({detail})")


def branch_spanning_ps(p: float, target: FilterTarget) -> list[float]:
    """Eight success probabilities: four per closed-form branch."""
    p_th = success_threshold(p)
    if target is FilterTarget.ENERGY:
        lo, junction = p * p, p_th
    else:
        lo, junction = 4 * p * p, p_th + p * (1 - p)
    lower = np.linspace(lo + 1e-6, junction - 1e-4, 4)
    upper = np.linspace(junction, 0.98, 4)
    return [float(x) for x in np.concatenate([lower, upper])]


def test_01_closed_form_vs_oracle():
    start = time.perf_counter()
    worst = -np.inf
    for p in (0.1, 1 / 3):
        state = product_pure_state(p, 2)
        for target in (FilterTarget.ENERGY, FilterTarget.COHERENCE):
            for ps in branch_spanning_ps(p, target):
                closed = two_qubit_closed_form(p, ps, target).to_filter()
                synth_obj = objective_value(state, SPECTRUM, target, closed)
                res = grid_search(state, SPECTRUM, target, ps, grid_step=0.02)
                worst = max(worst, res.objective - synth_obj)
    elapsed = time.perf_counter() - start
    passed = worst <= 1e-3
    report(1, "closed-form vs oracle", passed, f"max shortfall {worst:.2e}, {elapsed:.1f}s")
    assert passed


def test_02_equalization_point():
    p = 0.1
    state = product_pure_state(p, 2)
    filt = coherence_optimal_filter_pure(state, 4 * p * p)
    out, _ = apply_filter(state, filt)
    spread = float(np.ptp(out.populations))
    gap = abs(coherence(out) - np.log(4))
    passed = spread < 1e-9 and gap < 1e-9
    report(2, "equalization point", passed, f"population spread {spread:.1e}, C - ln4 {gap:.1e}")
    assert passed


def test_03_frontier_dominance():
    p = 0.1
    state = product_pure_state(p, 2)
    points = trace_frontier(state, SPECTRUM, FilterTarget.COHERENCE, FilterFamily.OPTIMAL, grid=200)
    assert len(points) == 200
    min_gap, max_gap_low_ps = np.inf, -np.inf
    for pt in points:
        fact = factorized_filter(state, pt.p_success)
        out, _ = apply_filter(state, fact)
        gap = pt.coherence - coherence(out)
        min_gap = min(min_gap, gap)
        if pt.p_success < 0.28:
            max_gap_low_ps = max(max_gap_low_ps, gap)
    passed = min_gap >= -1e-12 and max_gap_low_ps > 0.01
    report(
        3,
        "frontier dominance",
        passed,
        f"min gap {min_gap:.1e}, best gap below P_S=0.28 {max_gap_low_ps:.3f} nats",
    )
    assert passed


def test_04_branch_continuity():
    worst = 0.0
    for p in (0.1, 1 / 3):
        state = product_pure_state(p, 2)
        junctions = [
            (success_threshold(p), energy_upper_branch, energy_lower_branch),
            (
                success_threshold(p) + p * (1 - p),
                coherence_upper_branch,
                coherence_lower_branch,
            ),
        ]
        for ps, upper, lower in junctions:
            up, _ = apply_filter(state, upper(p, ps).to_filter())
            low, _ = apply_filter(state, lower(p, ps).to_filter())
            worst = max(worst, abs(coherence(up) - coherence(low)))
            worst = max(worst, abs(mean_energy(up, SPECTRUM) - mean_energy(low, SPECTRUM)))
    passed = worst < 1e-10
    report(4, "branch continuity", passed, f"max junction mismatch {worst:.1e}")
    assert passed


def test_05_mixed_state_plateau():
    start = time.perf_counter()
    p_values = [0.05, 0.1, 0.15, 0.2, 0.25, 0.3, 0.35, 0.4]
    worst_spread = 0.0
    thresholds = {}
    for eta in (0.5, 0.75, 1.0):
        points = mixed_scan(eta, p_values)
        worst_spread = max(
            worst_spread,
            float(np.ptp([pt.coherence for pt in points])),
            float(np.ptp([pt.mean_energy for pt in points])),
        )
        thresholds[eta] = plateau_threshold(eta)
    elapsed = time.perf_counter() - start
    passed = worst_spread < 1e-6 and all(v >= 0.5 for v in thresholds.values())
    detail = (
        f"max (C, E) spread {worst_spread:.1e}, thresholds "
        + ", ".join(f"eta={k:g}: {v:.4f}" for k, v in thresholds.items())
        + f", {elapsed:.1f}s"
    )
    report(5, "mixed-state plateau", passed, detail)
    assert passed


def test_06_sequential_equivalence():
    rng = np.random.default_rng(42)
    worst_residual = 0.0
    worst_completeness = 0.0
    for _ in range(20):
        mags = rng.uniform(0.0, 1.0, size=4)
        phases = rng.uniform(0.0, 2 * np.pi, size=4)
        filt = DiagonalFilter(mags * np.exp(1j * phases))
        p = float(rng.uniform(0.05, 0.95))
        eta = float(rng.uniform(0.0, 1.0))
        off = eta * np.sqrt(p * (1 - p))
        state = QState(np.array([[1 - p, off], [off, p]], dtype=complex))
        kraus = reduced_kraus(filt, state)
        povm = sequential_povm(kraus)
        for plus, minus in povm.stages:
            closure = np.abs(np.diag(plus)) ** 2 + np.abs(np.diag(minus)) ** 2
            worst_completeness = max(worst_completeness, float(np.max(np.abs(closure - 1))))
        try:
            mixture, p_total, _ = simulate_sequential(povm, state)
        except Exception:
            continue  # fully annihilating draw; nothing to compare
        residual = float(np.max(np.abs(mixture.matrix * p_total - kraus.apply_mixture(state))))
        worst_residual = max(worst_residual, residual)
    passed = worst_residual < 1e-10 and worst_completeness < 1e-10
    report(
        6,
        "sequential-measurement equivalence",
        passed,
        f"max residual {worst_residual:.1e}, max completeness defect {worst_completeness:.1e}",
    )
    assert passed


def test_07_no_iterative_advantage():
    start = time.perf_counter()
    p = 0.1
    single = product_pure_state(p, 1)
    pair = product_pure_state(p, 2)
    # ground-removing stages reach only small total P_S; factorized stages
    # with b >= 0.75 keep the total P_S inside the oracle's resolved range
    protocols = [TwoQubitFilterParams(a=0.0, b=b) for b in np.linspace(0.55, 1.0, 10)]
    protocols += [
        TwoQubitFilterParams(a=b * b, b=b) for b in np.linspace(0.75, 1.0, 10)
    ]
    worst_excess = -np.inf
    for params in protocols:
        stage = params.to_filter()
        kraus, sigma = compose_iteration(stage, stage, single)
        p_total = float(np.trace(sigma).real)
        iterative_c = coherence(QState(sigma / p_total))
        best = grid_search(
            pair, SPECTRUM, FilterTarget.COHERENCE, p_total, grid_step=0.04
        )
        worst_excess = max(worst_excess, iterative_c - best.objective)
    elapsed = time.perf_counter() - start
    passed = worst_excess <= 1e-6
    report(
        7,
        "no iterative advantage",
        passed,
        f"max excess over single-copy oracle {worst_excess:.2e}, {elapsed:.1f}s",
    )
    assert passed


def test_08_process_metrics():
    filt = TwoQubitFilterParams(a=0.32, b=0.8).to_filter()
    ideal = choi_of_filter(filt)
    purity, fidelity = process_metrics(ideal, ideal)
    ideal_ok = abs(purity - 1) < 1e-12 and abs(fidelity - 1) < 1e-12
    noisy = choi_of_filter(filt, PhaseProfile(phases=np.array([0.0, 0.2, -0.1, 0.0])))
    _, fid_noisy = process_metrics(noisy, ideal)
    compensated, _ = compensate_phases(noisy)
    _, fid_comp = process_metrics(compensated, ideal)
    injected_ok = fid_noisy < 1.0 and abs(fid_comp - 1.0) < 1e-9
    directional_ok = fid_comp >= fid_noisy
    passed = ideal_ok and injected_ok and directional_ok
    report(
        8,
        "process metrics",
        passed,
        f"ideal ({purity:.12f}, {fidelity:.12f}), injected F {fid_noisy:.4f} -> {fid_comp:.12f}",
    )
    assert passed


def test_09_ppbs_effective_filter():
    spec = InterferometerSpec(pbs_model=(1.0, 1.0 / np.sqrt(3.0)))
    filt, p_l = effective_filter(spec)
    a_err = abs(abs(filt.coeffs[0]) - 1 / 3)
    b_err = max(
        abs(abs(filt.coeffs[1]) - 1 / np.sqrt(3)), abs(abs(filt.coeffs[2]) - 1 / np.sqrt(3))
    )
    family_err = abs(abs(filt.coeffs[0]) - abs(filt.coeffs[1]) ** 2)
    passed = a_err < 1e-12 and b_err < 1e-12 and family_err < 1e-12
    report(
        9,
        "interferometric filter model",
        passed,
        f"|a|-1/3 = {a_err:.1e}, b-3^-0.5 = {b_err:.1e}, |a|-b^2 = {family_err:.1e}, P_L = {p_l:g}",
    )
    assert passed


def test_10_tsallis_pure_reduction():
    rng = np.random.default_rng(7)
    worst = 0.0
    for _ in range(10):
        v = rng.normal(size=4) + 1j * rng.normal(size=4)
        state = QState.pure(v)
        pops = state.populations
        floor = float(np.minimum(pops.min(), pops).sum())
        ps = float(rng.uniform(floor + 1e-6, 0.98))
        tsallis = tsallis_optimal_filter(state, ps)
        clipping = coherence_optimal_filter_pure(state, ps)
        worst = max(worst, float(np.max(np.abs(tsallis.intensities - clipping.intensities))))
    passed = worst < 1e-8
    report(10, "tsallis pure-state reduction", passed, f"max intensity mismatch {worst:.1e}")
    assert passed


def test_11_thermal_benchmark():
    from coherence_forge import EnergySpectrum

    beta = solve_inverse_temperature(EnergySpectrum([0.0, 1.0]), 0.25)
    beta_err = abs(beta - np.log(3.0))
    state = product_pure_state(0.1, 2)
    worst_violation = -np.inf
    e_max = float(SPECTRUM.levels[-1])
    for family in (FilterFamily.OPTIMAL, FilterFamily.FACTORIZED):
        points = trace_frontier(
            state, SPECTRUM, FilterTarget.COHERENCE, family, grid=120
        )
        for pt in points:
            if pt.mean_energy >= e_max - 1e-9:
                worst_violation = max(worst_violation, pt.coherence)
                continue
            bench = thermal_benchmark_state(SPECTRUM, pt.mean_energy)
            worst_violation = max(worst_violation, pt.coherence - coherence(bench))
    passed = beta_err < 1e-9 and worst_violation <= 1e-9
    report(
        11,
        "thermal benchmark",
        passed,
        f"beta - ln3 = {beta_err:.1e}, max coherence excess over benchmark {worst_violation:.1e}",
    )
    assert passed
