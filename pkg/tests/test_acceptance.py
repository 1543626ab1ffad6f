"""End-to-end acceptance runs at their stated tolerances.

Each test prints one ``[PASS]``/``[FAIL]`` line, repeated in the terminal
summary. The Fibonacci scan is the slow one (several minutes).
"""
import json
import time

import numpy as np
import pytest

from geopump.cli import main
from geopump.drive import DriveProtocol, fibonacci_ratios, phases_array, sample_initial_phases
from geopump.ensemble import EnsembleConfig, run_ensemble, sigma_slope_scan
from geopump.evolution import IntegratorConfig, curvature_pump_reference, evolve_pump
from geopump.geometry import euler_class
from geopump.tripod import InitialStateSpec, TripodModel
from geopump.verify import run_checks

REF_SLOPE = -0.4 * 0.6 / np.pi  # -0.076394...
SEED = 42
SCAN_T_END = 1000.0

MODEL = TripodModel(delta=1.0, m=0.5)
INIT = InitialStateSpec(c=1 / np.sqrt(2), dphi=np.pi / 2)
PHI0 = tuple(phases_array(sample_initial_phases(SEED, 1))[0])
PROTO = DriveProtocol(PHI0, 0.4, 3, 2)
BASE = EnsembleConfig(delta=1.0, m=0.5, omega=0.4, p=3, q=2, c=1 / np.sqrt(2), dphi=np.pi / 2, n_traj=400, seed=SEED, t_end=200.0, dt=0.01)


@pytest.fixture(scope="module")
def single_run():
    t0 = time.perf_counter()
    trace = evolve_pump(MODEL, PROTO, INIT, 200.0, IntegratorConfig(dt=0.01, stride=1))
    return trace, time.perf_counter() - t0


@pytest.fixture(scope="module")
def reference_ensemble():
    t0 = time.perf_counter()
    stats = run_ensemble(BASE, threads=1)
    return stats, time.perf_counter() - t0


def test_euler_class_quantization(report):
    t0 = time.perf_counter()
    cases = {0.5: 2, 1.5: 2, -0.5: -2, 3.0: 0}
    chis = {m: euler_class(TripodModel(m=m), axes=(1, 0), grid=(128, 128)).chi for m in cases}
    elapsed = time.perf_counter() - t0
    worst = max(abs(chis[m] - cases[m]) for m in cases)
    ok = worst < 1e-6 and elapsed < 5.0
    detail = ", ".join(f"chi21(m={m})={chis[m]:.9f}" for m in cases)
    assert report("euler-class quantization", ok, f"{detail}; max dev {worst:.1e} (<1e-6); {elapsed:.2f}s (<5s)")


def test_transitionless_property(report, single_run):
    trace, elapsed = single_run
    t0 = time.perf_counter()
    half = evolve_pump(MODEL, PROTO, INIT, 200.0, IntegratorConfig(dt=0.005, stride=2))
    elapsed += time.perf_counter() - t0
    leak, leak_half = np.max(trace.transitionless_err), np.max(half.transitionless_err)
    norm = np.max(trace.norm_err)
    ratio = leak / leak_half
    ok = leak < 1e-5 and norm < 1e-8 and ratio >= 8.0 and elapsed < 2.0
    assert report(
        "transitionless property",
        ok,
        f"max leak {leak:.2e} (<1e-5), max norm err {norm:.2e} (<1e-8), dt-halving gain {ratio:.1f}x (>=8x), {elapsed:.2f}s (<2s)",
    )


def test_two_path_energy_equivalence(report, single_run):
    trace, _ = single_run
    t0 = time.perf_counter()
    _, e_geo = curvature_pump_reference(MODEL, PROTO, INIT, 200.0, steps=len(trace.t) - 1)
    elapsed = time.perf_counter() - t0
    diff = np.max(np.abs(trace.E2 - e_geo[:, 1]))
    scale = np.max(np.abs(trace.E2))
    ok = diff < 1e-4 * scale and elapsed < 5.0
    assert report("two-path energy equivalence", ok, f"max|dE2| {diff:.2e} vs bound {1e-4 * scale:.2e}; {elapsed:.2f}s (<5s)")


def test_zero_sum_and_dead_channels(report, single_run):
    trace, _ = single_run
    total = np.max(np.abs(trace.E1 + trace.E2))
    dead = np.max(np.abs(trace.energy_h0))
    ok = total < 1e-6 and dead < 1e-6
    assert report("zero-sum and dead channels", ok, f"max|E1+E2| {total:.2e} (<1e-6), max|E'| {dead:.2e} (<1e-6)")


def test_central_result(report, reference_ensemble):
    stats, elapsed = reference_ensemble
    rel = abs(stats.slope - REF_SLOPE) / abs(REF_SLOPE)
    ok = rel < 0.10 and elapsed < 180.0
    assert report(
        "phase-averaged pumping rate",
        ok,
        f"slope {stats.slope:.6f} vs {REF_SLOPE:.6f}, rel err {rel:.4f} (<0.10); {elapsed:.1f}s single-threaded (<180s)",
    )


def test_control_laws(report, reference_ensemble):
    stats, _ = reference_ensemble
    base = abs(stats.slope)
    flipped = run_ensemble(BASE.replace(dphi=-np.pi / 2)).slope
    no_mix = run_ensemble(BASE.replace(c=0.0)).slope
    real = run_ensemble(BASE.replace(dphi=0.0)).slope
    trivial = run_ensemble(BASE.replace(m=3.0)).slope
    antisym = abs(flipped + stats.slope)
    ok = antisym < 1e-6 and abs(no_mix) < 0.01 * base and abs(real) < 0.01 * base and abs(trivial) < 0.05 * base
    assert report(
        "control laws",
        ok,
        f"|s(-dphi)+s(dphi)| {antisym:.1e} (<1e-6); |s(c=0)|/|s| {abs(no_mix) / base:.1e} (<0.01); "
        f"|s(dphi=0)|/|s| {abs(real) / base:.1e} (<0.01); |s(m=3)|/|s| {abs(trivial) / base:.1e} (<0.05)",
    )


def test_fibonacci_fluctuation_decay(report):
    t0 = time.perf_counter()
    scan = sigma_slope_scan(BASE.replace(t_end=SCAN_T_END), fibonacci_ratios(6), threads=1)
    elapsed = time.perf_counter() - t0
    slopes = [s for _, s in scan]
    halved = slopes[-1] < 0.5 * slopes[1]
    monotone = all(b <= 1.1 * a for a, b in zip(slopes, slopes[1:]))
    ok = halved and monotone and elapsed < 1200.0
    table = ", ".join(f"{p}/{q}:{s:.2e}" for (p, q), s in zip(fibonacci_ratios(6), slopes))
    assert report(
        "fibonacci fluctuation decay",
        ok,
        f"sigma slopes [{table}] at t_end={SCAN_T_END:g}; 21/13 < half of 3/2: {halved}; "
        f"non-increasing within 10%: {monotone}; {elapsed:.0f}s (<1200s)",
    )


def test_geometry_identity_suite(report):
    t0 = time.perf_counter()
    names = ["kgp_block_offdiag", "projector_identity", "wilczek_zee_equivalence", "real_frame_diagonal"]
    results = run_checks(names, model=MODEL)
    elapsed = time.perf_counter() - t0
    ok = all(r.passed for r in results) and elapsed < 30.0
    detail = "; ".join(f"{r.name} {r.value:.1e} (<{r.bound:.0e})" for r in results)
    assert report("geometry identity suite", ok, f"{detail}; {elapsed:.1f}s (<30s)")


def _snapshot(root):
    return {p.relative_to(root).as_posix(): p.read_bytes() for p in sorted(root.rglob("*")) if p.is_file()}


def test_reproducibility(report, tmp_path, capsys):
    config = {"n_traj": 250, "t_end": 40.0, "scan_t_end": 40.0, "fib_depth": 3}
    cfg_path = tmp_path / "run.json"
    cfg_path.write_text(json.dumps(config))
    snaps, outs = [], []
    for run, threads in enumerate(("1", "1", "3")):
        out = tmp_path / f"run{run}"
        for cmd in (["euler"], ["simulate"], ["ensemble"], ["scan-fib"]):
            code = main(cmd + ["--config", str(cfg_path), "--out", str(out), "--threads", threads])
            assert code == 0
        outs.append(capsys.readouterr().out.replace(str(out), "<out>"))
        snaps.append(_snapshot(out))
    files = sorted(snaps[0])
    same = all(s == snaps[0] for s in snaps[1:]) and all(o == outs[0] for o in outs[1:])
    ok = same and files == ["ensemble.csv", "euler.json", "scan.csv", "scan.json", "summary.json", "trace.csv"]
    assert report("bitwise reproducibility", ok, f"{len(files)} output files identical across reruns and 1 vs 3 threads: {same}")
