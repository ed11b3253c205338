"""End-to-end acceptance checks, one reported line per criterion."""
import math
import time

import numpy as np
import pytest

from srvsim.attack import attack_pipeline, infer_c_from_beta
from srvsim.cli import main
from srvsim.estimators import (
    chsh_at,
    estimate_correlation,
    estimate_marginals,
    scan_curve,
)
from srvsim.geometry import PlaneAngle, UnitVec3, angular_distance, circular_distance, sample_unit_sphere_batch
from srvsim.protocols import svozil_E_analytic, tb_outputs
from srvsim.streams import RandomStream

PI = math.pi
SETTINGS = (0.0, PI / 2, PI / 4, 3 * PI / 4)
N_SWEEP = 360
DELTA = PI / N_SWEEP
WORKERS = 4

pytestmark = pytest.mark.slow


def test_criterion_1_tb_correlation(report_line):
    start = time.perf_counter()
    thetas = np.arange(9) * PI / 8
    rows = scan_curve("tb", thetas, 10**6, seed=101, workers=WORKERS)
    elapsed = time.perf_counter() - start
    worst = max(abs(r.empirical + math.cos(r.theta)) for r in rows)
    ok = worst <= 5e-3 and elapsed < 60.0
    report_line(1, ok, f"max |E + cos| = {worst:.2e} (tol 5e-3), runtime {elapsed:.1f}s (< 60s)")
    assert ok


def test_criterion_2_perfect_anticorrelation(report_line):
    stream = RandomStream(102)
    bad = 0
    for a in sample_unit_sphere_batch(stream, 10):
        l1 = sample_unit_sphere_batch(stream.spawn(1), 10**5)
        l2 = sample_unit_sphere_batch(stream.spawn(2), 10**5)
        alpha, beta, _ = tb_outputs(a, a, l1, l2)
        bad += int(np.sum(alpha * beta != -1))
    est = estimate_correlation("tb", UnitVec3(0.3, -0.2, 0.9), UnitVec3(0.3, -0.2, 0.9), 10**5, seed=7)
    ok = bad == 0 and est.mean == -1.0
    report_line(2, ok, f"{bad} rounds with alpha*beta != -1 over 10 axes x 1e5 rounds; "
                       f"estimator mean {est.mean}")
    assert ok


def test_criterion_3_marginals(report_line):
    stream = RandomStream(103)
    pts = sample_unit_sphere_batch(stream, 10)
    worst = 0.0
    for i in range(5):
        m = estimate_marginals("tb", pts[2 * i], pts[2 * i + 1], 10**6, seed=200 + i, workers=WORKERS)
        worst = max(worst, abs(m.mean_alpha), abs(m.mean_beta))
    ok = worst <= 5e-3
    report_line(3, ok, f"max |<alpha>|, |<beta>| = {worst:.2e} over 5 pairs (tol 5e-3)")
    assert ok


def test_criterion_4_tb_chsh(report_line):
    rep = chsh_at("tb", SETTINGS, n=10**6, seed=104, workers=WORKERS)
    err = abs(rep.S_max - 2 * math.sqrt(2))
    ok = err <= 2e-2
    report_line(4, ok, f"S_max = {rep.S_max:.4f}, |S_max - 2sqrt2| = {err:.2e} (tol 2e-2)")
    assert ok


def test_criterion_5_svozil_agreement(report_line):
    grid = np.linspace(0.0, PI, 33)
    worst = 0.0
    for k, omega in enumerate((0.0, PI / 4, PI / 2)):
        rows = scan_curve("svozil", grid, 10**6, seed=105 + k, omega=omega, workers=WORKERS)
        worst = max(worst, max(abs(r.empirical - r.analytic) for r in rows))
    linear = float(np.max(np.abs(svozil_E_analytic(grid, 0.0) - (2 * grid / PI - 1))))
    ok = worst <= 5e-3 and linear <= 1e-12
    report_line(5, ok, f"max |E_hat - E| = {worst:.2e} (tol 5e-3); "
                       f"omega=0 vs 2theta/pi-1 max diff {linear:.1e}")
    assert ok


def test_criterion_6_svozil_chsh(report_line):
    analytic = chsh_at("svozil", SETTINGS, omega=PI / 2)
    mc = chsh_at("svozil", SETTINGS, omega=PI / 2, n=10**6, seed=106, workers=WORKERS)
    ok = analytic.S_max == 4.0 and abs(mc.S_max - 4.0) <= 2e-2
    report_line(6, ok, f"analytic S_max = {analytic.S_max!r} (exact 4), MC S_max = {mc.S_max:.4f} "
                       f"(tol 2e-2); two-term form = {analytic.two_term:.4f}")
    assert ok


@pytest.fixture(scope="module")
def attack_runs():
    stream = RandomStream(107)
    sphere = sample_unit_sphere_batch(stream, 1000)
    circle = stream.spawn(1).uniform(0.0, 2 * PI, 1000)
    runs = {"tb": [], "ntb": [], "svozil": [], "ns": []}
    for v in sphere:
        a = UnitVec3.from_array(v)
        for p in ("tb", "ntb"):
            runs[p].append((a, attack_pipeline(p, a, N_SWEEP)))
    for x in circle:
        a = PlaneAngle(float(x))
        for p in ("svozil", "ns"):
            runs[p].append((a, attack_pipeline(p, a, N_SWEEP, omega=PI / 2)))
    return runs


def _errors(runs):
    err, sign_ok = [], 0
    for a, est in runs:
        if isinstance(a, PlaneAngle):
            err.append(circular_distance(a, est.signed_direction))
            sign_ok += err[-1] < PI / 2
        else:
            err.append(angular_distance(a, est.signed_direction))
            sign_ok += a.dot(est.signed_direction) > 0
    return np.array(err), sign_ok


def test_criterion_7_attack_accuracy(report_line, attack_runs):
    parts, ok = [], True
    for p in ("tb", "svozil"):
        err, sign_ok = _errors(attack_runs[p])
        frac = float(np.mean(err <= 2 * DELTA))
        good = frac >= 0.99 and sign_ok == len(err)
        ok &= good
        parts.append(f"{p}: {100 * frac:.1f}% within 2delta, max {err.max() / DELTA:.2f}delta, "
                     f"sign {sign_ok}/{len(err)}")
    report_line(7, ok, "; ".join(parts))
    assert ok


def test_criterion_8_attack_equivalence(report_line, attack_runs):
    ok, parts = True, []
    for cbit, box in (("tb", "ntb"), ("svozil", "ns")):
        same = sum(e1 == e2 for (_, e1), (_, e2) in zip(attack_runs[cbit], attack_runs[box]))
        box_bits = {t.cbits_per_round for _, e in attack_runs[box] for t in e.transcripts}
        cbit_bits = {t.cbits_per_round for _, e in attack_runs[cbit] for t in e.transcripts}
        box_c = all(t.c is None for _, e in attack_runs[box] for t in e.transcripts)
        good = same == 1000 and box_bits == {0} and cbit_bits == {1} and box_c
        ok &= good
        parts.append(f"{box}=={cbit} in {same}/1000, cbits/round {sorted(box_bits)} vs {sorted(cbit_bits)}")
    report_line(8, ok, "; ".join(parts))
    assert ok


def test_criterion_9_c_inference(report_line):
    stream = RandomStream(109)
    raw = sample_unit_sphere_batch(stream, 200)
    wrong = unknown_mismatch = decided = 0
    for i in range(100):
        l1 = raw[2 * i]
        l2 = raw[2 * i + 1] - (raw[2 * i + 1] @ l1) * l1
        l2 /= np.linalg.norm(l2)
        # Alice settings that make the protocol emit c = +1 and c = -1
        forcing = {1: l1 + 0.5 * l2, -1: l1 - 0.5 * l2}
        for deg in range(360):
            phi = math.radians(deg)
            b = math.cos(phi) * l1 + math.sin(phi) * l2
            on_boundary = deg % 90 == 45
            # c-blind exactly within 45 degrees of +-lambda1 (between lambda_plus and lambda_minus)
            blind = min(deg % 180, 180 - deg % 180) < 45
            for c_true, a in forcing.items():
                _, beta, c = tb_outputs(a, b, l1, l2)
                assert c == c_true
                got = infer_c_from_beta(b, l1, l2, int(beta))
                if got is not None:
                    decided += 1
                    # brute force: replaying the protocol with c = got reproduces beta,
                    # with the opposite c it does not
                    redo = tb_outputs(forcing[int(got)], b, l1, l2)[1]
                    other = tb_outputs(forcing[-int(got)], b, l1, l2)[1]
                    wrong += got != c_true or redo != beta or other == beta
                if not on_boundary and (got is None) != blind:
                    unknown_mismatch += 1
    ok = wrong == 0 and unknown_mismatch == 0
    report_line(9, ok, f"{wrong} wrong answers in {decided} decided cases; "
                       f"{unknown_mismatch} Unknown results off the predicted quadrants")
    assert ok


def test_criterion_10_reproducibility(report_line, tmp_path):
    commands = [
        ["correlate", "--protocol", "tb", "--n-samples", "200000", "--grid-points", "5"],
        ["correlate", "--protocol", "ns", "--omega", "0.7", "--n-samples", "200000", "--grid-points", "5"],
        ["svozil-curve", "--omega", "1.5707963", "--n-samples", "150000", "--grid-points", "5"],
        ["chsh", "--protocol", "tb", "--n-samples", "200000"],
        ["attack", "--protocol", "ntb", "--n-sweep", "360"],
        ["attack", "--protocol", "svozil", "--omega", "1.2", "--n-sweep", "180", "--format", "json"],
    ]
    mismatches = 0
    for i, cmd in enumerate(commands):
        blobs = []
        for run, workers in enumerate(("1", "4", "1")):
            d = tmp_path / f"c{i}_{run}"
            d.mkdir()
            assert main(cmd + ["--seed", "11", "--workers", workers, "--out", str(d / "out")]) == 0
            blobs.append({p.name: p.read_bytes() for p in sorted(d.iterdir())})
        mismatches += not (blobs[0] == blobs[1] == blobs[2])
    ok = mismatches == 0
    report_line(10, ok, f"{len(commands) - mismatches}/{len(commands)} commands byte-identical "
                        f"across reruns and --workers 1/4")
    assert ok
