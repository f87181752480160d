"""Acceptance criteria, one test per criterion.

Each test records a single ``PASS``/``FAIL`` line before asserting; the
lines are listed in an "acceptance criteria" section of the pytest terminal
summary.  Criteria 6 and 7 run full-scale sweeps and are
tagged ``slow``; deselect them with ``-m "not slow"``.

Run directly with ``python tests/test_acceptance.py`` to get only the
summary lines.
"""

import json
import os
import sys
import time
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).parent))

from conftest import ACCEPTANCE_LINES, crandn, exhaustive_optimum, small_channel  # noqa: E402
from switchbf.channel import ArrayGeometry, ChannelConfig, generate_channel  # noqa: E402
from switchbf.cli import main as cli_main  # noqa: E402
from switchbf.connectivity import interleaved_spec  # noqa: E402
from switchbf.experiment import default_config, emit_plot, run_sweep, summarize, write_records, write_summary  # noqa: E402
from switchbf.metrics import (  # noqa: E402
    LinkBudget,
    channel_svd,
    frobenius_surrogate,
    mi_from_gains,
    numerical_rank,
    truncated_channel,
)
from switchbf.nm import NmConfig, design_shd_nm, linearized_gradient  # noqa: E402
from switchbf.qrqu import ProjectionState, QrquConfig, design_shd_qrqu, qr_diagonal_gains  # noqa: E402

# tolerances and thresholds
NM_RATIO, NM_SHARE = 0.90, 0.90
QRQU_RATIO, QRQU_SHARE = 0.85, 0.80
BOUND_TOL = 1e-9
IDENTITY_RTOL = 1e-8
IDENTITY_REG_EPS = 1e-14
COLUMN_TOL = 1e-12
POWER_TOL = 1e-8
UNITARY_TOL = 1e-8
NORM_REL = 0.05
FD_TOL = 1e-6

RESULTS_DIR = os.environ.get("SWITCHBF_RESULTS_DIR")


def report(n, ok, detail):
    line = f"{'PASS' if ok else 'FAIL'} criterion {n}: {detail}"
    ACCEPTANCE_LINES.append(line)
    print(line)
    return ok


def _mid_channel(seed):
    cfg = ChannelConfig(8, 10, ArrayGeometry.sector(4, 4), ArrayGeometry(2, 2), seed=seed)
    return generate_channel(cfg).h


def test_criterion_1_exhaustive_oracle():
    t0 = time.perf_counter()
    budget = LinkBudget(1.0, 2)
    nm_ratio, qr_ratio = [], []
    for seed in range(20):
        h = small_channel(seed)
        opt = exhaustive_optimum(h, k_t=2, n_s=2, rho=1.0)
        nm = design_shd_nm(h, budget, 2, NmConfig(seed=seed)).mutual_information
        qr = design_shd_qrqu(h, budget, 2, QrquConfig(seed=seed)).mutual_information
        nm_ratio.append(nm / opt)
        qr_ratio.append(qr / opt)
    elapsed = time.perf_counter() - t0
    nm_share = np.mean(np.array(nm_ratio) >= NM_RATIO)
    qr_share = np.mean(np.array(qr_ratio) >= QRQU_RATIO)
    ok = nm_share >= NM_SHARE and qr_share >= QRQU_SHARE and elapsed < 120
    report(1, ok, f"SHD-NM >= {NM_RATIO} x opt in {nm_share:.0%} (min ratio {min(nm_ratio):.3f}), "
                  f"SHD-QRQU >= {QRQU_RATIO} x opt in {qr_share:.0%} (min ratio {min(qr_ratio):.3f}), "
                  f"{elapsed:.1f} s")
    assert ok


def test_criterion_2_qr_bound():
    rng = np.random.default_rng(2)
    shapes = [(2, 2), (3, 2), (4, 4), (6, 3), (8, 4), (5, 5), (16, 4), (10, 8), (4, 2), (12, 12)]
    worst, fails, count = np.inf, 0, 0
    for shape in shapes:
        for _ in range(100):
            m = crandn(rng, *shape)
            n_s = int(rng.integers(1, min(shape) + 1))
            c = 10.0 ** rng.uniform(-2, 2)
            s = np.linalg.svd(m, compute_uv=False)[:n_s]
            sv = mi_from_gains(s ** 2, c)
            qr = mi_from_gains(qr_diagonal_gains(m)[:n_s], c)
            margin = sv - qr
            worst = min(worst, margin)
            fails += margin < -BOUND_TOL
            count += 1
    ok = fails == 0 and count == 1000
    report(2, ok, f"{count - fails}/{count} matrices satisfy I(sigma^2) >= I(|R_ii|^2), worst margin {worst:.2e}")
    assert ok


def _identity_errors(reg_eps, seed=3, count=200):
    rng = np.random.default_rng(seed)
    errors = []
    while len(errors) < count:
        n_t = int(rng.integers(3, 9))
        n_r = int(rng.integers(2, 6))
        n_s = int(rng.integers(2, min(n_r, n_t) + 1))
        h1 = truncated_channel(crandn(rng, n_r, n_t), n_s)
        i = int(rng.integers(1, n_s))  # number of fixed columns
        fixed = (rng.random((n_t, i)) < 0.5).astype(float)
        if numerical_rank(h1 @ fixed) < i:
            continue
        f = rng.random(n_t)
        a = ProjectionState.initial(h1).advance(h1, fixed, reg_eps).a
        quad = float(np.real(f @ a @ f))
        r = np.linalg.qr(h1 @ np.column_stack([fixed, f]), mode="r")
        direct = abs(r[i, i]) ** 2
        errors.append(abs(quad - direct) / direct)
    return np.array(errors)


def test_criterion_3_quadratic_form_identity():
    # the identity concerns the exact projector; the regularizer adds a bias
    # proportional to reg_eps, so it is checked in the reg_eps -> 0 regime and
    # the error at the design default is reported alongside
    exact = _identity_errors(IDENTITY_REG_EPS)
    default = _identity_errors(QrquConfig().reg_eps)
    ok = exact.max() <= IDENTITY_RTOL
    report(3, ok, f"{exact.size} instances, worst relative error {exact.max():.2e} at reg_eps={IDENTITY_REG_EPS:g} "
                  f"({default.max():.2e} at the default reg_eps={QrquConfig().reg_eps:g}, "
                  f"{int(np.sum(default > IDENTITY_RTOL))} above tolerance)")
    assert ok


_designs = {}


def _monotonicity_runs():
    if not _designs:
        nm, qr = [], []
        spec = interleaved_spec(16, 4)
        for seed in range(100):
            h = _mid_channel(1000 + seed)
            b = LinkBudget(10.0 ** ((seed % 5 - 2) / 2), 2)
            mask = spec if seed % 2 else None
            nm.append(design_shd_nm(h, b, 4, NmConfig(seed=seed), mask))
            qr.append(design_shd_qrqu(h, b, 4, QrquConfig(seed=seed), mask))
        _designs["nm"], _designs["qr"] = nm, qr
    return _designs["nm"], _designs["qr"]


def test_criterion_4_monotonicity():
    nm, qr = _monotonicity_runs()
    nm_ok = sum(bool(np.all(np.diff(r.mi_trace) >= 0)) for r in nm)
    steps = sum(len(r.mi_trace) - 1 for r in nm)
    col_worst = min(float(np.min(np.diff(t))) for r in qr for t in r.column_traces if len(t) > 1)
    ok = nm_ok == len(nm) and col_worst >= -COLUMN_TOL
    report(4, ok, f"(a) {nm_ok}/{len(nm)} SHD-NM traces non-decreasing over {steps} accepted steps; "
                  f"(b) worst per-column step change {col_worst:.2e}")
    assert ok


def test_criterion_5_power_and_unitarity():
    nm, qr = _monotonicity_runs()
    reports = nm + qr
    power_err = max(abs(r.precoder.power - 2) for r in reports)
    clean = [r for r in reports if not r.psd_repaired]
    unit_err = max(np.linalg.norm(r.precoder.f.conj().T @ r.precoder.f - np.eye(2)) for r in clean)
    ok = power_err <= POWER_TOL and unit_err <= UNITARY_TOL
    report(5, ok, f"{len(reports)} designs, max | ||F||^2 - Ns | = {power_err:.1e}; "
                  f"{len(clean)} without PSD repair, max ||F^H F - I|| = {unit_err:.1e}")
    assert ok


def _slack_ok(a, b):
    return a.mean >= b.mean - max(a.stderr, b.stderr)


def _save(name, records, summary):
    if not RESULTS_DIR:
        return
    out = Path(RESULTS_DIR)
    out.mkdir(parents=True, exist_ok=True)
    write_records(records, out / f"{name}_records.csv")
    write_summary(summary, out / f"{name}_summary.csv")
    emit_plot(summary, out / f"{name}.svg")


@pytest.mark.slow
def test_criterion_6_full_scale_trends():
    t0 = time.perf_counter()
    cfg = default_config(methods=("UOP", "SHD-NM", "SHD-QRQU", "SHD-NM-PC"),
                         connectivity=interleaved_spec(64, 4, 2))
    records = run_sweep(cfg)
    summary = summarize(records)
    _save("fig_ns2", records, summary)
    rows = {(r.method, r.snr_db): r for r in summary}
    snrs = cfg.snr_db_list
    failures = []
    for s in snrs:
        for hi, lo in (("UOP", "SHD-NM"), ("SHD-NM", "SHD-QRQU"), ("SHD-NM", "SHD-NM-PC")):
            if not _slack_ok(rows[hi, s], rows[lo, s]):
                failures.append(f"{hi} {rows[hi, s].mean:.3f} < {lo} {rows[lo, s].mean:.3f} at {s:g} dB")
    for m in cfg.methods:
        means = [rows[m, s].mean for s in snrs]
        if not np.all(np.diff(means) > 0):
            failures.append(f"{m} not strictly increasing in SNR")
    table = "; ".join(f"{s:g} dB: " + "/".join(f"{rows[m, s].mean:.2f}" for m in cfg.methods) for s in snrs)
    elapsed = (time.perf_counter() - t0) / 60
    ok = not failures
    report(6, ok, f"UOP/NM/QRQU/NM-PC means {table}; {elapsed:.1f} min"
                  + ("" if ok else "; violations: " + "; ".join(failures)))
    assert ok, failures


@pytest.mark.slow
def test_criterion_7_square_baseband_pc():
    cfg = default_config(k_t=4, n_s_list=[4], methods=("SHD-NM-PC", "SHD-QRQU-PC"),
                         connectivity=interleaved_spec(64, 4, 2))
    records = run_sweep(cfg)
    summary = summarize(records)
    _save("fig_ns4_pc", records, summary)
    rows = {(r.method, r.snr_db): r for r in summary}
    bad = [s for s in cfg.snr_db_list if not _slack_ok(rows["SHD-QRQU-PC", s], rows["SHD-NM-PC", s])]
    table = "; ".join(f"{s:g} dB: {rows['SHD-QRQU-PC', s].mean:.2f} vs {rows['SHD-NM-PC', s].mean:.2f}"
                      for s in cfg.snr_db_list)
    ok = not bad
    report(7, ok, f"SHD-QRQU-PC vs SHD-NM-PC (Ns=kt=4): {table}")
    assert ok


def test_criterion_8_channel_normalization():
    cfg = ChannelConfig(8, 10, ArrayGeometry(8, 8), ArrayGeometry(4, 4))
    rng = np.random.default_rng(8)
    n = 10_000
    total = sum(np.linalg.norm(generate_channel(cfg, rng).h) ** 2 for _ in range(n))
    ratio = total / n / (64 * 16)
    ok = abs(ratio - 1) <= NORM_REL
    report(8, ok, f"mean ||H||_F^2 / (Nt Nr) = {ratio:.4f} over {n} omni realizations")
    assert ok


def test_criterion_9_determinism_and_gradient(tmp_path):
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({"tx_dims": [4, 4], "rx_dims": [2, 2], "k_t": 4, "trials": 3,
                               "snr_db": [-5, 0, 5], "methods": ["UOP", "SHD-NM", "SHD-QRQU", "SHD-NM-PC"],
                               "connectivity": "interleaved:2"}))
    for name in ("a.csv", "b.csv"):
        assert cli_main(["sweep", "--config", str(cfg), "--out", str(tmp_path / name)]) == 0
    a, b = (tmp_path / "a.csv").read_bytes(), (tmp_path / "b.csv").read_bytes()
    identical = a == b and len(a) > 0

    rng = np.random.default_rng(9)
    worst = 0.0
    eps = 1e-5
    for _ in range(50):
        n_t, k_t, n_s = int(rng.integers(4, 17)), int(rng.integers(2, 5)), 2
        v1 = channel_svd(crandn(rng, 4, n_t)).v[:, :n_s]
        f = rng.random((n_t, k_t))
        g = linearized_gradient(v1, f)
        for idx in np.ndindex(f.shape):
            e = np.zeros_like(f)
            e[idx] = eps
            fd = (frobenius_surrogate(v1, f + e) - frobenius_surrogate(v1, f - e)) / (2 * eps)
            worst = max(worst, abs(fd - g[idx]))
    ok = identical and worst <= FD_TOL
    report(9, ok, f"sweep CSV byte-identical across runs: {identical} ({len(a)} bytes); "
                  f"gradient vs central differences on 50 points, max error {worst:.1e}")
    assert ok


if __name__ == "__main__":
    sys.exit(pytest.main([__file__, "-q", "-p", "no:cacheprovider"] + sys.argv[1:]))
