"""Monte-Carlo spectral-efficiency sweeps, summaries and SVG plots.

Every trial draws one channel that is shared by all methods, SNR points and
stream counts, so the resulting curves are paired.  SHD-NM scores candidate
steps with the true mutual information, which depends on the SNR, so it is
redesigned at every SNR point.  SHD-QRQU and the unconstrained optimum do
not depend on the SNR and are designed once per (trial, N_s).
"""

from __future__ import annotations

import csv
import io
import time
from collections import defaultdict
from dataclasses import dataclass, field, fields, replace
from pathlib import Path

import numpy as np

from .channel import ArrayGeometry, ChannelConfig, generate_channel
from .connectivity import ConnectivitySpec
from .metrics import LinkBudget, mutual_information, optimal_precoder
from .nm import NmConfig, design_shd_nm
from .qrqu import QrquConfig, design_shd_qrqu

__all__ = [
    "METHODS",
    "ExperimentConfig",
    "MetricRecord",
    "SummaryRow",
    "ConfigError",
    "default_config",
    "trial_seed",
    "run_sweep",
    "summarize",
    "write_records",
    "read_records",
    "write_summary",
    "read_summary",
    "emit_plot",
]

METHODS = ("UOP", "SHD-NM", "SHD-QRQU", "SHD-NM-PC", "SHD-QRQU-PC")
PC_METHODS = ("SHD-NM-PC", "SHD-QRQU-PC")


class ConfigError(ValueError):
    pass


@dataclass
class ExperimentConfig:
    channel: ChannelConfig
    k_t: int = 4
    k_r: int = 4
    snr_db_list: list = field(default_factory=lambda: [-10.0, -5.0, 0.0, 5.0, 10.0])
    n_s_list: list = field(default_factory=lambda: [2])
    trials: int = 100
    methods: tuple = ("UOP", "SHD-NM", "SHD-QRQU")
    connectivity: ConnectivitySpec | None = None
    master_seed: int = 0
    output_path: str | None = None
    nm: NmConfig = field(default_factory=NmConfig)
    qrqu: QrquConfig = field(default_factory=QrquConfig)
    # wall-clock timings make the CSV non-reproducible, so they are opt-in
    record_timing: bool = False

    @property
    def n_t(self) -> int:
        return self.channel.tx_geometry.n_elements

    @property
    def n_r(self) -> int:
        return self.channel.rx_geometry.n_elements

    def check(self):
        if self.trials < 1:
            raise ConfigError("trials must be >= 1")
        unknown = set(self.methods) - set(METHODS)
        if unknown:
            raise ConfigError(f"unknown methods: {sorted(unknown)}")
        if not self.methods:
            raise ConfigError("no methods selected")
        if not self.snr_db_list or not self.n_s_list:
            raise ConfigError("snr_db_list and n_s_list must be non-empty")
        if any(m in PC_METHODS for m in self.methods):
            if self.connectivity is None:
                raise ConfigError("partially connected methods need a connectivity spec")
            if self.connectivity.g.shape != (self.n_t, self.k_t):
                raise ConfigError(f"connectivity is {self.connectivity.g.shape}, "
                                  f"expected ({self.n_t}, {self.k_t})")
        for n_s in self.n_s_list:
            if not 1 <= n_s <= self.k_t:
                raise ConfigError(f"N_s={n_s} must be in [1, k_t={self.k_t}]")
            if n_s > min(self.n_r, self.n_t):
                raise ConfigError(f"N_s={n_s} exceeds the array sizes")
        if not self.k_t <= self.n_t:
            raise ConfigError("k_t must not exceed N_t")


def default_config(**overrides) -> ExperimentConfig:
    """64-element sectorized UPA transmitter, 16-element omni receiver, 8x10 rays."""
    channel = ChannelConfig(
        n_clusters=8,
        n_rays=10,
        tx_geometry=ArrayGeometry.sector(8, 8),
        rx_geometry=ArrayGeometry(4, 4),
    )
    return replace(ExperimentConfig(channel=channel), **overrides)


@dataclass(frozen=True)
class MetricRecord:
    method: str
    snr_db: float
    n_s: int
    k_t: int
    trial: int
    seed: int
    spectral_efficiency: float
    runtime_ms: float = 0.0
    outer_iters: int = 0
    random_draws: int = 0


@dataclass(frozen=True)
class SummaryRow:
    method: str
    snr_db: float
    n_s: int
    count: int
    mean: float
    stderr: float


def trial_seed(master_seed: int, trial: int) -> int:
    """Per-trial 63-bit seed derived from ``(master_seed, trial)``."""
    state = np.random.SeedSequence([int(master_seed), int(trial)]).generate_state(1, dtype=np.uint64)[0]
    return int(state >> np.uint64(1))


def _design_seed(seed_t, *key):
    return int(np.random.SeedSequence([seed_t, *key]).generate_state(1, dtype=np.uint32)[0])


def _run_trial(config: ExperimentConfig, trial: int):
    seed_t = trial_seed(config.master_seed, trial)
    h = generate_channel(replace(config.channel, seed=seed_t)).h
    records = []
    timing = config.record_timing

    def emit(method, snr, n_s, se, elapsed, outer=0, draws=0):
        records.append(MetricRecord(method, float(snr), int(n_s), config.k_t, trial, seed_t,
                                    float(se), elapsed * 1e3 if timing else 0.0, int(outer), int(draws)))

    for n_s in config.n_s_list:
        for m_idx, method in enumerate(config.methods):
            mask = config.connectivity if method in PC_METHODS else None
            if method == "UOP":
                t0 = time.perf_counter()
                f_opt = optimal_precoder(h, n_s)
                elapsed = time.perf_counter() - t0
                for snr in config.snr_db_list:
                    emit(method, snr, n_s, mutual_information(h, f_opt, LinkBudget.from_snr_db(snr, n_s)), elapsed)
            elif method.startswith("SHD-QRQU"):
                t0 = time.perf_counter()
                qcfg = replace(config.qrqu, seed=_design_seed(seed_t, m_idx, n_s))
                rep = design_shd_qrqu(h, LinkBudget(1.0, n_s), config.k_t, qcfg, mask)
                elapsed = time.perf_counter() - t0
                for snr in config.snr_db_list:
                    se = mutual_information(h, rep.precoder, LinkBudget.from_snr_db(snr, n_s))
                    emit(method, snr, n_s, se, elapsed, rep.outer_iters, rep.random_draws)
            else:
                for s_idx, snr in enumerate(config.snr_db_list):
                    budget = LinkBudget.from_snr_db(snr, n_s)
                    ncfg = replace(config.nm, seed=_design_seed(seed_t, m_idx, n_s, s_idx))
                    t0 = time.perf_counter()
                    rep = design_shd_nm(h, budget, config.k_t, ncfg, mask)
                    elapsed = time.perf_counter() - t0
                    emit(method, snr, n_s, rep.mutual_information, elapsed, rep.outer_iters, rep.random_draws)
    return records


def _sort_key(rec: MetricRecord):
    return (rec.trial, METHODS.index(rec.method), rec.snr_db, rec.n_s)


def run_sweep(config: ExperimentConfig, progress=None) -> list[MetricRecord]:
    """Run every trial and return records sorted by (trial, method, snr, n_s).

    ``progress`` is an optional callable receiving the finished trial index.
    """
    config.check()
    records = []
    for t in range(config.trials):
        records.extend(_run_trial(config, t))
        if progress is not None:
            progress(t)
    return sorted(records, key=_sort_key)


def summarize(records) -> list[SummaryRow]:
    """Mean and standard error of spectral efficiency per (method, snr, n_s)."""
    records = list(records)
    if not records:
        raise ValueError("no records to summarize")
    groups = defaultdict(list)
    for r in records:
        groups[(r.method, r.snr_db, r.n_s)].append(r.spectral_efficiency)
    rows = []
    for (method, snr, n_s), vals in groups.items():
        v = np.asarray(vals, dtype=float)
        se = float(v.std(ddof=1) / np.sqrt(v.size)) if v.size > 1 else 0.0
        rows.append(SummaryRow(method, snr, n_s, int(v.size), float(v.mean()), se))
    order = {m: i for i, m in enumerate(METHODS)}
    return sorted(rows, key=lambda r: (order.get(r.method, len(order)), r.method, r.n_s, r.snr_db))


# -- CSV ---------------------------------------------------------------------

def _fmt(value):
    if isinstance(value, float):
        return f"{value:.9g}"
    return str(value)


def _to_csv(rows, cls):
    names = [f.name for f in fields(cls)]
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(names)
    for row in rows:
        writer.writerow([_fmt(getattr(row, n)) for n in names])
    return buf.getvalue()


def _from_csv(path, cls):
    types = {f.name: f.type for f in fields(cls)}
    casts = {"str": str, "float": float, "int": int}
    with open(path, newline="") as fh:
        reader = csv.DictReader(fh)
        missing = set(types) - set(reader.fieldnames or [])
        if missing:
            raise ValueError(f"{path}: missing columns {sorted(missing)}")
        return [cls(**{k: casts[types[k]](row[k]) for k in types}) for row in reader]


def write_records(records, path) -> None:
    Path(path).write_text(_to_csv(records, MetricRecord))


def read_records(path) -> list[MetricRecord]:
    return _from_csv(path, MetricRecord)


def write_summary(rows, path) -> None:
    Path(path).write_text(_to_csv(rows, SummaryRow))


def read_summary(path) -> list[SummaryRow]:
    return _from_csv(path, SummaryRow)


# -- SVG ---------------------------------------------------------------------

_COLORS = ("#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b", "#17becf", "#7f7f7f")
_W, _H = 640, 440
_LEFT, _RIGHT, _TOP, _BOTTOM = 70, 170, 30, 60


def _ticks(lo, hi, n=5):
    return [lo + (hi - lo) * k / (n - 1) for k in range(n)]


def _series(summary, x):
    other = "n_s" if x == "snr_db" else "snr_db"
    multi = len({getattr(r, other) for r in summary}) > 1
    series = defaultdict(list)
    for r in summary:
        label = r.method
        if multi:
            label += f" (Ns={r.n_s})" if other == "n_s" else f" ({r.snr_db:g} dB)"
        series[label].append((float(getattr(r, x)), r.mean))
    return {k: sorted(v) for k, v in series.items()}


def emit_plot(summary, path, x: str = "auto") -> None:
    """Write mean spectral efficiency curves as a standalone SVG.

    ``x`` is ``"snr_db"``, ``"n_s"`` or ``"auto"`` (SNR unless only the
    stream count varies).  Axes span the data range plus a 5% margin.
    """
    summary = list(summary)
    if not summary:
        raise ValueError("empty summary")
    if x == "auto":
        x = "n_s" if len({r.snr_db for r in summary}) == 1 and len({r.n_s for r in summary}) > 1 else "snr_db"
    if x not in ("snr_db", "n_s"):
        raise ValueError(f"unknown x axis {x!r}")
    series = _series(summary, x)

    xs = [p[0] for pts in series.values() for p in pts]
    ys = [p[1] for pts in series.values() for p in pts]
    x0, x1 = min(xs), max(xs)
    y0, y1 = min(ys), max(ys)
    dx = (x1 - x0) or 1.0
    dy = (y1 - y0) or 1.0
    x0, x1 = x0 - 0.05 * dx, x1 + 0.05 * dx
    y0, y1 = y0 - 0.05 * dy, y1 + 0.05 * dy

    pw, ph = _W - _LEFT - _RIGHT, _H - _TOP - _BOTTOM

    def px(v):
        return _LEFT + (v - x0) / (x1 - x0) * pw

    def py(v):
        return _TOP + ph - (v - y0) / (y1 - y0) * ph

    out = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{_W}" height="{_H}" '
        f'viewBox="0 0 {_W} {_H}" font-family="sans-serif" font-size="12">',
        f'<rect x="{_LEFT}" y="{_TOP}" width="{pw}" height="{ph}" fill="none" stroke="black"/>',
    ]
    for t in _ticks(x0, x1):
        out.append(f'<line x1="{px(t):.2f}" y1="{_TOP + ph}" x2="{px(t):.2f}" y2="{_TOP + ph + 5}" stroke="black"/>')
        out.append(f'<text x="{px(t):.2f}" y="{_TOP + ph + 18}" text-anchor="middle">{t:.3g}</text>')
    for t in _ticks(y0, y1):
        out.append(f'<line x1="{_LEFT - 5}" y1="{py(t):.2f}" x2="{_LEFT}" y2="{py(t):.2f}" stroke="black"/>')
        out.append(f'<text x="{_LEFT - 8}" y="{py(t) + 4:.2f}" text-anchor="end">{t:.3g}</text>')
    xlabel = "SNR (dB)" if x == "snr_db" else "Number of streams N_s"
    out.append(f'<text x="{_LEFT + pw / 2:.2f}" y="{_H - 15}" text-anchor="middle">{xlabel}</text>')
    out.append(f'<text x="18" y="{_TOP + ph / 2:.2f}" text-anchor="middle" '
               f'transform="rotate(-90 18 {_TOP + ph / 2:.2f})">Spectral efficiency (bits/s/Hz)</text>')

    for k, (label, pts) in enumerate(series.items()):
        color = _COLORS[k % len(_COLORS)]
        coords = " ".join(f"{px(a):.2f},{py(b):.2f}" for a, b in pts)
        out.append(f'<polyline fill="none" stroke="{color}" stroke-width="2" points="{coords}"/>')
        for a, b in pts:
            out.append(f'<circle cx="{px(a):.2f}" cy="{py(b):.2f}" r="3" fill="{color}"/>')
        ly = _TOP + 10 + 18 * k
        lx = _LEFT + pw + 12
        out.append(f'<line x1="{lx}" y1="{ly}" x2="{lx + 20}" y2="{ly}" stroke="{color}" stroke-width="2"/>')
        out.append(f'<text x="{lx + 26}" y="{ly + 4}">{label}</text>')
    out.append("</svg>")
    try:
        Path(path).write_text("\n".join(out) + "\n")
    except OSError as exc:
        raise OSError(f"cannot write plot to {path}: {exc}") from exc
