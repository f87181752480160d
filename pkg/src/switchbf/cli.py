"""Command line entry point: ``switchbf {design,sweep,plot,validate-spec}``.

Exit codes: 0 on success, 2 on configuration errors, 3 when a connectivity
spec is invalid or cannot support the requested number of streams.

Configuration files are JSON objects; every key is optional and command
line flags take precedence::

    {
      "seed": 0, "trials": 100,
      "snr_db": [-10, -5, 0, 5, 10], "n_s": [2],
      "methods": ["UOP", "SHD-NM", "SHD-QRQU"],
      "k_t": 4, "k_r": 4,
      "tx_dims": [8, 8], "rx_dims": [4, 4],
      "n_clusters": 8, "n_rays": 10, "angle_spread_deg": 7.5,
      "sector_azimuth_deg": 60, "sector_elevation_deg": 30,
      "confine_dod": true,
      "connectivity": "interleaved:2",
      "nm": {"max_outer": 1000, "max_random": 1000},
      "qrqu": {"inner_iters": 20},
      "output": "records.csv"
    }

``connectivity`` is a CONNSPEC1 file path, ``interleaved[:period]``,
``subset`` or ``full``.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
from dataclasses import replace
from pathlib import Path

import numpy as np

from .channel import ArrayGeometry, ChannelConfig, generate_channel, read_channel, write_channel
from .connectivity import (
    InfeasibleMaskError,
    fully_connected,
    interleaved_spec,
    read_spec,
    subset_partition,
    validate,
)
from .experiment import (
    METHODS,
    ConfigError,
    ExperimentConfig,
    emit_plot,
    read_records,
    read_summary,
    run_sweep,
    summarize,
    write_records,
    write_summary,
)
from .metrics import LinkBudget, RankError, mutual_information, optimal_precoder
from .nm import NmConfig, design_shd_nm
from .qrqu import QrquConfig, design_shd_qrqu

log = logging.getLogger("switchbf")

EXIT_OK, EXIT_CONFIG, EXIT_INFEASIBLE = 0, 2, 3


class InfeasibleSpec(Exception):
    pass


def _floats(text):
    return [float(v) for v in text.split(",") if v.strip()]


def _ints(text):
    return [int(v) for v in text.split(",") if v.strip()]


def _load_json(path):
    if path is None:
        return {}
    try:
        data = json.loads(Path(path).read_text())
    except (OSError, json.JSONDecodeError) as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    if not isinstance(data, dict):
        raise ConfigError("config file must hold a JSON object")
    return data


def _connectivity(value, n_t, k_t):
    if value is None:
        return None
    if value == "full":
        return fully_connected(n_t, k_t)
    if value == "subset":
        return subset_partition(n_t, k_t)
    if value.startswith("interleaved"):
        period = int(value.split(":", 1)[1]) if ":" in value else 2
        return interleaved_spec(n_t, k_t, period)
    try:
        spec = read_spec(value)
    except OSError as exc:
        raise ConfigError(f"cannot read connectivity file {value}: {exc}") from exc
    if validate(spec):
        raise InfeasibleSpec(f"connectivity file {value} violates its constraints")
    return spec


def build_config(args) -> ExperimentConfig:
    cfg = _load_json(getattr(args, "config", None))

    def pick(flag, key, default):
        val = getattr(args, flag, None)
        return val if val is not None else cfg.get(key, default)

    try:
        tx_dims = cfg.get("tx_dims", [8, 8])
        rx_dims = cfg.get("rx_dims", [4, 4])
        tx = ArrayGeometry.sector(*tx_dims,
                                  azimuth_width=np.deg2rad(cfg.get("sector_azimuth_deg", 60.0)),
                                  elevation_width=np.deg2rad(cfg.get("sector_elevation_deg", 30.0)))
        if cfg.get("tx_omni", False):
            tx = replace(tx, omni=True)
        rx = ArrayGeometry(*rx_dims)
        confine = not getattr(args, "unconfined_dod", False) and cfg.get("confine_dod", True)
        channel = ChannelConfig(
            n_clusters=int(cfg.get("n_clusters", 8)),
            n_rays=int(cfg.get("n_rays", 10)),
            tx_geometry=tx,
            rx_geometry=rx,
            angle_spread=np.deg2rad(float(cfg.get("angle_spread_deg", 7.5))),
            confine_dod=bool(confine),
        )
        k_t = int(pick("kt", "k_t", 4))
        methods = pick("methods", "methods", ["UOP", "SHD-NM", "SHD-QRQU"])
        if isinstance(methods, str):
            methods = [m.strip() for m in methods.split(",") if m.strip()]
        snr = pick("snr", "snr_db", [-10.0, -5.0, 0.0, 5.0, 10.0])
        n_s = pick("ns", "n_s", [2])
        nm = NmConfig(**cfg.get("nm", {}))
        qrqu = QrquConfig(**cfg.get("qrqu", {}))
        config = ExperimentConfig(
            channel=channel,
            k_t=k_t,
            k_r=int(cfg.get("k_r", k_t)),
            snr_db_list=[float(v) for v in snr],
            n_s_list=[int(v) for v in n_s],
            trials=int(pick("trials", "trials", 100)),
            methods=tuple(methods),
            connectivity=_connectivity(pick("connectivity", "connectivity", None), tx.n_elements, k_t),
            master_seed=int(pick("seed", "seed", 0)),
            output_path=pick("out", "output", None),
            nm=nm,
            qrqu=qrqu,
            record_timing=bool(getattr(args, "timing", False) or cfg.get("record_timing", False)),
        )
    except (TypeError, ValueError) as exc:
        if isinstance(exc, ConfigError):
            raise
        raise ConfigError(str(exc)) from exc
    config.check()
    return config


def cmd_sweep(args):
    config = build_config(args)
    if not config.output_path:
        raise ConfigError("sweep needs --out (or 'output' in the config file)")
    records = run_sweep(config, progress=lambda t: log.info("trial %d/%d done", t + 1, config.trials))
    write_records(records, config.output_path)
    summary = summarize(records)
    if args.summary:
        write_summary(summary, args.summary)
    if args.plot:
        emit_plot(summary, args.plot)
    for row in summary:
        print(f"{row.method:12s} snr={row.snr_db:6.1f} Ns={row.n_s}  SE={row.mean:8.4f} +- {row.stderr:.4f}")
    return EXIT_OK


def mask_needed(method):
    return method.endswith("-PC")


def cmd_design(args):
    config = build_config(args)
    n_s = config.n_s_list[0]
    snr = config.snr_db_list[0]
    if args.channel:
        h, seed = read_channel(args.channel)
        if mask_needed(args.method) and h.shape[1] != config.n_t:
            raise ConfigError(f"channel has {h.shape[1]} transmit antennas, config expects {config.n_t}")
    else:
        seed = config.master_seed
        h = generate_channel(replace(config.channel, seed=seed)).h
    if args.dump_channel:
        write_channel(args.dump_channel, h, seed)

    budget = LinkBudget.from_snr_db(snr, n_s)
    method = args.method
    mask = config.connectivity if mask_needed(method) else None
    if mask_needed(method) and mask is None:
        raise ConfigError(f"{method} needs --connectivity")
    if method == "UOP":
        pre = optimal_precoder(h, n_s)
        report = {"mutual_information": mutual_information(h, pre, budget),
                  "f_bb_real": pre.f_bb.real.tolist(), "f_bb_imag": pre.f_bb.imag.tolist()}
    else:
        if method.startswith("SHD-NM"):
            rep = design_shd_nm(h, budget, config.k_t, replace(config.nm, seed=config.master_seed), mask)
        else:
            rep = design_shd_qrqu(h, budget, config.k_t, replace(config.qrqu, seed=config.master_seed), mask)
        report = rep.to_dict()
        if args.trace:
            with open(args.trace, "w") as fh:
                for step, (mi, sur) in enumerate(zip(rep.mi_trace, rep.surrogate_trace)):
                    fh.write(json.dumps({"step": step, "mutual_information": mi, "surrogate": sur}) + "\n")
    report.update(method=method, snr_db=snr, n_s=n_s, k_t=config.k_t, seed=int(seed),
                  uop_mutual_information=mutual_information(h, optimal_precoder(h, n_s), budget))
    text = json.dumps(report, indent=1)
    if args.out:
        Path(args.out).write_text(text + "\n")
    print(f"{method}: {report['mutual_information']:.4f} bits/s/Hz "
          f"(UOP {report['uop_mutual_information']:.4f})")
    return EXIT_OK


def cmd_plot(args):
    path = args.input
    try:
        rows = read_summary(path)
    except ValueError:
        rows = summarize(read_records(path))
    emit_plot(rows, args.out, x=args.x)
    return EXIT_OK


def cmd_validate_spec(args):
    try:
        spec = read_spec(args.path)
    except (OSError, ValueError) as exc:
        raise ConfigError(str(exc)) from exc
    problems = validate(spec)
    if not problems:
        print(f"ok: N_t={spec.n_t} k_t={spec.k_t} s_t={spec.s_t} c_t={spec.c_t} n_G={spec.n_connections}")
        return EXIT_OK
    for v in problems:
        print(f"violation: {v.kind} {v.index}: expected {v.expected}, found {v.actual}")
    return EXIT_INFEASIBLE


def _add_common(p):
    p.add_argument("--config", help="JSON config file")
    p.add_argument("--seed", type=int)
    p.add_argument("--snr", type=_floats, help="comma separated SNR list in dB")
    p.add_argument("--ns", type=_ints, help="comma separated stream counts")
    p.add_argument("--kt", type=int, help="transmit RF chains")
    p.add_argument("--connectivity", help="CONNSPEC1 file, interleaved[:period], subset or full")
    p.add_argument("--unconfined-dod", action="store_true",
                   help="draw cluster DoD means over the sphere instead of inside the sector")
    p.add_argument("--out")


def make_parser():
    parser = argparse.ArgumentParser(prog="switchbf", description=__doc__.split("\n")[0])
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("sweep", help="Monte-Carlo spectral-efficiency sweep to CSV",
                       description="SHD-NM is redesigned per SNR point; SHD-QRQU and UOP once per trial.")
    _add_common(p)
    p.add_argument("--trials", type=int)
    p.add_argument("--methods", help=f"comma separated subset of {','.join(METHODS)}")
    p.add_argument("--summary", help="also write the per-point summary CSV")
    p.add_argument("--plot", help="also write an SVG plot")
    p.add_argument("--timing", action="store_true", help="record wall-clock runtimes (output no longer reproducible)")
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("design", help="design one precoder and dump it as JSON")
    _add_common(p)
    p.add_argument("--method", default="SHD-NM", choices=METHODS)
    p.add_argument("--channel", help="MMWCH1 channel file (default: draw one from --seed)")
    p.add_argument("--dump-channel", help="write the channel used as MMWCH1")
    p.add_argument("--trace", help="write the accepted-step trace as JSON lines")
    p.set_defaults(func=cmd_design)

    p = sub.add_parser("plot", help="summary or record CSV to SVG")
    p.add_argument("input")
    p.add_argument("--out", required=True)
    p.add_argument("--x", default="auto", choices=["auto", "snr_db", "n_s"])
    p.set_defaults(func=cmd_plot)

    p = sub.add_parser("validate-spec", help="check a CONNSPEC1 connectivity file")
    p.add_argument("path")
    p.set_defaults(func=cmd_validate_spec)
    return parser


def main(argv=None) -> int:
    parser = make_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except (InfeasibleSpec, InfeasibleMaskError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INFEASIBLE
    except (ConfigError, RankError, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
