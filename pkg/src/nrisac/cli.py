"""Command-line front end: run, sweep, ledger, and cdf subcommands."""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

import numpy as np

from . import frame as nr_frame
from .config import ConfigError, load_config
from .sim import (
    rmse_cdf,
    run_trials,
    sweep_snr,
    write_cdf_csv,
    write_slots_csv,
    write_summary_json,
    write_sweep_csv,
)


def _add_common(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--config", type=Path, default=None, help="JSON config file")
    parser.add_argument("--seed", type=int, default=None, help="override run.seed")
    parser.add_argument("--scheme", choices=["isac", "codebook"], default=None)
    parser.add_argument("--out", type=Path, default=Path("out"), help="output directory")
    parser.add_argument("--trials", type=int, default=None, help="override run.trials")


def _load(args) -> "SimConfig":
    overrides: dict = {}
    if args.seed is not None:
        overrides.setdefault("run", {})["seed"] = args.seed
    if getattr(args, "trials", None) is not None:
        overrides.setdefault("run", {})["trials"] = args.trials
    if getattr(args, "scheme", None) is not None:
        overrides["scheme"] = args.scheme
    return load_config(args.config, overrides)


def _cmd_run(args) -> int:
    cfg = _load(args)
    args.out.mkdir(parents=True, exist_ok=True)
    results = run_trials(cfg)
    for i, result in enumerate(results):
        write_slots_csv(result, args.out / f"slots_trial{i:03d}.csv")
    write_summary_json(cfg, results, args.out / "summary.json")
    print(f"{cfg.scheme}: {len(results)} trials, {cfg.n_slots} slots each")
    print(f"  angle RMSE     : {np.nanmean([r.angle_rmse for r in results]):.6g} rad")
    print(f"  BER            : {np.mean([r.ber for r in results]):.6g}")
    print(f"  throughput     : {np.mean([r.throughput_mbps for r in results]):.6g} Mbps")
    print(f"  outputs        : {args.out}")
    return 0


def _cmd_sweep(args) -> int:
    cfg = _load(args)
    args.out.mkdir(parents=True, exist_ok=True)
    rows = sweep_snr(cfg, args.snr_db, trials=args.trials)
    write_sweep_csv(rows, args.out / "sweep.csv")
    for row in rows:
        print(
            f"snr {row['snr_db']:6.1f} dB  {row['scheme']:9s}  "
            f"ber {row['ber']:.6g}  throughput {row['throughput_mbps']:.6g} Mbps"
        )
    print(f"  outputs        : {args.out / 'sweep.csv'}")
    return 0


def _cmd_ledger(args) -> int:
    cfg = _load(args)
    conv = nr_frame.build_ledger(cfg.frame_conventional)
    isac = nr_frame.build_ledger(cfg.frame_isac)
    reduction = nr_frame.overhead_reduction(conv, isac)
    report = {
        "conventional": nr_frame.ledger_as_dict(conv),
        "isac": nr_frame.ledger_as_dict(isac),
        "reduction_fraction": reduction,
        "reduction_percent": 100.0 * reduction,
    }
    print(json.dumps(report, indent=2, sort_keys=True))
    if args.re_map:
        args.out.mkdir(parents=True, exist_ok=True)
        for name, fc in (("conventional", cfg.frame_conventional), ("isac", cfg.frame_isac)):
            grid = nr_frame.re_positions(fc)
            lines = ["slot,symbol,subcarrier,re_type"]
            for (slot, sym, sc), code in np.ndenumerate(grid):
                lines.append(f"{slot},{sym},{sc},{nr_frame.RE_TYPE_NAMES[int(code)]}")
            (args.out / f"re_map_{name}.csv").write_text("\n".join(lines) + "\n")
        print(f"RE maps written to {args.out}")
    return 0


def _cmd_cdf(args) -> int:
    cfg = _load(args)
    results = run_trials(cfg)
    cdf = rmse_cdf(results, args.field, burn_in=cfg.burn_in_slots)
    args.out.mkdir(parents=True, exist_ok=True)
    path = args.out / f"cdf_{cfg.scheme}_{args.field}.csv"
    write_cdf_csv(cdf, path)
    for q in (0.5, 0.9, 0.95):
        idx = int(np.searchsorted(cdf[:, 1], q))
        idx = min(idx, len(cdf) - 1)
        print(f"  {args.field} error at CDF {q:.2f}: {cdf[idx, 0]:.6g}")
    print(f"  outputs        : {path}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="nrisac",
        description="Link-level NR V2I simulator: sensing-assisted beam tracking vs codebook sweeps",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="run one scheme, write per-slot CSVs and a summary JSON")
    _add_common(p_run)
    p_run.set_defaults(func=_cmd_run)

    p_sweep = sub.add_parser("sweep", help="BER/throughput over a transmit-SNR grid")
    _add_common(p_sweep)
    p_sweep.add_argument(
        "--snr-db", type=float, nargs="+", default=[0.0, 5.0, 10.0, 15.0, 20.0],
        help="transmit SNR grid in dB",
    )
    p_sweep.set_defaults(func=_cmd_sweep)

    p_ledger = sub.add_parser("ledger", help="print RE ledgers, overhead, and the reduction")
    _add_common(p_ledger)
    p_ledger.add_argument("--re-map", action="store_true", help="also dump RE maps as CSV")
    p_ledger.set_defaults(func=_cmd_ledger)

    p_cdf = sub.add_parser("cdf", help="empirical error CDF for the configured scheme")
    _add_common(p_cdf)
    p_cdf.add_argument("--field", choices=["angle", "distance"], default="angle")
    p_cdf.set_defaults(func=_cmd_cdf)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
