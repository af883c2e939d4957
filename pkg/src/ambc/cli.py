"""Command-line front end: config handling, experiment subcommands, output.

Precedence for every setting is flags > config file > built-in defaults.
Each run writes a CSV (canonical), an optional SVG plot and a JSON
manifest, all sharing a numbered stem that is never reused.
"""

from __future__ import annotations

import argparse
import copy
import json
import sys
from datetime import datetime, timezone
from pathlib import Path

import yaml

from . import __version__
from .channel import GainDistribution, RisLinkConfig
from .montecarlo import ber_sweep, bri_table, coverage_sweep, ExperimentConfig, SweepResult
from .ofdm import OfdmParams
from .reader import DetectorMode
from .selftest import run_selftest
from .tag import Modulation


class CliError(Exception):
    """Configuration or usage problem; maps to exit code 2."""


_LINK_DEFAULTS = {
    "q_reflectors": 0,
    "los_gain": 1.0,
    "los_phase_rad": 0.0,
    "gain_mean": 0.2,
    "gain_distribution": "fixed",
}

DEFAULTS = {
    "ofdm": {
        "n_subcarriers": 64,
        "n_cp": 16,
        "data_duration_s": 3.2e-6,
        "cp_duration_s": 8.0e-7,
    },
    "forward": dict(_LINK_DEFAULTS),
    "direct": dict(_LINK_DEFAULTS),
    "backward": dict(_LINK_DEFAULTS),
    "tag_attenuation": 1.0,
    "modulation": "ook",
    "n_active": 32,
    "detector_mode": "threshold",
    "energy": 1.0,
    "snr_grid_db": [0.0, 2.0, 4.0, 6.0, 8.0, 10.0, 12.0, 14.0],
    "trials_per_point": 60_000,
    "stop_at_errors": 500,
    "master_seed": 2026,
    "jobs": 1,
    "coverage": {
        "q_b_max": 20,
        "c0_grid": [0.2, 0.4, 0.6, 0.8, 1.0],
        "mu_c_sq": 0.5,
        "sigma_c_sq": 1.0,
    },
    "bri": {"k": None},
}

_DISTRIBUTIONS = {d.value: d for d in GainDistribution}
_MODULATIONS = {m.value: m for m in Modulation}
_DETECTORS = {"threshold": DetectorMode.THRESHOLD, "exact_ml": DetectorMode.EXACT_ML}


def _merge_into(base: dict, override: dict, path: str = "") -> None:
    for key, value in override.items():
        here = f"{path}.{key}" if path else str(key)
        if key not in base:
            raise CliError(f"unknown config key: {here}")
        if isinstance(base[key], dict):
            if not isinstance(value, dict):
                raise CliError(f"config key {here} must be a mapping")
            _merge_into(base[key], value, here)
        else:
            base[key] = value


def load_config(path: str | None) -> dict:
    """Built-in defaults, overlaid with the config file when given."""
    cfg = copy.deepcopy(DEFAULTS)
    if path is None:
        return cfg
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise CliError(f"cannot read config file: {exc}") from exc
    try:
        loaded = yaml.safe_load(text)
    except yaml.YAMLError as exc:
        raise CliError(f"cannot parse config file: {exc}") from exc
    if loaded is None:
        return cfg
    if not isinstance(loaded, dict):
        raise CliError("config file must contain a mapping at the top level")
    _merge_into(cfg, loaded)
    return cfg


def parse_snr_spec(spec: str) -> list[float]:
    """Parse an inclusive A:STEP:B grid, e.g. 0:2:14."""
    parts = spec.split(":")
    if len(parts) != 3:
        raise CliError("--snr-db expects A:STEP:B")
    try:
        start, step, stop = (float(p) for p in parts)
    except ValueError:
        raise CliError("--snr-db expects numeric A:STEP:B") from None
    if step <= 0.0 or stop < start:
        raise CliError("--snr-db needs STEP > 0 and B >= A")
    count = int((stop - start) / step + 1e-9) + 1
    return [start + i * step for i in range(count)]


def _apply_ber_flags(cfg: dict, args: argparse.Namespace) -> None:
    if args.seed is not None:
        cfg["master_seed"] = args.seed
    if args.snr_db is not None:
        cfg["snr_grid_db"] = parse_snr_spec(args.snr_db)
    if args.trials is not None:
        cfg["trials_per_point"] = args.trials
    if args.qf is not None:
        cfg["forward"]["q_reflectors"] = args.qf
    if args.qb is not None:
        cfg["backward"]["q_reflectors"] = args.qb
    if args.qd is not None:
        cfg["direct"]["q_reflectors"] = args.qd
    if args.k is not None:
        cfg["n_active"] = args.k
    if args.mode is not None:
        cfg["detector_mode"] = {"ml": "exact_ml"}.get(args.mode, args.mode)
    if args.modulation is not None:
        cfg["modulation"] = args.modulation
    if args.jobs is not None:
        cfg["jobs"] = args.jobs
    if args.stop_errors is not None:
        cfg["stop_at_errors"] = args.stop_errors if args.stop_errors > 0 else None


def _link_from(section: dict, label: str) -> RisLinkConfig:
    dist = section.get("gain_distribution")
    if dist not in _DISTRIBUTIONS:
        raise CliError(
            f"{label}.gain_distribution must be one of {sorted(_DISTRIBUTIONS)}"
        )
    return RisLinkConfig(
        q_reflectors=int(section["q_reflectors"]),
        los_gain=float(section["los_gain"]),
        los_phase_rad=float(section["los_phase_rad"]),
        gain_mean=float(section["gain_mean"]),
        gain_distribution=_DISTRIBUTIONS[dist],
    )


def build_experiment(cfg: dict) -> ExperimentConfig:
    """Validate the merged config dict into an ExperimentConfig."""
    if cfg["modulation"] not in _MODULATIONS:
        raise CliError(f"modulation must be one of {sorted(_MODULATIONS)}")
    if cfg["detector_mode"] not in _DETECTORS:
        raise CliError(f"detector_mode must be one of {sorted(_DETECTORS)}")
    grid = cfg["snr_grid_db"]
    if isinstance(grid, str):
        grid = parse_snr_spec(grid)
    try:
        return ExperimentConfig(
            ofdm=OfdmParams(
                n_subcarriers=int(cfg["ofdm"]["n_subcarriers"]),
                n_cp=int(cfg["ofdm"]["n_cp"]),
                data_duration_s=float(cfg["ofdm"]["data_duration_s"]),
                cp_duration_s=float(cfg["ofdm"]["cp_duration_s"]),
            ),
            forward=_link_from(cfg["forward"], "forward"),
            direct=_link_from(cfg["direct"], "direct"),
            backward=_link_from(cfg["backward"], "backward"),
            tag_attenuation=float(cfg["tag_attenuation"]),
            modulation=_MODULATIONS[cfg["modulation"]],
            n_active=int(cfg["n_active"]),
            detector_mode=_DETECTORS[cfg["detector_mode"]],
            energy=float(cfg["energy"]),
            snr_grid_db=tuple(float(v) for v in grid),
            trials_per_point=int(cfg["trials_per_point"]),
            stop_at_errors=None if cfg["stop_at_errors"] is None else int(cfg["stop_at_errors"]),
            master_seed=int(cfg["master_seed"]),
        )
    except (TypeError, ValueError) as exc:
        raise CliError(f"invalid configuration: {exc}") from exc


def _fmt(value) -> str:
    # Coerce so numpy scalars print as plain numbers.
    if isinstance(value, float):
        return repr(float(value))
    return str(int(value))


def _write_csv(path: Path, header: str, rows: list[list]) -> None:
    lines = [header]
    lines.extend(",".join(_fmt(v) for v in row) for row in rows)
    path.write_text("\n".join(lines) + "\n", encoding="utf-8", newline="\n")


def next_stem(out_dir: Path, command: str) -> str:
    """First unused numbered stem, so reruns never overwrite."""
    n = 1
    while list(out_dir.glob(f"{command}_{n:04d}*")):
        n += 1
    return f"{command}_{n:04d}"


def _write_manifest(
    path: Path, command: str, config: dict, seed: int | None, started: str, outputs: list[str]
) -> None:
    manifest = {
        "tool": "ambc",
        "version": __version__,
        "command": command,
        "master_seed": seed,
        "started_utc": started,
        "finished_utc": datetime.now(timezone.utc).isoformat(),
        "config": config,
        "outputs": outputs,
    }
    path.write_text(json.dumps(manifest, indent=2, sort_keys=True) + "\n", encoding="utf-8")


def _utc_now() -> str:
    return datetime.now(timezone.utc).isoformat()


def _ber_svg(path: Path, result: SweepResult) -> None:
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt
    import numpy as np

    pts = result.points
    snr = [p.snr_db for p in pts]
    ber = np.array([p.ber_estimate for p in pts])
    low = np.array([p.ci95_low for p in pts])
    high = np.array([p.ci95_high for p in pts])
    fig, ax = plt.subplots(figsize=(6.0, 4.5))
    ax.errorbar(
        snr, ber, yerr=[ber - low, high - ber], fmt="o", capsize=3, label="Monte Carlo"
    )
    closed = [p.closed_form_ber for p in pts]
    approx = [p.approx_ber for p in pts]
    baseline = [p.baseline_ber for p in pts]
    if not all(np.isnan(closed)):
        ax.plot(snr, closed, "-", label="closed form")
        ax.plot(snr, approx, "--", label="dominant term")
    if not all(np.isnan(baseline)):
        ax.plot(snr, baseline, ":", label="no-surface baseline")
    ax.set_yscale("log")
    ax.set_xlabel("SNR (dB)")
    ax.set_ylabel("BER")
    ax.grid(True, which="both", alpha=0.3)
    ax.legend()
    fig.tight_layout()
    fig.savefig(path, format="svg", metadata={"Date": None})
    plt.close(fig)


def _coverage_svg(path: Path, rows) -> None:
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    fig, ax = plt.subplots(figsize=(6.0, 4.5))
    for c0 in sorted({r.c0 for r in rows}):
        sub = [r for r in rows if r.c0 == c0]
        ax.plot([r.q_b for r in sub], [r.ratio for r in sub], "-o", label=f"direct gain {c0:g}")
    ax.set_xlabel("backward-link reflectors")
    ax.set_ylabel("coverage ratio")
    ax.grid(True, alpha=0.3)
    ax.legend()
    fig.tight_layout()
    fig.savefig(path, format="svg", metadata={"Date": None})
    plt.close(fig)


def _bri_svg(path: Path, rows) -> None:
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    fig, ax = plt.subplots(figsize=(6.0, 4.5))
    ax.plot([r.k for r in rows], [r.lambda_im for r in rows], "-o", label="index modulation")
    ax.plot([r.k for r in rows], [r.lambda_ook for r in rows], "--", label="on-off keying")
    ax.set_xlabel("active subcarriers")
    ax.set_ylabel("bits per unit reflected energy")
    ax.grid(True, alpha=0.3)
    ax.legend()
    fig.tight_layout()
    fig.savefig(path, format="svg", metadata={"Date": None})
    plt.close(fig)


BER_HEADER = "snr_db,trials,bits,errors,ber,ci_low,ci_high,ber_closed,ber_approx,ber_baseline"


def cmd_ber(args: argparse.Namespace) -> int:
    cfg = load_config(args.config)
    _apply_ber_flags(cfg, args)
    experiment = build_experiment(cfg)
    jobs = int(cfg["jobs"])
    if jobs < 1:
        raise CliError("jobs must be at least 1")
    out_dir = Path(args.out)
    started = _utc_now()
    result = ber_sweep(experiment, jobs=jobs)
    rows = [
        [
            p.snr_db,
            p.trials,
            p.bits_sent,
            p.bit_errors,
            p.ber_estimate,
            p.ci95_low,
            p.ci95_high,
            p.closed_form_ber,
            p.approx_ber,
            p.baseline_ber,
        ]
        for p in result.points
    ]
    out_dir.mkdir(parents=True, exist_ok=True)
    stem = next_stem(out_dir, "ber")
    csv_path = out_dir / f"{stem}.csv"
    _write_csv(csv_path, BER_HEADER, rows)
    outputs = [str(csv_path)]
    if args.svg:
        svg_path = out_dir / f"{stem}.svg"
        _ber_svg(svg_path, result)
        outputs.append(str(svg_path))
    _write_manifest(
        out_dir / f"{stem}_manifest.json", "ber", cfg, experiment.master_seed, started, outputs
    )
    for name in outputs:
        print(name)
    return 0


def cmd_coverage(args: argparse.Namespace) -> int:
    cfg = load_config(args.config)
    section = cfg["coverage"]
    if args.qb is not None:
        section["q_b_max"] = args.qb
    q_max = int(section["q_b_max"])
    if q_max < 1:
        raise CliError("coverage.q_b_max must be at least 1")
    c0_grid = [float(c) for c in section["c0_grid"]]
    if not c0_grid or min(c0_grid) <= 0.0:
        raise CliError("coverage.c0_grid values must be positive")
    mu_c_sq = float(section["mu_c_sq"])
    sigma_c_sq = float(section["sigma_c_sq"])
    if mu_c_sq < 0.0 or sigma_c_sq < 0.0:
        raise CliError("coverage moments must be nonnegative")
    started = _utc_now()
    rows = coverage_sweep(range(1, q_max + 1), c0_grid, mu_c_sq, sigma_c_sq)
    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    stem = next_stem(out_dir, "coverage")
    csv_path = out_dir / f"{stem}.csv"
    _write_csv(csv_path, "q_b,c0,ratio", [[r.q_b, r.c0, r.ratio] for r in rows])
    outputs = [str(csv_path)]
    if args.svg:
        svg_path = out_dir / f"{stem}.svg"
        _coverage_svg(svg_path, rows)
        outputs.append(str(svg_path))
    _write_manifest(out_dir / f"{stem}_manifest.json", "coverage", cfg, None, started, outputs)
    for name in outputs:
        print(name)
    return 0


def cmd_bri(args: argparse.Namespace) -> int:
    cfg = load_config(args.config)
    if args.k is not None:
        cfg["bri"]["k"] = args.k
    n_subcarriers = int(cfg["ofdm"]["n_subcarriers"])
    single_k = cfg["bri"]["k"]
    if single_k is None:
        k_grid = range(1, n_subcarriers + 1)
    else:
        single_k = int(single_k)
        if not 1 <= single_k <= n_subcarriers:
            raise CliError("k must lie in 1..n_subcarriers")
        k_grid = [single_k]
    started = _utc_now()
    rows = bri_table(n_subcarriers, k_grid, float(cfg["energy"]))
    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    stem = next_stem(out_dir, "bri")
    csv_path = out_dir / f"{stem}.csv"
    _write_csv(
        csv_path,
        "k,eta_im,lambda_im,eta_ook,lambda_ook",
        [[r.k, r.eta_im, r.lambda_im, r.eta_ook, r.lambda_ook] for r in rows],
    )
    outputs = [str(csv_path)]
    if args.svg:
        svg_path = out_dir / f"{stem}.svg"
        _bri_svg(svg_path, rows)
        outputs.append(str(svg_path))
    _write_manifest(out_dir / f"{stem}_manifest.json", "bri", cfg, None, started, outputs)
    for name in outputs:
        print(name)
    return 0


def cmd_selftest(args: argparse.Namespace) -> int:
    return run_selftest()


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="ambc",
        description="Backscatter-over-OFDM link simulator and analysis toolkit",
    )
    parser.add_argument("--version", action="version", version=f"ambc {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    ber = sub.add_parser("ber", help="Monte Carlo BER sweep against closed forms")
    ber.add_argument("--config", help="YAML config file")
    ber.add_argument("--seed", type=int, help="master RNG seed")
    ber.add_argument("--out", default="runs", help="output directory")
    ber.add_argument("--snr-db", help="SNR grid as A:STEP:B in dB")
    ber.add_argument("--trials", type=int, help="max trials per SNR point")
    ber.add_argument("--qf", type=int, help="forward-link reflector count")
    ber.add_argument("--qb", type=int, help="backward-link reflector count")
    ber.add_argument("--qd", type=int, help="direct-link reflector count")
    ber.add_argument("--k", type=int, help="active subcarriers for index modulation")
    ber.add_argument("--mode", choices=["threshold", "ml", "exact_ml"], help="detector")
    ber.add_argument("--modulation", choices=["ook", "im"], help="tag modulation")
    ber.add_argument("--jobs", type=int, help="worker processes")
    ber.add_argument("--stop-errors", type=int, help="early-stop error target (0 disables)")
    ber.add_argument("--svg", action="store_true", help="also write an SVG plot")
    ber.set_defaults(func=cmd_ber)

    cov = sub.add_parser("coverage", help="coverage-ratio table over reflector counts")
    cov.add_argument("--config", help="YAML config file")
    cov.add_argument("--out", default="runs", help="output directory")
    cov.add_argument("--qb", type=int, help="max backward-link reflector count")
    cov.add_argument("--svg", action="store_true", help="also write an SVG plot")
    cov.set_defaults(func=cmd_coverage)

    bri = sub.add_parser("bri", help="bits-per-interference table for both tag modes")
    bri.add_argument("--config", help="YAML config file")
    bri.add_argument("--out", default="runs", help="output directory")
    bri.add_argument("--k", type=int, help="restrict the table to one active count")
    bri.add_argument("--svg", action="store_true", help="also write an SVG plot")
    bri.set_defaults(func=cmd_bri)

    self_p = sub.add_parser("selftest", help="fast invariant suite")
    self_p.set_defaults(func=cmd_selftest)
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except CliError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
