"""Command-line frontend.

Each subcommand writes one output directory holding ``manifest.json``
plus its data files (CSV/JSON). The manifest is written first, then
finalized with the full file list and wall-clock time, so a run can be
audited and replayed: the same command, seed, and config reproduce
every data file bit for bit. Timing fields in the manifest itself are
the only non-deterministic bytes.

Exit codes: 0 success, 2 bad arguments or values, 3 numerical failure.
"""

from __future__ import annotations

import argparse
import json
import math
import os
import platform
import re
import sys
import time
from dataclasses import asdict, dataclass, field
from datetime import datetime, timezone
from pathlib import Path

import numpy as np
import scipy

from . import __version__
from .experiment import CLASSICAL_VISIBILITY_BOUND, ExperimentConfig, visibility_scan
from .measurement import expectation
from .paradox import dicke_paradox
from .reports import (
    DEFAULT_THETAS,
    correlator_detail_rows,
    game_curve_rows,
    game_exact_rows,
    game_simulated_rows,
    paradox_exact_block,
    paradox_simulated_block,
    write_rows_csv,
)
from .states import StateVector, dicke_one_excitation, epr_family
from .tomography import report_states, tomography_report

_ANGLE_RE = re.compile(r"^\s*([0-9]+)?\s*\*?\s*pi\s*(?:/\s*([0-9]+))?\s*$", re.IGNORECASE)

_EXACT_HEADER = ["theta", "label", "observable", "theoretical"]
_SIMULATED_HEADER = _EXACT_HEADER + ["estimate", "std_err", "delta_std_err", "n_total"]
_GAME_EXACT_HEADER = ["theta", "p_win", "i_00", "i_01", "i_10", "i_11"]
_GAME_SIM_HEADER = _GAME_EXACT_HEADER + [
    "e_00",
    "e_01",
    "e_10",
    "p_win_estimate",
    "p_win_std_err",
]

# Stream-tag bases keep the full report's count draws independent even
# though every block shares one seed.
_TAG_PARADOX_SIM = 0
_TAG_GAME_X = 100
_TAG_GAME_Z = 200
_TAG_TOMO = 300
_TAG_VIS = 400


def parse_angle(text: str) -> float:
    """Angle in radians from ``pi/12``, ``3pi/4``, ``pi``, or a decimal.

    Raises:
        ValueError: text matches neither form, or divides by zero.
    """
    match = _ANGLE_RE.match(text)
    if match:
        num = int(match.group(1)) if match.group(1) else 1
        den = int(match.group(2)) if match.group(2) else 1
        if den == 0:
            raise ValueError(f"angle {text!r} divides by zero")
        return num * math.pi / den
    try:
        return float(text)
    except ValueError:
        raise ValueError(
            f"cannot parse angle {text!r}; use a multiple of pi like 'pi/12' or"
            " '3pi/4', or a decimal in radians"
        ) from None


def parse_angle_list(text: str) -> tuple[float, ...]:
    """Comma-separated angles; must contain at least one entry."""
    parts = [p.strip() for p in text.split(",") if p.strip()]
    if not parts:
        raise ValueError("angle list must be nonempty")
    return tuple(parse_angle(p) for p in parts)


@dataclass
class RunManifest:
    """Audit record of one command invocation."""

    command: str
    arguments: dict
    config: dict
    seed: int
    versions: dict
    started_utc: str
    output_files: list[str] = field(default_factory=list)
    wall_clock_seconds: float | None = None

    def write(self, path: Path) -> None:
        path.write_text(json.dumps(asdict(self), indent=2, sort_keys=True) + "\n")


def _versions() -> dict:
    return {
        "cohsim": __version__,
        "numpy": np.__version__,
        "scipy": scipy.__version__,
        "python": platform.python_version(),
    }


def _json_safe(value):
    if value is None or isinstance(value, (bool, int, float, str)):
        return value
    return str(value)


def _load_config(args: argparse.Namespace) -> ExperimentConfig:
    """Config file (flag, else $COHSIM_CONFIG), with flag overrides on top."""
    overrides = {}
    if getattr(args, "seed", None) is not None:
        overrides["seed"] = args.seed
    if getattr(args, "visibility", None) is not None:
        overrides["visibility_v"] = args.visibility
    path = getattr(args, "config", None) or os.environ.get("COHSIM_CONFIG")
    if path:
        return ExperimentConfig.from_file(path, **overrides)
    return ExperimentConfig(**overrides)


def _start_run(
    args: argparse.Namespace, cfg: ExperimentConfig
) -> tuple[Path, RunManifest, float]:
    """Create the output directory and write the manifest first."""
    out_dir = Path(args.out) if getattr(args, "out", None) else Path(f"cohsim_{args.command}")
    out_dir.mkdir(parents=True, exist_ok=True)
    manifest = RunManifest(
        command=args.command,
        arguments={
            k: _json_safe(v)
            for k, v in vars(args).items()
            if k not in ("func", "command")
        },
        config=cfg.to_dict(),
        seed=cfg.seed,
        versions=_versions(),
        started_utc=datetime.now(timezone.utc).isoformat(),
        output_files=["manifest.json"],
    )
    manifest.write(out_dir / "manifest.json")
    return out_dir, manifest, time.monotonic()


def _finish_run(out_dir: Path, manifest: RunManifest, t_start: float) -> None:
    manifest.output_files = sorted(set(manifest.output_files))
    manifest.wall_clock_seconds = time.monotonic() - t_start
    manifest.write(out_dir / "manifest.json")


def _write_json(out_dir: Path, manifest: RunManifest, name: str, doc) -> None:
    (out_dir / name).write_text(json.dumps(doc, indent=2, sort_keys=True) + "\n")
    manifest.output_files.append(name)


def _write_csv(out_dir: Path, manifest: RunManifest, name: str, header, rows) -> None:
    write_rows_csv(out_dir / name, header, rows)
    manifest.output_files.append(name)


def _print_verdict(verdict: dict) -> None:
    state = "feasible" if verdict["lhv_feasible"] else "INFEASIBLE"
    line = f"mixture model {state}: gap = {verdict['violation_gap']:.6g}"
    if "p_value" in verdict:
        line += f", p = {verdict['p_value']:.3g} (log10 p = {verdict['log10_p_value']:.1f})"
    print(line)


def cmd_paradox(args: argparse.Namespace) -> int:
    theta = parse_angle(args.theta)
    cfg = _load_config(args)
    out_dir, manifest, t0 = _start_run(args, cfg)
    if args.mode == "exact":
        _spec, rows, verdict = paradox_exact_block(theta, args.axis)
        header = _EXACT_HEADER
    else:
        _spec, rows, verdict, counts = paradox_simulated_block(theta, args.axis, cfg)
        header = _SIMULATED_HEADER
        for (label, obs), table in sorted(counts.items()):
            name = f"counts_{label}_{obs}.csv"
            table.to_csv(out_dir / name)
            manifest.output_files.append(name)
    _write_csv(out_dir, manifest, "paradox.csv", header, rows)
    _write_json(out_dir, manifest, "verdict.json", verdict)
    _finish_run(out_dir, manifest, t0)
    for row in rows:
        line = f"  {row['label']:>4}  {row['observable']}  theory {row['theoretical']:+.6f}"
        if args.mode == "simulated":
            line += f"  estimate {row['estimate']:+.6f} +/- {row['std_err']:.6f}"
        print(line)
    _print_verdict(verdict)
    print(f"wrote {len(manifest.output_files)} files to {out_dir}")
    return 0


def cmd_game(args: argparse.Namespace) -> int:
    thetas = parse_angle_list(args.theta_grid)
    cfg = _load_config(args)
    out_dir, manifest, t0 = _start_run(args, cfg)
    if args.mode == "exact":
        rows = game_exact_rows(thetas, args.strategy)
        header = _GAME_EXACT_HEADER
    else:
        rows = game_simulated_rows(thetas, args.strategy, cfg)
        header = _GAME_SIM_HEADER
    _write_csv(out_dir, manifest, "game.csv", header, rows)
    _finish_run(out_dir, manifest, t0)
    for row in rows:
        line = f"  theta {row['theta']:.6f}  p_win {row['p_win']:.6f}"
        if args.mode == "simulated":
            line += f"  estimate {row['p_win_estimate']:.6f} +/- {row['p_win_std_err']:.6f}"
        print(line)
    print(f"wrote {len(manifest.output_files)} files to {out_dir}")
    return 0


def cmd_tomo(args: argparse.Namespace) -> int:
    cfg = _load_config(args)
    if args.states.strip().lower() == "all":
        states = None
    else:
        states = report_states(thetas=parse_angle_list(args.states))
    out_dir, manifest, t0 = _start_run(args, cfg)
    records = tomography_report(cfg, out_dir, states=states, num_bootstrap=args.bootstrap)
    for rec in records:
        manifest.output_files.extend(rec["files"])
    manifest.output_files.append("fidelities.csv")
    _finish_run(out_dir, manifest, t0)
    for rec in records:
        err = "" if rec["fidelity_std_err"] is None else f" +/- {rec['fidelity_std_err']:.2g}"
        print(
            f"  {rec['label']:<22} fidelity {rec['fidelity']:.6f}{err}"
            f"  clip {rec['clip_magnitude']:.3g}"
        )
    print(f"wrote {len(manifest.output_files)} files to {out_dir}")
    return 0


def _basis_state(label: str) -> StateVector:
    amps = np.zeros(2 ** len(label), dtype=complex)
    amps[int(label, 2)] = 1.0
    return StateVector(amps)


def _dicke_rows(n: int) -> tuple[list[dict], list[dict]]:
    """Constraint rows and spec documents for every Z position."""
    rows, docs = [], []
    superposition = dicke_one_excitation(n)
    for z_position in range(n):
        spec = dicke_paradox(n, z_position)
        docs.append({"z_position": z_position, **spec.to_dict()})
        for con in spec.constraints:
            if con.source_label == "0" * n:
                state = superposition
            else:
                state = _basis_state(con.source_label)
            rows.append(
                {
                    "z_position": z_position,
                    "label": con.source_label,
                    "observable": con.observable.label,
                    "expected": con.expected_value,
                    "born_value": expectation(state, con.observable),
                }
            )
    return rows, docs


def cmd_dicke(args: argparse.Namespace) -> int:
    rows, docs = _dicke_rows(args.n)
    out_dir, manifest, t0 = _start_run(args, ExperimentConfig())
    _write_csv(
        out_dir,
        manifest,
        "dicke.csv",
        ["z_position", "label", "observable", "expected", "born_value"],
        rows,
    )
    _write_json(out_dir, manifest, "dicke_specs.json", docs)
    _finish_run(out_dir, manifest, t0)
    for z_position in range(args.n):
        final = [r for r in rows if r["z_position"] == z_position][-1]
        print(
            f"  z={z_position}: final constraint {final['observable']} on"
            f" {final['label']} advertises {final['expected']:+.6f}"
            f" (Born value {final['born_value']:+.6f})"
        )
    print(f"wrote {len(manifest.output_files)} files to {out_dir}")
    return 0


def cmd_visibility(args: argparse.Namespace) -> int:
    fixed = parse_angle(args.fixed)
    if args.points < 3:
        raise ValueError(f"points={args.points}: the fringe fit needs at least 3")
    cfg = _load_config(args)
    out_dir, manifest, t0 = _start_run(args, cfg)
    grid = [i * math.pi / args.points for i in range(args.points)]
    scan = visibility_scan(
        epr_family(math.pi / 4, "00"),
        fixed,
        grid,
        cfg,
        simulate=(args.mode == "simulated"),
    )
    scan.to_csv(out_dir / "visibility.csv")
    manifest.output_files.append("visibility.csv")
    _write_json(out_dir, manifest, "visibility.json", scan.to_dict())
    _finish_run(out_dir, manifest, t0)
    relation = "exceeds" if scan.exceeds_classical_bound else "is within"
    print(
        f"fixed arm {args.fixed}: V = {scan.visibility:.6f}, which {relation}"
        f" the classical bound {CLASSICAL_VISIBILITY_BOUND}"
    )
    print(f"wrote {len(manifest.output_files)} files to {out_dir}")
    return 0


def cmd_report(args: argparse.Namespace) -> int:
    cfg = _load_config(args)
    out_dir, manifest, t0 = _start_run(args, cfg)
    verdicts: dict = {"exact": {}, "simulated": {}}

    # Exact five-correlator tables for both transverse axes.
    for axis in ("X", "Y"):
        axis_rows: list[dict] = []
        axis_verdicts: dict = {}
        for theta in DEFAULT_THETAS:
            _spec, rows, verdict = paradox_exact_block(theta, axis)
            axis_rows.extend(rows)
            axis_verdicts[f"theta={theta:.6g}"] = verdict
        _write_csv(out_dir, manifest, f"paradox_{axis.lower()}.csv", _EXACT_HEADER, axis_rows)
        verdicts["exact"][axis] = axis_verdicts

    # Headline simulated table at theta = pi/4 along X.
    _spec, sim_rows, sim_verdict, _counts = paradox_simulated_block(
        math.pi / 4, "X", cfg, tag_base=_TAG_PARADOX_SIM
    )
    _write_csv(out_dir, manifest, "paradox_simulated.csv", _SIMULATED_HEADER, sim_rows)
    verdicts["simulated"]["axis=X theta=pi/4"] = sim_verdict
    _write_json(out_dir, manifest, "verdicts.json", verdicts)

    # Plot-ready exact correlator sweep.
    sweep = tuple(i * (math.pi / 2) / 26 for i in range(1, 26))
    _write_csv(
        out_dir,
        manifest,
        "paradox_curve.csv",
        ["theta", "label", "zz", "aa", "axis"],
        correlator_detail_rows(sweep, "X"),
    )

    # Game tables (exact values plus count-based estimates) and curve.
    for strategy, tag in (("x", _TAG_GAME_X), ("z", _TAG_GAME_Z)):
        rows = game_simulated_rows(DEFAULT_THETAS, strategy, cfg, tag_base=tag)
        _write_csv(out_dir, manifest, f"game_{strategy}.csv", _GAME_SIM_HEADER, rows)
    _write_csv(
        out_dir,
        manifest,
        "game_curve.csv",
        ["theta", "p_win_x", "p_win_z", "sin_2theta"],
        game_curve_rows(),
    )

    # Multi-source family table at n = 3.
    dicke_rows, _docs = _dicke_rows(3)
    _write_csv(
        out_dir,
        manifest,
        "dicke.csv",
        ["z_position", "label", "observable", "expected", "born_value"],
        dicke_rows,
    )

    # Tomography dumps.
    records = tomography_report(
        cfg, out_dir / "tomo", num_bootstrap=args.bootstrap, tag_base=_TAG_TOMO
    )
    for rec in records:
        manifest.output_files.extend(f"tomo/{name}" for name in rec["files"])
    manifest.output_files.append("tomo/fidelities.csv")

    # Visibility scans at the two canonical fixed-arm angles.
    grid = [i * math.pi / 25 for i in range(25)]
    vis_doc = {}
    for stem, fixed, tag in (("0", 0.0, _TAG_VIS), ("3pi4", 3 * math.pi / 4, _TAG_VIS + 1)):
        scan = visibility_scan(
            epr_family(math.pi / 4, "00"), fixed, grid, cfg, simulate=True, stream_tag=tag
        )
        scan.to_csv(out_dir / f"visibility_arm{stem}.csv")
        manifest.output_files.append(f"visibility_arm{stem}.csv")
        vis_doc[stem] = scan.to_dict()
    _write_json(out_dir, manifest, "visibility.json", vis_doc)

    _finish_run(out_dir, manifest, t0)
    _print_verdict(sim_verdict)
    fidelities = [rec["fidelity"] for rec in records]
    print(f"tomography fidelities: {min(fidelities):.6f} .. {max(fidelities):.6f}")
    print(f"visibility: " + ", ".join(f"arm {k}: {v['visibility']:.4f}" for k, v in vis_doc.items()))
    print(f"wrote {len(manifest.output_files)} files to {out_dir}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="cohsim",
        description=(
            "Coherence-paradox toolkit: exact quantum predictions, convex-mixture"
            " refutation, the XOR game, and a synthetic counting experiment."
        ),
    )
    parser.add_argument("--version", action="version", version=f"cohsim {__version__}")
    sub = parser.add_subparsers(dest="command", required=True, metavar="command")

    def add_common(sp: argparse.ArgumentParser) -> None:
        sp.add_argument(
            "--config",
            help="experiment config file with 'key = value' lines"
            " (default: $COHSIM_CONFIG when set)",
        )
        sp.add_argument("--seed", type=int, help="override the RNG seed")
        sp.add_argument(
            "--visibility", type=float, help="override the source visibility v in [0, 1]"
        )
        sp.add_argument("--out", help="output directory (default: cohsim_<command>)")

    sp = sub.add_parser(
        "paradox", help="five-correlator table and mixture verdict for one angle"
    )
    sp.add_argument("--theta", default="pi/4", help="superposition angle (pi/12, 0.3927, ...)")
    sp.add_argument("--axis", default="X", choices=["X", "Y"], help="transverse axis")
    sp.add_argument("--mode", default="exact", choices=["exact", "simulated"])
    add_common(sp)
    sp.set_defaults(func=cmd_paradox)

    sp = sub.add_parser("game", help="XOR-game winning probabilities over a theta grid")
    sp.add_argument(
        "--theta-grid",
        default="pi/12,pi/8,pi/6,pi/4",
        help="comma-separated angles (must be nonempty)",
    )
    sp.add_argument("--strategy", default="x", choices=["x", "z"], help="measurement strategy")
    sp.add_argument("--mode", default="exact", choices=["exact", "simulated"])
    add_common(sp)
    sp.set_defaults(func=cmd_game)

    sp = sub.add_parser("tomo", help="simulate counts and reconstruct the source states")
    sp.add_argument(
        "--states",
        default="all",
        help="'all' for the six standard sources, or a comma list of angles"
        " for the superposition family",
    )
    sp.add_argument("--bootstrap", type=int, default=100, help="bootstrap replicates")
    add_common(sp)
    sp.set_defaults(func=cmd_tomo)

    sp = sub.add_parser("dicke", help="paradox family for the n-source superposition")
    sp.add_argument("--n", type=int, required=True, help="number of sources (2..10)")
    sp.add_argument("--out", help="output directory (default: cohsim_dicke)")
    sp.set_defaults(func=cmd_dicke)

    sp = sub.add_parser("visibility", help="two-arm fringe scan and visibility fit")
    sp.add_argument("--fixed", default="0", help="fixed-arm analyzer angle (0 or 3pi/4)")
    sp.add_argument("--mode", default="exact", choices=["exact", "simulated"])
    sp.add_argument("--points", type=int, default=25, help="scan grid size")
    add_common(sp)
    sp.set_defaults(func=cmd_visibility)

    sp = sub.add_parser("report", help="regenerate every table and dataset in one directory")
    sp.add_argument("--bootstrap", type=int, default=100, help="tomography bootstrap replicates")
    add_common(sp)
    sp.set_defaults(func=cmd_report)

    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except ValueError as exc:
        print(f"cohsim: error: {exc}", file=sys.stderr)
        return 2
    except ArithmeticError as exc:
        print(f"cohsim: numerical failure: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    raise SystemExit(main())
