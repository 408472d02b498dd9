"""Table assembly shared by the CLI commands.

Builders return plain row dicts ready for CSV/JSON serialization; all
simulation goes through the experiment module so seeds behave
identically whether a table is produced alone or inside the bundled
report.
"""

from __future__ import annotations

import csv
import math
from pathlib import Path
from typing import Mapping

from .experiment import (
    CountTable,
    ExperimentConfig,
    correlator_from_counts,
    delta_method_std_err,
    paradox_counts,
    paradox_log10_p_value,
    paradox_p_value,
    simulate_counts,
)
from .game import quantum_strategy, winning_probability
from .measurement import expectation
from .paradox import ParadoxSpec, coherence_paradox, lhv_mixture_test, theoretical_values
from .states import EQ_ATOL, epr_family

STRATEGY_AXES = {"x": ("X", "X"), "z": ("Z", "Z")}
DEFAULT_THETAS = (math.pi / 12, math.pi / 8, math.pi / 6, math.pi / 4)


def _cell(value) -> str:
    if isinstance(value, bool):
        return str(value)
    if isinstance(value, float):
        return repr(value)
    return str(value)


def write_rows_csv(path: str | Path, header: list[str], rows: list[dict]) -> None:
    """CSV with repr-formatted floats (deterministic, round-trippable)."""
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(header)
        for row in rows:
            writer.writerow([_cell(row[col]) for col in header])


def paradox_sources(theta: float) -> dict:
    return {
        "01": epr_family(theta, "01"),
        "10": epr_family(theta, "10"),
        "00": epr_family(theta, "00"),
    }


def paradox_exact_block(theta: float, axis: str) -> tuple[ParadoxSpec, list[dict], dict]:
    """Five theoretical rows plus the mixture verdict on exact values."""
    spec = coherence_paradox(theta, axis)
    rows = [
        {
            "theta": theta,
            "label": c.source_label,
            "observable": c.observable.label,
            "theoretical": c.expected_value,
        }
        for c in spec.constraints
    ]
    verdict = lhv_mixture_test(spec, theoretical_values(spec), tol=EQ_ATOL)
    return spec, rows, verdict.to_dict()


def paradox_simulated_block(
    theta: float,
    axis: str,
    cfg: ExperimentConfig,
    tag_base: int = 0,
) -> tuple[ParadoxSpec, list[dict], dict, dict[tuple[str, str], CountTable]]:
    """Theoretical and estimated rows, mixture verdict, and p-value.

    ``tag_base`` offsets the RNG stream tags so several blocks under one
    seed (different theta or axis) draw independent counts for rows that
    share a source state.
    """
    spec = coherence_paradox(theta, axis)
    counts = paradox_counts(spec, paradox_sources(theta), cfg, tag_base=tag_base)
    rows = []
    for c in spec.constraints:
        key = (c.source_label, c.observable.label)
        est = correlator_from_counts(counts[key], c.observable.axes[0], c.observable.axes[1])
        rows.append(
            {
                "theta": theta,
                "label": c.source_label,
                "observable": c.observable.label,
                "theoretical": c.expected_value,
                "estimate": est.value,
                "std_err": est.std_err,
                "delta_std_err": delta_method_std_err(est.value, est.n_total),
                "n_total": est.n_total,
            }
        )
    observed = {
        (c.source_label, c.observable.label): rows[i]["estimate"]
        for i, c in enumerate(spec.constraints)
    }
    verdict = lhv_mixture_test(spec, observed, tol=EQ_ATOL).to_dict()
    verdict["p_value"] = paradox_p_value(spec, counts)
    verdict["log10_p_value"] = paradox_log10_p_value(spec, counts)
    return spec, rows, verdict, counts


def game_exact_rows(thetas, strategy: str) -> list[dict]:
    """One row per theta: winning probability and all coherence terms."""
    obs_a, obs_b = STRATEGY_AXES[strategy]
    rows = []
    for theta in thetas:
        dist = quantum_strategy(theta, obs_a, obs_b)
        ev = winning_probability(dist)
        rows.append(
            {
                "theta": float(theta),
                "p_win": ev.p_win,
                "i_00": float(ev.i_terms[0, 0]),
                "i_01": float(ev.i_terms[0, 1]),
                "i_10": float(ev.i_terms[1, 0]),
                "i_11": float(ev.i_terms[1, 1]),
            }
        )
    return rows


def game_simulated_rows(
    thetas, strategy: str, cfg: ExperimentConfig, tag_base: int = 0
) -> list[dict]:
    """Exact rows augmented with count-based estimates.

    The winning probability is estimated from the three measured
    correlators: ``1/2 + (E_00 - E_01 - E_10)/8`` with the uniform
    (1,1) row contributing no signal; errors add in quadrature.
    """
    obs_a, obs_b = STRATEGY_AXES[strategy]
    setting = (obs_a, obs_b)
    rows = game_exact_rows(thetas, strategy)
    for idx, (theta, row) in enumerate(zip(thetas, rows)):
        estimates = {}
        for k, (label, state) in enumerate(sorted(paradox_sources(theta).items())):
            table = simulate_counts(state, setting, cfg, stream_tag=tag_base + 3 * idx + k)
            estimates[label] = correlator_from_counts(table, *setting)
        value = 0.5 + (
            estimates["00"].value - estimates["01"].value - estimates["10"].value
        ) / 8.0
        spread = (
            math.sqrt(
                estimates["00"].std_err ** 2
                + estimates["01"].std_err ** 2
                + estimates["10"].std_err ** 2
            )
            / 8.0
        )
        row.update(
            {
                "e_00": estimates["00"].value,
                "e_01": estimates["01"].value,
                "e_10": estimates["10"].value,
                "p_win_estimate": value,
                "p_win_std_err": spread,
            }
        )
    return rows


def game_curve_rows(num_points: int = 25) -> list[dict]:
    """Dense theta sweep of both named strategies (exact values)."""
    rows = []
    for i in range(1, num_points + 1):
        theta = i * (math.pi / 2) / (num_points + 1)
        x_ev = winning_probability(quantum_strategy(theta, "X", "X"))
        z_ev = winning_probability(quantum_strategy(theta, "Z", "Z"))
        rows.append(
            {
                "theta": theta,
                "p_win_x": x_ev.p_win,
                "p_win_z": z_ev.p_win,
                "sin_2theta": math.sin(2 * theta),
            }
        )
    return rows


def correlator_detail_rows(thetas, axis: str) -> list[dict]:
    """Exact correlators of every source along Z and the transverse axis."""
    rows = []
    for theta in thetas:
        for label, state in sorted(paradox_sources(theta).items()):
            rows.append(
                {
                    "theta": float(theta),
                    "label": label,
                    "zz": expectation(state, "ZZ"),
                    "aa": expectation(state, axis + axis),
                    "axis": axis,
                }
            )
    return rows
