"""Synthetic two-party coincidence experiment.

Counting model: for one measurement setting (an axis pair), each trial
assigns every outcome cell (a, b) an independent Poisson draw whose mean
is ``pair_rate * efficiency * duration * P(a, b)``, with the outcome
probabilities taken from the Born rule after mixing the source state
with white noise at the configured visibility. Correlators are estimated
from pooled counts; error bars come from a parametric bootstrap
(re-drawing each cell from a Poisson at its observed mean); evidence
against the best convex-mixture model is summarized by a Hoeffding tail
bound optimized over the mixture weights.

Every random quantity draws from its own RNG stream derived from the
seed, the table's stream tag, the setting, and the trial or replicate
domain, so results are bit-reproducible and independent of evaluation
order.
"""

from __future__ import annotations

import csv
import json
import math
from dataclasses import asdict, dataclass
from pathlib import Path
from typing import Mapping

import numpy as np

from .measurement import AXES, setting_distribution
from .paradox import ParadoxSpec, _min_max_residual
from .states import DensityOperator, StateVector, werner_mix

AXIS_CODE = {"X": 0, "Y": 1, "Z": 2}
CLASSICAL_VISIBILITY_BOUND = 0.71

# Stream-domain constants keep bootstrap and scan draws on RNG streams
# that can never coincide with a per-trial count stream.
_BOOT_DOMAIN = 811
_SCAN_DOMAIN = 101
_TOMO_DOMAIN = 907

_MIN_POSITIVE = 5e-324  # smallest positive float, used to keep p-values nonzero

_INT_FIELDS = {"num_trials", "seed"}
_FLOAT_FIELDS = {"pair_rate", "duration_per_setting", "visibility_v", "efficiency"}


@dataclass(frozen=True)
class ExperimentConfig:
    """Knobs of the synthetic experiment.

    ``visibility_v`` mixes the source with white noise before
    measurement; ``efficiency`` scales the detected rate (fair sampling,
    no loophole modeling). ``seed`` roots every RNG stream.
    """

    pair_rate: float = 0.34e6
    duration_per_setting: float = 100.0
    num_trials: int = 10
    visibility_v: float = 1.0
    efficiency: float = 0.60
    seed: int = 0

    def __post_init__(self) -> None:
        if self.pair_rate <= 0.0:
            raise ValueError(f"pair_rate={self.pair_rate} must be positive")
        if self.duration_per_setting <= 0.0:
            raise ValueError(f"duration_per_setting={self.duration_per_setting} must be positive")
        if int(self.num_trials) != self.num_trials or self.num_trials < 1:
            raise ValueError(f"num_trials={self.num_trials} must be a positive integer")
        if not 0.0 <= self.visibility_v <= 1.0:
            raise ValueError(f"visibility_v={self.visibility_v} must lie in [0, 1]")
        if not 0.0 < self.efficiency <= 1.0:
            raise ValueError(f"efficiency={self.efficiency} must lie in (0, 1]")
        if int(self.seed) != self.seed or not 0 <= self.seed < 2**64:
            raise ValueError(f"seed={self.seed} must be an unsigned 64-bit integer")
        object.__setattr__(self, "num_trials", int(self.num_trials))
        object.__setattr__(self, "seed", int(self.seed))

    @property
    def mean_per_trial(self) -> float:
        """Expected detected coincidences per trial per setting."""
        return self.pair_rate * self.efficiency * self.duration_per_setting

    def to_dict(self) -> dict:
        return asdict(self)

    def replace(self, **changes) -> "ExperimentConfig":
        merged = {**asdict(self), **changes}
        return ExperimentConfig(**merged)

    @classmethod
    def from_file(cls, path: str | Path, **overrides) -> "ExperimentConfig":
        """Load ``key = value`` lines; ``#`` starts a comment.

        Keyword overrides (CLI flags) win over file values.

        Raises:
            ValueError: unknown key or unparsable value.
        """
        values: dict = {}
        for raw in Path(path).read_text().splitlines():
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise ValueError(f"config line {raw!r} is not 'key = value'")
            key, _, text = line.partition("=")
            key = key.strip()
            text = text.strip()
            if key in _INT_FIELDS:
                values[key] = int(text)
            elif key in _FLOAT_FIELDS:
                values[key] = float(text)
            else:
                raise ValueError(f"unknown config key {key!r}")
        values.update({k: v for k, v in overrides.items() if v is not None})
        return cls(**values)


def _check_axis(axis: str) -> str:
    if axis not in AXES:
        raise ValueError(f"setting axis must be one of {AXES}, got {axis!r}")
    return axis


@dataclass(frozen=True, eq=False)
class CountTable:
    """Per-trial coincidence counts for one or more settings.

    ``counts`` maps an axis pair ``(u, v)`` to an integer array of shape
    ``(num_trials, 2, 2)`` indexed by (trial, a, b). The config snapshot
    and the stream tag pin down exactly which RNG streams produced the
    data, so bootstrap draws can be derived without clashing with them.
    """

    counts: dict[tuple[str, str], np.ndarray]
    config: ExperimentConfig
    stream_tag: int = 0

    def __post_init__(self) -> None:
        if self.stream_tag < 0:
            raise ValueError("stream_tag must be nonnegative")
        frozen: dict[tuple[str, str], np.ndarray] = {}
        for (u, v), arr in self.counts.items():
            _check_axis(u)
            _check_axis(v)
            data = np.array(arr, dtype=np.int64)
            if data.ndim != 3 or data.shape[1:] != (2, 2):
                raise ValueError(f"counts for ({u},{v}) must have shape (trials, 2, 2)")
            if data.shape[0] != self.config.num_trials:
                raise ValueError(
                    f"counts for ({u},{v}) have {data.shape[0]} trials, "
                    f"config says {self.config.num_trials}"
                )
            if int(data.min(initial=0)) < 0:
                raise ValueError(f"negative count in setting ({u},{v})")
            data.setflags(write=False)
            frozen[(u, v)] = data
        if not frozen:
            raise ValueError("count table needs at least one setting")
        object.__setattr__(self, "counts", frozen)

    def settings(self) -> tuple[tuple[str, str], ...]:
        return tuple(self.counts.keys())

    def trial_counts(self, u: str, v: str) -> np.ndarray:
        key = (u, v)
        if key not in self.counts:
            raise KeyError(f"no counts for setting ({u},{v})")
        return self.counts[key]

    def pooled(self, u: str, v: str) -> np.ndarray:
        """Counts summed over trials, shape (2, 2)."""
        return self.trial_counts(u, v).sum(axis=0)

    def total(self, u: str, v: str) -> int:
        return int(self.pooled(u, v).sum())

    def merge(self, other: "CountTable") -> "CountTable":
        """Combine disjoint settings recorded under the same config and tag."""
        if self.config != other.config or self.stream_tag != other.stream_tag:
            raise ValueError("can only merge tables with identical config and stream tag")
        overlap = set(self.counts) & set(other.counts)
        if overlap:
            raise ValueError(f"settings recorded twice: {sorted(overlap)}")
        return CountTable({**self.counts, **other.counts}, self.config, self.stream_tag)

    def to_csv(self, path: str | Path) -> None:
        """Write rows ``u,v,a,b,trial,count`` (one per cell per trial)."""
        with open(path, "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(["u", "v", "a", "b", "trial", "count"])
            for (u, v) in sorted(self.counts):
                data = self.counts[(u, v)]
                for t in range(data.shape[0]):
                    for a in range(2):
                        for b in range(2):
                            writer.writerow([u, v, a, b, t, int(data[t, a, b])])

    @classmethod
    def from_csv(
        cls, path: str | Path, config: ExperimentConfig, stream_tag: int = 0
    ) -> "CountTable":
        cells: dict[tuple[str, str], dict[tuple[int, int, int], int]] = {}
        with open(path, newline="") as fh:
            for row in csv.DictReader(fh):
                key = (row["u"], row["v"])
                cells.setdefault(key, {})[
                    (int(row["trial"]), int(row["a"]), int(row["b"]))
                ] = int(row["count"])
        counts = {}
        for key, cellmap in cells.items():
            trials = 1 + max(t for t, _, _ in cellmap)
            arr = np.zeros((trials, 2, 2), dtype=np.int64)
            for (t, a, b), n in cellmap.items():
                arr[t, a, b] = n
            counts[key] = arr
        return cls(counts, config, stream_tag)

    def to_json(self) -> str:
        doc = {
            "config": self.config.to_dict(),
            "stream_tag": self.stream_tag,
            "counts": {f"{u},{v}": arr.tolist() for (u, v), arr in self.counts.items()},
        }
        return json.dumps(doc, indent=2)


@dataclass(frozen=True)
class EstimatedCorrelator:
    """Point estimate with bootstrap standard error and sample size."""

    value: float
    std_err: float
    n_total: int

    def __post_init__(self) -> None:
        if not -1.0 <= self.value <= 1.0:
            raise ValueError(f"correlator {self.value} outside [-1, 1]")
        if self.std_err < 0.0:
            raise ValueError(f"std_err {self.std_err} is negative")
        if self.n_total <= 0:
            raise ValueError("n_total must be positive")


def simulate_counts(
    state: StateVector | DensityOperator,
    setting: tuple[str, str],
    cfg: ExperimentConfig,
    stream_tag: int = 0,
) -> CountTable:
    """Poisson counts for one axis-pair setting on a two-qubit source.

    The source is mixed with white noise at ``cfg.visibility_v`` before
    the Born-rule probabilities are computed. Each (trial, cell) draw
    comes from the stream seeded by (seed, stream_tag, axes, trial), so
    re-running with the same config reproduces the table bit for bit.
    """
    u, v = _check_axis(setting[0]), _check_axis(setting[1])
    if state.num_qubits != 2:
        raise ValueError(f"coincidence experiment needs a 2-qubit state, got {state.num_qubits}")
    rho = werner_mix(state, cfg.visibility_v)
    probs = setting_distribution(rho, u, v)
    means = cfg.mean_per_trial * probs
    trials = np.empty((cfg.num_trials, 2, 2), dtype=np.int64)
    for t in range(cfg.num_trials):
        rng = np.random.default_rng(
            np.random.SeedSequence((cfg.seed, stream_tag, AXIS_CODE[u], AXIS_CODE[v], t))
        )
        trials[t] = rng.poisson(means)
    return CountTable({(u, v): trials}, cfg, stream_tag)


def point_correlator(table: CountTable, u: str, v: str) -> tuple[float, int]:
    """Pooled correlator ``(N00 - N01 - N10 + N11) / N`` and the total N.

    Raises:
        ValueError: zero total count.
    """
    pooled = table.pooled(u, v)
    total = int(pooled.sum())
    if total == 0:
        raise ValueError(f"zero total count for setting ({u},{v})")
    value = float(pooled[0, 0] - pooled[0, 1] - pooled[1, 0] + pooled[1, 1]) / total
    return value, total


def correlator_from_counts(
    table: CountTable, u: str, v: str, num_bootstrap: int = 1000
) -> EstimatedCorrelator:
    """Estimate one setting's correlator with a parametric bootstrap.

    Each replicate redraws every cell from a Poisson at its observed
    pooled count; the standard error is the standard deviation of the
    replicate estimates. A replicate with zero total contributes 0.0
    (only reachable for tiny means).
    """
    value, total = point_correlator(table, u, v)
    pooled = table.pooled(u, v).astype(float)
    rng = np.random.default_rng(
        np.random.SeedSequence(
            (table.config.seed, table.stream_tag, AXIS_CODE[u], AXIS_CODE[v], _BOOT_DOMAIN, 0)
        )
    )
    draws = rng.poisson(pooled, size=(num_bootstrap, 2, 2))
    totals = draws.sum(axis=(1, 2))
    signed = draws[:, 0, 0] - draws[:, 0, 1] - draws[:, 1, 0] + draws[:, 1, 1]
    estimates = np.where(totals > 0, signed / np.maximum(totals, 1), 0.0)
    std_err = float(np.std(estimates, ddof=1)) if num_bootstrap > 1 else 0.0
    return EstimatedCorrelator(value=value, std_err=std_err, n_total=total)


def delta_method_std_err(value: float, n_total: int) -> float:
    """First-order error of a correlator from Poisson cells: sqrt((1-E^2)/N)."""
    if n_total <= 0:
        raise ValueError("n_total must be positive")
    return math.sqrt(max(0.0, 1.0 - value * value) / n_total)


def _chain_setting(obs_label: str) -> tuple[str, str]:
    if len(obs_label) != 2 or any(ax not in AXES for ax in obs_label):
        raise ValueError(
            f"observable {obs_label!r} is not a two-party axis pair; "
            "the coincidence experiment measures two qubits"
        )
    return obs_label[0], obs_label[1]


def paradox_counts(
    spec: ParadoxSpec,
    sources: Mapping[str, StateVector | DensityOperator],
    cfg: ExperimentConfig,
    tag_base: int = 0,
) -> dict[tuple[str, str], CountTable]:
    """Simulate one count table per paradox constraint.

    ``sources`` maps each source label to its ideal state; white noise
    is applied inside ``simulate_counts`` per the config. Each
    constraint gets its own stream tag (``tag_base`` plus its index), so
    tables are independent and reproducible; callers running several
    blocks under one seed should space their tag bases apart.

    Raises:
        ValueError: a label without a source, or an observable that is
            not a two-party axis pair.
    """
    out: dict[tuple[str, str], CountTable] = {}
    for idx, con in enumerate(spec.constraints):
        if con.source_label not in sources:
            raise ValueError(f"no source state for label {con.source_label!r}")
        setting = _chain_setting(con.observable.label)
        out[(con.source_label, con.observable.label)] = simulate_counts(
            sources[con.source_label], setting, cfg, stream_tag=tag_base + idx
        )
    return out


def _weighted_gap(
    spec: ParadoxSpec, counts: Mapping[tuple[str, str], CountTable]
) -> tuple[float, np.ndarray]:
    """Min over mixture weights of max_O sqrt(N_O) |residual_O|."""
    missing = [
        (c.source_label, c.observable.label)
        for c in spec.constraints
        if (c.source_label, c.observable.label) not in counts
    ]
    if missing:
        raise ValueError(f"missing count tables for constraints: {missing}")
    estimates: dict[tuple[str, str], tuple[float, int]] = {}
    for key, table in counts.items():
        estimates[key] = point_correlator(table, *_chain_setting(key[1]))
    claim = spec.mixture_claim
    rows, targets, weights = [], [], []
    for chain in spec.observables():
        key_mixed = (claim.mixed_label, chain.label)
        if key_mixed not in estimates:
            continue
        row = []
        for lb in claim.component_labels:
            key = (lb, chain.label)
            if key not in estimates:
                raise ValueError(f"mixed-row observable {chain.label} lacks counts for {key}")
            row.append(estimates[key][0])
        rows.append(row)
        value, n_total = estimates[key_mixed]
        targets.append(value)
        weights.append(math.sqrt(n_total))
    if not rows:
        return 0.0, np.full(len(claim.component_labels), 1.0 / len(claim.component_labels))
    return _min_max_residual(np.array(rows), np.array(targets), np.array(weights))


def paradox_log10_p_value(
    spec: ParadoxSpec, counts: Mapping[tuple[str, str], CountTable]
) -> float:
    """Base-10 log of the Hoeffding bound, exact even when it underflows.

    The per-coincidence win variable lies in [-1, 1], so the chance that
    a mixed-row correlator lands ``g`` away from the best mixture
    prediction is at most ``exp(-N g^2 / 2)``; the bound is maximized
    over the weight simplex (the most favorable LHV model).
    """
    gap, _ = _weighted_gap(spec, counts)
    return -(gap * gap) / (2.0 * math.log(10.0))


def paradox_p_value(
    spec: ParadoxSpec, counts: Mapping[tuple[str, str], CountTable]
) -> float:
    """Hoeffding tail bound against the best convex-mixture model.

    Returns a value in (0, 1]; bounds below the smallest positive float
    are clamped to it (use ``paradox_log10_p_value`` for the exact
    exponent). A mixed row exactly at the best mixture prediction gives
    p = 1.

    Raises:
        ValueError: counts missing for a constraint, or zero totals.
    """
    gap, _ = _weighted_gap(spec, counts)
    return max(math.exp(-(gap * gap) / 2.0), _MIN_POSITIVE)


@dataclass(frozen=True, eq=False)
class VisibilityScan:
    """Fringe scan records plus the fitted visibility.

    ``rates`` are detected coincidence rates per second (exact, or
    estimated from simulated counts when ``counts`` is present). The
    visibility is read off a least-squares sinusoid with the fringe
    period fixed at pi in the analyzer angle: V = amplitude / offset of
    the fitted curve, which equals (max - min)/(max + min) of that
    curve.
    """

    fixed_arm_angle: float
    angles: tuple[float, ...]
    rates: tuple[float, ...]
    visibility: float
    fit_offset: float
    fit_amplitude: float
    exceeds_classical_bound: bool
    counts: tuple[int, ...] | None = None

    def records(self) -> tuple[tuple[float, float], ...]:
        return tuple(zip(self.angles, self.rates))

    def to_dict(self) -> dict:
        return {
            "fixed_arm_angle": self.fixed_arm_angle,
            "visibility": self.visibility,
            "fit_offset": self.fit_offset,
            "fit_amplitude": self.fit_amplitude,
            "exceeds_classical_bound": self.exceeds_classical_bound,
            "num_points": len(self.angles),
        }

    def to_csv(self, path: str | Path) -> None:
        with open(path, "w", newline="") as fh:
            writer = csv.writer(fh)
            if self.counts is None:
                writer.writerow(["angle", "rate"])
                for ang, rate in zip(self.angles, self.rates):
                    writer.writerow([repr(float(ang)), repr(float(rate))])
            else:
                writer.writerow(["angle", "rate", "counts"])
                for ang, rate, n in zip(self.angles, self.rates, self.counts):
                    writer.writerow([repr(float(ang)), repr(float(rate)), int(n)])


def _polarizer_projector(angle: float) -> np.ndarray:
    ket = np.array([math.cos(angle), math.sin(angle)], dtype=complex)
    return np.outer(ket, ket.conj())


def visibility_scan(
    state: StateVector | DensityOperator,
    fixed_arm_angle: float,
    scan_grid,
    cfg: ExperimentConfig | None = None,
    simulate: bool = False,
    stream_tag: int = 0,
) -> VisibilityScan:
    """Transmitted-transmitted fringe versus the scanned analyzer angle.

    One arm's analyzer is fixed at ``fixed_arm_angle``; the other sweeps
    ``scan_grid`` (radians). Exact mode records the true coincidence
    rates; with ``simulate=True`` each grid point gets one Poisson draw
    over the full measurement time and the rates are estimates.

    Raises:
        ValueError: empty grid or a non-2-qubit state.
        ArithmeticError: fit breakdown (zero mean rate).
    """
    grid = [float(a) for a in scan_grid]
    if not grid:
        raise ValueError("scan grid must be nonempty")
    if state.num_qubits != 2:
        raise ValueError("visibility scan needs a 2-qubit state")
    cfg = cfg or ExperimentConfig()
    rho = werner_mix(state, cfg.visibility_v).matrix
    fixed_proj = _polarizer_projector(fixed_arm_angle)
    probs = np.array(
        [
            max(0.0, float(np.real(np.trace(np.kron(fixed_proj, _polarizer_projector(ang)) @ rho))))
            for ang in grid
        ]
    )
    rate_scale = cfg.pair_rate * cfg.efficiency
    measure_time = cfg.duration_per_setting * cfg.num_trials
    counts: tuple[int, ...] | None = None
    if simulate:
        drawn = np.empty(len(grid), dtype=np.int64)
        for i, prob in enumerate(probs):
            rng = np.random.default_rng(
                np.random.SeedSequence((cfg.seed, stream_tag, _SCAN_DOMAIN, i))
            )
            drawn[i] = rng.poisson(rate_scale * measure_time * prob)
        counts = tuple(int(n) for n in drawn)
        rates = drawn / measure_time
    else:
        rates = rate_scale * probs
    angles_arr = np.array(grid)
    design = np.column_stack(
        [np.ones_like(angles_arr), np.cos(2.0 * angles_arr), np.sin(2.0 * angles_arr)]
    )
    coeffs, *_ = np.linalg.lstsq(design, rates, rcond=None)
    offset = float(coeffs[0])
    amplitude = float(math.hypot(coeffs[1], coeffs[2]))
    if offset <= 0.0:
        raise ArithmeticError("fringe fit degenerate: nonpositive mean rate")
    visibility = amplitude / offset
    return VisibilityScan(
        fixed_arm_angle=float(fixed_arm_angle),
        angles=tuple(float(a) for a in grid),
        rates=tuple(float(r) for r in rates),
        visibility=visibility,
        fit_offset=offset,
        fit_amplitude=amplitude,
        exceeds_classical_bound=visibility > CLASSICAL_VISIBILITY_BOUND,
        counts=counts,
    )
