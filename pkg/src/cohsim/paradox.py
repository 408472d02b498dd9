"""Multi-source paradox constructions and the convex-mixture refuter.

A paradox here is a list of expectation-value constraints, each tied to a
labeled source state, together with a mixture claim: the assertion that
one labeled row (the superposition source) should be explainable as a
convex mixture of the component rows. ``lhv_mixture_test`` measures how
badly that assertion fails; a strictly positive ``violation_gap`` means
no mixture weights reproduce the observed values.
"""

from __future__ import annotations

import itertools
import json
import math
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import linprog

from .measurement import ObservableChain, as_chain, expectation
from .states import EQ_ATOL, MAX_QUBITS, StateVector

GHZ_CHAINS = ("XYY", "YXY", "YYX", "XXX")
GHZ_TARGET = (-1.0, -1.0, -1.0, 1.0)


@dataclass(frozen=True)
class ParadoxConstraint:
    """One row: source label, observable chain, expected value in [-1, 1]."""

    source_label: str
    observable: ObservableChain
    expected_value: float

    def __post_init__(self) -> None:
        object.__setattr__(self, "observable", as_chain(self.observable))
        if not -1.0 <= self.expected_value <= 1.0:
            raise ValueError(f"expected value {self.expected_value} outside [-1, 1]")


@dataclass(frozen=True)
class MixtureClaim:
    """Claim that ``mixed_label``'s row is a convex mixture of the components."""

    mixed_label: str
    component_labels: tuple[str, ...]
    note: str = ""

    def __post_init__(self) -> None:
        object.__setattr__(self, "component_labels", tuple(self.component_labels))
        if len(set(self.component_labels)) != len(self.component_labels):
            raise ValueError("component labels must be distinct")
        if self.mixed_label in self.component_labels:
            raise ValueError("mixed label cannot be one of its own components")


@dataclass(frozen=True)
class ParadoxSpec:
    """Constraint list plus mixture claim.

    Raises:
        ValueError: if the mixed label or any component label never
            appears among the constraints.
    """

    constraints: tuple[ParadoxConstraint, ...]
    mixture_claim: MixtureClaim

    def __post_init__(self) -> None:
        object.__setattr__(self, "constraints", tuple(self.constraints))
        if not self.constraints:
            raise ValueError("paradox needs at least one constraint")
        labels = {c.source_label for c in self.constraints}
        claim = self.mixture_claim
        if claim.mixed_label not in labels:
            raise ValueError(f"mixed label {claim.mixed_label!r} has no constraints")
        missing = [lb for lb in claim.component_labels if lb not in labels]
        if missing:
            raise ValueError(f"component labels {missing} have no constraints")

    def observables(self) -> tuple[ObservableChain, ...]:
        """Unique observable chains, in first-appearance order."""
        seen: dict[str, ObservableChain] = {}
        for c in self.constraints:
            seen.setdefault(c.observable.label, c.observable)
        return tuple(seen.values())

    def to_dict(self) -> dict:
        return {
            "constraints": [
                {
                    "source": c.source_label,
                    "observable": c.observable.label,
                    "expected": c.expected_value,
                }
                for c in self.constraints
            ],
            "mixture_claim": {
                "mixed": self.mixture_claim.mixed_label,
                "components": list(self.mixture_claim.component_labels),
                "note": self.mixture_claim.note,
            },
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2)

    @classmethod
    def from_dict(cls, doc: dict) -> "ParadoxSpec":
        constraints = tuple(
            ParadoxConstraint(item["source"], as_chain(item["observable"]), float(item["expected"]))
            for item in doc["constraints"]
        )
        claim_doc = doc["mixture_claim"]
        claim = MixtureClaim(
            claim_doc["mixed"], tuple(claim_doc["components"]), claim_doc.get("note", "")
        )
        return cls(constraints, claim)

    @classmethod
    def from_json(cls, text: str) -> "ParadoxSpec":
        return cls.from_dict(json.loads(text))


@dataclass(frozen=True)
class ParadoxVerdict:
    """Result of a mixture-feasibility check.

    ``violation_gap`` is the smallest worst-case residual achievable by
    any weights on the simplex; ``lhv_feasible`` is exactly
    ``violation_gap <= tol`` (so a zero gap and feasibility coincide).
    ``satisfying_assignments`` is filled only by the stabilizer check,
    where deterministic sign assignments are enumerated exhaustively.
    """

    per_constraint_values: dict[tuple[str, str], float]
    lhv_feasible: bool
    violation_gap: float
    witness_weights: tuple[float, ...]
    tol: float
    satisfying_assignments: int | None = None

    def __post_init__(self) -> None:
        if self.violation_gap < 0.0:
            raise ValueError(f"violation gap {self.violation_gap} is negative")
        if self.lhv_feasible != (self.violation_gap <= self.tol):
            raise ValueError("feasibility flag inconsistent with gap and tolerance")

    def to_dict(self) -> dict:
        return {
            "values": {f"{lb}:{ob}": val for (lb, ob), val in self.per_constraint_values.items()},
            "lhv_feasible": self.lhv_feasible,
            "violation_gap": self.violation_gap,
            "witness_weights": list(self.witness_weights),
            "tol": self.tol,
            "satisfying_assignments": self.satisfying_assignments,
        }


def _min_max_residual(
    component_values: np.ndarray,
    targets: np.ndarray,
    weights: np.ndarray | None = None,
) -> tuple[float, np.ndarray]:
    """Minimize ``max_j weights_j |row_j . p - targets_j|`` over the simplex.

    ``component_values`` has one row per observable and one column per
    mixture component. Two columns are solved exactly (the objective is
    piecewise linear in the single free weight, so the minimum sits at a
    kink or an endpoint); more columns go through an exact linear
    program. Returns ``(gap, weights_vector)``.
    """
    vals = np.asarray(component_values, dtype=float)
    m, k = vals.shape
    targ = np.asarray(targets, dtype=float)
    w = np.ones(m) if weights is None else np.asarray(weights, dtype=float)
    if m == 0:
        return 0.0, np.full(k, 1.0 / k)
    if k == 1:
        return float(np.max(w * np.abs(vals[:, 0] - targ))), np.array([1.0])
    if k == 2:
        a = vals[:, 0] - vals[:, 1]
        b = vals[:, 1] - targ

        def g(p: float) -> float:
            return float(np.max(w * np.abs(a * p + b)))

        candidates = [0.0, 1.0]
        for j in range(m):
            if a[j] != 0.0:
                candidates.append(-b[j] / a[j])
        for i in range(m):
            for j in range(i + 1, m):
                for s in (1.0, -1.0):
                    den = w[i] * a[i] - s * w[j] * a[j]
                    if den != 0.0:
                        candidates.append((s * w[j] * b[j] - w[i] * b[i]) / den)
        best_p, best_g = 0.0, g(0.0)
        for p in sorted(c for c in candidates if 0.0 <= c <= 1.0):
            val = g(p)
            if val < best_g:
                best_p, best_g = p, val
        return best_g, np.array([best_p, 1.0 - best_p])
    # k >= 3: minimize t subject to |w_j (row_j . p - targ_j)| <= t on the simplex
    c = np.zeros(k + 1)
    c[-1] = 1.0
    a_ub = np.zeros((2 * m, k + 1))
    b_ub = np.zeros(2 * m)
    for j in range(m):
        a_ub[2 * j, :k] = w[j] * vals[j]
        a_ub[2 * j, -1] = -1.0
        b_ub[2 * j] = w[j] * targ[j]
        a_ub[2 * j + 1, :k] = -w[j] * vals[j]
        a_ub[2 * j + 1, -1] = -1.0
        b_ub[2 * j + 1] = -w[j] * targ[j]
    a_eq = np.zeros((1, k + 1))
    a_eq[0, :k] = 1.0
    res = linprog(
        c,
        A_ub=a_ub,
        b_ub=b_ub,
        A_eq=a_eq,
        b_eq=[1.0],
        bounds=[(0.0, None)] * k + [(None, None)],
        method="highs",
    )
    if not res.success:
        raise ArithmeticError(f"mixture feasibility program failed: {res.message}")
    return max(0.0, float(res.x[-1])), np.clip(res.x[:k], 0.0, None)


def ghz_sign_assignment_products() -> np.ndarray:
    """Products of the four chains under all 2^6 deterministic assignments.

    Each of three parties carries independent signs for its X and Y
    readouts; row ``i`` holds the resulting values of (XYY, YXY, YYX,
    XXX) for assignment ``i``. Shape (64, 4).
    """
    rows = []
    for x1, y1, x2, y2, x3, y3 in itertools.product((-1, 1), repeat=6):
        rows.append((x1 * y2 * y3, y1 * x2 * y3, y1 * y2 * x3, x1 * x2 * x3))
    return np.array(rows, dtype=float)


def ghz_stabilizer_check(state: StateVector, tol: float = EQ_ATOL) -> ParadoxVerdict:
    """Evaluate the four three-qubit stabilizer chains against sign models.

    Computes the expectations of XYY, YXY, YYX, XXX, enumerates all 64
    deterministic sign assignments (none reproduces the pattern
    (-1, -1, -1, +1), which is the multiply-the-four-equations
    contradiction), and reports the distance between the observed
    4-vector and the convex hull of the assignment products. The state
    is LHV-feasible exactly when that distance is within ``tol``.

    Raises:
        ValueError: if the state is not on 3 qubits.
    """
    if state.num_qubits != 3:
        raise ValueError(f"stabilizer check needs a 3-qubit state, got {state.num_qubits}")
    values = {("ghz", chain): expectation(state, chain) for chain in GHZ_CHAINS}
    observed = np.array([values[("ghz", ch)] for ch in GHZ_CHAINS])
    products = ghz_sign_assignment_products()
    satisfying = int(np.sum(np.all(products == np.array(GHZ_TARGET), axis=1)))
    gap, weights = _min_max_residual(products.T, observed)
    return ParadoxVerdict(
        per_constraint_values=values,
        lhv_feasible=gap <= tol,
        violation_gap=gap,
        witness_weights=tuple(float(x) for x in weights),
        tol=tol,
        satisfying_assignments=satisfying,
    )


def coherence_paradox(theta: float, axis: str = "X") -> ParadoxSpec:
    """Five-constraint paradox for the two-path superposition family.

    The two product sources are perfectly anticorrelated in Z and
    uncorrelated along the transverse ``axis`` (X or Y); the
    superposition source shows an ``axis``-``axis`` correlation of
    ``sin(2 theta)``. The mixture claim says the superposition row
    should be a mixture of the two product rows, which fails by exactly
    ``sin(2 theta)``.

    Raises:
        ValueError: for theta outside (0, pi/2) or an axis other than
            X or Y.
    """
    if not 0.0 < theta < math.pi / 2:
        raise ValueError(f"theta={theta} must lie strictly inside (0, pi/2)")
    if axis not in ("X", "Y"):
        raise ValueError(f"transverse axis must be X or Y, got {axis!r}")
    zz = as_chain("ZZ")
    aa = as_chain(axis + axis)
    constraints = (
        ParadoxConstraint("01", zz, -1.0),
        ParadoxConstraint("10", zz, -1.0),
        ParadoxConstraint("01", aa, 0.0),
        ParadoxConstraint("10", aa, 0.0),
        ParadoxConstraint("00", aa, math.sin(2.0 * theta)),
    )
    claim = MixtureClaim(
        mixed_label="00",
        component_labels=("01", "10"),
        note="superposition row claimed to be a convex mixture of the product rows",
    )
    return ParadoxSpec(constraints, claim)


def dicke_paradox(n: int, z_position: int) -> ParadoxSpec:
    """Paradox family for the one-excitation superposition of n sources.

    Component sources are the weight-1 basis states, labeled by their
    bit strings; the superposition source carries the all-zeros label.
    Each component has Z-chain value -1 and vanishing mixed-axis chain
    (X on every qubit except a Z at ``z_position``); the final
    constraint advertises the target value (n-1)/n for that chain on
    the superposition. The advertised value is what the construction
    claims; Born-rule measurement on the one-excitation state
    reproduces it only for n = 3 (the chain expectation vanishes for
    every other n), so treat the emitted spec as the object under test
    rather than as a quantum prediction.

    Raises:
        ValueError: for n outside [2, MAX_QUBITS] or a Z position
            outside [0, n).
    """
    if not 2 <= n <= MAX_QUBITS:
        raise ValueError(f"n={n} must be in [2, {MAX_QUBITS}]")
    if not 0 <= z_position < n:
        raise ValueError(f"z_position={z_position} must be in [0, {n})")
    z_chain = ObservableChain(("Z",) * n)
    mixed_chain = ObservableChain(tuple("Z" if i == z_position else "X" for i in range(n)))
    component_labels = tuple("0" * k + "1" + "0" * (n - 1 - k) for k in range(n))
    mixed_label = "0" * n
    constraints = [ParadoxConstraint(lb, z_chain, -1.0) for lb in component_labels]
    constraints += [ParadoxConstraint(lb, mixed_chain, 0.0) for lb in component_labels]
    constraints.append(ParadoxConstraint(mixed_label, mixed_chain, (n - 1) / n))
    claim = MixtureClaim(
        mixed_label=mixed_label,
        component_labels=component_labels,
        note="one-excitation superposition row claimed to mix the basis-state rows",
    )
    return ParadoxSpec(tuple(constraints), claim)


def lhv_mixture_test(
    spec: ParadoxSpec,
    observed: dict[tuple[str, str], float],
    tol: float,
) -> ParadoxVerdict:
    """Best-mixture feasibility of the observed values under the claim.

    ``observed`` maps ``(source_label, observable_label)`` to a value
    and must cover every constraint in the spec. For each spec
    observable that has an observed mixed-row value, the residual
    between that value and the weighted component values is formed; the
    verdict minimizes the worst residual over the weight simplex.
    Observables without a mixed-row observation impose no condition.

    Raises:
        ValueError: negative tol, a constraint without an observation,
            or a mixed-row observable whose component values are
            missing.
    """
    if tol < 0.0:
        raise ValueError(f"tol={tol} must be nonnegative")
    missing = [
        (c.source_label, c.observable.label)
        for c in spec.constraints
        if (c.source_label, c.observable.label) not in observed
    ]
    if missing:
        raise ValueError(f"missing observations for constraints: {missing}")
    claim = spec.mixture_claim
    components = claim.component_labels
    rows: list[list[float]] = []
    targets: list[float] = []
    for chain in spec.observables():
        key_mixed = (claim.mixed_label, chain.label)
        if key_mixed not in observed:
            continue
        row = []
        for lb in components:
            key = (lb, chain.label)
            if key not in observed:
                raise ValueError(f"mixed-row observable {chain.label} lacks component value {key}")
            row.append(float(observed[key]))
        rows.append(row)
        targets.append(float(observed[key_mixed]))
    k = len(components)
    if rows:
        gap, weights = _min_max_residual(np.array(rows), np.array(targets))
    else:
        gap, weights = 0.0, np.full(k, 1.0 / k)
    values = {
        (c.source_label, c.observable.label): float(
            observed[(c.source_label, c.observable.label)]
        )
        for c in spec.constraints
    }
    return ParadoxVerdict(
        per_constraint_values=values,
        lhv_feasible=gap <= tol,
        violation_gap=gap,
        witness_weights=tuple(float(x) for x in weights),
        tol=tol,
    )


def theoretical_values(spec: ParadoxSpec) -> dict[tuple[str, str], float]:
    """The spec's own expected values, keyed like ``lhv_mixture_test`` input."""
    return {(c.source_label, c.observable.label): c.expected_value for c in spec.constraints}
