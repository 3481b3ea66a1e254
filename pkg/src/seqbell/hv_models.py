"""Hidden-variable models for sequential polarization measurements.

Two model families live here:

* a deterministic pilot-wave photon model, where a hidden coordinate
  ``u`` in [0, 1) selects the exit branch at each polarizing beam
  splitter (PBS) and is rescaled by a measure-preserving interval map
  on every traversal, and
* finite non-contextual strategy tables, where a weighted ensemble of
  deterministic +/-1 assignments plays the role of a discrete
  hidden-variable distribution.

Outcomes are coded +1 = transmitted, -1 = reflected.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

TRANSMITTED = 1
REFLECTED = -1

# Largest float strictly below 1.0; used to keep rescaled coordinates
# inside [0, 1) when division rounds up.
_ONE_BELOW = math.nextafter(1.0, 0.0)


def normalize_angle(theta: float) -> float:
    """Reduce an angle to [0, pi).

    Linear polarization is direction-free, so every angle in this
    package is only meaningful modulo pi.
    """
    r = math.fmod(theta, math.pi)
    if r < 0.0:
        r += math.pi
    if r >= math.pi:
        r -= math.pi
    return r


@dataclass(frozen=True)
class AnalyzerSetting:
    """A polarizer / PBS orientation, normalized to [0, pi)."""

    angle: float
    label: str = ""

    def __post_init__(self):
        object.__setattr__(self, "angle", normalize_angle(float(self.angle)))

    @classmethod
    def from_degrees(cls, degrees: float, label: str = "") -> "AnalyzerSetting":
        return cls(math.radians(degrees), label)


@dataclass(frozen=True)
class PhotonHiddenState:
    """The hidden variable: coordinate u in [0, 1) plus current polarization."""

    u: float
    theta_pol: float

    def __post_init__(self):
        if not (0.0 <= self.u < 1.0):
            raise ValueError(f"hidden coordinate u={self.u!r} outside [0, 1)")
        object.__setattr__(self, "theta_pol", normalize_angle(float(self.theta_pol)))


def malus_transmission(theta_pol: float, theta_an: float) -> float:
    """cos^2 of the analyzer/polarization angle difference.

    Values below 1e-32 are snapped to exactly 0 so that a crossed
    analyzer (angle difference pi/2 up to float representation) forces
    the reflected branch for every hidden coordinate, including u = 0.
    """
    p = math.cos(theta_an - theta_pol) ** 2
    return 0.0 if p < 1e-32 else p


def _rescale(u: float, p: float, outcome: int) -> float:
    """Measure-preserving branch map: u/p on transmit, (u-p)/(1-p) on reflect.

    Total for every (u, p, outcome) so that counterfactual continuations
    are defined even on the branch the dynamics does not realize; the
    zero-denominator cases only ever occur on unrealized branches.
    """
    if outcome == TRANSMITTED:
        v = u / p if p > 0.0 else 0.0
    else:
        v = (u - p) / (1.0 - p) if p < 1.0 else 0.0
    # division can round exactly to 1.0 when u sits just below the threshold
    if 0.0 <= v < 1.0:
        return v
    if v == 1.0:
        return _ONE_BELOW
    return v


def pbs_traverse(
    state: PhotonHiddenState, setting: AnalyzerSetting
) -> tuple[int, PhotonHiddenState]:
    """Send the photon through one PBS; return (outcome, new hidden state).

    The branch is fixed by the hidden coordinate: transmitted iff
    u < cos^2(setting - polarization). The polarization collapses to the
    analyzer axis (transmitted) or its perpendicular (reflected), and u
    is rescaled uniformly within the branch interval.
    """
    p = malus_transmission(state.theta_pol, setting.angle)
    if state.u < p:
        new_u = _rescale(state.u, p, TRANSMITTED)
        return TRANSMITTED, PhotonHiddenState(new_u, setting.angle)
    new_u = _rescale(state.u, p, REFLECTED)
    return REFLECTED, PhotonHiddenState(new_u, setting.angle + math.pi / 2.0)


def sequential_outcomes(
    theta0: float, u: float, first: AnalyzerSetting, second: AnalyzerSetting
) -> tuple[int, int]:
    """Outcomes (alpha, beta) of two PBS traversals in the given order."""
    state = PhotonHiddenState(u, theta0)
    alpha, state = pbs_traverse(state, first)
    beta, _ = pbs_traverse(state, second)
    return alpha, beta


def response_A(thetaA: AnalyzerSetting, lam: tuple[float, float]) -> int:
    """First-station response; depends only on the first setting and lambda."""
    theta0, u = lam
    state = PhotonHiddenState(u, theta0)
    alpha, _ = pbs_traverse(state, thetaA)
    return alpha


def response_B_contextual(
    thetaB: AnalyzerSetting, thetaA: AnalyzerSetting, lam: tuple[float, float]
) -> int:
    """Second-station response; legitimately depends on the first setting too."""
    theta0, u = lam
    _, beta = sequential_outcomes(theta0, u, thetaA, thetaB)
    return beta


def conditional_prob_P1(
    alpha: int, lam: tuple[float, float], thetaA: AnalyzerSetting
) -> int:
    """Deterministic first-stage conditional probability: 0 or 1 only."""
    return 1 if response_A(thetaA, lam) == alpha else 0


def conditional_prob_P2(
    beta: int,
    alpha: int,
    lam: tuple[float, float],
    thetaB: AnalyzerSetting,
    thetaA: AnalyzerSetting,
) -> int:
    """Deterministic second-stage conditional probability: 0 or 1 only.

    Defined for both values of ``alpha``: the unrealized branch is
    continued counterfactually with the same collapse and rescale rule.
    That branch is always multiplied by a vanishing first-stage factor,
    so the choice never affects an expectation value.
    """
    theta0, u = lam
    p1 = malus_transmission(theta0, thetaA.angle)
    if alpha == TRANSMITTED:
        theta1 = thetaA.angle
    else:
        theta1 = thetaA.angle + math.pi / 2.0
    u1 = _rescale(u, p1, alpha)
    p2 = malus_transmission(theta1, thetaB.angle)
    predicted = TRANSMITTED if u1 < p2 else REFLECTED
    return 1 if predicted == beta else 0


class StrategyTableError(ValueError):
    """Raised for malformed or mis-indexed strategy tables."""


@dataclass(frozen=True)
class StrategyTable:
    """Finite non-contextual deterministic model.

    ``a_assignments[k][i]`` is the +/-1 outcome component k assigns to the
    i-th first-station setting; ``b_assignments[k][j]`` likewise for the
    second station. By construction neither side ever sees the other
    side's setting index.
    """

    weights: tuple[float, ...]
    a_assignments: tuple[tuple[int, ...], ...]
    b_assignments: tuple[tuple[int, ...], ...]

    def __post_init__(self):
        weights = tuple(float(w) for w in self.weights)
        object.__setattr__(self, "weights", weights)
        object.__setattr__(
            self, "a_assignments", tuple(tuple(row) for row in self.a_assignments)
        )
        object.__setattr__(
            self, "b_assignments", tuple(tuple(row) for row in self.b_assignments)
        )
        n = len(weights)
        if n == 0:
            raise StrategyTableError("strategy table needs at least one component")
        if len(self.a_assignments) != n or len(self.b_assignments) != n:
            raise StrategyTableError("assignment rows must match the number of weights")
        if any(w < 0.0 for w in weights):
            raise StrategyTableError("weights must be non-negative")
        if abs(sum(weights) - 1.0) > 1e-12:
            raise StrategyTableError(f"weights sum to {sum(weights)!r}, expected 1")
        for rows in (self.a_assignments, self.b_assignments):
            for row in rows:
                if any(v not in (1, -1) for v in row):
                    raise StrategyTableError("assignments must be exactly +1 or -1")

    @property
    def n_components(self) -> int:
        return len(self.weights)

    @property
    def n_a_settings(self) -> int:
        return len(self.a_assignments[0])

    @property
    def n_b_settings(self) -> int:
        return len(self.b_assignments[0])

    @classmethod
    def deterministic(cls, a_values, b_values) -> "StrategyTable":
        """Single-component table: one deterministic assignment with weight 1."""
        return cls((1.0,), (tuple(a_values),), (tuple(b_values),))


def strategy_response(table: StrategyTable, side: str, setting_index: int, k: int) -> int:
    """Look up the stored +/-1 assignment for one side, setting and component."""
    if side not in ("A", "B"):
        raise StrategyTableError(f"side must be 'A' or 'B', got {side!r}")
    if not 0 <= k < table.n_components:
        raise StrategyTableError(
            f"component index {k} out of range for {table.n_components} components"
        )
    rows = table.a_assignments if side == "A" else table.b_assignments
    row = rows[k]
    if not 0 <= setting_index < len(row):
        raise StrategyTableError(
            f"setting index {setting_index} out of range for side {side} "
            f"with {len(row)} settings"
        )
    return row[setting_index]


def random_strategy_table(rng, n_a: int = 2, n_b: int = 2, max_components: int = 64) -> StrategyTable:
    """Draw a random convex mixture of deterministic strategies."""
    n = int(rng.integers(1, max_components + 1))
    raw = rng.random(n) + 1e-9
    weights = tuple(raw / raw.sum())
    a_rows = tuple(
        tuple(int(v) for v in rng.choice((1, -1), size=n_a)) for _ in range(n)
    )
    b_rows = tuple(
        tuple(int(v) for v in rng.choice((1, -1), size=n_b)) for _ in range(n)
    )
    return StrategyTable(weights, a_rows, b_rows)
