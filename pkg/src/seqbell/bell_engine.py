"""Correlations, CHSH numbers and contextuality probes.

Monte Carlo estimates use numpy with deterministic partitioned seeding:
partition ``i`` of a run with seed ``s`` draws from
``default_rng([s, i])``, and partial sums are merged in partition order,
so the result is identical for any worker count at a fixed partition
count.
"""
from __future__ import annotations

import itertools
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .hv_models import (
    AnalyzerSetting,
    StrategyTable,
    malus_transmission,
    normalize_angle,
    response_A,
    response_B_contextual,
    sequential_outcomes,
    strategy_response,
)
from .quantum_reference import sequential_correlation_qm

SATISFIES = "satisfies_bound"
VIOLATES = "violates_bound"
INCONCLUSIVE = "inconclusive"

CONTEXTUAL = "contextual"
NON_CONTEXTUAL = "non_contextual_on_sample"

EXACT_TOL = 1e-9

CorrelationSource = Callable[[float, float], "CorrelationEstimate"]


@dataclass(frozen=True)
class CorrelationEstimate:
    """A correlation value with its statistical pedigree."""

    value: float
    std_error: float
    n_samples: int
    method: str  # "monte_carlo" or "exact"

    def __post_init__(self):
        if self.method not in ("monte_carlo", "exact"):
            raise ValueError(f"unknown method {self.method!r}")
        if self.method == "exact" and self.std_error != 0.0:
            raise ValueError("exact estimates carry zero standard error")
        if abs(self.value) > 1.0 + 3.0 * self.std_error + EXACT_TOL:
            raise ValueError(f"correlation {self.value!r} outside [-1, 1]")


@dataclass(frozen=True)
class ChshSettings:
    """The four analyzer orientations entering the CHSH combination."""

    thetaA: AnalyzerSetting
    thetaA_prime: AnalyzerSetting
    thetaB: AnalyzerSetting
    thetaB_prime: AnalyzerSetting

    @classmethod
    def from_radians(cls, a: float, a_prime: float, b: float, b_prime: float) -> "ChshSettings":
        return cls(
            AnalyzerSetting(a, "a"),
            AnalyzerSetting(a_prime, "a'"),
            AnalyzerSetting(b, "b"),
            AnalyzerSetting(b_prime, "b'"),
        )

    @classmethod
    def from_degrees(cls, a: float, a_prime: float, b: float, b_prime: float) -> "ChshSettings":
        return cls.from_radians(*(math.radians(x) for x in (a, a_prime, b, b_prime)))


@dataclass(frozen=True)
class ChshResult:
    """Four correlation terms, their signed sum S, and the bound verdict.

    Term order is locked to E(a,b) + E(a',b') + E(a',b) - E(a,b'); other
    CHSH conventions permute the minus sign.
    """

    terms: tuple[CorrelationEstimate, CorrelationEstimate, CorrelationEstimate, CorrelationEstimate]
    s_value: float
    verdict: str

    def __post_init__(self):
        t = self.terms
        recombined = t[0].value + t[1].value + t[2].value - t[3].value
        if abs(recombined - self.s_value) > 1e-12:
            raise ValueError("s_value does not recombine from its terms")

    @property
    def std_error(self) -> float:
        return math.sqrt(sum(t.std_error**2 for t in self.terms))


@dataclass(frozen=True)
class ContextualityReport:
    """Result of probing whether the second response depends on the first setting."""

    sampled_lambdas: int
    differing_fraction: float
    verdict: str

    def __post_init__(self):
        expected = CONTEXTUAL if self.differing_fraction > 0.0 else NON_CONTEXTUAL
        if self.verdict != expected:
            raise ValueError("verdict inconsistent with differing_fraction")


# ---------------------------------------------------------------------------
# hidden-coordinate sampling

def sample_hidden_coordinates(n: int, seed: int, n_partitions: int = 1) -> list[np.ndarray]:
    """Per-partition uniform [0, 1) samples, independent of any analyzer setting."""
    if n < 1:
        raise ValueError("need at least one sample")
    if n_partitions < 1:
        raise ValueError("need at least one partition")
    base = n // n_partitions
    sizes = [base + (1 if i < n % n_partitions else 0) for i in range(n_partitions)]
    return [np.random.default_rng([seed, i]).random(size) for i, size in enumerate(sizes)]


def _second_stage_outcomes(
    u: np.ndarray, theta0: float, thetaA: float, thetaB: float
) -> tuple[np.ndarray, np.ndarray]:
    """Vectorized two-stage traversal; returns (alpha, beta) arrays of +/-1."""
    p1 = malus_transmission(theta0, thetaA)
    transmitted = u < p1
    alpha = np.where(transmitted, 1, -1)
    # branch rescale; denominators guarded for the degenerate settings
    denom_t = p1 if p1 > 0.0 else 1.0
    denom_r = (1.0 - p1) if p1 < 1.0 else 1.0
    u1 = np.where(transmitted, u / denom_t, (u - p1) / denom_r)
    p2_t = malus_transmission(thetaA, thetaB)
    p2_r = malus_transmission(thetaA + math.pi / 2.0, thetaB)
    p2 = np.where(transmitted, p2_t, p2_r)
    beta = np.where(u1 < p2, 1, -1)
    return alpha, beta


# ---------------------------------------------------------------------------
# correlations

def noncontextual_expectation(
    table: StrategyTable, a_index: int, b_index: int
) -> CorrelationEstimate:
    """Exact ensemble average of A_k(a) * B_k(b) over the table weights."""
    total = 0.0
    for k, w in enumerate(table.weights):
        total += w * strategy_response(table, "A", a_index, k) * strategy_response(
            table, "B", b_index, k
        )
    return CorrelationEstimate(total, 0.0, 0, "exact")


def estimate_sequential_correlation(
    theta0: float,
    thetaA: float,
    thetaB: float,
    n: int,
    seed: int,
    n_partitions: int = 1,
    max_workers: int | None = None,
) -> CorrelationEstimate:
    """Monte Carlo mean of alpha*beta over n hidden-coordinate samples."""
    if n < 1:
        raise ValueError("need at least one sample")
    partitions = sample_hidden_coordinates(n, seed, n_partitions)

    def partial_sum(u: np.ndarray) -> float:
        alpha, beta = _second_stage_outcomes(u, theta0, thetaA, thetaB)
        return float(np.sum(alpha * beta))

    if max_workers is not None and n_partitions > 1:
        with ThreadPoolExecutor(max_workers=max_workers) as pool:
            partials = list(pool.map(partial_sum, partitions))
    else:
        partials = [partial_sum(u) for u in partitions]
    # merge in partition order: deterministic for any worker count
    total = 0.0
    for s in partials:
        total += s
    mean = total / n
    if n > 1:
        # products are +/-1, so the sample variance follows from the mean
        var = (n - total * mean) / (n - 1)
        se = math.sqrt(max(var, 0.0) / n)
    else:
        se = 0.0
    return CorrelationEstimate(mean, se, n, "monte_carlo")


def exact_sequential_joint(
    theta0: float, thetaA: float, thetaB: float
) -> dict[tuple[int, int], float]:
    """Exact pilot-wave outcome measures via the [0, 1) interval partition.

    The two threshold/rescale steps cut the hidden-coordinate interval
    into four consecutive pieces; each measure is a difference of
    breakpoints.
    """
    p1 = malus_transmission(theta0, thetaA)
    q_t = malus_transmission(thetaA, thetaB)
    q_r = malus_transmission(thetaA + math.pi / 2.0, thetaB)
    b1 = p1 * q_t
    b2 = p1
    b3 = p1 + (1.0 - p1) * q_r
    return {
        (1, 1): b1,
        (1, -1): b2 - b1,
        (-1, 1): b3 - b2,
        (-1, -1): 1.0 - b3,
    }


def exact_sequential_correlation(
    theta0: float, thetaA: float, thetaB: float
) -> CorrelationEstimate:
    """Closed-form lambda average of alpha*beta for the pilot-wave model."""
    measures = exact_sequential_joint(theta0, thetaA, thetaB)
    value = sum(a * b * m for (a, b), m in measures.items())
    return CorrelationEstimate(value, 0.0, 0, "exact")


# ---------------------------------------------------------------------------
# correlation sources for the CHSH combination

def quantum_oracle_source() -> CorrelationSource:
    def source(thetaA: float, thetaB: float) -> CorrelationEstimate:
        return CorrelationEstimate(sequential_correlation_qm(thetaA, thetaB), 0.0, 0, "exact")

    return source


def pilot_wave_exact_source(theta0: float) -> CorrelationSource:
    def source(thetaA: float, thetaB: float) -> CorrelationEstimate:
        return exact_sequential_correlation(theta0, thetaA, thetaB)

    return source


def pilot_wave_mc_source(
    theta0: float, n: int, seed: int, n_partitions: int = 1
) -> CorrelationSource:
    """Monte Carlo source re-using one hidden-coordinate stream for every term.

    The stream depends on the seed only, never on the settings, so the
    sampled ensemble is the same whichever analyzer pair is evaluated.
    """

    def source(thetaA: float, thetaB: float) -> CorrelationEstimate:
        return estimate_sequential_correlation(
            theta0, thetaA, thetaB, n, seed, n_partitions
        )

    return source


def strategy_table_source(
    table: StrategyTable, a_index_of: dict[float, int], b_index_of: dict[float, int]
) -> CorrelationSource:
    """Adapter mapping analyzer angles onto table setting indices."""

    def source(thetaA: float, thetaB: float) -> CorrelationEstimate:
        return noncontextual_expectation(
            table, a_index_of[normalize_angle(thetaA)], b_index_of[normalize_angle(thetaB)]
        )

    return source


# ---------------------------------------------------------------------------
# CHSH

def check_bell_inequality(s_value: float, std_error: float) -> str:
    """Bound verdict for |S| against 2.

    Exact sources are judged at a 1e-9 tolerance. Statistical sources
    satisfy the bound when the point estimate obeys it, violate it when
    it exceeds 2 by more than five standard errors, and are otherwise
    inconclusive.
    """
    s = abs(s_value)
    if std_error == 0.0:
        return SATISFIES if s <= 2.0 + EXACT_TOL else VIOLATES
    if s > 2.0 + 5.0 * std_error:
        return VIOLATES
    if s <= 2.0:
        return SATISFIES
    return INCONCLUSIVE


def chsh_number(settings: ChshSettings, correlation_source: CorrelationSource) -> ChshResult:
    """Evaluate S = E(a,b) + E(a',b') + E(a',b) - E(a,b')."""
    a = settings.thetaA.angle
    ap = settings.thetaA_prime.angle
    b = settings.thetaB.angle
    bp = settings.thetaB_prime.angle
    terms = (
        correlation_source(a, b),
        correlation_source(ap, bp),
        correlation_source(ap, b),
        correlation_source(a, bp),
    )
    s = terms[0].value + terms[1].value + terms[2].value - terms[3].value
    se = math.sqrt(sum(t.std_error**2 for t in terms))
    return ChshResult(terms, s, check_bell_inequality(s, se))


def chsh_from_table(table: StrategyTable) -> ChshResult:
    """CHSH value of a two-setting-per-side strategy table."""
    terms = (
        noncontextual_expectation(table, 0, 0),
        noncontextual_expectation(table, 1, 1),
        noncontextual_expectation(table, 1, 0),
        noncontextual_expectation(table, 0, 1),
    )
    s = terms[0].value + terms[1].value + terms[2].value - terms[3].value
    return ChshResult(terms, s, check_bell_inequality(s, 0.0))


def enumerate_deterministic_bound() -> tuple[float, list[tuple[int, int, int, int]]]:
    """Brute-force the CHSH bound over all 16 deterministic assignments.

    Returns the maximal |S| (= 2) and the list of assignments
    (A(a), A(a'), B(b), B(b')) attaining it.
    """
    best = 0.0
    attaining: list[tuple[int, int, int, int]] = []
    for aa, aap, bb, bbp in itertools.product((1, -1), repeat=4):
        s = aa * bb + aap * bbp + aap * bb - aa * bbp
        if abs(s) > best:
            best = abs(s)
            attaining = []
        if abs(s) == best:
            attaining.append((aa, aap, bb, bbp))
    return float(best), attaining


# ---------------------------------------------------------------------------
# contextuality probe

def _settings_coincide(thetaA: float, thetaA_prime: float) -> bool:
    """True when the two orientations agree mod pi up to float noise."""
    d = abs(normalize_angle(thetaA) - normalize_angle(thetaA_prime))
    return min(d, math.pi - d) < 1e-12


def factorization_probe(
    thetaA: float,
    thetaA_prime: float,
    thetaB: float,
    theta0: float,
    n_lambdas: int,
    seed: int,
) -> ContextualityReport:
    """Does the second response change when only the first setting changes?

    Samples hidden coordinates and compares the second-station outcome
    for first settings thetaA vs thetaA_prime at the same thetaB.
    """
    if _settings_coincide(thetaA, thetaA_prime):
        raise ValueError("probe is vacuous: the two first settings coincide mod pi")
    if n_lambdas < 1:
        raise ValueError("need at least one sampled lambda")
    u = np.random.default_rng([seed, 0]).random(n_lambdas)
    _, beta1 = _second_stage_outcomes(u, theta0, thetaA, thetaB)
    _, beta2 = _second_stage_outcomes(u, theta0, thetaA_prime, thetaB)
    differing = float(np.mean(beta1 != beta2))
    verdict = CONTEXTUAL if differing > 0.0 else NON_CONTEXTUAL
    return ContextualityReport(n_lambdas, differing, verdict)


def exact_differing_measure(
    thetaA: float, thetaA_prime: float, thetaB: float, theta0: float
) -> float:
    """Exact measure of hidden coordinates whose second outcome is context-dependent.

    The second-station outcome is piecewise constant in u with at most
    three interior breakpoints per first setting; evaluating both
    branches on the merged partition gives the differing measure
    exactly.
    """
    if _settings_coincide(thetaA, thetaA_prime):
        raise ValueError("probe is vacuous: the two first settings coincide mod pi")

    def breakpoints(thA: float) -> list[float]:
        p1 = malus_transmission(theta0, thA)
        q_t = malus_transmission(thA, thetaB)
        q_r = malus_transmission(thA + math.pi / 2.0, thetaB)
        return [p1 * q_t, p1, p1 + (1.0 - p1) * q_r]

    points = sorted(set([0.0, 1.0] + breakpoints(thetaA) + breakpoints(thetaA_prime)))
    total = 0.0
    A = AnalyzerSetting(thetaA)
    Ap = AnalyzerSetting(thetaA_prime)
    B = AnalyzerSetting(thetaB)
    for lo, hi in zip(points[:-1], points[1:]):
        if hi <= lo:
            continue
        mid = 0.5 * (lo + hi)
        if not (0.0 <= mid < 1.0):
            continue
        lam = (theta0, mid)
        if response_B_contextual(B, A, lam) != response_B_contextual(B, Ap, lam):
            total += hi - lo
    return total


def strategy_factorization_probe(
    table: StrategyTable, b_index: int, a_index: int, a_prime_index: int
) -> ContextualityReport:
    """The same probe for a strategy table: always non-contextual by construction."""
    if a_index == a_prime_index:
        raise ValueError("probe is vacuous: the two first settings coincide")

    def b_response(j: int, unused_a_index: int, k: int) -> int:
        # the table's B lookup has no access to the A-side index
        return strategy_response(table, "B", j, k)

    differing = 0.0
    for k, w in enumerate(table.weights):
        if b_response(b_index, a_index, k) != b_response(b_index, a_prime_index, k):
            differing += w
    verdict = CONTEXTUAL if differing > 0.0 else NON_CONTEXTUAL
    return ContextualityReport(table.n_components, differing, verdict)


# ---------------------------------------------------------------------------
# decomposition and product identity

@dataclass(frozen=True)
class DecompositionRow:
    """One joint outcome's exact measure vs Monte Carlo frequency."""

    alpha: int
    beta: int
    exact: float
    mc_frequency: float
    deviation_sigma: float


def verify_decomposition(
    theta0: float, thetaA: float, thetaB: float, n: int, seed: int
) -> list[DecompositionRow]:
    """Check the conditional-probability decomposition of the joint law.

    Each of the four joint probabilities is computed both as an exact
    interval measure and as a Monte Carlo frequency; the deviation is
    reported in units of the binomial standard error.
    """
    if n < 1:
        raise ValueError("need at least one sample")
    measures = exact_sequential_joint(theta0, thetaA, thetaB)
    u = np.random.default_rng([seed, 0]).random(n)
    alpha, beta = _second_stage_outcomes(u, theta0, thetaA, thetaB)
    rows = []
    for (a, b), exact in measures.items():
        freq = float(np.mean((alpha == a) & (beta == b)))
        se = math.sqrt(exact * (1.0 - exact) / n)
        if se == 0.0:
            dev = 0.0 if freq == exact else math.inf
        else:
            dev = (freq - exact) / se
        rows.append(DecompositionRow(a, b, exact, freq, dev))
    return rows


def product_identity_check(theta0: float, n_u: int = 100, n_angles: int = 10) -> bool:
    """Pointwise identity alpha*beta == A(a, lambda) * B(b, a, lambda) on a grid."""
    u_grid = [(i + 0.5) / n_u for i in range(n_u)]
    angle_grid = [i * math.pi / n_angles for i in range(n_angles)]
    for thA in angle_grid:
        A = AnalyzerSetting(thA)
        for thB in angle_grid:
            B = AnalyzerSetting(thB)
            for u in u_grid:
                lam = (theta0, u)
                alpha, beta = sequential_outcomes(theta0, u, A, B)
                if alpha * beta != response_A(A, lam) * response_B_contextual(B, A, lam):
                    return False
    return True
