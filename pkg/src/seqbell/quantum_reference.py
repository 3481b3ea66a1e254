"""Quantum-mechanical oracle for the sequential two-analyzer experiment.

Every valid hidden-variable model of the sequential single-photon setup
must reproduce these probabilities, so this module is the acceptance
oracle for the pilot-wave dynamics in :mod:`seqbell.hv_models`.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

from .hv_models import REFLECTED, TRANSMITTED, normalize_angle


def malus_probability(theta_pol: float, theta_an: float) -> float:
    """Transmission probability cos^2(theta_an - theta_pol).

    Uses the same crossed-analyzer zero-snapping rule as the pilot-wave
    dynamics so the two routes stay comparable at full precision.
    """
    p = math.cos(theta_an - theta_pol) ** 2
    return 0.0 if p < 1e-32 else p


def collapse(theta_an: float, outcome: int) -> float:
    """Polarization after a projective PBS measurement.

    The analyzer axis on transmission, its perpendicular on reflection,
    reduced mod pi. Must match the pilot-wave collapse convention.
    """
    if outcome == TRANSMITTED:
        return normalize_angle(theta_an)
    if outcome == REFLECTED:
        return normalize_angle(theta_an + math.pi / 2.0)
    raise ValueError(f"outcome must be +1 or -1, got {outcome!r}")


@dataclass(frozen=True)
class JointDistribution:
    """The four joint probabilities p(alpha, beta), alpha/beta in {+1, -1}."""

    pp: float
    pm: float
    mp: float
    mm: float

    def __post_init__(self):
        entries = (self.pp, self.pm, self.mp, self.mm)
        if any(not (0.0 <= x <= 1.0) for x in entries):
            raise ValueError(f"probabilities outside [0, 1]: {entries!r}")
        total = sum(entries)
        if abs(total - 1.0) > 1e-12:
            raise ValueError(f"probabilities sum to {total!r}, expected 1")

    def prob(self, alpha: int, beta: int) -> float:
        key = (alpha, beta)
        table = {
            (1, 1): self.pp,
            (1, -1): self.pm,
            (-1, 1): self.mp,
            (-1, -1): self.mm,
        }
        if key not in table:
            raise ValueError(f"outcomes must be +/-1, got {key!r}")
        return table[key]

    def correlation(self) -> float:
        """Sum of alpha*beta weighted by the joint probabilities."""
        return self.pp - self.pm - self.mp + self.mm


def sequential_joint(theta0: float, thetaA: float, thetaB: float) -> JointDistribution:
    """Joint outcome distribution of two analyzers applied in order.

    The first stage follows the Malus law against the initial
    polarization; the second stage follows it against the collapsed
    polarization of the first.
    """
    p1 = malus_probability(theta0, thetaA)
    p2_t = malus_probability(collapse(thetaA, TRANSMITTED), thetaB)
    p2_r = malus_probability(collapse(thetaA, REFLECTED), thetaB)
    return JointDistribution(
        pp=p1 * p2_t,
        pm=p1 * (1.0 - p2_t),
        mp=(1.0 - p1) * p2_r,
        mm=(1.0 - p1) * (1.0 - p2_r),
    )


def sequential_correlation_qm(thetaA: float, thetaB: float) -> float:
    """Correlation of the two sequential outcomes; equals cos(2(thetaB - thetaA)).

    Computed by summing alpha*beta over the joint distribution. The value
    does not depend on the initial polarization, which the test suite
    checks numerically.
    """
    return sequential_joint(0.0, thetaA, thetaB).correlation()


def epr_pair_correlation(thetaA: float, thetaB: float) -> float:
    """Correlation of the symmetric maximally polarization-entangled pair.

    Display reference only; no two-photon hidden-variable dynamics is
    modeled here.
    """
    return math.cos(2.0 * (thetaA - thetaB))
