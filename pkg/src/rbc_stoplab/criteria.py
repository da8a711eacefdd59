"""Stopping rules for recursive Bayesian classification.

Seven rule families share a single confidence anchor ``tau``: the plain
confidence threshold (M1), three entropy thresholds (M2, M3, M4) whose
cutoffs are chosen so their boundaries pass through the same anchor point
as M1, the consecutive-KL rule (M5), the top-two-gap rule (MP), and the
matched lower confidence bound (M1bar).  Calibrating every family from
one ``tau`` makes cross-family comparisons meaningful.

All threshold comparisons are strict; with continuous evidence the
boundary has probability zero, so strictness never changes Monte-Carlo
results but it keeps edge cases deterministic.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .simplex import (
    SimplexPoint,
    kl_divergence,
    renyi_entropy,
    shannon_entropy,
    special_point,
    top_two,
)

__all__ = [
    "FAMILIES",
    "StoppingRule",
    "CriterionState",
    "calibrate",
    "should_stop",
    "min_confidence_on_entropy_contour",
    "delta2_divergence",
    "boundary_sample",
    "matched_lower_confidence",
]

FAMILIES = ("M1", "M2", "M3", "M4", "M5", "MP", "M1bar")

_DEFAULT_ALPHA = {"M2": 2.0, "M4": 0.2}
_DEFAULT_KL_THRESHOLD = 1e-2


def matched_lower_confidence(tau: float, n: int) -> float:
    """Confidence level whose plain threshold matches the gap rule's weakest point."""
    return ((2.0 * tau - 1.0) * (n - 1) + 1.0) / n


@dataclass(frozen=True)
class StoppingRule:
    """A calibrated stopping criterion.

    ``threshold`` carries the family-specific cutoff: the confidence level
    for M1/M1bar, the entropy bound in bits for M2-M4, the KL bound in
    bits for M5, and the ball radius ``tau_bar`` for MP (whose gap cutoff
    is ``1 - tau_bar``).
    """

    family: str
    n: int
    source_tau: float
    threshold: float
    alpha: float | None = None

    def __post_init__(self) -> None:
        if self.family not in FAMILIES:
            raise ValueError(f"unknown family {self.family!r}")
        if self.n < 2:
            raise ValueError("n must be at least 2")


@dataclass(frozen=True)
class CriterionState:
    """Evaluation state threaded through repeated rule checks.

    Only the consecutive-KL family uses it: ``previous`` holds the
    distribution seen at the preceding evaluation, absent before the
    first one.
    """

    previous: SimplexPoint | None = None


def calibrate(family: str, tau: float, n: int, *, alpha: float | None = None,
              kl_threshold: float = _DEFAULT_KL_THRESHOLD) -> StoppingRule:
    """Build a rule of the given family anchored at confidence ``tau``.

    M1 thresholds ``tau`` directly.  M2/M3/M4 take the entropy of the
    one-heavy reference point at ``tau`` so that their boundaries meet
    M1's there.  MP uses ball radius ``2 - 2 tau``, which makes its
    boundary meet M1's on the simplex edge.  M1bar lowers the confidence
    to the gap rule's weakest point.  M5 is the consecutive-KL rule with
    a fixed small cutoff (default 1e-2 bits), independent of ``tau``.

    ``alpha`` overrides the Renyi order for M2 (default 2) and M4
    (default 0.2).
    """
    if family not in FAMILIES:
        raise ValueError(f"unknown family {family!r}")
    if n < 2:
        raise ValueError("n must be at least 2")
    tau = float(tau)
    if not (1.0 / n < tau <= 1.0):
        raise ValueError(f"tau must lie in (1/{n}, 1], got {tau}")

    if family == "M1":
        return StoppingRule("M1", n, tau, tau)
    if family == "M1bar":
        return StoppingRule("M1bar", n, tau, matched_lower_confidence(tau, n))
    if family == "MP":
        return StoppingRule("MP", n, tau, 2.0 - 2.0 * tau)
    if family == "M5":
        return StoppingRule("M5", n, tau, float(kl_threshold))

    anchor = special_point("v", n, tau)
    if family == "M3":
        if alpha is not None:
            raise ValueError("M3 is the Shannon rule; alpha is fixed")
        return StoppingRule("M3", n, tau, shannon_entropy(anchor))
    a = float(alpha) if alpha is not None else _DEFAULT_ALPHA[family]
    return StoppingRule(family, n, tau, renyi_entropy(anchor, a), alpha=a)


def rule_statistic(rule: StoppingRule, p: SimplexPoint) -> float:
    """The scalar each rule compares against its threshold (M5 excluded)."""
    if rule.family in ("M1", "M1bar"):
        return p.max_prob
    if rule.family == "MP":
        return top_two(p).gap
    if rule.family == "M3":
        return shannon_entropy(p)
    if rule.family in ("M2", "M4"):
        return renyi_entropy(p, rule.alpha)
    raise ValueError(f"{rule.family} has no pointwise statistic")


def _stops_at(rule: StoppingRule, p: SimplexPoint) -> bool:
    if rule.family in ("M1", "M1bar"):
        return p.max_prob > rule.threshold
    if rule.family == "MP":
        return top_two(p).gap > 1.0 - rule.threshold
    return rule_statistic(rule, p) < rule.threshold


def should_stop(rule: StoppingRule, state: CriterionState,
                p: SimplexPoint) -> tuple[bool, CriterionState]:
    """Evaluate the rule on the latest distribution.

    Returns the stop decision and the state to carry into the next
    evaluation.  The consecutive-KL rule never stops on its first
    evaluation (there is nothing to compare against yet).
    """
    if p.n != rule.n:
        raise ValueError(f"dimension mismatch: rule has n={rule.n}, point has n={p.n}")
    if rule.family != "M5":
        return _stops_at(rule, p), state
    if state.previous is None:
        return False, CriterionState(previous=p)
    stop = kl_divergence(p, state.previous) < rule.threshold
    return stop, CriterionState(previous=p)


def _binary_entropy_bits(t: float) -> float:
    if t <= 0.0 or t >= 1.0:
        return 0.0
    return float(-(t * np.log2(t) + (1.0 - t) * np.log2(1.0 - t)))


def min_confidence_on_entropy_contour(tau: float, n: int) -> float | None:
    """Smallest max-probability on the Shannon contour anchored at ``tau``.

    The contour through the one-heavy reference point reaches the simplex
    edge only when its entropy is below one bit; there, the weakest point
    is a two-class mixture whose heavy mass solves the binary-entropy
    equation.  Returns ``None`` when the contour does not reach the edge.
    Solved by bisection (binary entropy is strictly decreasing on
    [1/2, 1]) to an argument tolerance of 1e-10.
    """
    if n < 2:
        raise ValueError("n must be at least 2")
    if not (1.0 / n < tau <= 1.0):
        raise ValueError(f"tau must lie in (1/{n}, 1], got {tau}")
    target = shannon_entropy(special_point("v", n, tau))
    if target >= 1.0:
        return None
    lo, hi = 0.5, 1.0 - 1e-15
    while hi - lo > 1e-10:
        mid = 0.5 * (lo + hi)
        if _binary_entropy_bits(mid) > target:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def delta2_divergence(p: SimplexPoint, q: SimplexPoint) -> float:
    """Two-element interest-set divergence with the remainder-mass term.

    Half the sum of top-two coordinate differences plus the difference of
    the leftover masses.  Against a one-hot distribution this equals one
    minus the largest coordinate, i.e. it reduces to plain confidence
    thresholding.
    """
    if p.n != q.n:
        raise ValueError(f"dimension mismatch: {p.n} vs {q.n}")
    tp, tq = top_two(p), top_two(q)
    idx = sorted({tp.j1, tp.j2, tq.j1, tq.j2})
    pp, qq = p.probs, q.probs
    total = sum(abs(pp[k] - qq[k]) for k in idx)
    p_rest = 1.0 - sum(pp[k] for k in idx)
    q_rest = 1.0 - sum(qq[k] for k in idx)
    return float(0.5 * (total + abs(p_rest - q_rest)))


# Orthonormal basis of the plane {x : sum(x) = 0} in R^3, used to cast
# rays from the simplex center for boundary tracing.
_PLANE_BASIS = np.array([
    [1.0, -1.0, 0.0],
    [1.0, 1.0, -2.0],
])
_PLANE_BASIS = _PLANE_BASIS / np.linalg.norm(_PLANE_BASIS, axis=1, keepdims=True)


def boundary_sample(rule: StoppingRule, resolution: int) -> list[SimplexPoint]:
    """Trace the rule's decision boundary on the three-class simplex.

    Casts ``resolution`` rays from the simplex center, keeps those along
    which the rule's stop indicator flips, and bisects each to the point
    where the defining statistic meets its threshold (within 1e-9).
    Points come back ordered by ray angle, ready for polyline plotting;
    rays that never cross (the region does not extend in that direction)
    are skipped, so the count can be slightly below ``resolution``.
    """
    if rule.n != 3:
        raise ValueError("boundary tracing is a three-class helper")
    if rule.family == "M5":
        raise ValueError("the consecutive-KL rule has no pointwise boundary")
    if resolution < 3:
        raise ValueError("resolution must be at least 3")

    if rule.family in ("M1", "M1bar"):
        target = rule.threshold
        stat = lambda pt: pt.max_prob
    elif rule.family == "MP":
        target = 1.0 - rule.threshold
        stat = lambda pt: top_two(pt).gap
    elif rule.family == "M3":
        target = rule.threshold
        stat = shannon_entropy
    else:
        target = rule.threshold
        alpha = rule.alpha
        stat = lambda pt: renyi_entropy(pt, alpha)

    center = np.full(3, 1.0 / 3.0)

    def trace(n_rays: int) -> list[SimplexPoint]:
        found: list[SimplexPoint] = []
        for k in range(n_rays):
            theta = 2.0 * np.pi * k / n_rays
            d = np.cos(theta) * _PLANE_BASIS[0] + np.sin(theta) * _PLANE_BASIS[1]
            neg = d < 0
            t_max = float(np.min(center[neg] / -d[neg]))

            def point_at(t: float) -> SimplexPoint:
                return SimplexPoint.from_probs(np.maximum(center + t * d, 0.0))

            g0 = stat(point_at(0.0)) - target
            g1 = stat(point_at(t_max)) - target
            if g0 == 0.0:
                found.append(point_at(0.0))
                continue
            if np.sign(g0) == np.sign(g1) and g1 != 0.0:
                continue
            lo, hi = 0.0, t_max
            for _ in range(200):
                mid = 0.5 * (lo + hi)
                gm = stat(point_at(mid)) - target
                if abs(gm) <= 1e-12:
                    lo = hi = mid
                    break
                if np.sign(gm) == np.sign(g0):
                    lo = mid
                else:
                    hi = mid
            found.append(point_at(0.5 * (lo + hi)))
        return found

    # regions that hug the corners cross only a fraction of the rays, so
    # re-trace with a denser fan until roughly `resolution` points land
    out = trace(resolution)
    if len(out) < 0.9 * resolution and out:
        out = trace(int(np.ceil(resolution * resolution / len(out))))
    return out
