"""Closed-form stopping-time thresholds and stopping probabilities.

These cover the single-positive-channel evidence model: every update
multiplies the true class by a draw ``eps`` (constant, or lognormal with
log-mean ``mu`` and log-sd ``c``) while all other classes keep neutral
evidence.  Under that model the first-stop sequence for the confidence,
gap, and norm rules has a closed form, and the probability of sitting in
a stop region after ``s`` updates reduces to the error function.

Natural logarithms are used throughout this module (the lognormal algebra
lives in nats); entropies elsewhere in the package are in bits.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .criteria import matched_lower_confidence
from .simplex import SimplexPoint

__all__ = [
    "RULE_KINDS",
    "BoundQuery",
    "Prop5Report",
    "erf",
    "stop_ratio_constant",
    "min_sequences_constant_evidence",
    "stop_probability_lognormal",
    "false_stop_probability",
    "verify_prop5_ordering",
]

RULE_KINDS = ("M1", "MP", "M2norm", "M1bar")

# Five-term rational approximation with exponential tail; absolute error
# below 1.5e-7 everywhere, odd symmetry exact by construction.
_ERF_P = 0.3275911
_ERF_A1 = 0.254829592
_ERF_A2 = -0.284496736
_ERF_A3 = 1.421413741
_ERF_A4 = -1.453152027
_ERF_A5 = 1.061405429


def erf(x):
    """Error function, accurate to 1.5e-7 in absolute terms.

    Accepts a scalar or an ndarray; returns the matching type.
    """
    arr = np.asarray(x, dtype=float)
    sign = np.sign(arr)
    ax = np.abs(arr)
    t = 1.0 / (1.0 + _ERF_P * ax)
    poly = t * (_ERF_A1 + t * (_ERF_A2 + t * (_ERF_A3 + t * (_ERF_A4 + t * _ERF_A5))))
    res = sign * (1.0 - poly * np.exp(-ax * ax))
    if np.isscalar(x) or arr.ndim == 0:
        return float(res)
    return res


@dataclass(frozen=True)
class BoundQuery:
    """Inputs shared by the analytic stopping formulas.

    ``mu`` and ``c`` parameterize the log of the positive-channel draw;
    ``s`` is the number of evidence rounds; ``rule_kind`` picks which
    stop region the query concerns.
    """

    prior: SimplexPoint
    true_index: int
    competitor_index: int
    tau: float
    mu: float = 0.0
    c: float = 1.0
    s: int = 1
    rule_kind: str = "M1"

    def __post_init__(self) -> None:
        n = self.prior.n
        if not 0 <= self.true_index < n or not 0 <= self.competitor_index < n:
            raise ValueError("class indices out of range")
        if self.true_index == self.competitor_index:
            raise ValueError("true and competitor classes must differ")
        if not (1.0 / n < self.tau < 1.0):
            raise ValueError(f"tau must lie in (1/{n}, 1)")
        if self.c < 0:
            raise ValueError("c must be nonnegative")
        if self.s < 1:
            raise ValueError("s must be at least 1")
        if self.rule_kind not in RULE_KINDS:
            raise ValueError(f"unknown rule kind {self.rule_kind!r}")

    @property
    def p1(self) -> float:
        return float(self.prior.probs[self.true_index])

    @property
    def p2(self) -> float:
        return float(self.prior.probs[self.competitor_index])


def stop_ratio_constant(q: BoundQuery) -> float:
    """The evidence ratio ``k`` whose crossing triggers the stop.

    The true-class evidence product must exceed ``k`` for the posterior
    to sit in the queried stop region.
    """
    p1, p2, tau, n = q.p1, q.p2, q.tau, q.prior.n
    if not 0.0 < p1 < 1.0:
        raise ValueError("true-class prior mass must lie in (0, 1)")
    if q.rule_kind == "M1":
        return (1.0 - p1) * tau / ((1.0 - tau) * p1)
    if q.rule_kind == "M1bar":
        tt = matched_lower_confidence(tau, n)
        return (1.0 - p1) * tt / ((1.0 - tt) * p1)
    if q.rule_kind == "MP":
        t2 = 2.0 * tau - 1.0  # gap cutoff 1 - tau_bar
        return ((1.0 - p1) * t2 + p2) / ((1.0 - t2) * p1)
    # M2norm: the l2-norm form of the quadratic-entropy rule
    if tau <= 0.5:
        raise ValueError("the norm rule needs tau > 0.5 (discriminant realness)")
    return (1.0 - p1) * (tau + math.sqrt(2.0 * tau - 1.0)) / ((1.0 - tau) ** 2 * p1)


def min_sequences_constant_evidence(q: BoundQuery, eps: float) -> float:
    """Real-valued stop threshold under constant evidence ``eps > 1``.

    Stopping first occurs at the smallest integer sequence strictly above
    the returned value.
    """
    if eps <= 1.0:
        raise ValueError("eps must exceed 1")
    k = stop_ratio_constant(q)
    if k <= 0.0:
        return -math.inf  # region already contains the prior direction
    return math.log(k) / math.log(eps)


def stop_probability_lognormal(q: BoundQuery) -> float:
    """Probability that ``s`` lognormal rounds land in the stop region.

    The product of ``s`` draws is lognormal with log-mean ``s mu`` and
    log-variance ``s c^2``, so the region membership probability is a
    single error-function evaluation.
    """
    k = stop_ratio_constant(q)
    if k <= 0.0:
        return 1.0  # any positive evidence product crosses a nonpositive ratio
    if q.c == 0.0:
        return 1.0 if q.s * q.mu > math.log(k) else 0.0
    arg = (math.log(k) - q.s * q.mu) / (math.sqrt(2.0 * q.s) * q.c)
    return 0.5 - 0.5 * erf(arg)


def _false_ratio(q: BoundQuery, variant: str) -> float:
    p1, p2, tau, n = q.p1, q.p2, q.tau, q.prior.n
    if variant == "M1":
        return (p2 - (1.0 - p1) * tau) / (tau * p1)
    if variant == "MP":
        return (p2 - (1.0 - p1) * (2.0 * tau - 1.0)) / (2.0 * tau * p1)
    if variant == "M1bar":
        a = (n - 1) * (2.0 * tau - 1.0) + 1.0
        return (n * p2 - (1.0 - p1) * a) / (a * p1)
    raise ValueError(f"unknown false-stop variant {variant!r}")


def false_stop_probability(q: BoundQuery, variant: str) -> float:
    """Probability of landing in the competitor's stop region.

    The competitor wins only when the aggregate true-class evidence falls
    below a variant-specific ratio ``k'``; a nonpositive ratio means the
    event is impossible (the evidence product is positive), giving zero.
    """
    kp = _false_ratio(q, variant)
    if kp <= 0.0:
        return 0.0
    if q.c == 0.0:
        return 1.0 if q.s * q.mu < math.log(kp) else 0.0
    arg = (math.log(kp) - q.s * q.mu) / (math.sqrt(2.0 * q.s) * q.c)
    return 0.5 + 0.5 * erf(arg)


@dataclass
class Prop5Report:
    """True-positive and false-alarm curves plus any ordering violations."""

    s_values: list[int] = field(default_factory=list)
    tp_m1: list[float] = field(default_factory=list)
    tp_mp: list[float] = field(default_factory=list)
    fa_m1: list[float] = field(default_factory=list)
    fa_mp: list[float] = field(default_factory=list)
    fa_m1bar: list[float] = field(default_factory=list)
    violations: list[str] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.violations


def verify_prop5_ordering(q: BoundQuery, s_range) -> Prop5Report:
    """Check the rule-ordering guarantees over a range of round counts.

    For every ``s``: the gap rule's true-positive probability must not
    fall below the confidence rule's, and the false-alarm probabilities
    must be ordered confidence <= gap <= lowered-confidence.
    """
    report = Prop5Report()
    for s in s_range:
        qs = BoundQuery(q.prior, q.true_index, q.competitor_index, q.tau,
                        q.mu, q.c, int(s), "M1")
        tp1 = stop_probability_lognormal(qs)
        tp2 = stop_probability_lognormal(
            BoundQuery(q.prior, q.true_index, q.competitor_index, q.tau,
                       q.mu, q.c, int(s), "MP"))
        fa1 = false_stop_probability(qs, "M1")
        fa2 = false_stop_probability(qs, "MP")
        fa3 = false_stop_probability(qs, "M1bar")
        report.s_values.append(int(s))
        report.tp_m1.append(tp1)
        report.tp_mp.append(tp2)
        report.fa_m1.append(fa1)
        report.fa_mp.append(fa2)
        report.fa_m1bar.append(fa3)
        tol = 1e-12
        if tp2 < tp1 - tol:
            report.violations.append(f"s={s}: TP(MP)={tp2:.6g} < TP(M1)={tp1:.6g}")
        if fa1 > fa2 + tol or fa2 > fa3 + tol:
            report.violations.append(
                f"s={s}: FA ordering broken: M1={fa1:.6g}, MP={fa2:.6g}, M1bar={fa3:.6g}")
    return report
