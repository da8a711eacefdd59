"""Geometry of categorical distributions on the probability simplex.

Distributions are held in the log domain so that long chains of
multiplicative Bayes updates neither underflow nor lose relative precision.
Entries that are exactly zero are permitted (they encode boundary points
such as two-class mixtures) and are absorbing under perturbation: once a
category has zero mass no amount of evidence revives it.

All entropies and divergences are reported in bits.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

__all__ = [
    "SimplexPoint",
    "LikelihoodVector",
    "TopTwo",
    "oplus",
    "otimes",
    "special_point",
    "shannon_entropy",
    "renyi_entropy",
    "kl_divergence",
    "project_to_center_line",
    "center_line_distance",
    "top_two",
    "delta_mp",
]

_LOG2 = np.log(2.0)


def _normalize_log_weights(logw: np.ndarray) -> np.ndarray:
    """Shift log weights so the implied masses sum to one (log-sum-exp)."""
    m = np.max(logw)
    if not np.isfinite(m):
        raise ValueError("distribution has no positive mass")
    total = m + np.log(np.sum(np.exp(logw - m)))
    return logw - total


@dataclass(frozen=True)
class SimplexPoint:
    """A categorical distribution ``p`` with ``n >= 2`` classes.

    Parameters
    ----------
    log_probs : array_like
        Log probabilities; ``-inf`` encodes an exactly-zero entry. The
        vector is renormalized on construction, so any vector of log
        weights with at least one finite entry is accepted.

    Notes
    -----
    Instances are immutable; ``n`` never changes for the lifetime of a
    value and every operation returns a fresh point whose masses sum to
    one within 1e-12.
    """

    log_probs: np.ndarray

    def __post_init__(self) -> None:
        lp = np.array(self.log_probs, dtype=float, copy=True)
        if lp.ndim != 1 or lp.size < 2:
            raise ValueError("a distribution needs at least two categories")
        if np.isnan(lp).any() or np.isposinf(lp).any():
            raise ValueError("log probabilities must lie in [-inf, finite]")
        lp = _normalize_log_weights(lp)
        lp.flags.writeable = False
        object.__setattr__(self, "log_probs", lp)

    @classmethod
    def from_probs(cls, probs) -> "SimplexPoint":
        """Build a point from (possibly unnormalized) nonnegative masses."""
        p = np.asarray(probs, dtype=float)
        if p.ndim != 1 or p.size < 2:
            raise ValueError("a distribution needs at least two categories")
        if np.isnan(p).any() or np.isinf(p).any() or (p < 0).any():
            raise ValueError("masses must be finite and nonnegative")
        if p.sum() <= 0:
            raise ValueError("distribution has no positive mass")
        with np.errstate(divide="ignore"):
            return cls(np.log(p))

    @classmethod
    def uniform(cls, n: int) -> "SimplexPoint":
        """The center of the simplex, ``u_n``."""
        if n < 2:
            raise ValueError("n must be at least 2")
        return cls(np.zeros(n))

    @classmethod
    def corner(cls, n: int, i: int) -> "SimplexPoint":
        """The one-hot distribution at index ``i``."""
        if n < 2:
            raise ValueError("n must be at least 2")
        if not 0 <= i < n:
            raise ValueError("corner index out of range")
        lp = np.full(n, -np.inf)
        lp[i] = 0.0
        return cls(lp)

    @property
    def n(self) -> int:
        return self.log_probs.size

    @property
    def probs(self) -> np.ndarray:
        out = np.exp(self.log_probs)
        out.flags.writeable = False
        return out

    @property
    def max_prob(self) -> float:
        return float(np.exp(np.max(self.log_probs)))

    @property
    def argmax(self) -> int:
        # np.argmax returns the first maximizer, i.e. lowest-index tie-break
        return int(np.argmax(self.log_probs))

    def allclose(self, other: "SimplexPoint", atol: float = 1e-12) -> bool:
        return self.n == other.n and bool(
            np.allclose(self.probs, other.probs, rtol=0.0, atol=atol)
        )

    def __repr__(self) -> str:  # pragma: no cover - cosmetic
        with np.printoptions(precision=6, suppress=True):
            return f"SimplexPoint({self.probs})"


@dataclass(frozen=True)
class LikelihoodVector:
    """Unnormalized per-class evidence; every entry strictly positive."""

    values: np.ndarray

    def __post_init__(self) -> None:
        v = np.array(self.values, dtype=float, copy=True)
        if v.ndim != 1 or v.size < 2:
            raise ValueError("evidence needs at least two categories")
        if np.isnan(v).any() or np.isinf(v).any() or (v <= 0).any():
            raise ValueError("evidence entries must be finite and strictly positive")
        v.flags.writeable = False
        object.__setattr__(self, "values", v)

    @classmethod
    def neutral(cls, n: int) -> "LikelihoodVector":
        """Evidence that leaves any distribution unchanged."""
        return cls(np.ones(n))

    @property
    def n(self) -> int:
        return self.values.size


@dataclass(frozen=True)
class TopTwo:
    """Indices of the two largest masses and their gap.

    Ties are broken toward the lowest index, so the result is
    deterministic for any input.
    """

    j1: int
    j2: int
    gap: float


def _check_same_n(a, b) -> None:
    if a.n != b.n:
        raise ValueError(f"dimension mismatch: {a.n} vs {b.n}")


def oplus(p: SimplexPoint, e: LikelihoodVector) -> SimplexPoint:
    """Perturb ``p`` by evidence ``e`` (the Bayes update).

    Returns the normalized componentwise product ``p_i e_i / sum_k p_k e_k``.
    Zero entries of ``p`` stay zero.
    """
    _check_same_n(p, e)
    return SimplexPoint(p.log_probs + np.log(e.values))


def otimes(p: SimplexPoint, lam: float) -> SimplexPoint:
    """Scalar power: ``p_i^lam`` renormalized.

    ``lam <= 0`` requires a strictly positive ``p`` (a zero entry has no
    finite power there); for ``lam > 0`` zeros stay zero.
    """
    lam = float(lam)
    if lam <= 0 and np.isneginf(p.log_probs).any():
        raise ValueError("power with lam <= 0 undefined for zero entries")
    if lam == 0.0:
        return SimplexPoint.uniform(p.n)
    return SimplexPoint(lam * p.log_probs)


def special_point(kind: str, n: int, tau: float | None = None, i: int = 0) -> SimplexPoint:
    """Construct one of the named reference distributions.

    Parameters
    ----------
    kind : {"uniform", "v", "w", "corner"}
        ``uniform`` is the simplex center.  ``v`` puts mass ``tau`` at
        index ``i`` and spreads the rest evenly.  ``w`` puts ``tau`` at
        ``i`` and ``1 - tau`` on the lowest other index, zero elsewhere.
        ``corner`` is one-hot at ``i``.
    tau : float, optional
        Required for ``v`` and ``w``; must lie in ``[1/n, 1]``.
    """
    if n < 2:
        raise ValueError("n must be at least 2")
    if not 0 <= i < n:
        raise ValueError("index out of range")
    if kind == "uniform":
        return SimplexPoint.uniform(n)
    if kind == "corner":
        return SimplexPoint.corner(n, i)
    if kind not in ("v", "w"):
        raise ValueError(f"unknown special point kind {kind!r}")
    if tau is None:
        raise ValueError(f"kind {kind!r} requires tau")
    tau = float(tau)
    if not (1.0 / n <= tau <= 1.0):
        raise ValueError(f"tau must lie in [1/{n}, 1], got {tau}")
    p = np.zeros(n)
    if kind == "v":
        p[:] = (1.0 - tau) / (n - 1)
        p[i] = tau
    else:
        j = 0 if i != 0 else 1
        p[i] = tau
        p[j] = 1.0 - tau
    return SimplexPoint.from_probs(p)


def shannon_entropy(p: SimplexPoint) -> float:
    """Shannon entropy in bits with the convention ``0 log 0 = 0``."""
    lp = p.log_probs
    finite = np.isfinite(lp)
    return float(-np.sum(np.exp(lp[finite]) * lp[finite]) / _LOG2)


def renyi_entropy(p: SimplexPoint, alpha: float) -> float:
    """Order-``alpha`` Renyi entropy in bits.

    Defined for ``alpha >= 0`` except ``alpha = 1`` (use
    :func:`shannon_entropy` there); the value converges to the Shannon
    entropy as ``alpha -> 1``.
    """
    alpha = float(alpha)
    if alpha < 0:
        raise ValueError("alpha must be nonnegative")
    if alpha == 1.0:
        raise ValueError("alpha = 1 is the Shannon limit; use shannon_entropy")
    lp = p.log_probs[np.isfinite(p.log_probs)]
    # log-sum-exp of alpha * log p for numerical range safety
    m = np.max(alpha * lp)
    log_sum = m + np.log(np.sum(np.exp(alpha * lp - m)))
    return float(log_sum / ((1.0 - alpha) * _LOG2))


def kl_divergence(p: SimplexPoint, q: SimplexPoint) -> float:
    """Kullback-Leibler divergence ``KL(p || q)`` in bits.

    Requires absolute continuity: wherever ``q`` is zero, ``p`` must be
    zero too.
    """
    _check_same_n(p, q)
    lp, lq = p.log_probs, q.log_probs
    if np.any(np.isneginf(lq) & ~np.isneginf(lp)):
        raise ValueError("support violation: p has mass where q is zero")
    finite = np.isfinite(lp)
    return float(np.sum(np.exp(lp[finite]) * (lp[finite] - lq[finite])) / _LOG2)


def project_to_center_line(p: SimplexPoint, i: int) -> SimplexPoint:
    """Euclidean projection of ``p`` onto the center line through corner ``i``.

    The center line joins the uniform distribution to the ``i``-th corner;
    the projection keeps ``p_i`` and spreads the remaining mass evenly.
    """
    if not 0 <= i < p.n:
        raise ValueError("index out of range")
    pi = float(p.probs[i])
    out = np.full(p.n, (1.0 - pi) / (p.n - 1))
    out[i] = pi
    return SimplexPoint.from_probs(out)


def center_line_distance(p: SimplexPoint, i: int) -> float:
    """Euclidean distance from ``p`` to its center-line projection."""
    return float(np.linalg.norm(p.probs - project_to_center_line(p, i).probs))


def top_two(p: SimplexPoint) -> TopTwo:
    """Largest and second-largest coordinates, lowest index on ties."""
    order = np.argsort(-p.probs, kind="stable")
    j1, j2 = int(order[0]), int(order[1])
    return TopTwo(j1=j1, j2=j2, gap=float(p.probs[j1] - p.probs[j2]))


def delta_mp(p: SimplexPoint, q: SimplexPoint) -> float:
    """Top-two coordinate distance between ``p`` and ``q``.

    Sums ``|p_i - q_i|`` over the union of both arguments' top-two index
    sets (duplicates counted once).  Symmetric and nonnegative; zero on
    identical arguments.
    """
    _check_same_n(p, q)
    tp, tq = top_two(p), top_two(q)
    idx = sorted({tp.j1, tp.j2, tq.j1, tq.j2})
    pp, qq = p.probs, q.probs
    return float(sum(abs(pp[k] - qq[k]) for k in idx))
