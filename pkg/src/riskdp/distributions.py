"""Finite and piecewise-uniform distributions with stochastic-order tests.

Probability mass lives in two concrete containers: ``FiniteDistribution``
(mass on an ordered tuple of opaque outcomes) and ``PiecewiseUniformDensity``
(mass spread uniformly over disjoint intervals).  Valuations, i.e. real
functions of the outcomes, are passed around as plain mappings, sequences
aligned with the outcome order, callables, or ``PiecewiseLinearValuation``
objects in the continuous case.

All containers are immutable after construction and safe to share between
threads.
"""

from __future__ import annotations

import math
from collections.abc import Mapping, Sequence
from dataclasses import dataclass
from functools import cached_property

import numpy as np

from .errors import DomainError, ValidationError

# Mass-sum deviations up to _RENORM_TOL are treated as ingestion round-off
# and silently renormalized; anything larger is a modeling bug.
_RENORM_TOL = 1e-9
_SUM_TOL = 1e-12


def _normalized_probs(probs, what):
    arr = np.asarray(probs, dtype=float)
    if arr.ndim != 1:
        raise ValidationError(f"{what}: probabilities must be a flat sequence")
    if not np.all(np.isfinite(arr)):
        raise ValidationError(f"{what}: probabilities must be finite")
    if np.any(arr < 0):
        raise ValidationError(f"{what}: negative probability {arr.min()!r}")
    total = float(arr.sum())
    if abs(total - 1.0) > _RENORM_TOL:
        raise ValidationError(f"{what}: probabilities sum to {total!r}, not 1")
    if total != 1.0:
        arr = arr / total
    return arr


@dataclass(frozen=True)
class FiniteDistribution:
    """Probability mass over a finite ordered set of distinct outcomes.

    Outcomes are opaque hashable identifiers; their order is preserved and
    meaningful only for deterministic iteration and tie breaking.
    """

    outcomes: tuple
    probs: tuple

    def __init__(self, outcomes, probs):
        outcomes = tuple(outcomes)
        arr = _normalized_probs(probs, "FiniteDistribution")
        if len(outcomes) != arr.size:
            raise ValidationError(
                f"FiniteDistribution: {len(outcomes)} outcomes vs {arr.size} probabilities"
            )
        if len(set(outcomes)) != len(outcomes):
            raise ValidationError("FiniteDistribution: outcomes must be distinct")
        object.__setattr__(self, "outcomes", outcomes)
        object.__setattr__(self, "probs", tuple(float(p) for p in arr))

    @cached_property
    def _index(self):
        return {o: i for i, o in enumerate(self.outcomes)}

    @cached_property
    def probs_array(self) -> np.ndarray:
        return np.asarray(self.probs, dtype=float)

    def prob(self, outcome) -> float:
        i = self._index.get(outcome)
        return 0.0 if i is None else self.probs[i]

    def support(self) -> tuple:
        return tuple(o for o, p in zip(self.outcomes, self.probs) if p > 0.0)

    def restricted_to_support(self) -> "FiniteDistribution":
        """Drop zero-probability outcomes (mass is unchanged)."""
        pairs = [(o, p) for o, p in zip(self.outcomes, self.probs) if p > 0.0]
        return FiniteDistribution([o for o, _ in pairs], [p for _, p in pairs])

    @classmethod
    def point_mass(cls, outcome) -> "FiniteDistribution":
        return cls((outcome,), (1.0,))


def valuation_values(q: FiniteDistribution, v) -> np.ndarray:
    """Evaluate a valuation on every outcome of ``q`` as a float array.

    ``v`` may be a mapping from outcomes, a sequence aligned with
    ``q.outcomes``, or a callable.  Missing or non-finite values raise
    ``DomainError`` (valuations must be total and bounded).
    """
    if isinstance(v, Mapping):
        try:
            vals = [v[o] for o in q.outcomes]
        except KeyError as exc:
            raise DomainError(f"valuation undefined at outcome {exc.args[0]!r}") from exc
    elif isinstance(v, np.ndarray) or (isinstance(v, Sequence) and not isinstance(v, (str, bytes))):
        vals = list(v)
        if len(vals) != len(q.outcomes):
            raise DomainError(
                f"aligned valuation has {len(vals)} entries for {len(q.outcomes)} outcomes"
            )
    elif callable(v):
        vals = [v(o) for o in q.outcomes]
    else:
        raise DomainError(f"cannot interpret {type(v).__name__} as a valuation")
    arr = np.asarray(vals, dtype=float)
    if not np.all(np.isfinite(arr)):
        raise DomainError("valuation must be finite on every outcome")
    return arr


def pushforward(q: FiniteDistribution, v) -> FiniteDistribution:
    """Distribution of the valuation ``v`` under ``q``.

    Outcomes of the result are the distinct values of ``v``, sorted
    ascending; probabilities of exactly equal values are merged.
    """
    vals = valuation_values(q, v)
    merged: dict[float, float] = {}
    for value, p in zip(vals, q.probs):
        value = float(value)
        merged[value] = merged.get(value, 0.0) + p
    levels = sorted(merged)
    return FiniteDistribution(levels, [merged[x] for x in levels])


def _survival(levels: np.ndarray, probs: np.ndarray, eta: float) -> float:
    """P(X > eta) for mass ``probs`` at sorted ``levels``."""
    i = int(np.searchsorted(levels, eta, side="right"))
    return float(probs[i:].sum())


def stochastically_dominated(v, q1: FiniteDistribution, w, q2: FiniteDistribution) -> bool:
    """First-order dominance test: (v; q1) below (w; q2).

    True iff P_{q1}(v > eta) <= P_{q2}(w > eta) for every threshold eta,
    checked at the union of the two pushforward jump points (sufficient,
    since both survival functions are constant in between).
    """
    pf1 = pushforward(q1, v)
    pf2 = pushforward(q2, w)
    lev1 = np.asarray(pf1.outcomes, dtype=float)
    lev2 = np.asarray(pf2.outcomes, dtype=float)
    p1 = pf1.probs_array
    p2 = pf2.probs_array
    for eta in sorted(set(pf1.outcomes) | set(pf2.outcomes)):
        if _survival(lev1, p1, eta) > _survival(lev2, p2, eta):
            return False
    return True


@dataclass(frozen=True)
class PiecewiseUniformDensity:
    """Probability density that is constant on finitely many disjoint intervals.

    ``pieces`` are (lower, upper, mass) triples with lower < upper, sorted and
    non-overlapping (touching endpoints allowed).  Construction canonicalizes:
    zero-mass pieces are dropped and touching pieces of equal density merged,
    so two representations of the same density compare equal.
    """

    pieces: tuple

    def __init__(self, pieces):
        cleaned = []
        for piece in pieces:
            lo, hi, mass = (float(x) for x in piece)
            if not (math.isfinite(lo) and math.isfinite(hi) and math.isfinite(mass)):
                raise ValidationError("PiecewiseUniformDensity: non-finite piece")
            if lo >= hi:
                raise ValidationError(f"PiecewiseUniformDensity: empty interval [{lo}, {hi}]")
            if mass < 0:
                raise ValidationError(f"PiecewiseUniformDensity: negative mass {mass}")
            cleaned.append((lo, hi, mass))
        cleaned.sort()
        for (_, hi_a, _), (lo_b, _, _) in zip(cleaned, cleaned[1:]):
            if lo_b < hi_a:
                raise ValidationError("PiecewiseUniformDensity: overlapping pieces")
        total = sum(mass for _, _, mass in cleaned)
        if abs(total - 1.0) > _RENORM_TOL:
            raise ValidationError(f"PiecewiseUniformDensity: total mass {total!r}, not 1")
        if total != 1.0:
            cleaned = [(lo, hi, mass / total) for lo, hi, mass in cleaned]
        canonical = []
        for lo, hi, mass in cleaned:
            if mass == 0.0:
                continue
            if canonical:
                plo, phi, pmass = canonical[-1]
                if phi == lo and pmass / (phi - plo) == mass / (hi - lo):
                    canonical[-1] = (plo, hi, pmass + mass)
                    continue
            canonical.append((lo, hi, mass))
        if not canonical:
            raise ValidationError("PiecewiseUniformDensity: no mass")
        object.__setattr__(self, "pieces", tuple(canonical))

    @classmethod
    def uniform(cls, lo: float, hi: float) -> "PiecewiseUniformDensity":
        return cls([(lo, hi, 1.0)])

    def support(self) -> tuple[float, float]:
        return (self.pieces[0][0], self.pieces[-1][1])

    def breakpoints(self) -> list[float]:
        points = []
        for lo, hi, _ in self.pieces:
            if not points or points[-1] != lo:
                points.append(lo)
            points.append(hi)
        return points

    def density(self, x: float) -> float:
        for lo, hi, mass in self.pieces:
            if lo <= x <= hi:
                return mass / (hi - lo)
        return 0.0

    def cdf(self, x: float) -> float:
        acc = 0.0
        for lo, hi, mass in self.pieces:
            if x >= hi:
                acc += mass
            elif x > lo:
                acc += mass * ((x - lo) / (hi - lo))
        return acc

    def mean(self) -> float:
        return sum(mass * 0.5 * (lo + hi) for lo, hi, mass in self.pieces)

    def cell_masses(self, edges) -> np.ndarray:
        """Mass captured between consecutive entries of ``edges``."""
        edges = np.asarray(edges, dtype=float)
        acc = np.zeros_like(edges)
        for lo, hi, mass in self.pieces:
            acc += mass * np.clip((edges - lo) / (hi - lo), 0.0, 1.0)
        return np.diff(acc)

    def discretize(self, cells: int) -> FiniteDistribution:
        """Mass lumped onto ``cells`` equal-width cells spanning the support.

        Outcomes are cell midpoints; used as a brute-force proxy for the
        continuous density in cross-checks.
        """
        lo, hi = self.support()
        edges = np.linspace(lo, hi, cells + 1)
        masses = self.cell_masses(edges)
        mids = 0.5 * (edges[:-1] + edges[1:])
        keep = masses > 0
        return FiniteDistribution([float(m) for m in mids[keep]], masses[keep])


def density_dominated(f1: PiecewiseUniformDensity, f2: PiecewiseUniformDensity) -> bool:
    """True iff ``f1`` is stochastically smaller than ``f2``.

    Equivalent to CDF(f1) >= CDF(f2) pointwise; both CDFs are piecewise
    linear, so checking every breakpoint of either density is sufficient.
    """
    points = sorted(set(f1.breakpoints()) | set(f2.breakpoints()))
    return all(f1.cdf(x) >= f2.cdf(x) for x in points)


def mixture(
    f1: PiecewiseUniformDensity, f2: PiecewiseUniformDensity, xi: float
) -> PiecewiseUniformDensity:
    """Convex combination xi*f1 + (1-xi)*f2, refined over shared breakpoints."""
    if not 0.0 <= xi <= 1.0:
        raise DomainError(f"mixture weight {xi!r} outside [0, 1]")
    if xi == 1.0:
        return f1
    if xi == 0.0:
        return f2
    points = sorted(set(f1.breakpoints()) | set(f2.breakpoints()))
    pieces = []
    for lo, hi in zip(points, points[1:]):
        mid = 0.5 * (lo + hi)
        dens = xi * f1.density(mid) + (1.0 - xi) * f2.density(mid)
        pieces.append((lo, hi, dens * (hi - lo)))
    return PiecewiseUniformDensity(pieces)


def uniform_expected_excess(lo: float, hi: float, level: float) -> float:
    """E[(X - level)+] for X uniform on [lo, hi] (point mass when lo == hi)."""
    if lo == hi:
        return max(lo - level, 0.0)
    if level <= lo:
        return 0.5 * (lo + hi) - level
    if level >= hi:
        return 0.0
    return (hi - level) ** 2 / (2.0 * (hi - lo))


@dataclass(frozen=True)
class PiecewiseLinearValuation:
    """Real function that is affine on each of finitely many intervals.

    ``segments`` are (lower, upper, slope, intercept) with the function equal
    to slope*x + intercept on [lower, upper].  Segments must be sorted and
    non-overlapping; evaluation outside every segment raises ``DomainError``.
    """

    segments: tuple

    def __init__(self, segments):
        cleaned = []
        for seg in segments:
            lo, hi, slope, intercept = (float(x) for x in seg)
            if lo >= hi:
                raise ValidationError(f"PiecewiseLinearValuation: empty segment [{lo}, {hi}]")
            cleaned.append((lo, hi, slope, intercept))
        cleaned.sort()
        for (_, hi_a, _, _), (lo_b, _, _, _) in zip(cleaned, cleaned[1:]):
            if lo_b < hi_a:
                raise ValidationError("PiecewiseLinearValuation: overlapping segments")
        if not cleaned:
            raise ValidationError("PiecewiseLinearValuation: no segments")
        object.__setattr__(self, "segments", tuple(cleaned))

    @classmethod
    def identity(cls, lo: float, hi: float) -> "PiecewiseLinearValuation":
        return cls([(lo, hi, 1.0, 0.0)])

    def breakpoints(self) -> list[float]:
        points = []
        for lo, hi, _, _ in self.segments:
            if not points or points[-1] != lo:
                points.append(lo)
            points.append(hi)
        return points

    def segment_at(self, lo: float, hi: float):
        """Slope and intercept of the segment covering [lo, hi]."""
        for slo, shi, slope, intercept in self.segments:
            if slo <= lo and hi <= shi:
                return slope, intercept
        raise DomainError(f"valuation is not affine on [{lo}, {hi}]")

    def __call__(self, x: float) -> float:
        for lo, hi, slope, intercept in self.segments:
            if lo <= x <= hi:
                return slope * x + intercept
        raise DomainError(f"valuation undefined at {x!r}")
