"""Transition risk mappings: static risk measures applied to one-step values.

A mapping takes a distribution ``q`` and a valuation ``v`` of the outcomes
and returns a real number that generalizes the conditional expectation in a
dynamic-programming recursion.  The built-in mappings (expectation, entropic,
mean upper semideviation) are normalized, translation-equivariant, law
invariant, and monotone with respect to first-order stochastic dominance;
``Selection`` deliberately is not and exists as a counterexample fixture.

``check_axioms`` probes those four properties on randomized trials and
reports counterexamples, which is how the theory's requirements are kept
executable.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .distributions import (
    FiniteDistribution,
    PiecewiseLinearValuation,
    PiecewiseUniformDensity,
    pushforward,
    stochastically_dominated,
    uniform_expected_excess,
    valuation_values,
)
from .errors import DomainError, UnsupportedCombinationError, ValidationError


class TransitionRiskMapping:
    """Base class; concrete mappings are immutable value objects."""

    #: False for fixtures that violate dominance monotonicity by design.
    monotonic = True

    def evaluate(self, q: FiniteDistribution, v) -> float:
        raise NotImplementedError


@dataclass(frozen=True)
class Expectation(TransitionRiskMapping):
    """Risk-neutral mapping: the plain mean of the valuation."""

    def evaluate(self, q, v):
        return _expectation(q.probs_array, valuation_values(q, v))


@dataclass(frozen=True)
class Entropic(TransitionRiskMapping):
    """Exponential-utility mapping (1/gamma) * log E[exp(gamma * v)]."""

    gamma: float

    def __post_init__(self):
        if not self.gamma > 0:
            raise DomainError(f"entropic coefficient must be positive, got {self.gamma!r}")

    def evaluate(self, q, v):
        return _entropic(q.probs_array, valuation_values(q, v), self.gamma)


@dataclass(frozen=True)
class MeanSemideviation(TransitionRiskMapping):
    """Mean plus kappa times the upper semideviation of order ``order``."""

    kappa: float
    order: float = 1.0

    def __post_init__(self):
        if not 0.0 <= self.kappa <= 1.0:
            raise DomainError(f"semideviation weight must lie in [0, 1], got {self.kappa!r}")
        if not self.order >= 1.0:
            raise DomainError(f"semideviation order must be >= 1, got {self.order!r}")

    def evaluate(self, q, v):
        return _mean_semideviation(
            q.probs_array, valuation_values(q, v), self.kappa, self.order
        )


@dataclass(frozen=True)
class Selection(TransitionRiskMapping):
    """Test fixture returning the valuation at one fixed outcome.

    Ignores the probabilities entirely, so it violates monotonicity with
    respect to stochastic dominance; never use it in a real model.
    """

    outcome: object
    monotonic: bool = field(default=False, init=False)

    def evaluate(self, q, v):
        if self.outcome not in q.outcomes:
            raise DomainError(f"selected outcome {self.outcome!r} not among the outcomes")
        vals = valuation_values(q, v)
        return float(vals[q.outcomes.index(self.outcome)])


def _expectation(probs: np.ndarray, values: np.ndarray) -> float:
    return float(probs @ values)


def _entropic(probs: np.ndarray, values: np.ndarray, gamma: float) -> float:
    # Max shift keeps exp() from overflowing for large gamma or values.
    shift = float(values.max())
    return shift + math.log(float(probs @ np.exp(gamma * (values - shift)))) / gamma


def _mean_semideviation(probs: np.ndarray, values: np.ndarray, kappa: float, order: float) -> float:
    mean = float(probs @ values)
    excess = np.maximum(values - mean, 0.0)
    if order == 1.0:
        penalty = float(probs @ excess)
    else:
        penalty = float(probs @ excess**order) ** (1.0 / order)
    return mean + kappa * penalty


def evaluate_arrays(sigma: TransitionRiskMapping, probs: np.ndarray, values: np.ndarray) -> float:
    """Evaluate ``sigma`` on pre-aligned probability and value arrays."""
    if isinstance(sigma, Expectation):
        return _expectation(probs, values)
    if isinstance(sigma, Entropic):
        return _entropic(probs, values, sigma.gamma)
    if isinstance(sigma, MeanSemideviation):
        return _mean_semideviation(probs, values, sigma.kappa, sigma.order)
    raise UnsupportedCombinationError(
        f"{type(sigma).__name__} has no array evaluation; use evaluate()"
    )


def evaluate(sigma: TransitionRiskMapping, q: FiniteDistribution, v) -> float:
    """Risk value of the valuation ``v`` under ``q``."""
    return sigma.evaluate(q, v)


def evaluate_piecewise(
    sigma: TransitionRiskMapping,
    f: PiecewiseUniformDensity,
    v: PiecewiseLinearValuation,
) -> float:
    """Exact risk value for a piecewise-uniform density and affine-by-pieces valuation.

    Supported mappings: ``Expectation`` and ``MeanSemideviation`` with order 1,
    which admit closed forms via per-piece means and uniform partial
    expectations.  Anything else raises ``UnsupportedCombinationError``.
    """
    if isinstance(sigma, MeanSemideviation) and sigma.order != 1.0:
        raise UnsupportedCombinationError(
            "continuous evaluation of mean-semideviation requires order 1"
        )
    if not isinstance(sigma, (Expectation, MeanSemideviation)):
        raise UnsupportedCombinationError(
            f"{type(sigma).__name__} is offered on finite distributions only"
        )
    cells = _refined_cells(f, v)
    mean = sum(mass * (slope * (0.5 * (lo + hi)) + intercept) for lo, hi, mass, slope, intercept in cells)
    if isinstance(sigma, Expectation):
        return mean
    semidev = 0.0
    for lo, hi, mass, slope, intercept in cells:
        if slope > 0.0:
            kink = (mean - intercept) / slope
            semidev += mass * slope * uniform_expected_excess(lo, hi, kink)
        elif slope < 0.0:
            kink = (mean - intercept) / slope
            # (v - mean)+ = (-slope) * (kink - x)+; reflect to reuse the excess form.
            semidev += mass * (-slope) * uniform_expected_excess(-hi, -lo, -kink)
        else:
            semidev += mass * max(intercept - mean, 0.0)
    return mean + sigma.kappa * semidev


def _refined_cells(f: PiecewiseUniformDensity, v: PiecewiseLinearValuation):
    """Split the density pieces at the valuation breakpoints.

    Yields (lo, hi, mass, slope, intercept) cells on which the density is
    constant and the valuation affine; raises if ``v`` is not affine on some
    cell of ``f``'s support.
    """
    cells = []
    inner = [x for x in v.breakpoints()]
    for lo, hi, mass in f.pieces:
        cuts = sorted({lo, hi, *(x for x in inner if lo < x < hi)})
        density = mass / (hi - lo)
        for a, b in zip(cuts, cuts[1:]):
            slope, intercept = v.segment_at(a, b)
            cells.append((a, b, density * (b - a), slope, intercept))
    return cells


@dataclass
class PropertyResult:
    """Outcome of probing one axiom."""

    name: str
    checked: int = 0
    failures: int = 0
    counterexample: object = None

    @property
    def passed(self) -> bool:
        return self.failures == 0

    def record(self, ok: bool, witness) -> None:
        self.checked += 1
        if not ok:
            self.failures += 1
            if self.counterexample is None:
                self.counterexample = witness


@dataclass
class AxiomReport:
    """Randomized property report for one mapping."""

    mapping: TransitionRiskMapping
    trials: int
    seed: int
    normalization: PropertyResult = None
    translation: PropertyResult = None
    monotonicity: PropertyResult = None
    law_invariance: PropertyResult = None

    @property
    def passed(self) -> bool:
        return all(
            r.passed
            for r in (self.normalization, self.translation, self.monotonicity, self.law_invariance)
        )

    def __str__(self):
        lines = [f"{self.mapping!r}: {self.trials} trials, seed {self.seed}"]
        for r in (self.normalization, self.translation, self.monotonicity, self.law_invariance):
            status = "pass" if r.passed else f"FAIL ({r.failures}/{r.checked})"
            lines.append(f"  {r.name}: {status}")
        return "\n".join(lines)


_OUTCOME_POOL = ("x1", "x2", "x3", "x4", "x5", "x6")
_AXIOM_TOL = 1e-9

# The two-point configuration on which Selection provably breaks dominance
# monotonicity: (3, 1) is dominated by (2, 4) under (1/3, 2/3), yet the value
# at the first outcome decreases from 3 to 2.
_ANCHOR_Q = (1.0 / 3.0, 2.0 / 3.0)
_ANCHOR_V = (3.0, 1.0)
_ANCHOR_W = (2.0, 4.0)


def _random_distribution(rng, n: int) -> FiniteDistribution:
    return FiniteDistribution(_OUTCOME_POOL[:n], rng.dirichlet(np.ones(n)))


def check_axioms(sigma: TransitionRiskMapping, trials: int, rng_seed: int) -> AxiomReport:
    """Probe normalization, translation, dominance monotonicity, law invariance.

    Each trial draws distributions from a Dirichlet simplex sampler and
    valuations uniform in [-10, 10]; the first trial replays the fixed
    two-point counterexample configuration so a non-monotone mapping fails
    deterministically.  Results and the first counterexample per property are
    collected in the returned report.
    """
    if trials < 1:
        raise DomainError("trials must be >= 1")
    rng = np.random.default_rng(rng_seed)
    report = AxiomReport(
        mapping=sigma,
        trials=trials,
        seed=rng_seed,
        normalization=PropertyResult("normalization"),
        translation=PropertyResult("translation equivariance"),
        monotonicity=PropertyResult("dominance monotonicity"),
        law_invariance=PropertyResult("law invariance"),
    )
    for trial in range(trials):
        if trial == 0:
            q = FiniteDistribution(_OUTCOME_POOL[:2], _ANCHOR_Q)
            v = np.asarray(_ANCHOR_V)
            q2, w = q, np.asarray(_ANCHOR_W)
        else:
            n = int(rng.integers(2, len(_OUTCOME_POOL) + 1))
            q = _random_distribution(rng, n)
            v = rng.uniform(-10.0, 10.0, size=n)
            if rng.random() < 0.5:
                q2, w = q, v + np.abs(rng.uniform(0.0, 5.0, size=n))
            else:
                m = int(rng.integers(2, len(_OUTCOME_POOL) + 1))
                q2 = _random_distribution(rng, m)
                w = rng.uniform(-10.0, 10.0, size=m)

        value = sigma.evaluate(q, v)

        report.normalization.record(
            abs(sigma.evaluate(q, np.zeros(len(q.outcomes)))) <= 1e-12, {"q": q}
        )

        shift = float(rng.uniform(-10.0, 10.0))
        shifted = sigma.evaluate(q, v + shift)
        report.translation.record(
            abs(shifted - (value + shift)) <= _AXIOM_TOL,
            {"q": q, "v": v, "shift": shift, "lhs": shifted, "rhs": value + shift},
        )

        if stochastically_dominated(v, q, w, q2):
            other = sigma.evaluate(q2, w)
            report.monotonicity.record(
                value <= other + _AXIOM_TOL,
                {"q1": q, "v": v, "q2": q2, "w": w, "sigma_v": value, "sigma_w": other},
            )

        # Relabeling outcomes together with their probabilities preserves the
        # pushforward, so a law-invariant mapping must not move.
        perm = rng.permutation(len(q.outcomes))
        q_perm = FiniteDistribution(
            [q.outcomes[i] for i in perm], [q.probs[i] for i in perm]
        )
        v_perm = np.asarray(v)[perm]
        relabeled = sigma.evaluate(q_perm, v_perm)
        report.law_invariance.record(
            abs(relabeled - value) <= _AXIOM_TOL,
            {"q": q, "v": v, "perm": perm, "lhs": relabeled, "rhs": value},
        )
    return report


_MAPPING_TAGS = {
    "expectation": Expectation,
    "entropic": Entropic,
    "mean_semideviation": MeanSemideviation,
    "selection": Selection,
}


def mapping_to_dict(sigma: TransitionRiskMapping) -> dict:
    """Portable {kind, parameters} form used by the model JSON schema."""
    if isinstance(sigma, Expectation):
        return {"kind": "expectation"}
    if isinstance(sigma, Entropic):
        return {"kind": "entropic", "gamma": sigma.gamma}
    if isinstance(sigma, MeanSemideviation):
        return {"kind": "mean_semideviation", "kappa": sigma.kappa, "order": sigma.order}
    if isinstance(sigma, Selection):
        return {"kind": "selection", "outcome": sigma.outcome}
    raise ValidationError(f"cannot serialize mapping {sigma!r}")


def mapping_from_dict(doc: dict) -> TransitionRiskMapping:
    if not isinstance(doc, dict) or "kind" not in doc:
        raise ValidationError(f"risk mapping must be an object with a 'kind', got {doc!r}")
    kind = doc["kind"]
    if kind not in _MAPPING_TAGS:
        raise ValidationError(f"unknown risk mapping kind {kind!r}")
    params = {k: v for k, v in doc.items() if k != "kind"}
    try:
        return _MAPPING_TAGS[kind](**params)
    except TypeError as exc:
        raise ValidationError(f"bad parameters for {kind!r} mapping: {exc}") from exc
