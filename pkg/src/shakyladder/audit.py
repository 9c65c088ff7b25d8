"""Evaluation oracle: session harness, leaderboard error, and envelope checks.

This module is the only place population risks meet mechanism releases. An
:class:`EvaluationSession` drives a mechanism with scored models, handing the
mechanism nothing but loss vectors (the population-minimum oracle being the
single sanctioned exception), and assembles traces with true risks filled in
so the error metrics below can be computed.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .core import SubmittedModel, Trace
from .mechanisms import LeaderboardMechanism, MechanismParams

__all__ = [
    "EvaluationSession",
    "EvalReport",
    "leaderboard_error",
    "envelope_check",
    "faithfulness_audit",
    "error_rate_ratio",
    "score_models",
]


class EvaluationSession:
    """Runs models through a mechanism while keeping the information barrier.

    The mechanism sees loss vectors only; this session records the oracle-side
    population risks so :meth:`trace` can produce a fully scored
    :class:`~shakyladder.core.Trace`.
    """

    def __init__(self, mechanism: LeaderboardMechanism):
        if mechanism.round != 0:
            raise ValueError("evaluation sessions must own the mechanism from round 0")
        self.mechanism = mechanism
        self._population_risks: list[float] = []

    def submit(self, model: SubmittedModel) -> float:
        if self.mechanism.needs_population_risk:
            released = self.mechanism.submit(model.loss_vector, model.population_risk)
        else:
            released = self.mechanism.submit(model.loss_vector)
        self._population_risks.append(model.population_risk)
        return released

    def submit_all(self, models) -> list[float]:
        return [self.submit(model) for model in models]

    @property
    def rounds(self) -> int:
        return len(self._population_risks)

    def trace(self) -> Trace:
        return self.mechanism.trace().with_population_risks(self._population_risks)


def leaderboard_error(trace: Trace) -> float:
    """max over t of | min_{i <= t} R_D(f_i) - R_t |.

    The gap between each release and the best true risk seen so far; the
    defining quantity every mechanism here is judged by.
    """
    if len(trace) == 0:
        raise ValueError("leaderboard error of an empty trace is undefined")
    risks = trace.population_risks
    if np.isnan(risks).any():
        raise ValueError("trace lacks population risks; run it through an EvaluationSession")
    running_min = np.minimum.accumulate(risks)
    return float(np.max(np.abs(running_min - trace.released)))


@dataclass(frozen=True)
class EvalReport:
    """Audit summary of one trace against one parameter set."""

    lberr: float
    update_count: int
    max_noise: float
    envelope: float
    envelope_satisfied: bool
    faithfulness_violations: int
    worst_faithfulness_deviation: float


def _recount_updates(trace: Trace) -> int:
    # Independent of the mechanism's own counters: recount from releases.
    prev = 1.0
    count = 0
    for rec in trace.records:
        if rec.released < prev:
            count += 1
        prev = rec.released
    return count


def envelope_check(trace: Trace, params: MechanismParams) -> EvalReport:
    """Check lberr <= 18 eps sqrt(B) + lam + 2 L on a randomized-ladder trace.

    B (update count) and L (max noise magnitude) are recomputed from the
    trace records rather than trusted from mechanism counters.
    """
    if len(trace) == 0:
        raise ValueError("cannot audit an empty trace")
    if any(not rec.noise_draws for rec in trace.records):
        raise ValueError("trace has rounds without noise records")
    updates = _recount_updates(trace)
    max_noise = trace.initial_noise
    for rec in trace.records:
        max_noise = max(max_noise, *rec.noise_draws)
    envelope = 18.0 * params.epsilon * math.sqrt(updates) + params.lam + 2.0 * max_noise
    lberr = leaderboard_error(trace)
    violations, worst = faithfulness_audit(trace, params.n)
    return EvalReport(
        lberr=lberr,
        update_count=updates,
        max_noise=max_noise,
        envelope=envelope,
        envelope_satisfied=lberr <= envelope,
        faithfulness_violations=violations,
        worst_faithfulness_deviation=worst,
    )


def faithfulness_audit(trace: Trace, n: int) -> tuple[int, float]:
    """Count update rounds whose release strays from the empirical risk.

    A mechanism is faithful when every release that changes the leaderboard
    sits within 1/(2 sqrt(n)) of the submitted model's empirical risk. Returns
    (violation count, worst deviation over update rounds).
    """
    bound = 1.0 / (2.0 * math.sqrt(n))
    violations = 0
    worst = 0.0
    for rec in trace.records:
        if not rec.updated:
            continue
        deviation = abs(rec.released - rec.empirical_risk)
        worst = max(worst, deviation)
        if deviation > bound:
            violations += 1
    return violations, worst


def error_rate_ratio(trace: Trace, params: MechanismParams) -> float:
    """Observed lberr over the guarantee's rate term (constant factor C).

    Diagnostic only: the guarantee's constant is unspecified, so this ratio
    is tracked for regressions instead of pass/fail thresholds.
    """
    rate = (
        math.log(params.k / params.beta) ** 0.4
        * math.log(params.k * params.n / params.beta) ** 0.2
        / params.n**0.4
    )
    return leaderboard_error(trace) / rate


def score_models(mechanism: LeaderboardMechanism, models) -> tuple[list[float], Trace | None]:
    """Convenience wrapper: run models through a fresh session.

    Returns the released values and, when the mechanism records rounds, the
    scored trace.
    """
    session = EvaluationSession(mechanism)
    released = session.submit_all(models)
    trace = session.trace() if mechanism.records_trace else None
    return released, trace
