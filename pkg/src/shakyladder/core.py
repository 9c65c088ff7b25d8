"""Shared value types and the model/oracle information barrier.

Models are represented extensionally: a model is its per-point loss vector on
the fixed holdout plus an analytically known population risk. Mechanism code
paths receive bare loss vectors only; the population risk travels alongside
for the evaluation oracle (see :mod:`shakyladder.audit`) and never enters a
mechanism's decision logic. All types here are immutable after construction
and safe to share across threads.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, replace
from typing import Sequence

import numpy as np

from .noise import Rng

__all__ = [
    "LOSS_TOLERANCE",
    "SubmittedModel",
    "HoldoutSample",
    "RoundRecord",
    "Trace",
    "make_random_label_sample",
    "model_from_predictions",
    "empirical_risk",
    "write_trace_csv",
]

#: Loss values may stray from [0, 1] by at most this much before rejection.
LOSS_TOLERANCE = 1e-12

#: Sub-stream tag used when generating hidden holdout labels from a seed.
LABEL_STREAM = 11


def _as_readonly(array: np.ndarray) -> np.ndarray:
    out = np.asarray(array)
    out.setflags(write=False)
    return out


@dataclass(frozen=True)
class SubmittedModel:
    """A model as seen on the holdout: per-point losses plus true risk.

    ``loss_vector`` is what mechanisms may score; ``population_risk`` is the
    oracle-only side channel, known analytically for every synthetic model
    family in this package (random prediction models have risk exactly 1/2).
    """

    loss_vector: np.ndarray
    population_risk: float

    def __post_init__(self):
        vec = _as_readonly(self.loss_vector)
        if vec.ndim != 1 or vec.size == 0:
            raise ValueError("loss_vector must be a nonempty 1-d array")
        lo = float(vec.min())
        hi = float(vec.max())
        if lo < -LOSS_TOLERANCE or hi > 1.0 + LOSS_TOLERANCE:
            raise ValueError(
                f"loss values must lie in [0, 1] (tolerance {LOSS_TOLERANCE}); "
                f"observed range [{lo}, {hi}]"
            )
        if not 0.0 <= self.population_risk <= 1.0:
            raise ValueError(f"population_risk must lie in [0, 1], got {self.population_risk}")
        object.__setattr__(self, "loss_vector", vec)

    @property
    def size(self) -> int:
        return int(self.loss_vector.size)


@dataclass(frozen=True)
class HoldoutSample:
    """Hidden binary labels for a holdout of a given size, regenerable from seed."""

    size: int
    hidden_labels: np.ndarray
    seed: int | tuple[int, ...]

    def __post_init__(self):
        if self.size < 1:
            raise ValueError(f"sample size must be >= 1, got {self.size}")
        labels = _as_readonly(self.hidden_labels)
        if labels.shape != (self.size,):
            raise ValueError("hidden_labels length must equal size")
        if labels.size and not np.isin(labels, (0, 1)).all():
            raise ValueError("hidden_labels must be binary")
        object.__setattr__(self, "hidden_labels", labels)


@dataclass(frozen=True)
class RoundRecord:
    """One mechanism round: what was submitted, released, and drawn.

    ``noise_draws`` holds the magnitudes of any noise variables drawn this
    round (three per round for the randomized ladder, none for deterministic
    mechanisms). ``population_risk`` is NaN until the evaluation oracle fills
    it in.
    """

    round_index: int
    empirical_risk: float
    released: float
    population_risk: float
    updated: bool
    noise_draws: tuple[float, ...] = ()

    def __post_init__(self):
        if self.round_index < 1:
            raise ValueError("round_index starts at 1")
        if len(self.noise_draws) > 3:
            raise ValueError("at most three noise draws per round")


@dataclass(frozen=True)
class Trace:
    """Ordered round records plus the noise bookkeeping needed for audits.

    ``initial_noise`` is the magnitude of the threshold noise drawn before
    round 1 (0.0 for noiseless mechanisms); ``max_noise_magnitude`` must equal
    the maximum over that value and every recorded draw, which
    ``__post_init__`` enforces, as it does the release-vs-updated-flag
    consistency with the convention that round 1 compares against R_0 = 1.
    """

    records: tuple[RoundRecord, ...]
    initial_noise: float = 0.0
    max_noise_magnitude: float = 0.0
    params: object | None = None

    def __post_init__(self):
        prev_released = 1.0
        expected_max = self.initial_noise
        for i, rec in enumerate(self.records):
            if rec.round_index != i + 1:
                raise ValueError("records must be consecutively numbered from 1")
            if rec.updated != (rec.released < prev_released):
                raise ValueError(
                    f"round {rec.round_index}: updated flag inconsistent with releases"
                )
            prev_released = rec.released
            if rec.noise_draws:
                expected_max = max(expected_max, *rec.noise_draws)
        if self.max_noise_magnitude != expected_max:
            raise ValueError(
                "max_noise_magnitude must equal the max over the initial threshold "
                f"noise and all recorded draws ({expected_max}), got {self.max_noise_magnitude}"
            )

    def __len__(self) -> int:
        return len(self.records)

    @property
    def released(self) -> np.ndarray:
        return np.array([r.released for r in self.records])

    @property
    def empirical_risks(self) -> np.ndarray:
        return np.array([r.empirical_risk for r in self.records])

    @property
    def population_risks(self) -> np.ndarray:
        return np.array([r.population_risk for r in self.records])

    @property
    def update_count(self) -> int:
        """Number of rounds whose release strictly undercut the previous one."""
        return sum(1 for r in self.records if r.updated)

    def with_population_risks(self, risks: Sequence[float]) -> "Trace":
        """Copy of this trace with the oracle-side population risks filled in."""
        if len(risks) != len(self.records):
            raise ValueError("need exactly one population risk per round")
        records = tuple(
            replace(rec, population_risk=float(risk))
            for rec, risk in zip(self.records, risks)
        )
        return replace(self, records=records)


def make_random_label_sample(n: int, seed: int | tuple[int, ...]) -> HoldoutSample:
    """Holdout with labels i.i.d. uniform over {0, 1}, deterministic in seed."""
    if n < 1:
        raise ValueError(f"n must be >= 1, got {n}")
    labels = Rng(seed, LABEL_STREAM).integers(0, 2, size=n, dtype=np.uint8)
    return HoldoutSample(size=n, hidden_labels=labels, seed=seed if isinstance(seed, int) else tuple(seed))


def model_from_predictions(predictions, sample: HoldoutSample) -> SubmittedModel:
    """0/1-loss model from binary predictions against the hidden labels.

    The population risk is exactly 1/2: labels are uniform conditional on the
    point, so any fixed prediction rule errs with probability one half.
    """
    preds = np.asarray(predictions)
    if preds.shape != (sample.size,):
        raise ValueError(
            f"predictions length {preds.shape} does not match sample size {sample.size}"
        )
    loss = preds.astype(np.uint8) != sample.hidden_labels
    return SubmittedModel(loss_vector=loss, population_risk=0.5)


def empirical_risk(model: SubmittedModel) -> float:
    """Mean of the per-point losses."""
    return float(np.mean(model.loss_vector))


def _fmt(value: float) -> str:
    return format(float(value), ".17g")


def write_trace_csv(trace: Trace, path, clamp_releases: bool = False) -> None:
    """Serialize a trace as CSV with one row per round.

    Columns: round, empirical_risk, released, population_risk, updated,
    noise1, noise2, noise3 (missing draws are blank). UTF-8, LF endings,
    17 significant digits. ``clamp_releases`` applies the presentation-layer
    clamp into [0, 1] to the released column only; mechanism state is never
    clamped.
    """
    with open(path, "w", encoding="utf-8", newline="") as handle:
        writer = csv.writer(handle, lineterminator="\n")
        writer.writerow(
            ["round", "empirical_risk", "released", "population_risk", "updated",
             "noise1", "noise2", "noise3"]
        )
        for rec in trace.records:
            draws = [_fmt(d) for d in rec.noise_draws]
            draws += [""] * (3 - len(draws))
            released = rec.released
            if clamp_releases:
                released = min(1.0, max(0.0, released))
            writer.writerow(
                [rec.round_index, _fmt(rec.empirical_risk), _fmt(released),
                 _fmt(rec.population_risk), int(rec.updated), *draws]
            )
