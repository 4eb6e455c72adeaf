"""Task recognition across a library of trained interaction models.

For each candidate task the best scaling factor is estimated first, then
the observation's marginal log likelihood under that task is combined with
the task prior; the normalized posterior picks the executed task.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Mapping

import numpy as np
from scipy.special import logsumexp

from .errors import InvalidParameterError, SchemaError
from .interaction import (
    InteractionModel,
    PartialObservation,
    PredictedTrajectory,
    condition,
    observation_log_marginal,
    predict_trajectory,
)
from .phase import DEFAULT_GRID_POINTS, estimate_phase

POSTERIOR_NORM_TOL = 1e-12


@dataclass(frozen=True)
class TaskLibrary:
    """Named interaction models plus task prior probabilities."""

    models: Mapping[str, InteractionModel]
    priors: Mapping[str, float]
    emg_window: int = 0

    def __post_init__(self):
        models = dict(self.models)
        priors = dict(self.priors)
        object.__setattr__(self, "models", models)
        object.__setattr__(self, "priors", priors)
        if not models:
            raise InvalidParameterError("task library must contain at least one task")
        if set(priors) != set(models):
            raise InvalidParameterError("priors must name exactly the library's tasks")
        if any(p <= 0 for p in priors.values()):
            raise InvalidParameterError("task priors must be > 0")
        if abs(sum(priors.values()) - 1.0) > POSTERIOR_NORM_TOL * len(priors):
            raise InvalidParameterError("task priors must sum to 1")
        human = None
        for name, model in models.items():
            signature = tuple(
                (n, r)
                for n, r in zip(model.layout.names, model.layout.roles)
                if r != "robot"
            )
            if human is None:
                human = signature
            elif signature != human:
                raise SchemaError(
                    f"task {name!r} has a different human-channel layout than the others"
                )
        if self.emg_window < 0:
            raise InvalidParameterError("emg_window must be >= 0")

    @classmethod
    def build(cls, models: Mapping[str, InteractionModel], priors=None, emg_window: int = 0):
        """Library with uniform priors unless explicit ones are given."""
        if priors is None:
            priors = {name: 1.0 / len(models) for name in models}
        return cls(models, priors, emg_window)

    @property
    def task_names(self) -> tuple:
        return tuple(self.models)

    @property
    def human_channels(self) -> tuple:
        first = next(iter(self.models.values()))
        return first.layout.human_names


@dataclass(frozen=True)
class RecognitionResult:
    """Chosen task plus the evidence behind the choice."""

    chosen: str
    posteriors: Mapping[str, float]
    alphas: Mapping[str, float]
    log_likelihoods: Mapping[str, float]

    def __post_init__(self):
        posteriors = dict(self.posteriors)
        object.__setattr__(self, "posteriors", posteriors)
        object.__setattr__(self, "alphas", dict(self.alphas))
        object.__setattr__(self, "log_likelihoods", dict(self.log_likelihoods))
        total = sum(posteriors.values())
        if abs(total - 1.0) > POSTERIOR_NORM_TOL * max(1, len(posteriors)):
            raise InvalidParameterError(f"posteriors sum to {total!r}, expected 1")
        if posteriors[self.chosen] < max(posteriors.values()):
            raise InvalidParameterError("chosen task does not attain the maximum posterior")


def task_log_likelihood(
    model: InteractionModel, obs: PartialObservation, alpha_star: float
) -> float:
    """Marginal log likelihood of the observation under one task model.

    Shares its implementation with the likelihood term inside the phase
    posterior; a zero-length observation gives 0.
    """
    if alpha_star <= 0:
        raise InvalidParameterError(f"alpha_star must be > 0, got {alpha_star}")
    return observation_log_marginal(model, obs, alpha_star)


def _check_observation_channels(library: TaskLibrary, obs: PartialObservation) -> None:
    allowed = set(library.human_channels)
    unknown = [name for name in obs.observed_channels if name not in allowed]
    if unknown:
        raise SchemaError(
            f"observed channels {sorted(unknown)} are not shared human channels of the library"
        )


def recognize(
    library: TaskLibrary,
    obs: PartialObservation,
    grid_points: int = DEFAULT_GRID_POINTS,
) -> RecognitionResult:
    """Posterior over tasks given partial human observations.

    Per task: estimate the scaling factor, evaluate the likelihood at it,
    weight by the prior and normalize in the log domain.  Ties are broken
    by library insertion order.
    """
    _check_observation_channels(library, obs)
    names = library.task_names
    alphas, logliks = {}, {}
    for name in names:
        model = library.models[name]
        alpha_star, _ = estimate_phase(model, obs, grid_points)
        alphas[name] = alpha_star
        logliks[name] = task_log_likelihood(model, obs, alpha_star)
    scores = np.array([logliks[n] + np.log(library.priors[n]) for n in names])
    log_norm = logsumexp(scores)
    posteriors = {n: float(np.exp(s - log_norm)) for n, s in zip(names, scores)}
    best = names[int(np.argmax(scores))]
    return RecognitionResult(best, posteriors, alphas, logliks)


def predict_for_task(
    library: TaskLibrary,
    obs: PartialObservation,
    result: RecognitionResult,
    t_out: int | None = None,
) -> PredictedTrajectory:
    """Condition the chosen task's model on the observation and read it out."""
    model = library.models[result.chosen]
    posterior = condition(model, obs, result.alphas[result.chosen])
    return predict_trajectory(posterior, model, t_out or model.basis.t_norm)
