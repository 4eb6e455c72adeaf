"""End-to-end wiring: demonstrations in, trained library / observations out.

This is the glue the service endpoints and the evaluation grid share: EMG
envelope preprocessing, time alignment, per-task training with a fitted
scaling-factor prior, and prefix truncation of test episodes.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Mapping, Sequence

import numpy as np

from .basis import basis_matrix, fit_weights, make_basis
from .data import (
    DEFAULT_EMG_WINDOW,
    DEFAULT_T_NORM,
    Demonstration,
    envelope_emg_channels,
    resample,
    truncate_observation,
)
from .errors import InvalidParameterError
from .interaction import ChannelLayout, PartialObservation, train_interaction
from .phase import DEFAULT_SIGMA_FLOOR, fit_phase_prior
from .recognition import TaskLibrary


@dataclass(frozen=True)
class TrainSettings:
    """Knobs of the training pipeline; defaults match the CLI defaults."""

    basis_n: int = 20
    ridge: float = 1e-6
    sigma_y: float = 1e-4
    t_norm: int = DEFAULT_T_NORM
    include_emg: bool = True
    sigma_alpha_floor: float = DEFAULT_SIGMA_FLOOR
    emg_window: int = DEFAULT_EMG_WINDOW


def layout_from_demo(demo: Demonstration, include_emg: bool = True) -> ChannelLayout:
    """Channel layout implied by a demonstration, optionally without EMG."""
    roles = dict(demo.roles)
    if not include_emg:
        roles = {n: r for n, r in roles.items() if r != "human_emg"}
    return ChannelLayout.from_roles(list(roles), roles)


def _strip_emg(demo: Demonstration) -> Demonstration:
    keep = {n: v for n, v in demo.channels.items() if demo.roles[n] != "human_emg"}
    roles = {n: demo.roles[n] for n in keep}
    return Demonstration(keep, roles, demo.sample_period, demo.label, demo.times)


def mean_fit_residual_variance(basis, demos_aligned, layout, ridge) -> float:
    """Average squared reconstruction residual per sample, across channels."""
    psi = basis_matrix(basis, np.linspace(0.0, 1.0, basis.t_norm))
    total, count = 0.0, 0
    for demo in demos_aligned:
        for name in layout.names:
            y = demo.channels[name]
            w = fit_weights(basis, y, ridge)
            total += float(np.mean((psi @ w - y) ** 2))
            count += 1
    return total / count if count else 0.0


def train_task_library(
    demos_by_task: Mapping[str, Sequence[Demonstration]],
    settings: TrainSettings = TrainSettings(),
    priors: Mapping[str, float] | None = None,
):
    """Train one interaction model per task and bundle them into a library.

    Per task: EMG envelope (unless disabled), resample to t_norm, fit the
    scaling-factor prior from the raw durations (nominal duration is their
    mean) and fit the joint weight distribution.  Returns the library and a
    per-task summary dict.
    """
    if not demos_by_task:
        raise InvalidParameterError("no tasks to train on")
    basis = make_basis(settings.basis_n, t_norm=settings.t_norm)
    models, summary = {}, {}
    for task in demos_by_task:
        demos = list(demos_by_task[task])
        if not demos:
            raise InvalidParameterError(f"no demonstrations for task {task!r}")
        if not settings.include_emg:
            demos = [_strip_emg(d) for d in demos]
        demos = [envelope_emg_channels(d, settings.emg_window) for d in demos]
        aligned, durations = [], []
        for demo in demos:
            a, duration = resample(demo, settings.t_norm)
            aligned.append(a)
            durations.append(duration)
        layout = layout_from_demo(demos[0], include_emg=True)
        nominal = float(np.mean(durations))
        prior = fit_phase_prior(durations, nominal, settings.sigma_alpha_floor)
        model = train_interaction(
            aligned,
            layout,
            basis,
            sigma_y=settings.sigma_y,
            ridge=settings.ridge,
            phase_prior=prior,
        )
        models[task] = model
        summary[task] = {
            "demos": len(demos),
            "mu_alpha": prior.mu_alpha,
            "sigma_alpha": prior.sigma_alpha,
            "nominal_duration": nominal,
            "mean_residual_variance": mean_fit_residual_variance(
                basis, aligned, layout, settings.ridge
            ),
        }
    library = TaskLibrary.build(
        models, priors, emg_window=settings.emg_window if settings.include_emg else 0
    )
    return library, summary


def prepare_observation(
    demo: Demonstration,
    ratio: float,
    include_emg: bool = True,
    noise: Mapping[str, float] | None = None,
    emg_window: int = 0,
) -> PartialObservation:
    """Envelope the EMG channels like training did, then truncate a prefix."""
    if include_emg and emg_window > 0:
        demo = envelope_emg_channels(demo, emg_window)
    return truncate_observation(demo, ratio, include_emg=include_emg, noise=noise)
