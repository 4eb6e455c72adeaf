"""Recognition accuracy grid over synthetic tasks, with and without EMG.

For every grid cell (training demos per task, observation ratio) two
libraries are trained on the same synthetic data, one with the EMG
channels and one restricted to motion, and both recognize the same test
episodes.  The report carries per-cell accuracies, per-trial records and
the two aggregate numbers: mean accuracy per condition and the count of
cells where the EMG condition is at least as accurate.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from typing import Sequence

import numpy as np

from .data import SynthSpec, synth_dataset
from .errors import InvalidParameterError
from .pipeline import TrainSettings, prepare_observation, train_task_library
from .recognition import recognize

REPORT_FORMAT_VERSION = 1


def aggregate_accuracies(without_emg: Sequence[float], with_emg: Sequence[float]) -> dict:
    """Collapse paired per-cell accuracies into the report's two aggregates.

    A cell counts as a win when the EMG accuracy is at least the
    motion-only accuracy.  Means are rounded to three decimals, matching
    how they are reported.
    """
    if len(without_emg) != len(with_emg):
        raise InvalidParameterError("accuracy lists must pair up cell by cell")
    if not with_emg:
        return {"mean_without_emg": None, "mean_with_emg": None, "wins": 0, "cells": 0}
    wins = sum(w >= wo for wo, w in zip(without_emg, with_emg))
    return {
        "mean_without_emg": round(float(np.mean(without_emg)), 3),
        "mean_with_emg": round(float(np.mean(with_emg)), 3),
        "wins": int(wins),
        "cells": len(with_emg),
    }


@dataclass(frozen=True)
class EvalPlan:
    """What to evaluate: grid cells, trial count and generator settings."""

    cells: tuple = ((20, 0.1),)
    trials_per_task: int = 10
    seed: int = 0
    synth: SynthSpec = field(default_factory=SynthSpec)
    settings: TrainSettings = field(default_factory=TrainSettings)
    alpha_grid: int = 100

    def __post_init__(self):
        cells = tuple((int(d), float(r)) for d, r in self.cells)
        object.__setattr__(self, "cells", cells)
        if not cells:
            raise InvalidParameterError("need at least one grid cell")
        if any(d < 1 or not 0.0 <= r <= 1.0 for d, r in cells):
            raise InvalidParameterError("cells must have demos >= 1 and ratio in [0, 1]")
        if self.trials_per_task < 0:
            raise InvalidParameterError("trials_per_task must be >= 0")


def _group_by_task(demos):
    grouped: dict = {}
    for demo in demos:
        grouped.setdefault(demo.label, []).append(demo)
    return grouped


def run_eval(plan: EvalPlan) -> dict:
    """Run the accuracy grid and assemble the report document."""
    grid_entries = []
    trial_records = []
    without_acc, with_acc = [], []
    for cell_index, (demos_per_task, ratio) in enumerate(plan.cells):
        spec = replace(
            plan.synth,
            demos_per_task=demos_per_task,
            test_per_task=plan.trials_per_task,
            seed=plan.seed + cell_index,
        )
        train, test = synth_dataset(spec)
        by_task = _group_by_task(train)
        libraries = {}
        for emg_flag in (False, True):
            settings = replace(plan.settings, include_emg=emg_flag, t_norm=spec.t_norm)
            libraries[emg_flag], _ = train_task_library(by_task, settings)
        # the harness knows the generator's measurement noise; observations
        # carry it so likelihoods stay calibrated
        noise_var = max(spec.noise_std**2, 1e-8)
        obs_noise = {"human_pose": noise_var, "human_emg": noise_var}
        counts: dict = {}
        for emg_flag in (False, True):
            library = libraries[emg_flag]
            for episode in test:
                obs = prepare_observation(
                    episode,
                    ratio,
                    include_emg=emg_flag,
                    noise=obs_noise,
                    emg_window=library.emg_window,
                )
                result = recognize(library, obs, plan.alpha_grid)
                true = episode.label
                key = (true, emg_flag)
                correct, total = counts.get(key, (0, 0))
                counts[key] = (correct + (result.chosen == true), total + 1)
                trial_records.append(
                    {
                        "demos_per_task": demos_per_task,
                        "ratio": ratio,
                        "with_emg": emg_flag,
                        "true_task": true,
                        "chosen_task": result.chosen,
                        "posterior": result.posteriors[result.chosen],
                        "alpha": result.alphas[result.chosen],
                    }
                )
        if plan.trials_per_task > 0:
            for task in sorted({t for t, _ in counts}):
                accuracies = {}
                for emg_flag in (False, True):
                    correct, total = counts[(task, emg_flag)]
                    accuracy = correct / total
                    accuracies[emg_flag] = accuracy
                    grid_entries.append(
                        {
                            "demos_per_task": demos_per_task,
                            "ratio": ratio,
                            "with_emg": emg_flag,
                            "task": task,
                            "correct": correct,
                            "total": total,
                            "accuracy": accuracy,
                        }
                    )
                without_acc.append(accuracies[False])
                with_acc.append(accuracies[True])
    return {
        "format_version": REPORT_FORMAT_VERSION,
        "kind": "eval_report",
        "seed": plan.seed,
        "config": {
            "cells": [list(c) for c in plan.cells],
            "trials_per_task": plan.trials_per_task,
            "alpha_grid": plan.alpha_grid,
            "synth": {
                "n_tasks": plan.synth.n_tasks,
                "p": plan.synth.p,
                "e": plan.synth.e,
                "j": plan.synth.j,
                "t_norm": plan.synth.t_norm,
                "pose_overlap": plan.synth.pose_overlap,
                "emg_separation": plan.synth.emg_separation,
                "tempo_std": plan.synth.tempo_std,
                "noise_std": plan.synth.noise_std,
            },
            "train": {
                "basis_n": plan.settings.basis_n,
                "ridge": plan.settings.ridge,
                "sigma_y": plan.settings.sigma_y,
                "sigma_alpha_floor": plan.settings.sigma_alpha_floor,
                "emg_window": plan.settings.emg_window,
            },
        },
        "grid": grid_entries,
        "trials": trial_records,
        "aggregate": aggregate_accuracies(without_acc, with_acc),
    }
