"""Lossless model and report serialization.

Documents are plain JSON with a ``format_version`` field.  Floats are
written with their shortest round-trip representation, so loading a
document reproduces every value bit for bit.
"""

from __future__ import annotations

import json
from pathlib import Path

import numpy as np

from .basis import BasisSystem
from .errors import SchemaError
from .interaction import ChannelLayout, InteractionModel
from .phase import PhasePrior
from .recognition import TaskLibrary

FORMAT_VERSION = 1


def model_to_doc(model: InteractionModel) -> dict:
    return {
        "layout": {
            "names": list(model.layout.names),
            "roles": list(model.layout.roles),
        },
        "basis": {
            "n_basis": model.basis.n_basis,
            "centers": model.basis.centers.tolist(),
            "bandwidth": model.basis.bandwidth,
            "normalized": model.basis.normalized,
            "t_norm": model.basis.t_norm,
        },
        "mu_w": model.mu_w.tolist(),
        "sigma_w": model.sigma_w.tolist(),
        "sigma_y": model.sigma_y.tolist(),
        "phase_prior": {
            "mu_alpha": model.phase_prior.mu_alpha,
            "sigma_alpha": model.phase_prior.sigma_alpha,
            "t_norm_duration": model.phase_prior.t_norm_duration,
        },
    }


def model_from_doc(doc: dict) -> InteractionModel:
    try:
        layout = ChannelLayout(tuple(doc["layout"]["names"]), tuple(doc["layout"]["roles"]))
        b = doc["basis"]
        basis = BasisSystem(
            int(b["n_basis"]),
            np.asarray(b["centers"], dtype=float),
            float(b["bandwidth"]),
            bool(b["normalized"]),
            int(b["t_norm"]),
        )
        prior = PhasePrior(
            float(doc["phase_prior"]["mu_alpha"]),
            float(doc["phase_prior"]["sigma_alpha"]),
            float(doc["phase_prior"]["t_norm_duration"]),
        )
        return InteractionModel(
            layout,
            basis,
            np.asarray(doc["mu_w"], dtype=float),
            np.asarray(doc["sigma_w"], dtype=float),
            np.asarray(doc["sigma_y"], dtype=float),
            prior,
        )
    except KeyError as exc:
        raise SchemaError(f"model document is missing field {exc.args[0]!r}") from None


def library_to_doc(library: TaskLibrary) -> dict:
    return {
        "format_version": FORMAT_VERSION,
        "kind": "task_library",
        "emg_window": library.emg_window,
        "priors": dict(library.priors),
        "tasks": {name: model_to_doc(model) for name, model in library.models.items()},
    }


def library_from_doc(doc: dict) -> TaskLibrary:
    if not isinstance(doc, dict) or doc.get("kind") != "task_library":
        raise SchemaError("document is not a task library")
    version = doc.get("format_version")
    if version != FORMAT_VERSION:
        raise SchemaError(f"unsupported format_version {version!r}")
    try:
        models = {name: model_from_doc(m) for name, m in doc["tasks"].items()}
        priors = {name: float(p) for name, p in doc["priors"].items()}
    except KeyError as exc:
        raise SchemaError(f"library document is missing field {exc.args[0]!r}") from None
    return TaskLibrary(models, priors, int(doc.get("emg_window", 0)))


def dumps(doc: dict) -> str:
    return json.dumps(doc, indent=2)


def loads(text: str) -> dict:
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise SchemaError(f"invalid JSON document: {exc}") from None


def save_library(path, library: TaskLibrary) -> None:
    Path(path).write_text(dumps(library_to_doc(library)), encoding="utf-8")


def load_library(path) -> TaskLibrary:
    return library_from_doc(loads(Path(path).read_text(encoding="utf-8")))
