"""Interaction movement primitives with EMG-augmented observations.

Learns joint human-robot trajectory distributions from demonstrations,
conditions them on partial human observations to predict robot motion,
estimates temporal scaling and recognizes which of several tasks is being
executed.  Ships as a library, an HTTP service and a CLI client.
"""

__version__ = "0.1.0"

from .basis import BasisSystem, basis_matrix, basis_row, fit_weights, make_basis
from .data import (
    Demonstration,
    SynthSpec,
    load_dataset,
    load_demonstrations,
    preprocess_emg,
    resample,
    synth_dataset,
    truncate_observation,
)
from .errors import (
    DomainError,
    IllConditionedError,
    InvalidParameterError,
    IPrompsError,
    ParseError,
    SchemaError,
)
from .interaction import (
    ChannelLayout,
    InteractionModel,
    PartialObservation,
    PosteriorModel,
    PredictedTrajectory,
    assemble_state,
    condition,
    observation_matrix,
    predict_trajectory,
    train_interaction,
)
from .phase import PhasePrior, estimate_phase, fit_phase_prior, phase_log_posterior
from .promp import PrompParams, marginal_at, train_promp
from .recognition import (
    RecognitionResult,
    TaskLibrary,
    predict_for_task,
    recognize,
    task_log_likelihood,
)

__all__ = [
    "__version__",
    "BasisSystem",
    "ChannelLayout",
    "Demonstration",
    "DomainError",
    "IPrompsError",
    "IllConditionedError",
    "InteractionModel",
    "InvalidParameterError",
    "ParseError",
    "PartialObservation",
    "PhasePrior",
    "PosteriorModel",
    "PredictedTrajectory",
    "PrompParams",
    "RecognitionResult",
    "SchemaError",
    "SynthSpec",
    "TaskLibrary",
    "assemble_state",
    "basis_matrix",
    "basis_row",
    "condition",
    "estimate_phase",
    "fit_phase_prior",
    "fit_weights",
    "load_dataset",
    "load_demonstrations",
    "make_basis",
    "marginal_at",
    "observation_matrix",
    "phase_log_posterior",
    "predict_for_task",
    "predict_trajectory",
    "preprocess_emg",
    "recognize",
    "resample",
    "synth_dataset",
    "task_log_likelihood",
    "train_interaction",
    "train_promp",
    "truncate_observation",
]
