"""Request and response models of the HTTP service."""

from __future__ import annotations

from typing import Optional

from pydantic import BaseModel, Field


class TrainOptions(BaseModel):
    basis_n: int = 20
    ridge: float = 1e-6
    sigma_y: float = 1e-4
    t_norm: int = 100
    include_emg: bool = True
    sigma_alpha_floor: float = 0.05
    emg_window: int = 9


class TrainRequest(BaseModel):
    # relative path "task_label/demo.csv" -> file contents
    files: dict[str, str]
    options: TrainOptions = Field(default_factory=TrainOptions)
    register_as: Optional[str] = None


class TaskSummary(BaseModel):
    demos: int
    mu_alpha: float
    sigma_alpha: float
    nominal_duration: float
    mean_residual_variance: float


class TrainResponse(BaseModel):
    library: dict
    summary: dict[str, TaskSummary]


class ObservationOptions(BaseModel):
    ratio: float = 1.0
    include_emg: bool = True
    noise: Optional[dict[str, float]] = None  # per-role measurement variance


class RecognizeRequest(BaseModel):
    library: Optional[dict] = None
    library_name: Optional[str] = None
    observation_csv: str
    options: ObservationOptions = Field(default_factory=ObservationOptions)
    alpha_grid: int = 100


class RecognizeResponse(BaseModel):
    chosen: str
    posteriors: dict[str, float]
    alphas: dict[str, float]
    log_likelihoods: dict[str, float]
    observed_samples: int


class InferRequest(RecognizeRequest):
    t_out: Optional[int] = None


class InferResponse(BaseModel):
    recognition: RecognizeResponse
    prediction_csv: str
    duration: float
    channels: list[str]


class SynthRequest(BaseModel):
    n_tasks: int = 3
    p: int = 2
    e: int = 2
    j: int = 2
    t_norm: int = 100
    demos_per_task: int = 20
    test_per_task: int = 10
    pose_overlap: float = 1.0
    emg_separation: float = 5.0
    tempo_std: float = 0.1
    noise_std: float = 0.05
    seed: int = 0


class SynthResponse(BaseModel):
    files: dict[str, str]
    stats: dict[str, float]


class EvalCell(BaseModel):
    demos_per_task: int
    ratio: float


class EvalRequest(BaseModel):
    cells: list[EvalCell] = Field(default_factory=lambda: [EvalCell(demos_per_task=20, ratio=0.1)])
    trials_per_task: int = 10
    seed: int = 0
    synth: SynthRequest = Field(default_factory=SynthRequest)
    train: TrainOptions = Field(default_factory=TrainOptions)
    alpha_grid: int = 100


class EvalResponse(BaseModel):
    report: dict


class RegisterLibraryRequest(BaseModel):
    name: str
    library: dict


class LibraryInfo(BaseModel):
    name: str
    tasks: list[str]


class HealthResponse(BaseModel):
    status: str
    version: str
    format_version: int
