"""FastAPI application wrapping the core package.

Endpoints are stateless compute wrappers: demonstrations and observations
travel inside the request (CSV text), trained libraries come back as
serialized documents.  A small in-memory registry lets long-lived clients
register a library once and recognize against it by name.
"""

from __future__ import annotations

import numpy as np
from fastapi import FastAPI, Request
from fastapi.responses import JSONResponse

from .. import __version__
from ..data import SynthSpec, demonstration_to_csv, generator_statistics, parse_demonstration_csv, synth_dataset
from ..errors import IPrompsError, IllConditionedError
from ..evaluation import EvalPlan, run_eval
from ..interaction import PredictedTrajectory
from ..pipeline import TrainSettings, prepare_observation, train_task_library
from ..recognition import TaskLibrary, predict_for_task, recognize
from ..serialize import FORMAT_VERSION, library_from_doc, library_to_doc
from .schemas import (
    EvalRequest,
    EvalResponse,
    HealthResponse,
    InferRequest,
    InferResponse,
    LibraryInfo,
    RecognizeRequest,
    RecognizeResponse,
    RegisterLibraryRequest,
    SynthRequest,
    SynthResponse,
    TrainOptions,
    TrainRequest,
    TrainResponse,
)


class ServiceFault(IPrompsError):
    """Request-level error with an HTTP status."""

    def __init__(self, message: str, status: int = 400):
        super().__init__(message)
        self.status = status


def _settings(options: TrainOptions) -> TrainSettings:
    return TrainSettings(
        basis_n=options.basis_n,
        ridge=options.ridge,
        sigma_y=options.sigma_y,
        t_norm=options.t_norm,
        include_emg=options.include_emg,
        sigma_alpha_floor=options.sigma_alpha_floor,
        emg_window=options.emg_window,
    )


def _demos_by_task(files: dict) -> dict:
    grouped: dict = {}
    for relpath, text in sorted(files.items()):
        parts = relpath.replace("\\", "/").split("/")
        if len(parts) < 2 or not parts[0]:
            raise ServiceFault(
                f"file path {relpath!r} must look like '<task_label>/<demo>.csv'", 422
            )
        demo = parse_demonstration_csv(text, label=parts[0])
        grouped.setdefault(parts[0], []).append(demo)
    if not grouped:
        raise ServiceFault("no demonstrations supplied", 422)
    return grouped


def _resolve_library(app: FastAPI, payload: RecognizeRequest) -> TaskLibrary:
    if payload.library is not None:
        return library_from_doc(payload.library)
    if payload.library_name is not None:
        registry = app.state.libraries
        if payload.library_name not in registry:
            raise ServiceFault(f"no registered library named {payload.library_name!r}", 404)
        return registry[payload.library_name]
    raise ServiceFault("request must carry either 'library' or 'library_name'", 422)


def _recognition_response(library: TaskLibrary, payload: RecognizeRequest):
    demo = parse_demonstration_csv(payload.observation_csv)
    obs = prepare_observation(
        demo,
        payload.options.ratio,
        include_emg=payload.options.include_emg,
        noise=payload.options.noise,
        emg_window=library.emg_window,
    )
    result = recognize(library, obs, payload.alpha_grid)
    response = RecognizeResponse(
        chosen=result.chosen,
        posteriors=result.posteriors,
        alphas=result.alphas,
        log_likelihoods=result.log_likelihoods,
        observed_samples=len(obs.samples),
    )
    return response, obs, result


def prediction_to_csv(prediction: PredictedTrajectory, t_out: int) -> str:
    """Prediction CSV: time, 'predicted:' value columns, then std columns."""
    times = np.linspace(0.0, prediction.duration, t_out)
    header = ["time"]
    header += [f"predicted:{r}:{n}" for n, r in zip(prediction.names, prediction.roles)]
    header += [f"predicted_std:{r}:{n}" for n, r in zip(prediction.names, prediction.roles)]
    std = np.sqrt(prediction.variance)
    lines = [",".join(header)]
    for t in range(t_out):
        cells = [repr(float(times[t]))]
        cells += [repr(float(v)) for v in prediction.mean[t]]
        cells += [repr(float(v)) for v in std[t]]
        lines.append(",".join(cells))
    return "\n".join(lines) + "\n"


def create_app() -> FastAPI:
    app = FastAPI(title="ipromps", version=__version__)
    app.state.libraries = {}

    @app.exception_handler(ServiceFault)
    async def _fault(request: Request, exc: ServiceFault):
        return JSONResponse(
            status_code=exc.status,
            content={"error": type(exc).__name__, "message": str(exc)},
        )

    @app.exception_handler(IPrompsError)
    async def _core_error(request: Request, exc: IPrompsError):
        status = 409 if isinstance(exc, IllConditionedError) else 422
        return JSONResponse(
            status_code=status,
            content={"error": type(exc).__name__, "message": str(exc)},
        )

    @app.get("/health", response_model=HealthResponse)
    def health():
        return HealthResponse(status="ok", version=__version__, format_version=FORMAT_VERSION)

    @app.post("/train", response_model=TrainResponse)
    def train(payload: TrainRequest):
        library, summary = train_task_library(
            _demos_by_task(payload.files), _settings(payload.options)
        )
        if payload.register_as:
            app.state.libraries[payload.register_as] = library
        return TrainResponse(library=library_to_doc(library), summary=summary)

    @app.post("/recognize", response_model=RecognizeResponse)
    def recognize_endpoint(payload: RecognizeRequest):
        library = _resolve_library(app, payload)
        response, _, _ = _recognition_response(library, payload)
        return response

    @app.post("/infer", response_model=InferResponse)
    def infer(payload: InferRequest):
        library = _resolve_library(app, payload)
        response, obs, result = _recognition_response(library, payload)
        model = library.models[result.chosen]
        t_out = payload.t_out or model.basis.t_norm
        prediction = predict_for_task(library, obs, result, t_out)
        return InferResponse(
            recognition=response,
            prediction_csv=prediction_to_csv(prediction, t_out),
            duration=prediction.duration,
            channels=list(prediction.names),
        )

    @app.post("/synth", response_model=SynthResponse)
    def synth(payload: SynthRequest):
        spec = SynthSpec(**payload.model_dump())
        train_demos, test_demos = synth_dataset(spec)
        files = {}
        for split, demos in (("train", train_demos), ("test", test_demos)):
            index: dict = {}
            for demo in demos:
                i = index.get(demo.label, 0)
                index[demo.label] = i + 1
                files[f"{split}/{demo.label}/demo_{i:03d}.csv"] = demonstration_to_csv(demo)
        return SynthResponse(files=files, stats=generator_statistics(spec, train_demos))

    @app.post("/eval", response_model=EvalResponse)
    def evaluate(payload: EvalRequest):
        plan = EvalPlan(
            cells=tuple((c.demos_per_task, c.ratio) for c in payload.cells),
            trials_per_task=payload.trials_per_task,
            seed=payload.seed,
            synth=SynthSpec(**payload.synth.model_dump()),
            settings=_settings(payload.train),
            alpha_grid=payload.alpha_grid,
        )
        return EvalResponse(report=run_eval(plan))

    @app.post("/libraries", response_model=LibraryInfo, status_code=201)
    def register_library(payload: RegisterLibraryRequest):
        library = library_from_doc(payload.library)
        app.state.libraries[payload.name] = library
        return LibraryInfo(name=payload.name, tasks=list(library.task_names))

    @app.get("/libraries", response_model=list[LibraryInfo])
    def list_libraries():
        return [
            LibraryInfo(name=name, tasks=list(lib.task_names))
            for name, lib in app.state.libraries.items()
        ]

    @app.get("/libraries/{name}")
    def get_library(name: str):
        if name not in app.state.libraries:
            raise ServiceFault(f"no registered library named {name!r}", 404)
        return library_to_doc(app.state.libraries[name])

    @app.delete("/libraries/{name}", status_code=204)
    def delete_library(name: str):
        if name not in app.state.libraries:
            raise ServiceFault(f"no registered library named {name!r}", 404)
        del app.state.libraries[name]

    return app
