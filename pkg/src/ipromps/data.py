"""Demonstration ingestion, alignment, EMG preprocessing and synthesis.

CSV schema
----------
UTF-8, first header column ``time`` (seconds, strictly increasing), every
other header ``role:name`` with role one of ``human_pose``, ``human_emg``
or ``robot``.  Decimal point ``.``; blank lines are forbidden.  A dataset
directory holds one sub-directory per task label with one CSV file per
demonstration: ``<root>/<task_label>/<demo_id>.csv``.

The synthetic generator replaces hardware recordings with a desk-scale
analog: tasks share a smooth random pose family (fully shared when
``pose_overlap`` is 1), EMG channels get task-specific activation offsets
separated in units of the within-task spread, and robot channels are fixed
linear mixtures of the human latents so cross-channel correlation is
guaranteed to be learnable.
"""

from __future__ import annotations

import io
from dataclasses import dataclass
from pathlib import Path
from typing import Mapping

import numpy as np

from .errors import InvalidParameterError, ParseError, SchemaError
from .interaction import ALL_ROLES, HUMAN_ROLES, ROLE_EMG, ROLE_POSE, ROLE_ROBOT, PartialObservation

DEFAULT_T_NORM = 100
DEFAULT_EMG_WINDOW = 9
DEFAULT_OBS_NOISE = 1e-4

_GEN_BASES = 8
_POSE_WITHIN = 0.25   # per-weight std of within-task pose variation
_EMG_WITHIN = 0.10    # per-demo std of the EMG activation offset


@dataclass
class Demonstration:
    """One multichannel recording with per-channel roles.

    ``times`` is optional; when absent the channels are taken to be
    uniformly sampled at ``sample_period``.
    """

    channels: Mapping[str, np.ndarray]
    roles: Mapping[str, str]
    sample_period: float = 1.0
    label: str | None = None
    times: np.ndarray | None = None

    def __post_init__(self):
        self.channels = {k: np.asarray(v, dtype=float) for k, v in self.channels.items()}
        self.roles = dict(self.roles)
        if not self.channels:
            raise SchemaError("demonstration has no channels")
        lengths = {v.size for v in self.channels.values()}
        if len(lengths) != 1:
            raise SchemaError(f"channel lengths differ: {sorted(lengths)}")
        if self.length < 2:
            raise SchemaError("demonstration needs at least 2 samples")
        if self.sample_period <= 0:
            raise InvalidParameterError(f"sample_period must be > 0, got {self.sample_period}")
        if set(self.roles) != set(self.channels):
            raise SchemaError("roles must name exactly the demonstration's channels")
        for name, role in self.roles.items():
            if role not in ALL_ROLES:
                raise SchemaError(f"channel {name!r} has unknown role {role!r}")
        if self.times is not None:
            self.times = np.asarray(self.times, dtype=float)
            if self.times.size != self.length or np.any(np.diff(self.times) <= 0):
                raise SchemaError("times must be strictly increasing and match channel length")

    @property
    def length(self) -> int:
        return next(iter(self.channels.values())).size

    @property
    def duration(self) -> float:
        return self.length * self.sample_period

    def names_for_role(self, role: str) -> list:
        return [n for n in self.channels if self.roles[n] == role]


# ---------------------------------------------------------------------------
# CSV reading / writing


def read_timeseries_csv(text: str):
    """Parse a time-series CSV into (column names, time array, value matrix).

    Shared low-level reader; role validation happens in the callers.
    """
    lines = text.splitlines()
    if not lines:
        raise SchemaError("empty file (line 1)")
    header = [h.strip() for h in lines[0].split(",")]
    if not header or header[0] != "time":
        raise SchemaError("header must start with a 'time' column (line 1)")
    if len(header) < 2:
        raise SchemaError("header names no data columns (line 1)")
    if len(set(header)) != len(header):
        raise SchemaError("duplicate column names (line 1)")
    rows = []
    for lineno, line in enumerate(lines[1:], start=2):
        if not line.strip():
            raise SchemaError(f"blank line (line {lineno})")
        cells = line.split(",")
        if len(cells) != len(header):
            raise SchemaError(
                f"expected {len(header)} cells, got {len(cells)} (line {lineno})"
            )
        parsed = []
        for col, cell in enumerate(cells, start=1):
            try:
                parsed.append(float(cell))
            except ValueError:
                raise ParseError(
                    f"cell is not a number (line {lineno}, column {col}): {cell.strip()!r}"
                ) from None
        rows.append(parsed)
    if len(rows) < 2:
        raise SchemaError("need at least 2 data rows")
    data = np.array(rows)
    time = data[:, 0]
    if np.any(np.diff(time) <= 0):
        raise SchemaError("time column must be strictly increasing")
    return header[1:], time, data[:, 1:]


def parse_demonstration_csv(text: str, label: str | None = None) -> Demonstration:
    """Parse one demonstration file; roles come from the header."""
    columns, time, values = read_timeseries_csv(text)
    channels, roles = {}, {}
    for i, col in enumerate(columns):
        role, _, name = col.partition(":")
        if not name or role not in ALL_ROLES:
            raise SchemaError(
                f"column {col!r} must look like 'role:name' with role in {ALL_ROLES} (line 1)"
            )
        if name in channels:
            raise SchemaError(f"duplicate channel name {name!r} (line 1)")
        channels[name] = values[:, i]
        roles[name] = role
    period = float(time[-1] - time[0]) / (time.size - 1)
    return Demonstration(channels, roles, period, label, times=time)


def format_float(x: float) -> str:
    return repr(float(x))


def demonstration_to_csv(demo: Demonstration) -> str:
    """Serialize a demonstration back to the CSV schema (lossless floats)."""
    names = [n for role in ALL_ROLES for n in demo.names_for_role(role)]
    header = ["time"] + [f"{demo.roles[n]}:{n}" for n in names]
    times = (
        demo.times
        if demo.times is not None
        else np.arange(demo.length) * demo.sample_period
    )
    out = io.StringIO()
    out.write(",".join(header) + "\n")
    for t in range(demo.length):
        row = [format_float(times[t])] + [format_float(demo.channels[n][t]) for n in names]
        out.write(",".join(row) + "\n")
    return out.getvalue()


def load_demonstrations(path) -> list:
    """Load one file, or every ``*.csv`` directly inside a directory.

    An empty directory yields an empty list; the caller decides whether
    that is an error.
    """
    path = Path(path)
    if path.is_file():
        return [parse_demonstration_csv(path.read_text(encoding="utf-8"))]
    if not path.is_dir():
        raise SchemaError(f"no such file or directory: {path}")
    demos = []
    for file in sorted(path.glob("*.csv")):
        try:
            demos.append(parse_demonstration_csv(file.read_text(encoding="utf-8")))
        except (SchemaError, ParseError) as exc:
            raise type(exc)(f"{file}: {exc}") from None
    return demos


def load_dataset(root) -> dict:
    """Load ``<root>/<task_label>/*.csv`` into a label -> demos mapping."""
    root = Path(root)
    if not root.is_dir():
        raise SchemaError(f"dataset root is not a directory: {root}")
    dataset = {}
    for task_dir in sorted(p for p in root.iterdir() if p.is_dir()):
        demos = load_demonstrations(task_dir)
        for demo in demos:
            demo.label = task_dir.name
        dataset[task_dir.name] = demos
    return dataset


def save_dataset(root, demos_by_task: Mapping[str, list]) -> None:
    root = Path(root)
    for task, demos in demos_by_task.items():
        task_dir = root / task
        task_dir.mkdir(parents=True, exist_ok=True)
        for i, demo in enumerate(demos):
            (task_dir / f"demo_{i:03d}.csv").write_text(
                demonstration_to_csv(demo), encoding="utf-8"
            )


# ---------------------------------------------------------------------------
# Alignment and preprocessing


def resample(demo: Demonstration, t_norm: int):
    """Linearly interpolate every channel onto t_norm uniform samples.

    Returns the aligned demonstration and the raw duration of the original
    (length times sample period), which feeds the scaling-factor prior.
    Endpoints are preserved exactly.
    """
    if t_norm < 2:
        raise InvalidParameterError(f"t_norm must be >= 2, got {t_norm}")
    if demo.times is not None:
        src = (demo.times - demo.times[0]) / (demo.times[-1] - demo.times[0])
    else:
        src = np.linspace(0.0, 1.0, demo.length)
    dst = np.linspace(0.0, 1.0, t_norm)
    channels = {n: np.interp(dst, src, v) for n, v in demo.channels.items()}
    duration = demo.duration
    aligned = Demonstration(
        channels, dict(demo.roles), duration / t_norm, demo.label
    )
    return aligned, duration


def preprocess_emg(raw, window: int = DEFAULT_EMG_WINDOW) -> np.ndarray:
    """Full-wave rectification followed by a centered moving average.

    Edge positions use shrunken windows, so the output has the input's
    length and is nonnegative everywhere.
    """
    x = np.abs(np.asarray(raw, dtype=float))
    if window < 1:
        raise InvalidParameterError(f"window must be >= 1, got {window}")
    if window > x.size:
        raise InvalidParameterError(
            f"window ({window}) larger than the signal ({x.size})"
        )
    lo_half, hi_half = (window - 1) // 2, window // 2
    csum = np.concatenate([[0.0], np.cumsum(x)])
    idx = np.arange(x.size)
    lo = np.maximum(idx - lo_half, 0)
    hi = np.minimum(idx + hi_half + 1, x.size)
    return (csum[hi] - csum[lo]) / (hi - lo)


def envelope_emg_channels(demo: Demonstration, window: int) -> Demonstration:
    """Apply the EMG envelope to every EMG channel; other channels pass through.

    ``window == 0`` means raw passthrough.  The window shrinks to the signal
    length for very short recordings.
    """
    if window <= 0:
        return demo
    channels = dict(demo.channels)
    for name in demo.names_for_role(ROLE_EMG):
        channels[name] = preprocess_emg(channels[name], min(window, demo.length))
    return Demonstration(channels, dict(demo.roles), demo.sample_period, demo.label, demo.times)


def truncate_observation(
    demo: Demonstration,
    ratio: float,
    include_emg: bool = True,
    noise: Mapping[str, float] | None = None,
) -> PartialObservation:
    """Keep the first floor(ratio * T) samples as a partial observation.

    Robot channels are always dropped; EMG channels are dropped too when
    ``include_emg`` is false (the motion-only baseline).  ``noise`` maps
    roles to measurement variances.
    """
    if not 0.0 <= ratio <= 1.0:
        raise InvalidParameterError(f"ratio must be in [0, 1], got {ratio}")
    keep = int(np.floor(ratio * demo.length))
    roles = [ROLE_POSE, ROLE_EMG] if include_emg else [ROLE_POSE]
    names = [n for r in roles for n in demo.names_for_role(r)]
    if demo.times is not None:
        rel = demo.times[:keep] - demo.times[0]
    else:
        rel = np.arange(keep) * demo.sample_period
    samples = tuple(
        (float(rel[i]), {n: float(demo.channels[n][i]) for n in names})
        for i in range(keep)
    )
    noise = dict(noise or {})
    per_channel = {
        n: float(noise.get(demo.roles[n], DEFAULT_OBS_NOISE)) for n in names
    }
    duration = float(rel[-1]) + demo.sample_period if keep else 0.0
    return PartialObservation(samples, per_channel, duration)


# ---------------------------------------------------------------------------
# Synthetic dataset generator


@dataclass(frozen=True)
class SynthSpec:
    """Configuration of the synthetic task generator.

    ``pose_overlap`` = 1 makes the pose generators identical across tasks;
    ``emg_separation`` is the gap between adjacent task EMG means in units
    of the within-task per-timestep spread.  Identical seeds give
    bit-identical datasets.
    """

    n_tasks: int = 3
    p: int = 2
    e: int = 2
    j: int = 2
    t_norm: int = DEFAULT_T_NORM
    demos_per_task: int = 20
    test_per_task: int = 10
    pose_overlap: float = 1.0
    emg_separation: float = 5.0
    tempo_std: float = 0.1
    noise_std: float = 0.05
    seed: int = 0

    def __post_init__(self):
        if min(self.n_tasks, self.p, self.j, self.t_norm, self.demos_per_task) < 1:
            raise InvalidParameterError("n_tasks, p, j, t_norm and demos_per_task must be >= 1")
        if self.e < 0 or self.test_per_task < 0:
            raise InvalidParameterError("e and test_per_task must be >= 0")
        if not 0.0 <= self.pose_overlap <= 1.0:
            raise InvalidParameterError(f"pose_overlap must be in [0, 1], got {self.pose_overlap}")
        if self.emg_separation < 0 or self.tempo_std < 0 or self.noise_std < 0:
            raise InvalidParameterError("emg_separation, tempo_std and noise_std must be >= 0")
        if self.t_norm < 4:
            raise InvalidParameterError("t_norm must be >= 4")

    @property
    def channel_names(self) -> dict:
        return {
            ROLE_POSE: [f"pose{i}" for i in range(self.p)],
            ROLE_EMG: [f"emg{i}" for i in range(self.e)],
            ROLE_ROBOT: [f"joint{i}" for i in range(self.j)],
        }

    def emg_within_std(self) -> float:
        """Designed within-task per-timestep std of an EMG channel."""
        return float(np.hypot(_EMG_WITHIN, self.noise_std))


def _generator_curves(t_norm: int) -> np.ndarray:
    """Smooth normalized bump curves the latent trajectories are built from."""
    phases = np.linspace(0.0, 1.0, t_norm)
    centers = np.linspace(0.0, 1.0, _GEN_BASES)
    width = (centers[1] - centers[0]) ** 2 * 2.0
    mat = np.exp(-((phases[:, None] - centers[None, :]) ** 2) / (2.0 * width))
    return mat / mat.sum(axis=1, keepdims=True)


def _family(spec: SynthSpec):
    """Task-level generator parameters, fixed by the seed."""
    rng = np.random.default_rng([spec.seed, 7])
    shared_pose = rng.normal(size=(spec.p, _GEN_BASES))
    task_pose = rng.normal(size=(spec.n_tasks, spec.p, _GEN_BASES))
    pose_weights = (
        spec.pose_overlap * shared_pose[None, :, :]
        + (1.0 - spec.pose_overlap) * task_pose
    )
    emg_base = rng.normal(size=(spec.e, _GEN_BASES)) * 0.3
    gap = spec.emg_separation * spec.emg_within_std()
    emg_offsets = np.arange(spec.n_tasks, dtype=float) * gap
    mix = rng.normal(size=(spec.n_tasks, spec.j, spec.p + spec.e))
    mix /= np.sqrt(spec.p + spec.e)
    return pose_weights, emg_base, emg_offsets, mix


def synth_reference_curves(spec: SynthSpec) -> dict:
    """Per-task generator mean curves, without any sampled variation.

    Arrays are (n_tasks, t_norm, channels); used by the realized-statistics
    report and by tests that need the true task means.
    """
    pose_weights, emg_base, emg_offsets, mix = _family(spec)
    curves = _generator_curves(spec.t_norm)
    pose = np.einsum("tc,kpc->ktp", curves, pose_weights)
    emg_shape = curves @ emg_base.T + 1.0 if spec.e else np.zeros((spec.t_norm, 0))
    emg = emg_shape[None, :, :] + emg_offsets[:, None, None] * np.ones((1, 1, spec.e))
    human = np.concatenate([pose, emg], axis=2)
    robot = np.einsum("kjh,kth->ktj", mix, human)
    return {"pose": pose, "emg": emg, "robot": robot}


def _synth_demo(spec: SynthSpec, family, task: int, index: int, test: bool) -> Demonstration:
    pose_weights, emg_base, emg_offsets, mix = family
    rng = np.random.default_rng([spec.seed, 1 if test else 0, task, index])
    curves = _generator_curves(spec.t_norm)
    w = pose_weights[task] + rng.normal(size=(spec.p, _GEN_BASES)) * _POSE_WITHIN
    pose = curves @ w.T
    if spec.e:
        activation = emg_offsets[task] + rng.normal(size=spec.e) * _EMG_WITHIN
        emg = curves @ emg_base.T + 1.0 + activation[None, :]
    else:
        emg = np.zeros((spec.t_norm, 0))
    human = np.concatenate([pose, emg], axis=1)
    robot = human @ mix[task].T
    latent = np.concatenate([human, robot], axis=1)
    alpha = 1.0
    if spec.tempo_std > 0:
        alpha = float(np.clip(rng.normal(1.0, spec.tempo_std), 0.5, 2.0))
    t_out = max(4, int(round(alpha * spec.t_norm)))
    src = np.linspace(0.0, 1.0, spec.t_norm)
    dst = np.linspace(0.0, 1.0, t_out)
    stretched = np.column_stack([np.interp(dst, src, latent[:, c]) for c in range(latent.shape[1])])
    if spec.noise_std > 0:
        stretched = stretched + rng.normal(size=stretched.shape) * spec.noise_std
    names = spec.channel_names
    ordered = names[ROLE_POSE] + names[ROLE_EMG] + names[ROLE_ROBOT]
    roles = {n: r for r in ALL_ROLES for n in names[r]}
    channels = {n: stretched[:, i] for i, n in enumerate(ordered)}
    return Demonstration(channels, roles, 1.0, f"task{task}")


def synth_dataset(spec: SynthSpec):
    """Generate labelled (train, test) demonstration lists.

    Each demonstration gets its own random substream derived from the seed,
    the task index and the demo index, so output is bit-identical for a
    fixed seed regardless of generation order.
    """
    family = _family(spec)
    train = [
        _synth_demo(spec, family, k, i, test=False)
        for k in range(spec.n_tasks)
        for i in range(spec.demos_per_task)
    ]
    test = [
        _synth_demo(spec, family, k, i, test=True)
        for k in range(spec.n_tasks)
        for i in range(spec.test_per_task)
    ]
    return train, test


def generator_statistics(spec: SynthSpec, demos) -> dict:
    """Realized separation statistics of a generated sample.

    Compares the true generator mean gaps against the within-task spread
    estimated from the demos (phase-aligned first).  Gaps are "per
    timestep": the mean over phases and channels of the largest (pose) or
    adjacent (EMG) inter-task mean difference, divided by the pooled
    within-task standard deviation.
    """
    ref = synth_reference_curves(spec)
    aligned: dict = {}
    for demo in demos:
        aligned.setdefault(demo.label, []).append(resample(demo, spec.t_norm)[0])
    names = spec.channel_names

    def stack(role_names, demo_list):
        return np.stack(
            [np.column_stack([d.channels[n] for n in role_names]) for d in demo_list]
        )

    stats = {}
    for role, key in ((ROLE_POSE, "pose"), (ROLE_EMG, "emg")):
        if not names[role]:
            continue
        per_task = [
            stack(names[role], aligned[f"task{k}"]) for k in range(spec.n_tasks)
        ]
        pooled_var = float(np.mean([arr.var(axis=0, ddof=1) for arr in per_task]))
        pooled_std = np.sqrt(pooled_var)
        means = ref[key]
        if spec.n_tasks >= 2:
            if key == "pose":
                gaps = [
                    np.abs(means[a] - means[b])
                    for a in range(spec.n_tasks)
                    for b in range(a + 1, spec.n_tasks)
                ]
                gap = float(np.max(gaps, axis=0).mean())
            else:
                gaps = [np.abs(means[k + 1] - means[k]) for k in range(spec.n_tasks - 1)]
                gap = float(np.mean(gaps))
        else:
            gap = 0.0
        stats[f"{key}_gap_over_within_std"] = gap / pooled_std if pooled_std > 0 else 0.0
        stats[f"{key}_within_std"] = pooled_std
    return stats
