"""Joint human-robot movement model with EMG-augmented observations.

The state at each time step concatenates human pose channels, human EMG
channels and robot joint channels, in that block order.  One weight vector
per demonstration stacks the per-channel basis weights, and a single
Gaussian over those stacked vectors captures the cross-channel
correlations.  Conditioning that Gaussian on a handful of partially
observed human samples (a Kalman-style measurement update on the weights)
is what turns early human motion into a full robot trajectory prediction.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import TYPE_CHECKING, Mapping, Sequence

import numpy as np
import scipy.linalg

from .basis import BasisSystem, basis_matrix, basis_row, fit_weights
from .errors import IllConditionedError, InvalidParameterError, SchemaError
from .promp import check_covariance, weight_moments

if TYPE_CHECKING:  # pragma: no cover
    from .data import Demonstration
    from .phase import PhasePrior

ROLE_POSE = "human_pose"
ROLE_EMG = "human_emg"
ROLE_ROBOT = "robot"
HUMAN_ROLES = (ROLE_POSE, ROLE_EMG)
ALL_ROLES = (ROLE_POSE, ROLE_EMG, ROLE_ROBOT)

# keeps the innovation covariance invertible even for "noiseless" observations
OBS_NOISE_FLOOR = 1e-8


@dataclass(frozen=True)
class ChannelLayout:
    """Ordered channel names and roles; pose block, then EMG, then robot."""

    names: tuple
    roles: tuple

    def __post_init__(self):
        names = tuple(self.names)
        roles = tuple(self.roles)
        object.__setattr__(self, "names", names)
        object.__setattr__(self, "roles", roles)
        if len(names) != len(roles) or not names:
            raise SchemaError("names and roles must be parallel, non-empty sequences")
        if len(set(names)) != len(names):
            raise SchemaError("channel names must be unique")
        for role in roles:
            if role not in ALL_ROLES:
                raise SchemaError(f"unknown channel role {role!r}")
        order = [ALL_ROLES.index(r) for r in roles]
        if any(a > b for a, b in zip(order, order[1:])):
            raise SchemaError("channels must be grouped pose, then EMG, then robot")
        if self.p < 1:
            raise SchemaError("layout needs at least one human pose channel")
        if self.j < 1:
            raise SchemaError("layout needs at least one robot channel")

    @property
    def p(self) -> int:
        return sum(r == ROLE_POSE for r in self.roles)

    @property
    def e(self) -> int:
        return sum(r == ROLE_EMG for r in self.roles)

    @property
    def j(self) -> int:
        return sum(r == ROLE_ROBOT for r in self.roles)

    @property
    def n_channels(self) -> int:
        return len(self.names)

    @property
    def human_names(self) -> tuple:
        return tuple(n for n, r in zip(self.names, self.roles) if r in HUMAN_ROLES)

    def index(self, name: str) -> int:
        try:
            return self.names.index(name)
        except ValueError:
            raise SchemaError(f"unknown channel {name!r}") from None

    @classmethod
    def from_roles(cls, names: Sequence[str], roles: Mapping[str, str]) -> "ChannelLayout":
        """Group channels into the canonical role order, keeping the given
        order inside each block."""
        ordered = [n for role in ALL_ROLES for n in names if roles.get(n) == role]
        missing = [n for n in names if n not in ordered]
        if missing:
            raise SchemaError(f"channels with unknown role: {missing}")
        return cls(tuple(ordered), tuple(roles[n] for n in ordered))


@dataclass(frozen=True)
class InteractionModel:
    """Trained joint weight distribution for one task."""

    layout: ChannelLayout
    basis: BasisSystem
    mu_w: np.ndarray
    sigma_w: np.ndarray
    sigma_y: np.ndarray
    phase_prior: "PhasePrior"

    def __post_init__(self):
        mu = np.asarray(self.mu_w, dtype=float)
        sigma = np.asarray(self.sigma_w, dtype=float)
        sigma_y = np.asarray(self.sigma_y, dtype=float)
        object.__setattr__(self, "mu_w", mu)
        object.__setattr__(self, "sigma_w", sigma)
        object.__setattr__(self, "sigma_y", sigma_y)
        m = self.layout.n_channels * self.basis.n_basis
        if mu.shape != (m,) or not np.all(np.isfinite(mu)):
            raise InvalidParameterError(f"mu_w must be a finite vector of length {m}")
        if sigma.shape != (m, m):
            raise InvalidParameterError(f"sigma_w must be {m}x{m}, got {sigma.shape}")
        check_covariance(sigma, "sigma_w")
        if sigma_y.shape != (self.layout.n_channels,) or np.any(sigma_y <= 0):
            raise InvalidParameterError("sigma_y must hold one positive variance per channel")

    @property
    def dim(self) -> int:
        return self.mu_w.size

    def block(self, channel: int) -> slice:
        n = self.basis.n_basis
        return slice(channel * n, (channel + 1) * n)


@dataclass(frozen=True)
class PartialObservation:
    """Sparse human observations: (raw time, channel -> value) pairs.

    ``noise`` maps observed channel names to measurement variances; channels
    missing from the map fall back to the model's per-channel sigma_y.
    ``raw_duration_so_far`` is the raw-time span covered by the samples.
    """

    samples: tuple
    noise: Mapping[str, float] = None
    raw_duration_so_far: float = 0.0

    def __post_init__(self):
        samples = tuple((float(t), dict(values)) for t, values in self.samples)
        object.__setattr__(self, "samples", samples)
        object.__setattr__(self, "noise", dict(self.noise or {}))
        times = [t for t, _ in samples]
        if any(b <= a for a, b in zip(times, times[1:])):
            raise InvalidParameterError("observation timestamps must be strictly increasing")
        if any(v <= 0 for v in self.noise.values()):
            raise InvalidParameterError("observation noise variances must be > 0")
        if samples and self.raw_duration_so_far <= 0:
            raise InvalidParameterError("raw_duration_so_far must be > 0 for a non-empty observation")

    @property
    def is_empty(self) -> bool:
        return not self.samples or all(not v for _, v in self.samples)

    @property
    def observed_channels(self) -> tuple:
        seen = {}
        for _, values in self.samples:
            for name in values:
                seen[name] = True
        return tuple(seen)


@dataclass(frozen=True)
class PosteriorModel:
    """Weight distribution after conditioning, plus the scaling it used."""

    mu_w_new: np.ndarray
    sigma_w_new: np.ndarray
    alpha_used: float

    def __post_init__(self):
        mu = np.asarray(self.mu_w_new, dtype=float)
        sigma = np.asarray(self.sigma_w_new, dtype=float)
        object.__setattr__(self, "mu_w_new", mu)
        object.__setattr__(self, "sigma_w_new", sigma)
        if self.alpha_used <= 0:
            raise InvalidParameterError(f"alpha_used must be > 0, got {self.alpha_used}")
        check_covariance(sigma, "sigma_w_new")


@dataclass(frozen=True)
class PredictedTrajectory:
    """Mean and per-sample variance for every channel, over t_out steps."""

    mean: np.ndarray
    variance: np.ndarray
    duration: float
    names: tuple
    roles: tuple


def assemble_state(demo: "Demonstration", layout: ChannelLayout) -> np.ndarray:
    """Stack demo channels into a (T, p+e+j) matrix in layout order."""
    columns = []
    for name in layout.names:
        if name not in demo.channels:
            raise SchemaError(f"demonstration is missing channel {name!r}")
        columns.append(np.asarray(demo.channels[name], dtype=float))
    return np.column_stack(columns)


def _expand_sigma_y(layout: ChannelLayout, sigma_y) -> np.ndarray:
    if isinstance(sigma_y, Mapping):
        try:
            return np.array([float(sigma_y[r]) for r in layout.roles])
        except KeyError as exc:
            raise InvalidParameterError(f"sigma_y missing role {exc.args[0]!r}") from None
    arr = np.asarray(sigma_y, dtype=float)
    if arr.ndim == 0:
        return np.full(layout.n_channels, float(arr))
    if arr.shape != (layout.n_channels,):
        raise InvalidParameterError(
            f"sigma_y must be scalar, per-role map or length-{layout.n_channels} vector"
        )
    return arr


def train_interaction(
    demos: Sequence["Demonstration"],
    layout: ChannelLayout,
    basis: BasisSystem,
    sigma_y=1e-4,
    ridge: float = 1e-6,
    cov_floor: float | None = None,
    phase_prior: "PhasePrior | None" = None,
) -> InteractionModel:
    """Fit the joint weight distribution from time-aligned demonstrations.

    Every demo must already be resampled to ``basis.t_norm`` samples.  Each
    channel is regressed onto the basis independently, the per-channel
    weights are concatenated per demo, and the mean/covariance over demos is
    taken jointly, so the cross-channel covariance blocks that let human
    observations drive robot predictions are retained.
    """
    from .phase import PhasePrior

    if not demos:
        raise InvalidParameterError("need at least one demonstration")
    expected = set(demos[0].channels)
    for demo in demos[1:]:
        if set(demo.channels) != expected:
            raise SchemaError("demonstrations have inconsistent channel sets")
    stacked = []
    for demo in demos:
        state = assemble_state(demo, layout)
        if state.shape[0] != basis.t_norm:
            raise InvalidParameterError(
                f"demonstrations must be resampled to {basis.t_norm} samples, got {state.shape[0]}"
            )
        w = [fit_weights(basis, state[:, c], ridge) for c in range(layout.n_channels)]
        stacked.append(np.concatenate(w))
    mu, sigma = weight_moments(np.array(stacked), cov_floor)
    if phase_prior is None:
        phase_prior = PhasePrior(1.0, 0.05, t_norm_duration=float(basis.t_norm))
    return InteractionModel(layout, basis, mu, sigma, _expand_sigma_y(layout, sigma_y), phase_prior)


def observation_matrix(basis: BasisSystem, layout: ChannelLayout, observed_samples) -> np.ndarray:
    """Full observation matrix with explicit zero blocks.

    One block of p+e+j rows per time step: observed human channels carry the
    basis row at that phase in their own weight block, while unobserved
    human channels and all robot channels are zero rows.  Shape is
    (s * (p+e+j), (p+e+j) * n_basis).
    """
    c, n = layout.n_channels, basis.n_basis
    samples = list(observed_samples)
    h = np.zeros((len(samples) * c, c * n))
    for k, (phase, observed) in enumerate(samples):
        row = basis_row(basis, phase)
        for name in observed:
            idx = layout.index(name)
            if layout.roles[idx] == ROLE_ROBOT:
                raise SchemaError(f"robot channel {name!r} cannot be observed")
            h[k * c + idx, idx * n : (idx + 1) * n] = row
    return h


def snap_phases(model: InteractionModel, obs: PartialObservation, alpha: float) -> np.ndarray:
    """Map raw observation times to the nominal phase grid.

    Raw time t corresponds to phase t / (alpha * nominal duration), clipped
    to [0, 1] and rounded to the nearest of the t_norm grid samples.
    """
    if alpha <= 0:
        raise InvalidParameterError(f"alpha must be > 0, got {alpha}")
    times = np.array([t for t, _ in obs.samples], dtype=float)
    span = alpha * model.phase_prior.t_norm_duration
    grid = max(model.basis.t_norm - 1, 1)
    phases = np.clip(times / span, 0.0, 1.0)
    return np.round(phases * grid) / grid


def phase_cache_key(model: InteractionModel, obs: PartialObservation, alpha: float) -> tuple:
    """Grid indices the observation times land on; equal keys mean equal H."""
    if obs.is_empty:
        return ()
    grid = max(model.basis.t_norm - 1, 1)
    return tuple(int(round(p * grid)) for p in snap_phases(model, obs, alpha))


def _restricted_observation(model: InteractionModel, obs: PartialObservation, alpha: float):
    """Rows of H, y and the noise diagonal restricted to observed entries."""
    layout, basis = model.layout, model.basis
    n, c = basis.n_basis, layout.n_channels
    phases = snap_phases(model, obs, alpha)
    rows, y, r = [], [], []
    for (_, values), phase in zip(obs.samples, phases):
        if not values:
            continue
        psi = basis_row(basis, phase)
        for name in layout.names:
            if name not in values:
                continue
            idx = layout.index(name)
            if layout.roles[idx] == ROLE_ROBOT:
                raise SchemaError(f"robot channel {name!r} cannot be observed")
            row = np.zeros(c * n)
            row[idx * n : (idx + 1) * n] = psi
            rows.append(row)
            y.append(float(values[name]))
            r.append(float(obs.noise.get(name, model.sigma_y[idx])) + OBS_NOISE_FLOOR)
        unknown = set(values) - set(layout.names)
        if unknown:
            raise SchemaError(f"observation has unknown channels: {sorted(unknown)}")
    return np.array(rows), np.array(y), np.array(r)


def observation_log_marginal(model: InteractionModel, obs: PartialObservation, alpha: float) -> float:
    """Log density of the observed values under the model's marginal.

    This is the Gaussian N(y; H mu_w, Sigma_y + H Sigma_w H^T) evaluated in
    the log domain; it is both the likelihood term of the phase posterior
    and the per-task likelihood used for recognition.  An empty observation
    contributes 0 (the log of an empty product).
    """
    if obs.is_empty:
        return 0.0
    h, y, r = _restricted_observation(model, obs, alpha)
    cov = h @ model.sigma_w @ h.T
    cov[np.diag_indices_from(cov)] += r
    resid = y - h @ model.mu_w
    try:
        chol = scipy.linalg.cho_factor(cov, lower=True)
    except np.linalg.LinAlgError as exc:
        raise IllConditionedError(f"marginal covariance not positive definite: {exc}") from exc
    logdet = 2.0 * float(np.sum(np.log(np.diag(chol[0]))))
    maha = float(resid @ scipy.linalg.cho_solve(chol, resid))
    return -0.5 * (y.size * np.log(2.0 * np.pi) + logdet + maha)


def condition(model: InteractionModel, obs: PartialObservation, alpha: float) -> PosteriorModel:
    """Condition the weight distribution on partial human observations.

    Kalman-style batch update with gain
    ``K = Sigma_w H^T (Sigma_y^o + H Sigma_w H^T)^-1``:

        mu_new    = mu_w + K (y - H mu_w)
        sigma_new = Sigma_w - K H Sigma_w

    Unobserved channels are excluded rows of H rather than fake zero-valued
    measurements, so they leave the posterior untouched.  The innovation
    system is solved through a Cholesky factorization and the posterior
    covariance is symmetrized.  An empty observation returns the prior.
    """
    if alpha <= 0:
        raise InvalidParameterError(f"alpha must be > 0, got {alpha}")
    if obs.is_empty:
        return PosteriorModel(model.mu_w.copy(), model.sigma_w.copy(), alpha)
    h, y, r = _restricted_observation(model, obs, alpha)
    sigma_ht = model.sigma_w @ h.T
    innov = h @ sigma_ht
    innov[np.diag_indices_from(innov)] += r
    try:
        chol = scipy.linalg.cho_factor(innov, lower=True)
    except np.linalg.LinAlgError as exc:
        raise IllConditionedError(f"innovation covariance not positive definite: {exc}") from exc
    gain = scipy.linalg.cho_solve(chol, sigma_ht.T).T
    mu_new = model.mu_w + gain @ (y - h @ model.mu_w)
    sigma_new = model.sigma_w - gain @ sigma_ht.T
    sigma_new = 0.5 * (sigma_new + sigma_new.T)
    return PosteriorModel(mu_new, sigma_new, alpha)


def predict_trajectory(
    posterior: PosteriorModel, model: InteractionModel, t_out: int
) -> PredictedTrajectory:
    """Read out the mean trajectory and its per-sample variance.

    Row t, channel c is ``psi(t) @ mu_block_c``; the variance adds the
    channel's observation noise.  The prediction spans a raw-time duration
    of ``alpha_used`` times the nominal duration.
    """
    if t_out < 2:
        raise InvalidParameterError(f"t_out must be >= 2, got {t_out}")
    layout, basis = model.layout, model.basis
    psi = basis_matrix(basis, np.linspace(0.0, 1.0, t_out))
    mean = np.empty((t_out, layout.n_channels))
    var = np.empty((t_out, layout.n_channels))
    for c in range(layout.n_channels):
        blk = model.block(c)
        mean[:, c] = psi @ posterior.mu_w_new[blk]
        var[:, c] = np.einsum("tn,nm,tm->t", psi, posterior.sigma_w_new[blk, blk], psi)
        var[:, c] += model.sigma_y[c]
    duration = posterior.alpha_used * model.phase_prior.t_norm_duration
    return PredictedTrajectory(mean, var, duration, layout.names, layout.roles)
