"""Single-channel movement primitive: a Gaussian over basis weights.

Training is moment matching over per-demonstration weight vectors; the
induced marginal over positions at a phase is Gaussian with mean
``psi @ mu_w`` and variance ``psi @ sigma_w @ psi + sigma_y``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .basis import BasisSystem, basis_row
from .errors import InvalidParameterError

PSD_TOL = 1e-10


def check_covariance(sigma: np.ndarray, what: str = "covariance") -> None:
    """Raise unless ``sigma`` is symmetric and PSD up to tolerance."""
    if sigma.ndim != 2 or sigma.shape[0] != sigma.shape[1]:
        raise InvalidParameterError(f"{what} must be square, got shape {sigma.shape}")
    if not np.all(np.isfinite(sigma)):
        raise InvalidParameterError(f"{what} contains non-finite values")
    scale = max(1.0, float(np.abs(sigma).max()))
    if np.abs(sigma - sigma.T).max() > PSD_TOL * scale:
        raise InvalidParameterError(f"{what} is not symmetric")
    min_eig = float(np.linalg.eigvalsh(sigma).min())
    if min_eig < -PSD_TOL * scale:
        raise InvalidParameterError(
            f"{what} is not positive semi-definite (min eigenvalue {min_eig:g})"
        )


@dataclass(frozen=True)
class PrompParams:
    """Weight distribution of one channel plus its observation noise."""

    mu_w: np.ndarray
    sigma_w: np.ndarray
    sigma_y: float

    def __post_init__(self):
        mu = np.asarray(self.mu_w, dtype=float)
        sigma = np.asarray(self.sigma_w, dtype=float)
        object.__setattr__(self, "mu_w", mu)
        object.__setattr__(self, "sigma_w", sigma)
        if mu.ndim != 1 or not np.all(np.isfinite(mu)):
            raise InvalidParameterError("mu_w must be a finite 1-d vector")
        if sigma.shape != (mu.size, mu.size):
            raise InvalidParameterError(
                f"sigma_w shape {sigma.shape} does not match mu_w length {mu.size}"
            )
        check_covariance(sigma, "sigma_w")
        if self.sigma_y <= 0:
            raise InvalidParameterError(f"sigma_y must be > 0, got {self.sigma_y}")


def weight_moments(weights, cov_floor: float | None = None):
    """Mean and (Bessel-corrected) covariance of stacked weight vectors.

    ``weights`` is a (D, M) array or a sequence of D length-M vectors.  A
    single demonstration yields a zero covariance.  ``cov_floor`` is added to
    the diagonal; ``None`` picks 1e-6 times the mean diagonal magnitude (or
    1e-6 absolute when the diagonal is all zero) so that the matrix stays
    invertible with few demonstrations.
    """
    w = np.atleast_2d(np.asarray(weights, dtype=float))
    if w.size == 0:
        raise InvalidParameterError("need at least one weight vector")
    if not np.all(np.isfinite(w)):
        raise InvalidParameterError("weights contain non-finite values")
    if cov_floor is not None and cov_floor < 0:
        raise InvalidParameterError(f"cov_floor must be >= 0, got {cov_floor}")
    d, m = w.shape
    mu = w.mean(axis=0)
    if d >= 2:
        sigma = np.cov(w, rowvar=False, ddof=1).reshape(m, m)
    else:
        sigma = np.zeros((m, m))
    if cov_floor is None:
        diag_scale = float(np.abs(np.diag(sigma)).mean())
        cov_floor = 1e-6 * diag_scale if diag_scale > 0 else 1e-6
    sigma = sigma + cov_floor * np.eye(m)
    sigma = 0.5 * (sigma + sigma.T)
    return mu, sigma


def train_promp(weights, sigma_y: float = 1e-4, cov_floor: float | None = None) -> PrompParams:
    """Fit the weight distribution from per-demonstration weight vectors."""
    mu, sigma = weight_moments(weights, cov_floor)
    return PrompParams(mu, sigma, float(sigma_y))


def marginal_at(params: PrompParams, basis: BasisSystem, phase: float):
    """Gaussian marginal (mean, variance) of the position at a phase."""
    psi = basis_row(basis, phase)
    mean = float(psi @ params.mu_w)
    variance = float(psi @ params.sigma_w @ psi) + params.sigma_y
    return mean, variance
