"""Gaussian radial basis functions over normalized phase time.

A trajectory sampled on the phase interval [0, 1] is compressed into a
weight vector ``w`` such that ``y(phase) ~= basis_row(phase) @ w``.  The
basis is a bank of Gaussian bumps with evenly spaced centers; rows of the
design matrix may optionally be normalized so they sum to one, which makes
a constant trajectory map to a constant weight vector.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.linalg

from .errors import DomainError, IllConditionedError, InvalidParameterError


def default_bandwidth(n_basis: int) -> float:
    """Squared width giving neighbouring bumps a healthy overlap."""
    if n_basis < 2:
        raise InvalidParameterError(f"n_basis must be >= 2, got {n_basis}")
    return (1.0 / (n_basis - 1)) ** 2 * 2.0


@dataclass(frozen=True)
class BasisSystem:
    """A fixed bank of Gaussian bumps on [0, 1].

    ``bandwidth`` is the squared width of each bump (the denominator of the
    exponent is ``2 * bandwidth``).  ``t_norm`` is the nominal number of
    samples a time-aligned trajectory has; it also defines the phase grid
    that raw observation times are snapped to.
    """

    n_basis: int
    centers: np.ndarray
    bandwidth: float
    normalized: bool = True
    t_norm: int = 100

    def __post_init__(self):
        centers = np.asarray(self.centers, dtype=float)
        object.__setattr__(self, "centers", centers)
        if self.n_basis < 1 or centers.shape != (self.n_basis,):
            raise InvalidParameterError(
                f"need {self.n_basis} centers, got shape {centers.shape}"
            )
        if self.bandwidth <= 0:
            raise InvalidParameterError(f"bandwidth must be > 0, got {self.bandwidth}")
        if self.t_norm < 1:
            raise InvalidParameterError(f"t_norm must be >= 1, got {self.t_norm}")
        if np.any(np.diff(centers) <= 0):
            raise InvalidParameterError("centers must be strictly increasing")
        # coverage: the first/last bump must reach the ends of the interval
        if centers[0] > self.bandwidth or centers[-1] < 1.0 - self.bandwidth:
            raise InvalidParameterError(
                "centers do not cover [0, 1] for this bandwidth"
            )


def make_basis(
    n_basis: int = 20,
    bandwidth: float | None = None,
    t_norm: int = 100,
    normalized: bool = True,
) -> BasisSystem:
    """Build a basis with evenly spaced centers on [0, 1].

    Deterministic for identical inputs.  ``bandwidth=None`` picks
    :func:`default_bandwidth`.
    """
    if n_basis < 2:
        raise InvalidParameterError(f"n_basis must be >= 2, got {n_basis}")
    if t_norm < n_basis:
        raise InvalidParameterError(
            f"t_norm ({t_norm}) must be >= n_basis ({n_basis})"
        )
    if bandwidth is None:
        bandwidth = default_bandwidth(n_basis)
    if bandwidth <= 0:
        raise InvalidParameterError(f"bandwidth must be > 0, got {bandwidth}")
    centers = np.linspace(0.0, 1.0, n_basis)
    return BasisSystem(n_basis, centers, float(bandwidth), normalized, t_norm)


def basis_row(basis: BasisSystem, phase: float) -> np.ndarray:
    """Evaluate all bumps at one phase; shape (n_basis,)."""
    if not 0.0 <= phase <= 1.0:
        raise DomainError(f"phase must be in [0, 1], got {phase}")
    row = np.exp(-((phase - basis.centers) ** 2) / (2.0 * basis.bandwidth))
    if basis.normalized:
        row = row / row.sum()
    return row


def basis_matrix(basis: BasisSystem, timestamps) -> np.ndarray:
    """Stack basis rows for a sequence of phases; shape (T, n_basis)."""
    phases = np.asarray(timestamps, dtype=float)
    if phases.ndim != 1 or phases.size == 0:
        raise InvalidParameterError("timestamps must be a non-empty 1-d sequence")
    if np.any(phases < 0.0) or np.any(phases > 1.0):
        raise DomainError("all timestamps must lie in [0, 1]")
    mat = np.exp(-((phases[:, None] - basis.centers[None, :]) ** 2) / (2.0 * basis.bandwidth))
    if basis.normalized:
        mat = mat / mat.sum(axis=1, keepdims=True)
    return mat


def fit_weights(basis: BasisSystem, trajectory, ridge: float = 1e-6) -> np.ndarray:
    """Regress one trajectory onto the basis.

    The trajectory is assumed uniformly sampled over [0, 1].  Solves
    ``w = (Psi^T Psi + ridge I)^-1 Psi^T y``; with ``ridge == 0`` this is the
    plain least-squares fit and requires at least n_basis samples.
    """
    y = np.asarray(trajectory, dtype=float)
    if y.ndim != 1 or y.size < 2:
        raise InvalidParameterError("trajectory must be 1-d with at least 2 samples")
    if not np.all(np.isfinite(y)):
        raise InvalidParameterError("trajectory contains non-finite values")
    if ridge < 0:
        raise InvalidParameterError(f"ridge must be >= 0, got {ridge}")
    if ridge == 0 and y.size < basis.n_basis:
        raise InvalidParameterError(
            f"need at least {basis.n_basis} samples for an unregularized fit, got {y.size}"
        )
    psi = basis_matrix(basis, np.linspace(0.0, 1.0, y.size))
    if ridge == 0:
        w, _, rank, _ = np.linalg.lstsq(psi, y, rcond=None)
        if rank < basis.n_basis:
            raise IllConditionedError(
                "normal matrix is singular; retry with ridge > 0"
            )
        return w
    gram = psi.T @ psi + ridge * np.eye(basis.n_basis)
    try:
        return scipy.linalg.solve(gram, psi.T @ y, assume_a="pos")
    except np.linalg.LinAlgError as exc:  # pragma: no cover - extreme inputs only
        raise IllConditionedError(f"ridge system could not be solved: {exc}") from exc
