"""
    Sampled ellipticity bounds of a coefficient field.
"""

import logging
from dataclasses import dataclass
from typing import Optional

import numpy as np
from scipy.stats import qmc

from vmm_solver.consts import DEFAULT_SEED, ELLIPTICITY_DEFAULT_SAMPLES, SYMMETRY_TOLERANCE
from vmm_solver.exceptions import ConfigurationError, VmmError
from vmm_solver.problems.spec import Domain, MatrixField

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class EllipticityReport:
    """
    Extreme eigenvalues of A found at the sampled points.
    """

    min_eigenvalue: float
    max_eigenvalue: float
    argmin_point: np.ndarray
    n_samples: int
    n_skipped: int
    max_asymmetry: float

    def __iter__(self):
        # Unpacks as (min eigenvalue, max eigenvalue, argmin point).
        return iter((self.min_eigenvalue, self.max_eigenvalue, self.argmin_point))


def symmetric_eigenvalues(matrices: np.ndarray) -> np.ndarray:
    """
    Closed form eigenvalues (ascending) of a batch of symmetric 1x1 or 2x2 matrices.
    """
    matrices = np.asarray(matrices, dtype=float)
    if matrices.shape[-1] == 1:
        return matrices[:, 0, :]
    a = matrices[:, 0, 0]
    d = matrices[:, 1, 1]
    b = 0.5 * (matrices[:, 0, 1] + matrices[:, 1, 0])
    mean = 0.5 * (a + d)
    radius = np.hypot(0.5 * (a - d), b)
    return np.stack([mean - radius, mean + radius], axis=1)


def _evaluate_pointwise(A: MatrixField, points: np.ndarray, dimension: int) -> np.ndarray:
    values = np.full((points.shape[0], dimension, dimension), np.nan)
    for index in range(points.shape[0]):
        try:
            values[index] = A(points[index : index + 1])[0]
        except (VmmError, ArithmeticError, ValueError):
            continue
    return values


def ellipticity_probe(
    A: MatrixField,
    domain: Domain,
    n_samples: int = ELLIPTICITY_DEFAULT_SAMPLES,
    *,
    seed: Optional[int] = DEFAULT_SEED,
) -> EllipticityReport:
    """
    Samples the eigenvalues of A at quasi-random (Halton) points of the domain.
    Points where A cannot be evaluated are skipped and counted.

    :param A: Matrix field.
    :param domain: Domain to sample.
    :param n_samples: Number of sample points (at least 1).
    :param seed: Seed of the scrambled Halton sequence (None disables scrambling).
    """
    if int(n_samples) < 1:
        raise ConfigurationError(f"Ellipticity probe needs n_samples >= 1, got {n_samples}!")

    dimension = domain.dimension
    sampler = qmc.Halton(d=max(dimension, 2), scramble=seed is not None, seed=seed)
    unit_samples = sampler.random(int(n_samples))
    points = domain.map_unit_samples(unit_samples)

    try:
        with np.errstate(all="ignore"):
            values = np.asarray(A(points), dtype=float)
    except (VmmError, ArithmeticError, ValueError):
        values = _evaluate_pointwise(A, points, dimension)

    finite = np.isfinite(values.reshape(points.shape[0], -1)).all(axis=1)
    n_skipped = int(np.count_nonzero(~finite))
    if n_skipped:
        logger.warning(
            "Ellipticity probe skipped %d of %d point(s) where A is not finite.",
            n_skipped,
            points.shape[0],
        )
    if not finite.any():
        raise ConfigurationError("Coefficient field could not be evaluated at any sample point!")

    values = values[finite]
    kept_points = points[finite]
    asymmetry = float(np.max(np.abs(values - np.swapaxes(values, 1, 2))))
    if asymmetry > SYMMETRY_TOLERANCE * max(1.0, float(np.max(np.abs(values)))):
        logger.warning("Coefficient field is not symmetric (max asymmetry %.3e).", asymmetry)

    eigenvalues = symmetric_eigenvalues(values)
    argmin = int(np.argmin(eigenvalues[:, 0]))
    report = EllipticityReport(
        min_eigenvalue=float(eigenvalues[argmin, 0]),
        max_eigenvalue=float(eigenvalues[:, -1].max()),
        argmin_point=kept_points[argmin].copy(),
        n_samples=int(n_samples),
        n_skipped=n_skipped,
        max_asymmetry=asymmetry,
    )
    logger.info(
        "Ellipticity probe: lambda in [%.6g, %.6g] over %d point(s).",
        report.min_eigenvalue,
        report.max_eigenvalue,
        int(n_samples) - n_skipped,
    )
    return report


__all__ = ["EllipticityReport", "ellipticity_probe", "symmetric_eigenvalues"]
