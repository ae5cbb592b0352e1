"""Matrix predicates and spectral tests for positive-system analysis.

Everything here operates on dense float64 numpy arrays at desk scale
(dimension capped at 64).  The Metzler/Hurwitz and nonnegative/Schur
certificate routines realize the classical equivalence triads as
independently checkable artifacts: the spectral verdict on one side, the
sign structure of -A^{-1} (resp. (I-M)^{-1}) and an explicit positive
vector on the other.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np
import scipy.linalg

from .errors import DimensionError, DomainError, LinearAlgebraError, SingularMatrixError

__all__ = [
    "MAX_EIG_DIM",
    "SpectralSummary",
    "MetzlerHurwitzCertificate",
    "NonnegSchurCertificate",
    "as_matrix",
    "is_metzler",
    "is_nonnegative",
    "spectral_summary",
    "is_hurwitz",
    "is_schur",
    "metzler_hurwitz_certificate",
    "nonneg_schur_certificate",
    "row_sum_lt_one",
    "solve",
]

MAX_EIG_DIM = 64
DEFAULT_SPECTRAL_TOL = 1e-9

# Relative pivot threshold below which a solve is treated as singular.
_SINGULAR_REL = 1e-12


def as_matrix(values, name: str = "matrix") -> np.ndarray:
    """Coerce to a finite float64 2-D array (rows x cols, row-major)."""
    m = np.asarray(values, dtype=float)
    if m.ndim != 2 or m.shape[0] < 1 or m.shape[1] < 1:
        raise DimensionError(f"{name} must be a non-empty 2-D array, got shape {m.shape}")
    if not np.all(np.isfinite(m)):
        raise DomainError(f"{name} contains non-finite entries")
    return m


def _require_square(m: np.ndarray, name: str) -> np.ndarray:
    m = as_matrix(m, name)
    if m.shape[0] != m.shape[1]:
        raise DimensionError(f"{name} must be square, got shape {m.shape}")
    return m


@dataclass(frozen=True)
class SpectralSummary:
    """Eigenvalues with the two scalars every stability test reads off."""

    eigenvalues: tuple[complex, ...]
    spectral_abscissa: float
    spectral_radius: float


def is_metzler(a) -> bool:
    """True iff every off-diagonal entry is >= 0 (exact comparison)."""
    a = _require_square(a, "A")
    off = a - np.diag(np.diag(a))
    return bool(np.all(off >= 0.0))


def is_nonnegative(m) -> bool:
    """True iff every entry is >= 0 (exact comparison, no tolerance)."""
    m = as_matrix(m, "M")
    return bool(np.all(m >= 0.0))


def spectral_summary(a) -> SpectralSummary:
    """Eigenvalues plus spectral abscissa and radius.

    Dense QR iteration via LAPACK; dimension is capped because nothing in
    this package ever needs more than a handful of states.
    """
    a = _require_square(a, "A")
    if a.shape[0] > MAX_EIG_DIM:
        raise DimensionError(f"dimension {a.shape[0]} exceeds the eigensolver cap {MAX_EIG_DIM}")
    try:
        eigs = np.linalg.eigvals(a)
    except np.linalg.LinAlgError as exc:
        raise LinearAlgebraError(f"eigenvalue iteration failed: {exc}") from exc
    return SpectralSummary(
        eigenvalues=tuple(complex(z) for z in eigs),
        spectral_abscissa=float(np.max(eigs.real)),
        spectral_radius=float(np.max(np.abs(eigs))),
    )


def is_hurwitz(a, tol: float = DEFAULT_SPECTRAL_TOL) -> bool:
    """True iff the spectral abscissa is < -tol (strictly stable)."""
    if not tol > 0.0:
        raise DomainError(f"tol must be positive, got {tol!r}")
    return spectral_summary(a).spectral_abscissa < -tol


def is_schur(m, tol: float = DEFAULT_SPECTRAL_TOL) -> bool:
    """True iff the spectral radius is < 1 - tol."""
    if not tol > 0.0:
        raise DomainError(f"tol must be positive, got {tol!r}")
    return spectral_summary(m).spectral_radius < 1.0 - tol


def solve(a: np.ndarray, b: np.ndarray, name: str = "matrix") -> np.ndarray:
    """Partial-pivot LU solve; pivots below 1e-12 * ||A||_inf are singular."""
    a = _require_square(a, name)
    norm_inf = float(np.max(np.sum(np.abs(a), axis=1)))
    try:
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", scipy.linalg.LinAlgWarning)
            lu, piv = scipy.linalg.lu_factor(a)
    except (scipy.linalg.LinAlgError, ValueError) as exc:
        raise SingularMatrixError(f"{name} is singular: {exc}") from exc
    min_pivot = float(np.min(np.abs(np.diag(lu))))
    if min_pivot < _SINGULAR_REL * max(norm_inf, 1e-300):
        raise SingularMatrixError(
            f"{name} is numerically singular (pivot {min_pivot:.3e} vs norm {norm_inf:.3e})"
        )
    return scipy.linalg.lu_solve((lu, piv), b)


@dataclass(frozen=True)
class MetzlerHurwitzCertificate:
    """Outcome of the Metzler-Hurwitz equivalence check.

    When verdict is True, ``lam`` solves A lam = -1 (so lam is strictly
    positive) and ``neg_inverse`` is -A^{-1} with nonnegative entries;
    both are None otherwise.
    """

    verdict: bool
    lam: np.ndarray | None
    neg_inverse: np.ndarray | None


def metzler_hurwitz_certificate(a) -> MetzlerHurwitzCertificate:
    a = _require_square(a, "A")
    if not is_metzler(a):
        raise DomainError("metzler_hurwitz_certificate requires a Metzler matrix")
    verdict = is_hurwitz(a)
    if not verdict:
        return MetzlerHurwitzCertificate(False, None, None)
    ones = np.ones(a.shape[0])
    try:
        lam = solve(a, -ones, name="A")
        neg_inverse = solve(a, -np.eye(a.shape[0]), name="A")
    except SingularMatrixError as exc:
        raise RuntimeError(
            "internal inconsistency: Hurwitz verdict with singular matrix"
        ) from exc
    return MetzlerHurwitzCertificate(True, lam, neg_inverse)


@dataclass(frozen=True)
class NonnegSchurCertificate:
    """Outcome of the nonnegative-Schur equivalence check.

    When verdict is True, ``inv_resolvent`` is (I-M)^{-1} with nonnegative
    entries and ``eta`` = (I-M)^{-1} 1 satisfies (M-I) eta = -1.
    """

    verdict: bool
    eta: np.ndarray | None
    inv_resolvent: np.ndarray | None


def nonneg_schur_certificate(m) -> NonnegSchurCertificate:
    m = _require_square(m, "M")
    if not is_nonnegative(m):
        raise DomainError("nonneg_schur_certificate requires a nonnegative matrix")
    verdict = is_schur(m)
    if not verdict:
        return NonnegSchurCertificate(False, None, None)
    eye = np.eye(m.shape[0])
    try:
        inv_resolvent = solve(eye - m, eye, name="I - M")
        eta = solve(eye - m, np.ones(m.shape[0]), name="I - M")
    except SingularMatrixError as exc:
        raise RuntimeError(
            "internal inconsistency: Schur verdict with singular resolvent"
        ) from exc
    return NonnegSchurCertificate(True, eta, inv_resolvent)


def row_sum_lt_one(m, absolute: bool = True) -> bool:
    """True iff every row sum (of absolute values by default) is < 1."""
    m = as_matrix(m, "M")
    rows = np.sum(np.abs(m) if absolute else m, axis=1)
    return bool(np.all(rows < 1.0))
