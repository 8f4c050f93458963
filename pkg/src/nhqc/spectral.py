"""Dense non-Hermitian eigendecomposition, IPR and log-determinant utilities.

The eigensolver contract is a residual bound, not an algorithm: every
returned pair must satisfy ``||M v - E v||_2 <= TOL_EIG * ||M||_F``. The
implementation binds LAPACK's balanced QR solver (scipy.linalg.eig); the
bound is verified on every call and a failure raises EigensolverError.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, replace
from enum import Enum

import numpy as np
import scipy.linalg

from .errors import EigensolverError

TOL_EIG = 1e-8
IM_TOL_FACTOR = 1e-6  # default |Im E| cut is IM_TOL_FACTOR * ||M||_F


class StateLabel(Enum):
    LOCALIZED = "localized"
    EXTENDED = "extended"


@dataclass
class ComplexSpectrum:
    """Eigenpairs of a dense complex matrix plus per-state diagnostics.

    ``eigenvectors[:, j]`` is the unit-norm right eigenvector of
    ``eigenvalues[j]``; ``ipr[j]`` its inverse participation ratio.
    ``labels`` / ``is_complex`` stay None until classify_states runs.
    """

    eigenvalues: np.ndarray
    eigenvectors: np.ndarray
    ipr: np.ndarray
    residuals: np.ndarray
    source_norm: float
    labels: np.ndarray | None = None
    is_complex: np.ndarray | None = None

    @property
    def dimension(self) -> int:
        return len(self.eigenvalues)


@dataclass
class QuasiEnergySpectrum(ComplexSpectrum):
    """Spectrum of a one-step operator mapped to quasi-energies.

    ``eigenvalues`` hold E = i*log(lambda) with Re(E) in (-pi, pi]; the
    imaginary part is the per-step growth rate, |lambda| = exp(Im E).
    """


def ipr(v: np.ndarray) -> float:
    """Inverse participation ratio sum|v|^4 / (sum|v|^2)^2 of a nonzero vector."""
    p = np.abs(np.asarray(v)) ** 2
    total = p.sum()
    if total == 0.0:
        raise ValueError("IPR of the zero vector is undefined")
    return float((p * p).sum() / total**2)


def eigendecompose(M: np.ndarray, tol: float = TOL_EIG) -> ComplexSpectrum:
    """All eigenpairs of a square complex matrix, with verified residuals."""
    M = np.asarray(M, dtype=complex)
    if M.ndim != 2 or M.shape[0] != M.shape[1]:
        raise ValueError(f"matrix must be square, got shape {M.shape}")
    if not np.all(np.isfinite(M)):
        raise ValueError("matrix has non-finite entries")
    try:
        eigenvalues, eigenvectors = scipy.linalg.eig(M)
    except scipy.linalg.LinAlgError as exc:  # pragma: no cover - LAPACK rarely fails
        raise EigensolverError(f"QR iteration did not converge: {exc}") from exc

    norms = np.linalg.norm(eigenvectors, axis=0)
    eigenvectors = eigenvectors / norms
    source_norm = float(np.linalg.norm(M, "fro"))
    residuals = np.linalg.norm(M @ eigenvectors - eigenvectors * eigenvalues, axis=0)
    worst = int(np.argmax(residuals))
    if residuals[worst] > tol * source_norm:
        raise EigensolverError(
            f"residual {residuals[worst]:.3e} exceeds {tol:.1e} * ||M||_F "
            f"for eigenvalue index {worst}",
            index=worst,
        )
    state_ipr = np.array([ipr(eigenvectors[:, j]) for j in range(M.shape[0])])
    return ComplexSpectrum(
        eigenvalues=eigenvalues,
        eigenvectors=eigenvectors,
        ipr=state_ipr,
        residuals=residuals,
        source_norm=source_norm,
    )


def classify_states(
    spectrum: ComplexSpectrum,
    im_tol: float | None = None,
    ipr_threshold: float | None = None,
) -> ComplexSpectrum:
    """Label each state Localized (ipr >= threshold) or Extended.

    Also records which energies are genuinely complex (|Im E| > im_tol),
    so the complex-energy/localization correlation can be inspected
    independently of the single IPR cut. Defaults: im_tol is
    IM_TOL_FACTOR * ||M||_F of the source matrix, ipr_threshold is 10/L.
    """
    if im_tol is None:
        im_tol = IM_TOL_FACTOR * spectrum.source_norm
    if ipr_threshold is None:
        ipr_threshold = 10.0 / spectrum.dimension
    labels = np.where(
        spectrum.ipr >= ipr_threshold, StateLabel.LOCALIZED, StateLabel.EXTENDED
    )
    is_complex = np.abs(spectrum.eigenvalues.imag) > im_tol
    return replace(spectrum, labels=labels, is_complex=is_complex)


def log_det(M: np.ndarray) -> tuple[float, float]:
    """log|det M| and the principal argument of det M, overflow-safe.

    Uses a pivoted LU factorization: the phase is accumulated from the
    diagonal factors and the pivot-sign parity, never forming det M itself.
    An exactly singular matrix is flagged by log_abs = -inf (arg 0).
    """
    M = np.asarray(M, dtype=complex)
    if M.ndim != 2 or M.shape[0] != M.shape[1]:
        raise ValueError(f"matrix must be square, got shape {M.shape}")
    with warnings.catch_warnings():
        # exact singularity is an expected, flagged outcome here
        warnings.simplefilter("ignore", scipy.linalg.LinAlgWarning)
        lu, piv = scipy.linalg.lu_factor(M, check_finite=True)
    diag = np.diag(lu)
    if np.any(diag == 0.0):
        return (-math.inf, 0.0)
    log_abs = float(np.log(np.abs(diag)).sum())
    swaps = int(np.sum(piv != np.arange(len(piv))))
    arg = float(np.angle(diag).sum()) + math.pi * (swaps % 2)
    # principal value in (-pi, pi]
    arg = math.remainder(arg, 2.0 * math.pi)
    if arg <= -math.pi:
        arg += 2.0 * math.pi
    return (log_abs, arg)


def quasienergies(U: np.ndarray, tol: float = TOL_EIG) -> QuasiEnergySpectrum:
    """Quasi-energy spectrum E = i*log(lambda) of a one-step operator.

    Re(E) is mapped to the principal window (-pi, pi]; a numerically zero
    eigenvalue (defective step operator) is an explicit failure.
    """
    base = eigendecompose(U, tol=tol)
    lam = base.eigenvalues
    zero = np.abs(lam) == 0.0
    if np.any(zero):
        raise EigensolverError(
            "one-step operator has a zero eigenvalue; quasi-energy undefined",
            index=int(np.argmax(zero)),
        )
    re = -np.angle(lam)  # in [-pi, pi)
    re = np.where(re <= -math.pi, re + 2.0 * math.pi, re)
    energies = re + 1j * np.log(np.abs(lam))
    return QuasiEnergySpectrum(
        eigenvalues=energies,
        eigenvectors=base.eigenvectors,
        ipr=base.ipr,
        residuals=base.residuals,
        source_norm=base.source_norm,
    )
