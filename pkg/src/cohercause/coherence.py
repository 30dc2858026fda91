"""Partial coherence between two random vectors given a third.

The central quantity is

    rho2 = 1 - det[R_uu|z] / (det[R_xx|z] det[R_yy|z]),

a scale-invariant scalar in [0, 1] measuring the residual linear
dependence between x and y after both are regressed on z. It factors
through the singular values k_i of the doubly-whitened conditional
cross-covariance (the coherence matrix), is unchanged when the roles of
the two regressions are swapped (one vector onto two instead of two onto
one), and is invariant under block-diagonal nonsingular transforms of
(x, y, z). For multivariate normal vectors it carries the conditional
KL divergence, conditional mutual information and transfer entropy, all
monotone functions of one another.

rho2 is computed primarily through the log-determinant Schur route; the
product over singular values serves as an independent cross-check and a
discrepancy beyond tolerance raises, on the theory that two independent
paths catch conditioning bugs that one would not.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
import scipy.linalg as la

from .covariance import (
    CompositeCovariance,
    ConditionalCovariances,
    CovarianceError,
    conditional_covariances,
    inv_sqrt_spd,
    log_det_spd,
    schur_complement,
)

__all__ = [
    "PartialCoherenceResult",
    "InformationMeasures",
    "SpectralCoherence",
    "coherence_matrix",
    "partial_canonical_correlations",
    "partial_coherence",
    "partial_coherence_one_onto_two",
    "conditional_estimator_gain",
    "information_measures",
    "block_diag_transform",
    "spectral_partial_coherence",
]

# Singular values of the coherence matrix are clamped below 1 so that
# log(1 - k^2) stays finite under rounding.
K_CLAMP = 1.0 - 1e-14

# Allowed absolute disagreement between the log-det route and the
# product-over-singular-values route for (1 - rho2). The floor applies
# to well-conditioned inputs; for ill-conditioned conditional
# covariances the SVD route honestly loses digits with the square root
# of the condition number, so the allowance grows accordingly (a
# formula-level bug produces O(1) disagreement either way).
CROSS_CHECK_TOL = 1e-9
CROSS_CHECK_COND_SCALE = 1e-12

DEFAULT_SPECTRAL_GRID = 4096


@dataclass(frozen=True)
class PartialCoherenceResult:
    """Partial coherence with its canonical-correlation resolution.

    Attributes
    ----------
    rho2 : float
        Partial coherence in [0, 1].
    canonical_correlations : ndarray
        Partial canonical correlations k_i, descending, length min(p, q).
    coherence_matrix : ndarray
        The p-by-q whitened conditional cross-covariance.
    det_q : float
        Determinant of the normalized error covariance, 1 - rho2.
    """

    rho2: float
    canonical_correlations: np.ndarray
    coherence_matrix: np.ndarray
    det_q: float


@dataclass(frozen=True)
class InformationMeasures:
    """Gaussian information equivalents of a partial coherence value.

    All four are deterministic functions of rho2:
    kl_divergence = mutual_information = -0.5 log(1 - rho2),
    transfer_entropy = 2 kl_divergence, gg_measure = 1 - rho2.
    The saturated case rho2 = 1 yields infinite divergences and a zero
    gg_measure.
    """

    kl_divergence: float
    mutual_information: float
    transfer_entropy: float
    gg_measure: float


@dataclass(frozen=True)
class SpectralCoherence:
    """Narrowband coherence spectrum and its broadband aggregate.

    ``broadband_rho2`` is one minus the geometric mean of (1 - k2) over
    the frequency grid, the infinite-window per-sample limit of partial
    coherence for jointly stationary scalar series.
    """

    frequencies: np.ndarray
    narrowband_k2: np.ndarray
    broadband_rho2: float


def coherence_matrix(R: CompositeCovariance) -> np.ndarray:
    """The whitened conditional cross-covariance C = A^{-1/2} B D^{-1/2}.

    Here A = R_xx|z, B = R_xy|z, D = R_yy|z. All singular values of the
    result lie in [0, 1] up to rounding.
    """
    cond = conditional_covariances(R)
    return _coherence_matrix_from_conditionals(cond)


def _coherence_matrix_from_conditionals(cond: ConditionalCovariances) -> np.ndarray:
    try:
        wx = inv_sqrt_spd(cond.xx_z)
        wy = inv_sqrt_spd(cond.yy_z)
    except CovarianceError as exc:
        raise CovarianceError(f"degenerate conditional covariance: {exc}") from None
    return wx @ cond.xy_z @ wy


def _condition_number(A: np.ndarray) -> float:
    if A.shape[0] == 0:
        return 1.0
    vals = la.eigvalsh(A)
    if vals[0] <= 0:
        return math.inf
    return float(vals[-1] / vals[0])


def partial_canonical_correlations(C: np.ndarray) -> np.ndarray:
    """Singular values of the coherence matrix, descending, clamped to [0, 1)."""
    C = np.atleast_2d(np.asarray(C, dtype=float))
    if not np.all(np.isfinite(C)):
        raise ValueError("coherence matrix contains non-finite entries")
    k = la.svd(C, compute_uv=False)
    return np.clip(k, 0.0, K_CLAMP)


def partial_coherence(R: CompositeCovariance) -> PartialCoherenceResult:
    """Partial coherence of x and y given z, with full diagnostics.

    Returns
    -------
    PartialCoherenceResult
        rho2, the partial canonical correlations, the coherence matrix
        and det_q = 1 - rho2.

    Raises
    ------
    CovarianceError
        If a conditional covariance is not positive definite after the
        jitter policy, or if the log-det and singular-value routes
        disagree by more than the cross-check tolerance.
    """
    cond = conditional_covariances(R)
    log_one_minus = (
        log_det_spd(cond.uu_z) - log_det_spd(cond.xx_z) - log_det_spd(cond.yy_z)
    )
    # Rounding can push the determinant ratio marginally past 1.
    det_q = min(math.exp(log_one_minus), 1.0)
    C = _coherence_matrix_from_conditionals(cond)
    k = partial_canonical_correlations(C)
    det_q_svd = float(np.prod(1.0 - k**2))
    kappa = max(_condition_number(cond.xx_z), _condition_number(cond.yy_z))
    allowance = max(CROSS_CHECK_TOL, math.sqrt(kappa) * CROSS_CHECK_COND_SCALE)
    if abs(det_q - det_q_svd) > allowance:
        raise CovarianceError(
            "log-det and canonical-correlation routes disagree: "
            f"{det_q:.12e} vs {det_q_svd:.12e}"
        )
    return PartialCoherenceResult(
        rho2=1.0 - det_q,
        canonical_correlations=k,
        coherence_matrix=C,
        det_q=det_q,
    )


def partial_coherence_one_onto_two(R: CompositeCovariance) -> float:
    """Partial coherence computed by regressing x onto v = (y, z).

    Normalizes the error covariance of x given v by the error covariance
    of x given z alone. Identical to ``partial_coherence(R).rho2``; kept
    as a separate route because the equality is a structural invariant
    worth testing against.
    """
    xx_v = schur_complement(R, "xx_v")
    xx_z = schur_complement(R, "xx")
    log_det_p = log_det_spd(xx_v) - log_det_spd(xx_z)
    return 1.0 - min(math.exp(log_det_p), 1.0)


def conditional_estimator_gain(R: CompositeCovariance) -> np.ndarray:
    """Gain applied to the innovation y - ŷ(z) when estimating x from (y, z).

    The minimum mean-squared-error estimate is
    x̂(v) = x̂(z) + G (y - ŷ(z)) with G = R_xy|z R_yy|z^{-1}; a zero gain
    means y contributes nothing once z is accounted for.
    """
    cond = conditional_covariances(R)
    try:
        cf = la.cho_factor(cond.yy_z, lower=True)
    except la.LinAlgError:
        raise CovarianceError("degenerate conditional covariance of y given z") from None
    return la.cho_solve(cf, cond.xy_z.T).T


def information_measures(result: PartialCoherenceResult | float) -> InformationMeasures:
    """Gaussian information measures carried by a partial coherence.

    Accepts either a :class:`PartialCoherenceResult` or a bare rho2
    value in [0, 1]. rho2 = 1 is reported as the saturated point
    (infinite divergence, zero gg_measure) rather than an error.
    """
    rho2 = result.rho2 if isinstance(result, PartialCoherenceResult) else float(result)
    if not 0.0 <= rho2 <= 1.0:
        raise ValueError(f"rho2 must lie in [0, 1], got {rho2}")
    if rho2 == 1.0:
        return InformationMeasures(
            kl_divergence=math.inf,
            mutual_information=math.inf,
            transfer_entropy=math.inf,
            gg_measure=0.0,
        )
    transfer_entropy = -math.log1p(-rho2)
    kl = 0.5 * transfer_entropy
    return InformationMeasures(
        kl_divergence=kl,
        mutual_information=kl,
        transfer_entropy=transfer_entropy,
        gg_measure=1.0 - rho2,
    )


def block_diag_transform(
    R: CompositeCovariance,
    tx: np.ndarray,
    ty: np.ndarray,
    tz: np.ndarray | None = None,
) -> CompositeCovariance:
    """Covariance of (Tx x, Ty y, Tz z) for nonsingular square blocks.

    Partial coherence and the partial canonical correlations of the
    result equal those of the input; this function exists largely so
    that the invariance can be exercised.
    """
    dims = R.dims
    tx = np.atleast_2d(np.asarray(tx, dtype=float))
    ty = np.atleast_2d(np.asarray(ty, dtype=float))
    if tz is None:
        tz = np.eye(dims.r)
    tz = np.atleast_2d(np.asarray(tz, dtype=float)).reshape(dims.r, dims.r)
    for name, t, d in (("tx", tx, dims.p), ("ty", ty, dims.q), ("tz", tz, dims.r)):
        if t.shape != (d, d):
            raise ValueError(f"{name} must be {d}x{d}, got {t.shape}")
        if d and abs(la.det(t)) == 0.0:
            raise ValueError(f"{name} is singular")
    T = la.block_diag(tx, ty, tz)
    return CompositeCovariance.from_matrix(T @ R.entries @ T.T, dims)


def _two_sided_dtft(seq: np.ndarray, grid_size: int) -> np.ndarray:
    """DTFT of a two-sided sequence (odd length, lag 0 at the center) on
    the uniform grid theta_j = 2 pi j / grid_size, via a zero-padded FFT."""
    seq = np.asarray(seq, dtype=float)
    if seq.ndim != 1 or seq.size % 2 != 1:
        raise ValueError("covariance sequences must be one-dimensional with odd length")
    max_lag = seq.size // 2
    if 2 * max_lag + 1 > grid_size:
        raise ValueError("grid_size must exceed the sequence support")
    buf = np.zeros(grid_size, dtype=complex)
    for m in range(-max_lag, max_lag + 1):
        buf[m % grid_size] += seq[max_lag + m]
    return np.fft.fft(buf)


def spectral_partial_coherence(
    rxx: np.ndarray,
    ryy: np.ndarray,
    rxy: np.ndarray,
    grid_size: int = DEFAULT_SPECTRAL_GRID,
) -> SpectralCoherence:
    """Narrowband coherence spectrum from conditional covariance sequences.

    Parameters
    ----------
    rxx, ryy, rxy : ndarray
        Two-sided covariance sequences, odd length with lag 0 at the
        center index; ``rxx`` and ``ryy`` must be symmetric about lag 0,
        ``rxy`` need not be. Sequences are zero-padded to the grid.
    grid_size : int
        Number of uniform frequency points theta_j = 2 pi j / grid_size.

    Returns
    -------
    SpectralCoherence
        Per-frequency squared narrowband coherence
        k2(theta) = |Sxy|^2 / (Sxx Syy) and the broadband value
        1 - exp(sum_j log(1 - k2_j) / grid_size), the Riemann sum of the
        log-spectral integral.

    Raises
    ------
    ValueError
        If an auto-spectrum fails to be strictly positive somewhere on
        the grid.
    """
    sxx = _two_sided_dtft(rxx, grid_size).real
    syy = _two_sided_dtft(ryy, grid_size).real
    sxy = _two_sided_dtft(rxy, grid_size)
    if sxx.min() <= 0 or syy.min() <= 0:
        raise ValueError("auto-spectra must be strictly positive on the grid")
    k2 = np.abs(sxy) ** 2 / (sxx * syy)
    k2 = np.clip(k2, 0.0, K_CLAMP**2)
    broadband = 1.0 - math.exp(float(np.mean(np.log1p(-k2))))
    freqs = 2.0 * np.pi * np.arange(grid_size) / grid_size
    return SpectralCoherence(
        frequencies=freqs, narrowband_k2=k2, broadband_rho2=broadband
    )
