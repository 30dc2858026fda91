"""Block-structured covariance algebra.

Covariance matrices over three stacked random vectors x (dim p), y (dim q)
and z (dim r) are stored whole, with named block accessors. The module
provides the conditional (Schur-complement) covariances obtained by
regressing out z or (y, z), the inverse-block readout that recovers the
same quantities from the precision matrix, and the SPD primitives
(inverse square root, log-determinant) everything downstream is built on.

All determinants are taken in the log domain through Cholesky factors;
determinant ratios are formed by subtracting log-determinants, never by
dividing determinants, so that high-dimensional sample covariances do not
underflow.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.linalg as la

__all__ = [
    "BlockDims",
    "CompositeCovariance",
    "ConditionalCovariances",
    "CovarianceError",
    "assemble_composite",
    "conditional_covariances",
    "schur_complement",
    "northwest_readout",
    "inv_sqrt_spd",
    "log_det_spd",
]

# Relative tolerances for validating composite covariances.
SYMMETRY_RTOL = 1e-12
PSD_RTOL = 1e-10

# Jitter policy for near-singular conditioning blocks: if the condition
# number exceeds COND_LIMIT, add JITTER_SCALE * mean(diag) to the diagonal
# and retry once.
COND_LIMIT = 1e12
JITTER_SCALE = 1e-10


class CovarianceError(ValueError):
    """Raised when a matrix violates a covariance contract (shape, symmetry,
    positive semidefiniteness, or singularity beyond the jitter policy)."""


@dataclass(frozen=True)
class BlockDims:
    """Dimensions of the x, y and z blocks of a composite covariance."""

    p: int
    q: int
    r: int

    def __post_init__(self) -> None:
        if self.p < 1 or self.q < 1:
            raise ValueError(f"p and q must be >= 1, got p={self.p}, q={self.q}")
        if self.r < 0:
            raise ValueError(f"r must be >= 0, got r={self.r}")

    @property
    def total(self) -> int:
        return self.p + self.q + self.r

    @property
    def x_slice(self) -> slice:
        return slice(0, self.p)

    @property
    def y_slice(self) -> slice:
        return slice(self.p, self.p + self.q)

    @property
    def z_slice(self) -> slice:
        return slice(self.p + self.q, self.total)

    @property
    def u_slice(self) -> slice:
        """The composite (x, y) block."""
        return slice(0, self.p + self.q)

    @property
    def v_slice(self) -> slice:
        """The composite (y, z) block."""
        return slice(self.p, self.total)


@dataclass(frozen=True)
class CompositeCovariance:
    """Validated covariance of the stacked vector (x, y, z).

    Construct through :func:`assemble_composite` (or
    :meth:`from_matrix` for an already-assembled matrix); direct
    construction skips no validation because ``__post_init__`` runs it.
    """

    entries: np.ndarray
    dims: BlockDims

    def __post_init__(self) -> None:
        m = np.asarray(self.entries, dtype=float)
        n = self.dims.total
        if m.shape != (n, n):
            raise CovarianceError(f"expected a {n}x{n} matrix for dims {self.dims}, got {m.shape}")
        if not np.all(np.isfinite(m)):
            raise CovarianceError("matrix contains non-finite entries")
        scale = max(np.abs(m).max(), 1.0)
        if np.abs(m - m.T).max() > SYMMETRY_RTOL * scale:
            raise CovarianceError("matrix is not symmetric within tolerance")
        eigmin = la.eigvalsh(m, subset_by_index=(0, 0))[0]
        trace = np.trace(m)
        if eigmin < -PSD_RTOL * max(trace, 1.0):
            raise CovarianceError(
                f"matrix is not positive semidefinite: min eigenvalue {eigmin:.3e} "
                f"against trace {trace:.3e}"
            )
        m = m.copy()
        m.flags.writeable = False
        object.__setattr__(self, "entries", m)

    @classmethod
    def from_matrix(cls, matrix: np.ndarray, dims: BlockDims) -> "CompositeCovariance":
        """Symmetrize and validate an already-assembled matrix."""
        m = np.asarray(matrix, dtype=float)
        return cls(0.5 * (m + m.T), dims)

    @property
    def xx(self) -> np.ndarray:
        return self.entries[self.dims.x_slice, self.dims.x_slice]

    @property
    def xy(self) -> np.ndarray:
        return self.entries[self.dims.x_slice, self.dims.y_slice]

    @property
    def xz(self) -> np.ndarray:
        return self.entries[self.dims.x_slice, self.dims.z_slice]

    @property
    def yy(self) -> np.ndarray:
        return self.entries[self.dims.y_slice, self.dims.y_slice]

    @property
    def yz(self) -> np.ndarray:
        return self.entries[self.dims.y_slice, self.dims.z_slice]

    @property
    def zz(self) -> np.ndarray:
        return self.entries[self.dims.z_slice, self.dims.z_slice]

    @property
    def uu(self) -> np.ndarray:
        return self.entries[self.dims.u_slice, self.dims.u_slice]

    @property
    def uz(self) -> np.ndarray:
        return self.entries[self.dims.u_slice, self.dims.z_slice]

    @property
    def xv(self) -> np.ndarray:
        return self.entries[self.dims.x_slice, self.dims.v_slice]

    @property
    def vv(self) -> np.ndarray:
        return self.entries[self.dims.v_slice, self.dims.v_slice]


@dataclass(frozen=True)
class ConditionalCovariances:
    """Error covariances after regressing on z (and on v = (y, z)).

    ``uu_z`` is the joint error covariance of (x - x̂(z), y - ŷ(z)); its
    corner blocks are ``xx_z`` and ``yy_z`` and its off-diagonal block is
    the partial cross-covariance ``xy_z``. ``xx_v`` is the error
    covariance of x estimated from both y and z.
    """

    uu_z: np.ndarray
    xx_z: np.ndarray
    yy_z: np.ndarray
    xy_z: np.ndarray
    xx_v: np.ndarray


def assemble_composite(
    xx: np.ndarray,
    xy: np.ndarray,
    xz: np.ndarray,
    yy: np.ndarray,
    yz: np.ndarray,
    zz: np.ndarray,
    dims: BlockDims,
) -> CompositeCovariance:
    """Assemble the six distinct blocks into a validated composite covariance.

    Parameters
    ----------
    xx, xy, xz, yy, yz, zz : ndarray
        Upper-triangle blocks; shapes must match ``dims``. For r = 0 the
        z-facing blocks must be empty (shape with a zero axis is fine).
    dims : BlockDims
        Block dimensions (p, q, r).

    Returns
    -------
    CompositeCovariance
        The assembled matrix, symmetrized by averaging with its transpose
        before validation.

    Raises
    ------
    CovarianceError
        On shape mismatch or a PSD violation beyond tolerance.
    """
    p, q, r = dims.p, dims.q, dims.r
    named = {
        "xx": (np.atleast_2d(np.asarray(xx, dtype=float)), (p, p)),
        "xy": (np.atleast_2d(np.asarray(xy, dtype=float)), (p, q)),
        "yy": (np.atleast_2d(np.asarray(yy, dtype=float)), (q, q)),
    }
    if r:
        named["xz"] = (np.atleast_2d(np.asarray(xz, dtype=float)), (p, r))
        named["yz"] = (np.atleast_2d(np.asarray(yz, dtype=float)), (q, r))
        named["zz"] = (np.atleast_2d(np.asarray(zz, dtype=float)), (r, r))
    else:
        for name, block in (("xz", xz), ("yz", yz), ("zz", zz)):
            if np.asarray(block, dtype=float).size != 0:
                raise CovarianceError(f"block {name} must be empty when r = 0")
    for name, (block, shape) in named.items():
        if block.shape != shape:
            raise CovarianceError(f"block {name} has shape {block.shape}, expected {shape}")
    n = dims.total
    m = np.zeros((n, n))
    xs, ys, zs = dims.x_slice, dims.y_slice, dims.z_slice
    m[xs, xs] = named["xx"][0]
    m[xs, ys] = named["xy"][0]
    m[ys, xs] = named["xy"][0].T
    m[ys, ys] = named["yy"][0]
    if r:
        m[xs, zs] = named["xz"][0]
        m[zs, xs] = named["xz"][0].T
        m[ys, zs] = named["yz"][0]
        m[zs, ys] = named["yz"][0].T
        m[zs, zs] = named["zz"][0]
    return CompositeCovariance.from_matrix(m, dims)


def _solve_conditioning(rbb: np.ndarray, rab: np.ndarray) -> np.ndarray:
    """Return ``rab @ rbb^{-1} @ rab.T`` with the diagonal-jitter retry.

    ``rbb`` is the covariance of the conditioning block; an empty block
    yields a zero correction (conditioning on nothing).
    """
    if rbb.shape[0] == 0:
        return np.zeros((rab.shape[0], rab.shape[0]))
    current = rbb
    for attempt in (0, 1):
        try:
            eigs = la.eigvalsh(current)
            if eigs[0] <= 0 or eigs[-1] / eigs[0] > COND_LIMIT:
                raise la.LinAlgError("ill-conditioned conditioning block")
            cf = la.cho_factor(current, lower=True)
            sol = la.cho_solve(cf, rab.T)
            return rab @ sol
        except la.LinAlgError:
            if attempt == 1:
                raise CovarianceError(
                    "conditioning block is singular beyond the jitter policy"
                ) from None
            current = rbb + JITTER_SCALE * np.mean(np.diag(rbb)) * np.eye(rbb.shape[0])
    raise AssertionError("unreachable")


def schur_complement(R: CompositeCovariance, target: str) -> np.ndarray:
    """Compute a named conditional covariance of ``R``.

    Parameters
    ----------
    R : CompositeCovariance
    target : {"uu", "xx", "yy", "xx_v"}
        ``"uu"``, ``"xx"``, ``"yy"`` condition the named block on z;
        ``"xx_v"`` conditions x on v = (y, z).

    Returns
    -------
    ndarray
        The error covariance of the target block given the conditioning
        block. With r = 0 the z-conditioned targets are returned
        unchanged (conditioning on nothing).
    """
    if target == "uu":
        m = R.uu - _solve_conditioning(R.zz, R.uz)
    elif target == "xx":
        m = R.xx - _solve_conditioning(R.zz, R.xz)
    elif target == "yy":
        m = R.yy - _solve_conditioning(R.zz, R.yz)
    elif target == "xx_v":
        m = R.xx - _solve_conditioning(R.vv, R.xv)
    else:
        raise ValueError(f"unknown target {target!r}; expected uu, xx, yy or xx_v")
    return 0.5 * (m + m.T)


def conditional_covariances(R: CompositeCovariance) -> ConditionalCovariances:
    """All z-conditioned error covariances of ``R``, plus x given (y, z)."""
    p = R.dims.p
    uu_z = schur_complement(R, "uu")
    return ConditionalCovariances(
        uu_z=uu_z,
        xx_z=uu_z[:p, :p],
        yy_z=uu_z[p:, p:],
        xy_z=uu_z[:p, p:],
        xx_v=schur_complement(R, "xx_v"),
    )


def northwest_readout(R: CompositeCovariance) -> np.ndarray:
    """Recover the (x, y)-given-z error covariance from the precision matrix.

    Inverts ``R``, reads the (p+q)-square Northwest block, and inverts it
    back. Equals ``schur_complement(R, "uu")`` for positive definite
    ``R``; the redundancy is the point, as the two routes cross-check
    each other.
    """
    n = R.dims.total
    try:
        cf = la.cho_factor(R.entries, lower=True)
    except la.LinAlgError:
        raise CovarianceError("composite covariance is singular") from None
    rinv = la.cho_solve(cf, np.eye(n))
    nw = rinv[R.dims.u_slice, R.dims.u_slice]
    out = la.inv(nw)
    return 0.5 * (out + out.T)


def inv_sqrt_spd(A: np.ndarray) -> np.ndarray:
    """Symmetric inverse square root of an SPD matrix.

    The result B satisfies B A B = I. Computed by eigendecomposition,
    which keeps B exactly symmetric.
    """
    A = np.asarray(A, dtype=float)
    if A.shape[0] == 0:
        return A.copy()
    vals, vecs = la.eigh(0.5 * (A + A.T))
    if vals[0] <= 0:
        raise CovarianceError(f"matrix is not positive definite: min eigenvalue {vals[0]:.3e}")
    return (vecs / np.sqrt(vals)) @ vecs.T


def log_det_spd(A: np.ndarray) -> float:
    """log det of an SPD matrix via its Cholesky factor."""
    A = np.asarray(A, dtype=float)
    if A.shape[0] == 0:
        return 0.0
    try:
        cf = la.cholesky(0.5 * (A + A.T), lower=True)
    except la.LinAlgError:
        raise CovarianceError("matrix is not positive definite") from None
    return float(2.0 * np.sum(np.log(np.diag(cf))))
