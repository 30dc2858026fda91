"""Generative models and analytic covariances for the built-in experiments.

Two families are provided. The moving-average demonstration family
couples an output series to a nearly-white input series through a finite
filter whose support offsets select past, future or mixed influence:

    x_n = h0 sum_k a^k mu_{n-k}
    y_n = g0 sum_k b^k nu_{n-k} + sum_j f_j x_{n-j}

The second family is the bivariate ARMA(r, 1) system used in the
Barnett-Seth power study: a pair of AR(1) channels coupled by one delay
through a coefficient c chosen so the transfer entropy from x to y is
exactly F, each channel then passed through (1 + f z)^r.

Auto- and cross-covariance sequences for both families are evaluated
analytically from the (truncated) moving-average expansions, and
composite covariances for arbitrary sample selections are assembled from
those sequences. Generators simulate the AR recursions directly and
apply the finite MA filters afterwards, so the only truncation anywhere
is in the analytic sums, where the discarded geometric tails are kept
below 1e-12 per coefficient.
"""
from __future__ import annotations

import csv
import math
from dataclasses import dataclass

import numpy as np
from scipy.signal import lfilter

from .covariance import BlockDims, CompositeCovariance
from .streams import stream_rng

__all__ = [
    "MAFilterSpec",
    "BarnettModelSpec",
    "NoiseSpec",
    "CovarianceSequences",
    "gen_ma_case",
    "gen_barnett",
    "analytic_covariances",
    "composite_from_sequences",
    "model_composite_covariance",
    "lag_window_covariance",
    "write_sequence_csv",
]

COEFF_TOL = 1e-12
BURN_IN = 1000

MA_CASES = {
    "I": ((0, 1, 2, 3), (0.7, 0.8, 0.7, 0.6)),
    "II": ((0, -1, -2, -3), (0.7, 0.8, 0.7, 0.3)),
    "III": ((2, 1, 0, -1, -2), (0.4, 0.8, 0.7, 0.8, 0.4)),
}


def _geometric(c0: float, ratio: float, tol: float = COEFF_TOL) -> np.ndarray:
    """One-sided sequence c0 * ratio^k truncated where |c0 ratio^K| < tol."""
    K = int(math.ceil(math.log(tol / abs(c0)) / math.log(abs(ratio))))
    return c0 * ratio ** np.arange(K + 1)


@dataclass(frozen=True)
class NoiseSpec:
    """Seeded standard-normal noise source with a stream index."""

    seed: int
    stream: int = 0
    distribution: str = "standard_normal"

    def __post_init__(self) -> None:
        if self.distribution != "standard_normal":
            raise ValueError(f"unsupported noise distribution {self.distribution!r}")


def _as_noise(noise: NoiseSpec | int) -> NoiseSpec:
    return noise if isinstance(noise, NoiseSpec) else NoiseSpec(seed=int(noise))


@dataclass(frozen=True)
class MAFilterSpec:
    """Coupled moving-average pair with a finite causal/anticausal filter.

    ``f_offsets[j]`` is the delay of ``f_coeffs[j]`` in
    y_n += f_j x_{n - offset_j}; negative offsets couple y to future x.
    """

    f_offsets: tuple[int, ...]
    f_coeffs: tuple[float, ...]
    h0: float = 0.8
    a: float = 0.1
    g0: float = 0.7
    b: float = 0.7
    name: str = "custom"

    def __post_init__(self) -> None:
        if len(self.f_offsets) != len(self.f_coeffs):
            raise ValueError("f_offsets and f_coeffs must have equal length")
        if len(set(self.f_offsets)) != len(self.f_offsets):
            raise ValueError("f_offsets must be distinct")
        if not (abs(self.a) < 1 and abs(self.b) < 1):
            raise ValueError("filter ratios must satisfy |a| < 1 and |b| < 1")

    @classmethod
    def from_case(cls, case: str) -> "MAFilterSpec":
        try:
            offsets, coeffs = MA_CASES[case]
        except KeyError:
            raise ValueError(f"unknown case {case!r}; expected I, II or III") from None
        return cls(f_offsets=offsets, f_coeffs=coeffs, name=case)

    @property
    def h(self) -> np.ndarray:
        return _geometric(self.h0, self.a)

    @property
    def g(self) -> np.ndarray:
        return _geometric(self.g0, self.b)

    @property
    def truncation(self) -> int:
        return max(self.h.size, self.g.size) - 1


@dataclass(frozen=True)
class BarnettModelSpec:
    """Bivariate ARMA(r, 1) with transfer entropy F from x to y.

    The AR core is eta1_t = a eta1_{t-1} + c eta2_{t-1} + mu_t,
    eta2_t = b eta2_{t-1} + nu_t, with
    c = sqrt(e^{-F} (e^F - 1)(e^F - b^2)); then y = (1 + f1 z)^r eta1 and
    x = (1 + f2 z)^r eta2. With F = 0 the channels decouple exactly.
    """

    transfer_entropy: float = 0.02
    ma_order: int = 1
    a: float = 0.9
    b: float = 0.8
    f1: float = 0.6
    f2: float = 0.7

    def __post_init__(self) -> None:
        if not (abs(self.a) < 1 and abs(self.b) < 1):
            raise ValueError("unstable parameters: need |a| < 1 and |b| < 1")
        if self.ma_order < 0:
            raise ValueError(f"ma_order must be >= 0, got {self.ma_order}")
        if self.transfer_entropy < 0:
            raise ValueError("transfer entropy must be >= 0")
        if self.transfer_entropy > 0 and math.exp(self.transfer_entropy) <= self.b**2:
            raise ValueError("coupling is complex: need e^F > b^2")

    @property
    def coupling(self) -> float:
        """The cross-channel coefficient c; zero iff the transfer entropy is."""
        F = self.transfer_entropy
        if F == 0:
            return 0.0
        return math.sqrt(math.exp(-F) * math.expm1(F) * (math.exp(F) - self.b**2))

    @property
    def ma_x(self) -> np.ndarray:
        """Coefficients of (1 + f2 z)^ma_order applied to the x channel."""
        r = self.ma_order
        return np.array([math.comb(r, j) * self.f2**j for j in range(r + 1)])

    @property
    def ma_y(self) -> np.ndarray:
        """Coefficients of (1 + f1 z)^ma_order applied to the y channel."""
        r = self.ma_order
        return np.array([math.comb(r, j) * self.f1**j for j in range(r + 1)])


@dataclass(frozen=True)
class CovarianceSequences:
    """Two-sided covariance sequences of a jointly stationary pair.

    Arrays have length 2 max_lag + 1 with lag 0 at the center. The cross
    sequence follows xy[m] = E[x_n y_{n+m}], so it is generally not
    symmetric about lag 0.
    """

    max_lag: int
    xx: np.ndarray
    yy: np.ndarray
    xy: np.ndarray

    def _at(self, arr: np.ndarray, m: int) -> float:
        if abs(m) > self.max_lag:
            raise ValueError(f"lag {m} exceeds the tabulated range {self.max_lag}")
        return float(arr[self.max_lag + m])

    def xx_at(self, m: int) -> float:
        return self._at(self.xx, m)

    def yy_at(self, m: int) -> float:
        return self._at(self.yy, m)

    def xy_at(self, m: int) -> float:
        return self._at(self.xy, m)


def gen_ma_case(
    case: str, length: int, noise: NoiseSpec | int
) -> tuple[np.ndarray, np.ndarray]:
    """Simulate one of the built-in MA demonstration cases.

    The geometric channels are run as exact AR(1) recursions; the finite
    coupling filter is applied by shifting, so future-coupling cases
    draw on samples beyond the returned range, which the trailing margin
    covers. Samples inside the burn-in are discarded.
    """
    spec = MAFilterSpec.from_case(case)
    if length <= 2 * spec.truncation:
        raise ValueError(
            f"length {length} too short: need more than {2 * spec.truncation} samples"
        )
    ns = _as_noise(noise)
    future = max(0, -min(spec.f_offsets))
    total = length + BURN_IN + future
    mu = stream_rng(ns.seed, ns.stream, 0).standard_normal(total)
    nu = stream_rng(ns.seed, ns.stream, 1).standard_normal(total)
    x_full = lfilter([spec.h0], [1.0, -spec.a], mu)
    y_full = lfilter([spec.g0], [1.0, -spec.b], nu)
    for off, coef in zip(spec.f_offsets, spec.f_coeffs):
        # y_n += coef * x_{n - off}; burn-in covers positive offsets and
        # the trailing margin covers negative ones.
        if off >= 0:
            y_full[off:] += coef * x_full[: total - off]
        else:
            y_full[: total + off] += coef * x_full[-off:]
    sl = slice(BURN_IN, BURN_IN + length)
    return x_full[sl].copy(), y_full[sl].copy()


def gen_barnett(
    spec: BarnettModelSpec, length: int, noise: NoiseSpec | int
) -> tuple[np.ndarray, np.ndarray]:
    """Simulate the bivariate ARMA(r, 1) pair, burn-in discarded.

    The AR recursion is run directly (no truncation) and the finite MA
    polynomials are applied afterwards.
    """
    if length < 1:
        raise ValueError(f"length must be >= 1, got {length}")
    ns = _as_noise(noise)
    total = length + BURN_IN
    mu = stream_rng(ns.seed, ns.stream, 0).standard_normal(total)
    nu = stream_rng(ns.seed, ns.stream, 1).standard_normal(total)
    eta2 = lfilter([1.0], [1.0, -spec.b], nu)
    drive = mu.copy()
    drive[1:] += spec.coupling * eta2[:-1]
    eta1 = lfilter([1.0], [1.0, -spec.a], drive)
    y = lfilter(spec.ma_y, [1.0], eta1)[BURN_IN:]
    x = lfilter(spec.ma_x, [1.0], eta2)[BURN_IN:]
    return x.copy(), y.copy()


def _overlap_sum(al: np.ndarray, be: np.ndarray, lags: np.ndarray) -> np.ndarray:
    """sum_k al[k] be[k+m] for one-sided coefficient arrays, per lag m."""
    out = np.empty(lags.size)
    for i, m in enumerate(lags):
        if m >= 0:
            n = min(al.size, be.size - m)
            out[i] = float(al[:n] @ be[m : m + n]) if n > 0 else 0.0
        else:
            n = min(be.size, al.size + m)
            out[i] = float(al[-m : -m + n] @ be[:n]) if n > 0 else 0.0
    return out


def _ma_case_covariances(spec: MAFilterSpec, max_lag: int) -> CovarianceSequences:
    h, g = spec.h, spec.g
    offs = np.asarray(spec.f_offsets)
    coefs = np.asarray(spec.f_coeffs)
    reach = int(np.abs(offs).max()) if offs.size else 0
    ext = max_lag + 2 * reach
    lags = np.arange(-ext, ext + 1)
    rxx_ext = _overlap_sum(h, h, lags)

    def rxx(m: int) -> float:
        return float(rxx_ext[ext + m])

    mid = np.arange(-max_lag, max_lag + 1)
    ryy = _overlap_sum(g, g, mid)
    rxy = np.zeros(mid.size)
    for i, m in enumerate(mid):
        rxy[i] = sum(c * rxx(m - k) for k, c in zip(offs, coefs))
        ryy[i] += sum(
            ck * cl * rxx(m + k - l)
            for k, ck in zip(offs, coefs)
            for l, cl in zip(offs, coefs)
        )
    rxx_mid = rxx_ext[ext - max_lag : ext + max_lag + 1].copy()
    return CovarianceSequences(max_lag=max_lag, xx=rxx_mid, yy=ryy, xy=rxy)


def _barnett_covariances(spec: BarnettModelSpec, max_lag: int) -> CovarianceSequences:
    ga = _geometric(1.0, spec.a)
    gb = _geometric(1.0, spec.b)
    # eta1 = ga * mu + c z (ga * gb) * nu;  eta2 = gb * nu.
    h_nu = np.concatenate([[0.0], spec.coupling * np.convolve(ga, gb)])
    phi = np.convolve(spec.ma_x, gb)  # x from nu
    psi_mu = np.convolve(spec.ma_y, ga)  # y from mu
    psi_nu = np.convolve(spec.ma_y, h_nu)  # y from nu
    lags = np.arange(-max_lag, max_lag + 1)
    xx = _overlap_sum(phi, phi, lags)
    yy = _overlap_sum(psi_mu, psi_mu, lags) + _overlap_sum(psi_nu, psi_nu, lags)
    xy = _overlap_sum(phi, psi_nu, lags)
    return CovarianceSequences(max_lag=max_lag, xx=xx, yy=yy, xy=xy)


def analytic_covariances(
    spec: MAFilterSpec | BarnettModelSpec, max_lag: int
) -> CovarianceSequences:
    """Exact covariance sequences of the model, to truncation tolerance.

    For the MA family: R_xx[m] = sum_k h_k h_{k+m},
    R_xy[m] = sum_k f_k R_xx[m - k], and
    R_yy[m] = sum_k g_k g_{k+m} + sum_{k,l} f_k f_l R_xx[m + k - l].
    The Barnett family is expanded into its moving-average form first.
    """
    if max_lag < 0:
        raise ValueError(f"max_lag must be >= 0, got {max_lag}")
    if isinstance(spec, MAFilterSpec):
        return _ma_case_covariances(spec, max_lag)
    if isinstance(spec, BarnettModelSpec):
        return _barnett_covariances(spec, max_lag)
    raise TypeError(f"unsupported model spec {type(spec).__name__}")


Sample = tuple[str, int]


def composite_from_sequences(
    seqs: CovarianceSequences,
    x_samples: list[Sample],
    y_samples: list[Sample],
    z_samples: list[Sample],
) -> CompositeCovariance:
    """Composite covariance of arbitrary (channel, time) sample selections.

    Each sample is a ("x"|"y", time index) pair; the times only matter
    through their differences. Raises if a required lag exceeds the
    tabulated range of ``seqs``.
    """
    samples = list(x_samples) + list(y_samples) + list(z_samples)
    dims = BlockDims(p=len(x_samples), q=len(y_samples), r=len(z_samples))
    n = dims.total
    m = np.zeros((n, n))
    for i, (ca, ta) in enumerate(samples):
        for j in range(i, n):
            cb, tb = samples[j]
            if ca == "x" and cb == "x":
                v = seqs.xx_at(tb - ta)
            elif ca == "y" and cb == "y":
                v = seqs.yy_at(tb - ta)
            elif ca == "x" and cb == "y":
                v = seqs.xy_at(tb - ta)
            else:
                v = seqs.xy_at(ta - tb)
            m[i, j] = v
            m[j, i] = v
    return CompositeCovariance.from_matrix(m, dims)


def _pairwise_conditioning(s: int, t: int, conditioning: str, depth: int) -> list[Sample]:
    if conditioning == "past-of-x":
        out: list[Sample] = []
        j = t
        while len(out) < depth:
            if j != s:
                out.append(("x", j))
            j -= 1
        return out
    if conditioning == "past-of-y":
        return [("y", t - j) for j in range(1, depth + 1)]
    raise ValueError(
        f"unknown conditioning {conditioning!r}; expected past-of-x or past-of-y"
    )


def model_composite_covariance(
    spec: MAFilterSpec | BarnettModelSpec | CovarianceSequences,
    s: int,
    t: int,
    conditioning: str = "past-of-x",
    T_cond: int = 20,
) -> CompositeCovariance:
    """Population covariance of (x_s, y_t, z) for the pairwise statistic.

    ``z`` is either the past of x up to time t with x_s excluded, or the
    past of y up to time t - 1, truncated to ``T_cond`` samples; x_s is
    never an element of z. Accepts precomputed sequences to avoid
    re-deriving them per grid point.
    """
    z_samples = _pairwise_conditioning(s, t, conditioning, T_cond)
    times = [s, t] + [tt for _, tt in z_samples]
    needed = max(times) - min(times)
    if isinstance(spec, CovarianceSequences):
        seqs = spec
        if needed > seqs.max_lag:
            raise ValueError(
                f"lag range exceeded: need {needed}, sequences cover {seqs.max_lag}"
            )
    else:
        seqs = analytic_covariances(spec, needed)
    return composite_from_sequences(seqs, [("x", s)], [("y", t)], z_samples)


def lag_window_covariance(
    spec: MAFilterSpec | BarnettModelSpec | CovarianceSequences, T: int
) -> CompositeCovariance:
    """Population covariance of ([x_{t-1}..x_{t-T}], y_t, [y_{t-1}..y_{t-T}]).

    This is the embedding geometry of the causality test; its partial
    coherence is the population value the sample statistic estimates.
    """
    if T < 1:
        raise ValueError(f"T must be >= 1, got {T}")
    seqs = spec if isinstance(spec, CovarianceSequences) else analytic_covariances(spec, T)
    if seqs.max_lag < T:
        raise ValueError(f"lag range exceeded: need {T}, sequences cover {seqs.max_lag}")
    xs: list[Sample] = [("x", -i) for i in range(1, T + 1)]
    ys: list[Sample] = [("y", 0)]
    zs: list[Sample] = [("y", -i) for i in range(1, T + 1)]
    return composite_from_sequences(seqs, xs, ys, zs)


def write_sequence_csv(path: str, x: np.ndarray, y: np.ndarray) -> None:
    """Write a generated pair in the t,x,y format the test command reads."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if x.shape != y.shape or x.ndim != 1:
        raise ValueError("x and y must be one-dimensional with equal length")
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["t", "x", "y"])
        for t, (xv, yv) in enumerate(zip(x, y)):
            writer.writerow([t, repr(float(xv)), repr(float(yv))])
