"""Driving signals on uniform grids: fBm sampling and Holder-type diagnostics.

A :class:`GridPath` is a d-dimensional signal sampled on the uniform grid
t_i = i*T/(n-1).  Times are always derived from (horizon, n_points), never
stored, so spacing is exact by construction.

Fractional Brownian motion is generated either by exact Cholesky
factorization of the increment covariance (small grids) or by the
Davies-Harte circulant embedding (large grids).  Both are exact-in-law when
the embedding is nonnegative definite; the choice only affects speed.
"""

from __future__ import annotations

import csv
import io
import struct
import warnings
from dataclasses import dataclass, field

import numpy as np

BINARY_MAGIC = b"YPGP"
BINARY_VERSION = 1

# Grid size up to which the exact Cholesky factorization is the default.
CHOLESKY_MAX_POINTS = 4096


def spawned_rngs(seed, count):
    """Independent child generators derived from one named seed."""
    return [np.random.default_rng(s) for s in np.random.SeedSequence(seed).spawn(count)]


@dataclass(frozen=True)
class GridPath:
    """A d-dimensional path sampled on a uniform grid over [0, T].

    values has shape (n_points, dim); a 1-D array is accepted and reshaped.
    """

    values: np.ndarray
    horizon: float

    def __post_init__(self):
        v = np.asarray(self.values, dtype=float)
        if v.ndim == 1:
            v = v[:, None]
        if v.ndim != 2:
            raise ValueError("values must be a 1-D or 2-D array")
        if v.shape[0] < 2:
            raise ValueError("need at least 2 grid points")
        if v.shape[1] < 1:
            raise ValueError("need at least 1 component")
        if not np.all(np.isfinite(v)):
            raise ValueError("path values must be finite")
        if not self.horizon > 0:
            raise ValueError("horizon must be positive")
        v = v.copy()
        v.setflags(write=False)
        object.__setattr__(self, "values", v)

    @property
    def n_points(self) -> int:
        return self.values.shape[0]

    @property
    def dim(self) -> int:
        return self.values.shape[1]

    @property
    def spacing(self) -> float:
        return self.horizon / (self.n_points - 1)

    @property
    def times(self) -> np.ndarray:
        return np.linspace(0.0, self.horizon, self.n_points)

    def values1d(self) -> np.ndarray:
        if self.dim != 1:
            raise ValueError("values1d requires a scalar path")
        return self.values[:, 0]

    def radii(self) -> np.ndarray:
        """Euclidean norm |x_{t_i}| per grid point."""
        return np.linalg.norm(self.values, axis=1)

    def subsample(self, stride: int) -> "GridPath":
        if (self.n_points - 1) % stride != 0:
            raise ValueError("stride must divide the number of grid cells")
        return GridPath(self.values[::stride], self.horizon)

    # ---------------- serialization ----------------

    def to_csv(self, fileobj) -> None:
        w = csv.writer(fileobj, lineterminator="\n")
        w.writerow(["t"] + [f"x{j + 1}" for j in range(self.dim)])
        for t, row in zip(self.times, self.values):
            w.writerow([repr(float(t))] + [repr(float(v)) for v in row])

    @classmethod
    def from_csv(cls, fileobj) -> "GridPath":
        rows = list(csv.reader(fileobj))
        header, body = rows[0], rows[1:]
        if header[0] != "t":
            raise ValueError("expected a 't,x1,...,xd' header")
        t = np.array([float(r[0]) for r in body])
        vals = np.array([[float(c) for c in r[1:]] for r in body])
        if len(t) < 2:
            raise ValueError("need at least 2 rows")
        return cls(vals, horizon=float(t[-1]))

    def to_binary(self, fileobj) -> None:
        fileobj.write(BINARY_MAGIC)
        fileobj.write(struct.pack("<HQQd", BINARY_VERSION, self.n_points, self.dim, self.horizon))
        for j in range(self.dim):
            fileobj.write(np.ascontiguousarray(self.values[:, j], dtype="<f8").tobytes())

    @classmethod
    def from_binary(cls, fileobj) -> "GridPath":
        magic = fileobj.read(4)
        if magic != BINARY_MAGIC:
            raise ValueError("bad magic bytes")
        version, n, d, horizon = struct.unpack("<HQQd", fileobj.read(2 + 8 + 8 + 8))
        if version != BINARY_VERSION:
            raise ValueError(f"unsupported version {version}")
        cols = [np.frombuffer(fileobj.read(8 * n), dtype="<f8") for _ in range(d)]
        return cls(np.stack(cols, axis=1), horizon=horizon)


@dataclass(frozen=True)
class HurstSpec:
    """Hurst exponent, dimension and seed for an fBm driver.

    The library targets the regime H > 1/2; H = 1/2 (standard Brownian
    motion) is accepted as a boundary sanity case for tests.
    """

    hurst: float
    dim: int = 1
    seed: int = 0

    def __post_init__(self):
        if not 0.0 < self.hurst < 1.0:
            raise ValueError(f"Hurst exponent must lie in (0,1), got {self.hurst}")
        if self.hurst < 0.5:
            raise ValueError("H < 1/2 is outside the supported regime")
        if self.dim < 1:
            raise ValueError("dim must be >= 1")


@dataclass(frozen=True)
class HolderEstimate:
    gamma: float
    norm: float
    max_lag: int
    argmax_pair: tuple = (0, 0)


@dataclass(frozen=True)
class RoughnessEstimate:
    gamma_hat: float
    modulus: float
    scales_checked: tuple = field(default_factory=tuple)


def _fgn_cholesky(H, m, dt, rng):
    """Exact increment sample: Cholesky factor of the fGn covariance."""
    lag = np.abs(np.subtract.outer(np.arange(m), np.arange(m))).astype(float)
    cov = 0.5 * ((lag + 1) ** (2 * H) - 2 * lag ** (2 * H) + np.abs(lag - 1) ** (2 * H))
    cov *= dt ** (2 * H)
    try:
        L = np.linalg.cholesky(cov)
    except np.linalg.LinAlgError as exc:
        raise ValueError("increment covariance is numerically not positive definite") from exc
    return L @ rng.standard_normal(m)


def _fgn_davies_harte(H, m, dt, rng):
    """O(m log m) circulant-embedding sample of fractional Gaussian noise."""
    k = np.arange(m + 1, dtype=float)
    r = 0.5 * ((k + 1) ** (2 * H) - 2 * k ** (2 * H) + np.abs(k - 1) ** (2 * H))
    c = np.concatenate([r, r[-2:0:-1]])
    lam = np.fft.fft(c).real
    if np.min(lam) < -1e-8 * np.max(lam):
        raise ValueError("circulant embedding is not nonnegative definite at this size")
    lam = np.clip(lam, 0.0, None)
    M = len(c)
    z = rng.standard_normal(M) + 1j * rng.standard_normal(M)
    w = np.fft.fft(np.sqrt(lam / (2 * M)) * z)
    return w[:m].real * np.sqrt(2.0) * dt ** H


def generate_fbm(spec: HurstSpec, n_points: int, horizon: float, method: str = "auto") -> GridPath:
    """Sample a d-dimensional fBm on the uniform grid, one seed per call.

    Components are independent, start at zero and have covariance
    E(B_t B_s) = (|t|^{2H} + |s|^{2H} - |t-s|^{2H}) / 2 per component.
    Deterministic given (spec.seed, method); `method` is one of
    "auto", "cholesky", "circulant".
    """
    if n_points < 2:
        raise ValueError("n_points must be >= 2")
    if method not in ("auto", "cholesky", "circulant"):
        raise ValueError(f"unknown method {method!r}")
    if method == "auto":
        method = "cholesky" if n_points <= CHOLESKY_MAX_POINTS else "circulant"
    dt = horizon / (n_points - 1)
    m = n_points - 1
    sampler = _fgn_cholesky if method == "cholesky" else _fgn_davies_harte
    out = np.zeros((n_points, spec.dim))
    for j, rng in enumerate(spawned_rngs(spec.seed, spec.dim)):
        out[1:, j] = np.cumsum(sampler(spec.hurst, m, dt, rng))
    return GridPath(out, horizon)


def holder_norm(path: GridPath, gamma: float, max_lag: int | None = None) -> HolderEstimate:
    """Discrete Holder seminorm: sup over grid pairs with |i-j| <= max_lag
    of |x_{t_i} - x_{t_j}| / |t_i - t_j|^gamma.

    The default window is the full grid, which equals the brute-force sup
    over all pairs.  The estimate is monotone nondecreasing in max_lag.
    """
    if not 0.0 < gamma < 1.0:
        raise ValueError("gamma must lie in (0,1)")
    n = path.n_points
    if max_lag is None:
        max_lag = n - 1
    if not 1 <= max_lag < n:
        raise ValueError("max_lag must satisfy 1 <= max_lag < n_points")
    h = path.spacing
    v = path.values
    best = 0.0
    best_pair = (0, 0)
    for lag in range(1, max_lag + 1):
        diffs = np.linalg.norm(v[lag:] - v[:-lag], axis=1)
        ratio = diffs / (lag * h) ** gamma
        i = int(np.argmax(ratio))
        if ratio[i] > best:
            best = float(ratio[i])
            best_pair = (i, i + lag)
    return HolderEstimate(gamma=gamma, norm=best, max_lag=max_lag, argmax_pair=best_pair)


def default_directions(dim: int) -> np.ndarray:
    """Symmetric direction set used by the roughness estimator.

    d=1 uses {+1, -1}; d>1 uses a fixed quasi-uniform antipodal net of
    2*d*8 unit vectors (deterministic across runs).
    """
    if dim == 1:
        return np.array([[1.0], [-1.0]])
    rng = np.random.default_rng(np.random.SeedSequence(1851))
    raw = rng.standard_normal((dim * 8, dim))
    raw /= np.linalg.norm(raw, axis=1, keepdims=True)
    return np.concatenate([raw, -raw], axis=0)


def roughness_modulus(path: GridPath, gamma_hat: float, scales,
                      directions: np.ndarray | None = None) -> RoughnessEstimate:
    """Largest c such that every (base point, scale, direction) triple admits
    a grid point t with eps/2 < |t-s| < eps and |<phi, x_t - x_s>| > c eps^{gamma_hat}.

    Computed as the min over (s, eps, phi) of the max over admissible t.
    Raises if some (s, eps) window contains no grid point.
    """
    scales = np.atleast_1d(np.asarray(scales, dtype=float))
    if np.any(scales <= 0) or np.any(scales > path.horizon / 2):
        raise ValueError("scales must lie in (0, T/2]")
    if directions is None:
        directions = default_directions(path.dim)
    directions = np.asarray(directions, dtype=float)
    if not np.allclose(np.linalg.norm(directions, axis=1), 1.0, atol=1e-9):
        raise ValueError("directions must be unit vectors")
    n = path.n_points
    h = path.spacing
    v = path.values
    proj = v @ directions.T                       # (n, k) signed projections
    modulus = np.inf
    for eps in scales:
        lags = np.arange(int(np.floor(0.5 * eps / h)) + 1, int(np.ceil(eps / h)))
        lags = lags[(lags * h > eps / 2) & (lags * h < eps)]
        if len(lags) == 0:
            raise ValueError(f"no grid lag falls inside (eps/2, eps) for eps={eps}")
        best = np.full((n, directions.shape[0]), -np.inf)
        covered = np.zeros(n, dtype=bool)
        for lag in lags:
            d = np.abs(proj[lag:] - proj[:-lag])  # |<phi, delta x>| at +/- lag
            best[:-lag] = np.maximum(best[:-lag], d)
            best[lag:] = np.maximum(best[lag:], d)
            covered[:-lag] = True
            covered[lag:] = True
        if not covered.all():
            raise ValueError(f"some base points have no admissible t at eps={eps}")
        modulus = min(modulus, float(best.min()) / eps ** gamma_hat)
    return RoughnessEstimate(gamma_hat=gamma_hat, modulus=max(modulus, 0.0),
                             scales_checked=tuple(float(e) for e in scales))
