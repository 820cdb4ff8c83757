"""Fractional Gaussian noise: correlation structure and exact path sampling.

The sampler embeds the n x n Toeplitz correlation matrix of fGn into a
circulant of size M = next power of two >= 2n, takes its eigenvalues by FFT
of the first row, and synthesises the path spectrally from two independent
standard normal vectors.  This is exact in law when the circulant is
nonnegative definite; otherwise it falls back to a dense Cholesky factor of
the Toeplitz matrix and tags the path accordingly.
"""

from __future__ import annotations

import io
from dataclasses import dataclass

import numpy as np
import scipy.linalg

# splitmix64 increment; all seed mixing is mod 2^64
_GAMMA = 0x9E3779B97F4A7C15
_MASK = 0xFFFFFFFFFFFFFFFF


def _mix64(z: int) -> int:
    """splitmix64 finalizer (Steele, Lea & Flood 2014)."""
    z &= _MASK
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK
    return (z ^ (z >> 31)) & _MASK


def derive_seed(master_seed: int, index: int) -> int:
    """Seed of replicate `index` under `master_seed`.

    Defined as the splitmix64 finalizer applied to
    (master_seed + (index+1)*0x9E3779B97F4A7C15) mod 2^64, so replicate
    streams are reproducible from the two integers alone.
    """
    return _mix64((master_seed + (index + 1) * _GAMMA) & _MASK)


def rho(H: float, a) -> float | np.ndarray:
    """Stationary correlation of fGn at integer lag a.

    rho(a) = ((|a+1|^2H + |a-1|^2H - 2|a|^2H)) / 2.  rho(0) = 1 for any H,
    and rho vanishes off 0 at H = 1/2.
    """
    arr = np.abs(np.asarray(a, dtype=float))
    out = 0.5 * (
        np.abs(arr + 1) ** (2 * H) + np.abs(arr - 1) ** (2 * H) - 2 * arr ** (2 * H)
    )
    return float(out) if out.ndim == 0 else out


def fbm_covariance(H: float, s: float, t: float) -> float:
    """Covariance of fractional Brownian motion at times (s, t)."""
    if not 0 < H < 1:
        raise ValueError(f"Hurst index must lie in (0,1), got {H}")
    return 0.5 * (abs(t) ** (2 * H) + abs(s) ** (2 * H) - abs(t - s) ** (2 * H))


@dataclass(frozen=True)
class GaussianPath:
    """One seeded realization of a stationary standard-Gaussian sequence."""

    values: np.ndarray
    H: float
    seed: int
    sampler_tag: str  # "circulant" or "cholesky"

    def __len__(self) -> int:
        return len(self.values)


class CholeskyFailure(RuntimeError):
    """Raised when the Toeplitz fallback factorization fails."""

    def __init__(self, order: int, message: str):
        self.order = order
        super().__init__(message)


def toeplitz_matrix(H: float, n: int) -> np.ndarray:
    """Correlation matrix Sigma_n[i,j] = rho(H, i-j)."""
    return scipy.linalg.toeplitz(rho(H, np.arange(n)))


def toeplitz_eigen(H: float, n: int, budget: int = 4096) -> np.ndarray:
    """Eigenvalues of Sigma_n, sorted descending.

    Dense symmetric solve; n above `budget` is refused (use the Monte Carlo
    sampling path for larger sizes).
    """
    if n < 1:
        raise ValueError("n must be >= 1")
    if n > budget:
        raise ValueError(
            f"n={n} exceeds the dense eigensolver budget {budget}; "
            "use Monte Carlo sampling instead or raise `budget` explicitly"
        )
    ev = np.linalg.eigvalsh(toeplitz_matrix(H, n))
    return ev[::-1]


# relative tolerance distinguishing circulant round-off from genuine
# embedding failure
_TOL_EIG_REL = 1e-9


def _circulant_eigenvalues(H: float, n: int) -> tuple[np.ndarray, int]:
    m = 1
    while m < 2 * n:
        m *= 2
    lag = np.minimum(np.arange(m), m - np.arange(m))
    return np.fft.fft(rho(H, lag)).real, m


def sample_fgn_batch(H: float, n: int, seeds) -> tuple[np.ndarray, str]:
    """Sample one fGn path per seed; rows are independent exact paths.

    Returns (values array of shape (len(seeds), n), sampler_tag).  Each row
    is a deterministic function of (H, n, seed) alone, so batching never
    changes the result.
    """
    if n < 1:
        raise ValueError("n must be >= 1")
    if not 0 < H < 1:
        raise ValueError(f"Hurst index must lie in (0,1), got {H}")
    seeds = list(seeds)
    if n == 1:
        rows = np.empty((len(seeds), 1))
        for i, s in enumerate(seeds):
            rows[i, 0] = np.random.Generator(np.random.PCG64(s)).standard_normal()
        return rows, "circulant"

    ev, m = _circulant_eigenvalues(H, n)
    if ev.min() < -_TOL_EIG_REL * ev.max():
        return _sample_fgn_cholesky(H, n, seeds)

    scale = np.sqrt(np.maximum(ev, 0.0) / m)
    out = np.empty((len(seeds), n))
    chunk = max(1, int(2**24 // m))  # bound scratch memory to ~0.5 GB
    for start in range(0, len(seeds), chunk):
        batch = seeds[start : start + chunk]
        z = np.empty((len(batch), m), dtype=complex)
        for i, s in enumerate(batch):
            g = np.random.Generator(np.random.PCG64(s)).standard_normal((2, m))
            z[i] = g[0] + 1j * g[1]
        out[start : start + len(batch)] = np.fft.fft(scale * z, axis=1).real[:, :n]
    return out, "circulant"


def _sample_fgn_cholesky(H, n, seeds):
    sigma = toeplitz_matrix(H, n)
    try:
        L = np.linalg.cholesky(sigma)
    except np.linalg.LinAlgError:
        # locate the offending leading minor for the error report
        lo, hi = 1, n
        while lo < hi:
            mid = (lo + hi) // 2
            try:
                np.linalg.cholesky(sigma[:mid, :mid])
                lo = mid + 1
            except np.linalg.LinAlgError:
                hi = mid
        raise CholeskyFailure(
            lo,
            f"Toeplitz correlation matrix (H={H}, n={n}) is not numerically "
            f"positive definite: leading minor of order {lo} fails",
        ) from None
    rows = np.empty((len(seeds), n))
    for i, s in enumerate(seeds):
        g = np.random.Generator(np.random.PCG64(s)).standard_normal(n)
        rows[i] = L @ g
    return rows, "cholesky"


def sample_fgn(H: float, n: int, seed: int) -> GaussianPath:
    """Exact-in-law stationary fGn path of length n, deterministic in seed."""
    values, tag = sample_fgn_batch(H, n, [seed])
    return GaussianPath(values=values[0], H=H, seed=seed, sampler_tag=tag)


def save_path_csv(path: GaussianPath, f) -> None:
    """Write a path as CSV: a `# key=value` header line, then one value per line."""
    own = isinstance(f, (str, bytes))
    fh = open(f, "w", newline="\n") if own else f
    try:
        fh.write(
            f"# H={path.H!r} n={len(path.values)} seed={path.seed} "
            f"sampler_tag={path.sampler_tag}\n"
        )
        fh.write("value\n")
        for v in path.values:
            fh.write(f"{v!r}\n")
    finally:
        if own:
            fh.close()


def load_path_csv(f) -> GaussianPath:
    """Inverse of save_path_csv."""
    own = isinstance(f, (str, bytes))
    fh = open(f, "r") if own else f
    try:
        header = fh.readline().strip()
        if not header.startswith("# "):
            raise ValueError("missing path header line")
        fields = dict(kv.split("=", 1) for kv in header[2:].split(" "))
        column = fh.readline().strip()
        if column != "value":
            raise ValueError(f"unexpected column header {column!r}")
        values = np.array([float(line) for line in fh if line.strip()])
        if len(values) != int(fields["n"]):
            raise ValueError("value count does not match header n")
        return GaussianPath(
            values=values,
            H=float(fields["H"]),
            seed=int(fields["seed"]),
            sampler_tag=fields["sampler_tag"],
        )
    finally:
        if own:
            fh.close()
