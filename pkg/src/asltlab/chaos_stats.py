"""Path functionals: variation series, log-average measures, distances.

The log-average empirical measure of a series (G_k) carries atoms G_k with
weights 1/k.  Two normalizers are maintained side by side: log n (the one
entering the criterion statistic Delta_n and all weighted condition series)
and the harmonic sum H_n (which makes the measure a probability measure, as
needed for CDF and Kolmogorov-Smirnov comparisons).  Every report states
which normalizer it used.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np

from .gaussian_inputs import GaussianPath, derive_seed, rho, sample_fgn_batch
from .hermite import hermite_eval
from .reports import ConditionReport


def variance_Vn_prefix(q: int, H: float, N: int) -> np.ndarray:
    """Exact Var(V_n) for n = 1..N in O(N).

    Var(V_n) = q! sum_{|a|<n} (n-|a|) rho(a)^q, by stationarity and the
    Hermite covariance identity.
    """
    if N < 1:
        raise ValueError("N must be >= 1")
    n = np.arange(1, N + 1, dtype=float)
    if N == 1:
        return math.factorial(q) * n
    r = rho(H, np.arange(1, N)) ** q
    S1 = np.concatenate([[0.0], np.cumsum(r)])
    T1 = np.concatenate([[0.0], np.cumsum(np.arange(1, N) * r)])
    idx = np.arange(N)  # n-1
    return math.factorial(q) * (n + 2.0 * (n * S1[idx] - T1[idx]))


def variance_Vn(q: int, H: float, n: int) -> float:
    """Exact Var(V_n) = q! sum_{|a|<n}(n-|a|) rho(a)^q."""
    return float(variance_Vn_prefix(q, H, n)[-1])


@dataclass
class VariationSeries:
    """Prefix Hermite-variation series of one path with both normalizations.

    V[n-1] = sum_{k<=n} H_q(X_k); G = V/sqrt(Var V); G_hat = n^{q(1-H)-1} V.
    """

    q: int
    H: float
    V: np.ndarray
    var_exact: np.ndarray
    G: np.ndarray
    G_hat: np.ndarray

    def __len__(self) -> int:
        return len(self.V)


def variation_series(path: GaussianPath, q: int) -> VariationSeries:
    """Hermite variation prefix series of a sampled path."""
    values = np.asarray(path.values, dtype=float)
    if values.size == 0:
        raise ValueError("path is empty")
    N = values.size
    V = np.cumsum(hermite_eval(q, values))
    var = variance_Vn_prefix(q, path.H, N)
    n = np.arange(1, N + 1, dtype=float)
    return VariationSeries(
        q=q,
        H=path.H,
        V=V,
        var_exact=var,
        G=V / np.sqrt(var),
        G_hat=n ** (q * (1 - path.H) - 1) * V,
    )


def section4_series(X: np.ndarray) -> np.ndarray:
    """G_n = X_n (2n)^{-1/2} sum_{j=0}^{n-1}(X_j^2 - 1) from one iid stream.

    X holds X_0..X_N; the result has length N.
    """
    X = np.asarray(X, dtype=float)
    N = len(X) - 1
    S = np.cumsum(X[:-1] ** 2 - 1.0)
    n = np.arange(1, N + 1, dtype=float)
    return X[1:] * S / np.sqrt(2.0 * n)


def section4_tilde_series(X: np.ndarray) -> np.ndarray:
    """The ill-behaved variant X_0 (2n)^{-1/2} sum_{j=1}^{n}(X_j^2 - 1)."""
    X = np.asarray(X, dtype=float)
    N = len(X) - 1
    S = np.cumsum(X[1:] ** 2 - 1.0)
    n = np.arange(1, N + 1, dtype=float)
    return X[0] * S / np.sqrt(2.0 * n)


def replicate_hermite_series(
    q: int, H: float, N: int, replicates: int, master_seed: int, which: str = "G"
) -> np.ndarray:
    """(replicates, N) array of G or G_hat values from independent fGn paths.

    Replicate r uses seed derive_seed(master_seed, r); rows are independent
    of batching and thread count.
    """
    seeds = [derive_seed(master_seed, r) for r in range(replicates)]
    values, _ = sample_fgn_batch(H, N, seeds)
    V = np.cumsum(hermite_eval(q, values), axis=1)
    n = np.arange(1, N + 1, dtype=float)
    if which == "G":
        return V / np.sqrt(variance_Vn_prefix(q, H, N))[None, :]
    if which == "G_hat":
        return V * (n ** (q * (1 - H) - 1))[None, :]
    raise ValueError(f"unknown normalization {which!r}")


def replicate_section4_series(
    N: int, replicates: int, master_seed: int, tilde: bool = False
) -> np.ndarray:
    """(replicates, N) array of the product-of-Gaussians series."""
    out = np.empty((replicates, N))
    build = section4_tilde_series if tilde else section4_series
    for r in range(replicates):
        rng = np.random.Generator(np.random.PCG64(derive_seed(master_seed, r)))
        out[r] = build(rng.standard_normal(N + 1))
    return out


@dataclass
class LogAverageMeasure:
    """Weighted atom set {(G_k, 1/k)}_{k<=n} with both normalizers."""

    values: np.ndarray  # G_1..G_n in index order

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=float)
        if self.values.size < 1:
            raise ValueError("measure needs at least one atom")

    @property
    def n(self) -> int:
        return self.values.size

    @property
    def weights(self) -> np.ndarray:
        return 1.0 / np.arange(1, self.n + 1)

    @property
    def normalizer_log(self) -> float:
        return math.log(self.n)

    @property
    def normalizer_harmonic(self) -> float:
        return float(np.sum(self.weights))

    def _normalizer(self, normalization: str) -> float:
        if normalization == "log":
            return self.normalizer_log
        if normalization == "harmonic":
            return self.normalizer_harmonic
        raise ValueError(f"unknown normalization {normalization!r}")

    def sorted_atoms(self) -> tuple[np.ndarray, np.ndarray]:
        """(sorted values, matching weights)."""
        order = np.argsort(self.values, kind="stable")
        return self.values[order], self.weights[order]


def log_average_cdf(
    m: LogAverageMeasure, x, normalization: str = "harmonic"
) -> float | np.ndarray:
    """(1/normalizer) sum_k (1/k) 1{G_k <= x}; a true CDF under `harmonic`."""
    v, w = m.sorted_atoms()
    cw = np.concatenate([[0.0], np.cumsum(w)]) / m._normalizer(normalization)
    out = cw[np.searchsorted(v, np.asarray(x, dtype=float), side="right")]
    return float(out) if np.ndim(x) == 0 else out


def log_average_charfn(
    m: LogAverageMeasure, t, normalization: str = "log"
) -> complex | np.ndarray:
    """(1/normalizer) sum_k (1/k) exp(i t G_k)."""
    t_arr = np.asarray(t, dtype=float)
    out = np.exp(1j * np.outer(t_arr.ravel(), m.values)) @ m.weights
    out = out / m._normalizer(normalization)
    return complex(out[0]) if t_arr.ndim == 0 else out.reshape(t_arr.shape)


def ks_distance(m: LogAverageMeasure, ref) -> float:
    """sup over atom positions (both one-sided limits of the empirical CDF)
    of |F_m - F_ref|, with F_m under the harmonic normalizer."""
    v, w = m.sorted_atoms()
    cw = np.cumsum(w) / m.normalizer_harmonic
    F = np.asarray(ref.cdf(v), dtype=float)
    before = np.concatenate([[0.0], cw[:-1]])
    return float(max(np.abs(cw - F).max(), np.abs(before - F).max()))


def ks_distance_measures(a: LogAverageMeasure, b: LogAverageMeasure) -> float:
    """Exact sup-distance between two harmonic log-average CDFs."""
    va, wa = a.sorted_atoms()
    vb, wb = b.sorted_atoms()
    grid = np.concatenate([va, vb])
    grid.sort(kind="stable")
    ca = np.concatenate([[0.0], np.cumsum(wa)]) / a.normalizer_harmonic
    cb = np.concatenate([[0.0], np.cumsum(wb)]) / b.normalizer_harmonic
    Fa = ca[np.searchsorted(va, grid, side="right")]
    Fb = cb[np.searchsorted(vb, grid, side="right")]
    return float(np.abs(Fa - Fb).max())


def wasserstein1(
    m: LogAverageMeasure, ref, window: float = 12.0, grid_points: int = 4096
) -> float:
    """Integral of |F_m - F_ref| over [-window, window].

    The empirical CDF is a step function; the grid unions the atoms with a
    uniform subdivision so each cell sees a constant F_m, and the reference
    CDF is trapezoid-integrated within cells.
    """
    value, _ = wasserstein1_with_tail(m, ref, window, grid_points)
    return value


def wasserstein1_with_tail(
    m: LogAverageMeasure, ref, window: float = 12.0, grid_points: int = 4096
) -> tuple[float, float]:
    """(truncated W1 value, bound on the omitted tail integral)."""
    L = float(window)
    v, w = m.sorted_atoms()
    cw = np.concatenate([[0.0], np.cumsum(w)]) / m.normalizer_harmonic
    inside = v[(v > -L) & (v < L)]
    grid = np.unique(np.concatenate([np.linspace(-L, L, grid_points + 1), inside]))
    Fm = cw[np.searchsorted(v, grid, side="right")]
    Fr = np.asarray(ref.cdf(grid), dtype=float)
    dx = np.diff(grid)
    left = np.abs(Fm[:-1] - Fr[:-1])
    right = np.abs(Fm[:-1] - Fr[1:])
    value = float(np.sum(0.5 * (left + right) * dx))

    # tail bound: int_{|x|>L} |Fm - Fr| <= E_m[(|X|-L)^+] + E_ref[(|X|-L)^+]
    emp_tail = float(np.sum(w * np.maximum(np.abs(v) - L, 0.0))) / m.normalizer_harmonic
    span = np.linspace(L, L + 40.0, 2001)
    upper = np.asarray(ref.cdf(span), dtype=float)
    lower = np.asarray(ref.cdf(-span), dtype=float)
    ref_tail = float(np.trapezoid(1.0 - upper, span) + np.trapezoid(lower, span))
    return value, emp_tail + ref_tail


def wasserstein1_quantiles(qa: np.ndarray, qb: np.ndarray) -> float:
    """W1 between two laws given by equal-length sorted quantile grids."""
    qa = np.asarray(qa, dtype=float)
    qb = np.asarray(qb, dtype=float)
    if qa.shape != qb.shape:
        raise ValueError("quantile grids must have equal length")
    return float(np.mean(np.abs(qa - qb)))


def delta_n(m: LogAverageMeasure, ref, t: float) -> complex:
    """(1/log n) sum_{k<=n} (1/k)(exp(itG_k) - phi_ref(t)); needs n >= 2."""
    if m.n < 2:
        raise ValueError("delta_n needs n >= 2 so that log n > 0")
    s = complex(np.sum(m.weights * np.exp(1j * t * m.values)))
    return (s - m.normalizer_harmonic * complex(ref.charfn(t))) / m.normalizer_log


def dyadic_checkpoints(N: int, start: int = 2) -> list[int]:
    """start, 2*start, ... up to N, always including N."""
    pts = []
    c = start
    while c <= N:
        pts.append(c)
        c *= 2
    if not pts or pts[-1] != N:
        pts.append(N)
    return pts


def default_t_grid(t_max: float = 5.0, count: int = 41) -> np.ndarray:
    """Uniform grid on [-t_max, t_max]; the default criterion grid."""
    return np.linspace(-t_max, t_max, count)


def _series_values(rep, which: str) -> np.ndarray:
    if isinstance(rep, VariationSeries):
        return rep.G if which == "G" else rep.G_hat
    return np.asarray(rep, dtype=float)


def il_sum(
    replicate_series,
    ref,
    t_grid: np.ndarray,
    N: int,
    which: str = "G",
) -> ConditionReport:
    """Monte Carlo partial sums of the weighted criterion series.

    For each grid t, S_N(t) = sum_{n=2}^{N} Ehat|Delta_n(t)|^2 / (n log n),
    with Ehat averaging across replicates.  Delta_n is accumulated
    incrementally, O(N) per replicate and grid point.  The report records,
    at dyadic checkpoints: sup_t S_n(t), the per-t partial sums, the per-t
    Ehat|Delta_n(t)|^2 with replicate standard errors, and a certified bound
    on the sup gap of the t grid (Lipschitz transport of the grid spacing).
    """
    reps = list(replicate_series)
    if len(reps) < 2:
        raise ValueError("need at least 2 replicates for a variance estimate")
    if N < 2:
        raise ValueError("N must be >= 2")
    t_grid = np.asarray(t_grid, dtype=float)
    k = np.arange(1, N + 1, dtype=float)
    invk = 1.0 / k
    Hn = np.cumsum(invk)[1:]  # harmonic sums for n = 2..N
    logn = np.log(k[1:])
    phi_inf = np.asarray(ref.charfn(t_grid), dtype=complex)

    R = len(reps)
    sum_sq = np.zeros((N - 1, t_grid.size))
    sum_sq2 = np.zeros((N - 1, t_grid.size))
    sum_absk = np.zeros(N - 1)
    for rep in reps:
        G = _series_values(rep, which)
        if len(G) < N:
            raise ValueError(f"replicate series shorter than N={N}")
        G = G[:N]
        E = np.exp(1j * G[:, None] * t_grid[None, :])
        A = np.cumsum(E * invk[:, None], axis=0)[1:]
        delta = (A - Hn[:, None] * phi_inf[None, :]) / logn[:, None]
        sq = np.abs(delta) ** 2
        sum_sq += sq
        sum_sq2 += sq**2
        sum_absk += np.cumsum(np.abs(G) * invk)[1:]

    mean_sq = sum_sq / R
    var_sq = np.maximum(sum_sq2 / R - mean_sq**2, 0.0)
    stderr_sq = np.sqrt(var_sq / (R - 1))

    weight = 1.0 / (k[1:] * logn)
    S = np.cumsum(mean_sq * weight[:, None], axis=0)

    mean_abs_ref = getattr(ref, "mean_abs", lambda: 1.0)()
    lip = (sum_absk / R + Hn * mean_abs_ref) / logn
    spacing = float(np.max(np.diff(np.sort(t_grid)))) if t_grid.size > 1 else 0.0
    gap_incr = spacing * np.sqrt(np.max(mean_sq, axis=1)) * lip * weight
    gap = np.cumsum(gap_incr)

    checkpoints = dyadic_checkpoints(N)
    idx = [c - 2 for c in checkpoints]
    partial = [(c, float(np.max(S[i]))) for c, i in zip(checkpoints, idx)]
    return ConditionReport(
        condition_id="IL",
        partial_sums=partial,
        parameters={
            "N": N,
            "replicates": R,
            "which": which,
            "normalizer": "log",
            "t_min": float(t_grid.min()),
            "t_max": float(t_grid.max()),
            "t_count": int(t_grid.size),
        },
        estimator="monte_carlo",
        extras={
            "t_grid": t_grid,
            "checkpoints": checkpoints,
            "per_t_partial_sums": S[idx],
            "mean_sq_delta": mean_sq[idx],
            "mean_sq_delta_stderr": stderr_sq[idx],
            "sup_gap_bound": gap[idx],
        },
    )


def scale_series(series_or_values, a) -> np.ndarray:
    """Atom values a_k * G_k for the scaled measure.

    Total even when some a_k vanish; a warning records the violation (the
    reduction argument assumes a nonzero limit).
    """
    values = _series_values(series_or_values, "G")
    a = np.asarray(a, dtype=float)
    if a.size < values.size:
        raise ValueError("scaling sequence shorter than the series")
    a = a[: values.size]
    if np.any(a == 0.0):
        warnings.warn("scaling sequence contains zeros", stacklevel=2)
    return a * values
