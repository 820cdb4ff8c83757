"""Reference limit laws: standard normal, product-normal, simulated tables.

A reference bundles a CDF evaluator, a characteristic-function evaluator and
build metadata.  The simulated reference for the non-central limit family is
an empirical quantile table of the unit-variance variation at a large fixed
path length, persisted in a small versioned text format with a checksum.
"""

from __future__ import annotations

import hashlib
import json
import math
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np
import scipy.integrate
import scipy.interpolate
import scipy.special

from .chaos_stats import replicate_hermite_series

FORMAT_VERSION = "ASLTREF v1"


class ReferenceFormatError(ValueError):
    """Base class for reference-file validation failures."""


class ReferenceVersionError(ReferenceFormatError):
    pass


class ReferenceChecksumError(ReferenceFormatError):
    pass


class ReferenceMonotonicityError(ReferenceFormatError):
    pass


@dataclass
class ReferenceDistribution:
    """CDF + characteristic function provider with build metadata."""

    kind: str  # "std_normal" | "product_normal" | "hermite_table" | "custom_table"
    cdf: callable
    charfn: callable
    metadata: dict = field(default_factory=dict)
    quantiles: np.ndarray | None = None  # sorted table values, table kinds only
    probs: np.ndarray | None = None

    def mean_abs(self) -> float:
        """E|X| under the reference; used for Lipschitz sup-gap bounds."""
        if self.kind == "std_normal":
            return math.sqrt(2.0 / math.pi)
        if self.kind == "product_normal":
            return 2.0 / math.pi  # (E|Z|)^2 for independent factors
        return float(np.mean(np.abs(self.quantiles)))


def std_normal_ref() -> ReferenceDistribution:
    """N(0,1): Phi via the erf-based evaluator, charfn exp(-t^2/2)."""
    return ReferenceDistribution(
        kind="std_normal",
        cdf=lambda x: scipy.special.ndtr(np.asarray(x, dtype=float)),
        charfn=lambda t: np.exp(-np.asarray(t, dtype=float) ** 2 / 2.0)
        + 0j * np.asarray(t, dtype=float),
        metadata={},
    )


@lru_cache(maxsize=1)
def _product_normal_grid() -> tuple[np.ndarray, np.ndarray]:
    """Cached CDF grid of X*Y on [0, 45]; density K_0(|x|)/pi.

    Piecewise adaptive quadrature handles the logarithmic singularity at 0;
    the tail beyond 45 is below 1e-18.
    """
    dens = lambda u: scipy.special.k0(u) / math.pi
    xs = np.concatenate(
        [
            [0.0],
            np.geomspace(1e-8, 0.5, 200),
            np.linspace(0.5, 8.0, 400)[1:],
            np.linspace(8.0, 45.0, 200)[1:],
        ]
    )
    masses = np.empty(xs.size - 1)
    for i in range(xs.size - 1):
        masses[i], _ = scipy.integrate.quad(dens, xs[i], xs[i + 1])
    F = 0.5 + np.concatenate([[0.0], np.cumsum(masses)])
    F = np.minimum(F, 1.0)
    return xs, F


def product_normal_ref() -> ReferenceDistribution:
    """Law of the product of two independent standard Gaussians."""
    xs, Fpos = _product_normal_grid()
    interp = scipy.interpolate.PchipInterpolator(xs, Fpos, extrapolate=False)

    def cdf(x):
        x = np.asarray(x, dtype=float)
        ax = np.minimum(np.abs(x), xs[-1])
        Fa = interp(ax)
        return np.where(x >= 0, Fa, 1.0 - Fa)

    def charfn(t):
        t = np.asarray(t, dtype=float)
        return (1.0 + t**2) ** -0.5 + 0j * t

    return ReferenceDistribution(kind="product_normal", cdf=cdf, charfn=charfn)


def _table_ref(kind, quantiles, probs, metadata) -> ReferenceDistribution:
    quantiles = np.asarray(quantiles, dtype=float)
    probs = np.asarray(probs, dtype=float)
    if np.any(np.diff(quantiles) < 0):
        raise ReferenceMonotonicityError("quantile table is not nondecreasing")
    if np.any(np.diff(probs) <= 0) or probs[0] <= 0 or probs[-1] >= 1:
        raise ReferenceMonotonicityError("probability grid must increase in (0,1)")

    def cdf(x):
        return np.interp(np.asarray(x, dtype=float), quantiles, probs, left=0.0, right=1.0)

    def charfn(t):
        t = np.asarray(t, dtype=float)
        out = np.exp(1j * np.outer(t.ravel(), quantiles)).mean(axis=1)
        return complex(out[0]) if t.ndim == 0 else out.reshape(t.shape)

    return ReferenceDistribution(
        kind=kind,
        cdf=cdf,
        charfn=charfn,
        metadata=metadata,
        quantiles=quantiles,
        probs=probs,
    )


def custom_table_ref(values, metadata=None) -> ReferenceDistribution:
    """Empirical reference from a raw sample (sorted into a quantile table)."""
    v = np.sort(np.asarray(values, dtype=float))
    p = (np.arange(1, v.size + 1) - 0.5) / v.size
    return _table_ref("custom_table", v, p, metadata or {})


def build_hermite_reference(
    H: float,
    q: int,
    N: int = 2**14,
    M: int = 2 * 10**4,
    seed: int = 0,
    build_date: str = "",
) -> ReferenceDistribution:
    """Simulated reference table for the non-central limit family.

    Simulates M independent paths of length N, records the unit-variance
    variation G_N of each, and sorts them into an empirical quantile table.
    Valid only in the long-range regime H > 1 - 1/(2q); the central regime
    has the standard normal as its limit.  Deterministic given all
    arguments; `build_date` is caller-provided so that builds remain
    byte-reproducible.
    """
    if not H > 1 - 1 / (2 * q):
        raise ValueError(
            f"H={H} is not in the long-range regime H > {1 - 1 / (2 * q)} for "
            f"q={q}; the limit there is N(0,1), use std_normal_ref()"
        )
    series = replicate_hermite_series(q, H, N, M, seed, which="G")
    values = np.sort(series[:, -1])
    probs = (np.arange(1, M + 1) - 0.5) / M
    metadata = {
        "H": H,
        "q": q,
        "build_N": N,
        "replicates": M,
        "seed": seed,
        "build_date": build_date,
        "normalization": "unit_variance",
    }
    return _table_ref("hermite_table", values, probs, metadata)


def _checksum(payload: bytes) -> str:
    """64-bit checksum: leading 16 hex digits of SHA-256."""
    return hashlib.sha256(payload).hexdigest()[:16]


def save_reference(ref: ReferenceDistribution, path) -> None:
    """Persist a table reference: version line, JSON metadata, CSV rows
    `p,quantile`, then a checksum trailer over the preceding bytes."""
    if ref.quantiles is None:
        raise ValueError("only table references can be persisted")
    lines = [FORMAT_VERSION, json.dumps({"kind": ref.kind, **ref.metadata}, sort_keys=True)]
    lines += [f"{p!r},{v!r}" for p, v in zip(ref.probs, ref.quantiles)]
    payload = ("\n".join(lines) + "\n").encode()
    trailer = f"# sha256-64:{_checksum(payload)}\n".encode()
    with open(path, "wb") as fh:
        fh.write(payload)
        fh.write(trailer)


def load_reference(path) -> ReferenceDistribution:
    """Lossless counterpart of save_reference, with validation."""
    with open(path, "rb") as fh:
        raw = fh.read()
    head, _, trailer = raw.rpartition(b"# sha256-64:")
    if not trailer:
        raise ReferenceChecksumError("missing checksum trailer")
    if _checksum(head) != trailer.strip().decode():
        raise ReferenceChecksumError("checksum mismatch (file truncated or edited)")
    lines = head.decode().splitlines()
    if not lines or lines[0] != FORMAT_VERSION:
        raise ReferenceVersionError(
            f"unsupported format version {lines[0] if lines else '<empty>'!r}"
        )
    metadata = json.loads(lines[1])
    kind = metadata.pop("kind", "custom_table")
    rows = [line.split(",") for line in lines[2:] if line]
    probs = np.array([float(r[0]) for r in rows])
    quantiles = np.array([float(r[1]) for r in rows])
    return _table_ref(kind, quantiles, probs, metadata)
