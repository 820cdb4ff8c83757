"""Symmetric tensor kernels of multiple integrals and their contractions.

Two computation paths coexist deliberately:

* an exact sparse-tensor algebra over an orthonormal indicator basis
  (`contract` / `symmetrize` / `inner_product`), which serves as the oracle
  for everything else, and
* closed-form correlation sums for the fGn kernel family at arbitrary Hurst
  index (`fgn_contraction_inner_product`, `kernel_inner_product_fgn`), where
  every needed quantity reduces to sums of powers of the fGn correlation.

Symmetric tensors are stored canonically: one sorted index tuple per orbit,
holding the common coefficient value of the symmetric tensor at every
arrangement; orbit multiplicities enter inner products combinatorially.
"""

from __future__ import annotations

import itertools
import json
import math
from collections import defaultdict
from dataclasses import dataclass, field

import numpy as np

from .gaussian_inputs import rho

ORTHONORMAL = "orthonormal"


def _orbit_size(key: tuple[int, ...]) -> int:
    """Number of distinct arrangements of the index multiset."""
    denom = 1
    for _, group in itertools.groupby(key):
        denom *= math.factorial(sum(1 for _ in group))
    return math.factorial(len(key)) // denom


@dataclass
class SparseSymmetricKernel:
    """Sparse tensor over an integer-indexed basis.

    When `symmetric` is true, keys are sorted tuples and each coefficient is
    the value the symmetric tensor takes at every arrangement of that tuple.
    When false, keys are literal index positions (the raw output of a
    contraction before symmetrization).
    """

    order: int
    coeffs: dict[tuple[int, ...], float] = field(default_factory=dict)
    gram: str | tuple[str, float] = ORTHONORMAL
    symmetric: bool = True

    def expand_raw(self) -> dict[tuple[int, ...], float]:
        """Coefficients at every explicit index position."""
        if not self.symmetric:
            return dict(self.coeffs)
        out: dict[tuple[int, ...], float] = {}
        for key, c in self.coeffs.items():
            for perm in set(itertools.permutations(key)):
                out[perm] = c
        return out

    def scalar(self) -> float:
        """Value of an order-0 tensor."""
        if self.order != 0:
            raise ValueError(f"tensor has order {self.order}, not 0")
        return self.coeffs.get((), 0.0)

    def to_json(self) -> str:
        """Debug dump; not a stability-guaranteed format."""
        return json.dumps(
            {
                "order": self.order,
                "gram": self.gram if isinstance(self.gram, str) else list(self.gram),
                "symmetric": self.symmetric,
                "entries": [[list(k), c] for k, c in sorted(self.coeffs.items())],
            }
        )


@dataclass(frozen=True)
class KernelFamily:
    """A named sequence of kernels g_1, g_2, ...

    kind "fgn": order-q diagonal kernels n^{q(1-H)-1} sum_j e_j^{(x)q} over
    the fGn Gram (entries rho(H, i-j)).  kind "section4": the order-3
    product-of-Gaussians family (1/sqrt(2n)) sum_{j<n} sym(e_n (x) e_j (x) e_j)
    over an orthonormal Gram; "section4_tilde" swaps the roles of the fresh
    and the shared factor, (1/sqrt(2n)) sum_{1<=j<=n} sym(e_0 (x) e_j (x) e_j),
    and exists to demonstrate the divergent variance sum numerically.
    """

    kind: str
    q: int = 3
    H: float | None = None

    def __post_init__(self):
        if self.kind == "fgn":
            if self.H is None or not 0 < self.H < 1:
                raise ValueError("fgn family requires H in (0,1)")
            if self.q < 2:
                raise ValueError("fgn family requires q >= 2")
        elif self.kind in ("section4", "section4_tilde"):
            if self.q != 3:
                raise ValueError(f"{self.kind} family has fixed order 3")
        else:
            raise ValueError(f"unknown kernel family kind {self.kind!r}")

    @property
    def description(self) -> str:
        if self.kind == "fgn":
            return f"fGn Hermite-variation kernels, q={self.q}, H={self.H}"
        if self.kind == "section4":
            return "product-of-Gaussians kernels (fresh first factor)"
        return "product-of-Gaussians kernels, ill-behaved variant (shared factor)"


def fgn_family(q: int, H: float) -> KernelFamily:
    return KernelFamily("fgn", q=q, H=H)


SECTION4 = KernelFamily("section4")
SECTION4_TILDE = KernelFamily("section4_tilde")


def make_kernel(family: KernelFamily, n: int) -> SparseSymmetricKernel:
    """Kernel g_n of the family, in canonical symmetric storage."""
    if n < 1:
        raise ValueError("n must be >= 1")
    if family.kind == "fgn":
        q, H = family.q, family.H
        pref = n ** (q * (1 - H) - 1)
        coeffs = {(j,) * q: pref for j in range(1, n + 1)}
        return SparseSymmetricKernel(order=q, coeffs=coeffs, gram=("toeplitz", H))
    pref = 1.0 / (3.0 * np.sqrt(2.0 * n))  # sym() spreads 1/3 over the orbit
    if family.kind == "section4":
        coeffs = {(j, j, n): pref for j in range(n)}
    else:
        coeffs = {(0, j, j): pref for j in range(1, n + 1)}
    return SparseSymmetricKernel(order=3, coeffs=coeffs, gram=ORTHONORMAL)


def _require_orthonormal(*tensors: SparseSymmetricKernel) -> None:
    for t in tensors:
        if t.gram != ORTHONORMAL:
            raise ValueError(
                "operation requires an orthonormal Gram; fGn-kernel quantities "
                "go through the closed-form correlation sums instead"
            )


def contract(
    f: SparseSymmetricKernel, g: SparseSymmetricKernel, r: int
) -> SparseSymmetricKernel:
    """Contraction of r argument pairs; raw (possibly unsymmetric) output.

    r = 0 is the plain tensor product; r = order(f) = order(g) collapses to
    the scalar inner product, returned as an order-0 tensor.
    """
    _require_orthonormal(f, g)
    if not 0 <= r <= min(f.order, g.order):
        raise ValueError(f"contraction order r={r} out of range")
    F = f.expand_raw()
    G = g.expand_raw()
    fgroup: dict[tuple, list] = defaultdict(list)
    for key, c in F.items():
        fgroup[key[:r]].append((key[r:], c))
    ggroup: dict[tuple, list] = defaultdict(list)
    for key, c in G.items():
        ggroup[key[:r]].append((key[r:], c))
    out: dict[tuple[int, ...], float] = defaultdict(float)
    for shared, fr in fgroup.items():
        gr = ggroup.get(shared)
        if gr is None:
            continue
        for rest_f, cf in fr:
            for rest_g, cg in gr:
                out[rest_f + rest_g] += cf * cg
    coeffs = {k: v for k, v in out.items() if v != 0.0}
    return SparseSymmetricKernel(
        order=f.order + g.order - 2 * r,
        coeffs=coeffs,
        gram=ORTHONORMAL,
        symmetric=False,
    )


def symmetrize(t: SparseSymmetricKernel) -> SparseSymmetricKernel:
    """Average over index permutations; canonical sorted-tuple output."""
    if t.symmetric:
        return SparseSymmetricKernel(
            order=t.order, coeffs=dict(t.coeffs), gram=t.gram, symmetric=True
        )
    sums: dict[tuple[int, ...], float] = defaultdict(float)
    for key, c in t.coeffs.items():
        sums[tuple(sorted(key))] += c
    coeffs = {
        key: total / _orbit_size(key) for key, total in sums.items() if total != 0.0
    }
    return SparseSymmetricKernel(
        order=t.order, coeffs=coeffs, gram=t.gram, symmetric=True
    )


def inner_product(f: SparseSymmetricKernel, g: SparseSymmetricKernel) -> float:
    """Hilbert-space inner product of two equal-order tensors."""
    _require_orthonormal(f, g)
    if f.order != g.order:
        raise ValueError(f"order mismatch: {f.order} vs {g.order}")
    if f.order == 0:
        return f.scalar() * g.scalar()
    if f.symmetric and g.symmetric:
        small, big = (f.coeffs, g.coeffs) if len(f.coeffs) <= len(g.coeffs) else (
            g.coeffs,
            f.coeffs,
        )
        return sum(
            _orbit_size(key) * c * big[key] for key, c in small.items() if key in big
        )
    F = f.expand_raw()
    G = g.expand_raw()
    if len(G) < len(F):
        F, G = G, F
    return sum(c * G[key] for key, c in F.items() if key in G)


def norm(t: SparseSymmetricKernel) -> float:
    if t.order == 0:
        return abs(t.scalar())
    return math.sqrt(max(inner_product(t, t), 0.0))


def kernel_inner_product_fgn(q: int, H: float, k: int, l: int) -> float:
    """<g_k, g_l> for the fGn family, via lag counting in O(k+l).

    E[G_k G_l] for the unnormalized variations is q! times this value.
    """
    if k < 1 or l < 1:
        raise ValueError("k, l must be >= 1")
    lags = np.arange(1 - l, k)
    cnt = np.minimum(k, l + lags) - np.maximum(1, 1 + lags) + 1
    total = float(np.sum(cnt * rho(H, lags) ** q))
    return (k * l) ** (q * (1 - H) - 1) * total


class ContractionBudgetError(ValueError):
    """Literal quadruple sum refused; the grouped-matrix method covers it."""


def fgn_contraction_inner_product(
    q: int,
    H: float,
    r: int,
    k: int,
    l: int,
    method: str = "auto",
    budget: int = 64,
) -> float:
    """<g_k (x)_r g_k, g_l (x)_r g_l> for the fGn family, any H.

    Equals (kl)^{2(q(1-H)-1)} times the quadruple correlation sum
    sum_{i,j<=k} sum_{i',j'<=l} rho(i-j)^r rho(i'-j')^r rho(i-i')^{q-r}
    rho(j-j')^{q-r}.  method "matrix" groups the sum as
    sum_{ij} A*(C B C^T) with A = rho^r on k x k, B = rho^r on l x l and
    C = rho^{q-r} on k x l, costing O(k^2 l) time and O(k^2+l^2) memory;
    "direct" is the literal broadcast sum, kept as the correctness gate for
    small sizes (k, l <= budget).  "auto" selects the matrix method.
    """
    if not 0 <= r <= q:
        raise ValueError(f"contraction order r={r} out of range for q={q}")
    if k < 1 or l < 1:
        raise ValueError("k, l must be >= 1")
    if method == "auto":
        method = "matrix"
    pref = (k * l) ** (2 * (q * (1 - H) - 1))
    if method == "direct":
        if max(k, l) > budget:
            raise ContractionBudgetError(
                f"direct quadruple sum refused for k={k}, l={l} "
                f"(budget {budget}); use method='matrix'"
            )
        i = np.arange(1, k + 1)
        ip = np.arange(1, l + 1)
        same_k = rho(H, i[:, None] - i[None, :]) ** r
        same_l = rho(H, ip[:, None] - ip[None, :]) ** r
        cross = rho(H, i[:, None] - ip[None, :]) ** (q - r)
        total = float(
            np.einsum("ij,ab,ia,jb->", same_k, same_l, cross, cross, optimize=False)
        )
    elif method == "matrix":
        if max(k, l) > 8192:
            raise ContractionBudgetError(
                f"k={k}, l={l} exceeds the matrix-method memory guard"
            )
        i = np.arange(1, k + 1)
        ip = np.arange(1, l + 1)
        A = rho(H, i[:, None] - i[None, :]) ** r
        B = rho(H, ip[:, None] - ip[None, :]) ** r
        C = rho(H, i[:, None] - ip[None, :]) ** (q - r)
        total = float(np.sum(A * (C @ B @ C.T)))
    else:
        raise ValueError(f"unknown method {method!r}")
    return pref * total


def contraction_norm(family: KernelFamily, r: int, k: int) -> float:
    """||g_k (x)_r g_k|| for any family (oracle path for orthonormal ones)."""
    if family.kind == "fgn":
        return math.sqrt(
            max(fgn_contraction_inner_product(family.q, family.H, r, k, k), 0.0)
        )
    gk = make_kernel(family, k)
    return norm(contract(gk, gk, r))
