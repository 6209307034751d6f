"""Finite-dimensional normed spaces: the norm catalogue, linear minimization
oracles over dual-norm balls, and interval-supremum scans over prefix sums.

Points are plain numpy arrays (scalars, vectors, or matrices).  Norm tags are
small immutable objects; batched evaluation treats the leading axis as the
batch axis.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

__all__ = [
    "NormTag",
    "LpTag",
    "WeightedL2Tag",
    "GramTag",
    "GroupP2Tag",
    "SpectralTag",
    "TraceTag",
    "SupTag",
    "OneTag",
    "GramPoint",
    "conjugate",
    "norm",
    "dual_ball_lmo",
    "prefix_interval_sup",
    "IntervalSupTracker",
    "check_psd",
    "singular_values",
]

PSD_TOL = 1e-10


def conjugate(p: float) -> tuple[float, float]:
    """Return ``(p', p*)`` for ``p > 1``: the conjugate exponent ``p/(p-1)``
    and ``max(p, p')``."""
    if p <= 1:
        raise ValueError(f"conjugate exponent requires p > 1, got {p}")
    p_prime = p / (p - 1.0)
    return p_prime, max(p, p_prime)


def check_psd(a: np.ndarray, name: str = "matrix") -> np.ndarray:
    """Validate a symmetric PSD matrix, tolerating eigenvalue noise down to
    ``-1e-10``."""
    a = np.asarray(a, dtype=float)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise ValueError(f"{name} must be square, got shape {a.shape}")
    if not np.allclose(a, a.T, atol=1e-8):
        raise ValueError(f"{name} must be symmetric")
    w = np.linalg.eigvalsh(a)
    if w.min() < -PSD_TOL:
        raise ValueError(f"{name} is not PSD: min eigenvalue {w.min():.3e}")
    return a


def singular_values(x: np.ndarray) -> np.ndarray:
    """Singular values, clamped at zero, batched over leading axes."""
    s = np.linalg.svd(np.asarray(x, dtype=float), compute_uv=False)
    return np.maximum(s, 0.0)


class NormTag:
    """Base class for norm tags. Subclasses implement ``norm_batch`` over the
    leading batch axis; ``norm`` is the pointwise convenience wrapper."""

    name = "abstract"

    def norm(self, x) -> float:
        arr = np.asarray(x, dtype=float)
        return float(self.norm_batch(arr[np.newaxis, ...])[0])

    def norm_batch(self, xs: np.ndarray) -> np.ndarray:
        raise NotImplementedError


@dataclass(frozen=True)
class LpTag(NormTag):
    p: float
    name: str = field(init=False, default="lp")

    def __post_init__(self):
        if self.p <= 1:
            raise ValueError(f"Lp tag requires p in (1, inf), got {self.p}")

    def norm_batch(self, xs):
        xs = np.asarray(xs, dtype=float)
        flat = xs.reshape(xs.shape[0], -1)
        return np.sum(np.abs(flat) ** self.p, axis=1) ** (1.0 / self.p)


class SupTag(NormTag):
    name = "sup"

    def norm_batch(self, xs):
        xs = np.asarray(xs, dtype=float)
        return np.max(np.abs(xs.reshape(xs.shape[0], -1)), axis=1)


class OneTag(NormTag):
    name = "one"

    def norm_batch(self, xs):
        xs = np.asarray(xs, dtype=float)
        return np.sum(np.abs(xs.reshape(xs.shape[0], -1)), axis=1)


class _QuadraticFormTag(NormTag):
    """sqrt(x' A x) for a shared PSD matrix A; negative rounding noise in the
    quadratic form is clamped at zero."""

    def __init__(self, a: np.ndarray, name: str):
        self.a = check_psd(a, name)
        self.name = name

    def norm_batch(self, xs):
        xs = np.asarray(xs, dtype=float)
        q = np.einsum("ni,ij,nj->n", xs, self.a, xs)
        return np.sqrt(np.maximum(q, 0.0))

    def inner_batch(self, xs, ys):
        return np.einsum("ni,ij,nj->n", np.asarray(xs, float), self.a, np.asarray(ys, float))


class WeightedL2Tag(_QuadraticFormTag):
    def __init__(self, a: np.ndarray):
        super().__init__(a, "weighted-l2")

    def sqrt_matrix(self) -> np.ndarray:
        w, v = np.linalg.eigh(self.a)
        return (v * np.sqrt(np.maximum(w, 0.0))) @ v.T


class GramTag(_QuadraticFormTag):
    """Norm of a point given by coefficients against a fixed Gram matrix."""

    def __init__(self, gram: np.ndarray):
        super().__init__(gram, "gram")


@dataclass(frozen=True)
class GroupP2Tag(NormTag):
    """(p, 2) group norm of a matrix: lp norm of the row-wise l2 norms."""

    p: float
    name: str = field(init=False, default="group-p2")

    def __post_init__(self):
        if self.p <= 1:
            raise ValueError(f"group (p,2) tag requires p in (1, inf), got {self.p}")

    def norm_batch(self, xs):
        xs = np.asarray(xs, dtype=float)
        rows = np.sqrt(np.sum(xs**2, axis=-1))
        return np.sum(rows**self.p, axis=-1) ** (1.0 / self.p)


class SpectralTag(NormTag):
    name = "spectral"

    def norm_batch(self, xs):
        return singular_values(xs).max(axis=-1)


class TraceTag(NormTag):
    name = "trace"

    def norm_batch(self, xs):
        return singular_values(xs).sum(axis=-1)


@dataclass
class GramPoint:
    """A point of a Gram-represented Hilbert space: coefficients against a
    shared PSD Gram matrix."""

    coeffs: np.ndarray
    gram: GramTag

    def norm(self) -> float:
        return self.gram.norm(self.coeffs)


def norm(x, tag: NormTag) -> float:
    """The norm named by ``tag``; accepts GramPoint for gram tags."""
    if isinstance(x, GramPoint):
        return x.gram.norm(x.coeffs)
    return tag.norm(x)


def dual_ball_lmo(g, tag: NormTag, vertices=None) -> np.ndarray:
    """argmin of <w, g> over the unit ball of the dual of ``tag``'s norm.

    The comparator class lives in the dual ball, so by duality the optimum
    value is -norm(g, tag).  Closed forms are used for lp / weighted-l2 /
    gram / sup / one tags; an explicit symmetric vertex list covers atomic
    balls.  A zero gradient returns the zero vector.

    For gram tags both ``g`` and the result are coefficient vectors and the
    pairing is the Hilbert inner product <w, g>_G = w' G g (the space is
    self-dual); all other tags pair with the standard duality product.
    """
    g = np.asarray(g, dtype=float)
    if vertices is not None:
        verts = np.asarray(vertices, dtype=float)
        scores = verts.reshape(verts.shape[0], -1) @ g.ravel()
        return verts[int(np.argmin(scores))]
    if not np.any(g):
        return np.zeros_like(g)
    if isinstance(tag, LpTag):
        if tag.p == 2.0:
            return -g / np.linalg.norm(g)
        # Hoelder equality: |w_i| ~ |g_i|^(p-1), scaled onto the dual sphere
        mag = np.abs(g) ** (tag.p - 1.0)
        w = -np.sign(g) * mag
        p_prime, _ = conjugate(tag.p)
        return w / np.sum(np.abs(w) ** p_prime) ** (1.0 / p_prime)
    if isinstance(tag, SupTag):
        # dual ball is l1: a signed basis vector at the largest |g_i|
        w = np.zeros_like(g)
        i = np.unravel_index(int(np.argmax(np.abs(g))), g.shape)
        w[i] = -np.sign(g[i])
        return w
    if isinstance(tag, OneTag):
        return -np.sign(g)
    if isinstance(tag, (WeightedL2Tag, GramTag)):
        denom = tag.norm(g)
        if denom == 0.0:
            return np.zeros_like(g)
        if isinstance(tag, GramTag):
            # self-dual Hilbert ball in coefficient coordinates
            return -g / denom
        return -(tag.a @ g) / denom
    raise ValueError(f"dual_ball_lmo does not support tag {tag.name!r}")


def prefix_interval_sup(prefixes, tag: NormTag) -> float:
    """max over 0 <= a <= b <= T of norm(P_b - P_a) for prefixes P_0..P_T
    (P_0 = 0)."""
    arr = np.asarray(prefixes, dtype=float)
    if arr.shape[0] == 0:
        raise ValueError("prefix list must contain at least P_0")
    best = 0.0
    for b in range(1, arr.shape[0]):
        diffs = arr[b][np.newaxis, ...] - arr[:b]
        best = max(best, float(tag.norm_batch(diffs).max()))
    return best


class IntervalSupTracker:
    """Running sup over interval sums of appended increments.

    Each append costs O(t) norm evaluations, so a length-n stream costs
    O(n^2) total; no sub-quadratic scheme exists for general norms.
    """

    def __init__(self, tag: NormTag, shape=()):
        self.tag = tag
        self._prefixes = [np.zeros(shape, dtype=float)]
        self._sup = 0.0

    def __len__(self):
        return len(self._prefixes) - 1

    @property
    def value(self) -> float:
        return self._sup

    def append(self, increment) -> float:
        inc = np.asarray(increment, dtype=float)
        new = self._prefixes[-1] + inc
        prev = np.stack(self._prefixes)
        diffs = new[np.newaxis, ...] - prev
        self._sup = max(self._sup, float(self.tag.norm_batch(diffs).max()))
        self._prefixes.append(new)
        return self._sup
