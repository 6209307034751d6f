"""The Burkholder function catalogue.

A Burkholder function U for (norm, p, beta) satisfies

  1. U(x, y) >= ||x||^p - beta^p ||y||^p        (majorization)
  2. a -> U(x + a*z, y + sigma*a*z) is concave for every sigma in {-1, +1}
     (zig-zag concavity)
  3. U(0, 0) <= 0

These three properties are what the ZigZag learner consumes: it only ever
evaluates U and its directional derivative along zig-zag rays.  The module
provides the concrete constructions (scalar power, coordinate-wise lp sums,
Hilbert balls, weighted l2, (p,2) group norms, an even-power scalar function
with elementary constants, and weak-type functions for l1 built from a
biconvex zeta function), plus numerical probe checks for the three properties.

Every construction is immutable after creation; all operations are pure.
Points are floats for scalar constructions, 1-d arrays for vector ones and
2-d arrays for matrix ones.  ``*_batch`` methods take a leading batch axis.

Kink convention: wherever |.| or a norm is non-smooth, the directional
derivative uses the selection sign(0) = 0 (derivative of the even extension).
Any supergradient selection preserves admissibility of the learner.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np

from .linalg import (
    GramTag,
    GroupP2Tag,
    LpTag,
    NormTag,
    OneTag,
    WeightedL2Tag,
    conjugate,
)
from .rng import rademacher, substream

__all__ = [
    "BurkholderSpec",
    "ScalarPowerU",
    "LpSumU",
    "HilbertU",
    "WeightedL2U",
    "GroupP2U",
    "EvenPowerU",
    "L1WeakTypeU",
    "ComposedL1U",
    "elementary_scalar_params",
    "zeta_l1",
    "make_spec",
    "check_majorization",
    "check_zigzag",
    "MajorizationReport",
    "ZigzagReport",
]


def optimal_constants(p: float) -> tuple[float, float]:
    """(alpha_p, beta_p) with alpha_p = p(1 - 1/p*)^(p-1) and beta_p = p* - 1,
    the sharp constants for the scalar power construction."""
    _, p_star = conjugate(p)
    return p * (1.0 - 1.0 / p_star) ** (p - 1.0), p_star - 1.0


# ---------------------------------------------------------------------------
# scalar / Hilbert kernels shared by several constructions


def _scalar_value(p, alpha, beta, x, y):
    a = np.abs(x)
    b = np.abs(y)
    return alpha * (a - beta * b) * (a + b) ** (p - 1.0)


def _scalar_dirderiv(p, alpha, beta, x, y, z, sigma):
    a = np.abs(x)
    b = np.abs(y)
    t = a + b
    sx = np.sign(x)
    sy = np.sign(y)
    tp1 = t ** (p - 1.0)
    safe = t > 0.0
    tp2 = np.where(safe, np.where(safe, t, 1.0) ** (p - 2.0), 0.0)
    core = (p - 1.0) * (a - beta * b) * tp2
    du_da = alpha * (tp1 + core)
    du_db = alpha * (-beta * tp1 + core)
    return du_da * sx * z + du_db * sy * (sigma * z)


def _hilbert_value(p, alpha, beta, r, s):
    return alpha * (r - beta * s) * (r + s) ** (p - 1.0)


def _hilbert_dirderiv(p, alpha, beta, r, s, xz, yz, sigma):
    # r = ||x||, s = ||y||, xz = <x, z>, yz = <y, z>; at r == 0 or s == 0 the
    # radial derivative contribution is dropped (kink selection 0)
    dr = np.where(r > 0.0, xz / np.where(r > 0.0, r, 1.0), 0.0)
    ds = np.where(s > 0.0, sigma * yz / np.where(s > 0.0, s, 1.0), 0.0)
    t = r + s
    tp1 = t ** (p - 1.0)
    safe = t > 0.0
    tp2 = np.where(safe, np.where(safe, t, 1.0) ** (p - 2.0), 0.0)
    return alpha * ((dr - beta * ds) * tp1 + (p - 1.0) * (r - beta * s) * tp2 * (dr + ds))


# ---------------------------------------------------------------------------


class BurkholderSpec:
    """Base class: a concrete Burkholder function plus its target norm."""

    construction = "abstract"
    p: float
    beta: float
    tag: NormTag
    point_shape: tuple = ()

    # radii used by the probe sampler
    probe_radii = (1.0, 5.0)

    def zero_point(self):
        return np.zeros(self.point_shape) if self.point_shape else 0.0

    def norm(self, x) -> float:
        return self.tag.norm(np.asarray(x, dtype=float))

    def value(self, x, y) -> float:
        xb = np.asarray(x, dtype=float)[np.newaxis, ...]
        yb = np.asarray(y, dtype=float)[np.newaxis, ...]
        return float(self.value_batch(xb, yb)[0])

    def value_batch(self, xs, ys) -> np.ndarray:
        raise NotImplementedError

    def dirderiv(self, x, y, z, sigma: int) -> float:
        """Supergradient of a -> U(x + a z, y + sigma a z) at a = 0."""
        raise NotImplementedError

    def norm_batch(self, xs) -> np.ndarray:
        xs = np.asarray(xs, dtype=float)
        if not self.point_shape:
            xs = xs[:, np.newaxis]
        return self.tag.norm_batch(xs)

    def majorant_batch(self, xs, ys) -> np.ndarray:
        """The function U must dominate: ||x||^p - beta^p ||y||^p."""
        nx = self.norm_batch(xs)
        ny = self.norm_batch(ys)
        return nx**self.p - self.beta**self.p * ny**self.p

    def sample_points(self, rng: np.random.Generator, n: int) -> np.ndarray:
        """Probe sampler: componentwise uniform at two radii, with 10% of
        draws biased onto kinks (a coordinate within 1e-4 of zero)."""
        r_small, r_big = self.probe_radii
        radii = np.where(rng.random(n) < 0.5, r_small, r_big)
        shape = (n, *self.point_shape) if self.point_shape else (n,)
        pts = rng.uniform(-1.0, 1.0, size=shape)
        pts = pts * radii.reshape((n,) + (1,) * (pts.ndim - 1))
        k = max(1, n // 10)
        idx = rng.choice(n, size=k, replace=False)
        pts[idx] = self._kink_bias(pts[idx], rng)
        return pts

    def _kink_bias(self, pts: np.ndarray, rng: np.random.Generator) -> np.ndarray:
        flat = pts.reshape(pts.shape[0], -1)
        cols = rng.integers(0, flat.shape[1], size=flat.shape[0])
        flat[np.arange(flat.shape[0]), cols] = rng.uniform(-1e-4, 1e-4, size=flat.shape[0])
        return flat.reshape(pts.shape)


class ScalarPowerU(BurkholderSpec):
    """alpha_p (|x| - beta_p |y|)(|x| + |y|)^(p-1) on the real line, the sharp
    construction for |.|^p."""

    construction = "scalar-p"
    point_shape = ()

    def __init__(self, p: float):
        self.p = float(p)
        self.alpha, self.beta = optimal_constants(self.p)
        self.tag = LpTag(2.0)  # any lp tag is |.| in one dimension

    def value_batch(self, xs, ys):
        return _scalar_value(self.p, self.alpha, self.beta, np.asarray(xs, float), np.asarray(ys, float))

    def dirderiv(self, x, y, z, sigma):
        return float(_scalar_dirderiv(self.p, self.alpha, self.beta, float(x), float(y), float(z), float(sigma)))


class LpSumU(BurkholderSpec):
    """Coordinate-wise sum of the scalar power function; Burkholder for
    (||.||_p^p, p, beta_p) since every property survives addition."""

    construction = "lp-sum"

    def __init__(self, p: float, dim: int):
        self.p = float(p)
        self.dim = int(dim)
        self.alpha, self.beta = optimal_constants(self.p)
        self.tag = LpTag(self.p)
        self.point_shape = (self.dim,)

    def value_batch(self, xs, ys):
        vals = _scalar_value(self.p, self.alpha, self.beta, np.asarray(xs, float), np.asarray(ys, float))
        return vals.sum(axis=-1)

    def dirderiv(self, x, y, z, sigma):
        dd = _scalar_dirderiv(
            self.p, self.alpha, self.beta,
            np.asarray(x, float), np.asarray(y, float), np.asarray(z, float), float(sigma),
        )
        return float(dd.sum())


class HilbertU(BurkholderSpec):
    """The scalar power construction applied to Hilbert-space norms, valid in
    any dimension.  The inner product is either the Euclidean one (pass
    ``dim``) or an explicit Gram matrix over representer coefficients (pass
    ``gram``)."""

    construction = "hilbert"

    def __init__(self, p: float, dim: int | None = None, gram: np.ndarray | None = None):
        self.p = float(p)
        self.alpha, self.beta = optimal_constants(self.p)
        if (dim is None) == (gram is None):
            raise ValueError("provide exactly one of dim or gram")
        if gram is not None:
            self.tag = GramTag(np.asarray(gram, dtype=float))
            self.dim = self.tag.a.shape[0]
        else:
            self.dim = int(dim)
            self.tag = LpTag(2.0)
        self.point_shape = (self.dim,)

    def _inner_batch(self, xs, ys):
        if isinstance(self.tag, GramTag):
            return self.tag.inner_batch(xs, ys)
        return np.einsum("ni,ni->n", np.asarray(xs, float), np.asarray(ys, float))

    def value_batch(self, xs, ys):
        r = self.tag.norm_batch(np.asarray(xs, float))
        s = self.tag.norm_batch(np.asarray(ys, float))
        return _hilbert_value(self.p, self.alpha, self.beta, r, s)

    def dirderiv(self, x, y, z, sigma):
        xb = np.asarray(x, float)[np.newaxis, :]
        yb = np.asarray(y, float)[np.newaxis, :]
        zb = np.asarray(z, float)[np.newaxis, :]
        r = self.tag.norm_batch(xb)
        s = self.tag.norm_batch(yb)
        xz = self._inner_batch(xb, zb)
        yz = self._inner_batch(yb, zb)
        return float(_hilbert_dirderiv(self.p, self.alpha, self.beta, r, s, xz, yz, float(sigma))[0])


class WeightedL2U(BurkholderSpec):
    """x'Ax - y'Ay for a PSD weight matrix A, i.e. the Hilbert p=2 function
    evaluated at (A^(1/2)x, A^(1/2)y)."""

    construction = "weighted-l2"

    def __init__(self, a: np.ndarray):
        self.tag = WeightedL2Tag(a)
        self.a = self.tag.a
        self.p = 2.0
        self.alpha = 1.0
        self.beta = 1.0
        self.dim = self.a.shape[0]
        self.point_shape = (self.dim,)

    def value_batch(self, xs, ys):
        xs = np.asarray(xs, float)
        ys = np.asarray(ys, float)
        qx = np.einsum("ni,ij,nj->n", xs, self.a, xs)
        qy = np.einsum("ni,ij,nj->n", ys, self.a, ys)
        return qx - qy

    def dirderiv(self, x, y, z, sigma):
        az = self.a @ np.asarray(z, float)
        return float(2.0 * (np.asarray(x, float) @ az - sigma * (np.asarray(y, float) @ az)))


class GroupP2U(BurkholderSpec):
    """Row-wise sum of the Hilbert construction over matrices: Burkholder for
    the (p, 2) group norm raised to the p."""

    construction = "group-p2"

    def __init__(self, p: float, shape: tuple[int, int]):
        self.p = float(p)
        self.alpha, self.beta = optimal_constants(self.p)
        self.shape = (int(shape[0]), int(shape[1]))
        self.tag = GroupP2Tag(self.p)
        self.point_shape = self.shape

    def value_batch(self, xs, ys):
        r = np.sqrt(np.sum(np.asarray(xs, float) ** 2, axis=-1))
        s = np.sqrt(np.sum(np.asarray(ys, float) ** 2, axis=-1))
        return _hilbert_value(self.p, self.alpha, self.beta, r, s).sum(axis=-1)

    def dirderiv(self, x, y, z, sigma):
        x = np.asarray(x, float)
        y = np.asarray(y, float)
        z = np.asarray(z, float)
        r = np.sqrt(np.sum(x**2, axis=-1))
        s = np.sqrt(np.sum(y**2, axis=-1))
        xz = np.sum(x * z, axis=-1)
        yz = np.sum(y * z, axis=-1)
        return float(_hilbert_dirderiv(self.p, self.alpha, self.beta, r, s, xz, yz, float(sigma)).sum())


def elementary_scalar_params(k: int) -> tuple[float, float, float]:
    """Constants (C, B, majorant_coeff) for the even-power scalar function
    x^k - C x^(k-2) y^2 - B y^k, built from first principles via Young's
    inequality rather than the sharp PDE solution.

    C = 2 binom(k,2); B = (2 C binom(k-2,2))^(k-2) / ((k-2) binom(k,2));
    after scaling by k/2 the function dominates |x|^k - majorant_coeff |y|^k
    with majorant_coeff = C^(k/2) + (k/2) B.
    """
    if k < 4 or k % 2 != 0:
        raise ValueError(f"even-power construction requires even k >= 4, got {k}")
    c = 2.0 * math.comb(k, 2)
    b = (2.0 * c * math.comb(k - 2, 2)) ** (k - 2) / ((k - 2) * math.comb(k, 2))
    coeff = c ** (k / 2.0) + (k / 2.0) * b
    return c, b, coeff


class EvenPowerU(BurkholderSpec):
    """(k/2)(x^k - C x^(k-2) y^2 - B y^k) for even k >= 4: an elementary
    scalar construction with non-sharp constants."""

    construction = "even-power"
    point_shape = ()
    probe_radii = (1.0, 3.0)

    def __init__(self, k: int):
        self.k = int(k)
        self.c, self.b, coeff = elementary_scalar_params(self.k)
        self.p = float(self.k)
        self.beta = coeff ** (1.0 / self.k)
        self.tag = LpTag(2.0)

    def value_batch(self, xs, ys):
        x = np.asarray(xs, float)
        y = np.asarray(ys, float)
        k = self.k
        return (k / 2.0) * (x**k - self.c * x ** (k - 2) * y**2 - self.b * y**k)

    def dirderiv(self, x, y, z, sigma):
        k = self.k
        x = float(x)
        y = float(y)
        z = float(z)
        sz = sigma * z
        d = (
            k * x ** (k - 1) * z
            - self.c * ((k - 2) * x ** (k - 3) * y**2 * z + 2.0 * x ** (k - 2) * y * sz)
            - self.b * k * y ** (k - 1) * sz
        )
        return (k / 2.0) * d


# ---------------------------------------------------------------------------
# weak-type functions for l1 via a biconvex zeta function


def _z_coordinate(x, y, a):
    """Per-coordinate biconvex kernel; two branches split at
    |x+y| + |x-y| = 2/a, where they agree (the split is continuous)."""
    u = np.abs(x + y)
    v = np.abs(x - y)
    s = u + v
    first = a * x * y / 2.0 - 1.0 / (2.0 * a)
    arg = np.maximum((a / 2.0) * s, 1e-300)
    second = (u / 2.0) * np.log(arg) - v / 2.0
    return np.where(s <= 2.0 / a, first, second)


def zeta_l1(x, y, a: float) -> float:
    """The biconvex zeta function for the l1 norm:
    (2 / log(3a)) (1 + sum_i z(x_i, y_i))."""
    x = np.atleast_1d(np.asarray(x, dtype=float))
    y = np.atleast_1d(np.asarray(y, dtype=float))
    return float((2.0 / math.log(3.0 * a)) * (1.0 + _z_coordinate(x, y, a).sum()))


def _zeta_batch(xs, ys, a):
    return (2.0 / math.log(3.0 * a)) * (1.0 + _z_coordinate(xs, ys, a).sum(axis=-1))


class L1WeakTypeU(BurkholderSpec):
    """Weak-type function for the l1 norm: U(x, y) = 1 - u(x+y, y-x) / u(0,0),
    where u is the canonical biconvex extension of zeta:

      u(x, y) = max(zeta(x, y), ||x+y||_1)   if max(||x||_1, ||y||_1) < 1
      u(x, y) = ||x+y||_1                    otherwise.

    It dominates 1{||x||_1 >= 1} - (2/u(0,0)) ||y||_1 rather than a power
    difference; the shifted-majorization composition turns a scaled stack of
    these into a function for ||.||_1 itself (see ComposedL1U).
    """

    construction = "l1-weak"

    def __init__(self, a: float, dim: int):
        self.a = float(a)
        self.dim = int(dim)
        if self.dim >= 2 and self.a < self.dim * math.log(self.dim):
            warnings.warn(
                f"a={self.a} below the validity threshold d*log(d)={self.dim * math.log(self.dim):.3f}; "
                "the weak-type properties may fail",
                stacklevel=2,
            )
        self.tag = OneTag()
        self.point_shape = (self.dim,)
        self.u00 = self.canonical_u(np.zeros(self.dim), np.zeros(self.dim))
        if self.u00 <= 0.0:
            raise ValueError(f"u(0,0) = {self.u00:.6g} <= 0: invalid parameters (a={a}, d={dim})")
        self.p = 1.0
        self.beta = 2.0 / self.u00  # weak-type constant

    def zeta(self, x, y) -> float:
        return zeta_l1(x, y, self.a)

    def _u_batch(self, xs, ys):
        xs = np.asarray(xs, float)
        ys = np.asarray(ys, float)
        nx = np.sum(np.abs(xs), axis=-1)
        ny = np.sum(np.abs(ys), axis=-1)
        nsum = np.sum(np.abs(xs + ys), axis=-1)
        interior = np.maximum(nx, ny) < 1.0
        zeta = _zeta_batch(xs, ys, self.a)
        return np.where(interior, np.maximum(zeta, nsum), nsum)

    def canonical_u(self, x, y) -> float:
        return float(self._u_batch(np.asarray(x, float)[np.newaxis], np.asarray(y, float)[np.newaxis])[0])

    def value_batch(self, xs, ys):
        xs = np.asarray(xs, float)
        ys = np.asarray(ys, float)
        return 1.0 - self._u_batch(xs + ys, ys - xs) / self.u00

    def majorant_batch(self, xs, ys):
        nx = np.sum(np.abs(np.asarray(xs, float)), axis=-1)
        ny = np.sum(np.abs(np.asarray(ys, float)), axis=-1)
        return np.where(nx >= 1.0, 1.0, 0.0) - self.beta * ny

    def dirderiv(self, x, y, z, sigma, h: float = 1e-6):
        # no closed algebraic form: the symmetric difference quotient is the
        # supergradient selection for this construction
        x = np.asarray(x, float)
        y = np.asarray(y, float)
        z = np.asarray(z, float)
        up = self.value(x + h * z, y + sigma * h * z)
        dn = self.value(x - h * z, y - sigma * h * z)
        return (up - dn) / (2.0 * h)

    def _kink_bias(self, pts, rng):
        # the interesting kink is the unit l1 sphere
        norms = np.sum(np.abs(pts.reshape(pts.shape[0], -1)), axis=1)
        norms = np.where(norms == 0.0, 1.0, norms)
        target = 1.0 + rng.uniform(-1e-4, 1e-4, size=pts.shape[0])
        scale = (target / norms).reshape((pts.shape[0],) + (1,) * (pts.ndim - 1))
        return pts * scale


class ComposedL1U(BurkholderSpec):
    """Stack of rescaled weak-type functions approximating a Burkholder
    function for ||.||_1 at power one:

      U1(x, y) = eps * sum_{k=1..N} U_weak(x / (k eps), y / (k eps)),
      N = ceil(B / eps),

    valid up to additive slack eps for ||x||_1, ||y||_1 <= B.  The
    majorization constant in front of log(B/eps)*||y||_1 is fitted
    empirically by ``fit_majorant_coeff``; since a finite-probe maximum
    estimates the true supremum from below, the majorant applies a small
    safety margin on top of the fitted value.  Probes are drawn inside the
    validity region (the l1 ball of radius B).
    """

    construction = "l1-composed"
    fit_margin = 1.05

    def __init__(self, weak: L1WeakTypeU, bound: float, eps: float):
        if not (bound > eps > 0.0):
            raise ValueError(f"need B > eps > 0, got B={bound}, eps={eps}")
        self.weak = weak
        self.bound = float(bound)
        self.eps = float(eps)
        self.n_levels = math.ceil(self.bound / self.eps)
        self.lam = self.eps * np.arange(1, self.n_levels + 1)
        self.tag = OneTag()
        self.dim = weak.dim
        self.point_shape = (self.dim,)
        self.p = 1.0
        self.beta = weak.beta
        self.fitted_coeff: float | None = None

    def sample_points(self, rng: np.random.Generator, n: int) -> np.ndarray:
        # uniform direction on the l1 sphere scaled by a uniform radius in
        # (0, B]; 10% of draws land within 1e-4 of a level boundary lambda_k,
        # where the stacked weak functions have their kinks
        pts = rng.uniform(-1.0, 1.0, size=(n, self.dim))
        norms = np.sum(np.abs(pts), axis=1)
        norms = np.where(norms == 0.0, 1.0, norms)
        radii = self.bound * rng.uniform(0.0, 1.0, size=n)
        pts = pts * (radii / norms)[:, np.newaxis]
        k = max(1, n // 10)
        idx = rng.choice(n, size=k, replace=False)
        lam = self.lam[rng.integers(0, self.n_levels, size=k)]
        target = lam + rng.uniform(-1e-4, 1e-4, size=k)
        cur = np.sum(np.abs(pts[idx]), axis=1)
        cur = np.where(cur == 0.0, 1.0, cur)
        pts[idx] = pts[idx] * (target / cur)[:, np.newaxis]
        return pts

    def value_batch(self, xs, ys):
        xs = np.asarray(xs, float)
        ys = np.asarray(ys, float)
        total = np.zeros(xs.shape[0])
        for lam in self.lam:
            total += self.weak.value_batch(xs / lam, ys / lam)
        return self.eps * total

    def dirderiv(self, x, y, z, sigma, h: float = 1e-6):
        x = np.asarray(x, float)
        y = np.asarray(y, float)
        z = np.asarray(z, float)
        up = self.value(x + h * z, y + sigma * h * z)
        dn = self.value(x - h * z, y - sigma * h * z)
        return (up - dn) / (2.0 * h)

    def fit_majorant_coeff(self, n_probes: int = 20_000, seed: int = 0) -> float:
        """Smallest C such that ||x||_1 - C*beta*log(B/eps)*||y||_1 - eps
        stays below U1 on the probe set (all probes lie in the valid
        region)."""
        rng = substream(seed, "composed-fit")
        xs = self.sample_points(rng, n_probes)
        ys = self.sample_points(rng, n_probes)
        nx = np.sum(np.abs(xs), axis=-1)
        ny = np.sum(np.abs(ys), axis=-1)
        vals = self.value_batch(xs, ys)
        scale = self.beta * math.log(self.bound / self.eps)
        pos = ny > 1e-9
        need = (nx[pos] - self.eps - vals[pos]) / (scale * ny[pos])
        coeff = float(np.max(need)) if need.size else 0.0
        self.fitted_coeff = max(coeff, 0.0)
        return self.fitted_coeff

    def majorant_batch(self, xs, ys):
        if self.fitted_coeff is None:
            self.fit_majorant_coeff()
        nx = np.sum(np.abs(np.asarray(xs, float)), axis=-1)
        ny = np.sum(np.abs(np.asarray(ys, float)), axis=-1)
        scale = self.fit_margin * self.fitted_coeff * self.beta * math.log(self.bound / self.eps)
        return nx - scale * ny - self.eps


# ---------------------------------------------------------------------------
# probe checks


@dataclass
class MajorizationReport:
    violations: int
    worst_slack: float
    n_probes: int

    @property
    def ok(self) -> bool:
        return self.violations == 0


@dataclass
class ZigzagReport:
    midpoint_violations: int
    worst_midpoint_slack: float
    second_diff_breaches: int
    worst_second_diff: float
    n_probes: int

    @property
    def ok(self) -> bool:
        return self.midpoint_violations == 0 and self.second_diff_breaches == 0


def check_majorization(
    spec: BurkholderSpec,
    n_probes: int = 10_000,
    seed: int = 0,
    tol: float = 1e-9,
    majorant=None,
) -> MajorizationReport:
    """Count probes where U(x, y) < majorant(x, y) - tol and record the worst
    slack min(U - majorant)."""
    rng = substream(seed, "majorization", spec.construction)
    xs = spec.sample_points(rng, n_probes)
    ys = spec.sample_points(rng, n_probes)
    vals = spec.value_batch(xs, ys)
    maj = majorant(xs, ys) if majorant is not None else spec.majorant_batch(xs, ys)
    slack = vals - maj
    return MajorizationReport(
        violations=int(np.sum(slack < -tol)),
        worst_slack=float(slack.min()),
        n_probes=n_probes,
    )


def check_zigzag(
    spec: BurkholderSpec,
    n_probes: int = 10_000,
    seed: int = 0,
    tol: float = 1e-7,
    second_diff_tol: float = 1e-10,
    value_fn=None,
) -> ZigzagReport:
    """Probe zig-zag concavity along a -> U(x + a z, y + sigma a z).

    Midpoint test: U at the midpoint of a random interval [t1, t2] must be at
    least the endpoint average, slack >= -tol.  A raw central second
    difference at a random offset must stay below a tolerance scaled by the
    local magnitude of U.
    """
    rng = substream(seed, "zigzag", spec.construction)
    fn = value_fn if value_fn is not None else spec.value_batch
    xs = spec.sample_points(rng, n_probes)
    ys = spec.sample_points(rng, n_probes)
    zs = spec.sample_points(rng, n_probes)
    sigma = rademacher(rng, n_probes).astype(float)
    ts = np.sort(rng.uniform(-1.5, 1.5, size=(n_probes, 2)), axis=1)
    t1, t2 = ts[:, 0], ts[:, 1]
    tm = 0.5 * (t1 + t2)

    extra = (1,) * (xs.ndim - 1)

    def at(alpha):
        a = alpha.reshape((-1,) + extra)
        s = sigma.reshape((-1,) + extra)
        return fn(xs + a * zs, ys + s * a * zs)

    v1, v2, vm = at(t1), at(t2), at(tm)
    slack = vm - 0.5 * (v1 + v2)
    midpoint_violations = int(np.sum(slack < -tol))

    # raw central second difference, scaled by the local magnitude of U
    h = 1e-3
    a0 = rng.uniform(-1.0, 1.0, size=n_probes)
    v0 = at(a0)
    sd = (at(a0 - h) + at(a0 + h) - 2.0 * v0) / np.maximum(1.0, np.abs(v0))

    return ZigzagReport(
        midpoint_violations=midpoint_violations,
        worst_midpoint_slack=float(slack.min()),
        second_diff_breaches=int(np.sum(sd > second_diff_tol)),
        worst_second_diff=float(sd.max()),
        n_probes=n_probes,
    )


# ---------------------------------------------------------------------------


def make_spec(cfg: dict) -> BurkholderSpec:
    """Build a construction from a config mapping.

    Recognized ``construction`` values: scalar-p, lp-sum, hilbert,
    weighted-l2, group-p2, even-power, l1-weak, l1-composed.
    """
    kind = cfg["construction"]
    if kind == "scalar-p":
        return ScalarPowerU(cfg["p"])
    if kind == "lp-sum":
        return LpSumU(cfg["p"], cfg["d"])
    if kind == "hilbert":
        if "gram" in cfg and cfg["gram"] is not None:
            return HilbertU(cfg.get("p", 2.0), gram=np.asarray(cfg["gram"], dtype=float))
        return HilbertU(cfg.get("p", 2.0), dim=cfg["d"])
    if kind == "weighted-l2":
        return WeightedL2U(np.asarray(cfg["weight"], dtype=float))
    if kind == "group-p2":
        d = cfg["d"]
        shape = cfg.get("shape", (d, d))
        return GroupP2U(cfg["p"], shape)
    if kind == "even-power":
        return EvenPowerU(cfg["k"])
    if kind == "l1-weak":
        return L1WeakTypeU(cfg["a"], cfg["d"])
    if kind == "l1-composed":
        weak = L1WeakTypeU(cfg["a"], cfg["d"])
        return ComposedL1U(weak, cfg["B"], cfg["eps"])
    raise ValueError(f"unknown construction {kind!r}")
