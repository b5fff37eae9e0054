"""Sparse multivariate polynomials in n space variables and one time variable.

A polynomial is stored as a mapping from exponent multi-indices to float
coefficients.  This exact, dictionary-backed form is the common currency of the
basis construction: wave-equation residuals and derivative identities can be
checked coefficient-wise instead of through sampling.

>>> p = SpaceTimePolynomial.from_terms(1, {((3,), 0): 1.0, ((1,), 2): 3.0})
>>> p.eval([2.0], 0.5)
9.5
"""

from __future__ import annotations

import math
from typing import Iterable, Mapping, NamedTuple, Union

import numpy as np

__all__ = [
    "MultiIndex",
    "SpaceTimePolynomial",
    "wave_residual",
    "affine_map",
    "TIME",
]

# Axis label for time derivatives; space axes are 0..n-1.
TIME = "t"

# Coefficients below this magnitude are treated as exact zeros when a
# polynomial is normalized.  The threshold sits at the edge of the subnormal
# range so legitimate small coefficients survive.
COEFF_DROP = 1e-300


class MultiIndex(NamedTuple):
    """Exponents of one monomial ``x^alpha * t^k``; hashable, usable as a key."""

    space: tuple[int, ...]
    time: int

    @property
    def total(self) -> int:
        return sum(self.space) + self.time


def _as_multi_index(n: int, key) -> MultiIndex:
    if isinstance(key, MultiIndex):
        mi = key
    else:
        space, time = key
        mi = MultiIndex(tuple(int(a) for a in space), int(time))
    if len(mi.space) != n:
        raise ValueError(f"multi-index {mi} does not match space dimension {n}")
    if mi.time < 0 or any(a < 0 for a in mi.space):
        raise ValueError(f"negative exponent in multi-index {mi}")
    return mi


class SpaceTimePolynomial:
    """Sparse polynomial ``sum_a c_a x^alpha t^k`` over R^n x R."""

    __slots__ = ("n", "coeffs")

    def __init__(self, n: int, coeffs: Mapping[MultiIndex, float] | None = None):
        if n < 1:
            raise ValueError("space dimension must be >= 1")
        self.n = int(n)
        cleaned: dict[MultiIndex, float] = {}
        if coeffs:
            for key, value in coeffs.items():
                mi = _as_multi_index(self.n, key)
                value = float(value)
                if abs(value) >= COEFF_DROP:
                    cleaned[mi] = cleaned.get(mi, 0.0) + value
        self.coeffs = {k: v for k, v in cleaned.items() if abs(v) >= COEFF_DROP}

    # -- constructors -----------------------------------------------------

    @classmethod
    def zero(cls, n: int) -> "SpaceTimePolynomial":
        return cls(n, {})

    @classmethod
    def constant(cls, n: int, value: float) -> "SpaceTimePolynomial":
        return cls(n, {MultiIndex((0,) * n, 0): float(value)})

    @classmethod
    def monomial(cls, n: int, space: Iterable[int], time: int,
                 coeff: float = 1.0) -> "SpaceTimePolynomial":
        return cls(n, {MultiIndex(tuple(int(a) for a in space), int(time)): float(coeff)})

    @classmethod
    def from_terms(cls, n: int, terms: Mapping) -> "SpaceTimePolynomial":
        return cls(n, terms)

    # -- queries ----------------------------------------------------------

    @property
    def degree(self) -> int:
        """Total degree; -1 for the zero polynomial."""
        if not self.coeffs:
            return -1
        return max(mi.total for mi in self.coeffs)

    def is_zero(self, tol: float = 0.0) -> bool:
        return all(abs(v) <= tol for v in self.coeffs.values())

    def max_abs_coeff(self) -> float:
        return max((abs(v) for v in self.coeffs.values()), default=0.0)

    def sorted_terms(self) -> list[tuple[MultiIndex, float]]:
        """Terms in degree-ascending order (ties broken lexicographically)."""
        return sorted(self.coeffs.items(), key=lambda kv: (kv[0].total, kv[0].space, kv[0].time))

    # -- evaluation -------------------------------------------------------

    def eval(self, x, t):
        """Evaluate at one point or at arrays of points.

        ``x`` has shape (n,) or (npts, n); ``t`` is scalar or (npts,).  Terms
        are accumulated in degree-ascending order so the result is reproducible
        across platforms and coefficient orderings.
        """
        x = np.asarray(x, dtype=float)
        t = np.asarray(t, dtype=float)
        scalar = x.ndim == 1 and t.ndim == 0
        pts = np.atleast_2d(x)
        if pts.shape[1] != self.n:
            raise ValueError(f"points have {pts.shape[1]} coordinates, expected {self.n}")
        tv = np.broadcast_to(t, (pts.shape[0],))
        acc = np.zeros(pts.shape[0])
        for mi, c in self.sorted_terms():
            term = np.full(pts.shape[0], c)
            for i, a in enumerate(mi.space):
                if a:
                    term = term * pts[:, i] ** a
            if mi.time:
                term = term * tv ** mi.time
            acc = acc + term
        return float(acc[0]) if scalar else acc

    def __call__(self, x, t):
        return self.eval(x, t)

    # -- arithmetic -------------------------------------------------------

    def _binary(self, other: "SpaceTimePolynomial", sign: float) -> "SpaceTimePolynomial":
        if self.n != other.n:
            raise ValueError("dimension mismatch")
        out = dict(self.coeffs)
        for mi, c in other.coeffs.items():
            out[mi] = out.get(mi, 0.0) + sign * c
        return SpaceTimePolynomial(self.n, out)

    def __add__(self, other: "SpaceTimePolynomial") -> "SpaceTimePolynomial":
        return self._binary(other, 1.0)

    def __sub__(self, other: "SpaceTimePolynomial") -> "SpaceTimePolynomial":
        return self._binary(other, -1.0)

    def __neg__(self) -> "SpaceTimePolynomial":
        return self.scale(-1.0)

    def scale(self, s: float) -> "SpaceTimePolynomial":
        return SpaceTimePolynomial(self.n, {mi: s * c for mi, c in self.coeffs.items()})

    def __mul__(self, other):
        if isinstance(other, (int, float)):
            return self.scale(float(other))
        if not isinstance(other, SpaceTimePolynomial):
            return NotImplemented
        if self.n != other.n:
            raise ValueError("dimension mismatch")
        out: dict[MultiIndex, float] = {}
        for mi, c in self.coeffs.items():
            for mj, d in other.coeffs.items():
                key = MultiIndex(tuple(a + b for a, b in zip(mi.space, mj.space)),
                                 mi.time + mj.time)
                out[key] = out.get(key, 0.0) + c * d
        return SpaceTimePolynomial(self.n, out)

    __rmul__ = __mul__

    # -- calculus ---------------------------------------------------------

    def derive(self, axis: Union[int, str]) -> "SpaceTimePolynomial":
        """Partial derivative along a space axis (0..n-1) or time (``TIME``)."""
        out: dict[MultiIndex, float] = {}
        if axis == TIME:
            for mi, c in self.coeffs.items():
                if mi.time:
                    out[MultiIndex(mi.space, mi.time - 1)] = c * mi.time
        else:
            axis = int(axis)
            if not 0 <= axis < self.n:
                raise ValueError(f"axis {axis} out of range for n={self.n}")
            for mi, c in self.coeffs.items():
                a = mi.space[axis]
                if a:
                    space = list(mi.space)
                    space[axis] = a - 1
                    out[MultiIndex(tuple(space), mi.time)] = c * a
        return SpaceTimePolynomial(self.n, out)

    def __eq__(self, other) -> bool:
        return (isinstance(other, SpaceTimePolynomial)
                and self.n == other.n and self.coeffs == other.coeffs)

    def __hash__(self):  # pragma: no cover - polynomials are not dict keys
        raise TypeError("SpaceTimePolynomial is mutable-ish; not hashable")

    def __repr__(self) -> str:
        if not self.coeffs:
            return "SpaceTimePolynomial(0)"
        bits = []
        for mi, c in self.sorted_terms():
            mono = "".join(f"x{i}^{a}" for i, a in enumerate(mi.space) if a)
            if mi.time:
                mono += f"t^{mi.time}"
            bits.append(f"{c:+g}{('*' + mono) if mono else ''}")
        return f"SpaceTimePolynomial({' '.join(bits)})"


def wave_residual(p: SpaceTimePolynomial, c: float) -> SpaceTimePolynomial:
    """Residual ``-lap(p) + c^-2 p_tt`` of the second-order wave operator."""
    res = p.derive(TIME).derive(TIME).scale(1.0 / (c * c))
    for axis in range(p.n):
        res = res - p.derive(axis).derive(axis)
    return res


def _shift_scale_powers(a: int, shift: float, scale: float) -> dict[int, float]:
    """Coefficients of ``(scale * (y - shift))^a`` as a polynomial in ``y``."""
    out: dict[int, float] = {}
    for j in range(a + 1):
        out[j] = math.comb(a, j) * (scale ** a) * ((-shift) ** (a - j))
    return out


def affine_map(p: SpaceTimePolynomial, center, h: float, c: float) -> SpaceTimePolynomial:
    """Pull a reference polynomial onto a physical cell.

    Returns ``q(x, t) = p((x - x0)/h, c (t - t0)/h)`` with ``center = (x0, t0)``,
    expanded back into monomial form.
    """
    x0, t0 = center
    x0 = np.asarray(x0, dtype=float).reshape(p.n)
    t0 = float(t0)
    h = float(h)
    c = float(c)
    if h <= 0:
        raise ValueError("cell diameter h must be positive")
    out: dict[MultiIndex, float] = {}
    for mi, coeff in p.coeffs.items():
        # Expand each univariate factor of the substituted monomial and fold
        # the factors together one variable at a time.
        partial: dict[tuple[int, ...], float] = {(): coeff}
        for i, a in enumerate(mi.space):
            powers = _shift_scale_powers(a, x0[i], 1.0 / h)
            nxt: dict[tuple[int, ...], float] = {}
            for sp, v in partial.items():
                for j, w in powers.items():
                    key = sp + (j,)
                    nxt[key] = nxt.get(key, 0.0) + v * w
            partial = nxt
        powers = _shift_scale_powers(mi.time, t0, c / h)
        for sp, v in partial.items():
            for j, w in powers.items():
                key = MultiIndex(sp, j)
                out[key] = out.get(key, 0.0) + v * w
    return SpaceTimePolynomial(p.n, out)
