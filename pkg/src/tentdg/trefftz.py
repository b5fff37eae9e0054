"""Polynomial wave-equation solution spaces and their local scaled bases.

A scalar basis member is grown from a pair of spatial seed polynomials: its
value and its time derivative at t = 0.  Coefficients at higher time powers
follow from a two-step recursion that makes the second-order wave residual
vanish identically, so membership is exact up to float roundoff rather than
enforced by a least-squares fit.

The first-order space pairs ``(v, sigma) = (U_t, -grad U)`` built from the
scalar space one degree up; the constant-seed member maps to the zero pair and
is dropped structurally.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .polynomial import TIME, MultiIndex, SpaceTimePolynomial, affine_map

__all__ = [
    "SEED_KINDS",
    "SeedTag",
    "ScalarTrefftzBasis",
    "FirstOrderMember",
    "FirstOrderTrefftzBasis",
    "LocalBasis",
    "space_multi_indices",
    "seed_space_basis",
    "trefftz_extend",
    "build_scalar_basis",
    "build_first_order_basis",
    "localize",
    "dim_scalar_space",
    "dim_first_order_space",
]

SEED_KINDS = ("monomial", "legendre", "chebyshev")


def dim_scalar_space(p: int, n: int) -> int:
    """dim of the scalar solution space: C(p+n, n) + C(p-1+n, n)."""
    if p < 0:
        return 0
    low = math.comb(p - 1 + n, n) if p >= 1 else 0
    return math.comb(p + n, n) + low


def dim_first_order_space(p: int, n: int) -> int:
    """dim of the first-order pair space: one less than the scalar space at p+1."""
    return dim_scalar_space(p + 1, n) - 1


def space_multi_indices(n: int, degree: int) -> list[tuple[int, ...]]:
    """All spatial exponent tuples with total degree <= degree, graded-lex order."""
    if degree < 0:
        return []
    out: list[tuple[int, ...]] = []

    def rec(prefix: tuple[int, ...], remaining: int):
        if len(prefix) == n:
            out.append(prefix)
            return
        for a in range(remaining + 1):
            rec(prefix + (a,), remaining - a)

    for total in range(degree + 1):
        start = len(out)
        rec((), total)
        out[start:] = [mi for mi in out[start:] if sum(mi) == total]
    return out


def _family_coeffs_1d(kind: str, degree: int) -> list[list[float]]:
    """Monomial coefficients (index = power) of the 1-D family up to degree."""
    rows: list[list[float]] = [[1.0]]
    if degree >= 1:
        rows.append([0.0, 1.0])
    for k in range(1, degree):
        prev, cur = rows[k - 1], rows[k]
        nxt = [0.0] * (k + 2)
        if kind == "legendre":
            # (k+1) P_{k+1} = (2k+1) x P_k - k P_{k-1}
            for i, c in enumerate(cur):
                nxt[i + 1] += (2 * k + 1) * c / (k + 1)
            for i, c in enumerate(prev):
                nxt[i] -= k * c / (k + 1)
        else:
            # T_{k+1} = 2 x T_k - T_{k-1}
            for i, c in enumerate(cur):
                nxt[i + 1] += 2 * c
            for i, c in enumerate(prev):
                nxt[i] -= c
        rows.append(nxt)
    return rows[: degree + 1]


def seed_space_basis(kind: str, degree: int, n: int) -> list[SpaceTimePolynomial]:
    """Spatial polynomial basis of total degree <= degree.

    ``monomial`` gives x^alpha; ``legendre``/``chebyshev`` give tensor products
    of the 1-D family on [-1, 1], restricted to total degree <= degree.  Either
    family is triangular with respect to the graded order, so each spans the
    same space.
    """
    if kind not in SEED_KINDS:
        raise ValueError(f"unknown seed kind {kind!r}; expected one of {SEED_KINDS}")
    alphas = space_multi_indices(n, degree)
    if kind == "monomial":
        return [SpaceTimePolynomial.monomial(n, a, 0) for a in alphas]
    family = _family_coeffs_1d(kind, degree)
    out = []
    for alpha in alphas:
        coeffs: dict[tuple[int, ...], float] = {(): 1.0}
        for a in alpha:
            row = family[a]
            nxt: dict[tuple[int, ...], float] = {}
            for exps, v in coeffs.items():
                for pw, c in enumerate(row):
                    if c == 0.0:
                        continue
                    key = exps + (pw,)
                    nxt[key] = nxt.get(key, 0.0) + v * c
            coeffs = nxt
        out.append(SpaceTimePolynomial(
            n, {MultiIndex(exps, 0): v for exps, v in coeffs.items()}))
    return out


def _space_coeffs(poly: Optional[SpaceTimePolynomial], n: int, max_degree: int,
                  what: str) -> dict[tuple[int, ...], float]:
    if poly is None:
        return {}
    if poly.n != n:
        raise ValueError(f"{what} has dimension {poly.n}, expected {n}")
    out: dict[tuple[int, ...], float] = {}
    for mi, c in poly.coeffs.items():
        if mi.time != 0:
            raise ValueError(f"{what} must be purely spatial")
        if mi.total > max_degree:
            raise ValueError(f"{what} degree {mi.total} exceeds bound {max_degree}")
        out[mi.space] = c
    return out


def trefftz_extend(seed0: Optional[SpaceTimePolynomial],
                   seed1: Optional[SpaceTimePolynomial],
                   p: int, c: float, n: Optional[int] = None) -> SpaceTimePolynomial:
    """Unique degree-p wave-equation solution with U(.,0)=seed0, U_t(.,0)=seed1.

    Higher time coefficients follow the recursion
    ``a[k,alpha] = c^2/(k(k-1)) * sum_m (alpha_m+1)(alpha_m+2) a[k-2, alpha+2e_m]``.
    """
    if seed0 is None and seed1 is None:
        raise ValueError("at least one seed is required")
    if n is None:
        n = (seed0 or seed1).n
    levels: dict[int, dict[tuple[int, ...], float]] = {
        0: _space_coeffs(seed0, n, p, "value seed"),
        1: _space_coeffs(seed1, n, p - 1, "velocity seed"),
    }
    c2 = float(c) * float(c)
    for k in range(2, p + 1):
        below = levels[k - 2]
        level: dict[tuple[int, ...], float] = {}
        for alpha in space_multi_indices(n, p - k):
            s = 0.0
            for m in range(n):
                bumped = list(alpha)
                bumped[m] += 2
                a = below.get(tuple(bumped))
                if a:
                    s += (alpha[m] + 1) * (alpha[m] + 2) * a
            if s:
                level[alpha] = c2 * s / (k * (k - 1))
        levels[k] = level
    terms = {MultiIndex(alpha, k): v
             for k, level in levels.items() for alpha, v in level.items()}
    return SpaceTimePolynomial(n, terms)


@dataclass(frozen=True)
class SeedTag:
    """Origin of a scalar member: which seed list and which position in it."""

    role: str          # "value" | "velocity"
    index: int         # position in seed_space_basis(kind, ., n)
    alpha: tuple[int, ...]


@dataclass
class ScalarTrefftzBasis:
    n: int
    p: int
    kind: str
    members: list[SpaceTimePolynomial]
    tags: list[SeedTag]

    def __len__(self) -> int:
        return len(self.members)


@dataclass
class FirstOrderMember:
    """Pair (v, sigma) with its scalar antiderivative U (v = U_t, sigma = -grad U)."""

    U: SpaceTimePolynomial
    v: SpaceTimePolynomial
    sigma: tuple[SpaceTimePolynomial, ...]


@dataclass
class FirstOrderTrefftzBasis:
    n: int
    p: int
    kind: str
    members: list[FirstOrderMember]

    def __len__(self) -> int:
        return len(self.members)


def build_scalar_basis(p: int, n: int, kind: str = "monomial") -> ScalarTrefftzBasis:
    """Basis of the scalar solution space of degree p (wavespeed 1 reference)."""
    if p < 0:
        raise ValueError("degree must be >= 0")
    members: list[SpaceTimePolynomial] = []
    tags: list[SeedTag] = []
    value_seeds = seed_space_basis(kind, p, n)
    alphas = space_multi_indices(n, p)
    for i, seed in enumerate(value_seeds):
        members.append(trefftz_extend(seed, None, p, 1.0, n=n))
        tags.append(SeedTag("value", i, alphas[i]))
    if p >= 1:
        velocity_seeds = seed_space_basis(kind, p - 1, n)
        alphas1 = space_multi_indices(n, p - 1)
        for i, seed in enumerate(velocity_seeds):
            members.append(trefftz_extend(None, seed, p, 1.0, n=n))
            tags.append(SeedTag("velocity", i, alphas1[i]))
    assert len(members) == dim_scalar_space(p, n)
    return ScalarTrefftzBasis(n, p, kind, members, tags)


def build_first_order_basis(p: int, n: int, kind: str = "monomial",
                            include_constant: bool = False) -> FirstOrderTrefftzBasis:
    """Basis of first-order pairs of degree p, via the scalar space one degree up.

    The member seeded by the constant value polynomial differentiates to the
    zero pair and is dropped by its tag, not by a numerical rank test.  With
    ``include_constant`` it is kept (as the zero pair with U = 1), which makes
    the U components span the full scalar space of degree p + 1; the scalar
    recovery needs that extra function as a trial direction.
    """
    scalar = build_scalar_basis(p + 1, n, kind)
    members: list[FirstOrderMember] = []
    for U, tag in zip(scalar.members, scalar.tags):
        if tag.role == "value" and sum(tag.alpha) == 0 and not include_constant:
            continue
        v = U.derive(TIME)
        sigma = tuple(-U.derive(i) for i in range(n))
        members.append(FirstOrderMember(U, v, sigma))
    expected = dim_first_order_space(p, n) + (1 if include_constant else 0)
    assert len(members) == expected
    return FirstOrderTrefftzBasis(n, p, kind, members)


@dataclass
class LocalBasis:
    """A basis pushed onto one cell: center/diameter shift-scale plus wavespeed.

    First-order members scale as ``v(x,t) = c vhat(xhat, that)``,
    ``sigma(x,t) = sigmahat(xhat, that)`` and carry ``U = h Uhat(xhat, that)``
    so that v = U_t and sigma = -grad U hold exactly in physical variables.
    """

    n: int
    p: int
    kind: str
    center: tuple
    h: float
    c: float
    first_order: bool
    members: list

    def __len__(self) -> int:
        return len(self.members)


def localize(basis, center, h: float, c: float) -> LocalBasis:
    """Map a reference basis (wavespeed 1) to a cell with wavespeed c."""
    x0, t0 = center
    if isinstance(basis, ScalarTrefftzBasis):
        members = [affine_map(U, (x0, t0), h, c) for U in basis.members]
        return LocalBasis(basis.n, basis.p, basis.kind, (tuple(x0), float(t0)),
                          float(h), float(c), False, members)
    if isinstance(basis, FirstOrderTrefftzBasis):
        members = []
        for mem in basis.members:
            U = affine_map(mem.U, (x0, t0), h, c).scale(h)
            v = affine_map(mem.v, (x0, t0), h, c).scale(c)
            sigma = tuple(affine_map(s, (x0, t0), h, c) for s in mem.sigma)
            members.append(FirstOrderMember(U, v, sigma))
        return LocalBasis(basis.n, basis.p, basis.kind, (tuple(x0), float(t0)),
                          float(h), float(c), True, members)
    raise TypeError(f"cannot localize {type(basis).__name__}")
