"""Closed-form reference fields for the first-order acoustic system.

Each solution carries the trio (U, v, sigma) with v = U_t and sigma = -grad U,
so Dirichlet data is the trace of v and Neumann data the trace of sigma . n.
Callables take points of shape (Q, n) plus a scalar or (Q,) time and return
(Q,) values, (Q, n) for sigma.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .special import bessel_j

__all__ = [
    "ExactSolution",
    "InitialData",
    "standing_wave",
    "sine_wave_1d",
    "bessel_singular",
    "gaussian_pulse",
    "initial_from_exact",
    "check_consistency",
]


@dataclass(frozen=True)
class ExactSolution:
    name: str
    n: int
    U: Callable
    v: Callable
    sigma: Callable


@dataclass(frozen=True)
class InitialData:
    """Fields at t = 0 only, for problems without a closed-form evolution."""

    n: int
    U0: Callable
    v0: Callable
    sigma0: Callable


def initial_from_exact(sol: ExactSolution) -> InitialData:
    return InitialData(
        sol.n,
        lambda x: sol.U(x, 0.0),
        lambda x: sol.v(x, 0.0),
        lambda x: sol.sigma(x, 0.0),
    )


def standing_wave(n: int, c: float = 1.0) -> ExactSolution:
    """Product-cosine standing wave on the unit cube with wavespeed c.

    U = prod_i cos(pi x_i) sin(pi c sqrt(n) t) / (sqrt(n) pi), which starts
    from rest (U = 0, sigma = 0) with velocity v = c prod cos(pi x_i).
    """
    if n < 1:
        raise ValueError("n must be >= 1")
    w = math.pi * float(c) * math.sqrt(n)
    rn = math.sqrt(n)

    def U(x, t):
        x = np.asarray(x, float)
        return np.prod(np.cos(math.pi * x), axis=1) * np.sin(w * np.asarray(t, float)) / (rn * math.pi)

    def v(x, t):
        x = np.asarray(x, float)
        return c * np.prod(np.cos(math.pi * x), axis=1) * np.cos(w * np.asarray(t, float))

    def sigma(x, t):
        x = np.asarray(x, float)
        cx = np.cos(math.pi * x)
        sx = np.sin(math.pi * x)
        amp = np.sin(w * np.asarray(t, float)) / rn
        cols = []
        for i in range(n):
            others = [j for j in range(n) if j != i]
            rest = np.prod(cx[:, others], axis=1) if others else 1.0
            cols.append(sx[:, i] * rest * amp)
        return np.stack(cols, axis=1)

    return ExactSolution(f"standing-wave-{n}d", n, U, v, sigma)


def sine_wave_1d() -> ExactSolution:
    """U = sin(pi x) sin(pi t): homogeneous Dirichlet ends, energy pi^2 / 4."""

    def U(x, t):
        x = np.asarray(x, float)
        return np.sin(math.pi * x[:, 0]) * np.sin(math.pi * np.asarray(t, float))

    def v(x, t):
        x = np.asarray(x, float)
        return math.pi * np.sin(math.pi * x[:, 0]) * np.cos(math.pi * np.asarray(t, float))

    def sigma(x, t):
        x = np.asarray(x, float)
        s = -math.pi * np.cos(math.pi * x[:, 0]) * np.sin(math.pi * np.asarray(t, float))
        return s[:, None]

    return ExactSolution("sine-wave-1d", 1, U, v, sigma)


def _polar(x):
    r = np.hypot(x[:, 0], x[:, 1])
    phi = np.arctan2(x[:, 1], x[:, 0])
    phi = np.where(phi < 0.0, phi + 2.0 * math.pi, phi)
    return r, phi


def bessel_singular(a: float = 10.0, nu: float = 2.0 / 3.0) -> ExactSolution:
    """Singular corner mode U = cos(a t) sin(nu phi) J_nu(a r) in the plane.

    With nu = 2/3 the trace vanishes on the edges phi = 0 and phi = 3 pi / 2,
    the two legs of the reentrant corner of the L-shaped domain; the gradient
    behaves like r^(nu - 1) there.  At r = 0 exactly, U and v are zero; sigma
    is returned as zero there but no quadrature point ever sits on the corner.
    """
    a = float(a)
    nu = float(nu)

    def U(x, t):
        r, phi = _polar(np.asarray(x, float))
        return np.cos(a * np.asarray(t, float)) * np.sin(nu * phi) * bessel_j(nu, a * r)

    def v(x, t):
        r, phi = _polar(np.asarray(x, float))
        return -a * np.sin(a * np.asarray(t, float)) * np.sin(nu * phi) * bessel_j(nu, a * r)

    def sigma(x, t):
        x = np.asarray(x, float)
        r, phi = _polar(x)
        z = a * r
        safe_z = np.where(z > 0.0, z, 1.0)
        safe_r = np.where(r > 0.0, r, 1.0)
        J = bessel_j(nu, z)
        # J'_nu(z) = (nu / z) J_nu(z) - J_{nu+1}(z), keeping all orders >= 0
        Jp = nu / safe_z * J - bessel_j(nu + 1.0, z)
        ct = np.cos(a * np.asarray(t, float))
        dr = ct * np.sin(nu * phi) * a * Jp
        dphi_r = ct * nu * np.cos(nu * phi) * J / safe_r
        dr = np.where(r > 0.0, dr, 0.0)
        dphi_r = np.where(r > 0.0, dphi_r, 0.0)
        cp, sp = np.cos(phi), np.sin(phi)
        gx = dr * cp - dphi_r * sp
        gy = dr * sp + dphi_r * cp
        return -np.stack([gx, gy], axis=1)

    return ExactSolution("bessel-corner", 2, U, v, sigma)


def gaussian_pulse(x0, delta: float) -> InitialData:
    """Pressure-free Gaussian displacement bump released from rest.

    U0 = exp(-|x - x0|^2 / delta^2), v0 = 0, sigma0 = -grad U0.
    """
    x0 = np.asarray(x0, float).ravel()
    n = x0.size
    d2 = float(delta) ** 2

    def U0(x):
        x = np.asarray(x, float)
        return np.exp(-np.sum((x - x0) ** 2, axis=1) / d2)

    def v0(x):
        return np.zeros(np.asarray(x).shape[0])

    def sigma0(x):
        x = np.asarray(x, float)
        return 2.0 * (x - x0) / d2 * U0(x)[:, None]

    return InitialData(n, U0, v0, sigma0)


def check_consistency(sol: ExactSolution, x, t, step: float = 1e-5) -> float:
    """Largest relative defect of v = U_t and sigma = -grad U by central differences.

    The scale is the largest field magnitude in the sample (floored at 1), so
    the number is meaningful for small-amplitude snapshots too.
    """
    x = np.asarray(x, float)
    t = np.broadcast_to(np.asarray(t, float), (x.shape[0],))
    v = sol.v(x, t)
    sig = sol.sigma(x, t)
    scale = max(1.0, float(np.max(np.abs(v))), float(np.max(np.abs(sig))))
    v_fd = (sol.U(x, t + step) - sol.U(x, t - step)) / (2.0 * step)
    worst = float(np.max(np.abs(v_fd - v)))
    for i in range(sol.n):
        xp = x.copy()
        xm = x.copy()
        xp[:, i] += step
        xm[:, i] -= step
        s_fd = -(sol.U(xp, t) - sol.U(xm, t)) / (2.0 * step)
        worst = max(worst, float(np.max(np.abs(s_fd - sig[:, i]))))
    return worst / scale
