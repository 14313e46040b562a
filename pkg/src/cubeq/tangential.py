"""Tangential step: globally minimize the reduced cubic model.

The model lives in the Z-coordinates of the constraint null space,

    m(p) = f0 + g_red . p + p . H_red p / 2 + sigma |p|^3 / 3,

and because Z has orthonormal columns, |Z p| = |p|, so the cubic weight in
the full space and in coordinates agree.  A global minimizer p* satisfies

    (H_red + sigma r I) p* = -g_red,   r = |p*|,   H_red + sigma r I psd,

which reduces the problem to a scalar secular equation in the radius r: with
the eigendecomposition H_red = Q diag(lam) Q^T and ghat = Q^T g_red,

    |p(r)|^2 = sum_i ghat_i^2 / (lam_i + sigma r)^2  must equal  r^2

on r >= max(0, -lam_min)/sigma.  |p(r)| - r is strictly decreasing there, so
a bracketed bisection is robust; the only subtlety is the hard case, when
g_red is (numerically) orthogonal to the leftmost eigenspace and the secular
curve never reaches the diagonal: then r is pinned at -lam_min/sigma and the
solution gains an eigenvector component sized to make |p| = r.

The returned solution certifies three properties the rest of the solver
relies on: it decreases the model at least as much as the exact Cauchy point
(steepest descent on the model), its model gradient is far below the
delta * sigma * |u|^2 budget, and lam_min(H_red) >= -sigma |u|.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import SecularSolveFailed
from .linalg import FactorizedJacobian, reduce_matrix

Array = np.ndarray

# Relative threshold deciding when g_red has no usable component along the
# leftmost eigenspace and the hard-case branch applies.
_HARD_CASE_RTOL = 1e-12

_MAX_BISECT = 300


@dataclass(frozen=True)
class ReducedCubicModel:
    f0: float
    g_red: Array  # Z^T (g + H v)
    H_red: Array  # Z^T H Z
    sigma: float
    Z: Array


@dataclass(frozen=True)
class OracleSolution:
    p: Array  # reduced coordinates
    u: Array  # Z p, full space
    delta_m: float  # m(0) - m(p)
    cauchy_delta_m: float
    grad_model_norm: float  # |g_red + H_red p + sigma |p| p|
    lambda_min_red: float


def build_reduced_model(fact: FactorizedJacobian, g, H, v,
                        sigma: float, f0: float = 0.0) -> ReducedCubicModel:
    g = np.asarray(g, dtype=float).reshape(-1)
    v = np.asarray(v, dtype=float).reshape(-1)
    return ReducedCubicModel(
        f0=float(f0),
        g_red=fact.Z.T @ (g + np.asarray(H, dtype=float) @ v),
        H_red=reduce_matrix(fact, H),
        sigma=float(sigma),
        Z=fact.Z,
    )


def model_decrease(model: ReducedCubicModel, p) -> float:
    """m(0) - m(p); positive when p improves the model."""
    p = np.asarray(p, dtype=float).reshape(-1)
    r = float(np.linalg.norm(p))
    return -float(model.g_red @ p + 0.5 * p @ model.H_red @ p + model.sigma / 3.0 * r**3)


def cauchy_point(model: ReducedCubicModel) -> tuple:
    """Exact minimizer of the model along -g_red: returns (alpha, decrease).

    phi(a) = m(-a g_red) - f0 has derivative -gn^2 + a gHg + sigma a^2 gn^3,
    a positive quadratic in a with negative value at 0, so the unique
    positive root is the global minimizer over a >= 0.
    """
    gn = float(np.linalg.norm(model.g_red))
    if gn == 0.0:
        return 0.0, 0.0
    gHg = float(model.g_red @ model.H_red @ model.g_red)
    a_coef = model.sigma * gn**3
    alpha = (-gHg + math.sqrt(gHg**2 + 4.0 * a_coef * gn**2)) / (2.0 * a_coef)
    decrease = alpha * gn**2 - 0.5 * alpha**2 * gHg - model.sigma / 3.0 * alpha**3 * gn**3
    return float(alpha), float(decrease)


def _radius_gap(r, lam, ghat_sq, sigma):
    """|p(r)| - r, with +inf when a shifted eigenvalue is not positive."""
    den = lam + sigma * r
    if np.any(den <= 0.0):
        return math.inf
    return math.sqrt(float(np.sum(ghat_sq / den**2))) - r


def _radius_upper_bound(lam_min, gnorm, sigma):
    # Any radius with |p(r)| = r satisfies sigma r^2 + lam_min r <= |g|.
    return (-lam_min + math.sqrt(lam_min**2 + 4.0 * sigma * gnorm)) / (2.0 * sigma)


def _bisect_radius(lam, ghat_sq, sigma, lo, hi):
    """Root of the secular gap on (lo, hi].

    Returns the upper bisection endpoint, where every shifted eigenvalue is
    strictly positive, so the caller can form p(r) without dividing by zero.
    """
    for _ in range(60):
        if _radius_gap(hi, lam, ghat_sq, sigma) <= 0.0:
            break
        hi = 2.0 * max(hi, 1e-300)
    else:
        raise SecularSolveFailed("could not bracket the secular root from above")
    for _ in range(_MAX_BISECT):
        if hi - lo <= 4.0 * np.finfo(float).eps * max(hi, 1e-300):
            return hi
        mid = 0.5 * (lo + hi)
        if _radius_gap(mid, lam, ghat_sq, sigma) > 0.0:
            lo = mid
        else:
            hi = mid
    raise SecularSolveFailed(
        f"secular bisection did not converge in {_MAX_BISECT} steps (lo={lo}, hi={hi})"
    )


def solve_cubic(model: ReducedCubicModel, delta: float = 0.1) -> OracleSolution:
    """Global minimizer of the reduced cubic model.

    ``delta`` is the model-gradient budget of the acceptance test
    |grad m(u)| <= delta sigma |u|^2; the exact solve lands far inside it,
    and the value is only used for a defensive post-check.
    """
    sigma = model.sigma
    if sigma <= 0.0:
        raise ValueError("sigma must be positive")
    lam, Q = np.linalg.eigh(model.H_red)
    lam_min = float(lam[0])
    ghat = Q.T @ model.g_red
    gnorm = float(np.linalg.norm(model.g_red))
    r_floor = max(0.0, -lam_min) / sigma

    leftmost = lam <= lam[0] + _HARD_CASE_RTOL * max(1.0, abs(lam_min))
    g_left = float(np.linalg.norm(ghat[leftmost]))

    if gnorm == 0.0:
        if lam_min >= 0.0:
            p = np.zeros_like(model.g_red)
        else:
            p = r_floor * Q[:, 0]
    elif lam_min < 0.0 and g_left <= _HARD_CASE_RTOL * gnorm:
        # Hard-case candidate: the leftmost components of ghat are noise;
        # drop them and see whether the remaining curve still crosses r.
        ghat_used = np.where(leftmost, 0.0, ghat)
        coef = np.zeros_like(ghat)
        np.divide(-ghat_used, lam + sigma * r_floor, out=coef, where=~leftmost)
        interior_norm = float(np.linalg.norm(coef))
        if interior_norm < r_floor:
            # True hard case: pad with an eigenvector component so |p| = r.
            t = math.sqrt(max(0.0, r_floor**2 - interior_norm**2))
            p = Q @ coef + t * Q[:, 0]
        else:
            hi = _radius_upper_bound(lam_min, float(np.linalg.norm(ghat_used)), sigma)
            r = _bisect_radius(lam, ghat_used**2, sigma, r_floor, hi)
            coef = np.zeros_like(ghat)
            np.divide(-ghat_used, lam + sigma * r, out=coef, where=~leftmost)
            p = Q @ coef
    else:
        hi = _radius_upper_bound(lam_min, gnorm, sigma)
        r = _bisect_radius(lam, ghat**2, sigma, r_floor, hi)
        p = Q @ (-ghat / (lam + sigma * r))

    radius = float(np.linalg.norm(p))
    grad = model.g_red + model.H_red @ p + sigma * radius * p
    _, cauchy_dec = cauchy_point(model)
    dec = model_decrease(model, p)

    grad_norm = float(np.linalg.norm(grad))
    if grad_norm > delta * sigma * radius**2 + 1e-10 * max(1.0, gnorm):
        raise SecularSolveFailed(
            f"model gradient {grad_norm:.3e} exceeds budget "
            f"{delta * sigma * radius**2:.3e} after secular solve"
        )

    return OracleSolution(
        p=p, u=model.Z @ p, delta_m=dec, cauchy_delta_m=cauchy_dec,
        grad_model_norm=grad_norm, lambda_min_red=lam_min,
    )
