"""Shared test utilities: brute-force subproblem oracle and record surgery."""

import dataclasses

import numpy as np
from scipy import optimize


def model_value(g, H, sigma, p):
    """Reduced cubic model value at p (f0 = 0)."""
    p = np.asarray(p, dtype=float)
    r = np.linalg.norm(p)
    return float(g @ p + 0.5 * p @ H @ p + sigma / 3.0 * r**3)


def model_gradient(g, H, sigma, p):
    p = np.asarray(p, dtype=float)
    return g + H @ p + sigma * np.linalg.norm(p) * p


def search_radius(g, H, sigma):
    """Any minimizer p* satisfies sigma r^2 - |H| r - |g| <= 0 at r = |p*|."""
    norm_h = float(np.linalg.norm(H, 2))
    norm_g = float(np.linalg.norm(g))
    return (norm_h + np.sqrt(norm_h**2 + 4.0 * sigma * norm_g)) / (2.0 * sigma)


def grid_polish_min(g, H, sigma, step=1e-3):
    """Global minimum of the cubic model by dense grid search plus polish.

    Deliberately independent of the solver's secular-equation machinery:
    evaluates the model on a regular grid covering every possible minimizer,
    then runs a local quasi-Newton polish from the best grid point.
    Supports 1 and 2 dimensions.
    """
    g = np.asarray(g, dtype=float).reshape(-1)
    H = np.atleast_2d(np.asarray(H, dtype=float))
    dim = len(g)
    radius = search_radius(g, H, sigma) + 2 * step
    xs = np.arange(-radius, radius + step, step)

    if dim == 1:
        vals = g[0] * xs + 0.5 * H[0, 0] * xs**2 + sigma / 3.0 * np.abs(xs) ** 3
        best = np.array([xs[np.argmin(vals)]])
    elif dim == 2:
        best = None
        best_val = np.inf
        # chunk the row dimension to cap the live meshgrid size
        chunk = max(1, int(4e6 // len(xs)))
        for lo in range(0, len(xs), chunk):
            X, Y = np.meshgrid(xs[lo:lo + chunk], xs, indexing="ij")
            V = (g[0] * X + g[1] * Y
                 + 0.5 * (H[0, 0] * X * X + 2.0 * H[0, 1] * X * Y + H[1, 1] * Y * Y)
                 + sigma / 3.0 * (X * X + Y * Y) ** 1.5)
            k = np.argmin(V)
            if V.flat[k] < best_val:
                best_val = V.flat[k]
                best = np.array([X.flat[k], Y.flat[k]])
    else:
        raise ValueError("grid oracle supports 1-D and 2-D models only")

    res = optimize.minimize(
        lambda p: model_value(g, H, sigma, p), best,
        jac=lambda p: model_gradient(g, H, sigma, p),
        method="BFGS", options={"gtol": 1e-12, "maxiter": 200},
    )
    candidate = res.x if res.fun <= model_value(g, H, sigma, best) else best
    return candidate, model_value(g, H, sigma, candidate)


def perturb(record, **replacements):
    """Copy an iteration record with chosen fields replaced."""
    return dataclasses.replace(record, **replacements)
