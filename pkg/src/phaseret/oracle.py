"""Independent checks that do not rely on the reconstruction algorithm.

:func:`brute_force_reconstruct` fits the intensities directly by multi-start
local minimization of the squared magnitude residual, using nothing but
polynomial evaluation.  :func:`injectivity_probe` compares the measurement
vectors of two polynomials.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass

import numpy as np

from .measurement import MeasurementSet, measure
from .poly import Polynomial, complex_normal, derivative, evaluate

logger = logging.getLogger(__name__)

MAX_ORACLE_N = 4


class OracleBudgetExhausted(RuntimeError):
    """No restart drove the residual below the acceptance threshold."""

    def __init__(self, fit: "OracleFit", threshold: float):
        super().__init__(
            f"best residual {fit.residual:.3g} after {fit.restarts_run} restarts "
            f"exceeds {threshold:.3g}"
        )
        self.fit = fit
        self.threshold = threshold


@dataclass(frozen=True)
class OracleFit:
    polynomial: Polynomial
    residual: float
    restart: int
    restarts_run: int
    iterations: int


class _Residual:
    """Vectorized ``R(x)`` over real parameter vectors ``x = (Re q, Im q)``."""

    def __init__(self, ms: MeasurementSet):
        n = ms.n
        self.n = n
        w = _nodes(ms.nodes_w, 2 * n - 1)
        z = _nodes(ms.nodes_z, 2 * n - 3)
        # rows map coefficients to values of q at w and of q' at z
        eye = np.eye(n, dtype=np.complex128)
        self.vw = np.stack([evaluate(Polynomial(e), w) for e in eye], axis=1)
        self.vz = np.stack([evaluate(derivative(Polynomial(e)), z) for e in eye], axis=1)
        self.target_w = ms.intensities_p
        self.target_z = ms.intensities_dp

    def __call__(self, x: np.ndarray) -> np.ndarray:
        q = x[..., : self.n] + 1j * x[..., self.n :]
        rw = np.abs(q @ self.vw.T) - self.target_w
        rz = np.abs(q @ self.vz.T) - self.target_z
        return np.sum(rw**2, axis=-1) + np.sum(rz**2, axis=-1)


def _nodes(nodeset, count: int) -> np.ndarray:
    if nodeset is None:
        return np.exp(2j * np.pi * np.arange(count) / count)
    return nodeset.points


def _fd_gradient(func, x: np.ndarray, rel_step: float) -> np.ndarray:
    h = rel_step * np.maximum(1.0, np.abs(x))
    steps = np.diag(h)
    vals = func(np.concatenate([x + steps, x - steps]))
    dim = x.size
    return (vals[:dim] - vals[dim:]) / (2 * h)


STALL_REL_DECREASE = 1e-12
STALL_ITERATIONS = 20


def _bfgs(func, x0, *, rel_step, gtol, max_iter, ftarget):
    """Quasi-Newton descent with Armijo backtracking on a finite-difference gradient.

    Besides the gradient and iteration limits, a run ends once the residual
    has stalled (relative decrease below ``STALL_REL_DECREASE`` for
    ``STALL_ITERATIONS`` consecutive steps): finite-difference noise keeps
    the gradient from ever reaching ``gtol`` at a nonzero minimum.
    """
    x = x0.copy()
    fx = float(func(x))
    g = _fd_gradient(func, x, rel_step)
    dim = x.size
    hinv = np.eye(dim)
    it = 0
    stalled = 0
    for it in range(1, max_iter + 1):
        if np.linalg.norm(g) <= gtol or fx <= ftarget:
            break
        d = -hinv @ g
        slope = g @ d
        if slope >= 0:
            hinv = np.eye(dim)
            d = -g
            slope = -(g @ g)
        t = 1.0
        while True:
            x_new = x + t * d
            f_new = float(func(x_new))
            if f_new <= fx + 1e-4 * t * slope:
                break
            t *= 0.5
            if t < 1e-12:
                return x, fx, it
        g_new = _fd_gradient(func, x_new, rel_step)
        s, y = x_new - x, g_new - g
        sy = s @ y
        if sy > 1e-300:
            rho = 1.0 / sy
            v = np.eye(dim) - rho * np.outer(s, y)
            hinv = v @ hinv @ v.T + rho * np.outer(s, s)
        stalled = stalled + 1 if fx - f_new <= STALL_REL_DECREASE * fx else 0
        x, fx, g = x_new, f_new, g_new
        if stalled >= STALL_ITERATIONS:
            break
    return x, fx, it


def fit_measurements(
    ms: MeasurementSet,
    restarts: int = 32,
    seed: int = 0,
    *,
    rel_step: float = 1e-6,
    gtol: float = 1e-10,
    max_iter: int = 5000,
) -> OracleFit:
    """Minimize ``sum (|q(w_j)| - I_j)^2 + sum (|q'(z_j)| - J_j)^2`` over ``q``.

    Restarts are drawn from ``numpy.random.default_rng(seed)`` at the scale
    of the data.  The search stops early once a restart reaches a residual
    of ``1e-16`` times the data energy, which only a global minimizer can.
    Ties are broken by restart index.
    """
    if restarts < 1:
        raise ValueError("restarts must be positive")
    func = _Residual(ms)
    n = ms.n
    energy = float(np.sum(ms.intensities_p**2) + np.sum(ms.intensities_dp**2))
    # mean of |q|^2 over the circle equals ||q||^2
    radius = np.sqrt(np.mean(ms.intensities_p**2) / n)
    rng = np.random.default_rng(seed)
    ftarget = 1e-16 * max(energy, 1e-300)

    best = None
    for r in range(restarts):
        q0 = radius * complex_normal(rng, n)
        x0 = np.concatenate([q0.real, q0.imag])
        x, fx, its = _bfgs(func, x0, rel_step=rel_step, gtol=gtol, max_iter=max_iter, ftarget=ftarget)
        logger.debug("restart %d: residual %.3g after %d iterations", r, fx, its)
        if best is None or fx < best[1]:
            best = (x, fx, r, its)
        if fx <= ftarget:
            break
    x, fx, r_best, its = best
    q = Polynomial(x[:n] + 1j * x[n:])
    return OracleFit(q, fx, r_best, r + 1, its)


def brute_force_reconstruct(ms: MeasurementSet, restarts: int = 32, seed: int = 0) -> Polynomial:
    """Recover a polynomial matching ``ms`` by direct residual minimization.

    Desk-scale only (``N <= 4``).  Raises :class:`OracleBudgetExhausted`
    (carrying the best fit) if the residual stays above ``1e-6`` times the
    data energy.
    """
    if ms.n > MAX_ORACLE_N:
        raise ValueError(f"brute force is limited to n <= {MAX_ORACLE_N}")
    fit = fit_measurements(ms, restarts, seed)
    energy = float(np.sum(ms.intensities_p**2) + np.sum(ms.intensities_dp**2))
    threshold = 1e-6 * energy
    if fit.residual > threshold:
        raise OracleBudgetExhausted(fit, threshold)
    return fit.polynomial


def injectivity_probe(p: Polynomial, q: Polynomial) -> float:
    """Sup-norm distance between the measurement vectors of ``p`` and ``q``."""
    if p.n != q.n:
        raise ValueError(f"dimension mismatch: {p.n} != {q.n}")
    return float(np.max(np.abs(measure(p).vector() - measure(q).vector())))
