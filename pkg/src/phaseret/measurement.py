"""Intensity measurements on the unit circle and their autocorrelation spectra.

The standard design samples ``|p|`` at the ``2N-1`` and ``|p'|`` at the
``2N-3`` roots of unity, for ``4N-4`` numbers in total.  Squared magnitudes
on the circle are trigonometric polynomials, so a DFT over these nodes
returns the autocorrelation sequences

    f_n  = sum_l conj(a_l) a_{l+n}
    f'_n = sum_l l (l+n) conj(a_l) a_{l+n}

from which :mod:`phaseret.reconstruct` recovers ``p``.  Measurements taken
at arbitrary distinct nodes are brought back to the uniform design by
trigonometric interpolation (:func:`to_uniform`).
"""
from __future__ import annotations

import logging
import warnings
from dataclasses import dataclass

import numpy as np

from .poly import Polynomial, derivative, evaluate

logger = logging.getLogger(__name__)

TWO_PI = 2.0 * np.pi

#: Minimum circular separation between nodes, in radians.
NODE_SEPARATION = 1e-12

#: Condition number above which interpolation emits a warning.
COND_WARN = 1e12

#: Relative imaginary residue tolerated on quantities that must be real.
REAL_TOL = 1e-10


class IllConditionedWarning(UserWarning):
    """The interpolation system is close to singular."""


def _as_real_vector(values, name: str) -> np.ndarray:
    v = np.array(values, dtype=np.float64).reshape(-1)
    if not np.all(np.isfinite(v)):
        raise ValueError(f"{name} must be finite")
    v.flags.writeable = False
    return v


def circular_gaps(angles: np.ndarray) -> np.ndarray:
    """Gaps between consecutive nodes around the circle (including wrap-around)."""
    a = np.sort(np.asarray(angles, dtype=np.float64))
    if a.size < 2:
        return np.array([TWO_PI])
    return np.diff(np.append(a, a[0] + TWO_PI))


@dataclass(frozen=True, eq=False)
class NodeSet:
    """Points ``exp(i * angles[j])`` on the unit circle."""

    angles: np.ndarray

    def __post_init__(self):
        a = _as_real_vector(self.angles, "angles")
        if np.any(a < 0) or np.any(a >= TWO_PI):
            raise ValueError("angles must lie in [0, 2*pi)")
        if a.size > 1 and circular_gaps(a).min() <= NODE_SEPARATION:
            raise ValueError("nodes are not mutually distinct")
        object.__setattr__(self, "angles", a)

    def __len__(self):
        return self.angles.size

    @property
    def points(self) -> np.ndarray:
        return np.exp(1j * self.angles)

    def min_gap(self) -> float:
        return float(circular_gaps(self.angles).min())

    def to_dict(self) -> dict:
        return {"angles": [float(t) for t in self.angles]}

    @classmethod
    def from_dict(cls, data: dict) -> "NodeSet":
        try:
            return cls(np.array([float(t) for t in data["angles"]]))
        except (KeyError, TypeError) as exc:
            raise ValueError(f"malformed node set: {exc}") from exc


@dataclass(frozen=True, eq=False)
class MeasurementSet:
    """The ``4N-4`` intensities ``|p(w_j)|`` and ``|p'(z_j)|``.

    ``nodes_w``/``nodes_z`` are ``None`` for the roots-of-unity design;
    otherwise they record where the corresponding intensities were taken.
    """

    n: int
    intensities_p: np.ndarray
    intensities_dp: np.ndarray
    nodes_w: NodeSet | None = None
    nodes_z: NodeSet | None = None

    def __post_init__(self):
        n = int(self.n)
        if n < 2:
            raise ValueError("measurements need ambient dimension n >= 2")
        ip = _as_real_vector(self.intensities_p, "intensities_p")
        idp = _as_real_vector(self.intensities_dp, "intensities_dp")
        if ip.size != 2 * n - 1 or idp.size != 2 * n - 3:
            raise ValueError(
                f"n={n} needs {2 * n - 1} + {2 * n - 3} intensities, "
                f"got {ip.size} + {idp.size}"
            )
        if np.any(ip < 0) or np.any(idp < 0):
            raise ValueError("intensities must be nonnegative")
        if self.nodes_w is not None and len(self.nodes_w) != ip.size:
            raise ValueError("nodes_w does not match intensities_p")
        if self.nodes_z is not None and len(self.nodes_z) != idp.size:
            raise ValueError("nodes_z does not match intensities_dp")
        object.__setattr__(self, "n", n)
        object.__setattr__(self, "intensities_p", ip)
        object.__setattr__(self, "intensities_dp", idp)

    @property
    def is_uniform(self) -> bool:
        return self.nodes_w is None and self.nodes_z is None

    def __len__(self):
        return self.intensities_p.size + self.intensities_dp.size

    def vector(self) -> np.ndarray:
        return np.concatenate([self.intensities_p, self.intensities_dp])

    def to_dict(self) -> dict:
        d = {
            "n": self.n,
            "intensities_p": [float(x) for x in self.intensities_p],
            "intensities_dp": [float(x) for x in self.intensities_dp],
        }
        if self.nodes_w is not None:
            d["nodes_w"] = self.nodes_w.to_dict()
        if self.nodes_z is not None:
            d["nodes_z"] = self.nodes_z.to_dict()
        return d

    @classmethod
    def from_dict(cls, data: dict) -> "MeasurementSet":
        try:
            nw = data.get("nodes_w")
            nz = data.get("nodes_z")
            return cls(
                n=int(data["n"]),
                intensities_p=np.array([float(x) for x in data["intensities_p"]]),
                intensities_dp=np.array([float(x) for x in data["intensities_dp"]]),
                nodes_w=None if nw is None else NodeSet.from_dict(nw),
                nodes_z=None if nz is None else NodeSet.from_dict(nz),
            )
        except (KeyError, TypeError, AttributeError) as exc:
            raise ValueError(f"malformed measurement set: {exc}") from exc


@dataclass(frozen=True, eq=False)
class AutocorrelationSpectrum:
    """Autocorrelation ``f[0..N-1]`` and weighted autocorrelation ``fprime[0..N-1]``.

    ``fprime[N-1]`` is always exactly zero; ``f[0]`` and ``fprime[0]`` are
    stored as real numbers after their imaginary residue has been checked.
    """

    n: int
    f: np.ndarray
    fprime: np.ndarray

    def __post_init__(self):
        n = int(self.n)
        f = np.array(self.f, dtype=np.complex128).reshape(-1)
        fp = np.array(self.fprime, dtype=np.complex128).reshape(-1)
        if f.size != n or fp.size != n:
            raise ValueError(f"spectra must have length {n}")
        if fp[-1] != 0:
            raise ValueError("fprime[N-1] must be exactly zero")
        for name, v in (("f", f), ("fprime", fp)):
            if not np.all(np.isfinite(v)):
                raise ValueError(f"{name} must be finite")
            scale = max(abs(v[0]), np.abs(v).max())
            if abs(v[0].imag) > REAL_TOL * scale:
                raise ValueError(f"{name}[0] is not real (imaginary part {v[0].imag:.3g})")
            v[0] = v[0].real
        f.flags.writeable = False
        fp.flags.writeable = False
        object.__setattr__(self, "n", n)
        object.__setattr__(self, "f", f)
        object.__setattr__(self, "fprime", fp)


@dataclass(frozen=True, eq=False)
class TrigPolynomial:
    """``f(t) = sum_{n=-m}^{m} a[n + m] exp(i n t)``."""

    m: int
    a: np.ndarray

    def __post_init__(self):
        a = np.array(self.a, dtype=np.complex128).reshape(-1)
        if self.m < 0 or a.size != 2 * self.m + 1:
            raise ValueError(f"degree {self.m} needs {2 * self.m + 1} coefficients")
        a.flags.writeable = False
        object.__setattr__(self, "a", a)

    def coefficient(self, n: int) -> complex:
        if abs(n) > self.m:
            return 0j
        return complex(self.a[n + self.m])

    def __call__(self, t):
        t = np.asarray(t, dtype=np.float64)
        n = np.arange(-self.m, self.m + 1)
        return np.exp(1j * np.multiply.outer(t, n)) @ self.a

    def is_real(self, tol: float = 1e-10) -> bool:
        """True iff ``a[-n] == conj(a[n])`` for all ``n`` (relative ``tol``)."""
        scale = max(np.abs(self.a).max(), 1e-300)
        return bool(np.all(np.abs(self.a - np.conj(self.a[::-1])) <= tol * scale))


def roots_of_unity(m: int) -> NodeSet:
    """Angles ``2 pi j / m`` for ``j = 0..m-1``."""
    if m < 1:
        raise ValueError("m must be positive")
    return NodeSet(TWO_PI * np.arange(m) / m)


def _unit_roots(m: int) -> np.ndarray:
    return np.exp(2j * np.pi * np.arange(m) / m)


def measure(p: Polynomial) -> MeasurementSet:
    """Intensities of ``p`` at the ``(2N-1)``-th and of ``p'`` at the ``(2N-3)``-th roots of unity."""
    n = p.n
    if n < 2:
        raise ValueError("measure needs ambient dimension n >= 2")
    dp = derivative(p)
    return MeasurementSet(
        n=n,
        intensities_p=np.abs(evaluate(p, _unit_roots(2 * n - 1))),
        intensities_dp=np.abs(evaluate(dp, _unit_roots(2 * n - 3))),
    )


def measure_at_nodes(p: Polynomial, nodes_w: NodeSet, nodes_z: NodeSet):
    """Return ``(|p(w_j)|, |p'(z_j)|)`` at arbitrary distinct unit-circle nodes.

    Requires ``2N-1`` nodes in ``nodes_w`` and ``2N-3`` in ``nodes_z``.
    """
    n = p.n
    if n < 2:
        raise ValueError("measure needs ambient dimension n >= 2")
    if len(nodes_w) != 2 * n - 1 or len(nodes_z) != 2 * n - 3:
        raise ValueError(
            f"n={n} needs {2 * n - 1} w-nodes and {2 * n - 3} z-nodes, "
            f"got {len(nodes_w)} and {len(nodes_z)}"
        )
    vw = np.abs(evaluate(p, nodes_w.points))
    vz = np.abs(evaluate(derivative(p), nodes_z.points))
    return vw, vz


def measure_general(p: Polynomial, nodes_w: NodeSet, nodes_z: NodeSet) -> MeasurementSet:
    """Like :func:`measure_at_nodes`, packaged as a node-carrying :class:`MeasurementSet`."""
    vw, vz = measure_at_nodes(p, nodes_w, nodes_z)
    return MeasurementSet(p.n, vw, vz, nodes_w=nodes_w, nodes_z=nodes_z)


def trig_interpolate(values, nodes: NodeSet, m: int) -> TrigPolynomial:
    """Trigonometric polynomial of degree ``<= m`` through ``2m+1`` samples.

    Multiplying the samples by ``exp(i m t_k)`` turns the problem into
    ordinary interpolation of an algebraic polynomial of degree ``2m`` at
    the points ``exp(i t_k)``.  That Vandermonde system is solved with a
    partially pivoted LU factorization; coefficient ``n`` of the trig
    polynomial is the coefficient of ``z**(n+m)``.
    """
    values = np.asarray(values, dtype=np.complex128).reshape(-1)
    size = 2 * m + 1
    if m < 0 or values.size != size or len(nodes) != size:
        raise ValueError(
            f"degree {m} needs {size} values and nodes, got {values.size} and {len(nodes)}"
        )
    t = nodes.angles
    rhs = np.exp(1j * m * t) * values
    vander = np.vander(np.exp(1j * t), size, increasing=True)
    cond = np.linalg.cond(vander)
    if cond > COND_WARN:
        warnings.warn(
            f"interpolation system has condition number {cond:.3g}",
            IllConditionedWarning,
            stacklevel=2,
        )
    logger.debug("trig_interpolate: m=%d cond=%.3g", m, cond)
    return TrigPolynomial(m, np.linalg.solve(vander, rhs))


def _dft_rows(num_nodes: int, num_freqs: int) -> np.ndarray:
    # exp(-2 pi i j n / M) with j*n reduced mod M before scaling
    jn = np.outer(np.arange(num_nodes), np.arange(num_freqs)) % num_nodes
    return np.exp(-2j * np.pi * jn / num_nodes)


def uniform_coefficients(samples, num_freqs: int) -> np.ndarray:
    """Nonnegative-index trig coefficients from samples at the ``M`` roots of unity.

    ``a_n = (1/M) sum_j samples[j] exp(-2 pi i j n / M)`` for
    ``n = 0..num_freqs-1``, by direct summation.
    """
    s = np.asarray(samples)
    return s @ _dft_rows(s.size, num_freqs) / s.size


def autocorrelation_from_measurements(ms: MeasurementSet) -> AutocorrelationSpectrum:
    """Autocorrelation spectra from roots-of-unity intensities."""
    if not ms.is_uniform:
        raise ValueError("measurements were not taken at roots of unity; use to_uniform()")
    n = ms.n
    f = uniform_coefficients(ms.intensities_p**2, n)
    fp = np.zeros(n, dtype=np.complex128)
    fp[: n - 1] = uniform_coefficients(ms.intensities_dp**2, n - 1)
    return AutocorrelationSpectrum(n, f, fp)


def autocorrelation_from_coefficients(p: Polynomial) -> AutocorrelationSpectrum:
    """Autocorrelation spectra evaluated directly from the coefficients of ``p``."""
    a = p.coeffs
    n = p.n
    f = np.array([np.vdot(a[: n - k], a[k:]) for k in range(n)])
    idx = np.arange(n)
    fp = np.zeros(n, dtype=np.complex128)
    for k in range(n - 1):
        ell = idx[1 : n - k]
        fp[k] = np.sum(ell * (ell + k) * np.conj(a[ell]) * a[ell + k])
    return AutocorrelationSpectrum(n, f, fp)


def _resample(values: np.ndarray, nodes: NodeSet, degree: int, count: int) -> np.ndarray:
    tp = trig_interpolate(values**2, nodes, degree)
    squared = tp(TWO_PI * np.arange(count) / count).real
    return np.sqrt(np.clip(squared, 0.0, None))


def to_uniform(ms: MeasurementSet) -> MeasurementSet:
    """Convert arbitrary-node intensities to the roots-of-unity design.

    ``|p|^2`` and ``|p'|^2`` on the circle are trigonometric polynomials of
    degree ``N-1`` and ``N-2``; each is interpolated through its nodes and
    resampled at the corresponding roots of unity.  Measurements that are
    already uniform are returned unchanged.
    """
    if ms.is_uniform:
        return ms
    n = ms.n
    ip, idp = ms.intensities_p, ms.intensities_dp
    if ms.nodes_w is not None:
        ip = _resample(ip, ms.nodes_w, n - 1, 2 * n - 1)
    if ms.nodes_z is not None:
        idp = _resample(idp, ms.nodes_z, n - 2, 2 * n - 3)
    return MeasurementSet(n, ip, idp)


def random_nodes(count: int, min_gap: float, seed: int) -> NodeSet:
    """Random rotation of ``count`` nodes with circular gaps of at least ``min_gap``.

    Gaps are ``min_gap`` plus a uniformly random split (flat Dirichlet) of
    the remaining circumference.
    """
    slack = TWO_PI - count * min_gap
    if count < 1 or slack <= 0:
        raise ValueError(f"cannot place {count} nodes with gap {min_gap}")
    rng = np.random.default_rng(seed)
    gaps = min_gap + slack * rng.dirichlet(np.ones(count))
    angles = np.mod(rng.uniform(0, TWO_PI) + np.concatenate([[0.0], np.cumsum(gaps[:-1])]), TWO_PI)
    angles[angles >= TWO_PI] = 0.0
    return NodeSet(angles)
