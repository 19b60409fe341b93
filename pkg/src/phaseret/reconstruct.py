"""Recover a polynomial, up to global phase, from its intensity measurements.

Pipeline: autocorrelation spectra from the measurements, a constant-case
shortcut, support detection (bandwidth ``k`` and offset ``m``), the
recursion for the rank-one products ``delta[i, j] = conj(a_i) a_j`` on the
support window, and finally ``a_j = delta[m, j] / sqrt(delta[m, m])``.

The recursion is exact in exact arithmetic but amplifies perturbations of
the spectrum, roughly geometrically in the bandwidth ``k``.  With
double-precision measurements it is reliable to about ``N = 8``; for larger
``N`` expect loss of accuracy or one of the consistency errors below.
"""
from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field

import numpy as np

from .measurement import (
    AutocorrelationSpectrum,
    MeasurementSet,
    autocorrelation_from_measurements,
    to_uniform,
)
from .poly import ZERO_TOL, Polynomial

logger = logging.getLogger(__name__)

#: Accepted distance of the computed offset from an integer (relative).
M_INTEGER_TOL = 1e-6

#: Relative imaginary residue tolerated on the diagonal products.
DIAGONAL_IMAG_TOL = 1e-8


class ReconstructionError(ValueError):
    """Measurements are not consistent with any polynomial.

    ``name`` is the machine-readable error identifier reported by the CLI.
    """

    @property
    def name(self) -> str:
        return type(self).__name__


class NonIntegerM(ReconstructionError):
    """The support offset computed from the spectrum is not an integer."""


class NegativeM(ReconstructionError):
    """The support offset computed from the spectrum is negative."""


class DegreeOverflow(ReconstructionError):
    """The detected degree exceeds ``N - 1``."""


class SqrtDomain(ReconstructionError):
    """The radicand of the offset formula is negative."""


class SupportMismatch(ReconstructionError):
    """The weighted spectrum extends beyond the plain one (``k' > k``)."""


class DivisionByNearZero(ReconstructionError):
    """The pivot ``delta[m, m+k]`` vanishes."""


class NonPositiveDiagonal(ReconstructionError):
    """``delta[m, m]`` is not a positive real number."""


@dataclass(frozen=True)
class SupportInfo:
    """Support window ``[m, m+k]`` of the polynomial.

    ``k`` and ``kprime`` are the highest nonzero lags of ``f`` and ``f'``
    (``kprime == -1`` when ``f'`` vanishes); ``d = m + k`` is the degree.
    """

    k: int
    kprime: int
    m: int

    @property
    def d(self) -> int:
        return self.m + self.k


@dataclass
class DeltaTable:
    """Products ``delta[i, j] = conj(a_i) a_j`` for ``m <= i <= j <= m+k``.

    Only the entries produced by the recursion are present: the first row
    ``(m, j)``, the last column ``(i, m+k)`` and the interior diagonals
    needed along the way.
    """

    m: int
    k: int
    entries: dict[tuple[int, int], complex] = field(default_factory=dict)

    def __getitem__(self, ij: tuple[int, int]) -> complex:
        return self.entries[ij]

    def __setitem__(self, ij: tuple[int, int], value: complex):
        self.entries[ij] = complex(value)

    def __contains__(self, ij) -> bool:
        return ij in self.entries

    def row(self) -> np.ndarray:
        """``delta[m, m..m+k]``."""
        return np.array([self.entries[self.m, j] for j in range(self.m, self.m + self.k + 1)])

    def rank_one_residual(self) -> float:
        """Relative defect of ``|delta[m, m+k]|^2 == delta[m, m] * delta[m+k, m+k]``."""
        m, k = self.m, self.k
        lhs = abs(self.entries[m, m + k]) ** 2
        rhs = self.entries[m, m].real * self.entries[m + k, m + k].real
        return abs(lhs - rhs) / max(lhs, abs(rhs), 1e-300)


@dataclass(frozen=True)
class Reconstruction:
    """Intermediate results of one run, for inspection and logging.

    ``support`` and ``table`` are ``None`` only for the zero polynomial;
    the constant branch records support ``(k=0, kprime=-1, m=0)`` and the
    one-entry table ``{(0, 0): f_0}``.
    """

    spectrum: AutocorrelationSpectrum
    support: SupportInfo | None
    table: DeltaTable | None
    polynomial: Polynomial

    @property
    def constant_branch(self) -> bool:
        return self.support is not None and self.support.kprime < 0


def _top_index(values: np.ndarray, tol: float) -> int:
    mag = np.abs(values)
    big = np.flatnonzero(mag > tol * mag.max()) if mag.max() > 0 else []
    return int(big[-1]) if len(big) else -1


def detect_support(spec: AutocorrelationSpectrum, tol: float = ZERO_TOL) -> SupportInfo:
    """Find the support window of the polynomial behind ``spec``.

    ``k`` is the highest nonzero lag of ``f``, and the offset is

        m = -k/2 + sqrt(Re(f'_k / f_k) + k^2 / 4),

    which must come out as a nonnegative integer for consistent data.
    """
    f, fp = spec.f, spec.fprime
    k = _top_index(f, tol)
    if k < 0:
        raise ValueError("zero spectrum has no support")
    kprime = _top_index(fp, tol)
    if kprime > k:
        raise SupportMismatch(f"k'={kprime} exceeds k={k}")

    radicand = (fp[k] / f[k]).real + k * k / 4.0
    if radicand < 0:
        # round-off can push an exact zero slightly negative
        if radicand < -M_INTEGER_TOL * (1.0 + k * k / 4.0):
            raise SqrtDomain(f"negative radicand {radicand:.6g}")
        radicand = 0.0
    m_raw = -k / 2.0 + math.sqrt(radicand)
    m = round(m_raw)
    if abs(m_raw - m) > M_INTEGER_TOL * (1.0 + abs(m_raw)):
        raise NonIntegerM(f"offset {m_raw!r} is not an integer")
    if m < 0:
        raise NegativeM(f"offset {m_raw!r} is negative")
    if m + k > spec.n - 1:
        raise DegreeOverflow(f"degree {m + k} exceeds {spec.n - 1}")
    logger.debug("support: k=%d k'=%d m=%d (m_raw=%r)", k, kprime, m, m_raw)
    return SupportInfo(k=k, kprime=kprime, m=int(m))


def delta_recursion(
    spec: AutocorrelationSpectrum, s: SupportInfo, tol: float = ZERO_TOL
) -> DeltaTable:
    """Fill the products ``conj(a_i) a_j`` on the support window, lag by lag.

    Lag ``k`` is ``f_k`` itself.  Each smaller lag ``k - n`` couples two new
    unknowns, ``delta[m, m+k-n]`` and ``delta[m+n, m+k]``, through the pair
    ``(f_{k-n}, f'_{k-n})``; the remaining terms of those sums are known
    products obtained from earlier lags via
    ``delta[l, l+k-n] = delta[l, m+k] * delta[m, l+k-n] / delta[m, m+k]``.
    The resulting 2x2 system has determinant ``n (2m + k)``.
    """
    f, fp = spec.f, spec.fprime
    m, k = s.m, s.k
    fscale = np.abs(f).max()
    dt = DeltaTable(m, k)

    dt[m, m + k] = f[k]
    pivot = dt[m, m + k]
    if abs(pivot) < tol * fscale:
        raise DivisionByNearZero(f"|delta[{m},{m + k}]| = {abs(pivot):.3g}")

    for n in range(1, k + 1):
        lag = k - n
        interior = range(m + 1, m + n)
        for ell in interior:
            assert (ell, m + k) in dt and (m, ell + lag) in dt
            dt[ell, ell + lag] = dt[ell, m + k] / pivot * dt[m, ell + lag]
        alpha = f[lag] - sum(dt[ell, ell + lag] for ell in interior)
        beta = fp[lag] - sum(ell * (ell + lag) * dt[ell, ell + lag] for ell in interior)
        det = n * (2 * m + k)
        dt[m, m + lag] = ((m + n) * (m + k) * alpha - beta) / det
        dt[m + n, m + k] = (-m * (m + lag) * alpha + beta) / det

    _check_diagonal(dt, m, fscale, tol)
    if k >= 1:
        _check_diagonal(dt, m + k, fscale, tol)
    return dt


def _check_diagonal(dt: DeltaTable, i: int, fscale: float, tol: float):
    v = dt[i, i]
    if v.real <= tol * fscale or abs(v.imag) > DIAGONAL_IMAG_TOL * abs(v):
        raise NonPositiveDiagonal(f"delta[{i},{i}] = {v:.6g}")
    dt[i, i] = v.real


def extract_coefficients(dt: DeltaTable, n: int) -> Polynomial:
    """``a_j = delta[m, j] / sqrt(delta[m, m])`` on the window, zero elsewhere."""
    m, k = dt.m, dt.k
    if m + k > n - 1:
        raise ValueError(f"support window [{m}, {m + k}] does not fit dimension {n}")
    d_mm = dt[m, m]
    if d_mm.real <= 0 or abs(d_mm.imag) > DIAGONAL_IMAG_TOL * abs(d_mm):
        raise NonPositiveDiagonal(f"delta[{m},{m}] = {d_mm:.6g}")
    r = math.sqrt(d_mm.real)
    coeffs = np.zeros(n, dtype=np.complex128)
    coeffs[m : m + k + 1] = dt.row() / r
    coeffs[m] = r
    return Polynomial(coeffs)


def _is_constant(spec: AutocorrelationSpectrum, tol: float) -> bool:
    return np.abs(spec.fprime).max() <= tol * np.abs(spec.f).max()


def pipeline_support(spec: AutocorrelationSpectrum, tol: float = ZERO_TOL) -> SupportInfo | None:
    """Support as seen by the pipeline: the constant branch first, then :func:`detect_support`.

    Returns ``None`` for the zero polynomial and ``(k=0, kprime=-1, m=0)``
    for a nonzero constant.
    """
    if _is_constant(spec, tol):
        if not np.any(spec.f):
            return None
        return SupportInfo(k=0, kprime=-1, m=0)
    return detect_support(spec, tol)


def run(ms: MeasurementSet, tol: float = ZERO_TOL) -> Reconstruction:
    """Run the full pipeline and keep every intermediate result."""
    spec = autocorrelation_from_measurements(to_uniform(ms))
    n = spec.n
    support = pipeline_support(spec, tol)

    if support is None:
        return Reconstruction(spec, None, None, Polynomial.zero(n))
    if support.kprime < 0:
        f0 = spec.f[0].real
        logger.info("constant branch: f_0 = %r", f0)
        dt = DeltaTable(0, 0, {(0, 0): complex(f0)})
        coeffs = np.zeros(n, dtype=np.complex128)
        coeffs[0] = math.sqrt(max(f0, 0.0))
        return Reconstruction(spec, support, dt, Polynomial(coeffs))

    dt = delta_recursion(spec, support, tol)
    q = extract_coefficients(dt, n)
    logger.info("recovered degree %d polynomial (m=%d, k=%d)", support.d, support.m, support.k)
    return Reconstruction(spec, support, dt, q)


def reconstruct(ms: MeasurementSet, tol: float = ZERO_TOL) -> Polynomial:
    """Recover the measured polynomial up to a global phase factor.

    The result has the same ambient dimension as the measurements and its
    lowest nonzero coefficient is real and positive.

    Raises:
        ReconstructionError: a subclass naming the consistency check that
            failed (``NonIntegerM``, ``DivisionByNearZero``, ...).
    """
    return run(ms, tol).polynomial
