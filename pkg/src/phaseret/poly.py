"""Complex polynomials in ascending-power coefficient form.

A :class:`Polynomial` of ambient dimension ``n`` holds ``n`` complex
coefficients ``coeffs[k]`` of ``z**k``.  Polynomials that differ by a
unimodular factor are indistinguishable from intensity data, so this module
also provides the distance modulo global phase and a canonical
representative of each phase class.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable

import numpy as np

#: Relative zero threshold used throughout the package.
ZERO_TOL = 1e-8


def is_zero(values, tol: float = ZERO_TOL) -> np.ndarray:
    """Elementwise zero test relative to the largest magnitude in ``values``.

    An entry ``x`` counts as zero iff ``|x| <= tol * max|values|``.  For an
    all-zero vector every entry is zero.
    """
    mag = np.abs(np.asarray(values))
    if mag.size == 0:
        return np.zeros(0, dtype=bool)
    return mag <= tol * mag.max()


@dataclass(frozen=True, eq=False)
class Polynomial:
    """Polynomial ``sum_k coeffs[k] * z**k`` with ``len(coeffs) == n``.

    Coefficients are stored as a read-only ``complex128`` array.
    """

    coeffs: np.ndarray

    def __post_init__(self):
        c = np.array(self.coeffs, dtype=np.complex128).reshape(-1)
        if c.size < 1:
            raise ValueError("a polynomial needs at least one coefficient")
        if not np.all(np.isfinite(c)):
            raise ValueError("polynomial coefficients must be finite")
        c.flags.writeable = False
        object.__setattr__(self, "coeffs", c)

    @classmethod
    def zero(cls, n: int) -> "Polynomial":
        return cls(np.zeros(n, dtype=np.complex128))

    @classmethod
    def monomial(cls, n: int, power: int, coeff: complex = 1.0) -> "Polynomial":
        if not 0 <= power < n:
            raise ValueError(f"power {power} outside [0, {n - 1}]")
        c = np.zeros(n, dtype=np.complex128)
        c[power] = coeff
        return cls(c)

    @property
    def n(self) -> int:
        return self.coeffs.size

    @property
    def degree(self) -> int:
        """Largest index of a nonzero coefficient, or -1 for the zero polynomial."""
        if not np.any(self.coeffs):
            return -1
        nz = np.flatnonzero(~is_zero(self.coeffs))
        return int(nz[-1])

    def norm(self) -> float:
        return float(np.linalg.norm(self.coeffs))

    def __call__(self, z):
        return evaluate(self, z)

    def __eq__(self, other):
        if not isinstance(other, Polynomial):
            return NotImplemented
        return np.array_equal(self.coeffs, other.coeffs)

    def __hash__(self):
        return hash(self.coeffs.tobytes())

    def __add__(self, other: "Polynomial") -> "Polynomial":
        _check_same_dim(self, other)
        return Polynomial(self.coeffs + other.coeffs)

    def __sub__(self, other: "Polynomial") -> "Polynomial":
        _check_same_dim(self, other)
        return Polynomial(self.coeffs - other.coeffs)

    def __neg__(self) -> "Polynomial":
        return Polynomial(-self.coeffs)

    def __mul__(self, scalar) -> "Polynomial":
        if isinstance(scalar, Polynomial):
            return NotImplemented
        return Polynomial(complex(scalar) * self.coeffs)

    __rmul__ = __mul__

    def __repr__(self):
        return f"Polynomial({np.array2string(self.coeffs, precision=6)})"

    def to_dict(self) -> dict:
        return {
            "n": self.n,
            "coeffs": [[float(c.real), float(c.imag)] for c in self.coeffs],
        }

    @classmethod
    def from_dict(cls, data: dict) -> "Polynomial":
        try:
            n = int(data["n"])
            pairs = data["coeffs"]
            coeffs = [complex(float(re), float(im)) for re, im in pairs]
        except (KeyError, TypeError, ValueError) as exc:
            raise ValueError(f"malformed polynomial object: {exc}") from exc
        if len(coeffs) != n:
            raise ValueError(f"expected {n} coefficients, got {len(coeffs)}")
        return cls(np.array(coeffs, dtype=np.complex128))


def _check_same_dim(p: Polynomial, q: Polynomial):
    if p.n != q.n:
        raise ValueError(f"dimension mismatch: {p.n} != {q.n}")


def evaluate(p: Polynomial, z):
    """Evaluate ``p`` at ``z`` (scalar or array) with Horner's scheme."""
    z = np.asarray(z, dtype=np.complex128)
    acc = np.zeros_like(z)
    for c in p.coeffs[::-1]:
        acc = acc * z + c
    return acc[()] if acc.ndim == 0 else acc


def derivative(p: Polynomial) -> Polynomial:
    """Termwise derivative; a constant maps to the dimension-1 zero polynomial."""
    if p.n == 1:
        return Polynomial.zero(1)
    return Polynomial(p.coeffs[1:] * np.arange(1, p.n))


def _optimal_phase(p: Polynomial, q: Polynomial) -> complex:
    # unimodular u maximizing Re <p, u q>
    c = np.vdot(q.coeffs, p.coeffs)
    mag = abs(c)
    return c / mag if mag > 0 else 1.0 + 0j


def global_phase_distance(p: Polynomial, q: Polynomial) -> float:
    """Return ``min_phi ||p - exp(i phi) q||_2``.

    The minimizing phase is ``arg <q, p>``; the norm is then evaluated
    directly, which keeps full relative accuracy for nearly equivalent
    inputs (the expanded form ``||p||^2 + ||q||^2 - 2|<p, q>|`` cancels
    catastrophically there).
    """
    _check_same_dim(p, q)
    u = _optimal_phase(p, q)
    return float(np.linalg.norm(p.coeffs - u * q.coeffs))


def align_phase(q: Polynomial, p: Polynomial) -> Polynomial:
    """Rotate ``q`` by the unimodular factor bringing it closest to ``p``."""
    _check_same_dim(p, q)
    return Polynomial(_optimal_phase(p, q) * q.coeffs)


def canonical_phase(p: Polynomial, tol: float = ZERO_TOL) -> Polynomial:
    """Rotate ``p`` so its first nonzero coefficient is real and positive."""
    if not np.any(p.coeffs):
        return p
    j = int(np.flatnonzero(~is_zero(p.coeffs, tol))[0])
    lead = p.coeffs[j]
    rotated = p.coeffs * (abs(lead) / lead)
    # make the pivot exactly real; rounding leaves a ~1e-17 imaginary part
    rotated[j] = abs(lead)
    return Polynomial(rotated)


def trial_seeds(seed: int, count: int) -> list[int]:
    """Derive ``count`` independent 64-bit seeds from ``seed``.

    Uses :class:`numpy.random.SeedSequence` spawning, so trial ``i`` does not
    depend on how many trials are requested after it.
    """
    children = np.random.SeedSequence(seed).spawn(count)
    return [int(c.generate_state(1, dtype=np.uint64)[0]) for c in children]


def complex_normal(rng: np.random.Generator, size) -> np.ndarray:
    """Standard complex normal samples ``(g1 + i g2) / sqrt(2)``."""
    g = rng.standard_normal(size=(*np.atleast_1d(size), 2))
    return (g[..., 0] + 1j * g[..., 1]) / np.sqrt(2.0)


def random_polynomial(
    n: int, seed: int, support: Iterable[int] | None = None
) -> Polynomial:
    """Seeded random polynomial with i.i.d. complex normal coefficients.

    Args:
        n: ambient dimension.
        seed: seed for a PCG64 generator (``numpy.random.default_rng``).
        support: indices allowed to be nonzero, e.g. ``range(2, 4)``;
            defaults to all of ``range(n)``.  Coefficients outside it are
            exactly zero.
    """
    if n < 1:
        raise ValueError("n must be positive")
    idx = np.arange(n) if support is None else np.array(sorted(set(support)), dtype=int)
    if idx.size == 0:
        raise ValueError("support must not be empty")
    if idx[0] < 0 or idx[-1] >= n:
        raise ValueError(f"support {idx.tolist()} not inside [0, {n - 1}]")
    rng = np.random.default_rng(seed)
    c = np.zeros(n, dtype=np.complex128)
    c[idx] = complex_normal(rng, idx.size)
    return Polynomial(c)
