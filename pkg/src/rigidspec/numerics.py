"""Dense complex linear algebra used as the brute-force oracle layer.

Matrices are plain ``numpy.ndarray`` objects of dtype ``complex128``;
:func:`as_matrix` is the single validation gate.
"""

from __future__ import annotations

import cmath
import math

import mpmath
import numpy as np

__all__ = [
    "NumericsError",
    "SingularMatrixError",
    "ATOL",
    "RTOL",
    "SVD_LIMIT",
    "as_matrix",
    "close",
    "op_norm",
    "op_norm_matfree",
    "eigenvalues",
    "inverse",
    "spectral_radius",
    "log_power_norm",
    "power_phase",
    "pow_minus_one",
    "complex_power",
]

ATOL = 1e-12
RTOL = 1e-9
SVD_LIMIT = 512


class NumericsError(ValueError):
    """Raised for malformed matrices or unsupported shapes."""


class SingularMatrixError(NumericsError):
    """Raised when a matrix is singular within tolerance.

    The smallest singular value is kept on ``smin``.
    """

    def __init__(self, smin: float):
        super().__init__(f"singular matrix (smallest singular value {smin:.3e})")
        self.smin = smin


def as_matrix(m) -> np.ndarray:
    """Return ``m`` as a read-only 2-D complex128 array with finite entries."""
    a = np.array(m, dtype=np.complex128)
    if a.ndim == 1:
        a = a.reshape(1, -1) if a.size else a.reshape(0, 0)
    if a.ndim != 2:
        raise NumericsError(f"expected a 2-D matrix, got ndim={a.ndim}")
    if a.size == 0:
        raise NumericsError("empty matrix")
    if not np.all(np.isfinite(a)):
        raise NumericsError("matrix has non-finite entries")
    a.setflags(write=False)
    return a


def close(a: float, b: float, atol: float = ATOL, rtol: float = RTOL) -> bool:
    """Hybrid comparison ``|a-b| <= atol + rtol*max(|a|,|b|)``."""
    if a == b:
        return True
    return abs(a - b) <= atol + rtol * max(abs(a), abs(b))


def _square(a: np.ndarray) -> None:
    if a.shape[0] != a.shape[1]:
        raise NumericsError(f"matrix must be square, got {a.shape}")


def op_norm(m) -> float:
    """Largest singular value of ``m``.

    Full SVD up to :data:`SVD_LIMIT` rows/cols, power iteration on
    ``A^H A`` beyond that.
    """
    a = as_matrix(m)
    if max(a.shape) <= SVD_LIMIT:
        return float(np.linalg.svd(a, compute_uv=False)[0])
    return op_norm_matfree(lambda x: a @ x, lambda y: a.conj().T @ y, a.shape[1])


def op_norm_matfree(matvec, rmatvec, ncols: int, tol: float = 1e-12,
                    max_iter: int = 10_000, seed: int = 0) -> float:
    """Power iteration on ``A^H A`` given only products with ``A`` and ``A^H``.

    Stops when the relative change of the Rayleigh estimate drops below
    ``tol``.
    """
    rng = np.random.default_rng(seed)
    x = rng.standard_normal(ncols) + 1j * rng.standard_normal(ncols)
    x /= np.linalg.norm(x)
    sigma = 0.0
    for _ in range(max_iter):
        y = matvec(x)
        new = float(np.linalg.norm(y))
        if new == 0.0:
            return 0.0
        z = rmatvec(y)
        zn = np.linalg.norm(z)
        if zn == 0.0:
            return new
        x = z / zn
        if abs(new - sigma) <= tol * new:
            sigma = new
            break
        sigma = new
    # one last application with the converged vector
    return max(sigma, float(np.linalg.norm(matvec(x))))


def eigenvalues(m) -> np.ndarray:
    a = as_matrix(m)
    _square(a)
    return np.linalg.eigvals(a)


def inverse(m) -> np.ndarray:
    """Inverse of a numerically nonsingular square matrix.

    Raises :class:`SingularMatrixError` when ``smin <= 1e-12 * smax``.
    """
    a = as_matrix(m)
    _square(a)
    s = np.linalg.svd(a, compute_uv=False)
    if s[-1] <= 1e-12 * s[0]:
        raise SingularMatrixError(float(s[-1]))
    inv = np.linalg.inv(a)
    residual = np.linalg.norm(a @ inv - np.eye(a.shape[0]), 2)
    if residual > 1e-8:
        raise SingularMatrixError(float(s[-1]))
    return inv


def spectral_radius(m) -> float:
    return float(np.max(np.abs(eigenvalues(m))))


def log_power_norm(m, n: int) -> float:
    """``log ||m**n||`` by binary powering with rescaling (no overflow)."""
    a = as_matrix(m)
    _square(a)
    if n < 0:
        raise NumericsError("negative exponent")
    dim = a.shape[0]
    result = np.eye(dim, dtype=np.complex128)
    result_log = 0.0
    base = np.array(a)
    base_log = 0.0
    while True:
        if n & 1:
            result = result @ base
            result_log += base_log
            s = np.abs(result).max()
            if s == 0.0:
                return -math.inf
            result /= s
            result_log += math.log(s)
        n >>= 1
        if not n:
            break
        base = base @ base
        base_log *= 2
        s = np.abs(base).max()
        if s == 0.0:
            return -math.inf
        base /= s
        base_log += math.log(s)
    sigma = float(np.linalg.svd(result, compute_uv=False)[0])
    if sigma == 0.0:
        return -math.inf
    return result_log + math.log(sigma)


def power_phase(z: complex, n: int) -> tuple[float, float]:
    """Return ``(n*log|z|, arg(z**n))`` with the phase reduced exactly.

    ``n`` may be a huge integer (e.g. ``30!``). ``log|z|`` and ``arg z``
    are taken from the exact binary value of ``z`` and multiplied by ``n``
    in extended precision before the phase is reduced into ``(-pi, pi]``.
    """
    z, n = complex(z), int(n)
    if z == 0:
        raise NumericsError("zero has no phase")
    bits = max(n.bit_length(), 1) + 80
    with mpmath.workprec(bits):
        w = mpmath.mpc(z.real, z.imag)
        log_mod = float(mpmath.log(abs(w)) * n)
        if z.imag == 0.0 and z.real > 0.0:
            return log_mod, 0.0
        t = mpmath.arg(w) * n
        two_pi = 2 * mpmath.pi
        t = t - two_pi * mpmath.floor(t / two_pi)
        if t > mpmath.pi:
            t -= two_pi
        phase = float(t)
    return log_mod, phase


def pow_minus_one(z: complex, n: int) -> complex:
    """``z**n - 1`` accurately, also near roots of unity and for huge ``n``."""
    log_mod, phase = power_phase(z, n)
    if log_mod > 700.0:
        return complex(math.inf, 0.0)
    # e^{x+iy} - 1 = expm1(x) cos y - 2 sin^2(y/2) + i e^x sin y
    em1 = math.expm1(log_mod)
    real = em1 * math.cos(phase) - 2.0 * math.sin(0.5 * phase) ** 2
    imag = math.exp(log_mod) * math.sin(phase)
    return complex(real, imag)


def complex_power(z: complex, n: int) -> complex:
    """``z**n`` with exact phase reduction (huge ``n`` allowed)."""
    if n == 0:
        return 1 + 0j
    if z == 0:
        return 0j
    log_mod, phase = power_phase(z, n)
    if log_mod > 709.0:
        return complex(math.inf, math.inf)
    return cmath.rect(math.exp(log_mod), phase)
