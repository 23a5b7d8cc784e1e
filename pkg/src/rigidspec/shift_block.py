"""Weighted cyclic shift blocks ``v = v(n, p, alpha)``.

``v`` sends ``e_j`` to ``beta_j e_{j+1}`` (indices mod ``n``) with
``beta_j = alpha`` on the first ``p`` slots and ``alpha**(-p/q)`` on the
remaining ``q = n - p`` slots, so that ``v**n`` is the identity.

Everything that involves products of weights is kept in log domain.
The prefix log-products have a closed form,

    L(j) = j * log(alpha)                 for j <= p
    L(j) = (n - j) * (p/q) * log(alpha)   for j >= p

which is what lets the formula path run at ``n = 30!`` without ever
materializing a weight vector.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass
from fractions import Fraction
from functools import cached_property

import numpy as np

from .numerics import SVD_LIMIT, op_norm, op_norm_matfree, pow_minus_one, power_phase

__all__ = [
    "ParameterError",
    "BlockParams",
    "ShiftBlock",
    "Bracket",
    "MATRIX_LIMIT",
    "ROOT_TOL",
    "root_tolerance",
    "make_block",
    "shift_block",
    "to_matrix",
    "power_norm_log",
    "window_log",
    "block_power",
    "apply_power",
    "psi",
    "psi_scaled",
    "psi_norm_log",
    "resolvent_norm",
    "resolvent_norm_log",
    "resolvent_log_bounds",
    "s_sum_log",
    "s_sum_bracket",
    "check_weight_inequality",
    "log_geometric",
    "log_geometric_signed",
    "log_abs_pow_minus_one",
]

MATRIX_LIMIT = 10_000
VECTOR_LIMIT = 10_000_000
ROOT_TOL = 1e-12
_INT64_MAX = 2**63 - 1
_EPS = float(np.finfo(float).eps)


class ParameterError(ValueError):
    """Invalid block parameters."""


@dataclass(frozen=True)
class BlockParams:
    """Parameters ``(n, p, alpha)`` of one shift block.

    ``alpha`` is stored through its logarithm: the theorem families use
    ``alpha = 1 + c/(k-1)!`` which rounds to exactly 1.0 in double
    precision from ``k = 20`` on, while ``log_alpha`` stays accurate.
    """

    n: int
    p: int
    log_alpha: float

    def __post_init__(self):
        if not isinstance(self.n, int) or not isinstance(self.p, int):
            raise ParameterError("n and p must be integers")
        if not 1 <= self.p < self.n:
            raise ParameterError(f"need 1 <= p < n, got n={self.n}, p={self.p}")
        if not (math.isfinite(self.log_alpha) and self.log_alpha > 0.0):
            raise ParameterError(f"need alpha > 1, got log(alpha)={self.log_alpha}")

    @classmethod
    def of(cls, n: int, p: int, alpha: float) -> "BlockParams":
        if not alpha > 1.0:
            raise ParameterError(f"need alpha > 1, got alpha={alpha}")
        return cls(int(n), int(p), math.log(alpha))

    @property
    def q(self) -> int:
        return self.n - self.p

    @property
    def alpha(self) -> float:
        return math.exp(self.log_alpha)

    @property
    def ratio(self):
        """``p/q``, as a :class:`~fractions.Fraction` when both fit in 64 bits."""
        if self.p <= _INT64_MAX and self.q <= _INT64_MAX:
            return Fraction(self.p, self.q)
        return self.p / self.q

    @property
    def log_small_weight(self) -> float:
        """``log(beta_n) = -(p/q) log(alpha)``."""
        return -float(self.ratio) * self.log_alpha


def _log_weights(n: int, p: int, a: float, g: float, idx: np.ndarray) -> np.ndarray:
    # prefix log-products L(idx), idx in [0, n]
    idx = np.asarray(idx)
    return np.where(idx <= p, idx * a, (n - idx) * g)


@dataclass(frozen=True)
class ShiftBlock:
    params: BlockParams

    @property
    def n(self) -> int:
        return self.params.n

    @property
    def dim(self) -> int:
        return self.params.n

    @cached_property
    def log_beta(self) -> np.ndarray:
        """Natural logs of ``beta_1 .. beta_n`` (materialized on demand)."""
        n, p = self.params.n, self.params.p
        if n > VECTOR_LIMIT:
            raise ParameterError(f"block dimension {n} too large to materialize")
        out = np.empty(n)
        out[:p] = self.params.log_alpha
        out[p:] = self.params.log_small_weight
        out.setflags(write=False)
        return out

    @cached_property
    def log_prefix(self) -> np.ndarray:
        """``L(0..n)`` from the closed form; ``L(0) = L(n) = 0`` exactly."""
        n = self.params.n
        if n > VECTOR_LIMIT:
            raise ParameterError(f"block dimension {n} too large to materialize")
        a = self.params.log_alpha
        g = float(self.params.ratio) * a
        out = _log_weights(n, self.params.p, a, g, np.arange(n + 1)).astype(float)
        out.setflags(write=False)
        return out

    # --- block protocol used by block_operator ---------------------------

    def log_norm(self) -> float:
        return self.params.log_alpha

    def log_inverse_norm(self) -> float:
        return -self.params.log_small_weight

    def to_matrix(self) -> np.ndarray:
        return to_matrix(self)

    def apply(self, x: np.ndarray) -> np.ndarray:
        return apply_power(self, x, 1)

    def apply_power(self, x: np.ndarray, m: int) -> np.ndarray:
        return apply_power(self, x, m)

    def resolvent_norm(self, lam: complex) -> float:
        return resolvent_norm(self, lam)

    def resolvent_log_bounds(self, lam: complex) -> tuple[float, float]:
        return resolvent_log_bounds(self, lam)

    def has_eigenvalue(self, lam: complex, tol: float = ROOT_TOL) -> bool:
        if lam == 0:
            return False
        return abs(_pow_minus_one(lam, self.params.n)) < root_tolerance(self.params.n, tol)

    def eigenvalue_moduli(self) -> tuple[float, ...]:
        return (1.0,)


def root_tolerance(n: int, tol: float = ROOT_TOL) -> float:
    """Cutoff on ``|lam**n - 1|`` for declaring ``lam`` an ``n``-th root of unity.

    A root stored in floating point has its angle rounded by about
    ``pi * eps``, which ``lam**n`` amplifies ``n`` times; that propagated
    error is added to ``tol`` as long as it stays negligible.
    """
    spread = 4.0 * n * _EPS
    return tol + spread if spread <= 1e-9 else tol


def make_block(params: BlockParams) -> ShiftBlock:
    if not isinstance(params, BlockParams):
        raise ParameterError("expected BlockParams")
    return ShiftBlock(params)


def shift_block(n: int, p: int, alpha: float) -> ShiftBlock:
    """Shorthand for ``make_block(BlockParams.of(n, p, alpha))``."""
    return make_block(BlockParams.of(n, p, alpha))


def _guard(b: ShiftBlock) -> int:
    n = b.params.n
    if n > MATRIX_LIMIT:
        raise ParameterError(f"dense matrix of dimension {n} exceeds {MATRIX_LIMIT}")
    return n


def to_matrix(b: ShiftBlock) -> np.ndarray:
    n = _guard(b)
    m = np.zeros((n, n), dtype=np.complex128)
    cols = np.arange(n)
    m[(cols + 1) % n, cols] = np.exp(b.log_beta)
    return m


def power_norm_log(b: ShiftBlock, j: int) -> float:
    """``log ||v**j|| = log(beta_1 ... beta_j)`` for ``0 <= j <= n-1``."""
    n, p = b.params.n, b.params.p
    if not 0 <= j <= n - 1:
        raise ParameterError(f"j={j} outside [0, {n - 1}]")
    if j <= p:
        return j * b.params.log_alpha
    return (n - j) * float(b.params.ratio) * b.params.log_alpha


def window_log(b: ShiftBlock, j: int) -> np.ndarray:
    """Log window products ``log(beta_k ... beta_{k+j-1})`` for every start ``k``.

    Entry ``k`` (0-based) is the log-coefficient of ``e_{k+j}`` in
    ``v**j e_k``.
    """
    n = b.params.n
    j %= n
    pre = b.log_prefix
    k = np.arange(n)
    return pre[(k + j) % n] - pre[k]


def block_power(b: ShiftBlock, m: int) -> np.ndarray:
    """Dense ``v**(m mod n)``; exactly the identity when ``n`` divides ``m``."""
    n = _guard(b)
    j = int(m) % n
    if j == 0:
        return np.eye(n, dtype=np.complex128)
    out = np.zeros((n, n), dtype=np.complex128)
    k = np.arange(n)
    out[(k + j) % n, k] = np.exp(window_log(b, j))
    return out


def apply_power(b: ShiftBlock, x, m: int) -> np.ndarray:
    """``v**m x`` in O(n), reducing ``m`` modulo ``n`` with exact integers."""
    x = np.asarray(x, dtype=np.complex128)
    n = b.params.n
    if x.shape != (n,):
        raise ParameterError(f"vector of length {x.shape} does not match block dimension {n}")
    j = int(m) % n
    if j == 0:
        return x.copy()
    return np.roll(np.exp(window_log(b, j)) * x, j)


def _pow_minus_one(lam: complex, n: int) -> complex:
    return pow_minus_one(complex(lam), n)


def log_abs_pow_minus_one(lam: complex, n: int) -> float:
    """``log |lam**n - 1|`` without overflow for any modulus."""
    x, y = power_phase(complex(lam), n)
    if x > 0.0:
        # |e^{x+iy} - 1| = e^x |e^{-x-iy} - 1|
        return x + _log_abs_expm1(-x, -y)
    return _log_abs_expm1(x, y)


def _log_abs_expm1(x: float, y: float) -> float:
    em1 = math.expm1(x)
    real = em1 * math.cos(y) - 2.0 * math.sin(0.5 * y) ** 2
    imag = math.exp(x) * math.sin(y)
    mod = math.hypot(real, imag)
    return math.log(mod) if mod > 0.0 else -math.inf


def psi_scaled(b: ShiftBlock, lam: complex) -> tuple[np.ndarray, float]:
    """``psi_lam(v) = exp(s) * M`` returned as ``(M, s)`` with ``max|M| = 1``.

    Assembled column block by column block from the shift structure:
    entry ``(i, k)`` with ``j = (i - k) mod n`` is
    ``lam**(n-1-j) * exp(L_k(j))``; log-magnitudes and phases are formed
    separately so no intermediate overflows.
    """
    lam = complex(lam)
    if lam == 0:
        raise ParameterError("psi undefined at zero")
    n = _guard(b)
    log_rho = math.log(abs(lam))
    theta = cmath.phase(lam)
    pre = b.log_prefix[:n]
    rows = np.arange(n)
    chunk = max(1, 1_000_000 // n)

    def exponents(cols):
        e = n - 1 - (rows[:, None] - cols[None, :]) % n
        return e * log_rho + pre[:, None] - pre[cols][None, :], e * theta

    s = -math.inf
    for start in range(0, n, chunk):
        logmag, _ = exponents(np.arange(start, min(n, start + chunk)))
        s = max(s, float(logmag.max()))
    out = np.empty((n, n), dtype=np.complex128)
    for start in range(0, n, chunk):
        cols = np.arange(start, min(n, start + chunk))
        logmag, phase = exponents(cols)
        out[:, cols] = np.exp((logmag - s) + 1j * phase)
    return out, s


def psi(b: ShiftBlock, lam: complex) -> np.ndarray:
    """Dense ``psi_lam(v) = lam**(n-1) * sum_j (v/lam)**j``.

    Raises ``OverflowError`` when the entries do not fit in double range;
    use :func:`psi_norm_log` or the bound functions instead.
    """
    m, s = psi_scaled(b, lam)
    if s > 700.0:
        raise OverflowError(f"psi entries reach exp({s:.1f}); use the log-domain path")
    return m * math.exp(s)


def psi_norm_log(b: ShiftBlock, lam: complex) -> float:
    """``log ||psi_lam(v)||`` through the scaled dense matrix."""
    m, s = psi_scaled(b, lam)
    if b.params.n <= SVD_LIMIT:
        sigma = op_norm(m)
    else:
        mh = m.conj().T
        sigma = op_norm_matfree(lambda x: m @ x, lambda y: mh @ y, m.shape[1])
    return s + math.log(sigma)


def resolvent_norm_log(b: ShiftBlock, lam: complex) -> float:
    """``log ||(v - lam)^{-1}||``; ``+inf`` on an ``n``-th root of unity."""
    lam = complex(lam)
    if lam == 0:
        # v^{-1} e_{j+1} = e_j / beta_j, so the norm is 1/min(beta)
        return b.log_inverse_norm()
    n = b.params.n
    if abs(_pow_minus_one(lam, n)) < root_tolerance(n):
        return math.inf
    return psi_norm_log(b, lam) - log_abs_pow_minus_one(lam, n)


def resolvent_norm(b: ShiftBlock, lam: complex) -> float:
    value = resolvent_norm_log(b, lam)
    return math.inf if value > 709.0 else math.exp(value)


# --- S sums ---------------------------------------------------------------


def log_geometric(slope: float, m: int) -> float:
    """``log sum_{i<m} exp(-|slope| i)`` (``m`` may be a huge integer)."""
    if m < 1:
        raise ValueError("empty geometric sum")
    s = abs(slope)
    if s == 0.0:
        return math.log(m)
    return math.log(-math.expm1(-s * m)) - math.log(-math.expm1(-s))


def _segment(e_first: float, e_last: float, slope: float, m: int) -> float:
    # log sum of exp(e_first + slope*i), i < m, anchored at the larger endpoint
    return max(e_first, e_last) + log_geometric(slope, m)


def _log_s(n: int, p: int, a: float, g: float, tau: float) -> float:
    q = n - p
    head = _segment((n - 1) * tau, (p - 1) * a + q * tau, a - tau, p)
    tail = _segment(g, p * a + (q - 1) * tau, g + tau, q)
    return float(np.logaddexp(head, tail))


def _log_s_reduced(n: int, p: int, a: float, g: float, tau: float) -> float:
    # log S - (n-1)*tau, with the anchor removed before any rounding
    q = n - p
    head = _segment(0.0, (p - 1) * (a - tau), a - tau, p)
    tail = _segment(g - (n - 1) * tau, p * (a - tau), g + tau, q)
    return float(np.logaddexp(head, tail))


def s_sum_log(b: ShiftBlock, squared: bool, t: float) -> float:
    """``log S(beta, t)`` or ``log S(beta**2, t)``.

    ``S(beta, t) = t**(n-1) * sum_{j<n} (beta_1...beta_j) / t**j``. The
    summand exponents are piecewise linear in ``j`` (one slope on
    ``j < p``, another on ``j >= p``) so each piece is a geometric series
    evaluated in closed form and the two are merged with ``logaddexp``.
    """
    if not t > 0.0:
        raise ParameterError("t must be positive")
    n, p = b.params.n, b.params.p
    a = b.params.log_alpha * (2.0 if squared else 1.0)
    g = float(b.params.ratio) * a
    return _log_s(n, p, a, g, math.log(t))


@dataclass(frozen=True)
class Bracket:
    """Comparison of ``S`` with the two-regime geometric quantity.

    ``log_ratio = log(S / comparison)``. The ratio always lies in
    ``[1/t, K/t]`` with ``x = alpha'/t`` and ``K = x/(x-1)`` (primes denote
    the squared substitution when requested); both ends are recorded.
    """

    log_comparison: float
    log_s: float
    log_ratio: float
    log_lower: float
    log_upper: float

    @property
    def within(self) -> bool:
        slack = 1e-9 * max(1.0, abs(self.log_s))
        return self.log_lower - slack <= self.log_ratio <= self.log_upper + slack


def s_sum_bracket(b: ShiftBlock, squared: bool, rho: float) -> Bracket:
    if not 0.0 < rho < 1.0:
        raise ParameterError("rho must lie in (0, 1)")
    n, p, q = b.params.n, b.params.p, b.params.q
    a = b.params.log_alpha * (2.0 if squared else 1.0)
    tau = math.log(rho) * (2.0 if squared else 1.0)
    g = float(b.params.ratio) * a
    # alpha^p rho^q sum_{j<q} (rho alpha^{p/q})^{-j}
    # last exponent p*a + q*tau - (q-1)*(g+tau) simplifies to g + tau
    log_cmp = _segment(p * a + q * tau, g + tau, g + tau, q)
    log_s = _log_s(n, p, a, g, tau)
    x_log = a - tau
    log_k = x_log - math.log(-math.expm1(-x_log))  # log(x/(x-1))
    return Bracket(
        log_comparison=log_cmp,
        log_s=log_s,
        log_ratio=log_s - log_cmp,
        log_lower=-tau,
        log_upper=log_k - tau,
    )


def resolvent_log_bounds(b: ShiftBlock, lam: complex) -> tuple[float, float]:
    """Lower and upper bounds on ``log ||(v - lam)^{-1}||`` depending on ``|lam|`` only.

    ``||psi e_1||**2 = S(beta**2, rho**2)`` gives the lower bound,
    ``||psi|| <= S(beta, rho)`` the upper bound, combined with
    ``|1 - rho**n| <= |1 - lam**n| <= 1 + rho**n``. For ``rho > 1`` the
    upper bound is the cruder ``sum (alpha/rho)**j`` form, which is
    uniform in the block once ``alpha < rho``.
    """
    lam = complex(lam)
    if lam == 0:
        v = b.log_inverse_norm()
        return v, v
    n = b.params.n
    rho = abs(lam)
    tau = math.log(rho)
    lower = 0.5 * s_sum_log(b, True, rho * rho)
    ntau = n * tau
    if ntau > 0.0:
        # S(beta**2, rho**2) ~ rho**(2n): drop that factor exactly
        a2 = 2.0 * b.params.log_alpha
        lower = (0.5 * _log_s_reduced(n, b.params.p, a2, float(b.params.ratio) * a2, 2.0 * tau)
                 - tau - math.log1p(math.exp(-ntau)))
        upper = (log_geometric_signed(b.params.log_alpha - tau, n)
                 - tau - math.log(-math.expm1(-ntau)))
    elif ntau < 0.0:
        lower -= math.log1p(math.exp(ntau))
        upper = s_sum_log(b, False, rho) - math.log(-math.expm1(ntau))
    else:
        lower -= math.log(2.0)
        upper = math.inf
    return lower, upper


def log_geometric_signed(slope: float, m: int) -> float:
    """``log sum_{i<m} exp(slope*i)`` for either sign of ``slope``."""
    return max(0.0, (m - 1) * slope) + log_geometric(slope, m)


def check_weight_inequality(b: ShiftBlock, tol: float = 1e-12) -> bool:
    """Every cyclic window product of length ``j`` is at most the prefix one."""
    n = b.params.n
    pre = b.log_prefix
    k = np.arange(n)
    for j in range(1, n):
        windows = pre[(k + j) % n] - pre[k]
        if np.any(windows > pre[j] + tol):
            return False
    return True
