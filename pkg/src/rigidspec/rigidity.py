"""Rigidity checks: factorial sequences on block families, and the
finite-dimensional rigidity criteria and power bounds on plain matrices.
"""

from __future__ import annotations

import math
from math import factorial
from typing import NamedTuple, Sequence

import numpy as np

from .block_operator import BlockFamily, BlockVector, apply_power
from .numerics import as_matrix, eigenvalues, log_power_norm, op_norm
from .shift_block import BlockParams

__all__ = [
    "theorem_params",
    "theorem_family",
    "RigidityReport",
    "rigidity_deficit",
    "default_test_vector",
    "CmpVerdict",
    "cmp_is_rigid",
    "RigiditySequence",
    "find_rigidity_sequence",
    "BoxCheck",
    "uniform_rigidity_box",
    "RadiusCheck",
    "spectral_radius_bound",
]


def theorem_params(r: float, k: int) -> BlockParams:
    """Parameters of block ``k >= 2`` of the annulus family with inner radius ``r``.

    ``n = k!`` and
    ``(p, alpha) = (max(k!-k, 1), 1 + log(1/r)/(k-1)!)`` for ``0 < r < 1``,
    ``(k!-1, 1 + 1/(k-1)!)`` for ``r = 0``.
    """
    if not 0.0 <= r < 1.0:
        raise ValueError(f"r must lie in [0, 1), got {r}")
    if k < 2:
        raise ValueError("blocks start at k = 2")
    n = factorial(k)
    if r == 0.0:
        return BlockParams(n, n - 1, math.log1p(1.0 / factorial(k - 1)))
    return BlockParams(n, max(n - k, 1), math.log1p(math.log(1.0 / r) / factorial(k - 1)))


def theorem_family(r: float, k_max: int) -> BlockFamily:
    """The rigid block-diagonal family whose spectrum is ``{r <= |z| <= 1}``.

    Construction-time checks: ``(k-1)! <= p(k) < k!``, ``alpha`` strictly
    decreasing, and ``(alpha(k+1) - 1) * k!`` bounded by the family
    constant (``log(1/r)``, or 1 when ``r = 0``), which is kept in the
    metadata as ``rigidity_constant``.
    """
    if not 0.0 <= r < 1.0:
        raise ValueError(f"r must lie in [0, 1), got {r}; use roots_of_unity_family for r = 1")
    if k_max < 1:
        raise ValueError("k_max must be positive")
    const = 1.0 if r == 0.0 else math.log(1.0 / r)
    prev = math.inf
    for k in range(2, k_max + 2):
        params = theorem_params(r, k)
        assert factorial(k - 1) <= params.p < factorial(k), k
        assert params.log_alpha < prev, k
        # log1p(x) <= x, so this is alpha(k) - 1 <= const/(k-1)! in log form
        assert params.log_alpha * factorial(k - 1) <= const * (1 + 1e-12), k
        prev = params.log_alpha
    return BlockFamily.from_params(
        lambda k: theorem_params(r, k),
        k_max,
        norm_bound=theorem_params(r, 2).alpha,
        label=f"annulus r={r:g}",
        metadata={"r": r, "rigidity_constant": const},
    )


class RigidityReport(NamedTuple):
    ell: int
    deficit: float
    analytic_bound: float
    tail_mass: float
    saturated: bool

    @property
    def bound_holds(self) -> bool:
        return self.deficit**2 <= self.analytic_bound * (1 + 1e-6) + 1e-300


def default_test_vector(family: BlockFamily) -> BlockVector:
    """``y_k = e_1 / k`` in every block."""
    return BlockVector.first_coordinates(family, [1.0 / k for k in range(1, family.k_max + 1)])


def rigidity_deficit(family: BlockFamily, y: BlockVector, ell: int) -> RigidityReport:
    """``||u**(ell!) y - y||`` with the upper bound ``4 alpha(ell+1)**(2 ell!) * tail``.

    ``tail`` is the mass of ``y`` on blocks ``k >= ell+1``; blocks
    ``k <= ell`` return exactly unchanged because ``k!`` divides ``ell!``.
    """
    if ell < 1:
        raise ValueError("ell must be at least 1")
    if family.params_of is None:
        raise ValueError("rigidity bound needs a shift-block family")
    m = factorial(ell)
    moved = apply_power(family, m, y)
    deficit = (moved - y).norm()
    masses = y.segment_norms_squared()
    tail_mass = sum(masses[ell:])
    saturated = ell >= family.k_max
    if tail_mass == 0.0:
        bound = 0.0
    else:
        log_bound = math.log(4.0) + 2 * m * family.params_of(ell + 1).log_alpha + math.log(tail_mass)
        bound = math.inf if log_bound > 709.0 else math.exp(log_bound)
    return RigidityReport(ell, deficit, bound, tail_mass, saturated)


# --- finite-dimensional criteria -------------------------------------------


class CmpVerdict(NamedTuple):
    rigid: bool
    diagnosis: str
    eigenvector_condition: float
    modulus_defect: float

    def __bool__(self) -> bool:
        return self.rigid


def cmp_is_rigid(m, tol: float = 1e-8) -> CmpVerdict:
    """Diagonalizable with every eigenvalue on the unit circle.

    Diagonalizability is judged by the condition number of the
    eigenvector matrix (threshold ``1/tol``), not by Jordan structure.
    """
    a = as_matrix(m)
    if a.shape[0] != a.shape[1] or a.shape[0] > 64:
        raise ValueError("expected a square matrix of size at most 64")
    w, v = np.linalg.eig(a)
    cond = float(np.linalg.cond(v))
    defect = float(np.max(np.abs(np.abs(w) - 1.0)))
    if not cond < 1.0 / tol:
        return CmpVerdict(False, f"not diagonalizable (eigenvector condition {cond:.3e})", cond, defect)
    if not defect < tol:
        return CmpVerdict(False, f"spectrum off the unit circle (max ||z|-1| = {defect:.3e})", cond, defect)
    return CmpVerdict(True, "diagonalizable with unimodular spectrum", cond, defect)


class RigiditySequence(NamedTuple):
    hits: list
    limit_reached: bool


def find_rigidity_sequence(eigs: Sequence[complex], epsilon: float, n_limit: int,
                           max_hits: int | None = None) -> RigiditySequence:
    """All ``n <= n_limit`` with ``max_i |z_i**n - 1| < epsilon`` (brute force).

    Works on the angles ``arg(z_i)/(2 pi)``; ``n * angle`` is reduced mod 1
    for every ``n`` directly, so no error accumulates along the scan.
    """
    z = np.asarray(eigs, dtype=np.complex128).reshape(-1)
    if z.size == 0:
        raise ValueError("no eigenvalues")
    if np.any(np.abs(np.abs(z) - 1.0) > 1e-9):
        raise ValueError("eigenvalues must be unimodular")
    if not epsilon > 0:
        raise ValueError("epsilon must be positive")
    turns = np.mod(np.angle(z) / (2 * np.pi), 1.0)
    hits: list[int] = []
    chunk = max(1, 1_000_000 // z.size)
    for start in range(1, n_limit + 1, chunk):
        ns = np.arange(start, min(n_limit, start + chunk - 1) + 1)
        frac = np.mod(ns[:, None] * turns[None, :], 1.0)
        dist = 2.0 * np.abs(np.sin(np.pi * frac)).max(axis=1)
        found = ns[dist < epsilon]
        hits.extend(int(n) for n in found)
        if max_hits is not None and len(hits) >= max_hits:
            return RigiditySequence(hits[:max_hits], False)
    return RigiditySequence(hits, True)


class BoxCheck(NamedTuple):
    hypothesis: bool
    passed: bool


def uniform_rigidity_box(m, n: int, tol: float = 1e-8) -> BoxCheck:
    """If ``||m**n - I|| <= 1/2`` then every eigenvalue lies in
    ``(1/2)**(1/n) <= |z| <= (3/2)**(1/n)``. A failed hypothesis passes vacuously.
    """
    a = as_matrix(m)
    if n < 1 or a.shape[0] > 64:
        raise ValueError("need n >= 1 and a matrix of size at most 64")
    power = np.linalg.matrix_power(a, n)
    if op_norm(power - np.eye(a.shape[0])) > 0.5:
        return BoxCheck(False, True)
    mod = np.abs(eigenvalues(a))
    ok = np.all(mod >= 0.5 ** (1.0 / n) - tol) and np.all(mod <= 1.5 ** (1.0 / n) + tol)
    return BoxCheck(True, bool(ok))


class RadiusCheck(NamedTuple):
    passed: bool
    radius: float
    bound: float
    log_m: float


def spectral_radius_bound(m, seq: Sequence[int]) -> RadiusCheck:
    """Spectral radius against ``min_k M**(1/n_k)`` with ``M = max_k ||m**n_k||``."""
    seq = [int(s) for s in seq]
    if not seq or any(b <= a for a, b in zip(seq, seq[1:])) or seq[0] < 1:
        raise ValueError("sequence must be nonempty, positive and increasing")
    log_m = max(log_power_norm(m, s) for s in seq)
    log_bound = min(log_m / s for s in seq)
    bound = math.exp(log_bound) if log_bound < 709.0 else math.inf
    radius = float(np.max(np.abs(eigenvalues(m))))
    return RadiusCheck(radius <= bound + 1e-8, radius, bound, log_m)
