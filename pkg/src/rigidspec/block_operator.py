"""Block-diagonal operators ``u = (u_k)`` on l2, studied through truncations.

A :class:`BlockFamily` knows how to produce block ``k`` for every
``k >= 2``; block 1 is always the identity on C. Every numerical judgment
takes the truncation horizon ``k_max`` from the family explicitly.
Analytic facts about the untruncated operator travel as data
(``norm_bound``, ``metadata``) and are never inferred here.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Iterator, Sequence

import numpy as np
from scipy.linalg import block_diag

from .numerics import (
    NumericsError,
    SingularMatrixError,
    as_matrix,
    complex_power,
    eigenvalues,
    inverse,
    op_norm,
)
from .shift_block import ROOT_TOL, BlockParams, ShiftBlock, make_block

__all__ = [
    "DimensionError",
    "ScalarBlock",
    "DenseBlock",
    "BlockFamily",
    "BlockVector",
    "family_norm",
    "family_inverse_norm",
    "log_inverse_norm_profile",
    "resolvent_profile",
    "resolvent_bounds_profile",
    "apply",
    "apply_power",
    "assemble",
]


class DimensionError(ValueError):
    """A vector segment does not match its block."""


@dataclass(frozen=True)
class ScalarBlock:
    """A 1x1 block ``z -> value*z``."""

    value: complex

    dim = 1

    def log_norm(self) -> float:
        return math.log(abs(self.value)) if self.value != 0 else -math.inf

    def log_inverse_norm(self) -> float:
        return -math.log(abs(self.value)) if self.value != 0 else math.inf

    def to_matrix(self) -> np.ndarray:
        return np.array([[complex(self.value)]])

    def apply(self, x):
        return complex(self.value) * np.asarray(x, dtype=np.complex128)

    def apply_power(self, x, m: int):
        return complex_power(complex(self.value), int(m)) * np.asarray(x, dtype=np.complex128)

    def resolvent_norm(self, lam: complex) -> float:
        d = abs(complex(self.value) - lam)
        return math.inf if d == 0 else 1.0 / d

    def resolvent_log_bounds(self, lam: complex) -> tuple[float, float]:
        # exact value below; the modulus-only bound 1/||d| - rho| above
        d = abs(complex(self.value) - lam)
        lower = math.inf if d == 0 else -math.log(d)
        gap = abs(abs(self.value) - abs(lam))
        upper = math.inf if gap == 0 else -math.log(gap)
        return lower, upper

    def has_eigenvalue(self, lam: complex, tol: float = ROOT_TOL) -> bool:
        return abs(complex(self.value) - lam) < tol

    def eigenvalue_moduli(self) -> tuple[float, ...]:
        return (abs(self.value),)


@dataclass(frozen=True, eq=False)
class DenseBlock:
    """An explicit square matrix block (used for oracles and generic tests)."""

    matrix: np.ndarray

    def __post_init__(self):
        m = as_matrix(self.matrix)
        if m.shape[0] != m.shape[1]:
            raise NumericsError("blocks must be square")
        object.__setattr__(self, "matrix", m)

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]

    def log_norm(self) -> float:
        s = op_norm(self.matrix)
        return math.log(s) if s > 0 else -math.inf

    def log_inverse_norm(self) -> float:
        try:
            return math.log(op_norm(inverse(self.matrix)))
        except SingularMatrixError:
            return math.inf

    def to_matrix(self) -> np.ndarray:
        return np.array(self.matrix)

    def apply(self, x):
        return self.matrix @ np.asarray(x, dtype=np.complex128)

    def apply_power(self, x, m: int):
        return np.linalg.matrix_power(self.matrix, int(m)) @ np.asarray(x, dtype=np.complex128)

    def resolvent_norm(self, lam: complex) -> float:
        try:
            return op_norm(inverse(self.matrix - lam * np.eye(self.dim)))
        except SingularMatrixError:
            return math.inf

    def resolvent_log_bounds(self, lam: complex) -> tuple[float, float]:
        v = self.resolvent_norm(lam)
        v = math.log(v) if v > 0 else -math.inf
        return v, v

    def has_eigenvalue(self, lam: complex, tol: float = ROOT_TOL) -> bool:
        return bool(np.any(np.abs(eigenvalues(self.matrix) - lam) < tol))

    def eigenvalue_moduli(self) -> tuple[float, ...]:
        return tuple(np.abs(eigenvalues(self.matrix)))


Block = ShiftBlock | ScalarBlock | DenseBlock
IDENTITY = ScalarBlock(1.0)


@dataclass(frozen=True)
class BlockFamily:
    """``k -> u_k`` for ``2 <= k <= k_max`` plus ``u_1 = id`` on C.

    ``block_of`` returns the block for ``k >= 2``; ``params_of`` is set
    when every such block is a shift block. ``norm_bound`` is an analytic
    bound on ``sup_k ||u_k||`` over all ``k``, not only the truncation.
    """

    block_of: Callable[[int], Block]
    k_max: int
    params_of: Callable[[int], BlockParams] | None = None
    norm_bound: float | None = None
    label: str = ""
    metadata: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.k_max < 1:
            raise ValueError("k_max must be positive")

    @classmethod
    def from_params(cls, params_of: Callable[[int], BlockParams], k_max: int,
                    **kwargs) -> "BlockFamily":
        return cls(block_of=lambda k: make_block(params_of(k)), k_max=k_max,
                   params_of=params_of, **kwargs)

    @classmethod
    def from_blocks(cls, blocks: Sequence[Block], **kwargs) -> "BlockFamily":
        """Blocks for ``k = 2, 3, ...`` given explicitly."""
        blocks = tuple(blocks)
        return cls(block_of=lambda k: blocks[k - 2], k_max=len(blocks) + 1, **kwargs)

    def block(self, k: int) -> Block:
        if not 1 <= k <= self.k_max:
            raise IndexError(f"block {k} outside 1..{self.k_max}")
        if k == 1:
            return IDENTITY
        return self.block_of(k)

    def blocks(self) -> Iterator[Block]:
        for k in range(1, self.k_max + 1):
            yield self.block(k)

    def dims(self) -> list[int]:
        return [b.dim for b in self.blocks()]

    def truncate(self, k_max: int) -> "BlockFamily":
        return BlockFamily(self.block_of, k_max, self.params_of, self.norm_bound,
                           self.label, dict(self.metadata))


@dataclass(frozen=True)
class BlockVector:
    """Segments ``y_k`` of a vector of l2; segment 1 has length 1."""

    segments: tuple

    def __init__(self, segments):
        segs = tuple(np.asarray(s, dtype=np.complex128).reshape(-1) for s in segments)
        object.__setattr__(self, "segments", segs)

    @classmethod
    def zeros(cls, family: BlockFamily) -> "BlockVector":
        return cls(np.zeros(d, dtype=np.complex128) for d in family.dims())

    @classmethod
    def first_coordinates(cls, family: BlockFamily, coefficients: Sequence[complex]) -> "BlockVector":
        """``y_k = c_k e_1`` in block ``k``."""
        segs = []
        for b, c in zip(family.blocks(), coefficients, strict=True):
            s = np.zeros(b.dim, dtype=np.complex128)
            s[0] = c
            segs.append(s)
        return cls(segs)

    def segment_norms_squared(self) -> list[float]:
        return [float(np.vdot(s, s).real) for s in self.segments]

    def norm(self) -> float:
        return math.sqrt(sum(self.segment_norms_squared()))

    def __sub__(self, other: "BlockVector") -> "BlockVector":
        return BlockVector(a - b for a, b in zip(self.segments, other.segments, strict=True))


def _check(family: BlockFamily, y: BlockVector) -> None:
    if len(y.segments) != family.k_max:
        raise DimensionError(f"vector has {len(y.segments)} segments, family has {family.k_max} blocks")
    for k, (b, s) in enumerate(zip(family.blocks(), y.segments), start=1):
        if s.shape[0] != b.dim:
            raise DimensionError(f"segment {k} has length {s.shape[0]}, block {k} has dimension {b.dim}")


def family_norm(family: BlockFamily) -> float:
    """``max_k ||u_k||`` over the truncation."""
    return math.exp(max(b.log_norm() for b in family.blocks()))


def log_inverse_norm_profile(family: BlockFamily) -> list[float]:
    return [b.log_inverse_norm() for b in family.blocks()]


def family_inverse_norm(family: BlockFamily) -> float:
    """``max_k ||u_k^{-1}||`` over the truncation; ``inf`` if a block is singular."""
    top = max(log_inverse_norm_profile(family))
    return math.inf if top > 709.0 else math.exp(top)


def resolvent_profile(family: BlockFamily, lam: complex) -> list[float]:
    """Per-block resolvent norms ``||(u_k - lam)^{-1}||``, ``k = 1..k_max``.

    Dense evaluation; boundedness is left to the caller.
    """
    return [b.resolvent_norm(complex(lam)) for b in family.blocks()]


def resolvent_bounds_profile(family: BlockFamily, lam: complex) -> tuple[list[float], list[float]]:
    """Per-block ``(lower, upper)`` bounds on ``log ||(u_k - lam)^{-1}||``.

    Formula path only: usable at horizons where blocks cannot be built.
    """
    lo, hi = [], []
    for b in family.blocks():
        a, c = b.resolvent_log_bounds(complex(lam))
        lo.append(a)
        hi.append(c)
    return lo, hi


def apply(family: BlockFamily, y: BlockVector) -> BlockVector:
    _check(family, y)
    return BlockVector(b.apply(s) for b, s in zip(family.blocks(), y.segments))


def apply_power(family: BlockFamily, m: int, y: BlockVector) -> BlockVector:
    """``u**m y`` block by block; segments with ``n(k) | m`` are returned unchanged."""
    _check(family, y)
    m = int(m)
    if m < 0:
        raise ValueError("exponent must be nonnegative")
    out = []
    for b, s in zip(family.blocks(), y.segments):
        if m == 0 or (isinstance(b, ShiftBlock) and m % b.n == 0):
            out.append(s.copy())
        else:
            out.append(b.apply_power(s, m))
    return BlockVector(out)


def assemble(family: BlockFamily) -> np.ndarray:
    """Dense block-diagonal matrix of the truncation (oracle use only)."""
    return block_diag(*[b.to_matrix() for b in family.blocks()])
