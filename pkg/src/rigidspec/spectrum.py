"""Spectrum membership for block families and the annulus scan.

A point ``lam`` lies in the spectrum of a block-diagonal operator when it
is an eigenvalue of some block or when the block resolvent norms are
unbounded in ``k``. On a truncation only finitely many ``k`` are seen, so
every verdict rests on two things: magnitude of the per-block bounds and
the trend of their tail. ``Undetermined`` is a legitimate answer.

The per-block bounds used here depend on ``|lam|`` only (the angle enters
through the eigenvalue test), which is why the scan needs one generic
angle per radius.
"""

from __future__ import annotations

import cmath
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from enum import Enum
from typing import NamedTuple, Sequence

import numpy as np

from .block_operator import (
    BlockFamily,
    ScalarBlock,
    log_inverse_norm_profile,
    resolvent_bounds_profile,
)
from .shift_block import ROOT_TOL

__all__ = [
    "HypothesisError",
    "Kind",
    "Thresholds",
    "Trend",
    "tail_trend",
    "Evidence",
    "SpectrumVerdict",
    "ScanSample",
    "AnnulusEstimate",
    "GOLDEN_TURN",
    "theoretical_r",
    "classify",
    "annulus_scan",
    "unit_circle_contact",
    "inverse_spectrum_annulus",
    "roots_of_unity",
    "roots_of_unity_family",
    "identity_family",
]

GOLDEN_TURN = (math.sqrt(5.0) - 1.0) / 2.0


class HypothesisError(ValueError):
    """The family does not satisfy the hypotheses needed for the formula."""


class Kind(str, Enum):
    POINT = "PointSpectrum"
    IN_SPECTRUM = "InSpectrum"
    RESOLVENT = "Resolvent"
    UNDETERMINED = "Undetermined"

    @property
    def in_spectrum(self) -> bool:
        return self in (Kind.POINT, Kind.IN_SPECTRUM)


@dataclass(frozen=True)
class Thresholds:
    """Decision thresholds for :func:`classify`.

    ``divergence`` and ``bounded`` are resolvent-norm magnitudes.
    ``growth`` is the smallest mean log-increment per block that counts as
    geometric divergence, ``decay`` the largest per-block ratio of
    successive log-increments that still counts as convergence.
    """

    divergence: float = 1e6
    bounded: float = 1e4
    growth: float = 1e-3
    decay: float = 0.95
    tail_fraction: float = 0.25
    min_tail: int = 3
    root_tol: float = ROOT_TOL


class Trend(NamedTuple):
    kind: str  # "bounded", "diverging" or "unclear"
    slope: float  # mean log-increment over the tail
    ratio: float  # geometric mean ratio of successive increments
    extrapolated: float  # estimated sup of the whole sequence (log)


def tail_trend(values: Sequence[float], th: Thresholds = Thresholds()) -> Trend:
    """Judge boundedness of a log-profile from its last quarter.

    Nonincreasing tails are bounded. Increasing tails whose increments
    shrink geometrically (ratio below ``th.decay``) are bounded too, with
    the remaining growth summed as a geometric series. Increasing tails
    whose increments do not shrink and average at least ``th.growth``
    diverge.
    """
    vals = np.asarray(values, dtype=float)
    top = float(np.max(vals)) if vals.size else -math.inf
    if vals.size < 2 or np.any(np.isposinf(vals)):
        return Trend("diverging" if np.any(np.isposinf(vals)) else "unclear",
                     math.nan, math.nan, top)
    m = min(vals.size, max(th.min_tail, math.ceil(th.tail_fraction * vals.size)))
    tail = vals[-m:]
    d = np.diff(tail)
    tol = 1e-12 * max(1.0, float(np.max(np.abs(tail))))
    slope = float(d.mean())
    if np.all(d <= tol):
        return Trend("bounded", slope, 0.0, top)
    if np.all(d > tol):
        ratio = float((d[-1] / d[0]) ** (1.0 / (d.size - 1))) if d.size > 1 else 1.0
        if ratio < th.decay:
            rest = d[-1] * ratio / (1.0 - ratio)
            return Trend("bounded", slope, ratio, max(top, float(tail[-1] + rest)))
        if slope >= th.growth:
            return Trend("diverging", slope, ratio, math.inf)
        return Trend("unclear", slope, ratio, math.inf)
    if d[-1] <= tol:
        # rose, then settled
        return Trend("bounded", slope, math.nan, top)
    return Trend("unclear", slope, math.nan, math.inf)


@dataclass(frozen=True)
class Evidence:
    case: str
    max_lower: float = math.nan
    max_upper: float = math.nan
    lower_trend: Trend | None = None
    upper_trend: Trend | None = None
    k_hit: int | None = None


@dataclass(frozen=True)
class SpectrumVerdict:
    point: complex
    kind: Kind
    evidence: Evidence


def _decide(lam: complex, lower, upper, th: Thresholds, outside: str) -> SpectrumVerdict:
    lo_t = tail_trend(lower, th)
    hi_t = tail_trend(upper, th)
    max_lo = float(np.max(lower))
    max_hi = float(np.max(upper))
    if max_lo > math.log(th.divergence) or lo_t.kind == "diverging":
        kind, case = Kind.IN_SPECTRUM, "unbounded lower bound"
    elif (hi_t.kind == "bounded" and math.isfinite(max_hi)
          and hi_t.extrapolated < math.log(th.bounded)):
        kind, case = Kind.RESOLVENT, outside
    else:
        kind, case = Kind.UNDETERMINED, "inconclusive"
    return SpectrumVerdict(lam, kind, Evidence(case, max_lo, max_hi, lo_t, hi_t))


def classify(family: BlockFamily, lam: complex, thresholds: Thresholds | None = None) -> SpectrumVerdict:
    """Place ``lam`` in or out of the spectrum of the block operator.

    Order of tests: eigenvalue of some block (``PointSpectrum``); a lower
    bound on the resolvent that is large or growing without decay
    (``InSpectrum``); an upper bound that is small and has stopped growing
    (``Resolvent``). ``lam = 0`` is judged from the block inverse norms.
    """
    th = thresholds or Thresholds()
    lam = complex(lam)
    if lam == 0:
        prof = log_inverse_norm_profile(family)
        for k, v in enumerate(prof, start=1):
            if math.isinf(v):
                return SpectrumVerdict(lam, Kind.POINT, Evidence("singular block", k_hit=k))
        return _decide(lam, prof, prof, th, "bounded inverse")
    for k, block in enumerate(family.blocks(), start=1):
        if block.has_eigenvalue(lam, th.root_tol):
            return SpectrumVerdict(lam, Kind.POINT, Evidence("root of unity", k_hit=k))
    lower, upper = resolvent_bounds_profile(family, lam)
    outside = "outer geometric bound" if abs(lam) > 1.0 else "bounded upper bound"
    return _decide(lam, lower, upper, th, outside)


class ScanSample(NamedTuple):
    rho: float
    kind: Kind
    log_lower_sup: float
    log_upper_sup: float


@dataclass(frozen=True)
class AnnulusEstimate:
    r_inner: float
    r_outer: float
    grid_resolution: float
    samples: list = field(default_factory=list)
    warning: str | None = None

    def __post_init__(self):
        if not 0.0 <= self.r_inner <= self.r_outer:
            raise ValueError(f"need 0 <= r_inner <= r_outer, got {self.r_inner}, {self.r_outer}")

    def to_dict(self) -> dict:
        return {
            "r_inner": self.r_inner,
            "r_outer": self.r_outer,
            "grid_resolution": self.grid_resolution,
            "samples": [[s.rho, s.kind.value] for s in self.samples],
            "warning": self.warning,
        }


def _combine(verdicts: list[SpectrumVerdict]) -> Kind:
    kinds = [v.kind for v in verdicts]
    for k in (Kind.POINT, Kind.IN_SPECTRUM):
        if k in kinds:
            return k
    if all(k is Kind.RESOLVENT for k in kinds):
        return Kind.RESOLVENT
    return Kind.UNDETERMINED


def _scan_radius(family, rho, moduli, angular_samples, th) -> ScanSample:
    if rho == 0.0:
        v = classify(family, 0.0, th)
        return ScanSample(0.0, v.kind, v.evidence.max_lower, v.evidence.max_upper)
    if any(abs(m - rho) < th.root_tol for m in moduli):
        # the circle |z| = rho carries an eigenvalue of some block
        return ScanSample(rho, Kind.POINT, math.inf, math.inf)
    verdicts = []
    for i in range(1, angular_samples + 1):
        turn = math.fmod(i * GOLDEN_TURN, 1.0)
        verdicts.append(classify(family, cmath.rect(rho, 2 * math.pi * turn), th))
    lo = max(v.evidence.max_lower for v in verdicts)
    hi = max(v.evidence.max_upper for v in verdicts)
    return ScanSample(rho, _combine(verdicts), lo, hi)


def annulus_scan(family: BlockFamily, radial_grid: Sequence[float], angular_samples: int = 1,
                 thresholds: Thresholds | None = None, include_origin: bool = True,
                 threads: int = 1) -> AnnulusEstimate:
    """Classify circles ``|z| = rho`` over the grid and read off the annulus.

    ``r_inner`` is the midpoint between the last ``Resolvent`` radius
    below the first in-spectrum radius and that radius (the radius itself
    if nothing below is ``Resolvent``); ``r_outer`` symmetrically above
    the last in-spectrum radius. The origin is classified too unless
    ``include_origin`` is false.
    """
    th = thresholds or Thresholds()
    grid = sorted(float(r) for r in radial_grid)
    if not grid:
        raise ValueError("empty grid")
    if grid[0] <= 0.0:
        raise ValueError("grid radii must be positive")
    if angular_samples < 1:
        raise ValueError("angular_samples must be positive")
    resolution = float(np.max(np.diff(grid))) if len(grid) > 1 else grid[0]
    radii = ([0.0] if include_origin else []) + grid
    moduli = sorted({float(m) for b in family.blocks() for m in b.eigenvalue_moduli()})

    def work(rho):
        return _scan_radius(family, rho, moduli, angular_samples, th)

    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            samples = list(pool.map(work, radii))
    else:
        samples = [work(r) for r in radii]

    inside = [s.rho for s in samples if s.kind.in_spectrum]
    if not inside:
        raise ValueError("no spectrum detected on the grid")
    first, last = inside[0], inside[-1]
    below = [s.rho for s in samples if s.kind is Kind.RESOLVENT and s.rho < first]
    above = [s.rho for s in samples if s.kind is Kind.RESOLVENT and s.rho > last]
    r_inner = 0.5 * (below[-1] + first) if below else first
    r_outer = 0.5 * (above[0] + last) if above else last
    undetermined = sum(s.kind is Kind.UNDETERMINED for s in samples)
    warning = None
    if 2 * undetermined > len(samples):
        warning = f"{undetermined} of {len(samples)} radii undetermined"
    return AnnulusEstimate(min(r_inner, 1.0), r_outer, resolution, samples, warning)


def unit_circle_contact(e: AnnulusEstimate) -> bool:
    """The estimated annulus reaches the unit circle (within two grid steps)."""
    return abs(e.r_outer - 1.0) <= 2.0 * e.grid_resolution


def inverse_spectrum_annulus(e: AnnulusEstimate) -> tuple[float, float]:
    """Radii of the annulus ``1/r_outer <= |z| <= 1/r_inner`` of the inverse operator."""
    if e.r_inner == 0.0:
        raise ValueError("operator not invertible")
    return 1.0 / e.r_outer, 1.0 / e.r_inner


def theoretical_r(family: BlockFamily, k_analytic: int = 30, tol: float = 1e-4,
                  max_iter: int = 40, alpha_tol: float = 0.05) -> float:
    """Sup of ``s`` in ``[0, 1]`` with ``alpha(k)**p(k) * s**(n(k)-p(k))`` bounded.

    Bisection on ``s``; boundedness of the log-sequence over
    ``2 <= k <= k_analytic`` is judged by a nonincreasing last quarter.
    """
    if family.params_of is None:
        raise HypothesisError("family has no shift-block parameters")
    params = [family.params_of(k) for k in range(2, k_analytic + 1)]
    m = max(3, math.ceil(0.25 * len(params)))
    tail = params[-m:]
    if not all(b.n > a.n for a, b in zip(tail, tail[1:])):
        raise HypothesisError("block sizes n(k) must be unbounded (tail not increasing)")
    la = [q.log_alpha for q in tail]
    if any(b > a for a, b in zip(la, la[1:])) or la[-1] > alpha_tol:
        raise HypothesisError("alpha(k) must tend to 1")
    pa = np.array([q.p * q.log_alpha for q in params])
    qs = np.array([float(q.q) for q in params])

    def bounded(s: float) -> bool:
        if s == 0.0:
            return True
        seq = pa + qs * math.log(s)
        t = seq[-m:]
        return bool(np.all(np.diff(t) <= 1e-12 * max(1.0, float(np.max(np.abs(t))))))

    if bounded(1.0):
        return 1.0
    lo, hi = 0.0, 1.0
    for _ in range(max_iter):
        if hi - lo <= tol:
            break
        mid = 0.5 * (lo + hi)
        if bounded(mid):
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


# --- reference families ----------------------------------------------------


def roots_of_unity(count: int) -> list[complex]:
    """The first ``count`` roots of unity: denominators increasing, numerators coprime.

    Starts with 1 (denominator 1), then -1, then the primitive cube roots, ...
    """
    out: list[complex] = []
    d = 1
    while len(out) < count:
        for a in range(d):
            if math.gcd(a, d) == 1:
                out.append(cmath.exp(2j * math.pi * a / d))
                if len(out) == count:
                    break
        d += 1
    return out


def roots_of_unity_family(count: int) -> BlockFamily:
    """Diagonal operator whose entries enumerate the roots of unity (``count`` blocks).

    Block 1 is the root 1, i.e. the identity on C, as in every family here.
    """
    roots = roots_of_unity(count)
    blocks = [ScalarBlock(z) for z in roots[1:]]
    return BlockFamily.from_blocks(blocks, norm_bound=1.0, label=f"roots of unity ({count})",
                                   metadata={"r": 1.0})


def identity_family(k_max: int) -> BlockFamily:
    return BlockFamily(block_of=lambda k: ScalarBlock(1.0), k_max=k_max, norm_bound=1.0,
                       label="identity")
