"""Spectra and rigidity of block-diagonal operators built from weighted cyclic shifts."""

from .block_operator import BlockFamily, BlockVector, DenseBlock, ScalarBlock
from .rigidity import (
    cmp_is_rigid,
    find_rigidity_sequence,
    rigidity_deficit,
    spectral_radius_bound,
    theorem_family,
    uniform_rigidity_box,
)
from .shift_block import BlockParams, ShiftBlock, make_block
from .spectrum import (
    AnnulusEstimate,
    Kind,
    SpectrumVerdict,
    annulus_scan,
    classify,
    inverse_spectrum_annulus,
    roots_of_unity_family,
    theoretical_r,
    unit_circle_contact,
)

__version__ = "0.1.0"

__all__ = [
    "BlockFamily", "BlockVector", "DenseBlock", "ScalarBlock",
    "BlockParams", "ShiftBlock", "make_block",
    "AnnulusEstimate", "Kind", "SpectrumVerdict", "annulus_scan", "classify",
    "inverse_spectrum_annulus", "roots_of_unity_family", "theoretical_r", "unit_circle_contact",
    "cmp_is_rigid", "find_rigidity_sequence", "rigidity_deficit", "spectral_radius_bound",
    "theorem_family", "uniform_rigidity_box",
]
