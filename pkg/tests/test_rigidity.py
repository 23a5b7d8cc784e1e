import cmath
import math

import numpy as np
import pytest

from rigidspec.block_operator import BlockVector
from rigidspec.rigidity import (
    cmp_is_rigid,
    default_test_vector,
    find_rigidity_sequence,
    rigidity_deficit,
    spectral_radius_bound,
    theorem_family,
    theorem_params,
    uniform_rigidity_box,
)


def test_theorem_params_examples():
    p = theorem_params(0.5, 3)
    assert (p.n, p.p) == (6, 3)
    assert p.alpha == pytest.approx(1 + math.log(2) / 2)
    q = theorem_params(0.0, 4)
    assert (q.n, q.p) == (24, 23)
    assert q.alpha == pytest.approx(1 + 1 / 6)
    assert theorem_params(0.5, 2).p == 1  # max(2! - 2, 1)


def test_theorem_family_checks():
    f = theorem_family(0.5, 7)
    assert f.metadata["rigidity_constant"] == pytest.approx(math.log(2))
    for k in range(2, 8):
        p = f.params_of(k)
        assert math.factorial(k - 1) <= p.p < math.factorial(k)
    assert f.norm_bound == pytest.approx(theorem_params(0.5, 2).alpha)
    with pytest.raises(ValueError):
        theorem_family(1.0, 5)
    with pytest.raises(ValueError):
        theorem_family(-0.1, 5)


def test_theorem_family_alpha_never_rounds_to_one():
    f = theorem_family(0.5, 30)
    assert f.params_of(30).log_alpha > 0


def test_deficit_zero_on_low_blocks():
    f = theorem_family(0.5, 7)
    segs = [np.zeros(d, dtype=complex) for d in f.dims()]
    segs[1][0] = 1.0
    segs[2][3] = 2.0
    rep = rigidity_deficit(f, BlockVector(segs), 3)
    assert rep.deficit == 0.0 and rep.tail_mass == 0.0


def test_deficit_bound_for_ell_three():
    f = theorem_family(0.5, 7)
    rep = rigidity_deficit(f, default_test_vector(f), 3)
    tail = sum(1 / k**2 for k in range(4, 8))
    assert rep.tail_mass == pytest.approx(tail)
    assert rep.analytic_bound == pytest.approx(4 * theorem_params(0.5, 4).alpha ** 12 * tail, rel=1e-10)
    assert rep.deficit**2 <= rep.analytic_bound


@pytest.mark.parametrize("r", [0.0, 0.5])
def test_deficits_decrease(r):
    f = theorem_family(r, 7)
    y = default_test_vector(f)
    reps = [rigidity_deficit(f, y, ell) for ell in range(2, 8)]
    d = [rep.deficit for rep in reps]
    assert all(b < a for a, b in zip(d, d[1:]))
    assert all(rep.bound_holds for rep in reps)
    assert reps[-1].saturated and reps[-1].deficit == 0.0


def test_cmp_examples():
    assert cmp_is_rigid(np.diag([cmath.exp(1j * math.pi / 3), cmath.exp(1j * math.sqrt(2))]))
    v = cmp_is_rigid([[1, 1], [0, 1]])
    assert not v and "diagonalizable" in v.diagnosis
    v = cmp_is_rigid(np.diag([0.9]))
    assert not v and "circle" in v.diagnosis
    with pytest.raises(ValueError):
        cmp_is_rigid(np.eye(65))


def test_rigidity_sequence_examples():
    roots = [cmath.exp(2j * math.pi * a / 5) for a in range(5)]
    assert find_rigidity_sequence(roots, 1e-9, 40).hits == [5, 10, 15, 20, 25, 30, 35, 40]
    golden = [cmath.exp(2j * math.pi * (math.sqrt(5) - 1) / 2)]
    assert find_rigidity_sequence(golden, 0.1, 1000).hits
    mixed = [cmath.exp(1j * math.pi / 2), cmath.exp(1j * math.pi / 3)]
    seq = find_rigidity_sequence(mixed, 1e-9, 100)
    assert seq.hits == list(range(12, 101, 12)) and seq.limit_reached
    assert find_rigidity_sequence(mixed, 1e-9, 100, max_hits=2).hits == [12, 24]


def test_rigidity_sequence_rejects_off_circle():
    with pytest.raises(ValueError):
        find_rigidity_sequence([0.5], 0.1, 10)
    with pytest.raises(ValueError):
        find_rigidity_sequence([1.0], 0.0, 10)


def test_uniform_box_examples():
    assert uniform_rigidity_box(np.diag([cmath.exp(0.01j)]), 1) == (True, True)
    assert uniform_rigidity_box(np.diag([1.6]), 1) == (False, True)
    rng = np.random.default_rng(5)
    for _ in range(20):
        q, _ = np.linalg.qr(rng.standard_normal((4, 4)) + 1j * rng.standard_normal((4, 4)))
        assert uniform_rigidity_box(q, 10).passed


def test_spectral_radius_examples():
    c = spectral_radius_bound(np.diag([0.5, 1.0]), [1, 2, 6])
    assert c.passed and c.bound == pytest.approx(1.0) and c.radius == pytest.approx(1.0)
    u = np.diag([cmath.exp(0.3j), cmath.exp(1.1j)])
    c = spectral_radius_bound(u, [math.factorial(i) for i in range(1, 8)])
    assert c.passed and c.bound == pytest.approx(1.0, abs=1e-12)
    c = spectral_radius_bound(np.diag([1.1]), list(range(1, 11)))
    assert c.passed and c.bound == pytest.approx(1.1) and c.log_m == pytest.approx(10 * math.log(1.1))
    with pytest.raises(ValueError):
        spectral_radius_bound(np.eye(2), [3, 2])
