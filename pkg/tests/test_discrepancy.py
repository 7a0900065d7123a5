import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from ppclab.discrepancy import (
    brute_disc,
    default_ket_constant,
    extreme_disc_1d,
    ket_bound,
    low_disc_scaling,
    star_disc_1d,
)
from ppclab.geometry import TorusPointSet, UsageError
from ppclab.sequences import parse_spec

from oracles import disc_1d_loop


def one_d(values):
    return TorusPointSet(np.asarray(values, dtype=float)[:, None])


@pytest.mark.parametrize("N", [1, 2, 5, 17])
def test_left_endpoint_grid(N):
    p = one_d(np.arange(N) / N)
    assert star_disc_1d(p).value == pytest.approx(1 / N, abs=1e-15)
    assert extreme_disc_1d(p).value == pytest.approx(1 / N, abs=1e-15)


def test_single_point_at_zero():
    assert star_disc_1d(one_d([0.0])).value == 1.0


def test_random_instances_against_loop_oracle():
    rng = np.random.default_rng(11)
    for _ in range(40):
        N = int(rng.integers(1, 30))
        x = rng.random(N)
        if rng.random() < 0.4:
            x = np.floor(x * 8) / 8
        p = one_d(x)
        assert star_disc_1d(p).value == pytest.approx(disc_1d_loop(x, True), abs=1e-12)
        assert extreme_disc_1d(p).value == pytest.approx(disc_1d_loop(x, False), abs=1e-12)
        assert brute_disc(p, anchored=True).value == pytest.approx(disc_1d_loop(x, True), abs=1e-12)
        assert brute_disc(p, anchored=False).value == pytest.approx(disc_1d_loop(x, False), abs=1e-12)


@settings(max_examples=80, deadline=None)
@given(st.lists(st.floats(0, 1, exclude_max=True), min_size=1, max_size=80))
def test_star_extreme_sandwich(xs):
    p = one_d(xs)
    star, ext = star_disc_1d(p).value, extreme_disc_1d(p).value
    assert star <= ext + 1e-12
    assert ext <= 2 * star + 1e-12
    assert 0 <= star <= 1 and 0 <= ext <= 1
    assert ext >= 1 / len(xs) - 1e-15


def test_brute_2d_four_point_grid():
    c = np.array([[i / 2 + 0.25, j / 2 + 0.25] for i in range(2) for j in range(2)])
    p = TorusPointSet(c)
    # box [0, 3/4) x [0, 3/4) holds all four points but has area 9/16
    assert brute_disc(p, anchored=True).value == pytest.approx(7 / 16, abs=1e-15)
    assert brute_disc(p, anchored=False).value == pytest.approx(0.75, abs=1e-15)


def test_brute_2d_by_box_sampling():
    # brute force is a supremum: no sampled half-open box can beat it
    rng = np.random.default_rng(4)
    x = rng.random((30, 2))
    p = TorusPointSet(x)
    best = brute_disc(p).value
    cuts = np.concatenate([[0.0, 1.0], x[:, 0], x[:, 0] + 1e-12])
    cuts_y = np.concatenate([[0.0, 1.0], x[:, 1], x[:, 1] + 1e-12])
    seen = 0.0
    for a in rng.choice(cuts, 40):
        for b in rng.choice(cuts, 40):
            if b <= a:
                continue
            for c0 in rng.choice(cuts_y, 10):
                for d0 in rng.choice(cuts_y, 10):
                    if d0 <= c0:
                        continue
                    inside = np.all((x >= [a, c0]) & (x < [b, d0]), axis=1).mean()
                    seen = max(seen, abs(inside - (b - a) * (d0 - c0)))
    assert seen <= best + 1e-9
    assert best - seen < 0.1


def test_brute_lower_bound():
    rng = np.random.default_rng(8)
    for N in (1, 7, 40):
        assert brute_disc(TorusPointSet(rng.random((N, 2)))).value >= 1 / N - 1e-15


def test_brute_guards():
    with pytest.raises(UsageError):
        brute_disc(TorusPointSet(np.random.default_rng(0).random((501, 1))))
    with pytest.raises(UsageError):
        brute_disc(TorusPointSet(np.random.default_rng(0).random((10, 3))))
    with pytest.raises(UsageError):
        brute_disc(TorusPointSet(np.random.default_rng(0).random((101, 2))), anchored=False)
    brute_disc(TorusPointSet(np.random.default_rng(0).random((500, 2))), anchored=True)


def test_exact_formula_dimension_error():
    with pytest.raises(UsageError):
        star_disc_1d(TorusPointSet(np.zeros((3, 2))))


def test_ket_equispaced():
    N = 64
    res = ket_bound(one_d(np.arange(N) / N), 10)
    assert res.value == pytest.approx(4.0 / 10, abs=1e-12)
    assert (res.m, res.C_d) == (10, 4.0)


def test_ket_dominates_exact_1d():
    rng = np.random.default_rng(9)
    for _ in range(30):
        x = rng.random(int(rng.integers(2, 200)))
        p = one_d(x)
        for m in (1, 4, 16):
            assert ket_bound(p, m).value >= extreme_disc_1d(p).value


def test_ket_dominates_brute_2d():
    rng = np.random.default_rng(10)
    for _ in range(5):
        p = TorusPointSet(rng.random((int(rng.integers(5, 60)), 2)))
        assert ket_bound(p, 8).value >= brute_disc(p).value


def test_ket_constants():
    assert default_ket_constant(1) == 4.0
    assert default_ket_constant(3) == 36.0
    with pytest.raises(UsageError):
        ket_bound(one_d([0.1]), 0)


def test_ket_sweep_golden_decreases_then_levels():
    from ppclab.sequences import generate

    p = generate(parse_spec("kronecker:golden"), 2000)
    vals = [ket_bound(p, m).value for m in (1, 2, 4, 8, 16, 32, 64)]
    assert vals[0] > vals[3]
    assert max(vals[4:]) / min(vals[4:]) < 3


def test_low_disc_scaling_vdc_bounded():
    ladder = [2**k for k in range(1, 17)]
    out = low_disc_scaling(parse_spec("vdc:2"), ladder)
    assert [n for n, _ in out] == ladder
    assert max(v for _, v in out) <= 3


def test_low_disc_scaling_iid_grows():
    out = low_disc_scaling(parse_spec("iid:d=1:seed=3"), [100, 10**4, 10**5])
    assert out[-1][1] > 3 * out[0][1]


def test_low_disc_scaling_modes():
    small = low_disc_scaling(parse_spec("halton:2,3"), [10, 50])
    assert len(small) == 2
    ket = low_disc_scaling(parse_spec("halton:2,3"), [1000], mode="ket", m=8)
    assert ket[0][1] > 0
    with pytest.raises(UsageError):
        low_disc_scaling(parse_spec("vdc:2"), [10], mode="bogus")
