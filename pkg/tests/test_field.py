import math

import numpy as np
import pytest

from hdual.errors import BadResolution, GridMismatch, NonLatticeShift, UnsupportedDimension
from hdual.field import (
    ConstantCoefficient,
    GaussianBumps,
    ScalarField,
    coefficient_from_dict,
    field_from_function,
    lattice_vector,
    lp_norm,
    make_coefficient,
    make_grid,
    read_field,
    shift,
    signed_power,
    write_field,
)


def test_grid_benchmark_spacing():
    g = make_grid(3, 8 * math.pi, 64)
    assert g.h == pytest.approx(math.pi / 4, rel=1e-15)
    assert g.frequency_spacing == pytest.approx(1 / 8, rel=1e-15)
    assert g.shape == (64, 64, 64)


def test_grid_four_dimensions():
    g = make_grid(4, 4 * math.pi, 32)
    assert g.shape == (32,) * 4
    assert g.frequency_spacing == pytest.approx(0.25)


@pytest.mark.parametrize("args", [(3, 8 * math.pi, 10), (3, 8 * math.pi, 8), (3, -1.0, 64), (3, math.inf, 64)])
def test_grid_rejects_bad_resolution(args):
    with pytest.raises(BadResolution):
        make_grid(*args)


def test_grid_rejects_dimension():
    with pytest.raises(UnsupportedDimension):
        make_grid(2, math.pi, 16)


def test_lp_norm_constant():
    g = make_grid(3, math.pi, 16)
    one = ScalarField(g, np.ones(g.shape))
    for r in (1.0, 2.0, 1.25, 5.0):
        assert lp_norm(one, r) == pytest.approx((2 * math.pi) ** (3 / r), rel=1e-13)


def test_lp_norm_half_indicator():
    g = make_grid(3, 2.0, 16)
    vals = np.zeros(g.shape)
    vals[:8] = 1.0
    assert lp_norm(ScalarField(g, vals), 3.0) == pytest.approx((0.5 * 4.0**3) ** (1 / 3), rel=1e-13)


def test_lp_norm_cosine_exact():
    g = make_grid(3, math.pi, 32)
    f = field_from_function(g, lambda x, y, z: np.cos(x) + 0 * y + 0 * z)
    assert lp_norm(f, 2.0) == pytest.approx(math.sqrt(4 * math.pi**3), rel=1e-12)


def test_lp_norm_rejects_small_exponent():
    g = make_grid(3, math.pi, 16)
    with pytest.raises(ValueError):
        lp_norm(ScalarField(g, np.ones(g.shape)), 0.5)


def test_scalar_field_rejects_nan_and_shape():
    g = make_grid(3, math.pi, 16)
    with pytest.raises(ValueError):
        ScalarField(g, np.full(g.shape, np.nan))
    with pytest.raises(GridMismatch):
        ScalarField(g, np.ones(10))


def test_shift_identities(rng):
    g = make_grid(3, math.pi, 16)
    f = ScalarField(g, rng.standard_normal(g.shape))
    assert np.array_equal(shift(f, (0, 0, 0)).values, f.values)
    assert np.array_equal(shift(f, (16, -16, 32)).values, f.values)
    s = shift(f, (3, -5, 1))
    for r in (1.0, 2.0, 1.25, 5.0):
        assert lp_norm(s, r) == lp_norm(f, r)


def test_shift_rejects_non_lattice():
    g = make_grid(3, math.pi, 16)
    f = ScalarField(g, np.ones(g.shape))
    with pytest.raises(NonLatticeShift):
        shift(f, (0.5, 0, 0))
    with pytest.raises(NonLatticeShift):
        shift(f, (1, 0))
    with pytest.raises(NonLatticeShift):
        lattice_vector(g, (0.3 * g.h, 0, 0))
    assert lattice_vector(g, (2 * g.h, -g.h, 0)) == (2, -1, 0)


def test_signed_power_examples(rng):
    g = make_grid(3, math.pi, 16)
    f = ScalarField(g, rng.standard_normal(g.shape))
    assert np.array_equal(signed_power(f, 1.0).values, f.values)
    pos = ScalarField(g, np.abs(f.values))
    assert np.allclose(signed_power(pos, 2.0).values, pos.values**2, rtol=1e-15, atol=0)
    assert np.array_equal(signed_power(-f, 1.7).values, -signed_power(f, 1.7).values)
    zero = ScalarField(g, np.zeros(g.shape))
    assert np.all(signed_power(zero, 0.25).values == 0)


def test_signed_power_round_trip(rng):
    g = make_grid(3, math.pi, 16)
    mag = 10.0 ** rng.uniform(-6, 6, size=g.shape)
    f = ScalarField(g, mag * rng.choice([-1.0, 1.0], size=g.shape))
    for s in (1.25, 4.0, 0.8):
        back = signed_power(signed_power(f, s), 1 / s)
        assert np.max(np.abs(back.values - f.values) / np.abs(f.values)) <= 1e-12


def test_signed_power_rejects_nonpositive():
    g = make_grid(3, math.pi, 16)
    with pytest.raises(ValueError):
        signed_power(ScalarField(g, np.ones(g.shape)), 0.0)


def test_coefficient_constant(grid32):
    c = make_coefficient(ConstantCoefficient(1.0), grid32)
    assert c.sup_value == 1.0
    assert len(c.argmax_points) == 32**3
    assert c.is_constant


def test_coefficient_single_gaussian(grid32):
    c = make_coefficient(GaussianBumps(0.5, (1.0,), ((0.0, 0.0, 0.0),), (1.0,)), grid32)
    assert c.sup_value == pytest.approx(1.5, rel=1e-15)
    assert c.argmax_points.tolist() == [[0.0, 0.0, 0.0]]
    assert c.values.min() >= 0.5


def test_coefficient_two_symmetric_peaks(grid32):
    h = grid32.h
    spec = GaussianBumps(0.5, (1.0, 1.0), ((4 * h, 0.0, 0.0), (-4 * h, 0.0, 0.0)), (1.0, 1.0))
    c = make_coefficient(spec, grid32)
    pts = sorted(map(tuple, c.argmax_points))
    assert len(pts) == 2
    assert pts[0][0] == pytest.approx(-pts[1][0])


def test_coefficient_from_dict_round_trip():
    spec = GaussianBumps(0.5, (1.0,), ((1.0, 0.0, 0.0),), (2.0,))
    assert coefficient_from_dict(spec.to_dict()) == spec
    assert coefficient_from_dict({"kind": "constant", "value": 2.0}) == ConstantCoefficient(2.0)
    with pytest.raises(ValueError):
        coefficient_from_dict({"kind": "spline"})


def test_field_io_round_trip(tmp_path, rng):
    g = make_grid(3, 2 * math.pi, 16)
    f = ScalarField(g, rng.standard_normal(g.shape))
    path, meta = write_field(tmp_path / "f.f8", f, role="psi")
    back, role = read_field(path)
    assert role == "psi"
    assert back.grid == g
    assert np.array_equal(back.values, f.values)
    assert (tmp_path / "f.f8").stat().st_size == 8 * 16**3
