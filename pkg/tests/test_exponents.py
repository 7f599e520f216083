import math

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from hdual.errors import DegenerateScaling, RegionViolation
from hdual.exponents import check_admissible, decay_exponent, dual_exponent, rescaling_exponents


def test_benchmark_exponents():
    e = check_admissible(3, 5, 5)
    assert e.p_dual == pytest.approx(1.25)
    assert 1 / 3 < 1 / e.p + 1 / e.q < 1 / 2
    assert e.lam == pytest.approx(0.2, abs=1e-12)
    assert (e.beta1, e.beta2) == pytest.approx((-2 / 3, -2 / 3), abs=1e-12)
    assert e.u_power == pytest.approx(2 / 3)


@pytest.mark.parametrize(
    "N, p, q, reason",
    [(3, 6, 6, "hyperbola-low"), (3, 3, 8, "below-lower-p"), (3, 8, 3, "below-lower-q"), (3, 4, 4, "hyperbola-high")],
)
def test_region_reasons(N, p, q, reason):
    with pytest.raises(RegionViolation) as info:
        check_admissible(N, p, q)
    assert info.value.reason == reason


def test_hyperbola_high_boundary_is_rejected():
    # 1/p + 1/q = (N-1)/(N+1) = 1/2 exactly
    with pytest.raises(RegionViolation) as info:
        check_admissible(3, 4, 4)
    assert info.value.reason == "hyperbola-high"


def test_decay_exponent_examples():
    assert decay_exponent(3, 5, 5) == pytest.approx(0.2, abs=1e-12)
    assert decay_exponent(3, 4.5, 6) == pytest.approx(2 / 9, abs=1e-12)
    # third branch vanishes as 1/p + 1/q approaches 1/2
    assert decay_exponent(3, 4.0001, 4.0001) < 1e-4


def test_rescaling_examples():
    assert rescaling_exponents(5, 5) == pytest.approx((-2 / 3, -2 / 3), abs=1e-12)
    assert rescaling_exponents(4, 6) == pytest.approx((-4 / 7, -6 / 7), abs=1e-12)


def test_rescaling_precondition():
    with pytest.raises(ValueError):
        rescaling_exponents(2.0, 5.0)


def test_degenerate_scaling_type():
    assert issubclass(DegenerateScaling, ValueError)


def test_dual_exponent_examples():
    assert dual_exponent(5) == 1.25
    assert dual_exponent(2) == 2
    with pytest.raises(ValueError):
        dual_exponent(1.0)


@pytest.mark.parametrize("bad", [(2, 5, 5), (3.5, 5, 5), (3, math.inf, 5), (3, 5, 1.0)])
def test_invalid_inputs(bad):
    with pytest.raises(ValueError):
        check_admissible(*bad)


@st.composite
def admissible(draw):
    N = draw(st.sampled_from([3, 4, 5]))
    lower = 2 * N / (N - 1)
    lo, hi = (N - 2) / N, (N - 1) / (N + 1)
    s = draw(st.floats(lo, hi, exclude_min=True, exclude_max=True))
    # split s = 1/p + 1/q with both 1/p, 1/q < 1/lower
    cap = 1 / lower
    a = draw(st.floats(max(s - cap, 0.0), min(cap, s)))
    b = s - a
    if not (0 < a < cap and 0 < b < cap):
        a = b = s / 2
    return N, 1 / a, 1 / b


@settings(max_examples=200, deadline=None)
@given(admissible())
def test_admissible_region_properties(args):
    N, p, q = args
    try:
        e = check_admissible(N, p, q)
    except RegionViolation:
        return  # floating-point landing on a boundary
    assert e.lam > 0
    assert 1 < e.p_dual < 2 and 1 < e.q_dual < 2
    assert e.beta1 < 0 and e.beta2 < 0
    if p == q:
        assert e.beta1 == e.beta2


@given(st.floats(1.0001, 1e6))
def test_dual_involution(r):
    assert dual_exponent(dual_exponent(r)) == pytest.approx(r, rel=1e-10)
