import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

import convalg.grid as grid_mod
from convalg.errors import DomainError, GridMismatchError, ParameterError, ResolutionError
from convalg.grid import (
    Grid,
    GridFunction,
    alpha_support,
    approximate_identity,
    check_approximate_identity,
    check_banach_inequality,
    check_character,
    convolve,
    dual_pairing,
    eventually_decreasing,
    function_from_dict,
    laplace,
    sup_norm_over_weight,
    weighted_norm,
)
from convalg.weights import Exponential, Power

G = Grid(2.0**-8, 16.0)
L1 = Power(0)

# endpoints on the 2^-4 lattice, so every box is grid-aligned
ends = st.integers(0, 64).map(lambda k: k / 16)


@st.composite
def boxes(draw, grid=G, max_end=8.0):
    a = draw(st.integers(0, int(max_end * 16) - 1)) / 16
    b = draw(st.integers(int(a * 16) + 1, int(max_end * 16))) / 16
    height = draw(st.floats(-3, 3, allow_nan=False).filter(lambda x: abs(x) > 1e-3))
    return GridFunction.box(grid, a, b, height)


def test_grid_nodes():
    g = Grid(0.25, 2.0)
    assert g.n == 9
    assert np.array_equal(g.t, np.arange(9) * 0.25)
    with pytest.raises(ParameterError):
        Grid(0.0, 1.0)


def test_immutable():
    f = GridFunction.box(G, 0, 1)
    with pytest.raises(AttributeError):
        f.samples = None
    with pytest.raises(ValueError):
        f.samples[0] = 3


def test_grid_mismatch():
    with pytest.raises(GridMismatchError):
        GridFunction.box(G, 0, 1) + GridFunction.box(Grid(2.0**-7, 16.0), 0, 1)


def test_box_is_half_open():
    f = GridFunction.box(Grid(0.25, 2.0), 0.5, 1.0)
    assert f.samples.real.tolist() == [0, 0, 1, 1, 0, 0, 0, 0, 0]


def test_box_convolution_triangle():
    g = Grid(2.0**-10, 8.0)
    f = GridFunction.box(g, 0, 1)
    tri = np.clip(1 - np.abs(g.t - 1), 0, None)
    err = np.max(np.abs(convolve(f, f).samples - tri))
    assert err <= 2 * g.h


def test_convolution_truncates_at_T():
    g = Grid(0.5, 4.0)
    f = GridFunction.box(g, 2.0, 4.5)
    out = convolve(f, f)
    assert out.samples[-1] == pytest.approx(0.5 * 1)  # only (2,2) lands on t=4
    assert out.samples[: g.index(4.0)].sum() == 0


@given(boxes(), boxes())
def test_commutative_exact(f, g):
    assert convolve(f, g) == convolve(g, f)


@given(boxes(max_end=4), boxes(max_end=4), boxes(max_end=4))
def test_associative(f, g, k):
    lhs = convolve(convolve(f, g), k).samples
    rhs = convolve(f, convolve(g, k)).samples
    assert np.max(np.abs(lhs - rhs)) <= 1e-12 * max(1.0, np.max(np.abs(lhs)))


def test_fft_and_direct_agree(monkeypatch):
    g = Grid(2.0**-9, 32.0)
    f = GridFunction.bump(g, 6, 5)
    k = GridFunction.box(g, 1, 9, 2.0)
    direct = convolve(f, k).samples
    monkeypatch.setattr(grid_mod, "DIRECT_LIMIT", 0)
    fft = convolve(f, k).samples
    assert np.max(np.abs(direct - fft)) <= 1e-12 * np.max(np.abs(direct))


def test_weighted_norm_values():
    g = Grid(2.0**-10, 64.0)
    assert weighted_norm(GridFunction.box(g, 0, 1), L1) == 1.0
    assert weighted_norm(GridFunction.box(g, 0, 1, -3.0), L1) == 3.0
    # int_0^64 e^{-t} (1+t) dt = 2 - 66 e^{-64}
    val = weighted_norm(GridFunction.exp_decay(g), Power(1))
    assert val == pytest.approx(2.0, abs=2 * g.h)
    # int_0^1 e^{t} dt = e - 1
    assert weighted_norm(GridFunction.box(g, 0, 1), Exponential(1)) == pytest.approx(
        math.e - 1, abs=2 * g.h)


@pytest.mark.parametrize("z", [0, 1, 2 + 3j, 5j])
def test_laplace_of_exponential(z):
    g = Grid(2.0**-12, 64.0)
    val = laplace(GridFunction.exp_decay(g), z)
    assert abs(val - 1 / (1 + z)) <= g.h * (1 + abs(z))


def test_laplace_domain():
    with pytest.raises(DomainError):
        laplace(GridFunction.box(G, 0, 1), -0.1)


@given(boxes(), boxes(), st.floats(0, 5), st.floats(-10, 10))
def test_discrete_characters_multiplicative(f, g, x, y):
    z = complex(x, y)
    lhs = laplace(convolve(f, g), z)
    rhs = laplace(f, z) * laplace(g, z)
    scale = max(1.0, weighted_norm(f, L1) * weighted_norm(g, L1))
    assert abs(lhs - rhs) <= 1e-12 * scale


def test_check_character_report():
    rep = check_character(GridFunction.box(G, 0, 1), GridFunction.box(G, 2, 3.5), [0, 1j])
    assert rep.passed and rep.extremum < 1e-12


def test_dual_pairing_bounded_by_norms():
    f = GridFunction.bump(G, 3, 2)
    h = GridFunction.from_function(G, lambda t: np.cos(t) * (1 + t))
    w = Power(1)
    assert abs(dual_pairing(f, h)) <= weighted_norm(f, w) * sup_norm_over_weight(h, w) + 1e-12


def test_alpha_support():
    assert alpha_support(GridFunction.zeros(G)) == math.inf
    assert alpha_support(GridFunction.box(G, 1.5, 3)) == 1.5
    # 1.3 is not a node; the first node inside is ceil(1.3/h) h
    assert alpha_support(GridFunction.box(G, 1.3, 3)) == math.ceil(1.3 / G.h) * G.h
    with pytest.raises(ParameterError):
        alpha_support(GridFunction.box(G, 0, 1), 0.0)


def test_approximate_identity():
    e = approximate_identity(16, G)
    assert weighted_norm(e, L1) == 1.0
    with pytest.raises(ResolutionError):
        approximate_identity(2**9, G)
    rep = check_approximate_identity(GridFunction.bump(G, 4, 2), Power(2), [2**j for j in range(1, 9)])
    assert rep.passed
    assert eventually_decreasing(rep.details["norms"])


def test_eventually_decreasing():
    assert eventually_decreasing([1, 3, 2, 2, 1])
    assert not eventually_decreasing([1, 3, 2, 2.5])
    assert not eventually_decreasing([])


def test_banach_inequality_report():
    rng = np.random.default_rng(0)
    assert check_banach_inequality(Power(2), G, rng, 10).passed


@given(boxes(max_end=8), boxes(max_end=8))
def test_banach_inequality_property(f, g):
    w = Power(1.5)
    assert weighted_norm(convolve(f, g), w) <= weighted_norm(f, w) * weighted_norm(g, w) * (1 + 1e-12)


def test_csv_round_trip(tmp_path):
    g = Grid(0.125, 4.0)
    f = GridFunction.bump(g, 2, 1, 1.5) + 1j * GridFunction.box(g, 0, 1)
    path = tmp_path / "f.csv"
    f.to_csv(path)
    assert GridFunction.from_csv(path) == f
    assert GridFunction.from_csv_text(f.to_csv(), g) == f
    with pytest.raises(GridMismatchError):
        GridFunction.from_csv(path, Grid(0.25, 4.0))


def test_function_descriptors():
    g = Grid(0.125, 4.0)
    assert function_from_dict({"kind": "box", "a": 0, "b": 1}, g) == GridFunction.box(g, 0, 1)
    assert function_from_dict({"kind": "approx_identity", "k": 2}, g) == approximate_identity(2, g)
    s = function_from_dict({"kind": "samples", "re": list(range(33))}, g)
    assert s.samples[5] == 5
    with pytest.raises(ParameterError):
        function_from_dict({"kind": "box", "a": 0}, g)
    with pytest.raises(ParameterError):
        function_from_dict({"kind": "spline"}, g)
