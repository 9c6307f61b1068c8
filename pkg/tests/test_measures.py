import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from convalg.errors import DomainError, GridMismatchError, ParameterError
from convalg.grid import Grid, GridFunction, convolve, laplace
from convalg.measures import (
    Measure,
    alpha_measure,
    apply_X_measure,
    check_measure_banach,
    convolve_measure_function,
    convolve_measures,
    dirac,
    laplace_measure,
    measure_from_dict,
    measure_norm,
    translate_measure,
    zero_measure,
)
from convalg.weights import ExpSqrt, Power

G = Grid(2.0**-8, 16.0)

dyadic = st.integers(0, 2**10).map(lambda k: k / 64)
mass = st.complex_numbers(max_magnitude=10, allow_nan=False, allow_infinity=False)
atomic = st.lists(st.tuples(dyadic, mass), max_size=5).map(lambda a: Measure(tuple(a)))


def test_normalization_merges_and_drops():
    mu = Measure(((1.0, 2.0), (0.5, 1.0), (1.0, -2.0)))
    assert mu.atoms == ((0.5, 1.0 + 0j),)
    assert Measure(density=GridFunction.zeros(G)).density is None
    assert (mu - mu).is_zero()


def test_bad_atoms():
    with pytest.raises(DomainError):
        Measure(((-1.0, 1.0),))
    with pytest.raises(ParameterError):
        Measure(((1.0, complex("nan")),))
    with pytest.raises(DomainError):
        dirac(-0.5)


@given(st.floats(0, 1e6), st.floats(0, 1e6))
def test_dirac_product_exact(s, t):
    assert convolve_measures(dirac(s), dirac(t)) == dirac(s + t)


@given(atomic, atomic)
def test_atomic_convolution_commutes(mu, nu):
    assert convolve_measures(mu, nu) == convolve_measures(nu, mu)


@given(atomic, atomic)
def test_titchmarsh_on_atoms(mu, nu):
    prod = convolve_measures(mu, nu)
    if mu.is_zero() or nu.is_zero():
        assert prod.is_zero()
    elif not prod.is_zero():
        # leading masses multiply, so cancellation cannot touch the first atom
        assert alpha_measure(prod) == alpha_measure(mu) + alpha_measure(nu)


@given(atomic, atomic, st.floats(0, 3), st.floats(-5, 5))
def test_laplace_multiplicative_on_atoms(mu, nu, x, y):
    z = complex(x, y)
    lhs = laplace_measure(convolve_measures(mu, nu), z)
    rhs = laplace_measure(mu, z) * laplace_measure(nu, z)
    scale = max(1.0, measure_norm(mu, Power(0)) * measure_norm(nu, Power(0)))
    assert abs(lhs - rhs) <= 1e-12 * scale


def test_measure_norm():
    mu = Measure(((0.0, 2.0), (3.0, -1j)), GridFunction.box(G, 0, 1))
    # atoms give 2*1 + 1*4; the box gives h * sum_{j < 1/h} (1 + j h)
    assert measure_norm(mu, Power(1)) == pytest.approx(2 + 4 + 1 + (1 - G.h) / 2, rel=1e-12)


def test_convolve_measure_function_shifts():
    f = GridFunction.box(G, 0, 1)
    out = convolve_measure_function(Measure(((2.0, 3.0),)), f)
    assert out == 3.0 * GridFunction.box(G, 2, 3)


def test_mixed_convolution_matches_function_route():
    f = GridFunction.box(G, 0, 1)
    g = GridFunction.bump(G, 3, 1)
    mu = Measure(((0.5, 1.0),), f)
    nu = Measure(((1.25, -2.0),), g)
    prod = convolve_measures(mu, nu)
    probe = GridFunction.box(G, 0, 0.5)
    lhs = convolve_measure_function(prod, probe)
    rhs = convolve_measure_function(mu, convolve_measure_function(nu, probe))
    assert np.max(np.abs(lhs.samples - rhs.samples)) <= 1e-12


def test_dropped_variation_recorded():
    mu = Measure(((10.0, 1.0),), GridFunction.box(G, 10, 12))
    prod = convolve_measures(mu, mu)
    # the atom at 20 and the whole density part fall past T = 16
    assert prod.dropped_variation == pytest.approx(1 + 2 + 2 + 4, rel=1e-12)
    assert prod.is_zero()
    atoms = convolve_measures(dirac(10.0), dirac(10.0), horizon=16.0)
    assert atoms.is_zero() and atoms.dropped_variation == 1.0


def test_grid_mismatch():
    a = Measure(density=GridFunction.box(G, 0, 1))
    b = Measure(density=GridFunction.box(Grid(2.0**-7, 16.0), 0, 1))
    with pytest.raises(GridMismatchError):
        convolve_measures(a, b)


@given(atomic, dyadic)
def test_translate(mu, t):
    shifted = convolve_measures(dirac(t), mu)
    back = translate_measure(shifted, t)
    assert back == mu
    assert convolve_measures(dirac(t), back) == shifted


def test_translate_precondition():
    with pytest.raises(DomainError):
        translate_measure(dirac(1.0), 2.0)
    mu = Measure(density=GridFunction.box(G, 1, 2))
    with pytest.raises(DomainError):
        translate_measure(mu, 1.5)
    assert translate_measure(mu, 0.5).density == GridFunction.box(G, 0.5, 1.5)


def test_alpha_measure():
    assert alpha_measure(zero_measure()) == math.inf
    mu = Measure(((2.0, 1.0), (0.75, 1e-20)), GridFunction.box(G, 1, 2))
    assert alpha_measure(mu) == 1.0


def test_apply_X():
    mu = apply_X_measure(Measure(((0.0, 1.0), (2.0, 3.0))))
    assert mu.atoms == ((2.0, 6.0 + 0j),)


def test_descriptor_round_trip():
    mu = Measure(((0.5, 1 + 2j),), GridFunction.box(G, 0, 1))
    assert measure_from_dict(mu.to_dict(), G) == mu
    with pytest.raises(ParameterError):
        measure_from_dict({"atoms": [{"re": 1.0}]})
    with pytest.raises(ParameterError):
        measure_from_dict({"density": {"kind": "box", "a": 0, "b": 1}})


def test_laplace_measure_density_part():
    f = GridFunction.bump(G, 2, 1)
    mu = Measure(((1.0, 2.0),), f)
    z = 0.5 + 1j
    assert laplace_measure(mu, z) == pytest.approx(2 * np.exp(-z) + laplace(f, z))


def test_measure_banach():
    rng = np.random.default_rng(1)
    assert check_measure_banach(ExpSqrt(1), rng, 20).passed
