import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from convalg.errors import ParameterError, RangeError
from convalg.family import builtin_families
from convalg.grid import Grid, GridFunction, convolve, weighted_norm
from convalg.measures import Measure, convolve_measures, dirac
from convalg.operators import (
    DerivationOp,
    DilationEndo,
    check_alpha_inequality,
    check_dilation_norm_identity,
    check_semigroup_action,
    check_titchmarsh,
    derivation_apply,
    derivation_on_dirac,
    endo_ai_check,
    endo_semigroup_nu,
    extended_derivation,
    ghahramani_bound,
    leibniz_residual,
    multiplier_apply,
)
from convalg.weights import Exponential, Power

G = Grid(2.0**-8, 16.0)
L1 = Power(0)

dyadic = st.integers(0, 2**8).map(lambda k: k / 32)
mass = st.complex_numbers(min_magnitude=1e-3, max_magnitude=10, allow_nan=False,
                          allow_infinity=False)
atomic = st.lists(st.tuples(dyadic, mass), min_size=1, max_size=4).map(
    lambda a: Measure(tuple(a))).filter(lambda m: not m.is_zero())


def test_multiplier_commutes_with_convolution():
    mu = Measure(((0.5, 1.0), (1.25, -2j)), GridFunction.box(G, 0, 1))
    f, g = GridFunction.box(G, 0, 2), GridFunction.bump(G, 3, 1)
    lhs = multiplier_apply(mu, convolve(f, g))
    rhs = convolve(multiplier_apply(mu, f), g)
    assert np.max(np.abs(lhs.samples - rhs.samples)) <= 1e-12


def test_derivation_formula():
    D = DerivationOp(dirac(1.0))
    f = GridFunction.box(G, 0, 2)
    # (X f) shifted by one
    expect = GridFunction.from_function(G, lambda t: np.where((t >= 1) & (t < 3), t - 1, 0))
    assert np.max(np.abs(derivation_apply(D, f).samples - expect.samples)) <= 1e-15


@given(atomic, st.integers(0, 3 * 32).map(lambda k: k / 32))
def test_leibniz_exact_on_grid(mu, a):
    # boxes on the same lattice as the atoms keep everything node-aligned
    D = DerivationOp(mu)
    f = GridFunction.box(G, a, a + 1)
    g = GridFunction.box(G, 0.5, 2.0, 2.0)
    scale = weighted_norm(D(convolve(f, g)), Power(2)) + 1
    assert leibniz_residual(D, f, g, Power(2)) <= 1e-12 * scale


def test_derivation_on_dirac():
    mu = Measure(((0.0, 1.0), (0.75, -2 + 0.5j)))
    D = DerivationOp(mu)
    assert derivation_on_dirac(D, 0.0).is_zero()
    for t in (0.25, 1.0, 3.0):
        assert derivation_on_dirac(D, t) == convolve_measures(t * dirac(t), mu)
        assert derivation_on_dirac(D, t) == extended_derivation(D, dirac(t))
    with pytest.raises(ParameterError):
        derivation_on_dirac(D, -1.0)


@given(atomic, atomic)
def test_alpha_inequality(mu, nu):
    rep = check_alpha_inequality(DerivationOp(mu), nu)
    assert rep.passed
    assert rep.evidence == "exact"


def test_alpha_inequality_needs_atoms():
    mu = Measure(density=GridFunction.box(G, 0, 1))
    with pytest.raises(ParameterError):
        check_alpha_inequality(DerivationOp(dirac(0.0)), mu)


def test_ghahramani_bound():
    est = ghahramani_bound(dirac(0.0), Power(1))
    # t (1+t)/(1+t) = t grows linearly
    assert est.status == "unbounded"
    assert est.growth == pytest.approx(2.0, rel=1e-3)
    assert ghahramani_bound(Measure(), Power(1)).status == "bounded"
    assert ghahramani_bound(dirac(1.0), Exponential(1)).status == "unbounded"


@pytest.mark.parametrize("a", [0.5, 1.0, 2.0])
def test_dilation_norm_identity(a):
    g = Grid(2.0**-10, 64.0)
    for f in (GridFunction.box(g, 0, 1), GridFunction.bump(g, 2, 1)):
        rep = check_dilation_norm_identity(a, f)
        assert rep.passed, rep.extremum


def test_dilation_is_multiplicative():
    g = Grid(2.0**-10, 16.0)
    phi = DilationEndo(2.0)
    f, k = GridFunction.bump(g, 2, 1), GridFunction.bump(g, 3, 1.5)
    lhs = phi(convolve(f, k))
    rhs = convolve(phi(f), phi(k))
    assert weighted_norm(lhs - rhs, L1) <= 1e-3 * weighted_norm(lhs, L1)


def test_dilation_range():
    phi = DilationEndo(0.5)
    with pytest.raises(RangeError):
        phi(GridFunction.box(G, 0, 12))
    out = phi(GridFunction.box(G, 0, 4))
    assert weighted_norm(out, L1) == pytest.approx(4.0, rel=1e-2)
    with pytest.raises(ParameterError):
        DilationEndo(0.0)


@pytest.mark.parametrize("s", [0.5, 1.0, 2.0])
def test_semigroup_action(s):
    g = Grid(2.0**-10, 64.0)
    assert check_semigroup_action(DilationEndo(2.0), GridFunction.bump(g, 2, 1), s).passed


# halving is exact for 0 and normal floats; subnormals lose their last bit
normal_times = st.one_of(st.just(0.0), st.floats(1e-300, 1e6))


@given(normal_times, normal_times)
def test_semigroup_exact_on_atoms(s, t):
    phi = DilationEndo(2.0)
    assert convolve_measures(endo_semigroup_nu(phi, s), endo_semigroup_nu(phi, t)) == \
        endo_semigroup_nu(phi, s + t)


def test_endo_ai():
    g = Grid(2.0**-10, 64.0)
    fam = builtin_families()["power_n"]
    rep = endo_ai_check(DilationEndo(2.0), fam, GridFunction.bump(g, 2, 1),
                        [2**j for j in range(4, 11)], 3)
    assert rep.passed
    assert rep.details["skipped_k"] == [1024]


@pytest.mark.parametrize("a,b", [(0.0, 0.0), (0.5, 1.25), (3.0, 2.0)])
def test_titchmarsh(a, b):
    f = GridFunction.box(G, a, a + 1)
    g = GridFunction.bump(G, b + 1, 1)
    rep = check_titchmarsh(f, g)
    assert rep.passed


def test_titchmarsh_zero():
    with pytest.raises(ParameterError):
        check_titchmarsh(GridFunction.zeros(G), GridFunction.box(G, 0, 1))
