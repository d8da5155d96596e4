import math
import warnings

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from drawdown_occupation import (BrownianDrift, Constant, CramerLundbergExp, DomainError, GeneralStep, GerberShiu,
                                 OneStep, atom_at_zero, classical_sy_resolvent, closure_identity, down_exit_laplace,
                                 exit_grid, exit_laplace, gerber_shiu_density, h_function,
                                 occupation_potential_density, shifted_exit_laplace, solve_omega_scale,
                                 up_exit_laplace)
from drawdown_occupation.scale import make_scale_eval

from conftest import SQRT2

RATIO_05 = (1 - math.exp(-0.5)) / (1 - math.exp(-1))   # 0.622459...
STEP3 = GeneralStep((1.5, 1.0, 0.5), (0.2, 1.0, 0.3, 0.8))


@pytest.fixture(scope="module")
def cl_step():
    return exit_grid(CramerLundbergExp(2.0, 1.0, 1.0), STEP3, 1.0, 2.0)


def test_frozen_ratio():
    assert RATIO_05 == pytest.approx(0.622459, abs=1e-6)


def test_h_normalisation_and_sign(cl_step):
    grid, hf = cl_step
    assert hf(1.0) == 1.0
    assert np.all(hf.values > 0)


@pytest.mark.parametrize("model", [BrownianDrift(1.0, SQRT2), CramerLundbergExp(2.0, 1.0, 1.0)])
def test_h_zero_weight_is_scale_ratio(model):
    grid = solve_omega_scale(model, Constant(0.0), 2.0, 1e-3)
    hf = h_function(grid)
    se = make_scale_eval(model, 0.0)
    u = grid.x[1:]
    assert np.allclose(hf.values[1:], se.W(u) / se.W(1.0), rtol=1e-12)


@pytest.mark.parametrize("model", [BrownianDrift(1.0, SQRT2), CramerLundbergExp(2.0, 1.0, 1.0)])
def test_h_constant_weight(model):
    grid = solve_omega_scale(model, Constant(0.8), 2.0, 1e-3)
    hf = h_function(grid)
    se = make_scale_eval(model, 0.8)
    u = grid.x[100::100]
    assert np.allclose(hf.values[100::100], se.W(u) / se.W(1.0), rtol=1e-6)


def test_base_point_invariance(cl_step):
    grid, hf = cl_step
    hf2 = h_function(grid, base=0.5)
    assert hf2(0.5) == 1.0
    for x, b in [(0.2, 1.9), (1.0, 2.0), (0.0, 0.7)]:
        assert abs(hf.ratio(x, b) - hf2.ratio(x, b)) < 1e-10
    assert np.allclose(hf2.values, hf.values / hf(0.5), rtol=1e-12)


def test_up_exit_examples():
    grid, hf = exit_grid(BrownianDrift(1.0, SQRT2), Constant(0.0), 0.5, 1.0)
    assert up_exit_laplace(hf, 0.5, 1.0) == pytest.approx(RATIO_05, abs=1e-9)
    assert up_exit_laplace(hf, 1.0, 1.0) == 1.0
    assert up_exit_laplace(hf, 0.0, 1.0) == 0.0
    assert down_exit_laplace(grid, hf, 0.5, 1.0) == pytest.approx(1 - RATIO_05, abs=1e-9)
    assert down_exit_laplace(grid, hf, 1.0, 1.0) == 0.0
    assert down_exit_laplace(grid, hf, 0.0, 1.0) == 1.0
    grid, hf = exit_grid(BrownianDrift(0.0, SQRT2), Constant(1.0), 0.5, 1.0)
    assert up_exit_laplace(hf, 0.5, 1.0) == pytest.approx(math.sinh(0.5) / math.sinh(1), abs=1e-6)
    assert up_exit_laplace(hf, 0.5, 1.0) == pytest.approx(0.443409, abs=1e-6)


@pytest.mark.parametrize("model", [BrownianDrift(1.0, SQRT2), CramerLundbergExp(2.0, 1.0, 1.0)])
@pytest.mark.parametrize("q", [0.3, 1.0])
def test_classical_down_exit(model, q):
    se = make_scale_eval(model, q)
    grid, hf = exit_grid(model, Constant(q), 0.6, 1.5)
    expected = se.Z(0.6) - se.W(0.6) * se.Z(1.5) / se.W(1.5)
    assert down_exit_laplace(grid, hf, 0.6, 1.5) == pytest.approx(float(expected), abs=1e-6)


def test_errors(cl_step):
    grid, hf = cl_step
    with pytest.raises(DomainError):
        up_exit_laplace(hf, 1.5, 1.0)
    with pytest.raises(DomainError):
        up_exit_laplace(hf, 0.5, 2.5)
    with pytest.raises(DomainError):
        down_exit_laplace(grid, hf, -0.1, 1.0)
    with pytest.raises(DomainError):
        shifted_exit_laplace(grid, hf, 0.2, 1.0, 0.5)


def test_shifted_exit():
    m = BrownianDrift(1.0, SQRT2)
    rep = exit_laplace(m, Constant(0.0), 1.5, 2.0, c=1.0)
    assert rep.up == pytest.approx(RATIO_05, abs=1e-9)
    assert exit_laplace(m, Constant(0.0), 1.0, 2.0, c=1.0).up == 0.0
    grid, hf = exit_grid(m, OneStep(1.0, 0.0, 0.5), 0.7, 1.4)
    assert shifted_exit_laplace(grid, hf, 0.7, 1.4, 0.0) == (
        up_exit_laplace(hf, 0.7, 1.4), down_exit_laplace(grid, hf, 0.7, 1.4))
    shifted = exit_laplace(m, OneStep(1.0, 0.0, 0.5), 2.7, 3.4, c=2.0)
    assert shifted.up == pytest.approx(up_exit_laplace(hf, 0.7, 1.4), abs=1e-12)


@pytest.mark.parametrize("model", [BrownianDrift(1.0, SQRT2), CramerLundbergExp(2.0, 1.0, 1.0)])
def test_zero_weight_exit_is_certain(model):
    for x in (0.1, 0.5, 0.9):
        rep = exit_laplace(model, Constant(0.0), x, 1.0)
        assert abs(rep.up + rep.down - 1) < 1e-6


levels = st.floats(0, 3)


@settings(max_examples=12, deadline=None)
@given(st.sampled_from([BrownianDrift(1.0, SQRT2), CramerLundbergExp(2.0, 1.0, 1.0)]),
       levels, levels, levels, st.floats(0.05, 1.0), st.floats(0, 1))
def test_report_bounds_and_monotonicity(model, p, q, extra, x, which):
    lo = OneStep(q, p, 0.5)
    hi = OneStep(q + extra * (which < 0.5), p + extra * (which >= 0.5), 0.5)
    x = round(x, 2)
    r_lo = exit_laplace(model, lo, x, 1.0, h=1e-2)
    r_hi = exit_laplace(model, hi, x, 1.0, h=1e-2)
    for r in (r_lo, r_hi):
        assert 0 <= r.up <= 1 and -1e-9 <= r.down <= 1
        assert r.up + r.down <= 1 + 1e-6
    assert r_hi.up <= r_lo.up + 1e-12


def test_potential_density_examples():
    cl = CramerLundbergExp(2.0, 1.0, 1.0)
    grid, hf = exit_grid(cl, Constant(0.0), 0.5, 2.0)
    exact = 0.5 * (1 - 0.5 * math.exp(-0.25)) / (1 - 0.5 * math.exp(-0.5))
    assert exact == pytest.approx(0.4381866, abs=1e-7)
    assert atom_at_zero(grid, hf, 0.5, 1.0) == pytest.approx(exact, abs=1e-12)
    bm = BrownianDrift(1.0, SQRT2)
    g2, hf2 = exit_grid(bm, STEP3, 0.5, 2.0)
    assert atom_at_zero(g2, hf2, 0.5, 1.0) == 0.0
    e = math.exp
    exact = RATIO_05 * (e(-0.2) - e(-1) / (1 - e(-1)) * (1 - e(-0.2)))
    assert exact == pytest.approx(0.443960, abs=1e-6)
    assert classical_sy_resolvent(bm, 0.5, 1.0, 0.2) == pytest.approx(exact, rel=1e-12)
    assert classical_sy_resolvent(bm, 0.0, 1.0, 0.2) == 0.0
    with pytest.raises(DomainError):
        classical_sy_resolvent(bm, 1.0, 0.5, 0.2)
    with pytest.raises(DomainError):
        occupation_potential_density(g2, hf2, 0.5, 1.0, 1.2, 2.0)


@pytest.mark.parametrize("model", [BrownianDrift(1.0, SQRT2), CramerLundbergExp(2.0, 1.0, 1.0)])
def test_zero_weight_density_is_classical(model):
    grid, hf = exit_grid(model, Constant(0.0), 0.5, 2.0)
    for x, z, y in [(0.5, 1.0, 0.2), (0.0, 1.5, 1.2), (1.2, 1.9, 0.05)]:
        assert occupation_potential_density(grid, hf, x, z, y, 2.0) == pytest.approx(
            classical_sy_resolvent(model, x, z, y), abs=1e-8)
        assert atom_at_zero(grid, hf, x, z) == pytest.approx(classical_sy_resolvent(model, x, z, 0.0), abs=1e-8)


def test_density_nonnegative(cl_step):
    grid, hf = cl_step
    for z in (0.3, 1.1, 1.9):
        for y in np.linspace(0.01, z - 0.01, 7):
            assert occupation_potential_density(grid, hf, 0.2, z, float(y), 2.0) >= 0


def test_closure_small():
    model = CramerLundbergExp(2.0, 1.0, 1.0)
    grid, hf = exit_grid(model, OneStep(1.0, 0.2, 0.4), 0.3, 1.0)
    lhs, rhs = closure_identity(grid, hf, 0.3, 1.0)
    assert abs(lhs - rhs) < 1e-4


def test_gerber_shiu_brownian_is_zero():
    with pytest.warns(UserWarning):
        assert gerber_shiu_density(BrownianDrift(1.0, SQRT2), STEP3, 0.5, 0.5, 1.0, 1.0) == 0.0


def test_gerber_shiu_exponential_tail():
    model = CramerLundbergExp(2.0, 1.0, 1.5)
    gs = GerberShiu(model, Constant(0.0), 0.6, 1.2, delta=0.4)
    d1, d2 = gs.density(0.5, 0.3), gs.density(0.5, 1.3)
    assert d2 / d1 == pytest.approx(math.exp(-1.5), rel=1e-12)
    assert gs.kernel(0.5)[1] < gs.grid.h
    assert gerber_shiu_density(model, Constant(0.0), 0.6, 0.5, 0.3, 1.2, delta=0.4) == pytest.approx(d1)


def test_gerber_shiu_marginal_small():
    model = CramerLundbergExp(2.0, 1.0, 1.0)
    gs = GerberShiu(model, OneStep(1.0, 0.0, 0.5), 0.4, 1.0)
    grid, hf = exit_grid(model, OneStep(1.0, 0.0, 0.5), 0.4, 1.0)
    assert gs.marginal() == pytest.approx(down_exit_laplace(grid, hf, 0.4, 1.0), abs=1e-4)


def test_gerber_shiu_discounting_lowers_mass():
    model = CramerLundbergExp(2.0, 1.0, 1.0)
    m0 = GerberShiu(model, Constant(0.3), 0.4, 1.0).marginal()
    m1 = GerberShiu(model, Constant(0.3), 0.4, 1.0, delta=0.5).marginal()
    m2 = GerberShiu(model, Constant(0.8), 0.4, 1.0).marginal()
    assert m1 < m0
    assert m1 == pytest.approx(m2, abs=1e-10)
