import math

import numpy as np
import pytest

from isinglab import diffusion


# ---------------------------------------------------------------------------
# discrete heat equation
# ---------------------------------------------------------------------------

def tent(L):
    x = np.arange(L + 1)
    return np.minimum(x, L - x).astype(float)


def test_time_zero_is_tent_exactly():
    for L in (2, 8, 30, 64):
        state = diffusion.heat_solve(L, 0.0)
        assert np.array_equal(state.u, tent(L))


def test_eigen_expansion_matches_rk4():
    """Two independent integrators agree far below the 1e-8 contract."""
    a = diffusion.heat_solve(64, 100.0)
    b = diffusion.heat_solve_rk4(64, 100.0)
    assert np.abs(a.u - b.u).max() < 1e-8
    a = diffusion.heat_solve(30, 17.3)
    b = diffusion.heat_solve_rk4(30, 17.3, dt=0.05)
    assert np.abs(a.u - b.u).max() < 1e-8


def test_dirichlet_ends_and_max_principle():
    for L, t in ((8, 0.3), (32, 5.0), (64, 500.0), (128, 40.0)):
        u = diffusion.heat_solve(L, t).u
        assert u[0] == 0.0 and u[L] == 0.0
        assert u.min() >= -1e-12
        assert u.max() <= L / 2 + 1e-12


def test_long_time_decay_to_zero():
    assert diffusion.heat_solve(32, 1e5).u.max() < 1e-200


def test_single_mode_analytic_solution():
    # at L=2 the expansion has one mode: u(t,1) = e^{-t}
    for t in (0.0, 0.7, 3.0):
        state = diffusion.heat_solve(2, t)
        assert state.u[1] == pytest.approx(math.exp(-t), abs=1e-15)


def test_interior_values_regression():
    u = diffusion.heat_solve(64, 100.0).u
    assert u[16] == pytest.approx(15.535563402003298, rel=1e-12)
    assert u[32] == pytest.approx(24.031146768444387, rel=1e-12)


def test_gradient_occupation_mass():
    """The exclusion-dual profile carries exactly L/2 particles."""
    for L, t in ((8, 1.0), (32, 7.0), (64, 120.0)):
        g = diffusion.heat_solve(L, t).gradient_occupation
        assert g.shape == (L,)
        assert g.sum() == pytest.approx(L / 2, abs=1e-12)
        assert np.all(g >= -1e-12) and np.all(g <= 1 + 1e-12)


def test_heat_validation():
    with pytest.raises(ValueError):
        diffusion.heat_solve(7, 1.0)
    with pytest.raises(ValueError):
        diffusion.heat_solve(0, 1.0)
    with pytest.raises(ValueError):
        diffusion.heat_solve(8, -0.1)
    with pytest.raises(ValueError):
        diffusion.heat_solve_rk4(8, 1.0, dt=0.0)


# ---------------------------------------------------------------------------
# boundary-corner tail estimate
# ---------------------------------------------------------------------------

def test_tail_example_holds():
    check = diffusion.heat_tail_check(64, 64 * 64 / 50)
    assert check.in_regime
    assert check.holds
    assert check.lhs == pytest.approx(0.0008777838477970201, rel=1e-10)


def test_tail_ratio_bounded_across_sizes():
    """Sweep of lhs / (L e^{-L^2/32t}) stays below the recorded constant."""
    for L in (32, 64, 128):
        for frac in (1 / 100, 1 / 50, 1 / 20, 1 / 10, 1 / 4):
            t = frac * L * L
            check = diffusion.heat_tail_check(L, t)
            assert check.in_regime
            ratio = check.lhs / (L * math.exp(-L * L / (32.0 * t)))
            assert ratio <= diffusion.TAIL_CONSTANT


def test_tail_vanishes_at_short_times():
    lhs_by_t = [diffusion.heat_tail_check(64, t).lhs for t in (320.0, 160.0, 80.0)]
    assert lhs_by_t == sorted(lhs_by_t, reverse=True)
    # below t ~ L^2/100 the profile has not reached the boundary at all
    # (only spectral-reconstruction round-off remains)
    assert abs(diffusion.heat_tail_check(64, 20.0).lhs) < 1e-9
    assert abs(diffusion.heat_tail_check(64, 5.0).lhs) < 1e-12


def test_tail_regime_flag():
    L = 32
    late = 2.0 * L * L / math.log(L) + 1.0
    check = diffusion.heat_tail_check(L, late)
    assert not check.in_regime      # no assertion raised out of regime


def test_tail_validation():
    with pytest.raises(ValueError):
        diffusion.heat_tail_check(64, 0.0)


# ---------------------------------------------------------------------------
# symmetric simple exclusion vs heat gradient (duality)
# ---------------------------------------------------------------------------

def test_ssep_time_zero_step():
    rep = diffusion.ssep_simulate(16, 0.0, 50, 1)
    assert np.array_equal(rep.occupation, np.r_[np.ones(8), np.zeros(8)])
    assert rep.max_z == 0.0


def test_ssep_two_sites_closed_form():
    """One particle on two sites hops as a 2-state chain: P = (1+e^{-t})/2."""
    rep = diffusion.ssep_simulate(2, 0.7, 200_000, 3)
    closed = 0.5 * (1 + math.exp(-0.7))
    sigma = math.sqrt(closed * (1 - closed) / 200_000)
    assert abs(rep.occupation[0] - closed) < 4 * sigma
    assert rep.occupation.sum() == pytest.approx(1.0, abs=1e-12)
    # the heat reference at L=2 equals the closed form exactly
    assert rep.reference[0] == pytest.approx(closed, abs=1e-14)


def test_ssep_duality_profile():
    rep = diffusion.ssep_simulate(32, 100.0, 10_000, 11)
    assert rep.max_z < 4.0
    assert rep.occupation.sum() == pytest.approx(16.0, abs=1e-9)


def test_ssep_deterministic():
    a = diffusion.ssep_simulate(8, 2.5, 400, 9)
    b = diffusion.ssep_simulate(8, 2.5, 400, 9)
    assert np.array_equal(a.occupation, b.occupation)


def test_ssep_validation():
    with pytest.raises(ValueError):
        diffusion.ssep_simulate(9, 1.0, 10, 0)
    with pytest.raises(ValueError):
        diffusion.ssep_simulate(8, 1.0, 0, 0)


# ---------------------------------------------------------------------------
# random-walk tail comparison chain
# ---------------------------------------------------------------------------

def test_rw_chain_regression():
    ch = diffusion.rw_tail_chain(16, 64.0)
    want = (0.31447539076348885, 0.3173122561054019,
            0.38937802563469265, 0.9903723235450742)
    for got, ref in zip(ch.chain, want):
        assert got == pytest.approx(ref, rel=1e-9)


def test_rw_chain_ordered_everywhere():
    for L in (8, 16, 32, 64):
        for t in (L * L / 64, L * L / 16, L * L / 4):
            ch = diffusion.rw_tail_chain(L, t)
            assert ch.p_box <= ch.p_semi + 1e-12
            assert ch.p_semi <= ch.p_shift + 1e-12
            assert ch.p_shift <= ch.p_free + 1e-12


def test_rw_chain_short_time():
    ch = diffusion.rw_tail_chain(16, 1e-6)
    assert max(ch.chain) < 1e-12


def test_rw_final_bound_recorded_constant():
    """p_free stays below RW_TAIL_CONSTANT * L * e^{-L^2/(32 t)}."""
    for L in (16, 32, 64, 128):
        for frac in (1 / 64, 1 / 32, 1 / 16, 1 / 8, 1 / 4):
            ch = diffusion.rw_tail_chain(L, frac * L * L)
            bound = diffusion.RW_TAIL_CONSTANT * L * math.exp(-1.0 / (32 * frac))
            assert ch.p_free <= bound


def test_rw_probabilities_are_probabilities():
    ch = diffusion.rw_tail_chain(32, 77.0)
    for p in ch.chain:
        assert -1e-12 <= p <= 1 + 1e-12


def test_rw_validation():
    with pytest.raises(ValueError):
        diffusion.rw_tail_chain(10, 1.0)
    with pytest.raises(ValueError):
        diffusion.rw_tail_chain(4, 1.0)
    with pytest.raises(ValueError):
        diffusion.rw_tail_chain(16, 0.0)


# ---------------------------------------------------------------------------
# rate-2 column dynamics on the cube
# ---------------------------------------------------------------------------

def test_coldyn_time_zero_tent():
    rep = diffusion.coldyn_profile(8, 0.0, 5, 0)
    assert np.array_equal(rep.profile, tent(8))
    assert rep.max_z == 0.0
    assert rep.corner_rate == 0.0


def test_coldyn_profile_matches_heat():
    """Monte Carlo mean of h_x(t/2) sits on u(t, x) to within 4 sigma."""
    rep = diffusion.coldyn_profile(16, 32.0, 1000, 7)
    assert rep.max_z < 4.0
    assert np.array_equal(rep.heat, diffusion.heat_solve(16, 32.0).u)
    # boundary heights are pinned
    assert rep.profile[0] == 0.0 and rep.profile[16] == 0.0


def test_coldyn_second_size():
    rep = diffusion.coldyn_profile(12, 10.0, 800, 9)
    assert rep.max_z < 4.0


def test_coldyn_corner_bound():
    for t, seed in ((4.0, 10), (32.0, 7)):
        rep = diffusion.coldyn_profile(16, t, 2000, seed)
        assert rep.corner_rate <= rep.corner_bound
        assert rep.corner_bound == pytest.approx(
            4.0 * (1 - diffusion.heat_solve(16, t).u[15]), rel=1e-12)


def test_coldyn_deterministic():
    a = diffusion.coldyn_profile(8, 3.0, 200, 4)
    b = diffusion.coldyn_profile(8, 3.0, 200, 4)
    assert np.array_equal(a.profile, b.profile)
    assert a.corner_rate == b.corner_rate


def test_coldyn_validation():
    with pytest.raises(ValueError):
        diffusion.coldyn_profile(2, 1.0, 10, 0)
    with pytest.raises(ValueError):
        diffusion.coldyn_profile(7, 1.0, 10, 0)
    with pytest.raises(ValueError):
        diffusion.coldyn_profile(8, 1.0, 0, 0)
