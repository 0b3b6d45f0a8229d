import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from todashock.lattice import (SteplikeLattice, WindowTooSmall, conserved_diagnostics, evolve,
                               fig1_lattice, gap_eigenvalues_matrix, normalize, rk4_step,
                               step_profile, toda_rhs, window_for)


def test_constant_background_rhs_vanishes():
    a = np.full(11, 0.5)
    b = np.zeros(11)
    da, db = toda_rhs(a, b, (0.5, 0.0), (0.5, 0.0))
    assert np.all(da == 0) and np.all(db == 0)


def test_pure_step_rhs_by_substitution():
    lat = step_profile(-5, 5, (0.5, -4.0), (0.5, 0.0))
    da, db = toda_rhs(lat.a, lat.b, lat.bg_left, lat.bg_right)
    assert db[lat.index(0)] == 0.0
    assert da[lat.index(-1)] == pytest.approx(2.0, abs=1e-15)
    # only the bond across the step moves
    assert np.count_nonzero(da) == 1 and np.count_nonzero(db) == 0


@given(st.lists(st.floats(0.1, 2.0), min_size=3, max_size=30),
       st.floats(-5, 5), st.floats(0.1, 2.0), st.floats(-5, 5))
def test_sum_of_db_telescopes(a_list, b0, a_left, b_right):
    a = np.array(a_list)
    b = np.linspace(b0, -b0, len(a))
    da, db = toda_rhs(a, b, (a_left, 0.0), (0.5, b_right))
    assert db.sum() == pytest.approx(2.0 * (a[-1] ** 2 - a_left ** 2), abs=1e-11)


def test_rhs_matches_central_difference_of_rk4(fig1_small):
    lat, h = fig1_small, 1e-4
    ap, bp = rk4_step(lat.a, lat.b, h, lat.bg_left, lat.bg_right)
    am, bm = rk4_step(lat.a, lat.b, -h, lat.bg_left, lat.bg_right)
    da, db = toda_rhs(lat.a, lat.b, lat.bg_left, lat.bg_right)
    assert np.max(np.abs((ap - am) / (2 * h) - da)) <= 1e-6
    assert np.max(np.abs((bp - bm) / (2 * h) - db)) <= 1e-6


def test_stationary_background_evolves_to_itself():
    lat = step_profile(-30, 30, (0.5, 0.0), (0.5, 0.0))
    traj = evolve(lat, 10.0)
    assert np.max(np.abs(traj.a[-1] - 0.5)) <= 1e-10
    assert np.max(np.abs(traj.b[-1])) <= 1e-10


def test_identity_normalization():
    lat = step_profile(-3, 3, (0.5, -4.0), (0.5, 0.0), {0: -1.7})
    out, s, shift = normalize(lat)
    assert (s, shift) == (1.0, 0.0)
    np.testing.assert_array_equal(out.b, lat.b)


def test_normalization_rejects_overlapping_backgrounds():
    with pytest.raises(ValueError):
        normalize(step_profile(-3, 3, (0.5, 0.0), (0.5, 0.0)))


def test_normalized_evolution_maps_onto_original():
    raw = step_profile(-40, 40, (1.0, -8.0), (1.0, 2.0), {0: -3.0, 1: (1.3, 1.0)})
    lat, s, shift = normalize(raw)
    assert s == 2.0 and shift == 2.0
    assert lat.bg_left == (0.5, -5.0) and lat.bg_right == (0.5, 0.0)
    orig = evolve(raw, 1.0, dt=0.005)
    norm = evolve(lat, 2.0, dt=0.01)
    assert np.max(np.abs(orig.a[-1] / s - norm.a[-1])) <= 1e-8
    assert np.max(np.abs((orig.b[-1] - shift) / s - norm.b[-1])) <= 1e-8


def test_window_guard_fires():
    lat = step_profile(-10, 10, (0.5, -4.0), (0.5, 0.0), {0: -1.7})
    with pytest.raises(WindowTooSmall):
        evolve(lat, 20.0)


def test_window_rule_grows_with_time():
    assert window_for(200, 0.5) > window_for(100, 0.5) > 2 * 100
    lat = fig1_lattice(200)
    assert lat.n_min < -2.13 * 200 and lat.n_max > 2.13 * 200


def test_rejects_nonpositive_a():
    with pytest.raises(ValueError):
        SteplikeLattice(0, np.array([0.5, -0.1]), np.zeros(2), (0.5, 0.0), (0.5, 0.0))


def test_rk4_is_fourth_order(fig1_small):
    ref = evolve(fig1_small, 1.0, dt=0.00125)
    errs = [np.max(np.abs(evolve(fig1_small, 1.0, dt=dt).b[-1] - ref.b[-1]))
            for dt in (0.02, 0.01)]
    assert 12 < errs[0] / errs[1] < 20


def test_sum_b_conserved_with_equal_background_a():
    lat = step_profile(-80, 80, (0.5, -4.0), (0.5, 0.0), {0: -1.7})
    traj = evolve(lat, 10.0, snapshot_stride=200)
    sums = [conserved_diagnostics(traj.state(k))[0] for k in range(len(traj.times))]
    assert np.ptp(sums) <= 1e-8


def test_stationary_diagnostics_vanish():
    lat = step_profile(-10, 10, (0.5, 0.0), (0.5, 0.0))
    assert conserved_diagnostics(lat, lat) == (0.0, 0.0)


@pytest.mark.slow
def test_gap_eigenvalue_is_conserved_along_the_flow():
    lat = fig1_lattice(100)
    traj = evolve(lat, 100.0, times=(50.0, 100.0))
    ev = [gap_eigenvalues_matrix(traj.state(k), -3.0, -1.0) for k in range(3)]
    assert all(len(e) == 1 for e in ev)
    assert max(abs(e[0] - ev[0][0]) for e in ev) <= 1e-6


# sup |b| after a single-site kick of 0.1 on the free background; recorded from a run
# on sites -150..150 with dt = 0.005
DISPERSIVE_SUP_B = [(10.0, 0.026776932980157535), (20.0, 0.0213376195472298),
                    (30.0, 0.018639825492989995), (40.0, 0.016955671814092865),
                    (50.0, 0.015775164909146953), (60.0, 0.014887877981789992)]


def test_single_site_kick_disperses():
    lat = step_profile(-150, 150, (0.5, 0.0), (0.5, 0.0), {0: 0.1})
    traj = evolve(lat, 60.0, times=[t for t, _ in DISPERSIVE_SUP_B])
    sup = [float(np.max(np.abs(traj.at_time(t).b))) for t, _ in DISPERSIVE_SUP_B]
    np.testing.assert_allclose(sup, [v for _, v in DISPERSIVE_SUP_B], rtol=1e-9)
    assert np.all(np.diff(sup) < 0)


@settings(max_examples=15, deadline=None)
@given(st.integers(-60, 60), st.floats(0.3, 0.9), st.floats(-2.0, 2.0))
def test_values_outside_window_are_background(n_off, a0, b0):
    lat = step_profile(-5, 5, (a0, b0 - 4), (0.5, 0.0), {0: b0})
    n = np.array([lat.n_min - 1 - abs(n_off), lat.n_max + 1 + abs(n_off)])
    np.testing.assert_array_equal(lat.a_at(n), [a0, 0.5])
    np.testing.assert_array_equal(lat.b_at(n), [b0 - 4, 0.0])
