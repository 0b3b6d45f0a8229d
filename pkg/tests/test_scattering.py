import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from todashock.lattice import fig1_lattice, step_profile
from todashock.scattering import (ScatteringData, ScatteringError, chi_abs, chi_abs_offset,
                                  chi_values, eigenvalues, ell_from_flags, gap_sign_changes,
                                  jost_left, jost_right, left_zeta, norming_constant,
                                  reflection, resonance_classify, scattering_data,
                                  transmission, wronskian, wronskian_sites)

FIG1_Z = -0.315797685837099
FIG1_LAM = -1.741191002500491
FIG1_GAMMA = 0.8558727862223559  # on fig1_lattice(20)
# ends of I for the fig1 backgrounds: z(-5) and z(-3)
Q, Q1 = -(5 - 24 ** 0.5), -(3 - 8 ** 0.5)

disk_points = st.builds(
    lambda r, th: r * np.exp(1j * th),
    st.floats(0.05, 0.95), st.floats(0.01, 2 * np.pi - 0.01),
)


@settings(max_examples=30, deadline=None)
@given(disk_points)
def test_right_jost_on_free_background_is_free_exponent(z):
    lat = step_profile(-25, 25, (0.5, 0.0), (0.5, 0.0))
    psi = jost_right(np.array([z]), lat)
    n = np.arange(lat.n_min - 1, lat.n_max + 2)
    np.testing.assert_allclose(psi.values()[0], z ** n, rtol=1e-12)


@settings(max_examples=30, deadline=None)
@given(disk_points)
def test_left_jost_on_left_background(z):
    lat = step_profile(-25, 25, (0.5, -4.0), (0.5, 0.0), {0: -1.7})
    zeta = left_zeta(np.array([z]), lat)[0]
    assert abs(zeta) <= 1.0 + 1e-12
    psi = jost_left(np.array([z]), lat)
    n = np.arange(lat.n_min - 1, 1)
    np.testing.assert_allclose(psi.values(n)[0], zeta ** (-n.astype(float)), rtol=1e-12)


def _recurrence_residual(f, z, lat, ns):
    v = f(np.array([z + 0j]), lat).values(np.concatenate([[ns[0] - 1], ns, [ns[-1] + 1]]))[0]
    lam = lat.bg_right[1] + lat.bg_right[0] * (z + 1 / z)
    terms = [lat.a_at(ns - 1) * v[:-2], (lat.b_at(ns) - lam) * v[1:-1], lat.a_at(ns) * v[2:]]
    return np.max(np.abs(sum(terms)) / sum(np.abs(t) for t in terms))


@pytest.mark.parametrize("f,z", [(jost_right, -0.3), (jost_left, -0.3),
                                 (jost_right, -0.14), (jost_left, -0.14)])
def test_recurrence_residual_on_fig1_profile(f, z):
    lat = fig1_lattice(20)
    assert _recurrence_residual(f, z, lat, np.arange(lat.n_min, lat.n_max + 1)) <= 1e-12


@settings(max_examples=20, deadline=None)
@given(disk_points)
def test_wronskian_is_site_independent(z):
    lat = fig1_lattice(20)
    W = wronskian_sites(np.array([z]), lat, [-60, -7, 0, 3, 60])[0]
    assert np.max(np.abs(W - W[2])) <= 1e-10 * abs(W[2])


def test_z_zero_rejected():
    with pytest.raises(ScatteringError):
        jost_right(np.array([0j]), fig1_lattice(20))


def test_pure_step_has_no_discrete_spectrum():
    assert eigenvalues(step_profile(-60, 60, (0.5, -4.0), (0.5, 0.0))) == []


def test_fig1_has_one_gap_eigenvalue():
    lat = fig1_lattice(20)
    ev = eigenvalues(lat)
    assert [e.kind for e in ev] == ["gap"]
    assert ev[0].z == pytest.approx(FIG1_Z, abs=1e-12)
    assert ev[0].lam == pytest.approx(FIG1_LAM, abs=1e-12)
    assert abs(ev[0].lam - ev[0].lam_matrix) <= 1e-8
    assert abs(wronskian(np.array([ev[0].z + 0j]), lat)[0]) <= 1e-12
    assert gap_sign_changes(lat) == 1


def test_multi_profiles_eigen_count(multi_lattices):
    from conftest import MULTI_PROFILES
    for name, lat in multi_lattices.items():
        gap = [e for e in eigenvalues(lat) if e.kind == "gap"]
        assert len(gap) == MULTI_PROFILES[name][2], name
        assert all(abs(e.lam - e.lam_matrix) <= 1e-8 for e in gap)


def test_norming_constant_recorded_value_and_window_doubling():
    assert norming_constant(FIG1_Z, fig1_lattice(20)) == pytest.approx(FIG1_GAMMA, rel=1e-12)
    g = [norming_constant(FIG1_Z, step_profile(-w, w, (0.5, -4.0), (0.5, 0.0), {0: -1.7}))
         for w in (20, 40)]
    assert abs(g[0] - g[1]) <= 1e-10


def test_residue_is_finite_and_negative():
    # gamma z^(2n+1) e^(t(z - 1/z)) at n = t = 0: gamma > 0 and z < 0
    g = norming_constant(FIG1_Z, fig1_lattice(20))
    res = g * FIG1_Z
    assert np.isfinite(res) and res < 0


def test_chi_is_imaginary_on_the_interval():
    lat = fig1_lattice(20)
    s = np.linspace(Q1, Q, 11)[1:-1]
    c = chi_values(s, lat)
    assert np.max(np.abs(c.real)) <= 1e-14 * np.max(np.abs(c))
    assert np.all(np.abs(c) > 0)


def test_chi_offset_extrapolation_agrees():
    lat = fig1_lattice(20)
    s = np.linspace(Q1, Q, 11)[1:-1]
    exact, off = chi_abs(s, lat), chi_abs_offset(s, lat)
    assert np.max(np.abs(off - exact) / exact) <= 1e-6


def test_reflection_is_unimodular_on_the_right_band():
    lat = fig1_lattice(20)
    z = np.exp(1j * np.linspace(0.1, 3.0, 7))
    R, T = reflection(z, lat), transmission(z, lat)
    np.testing.assert_allclose(np.abs(R), 1.0, atol=1e-10)
    assert np.all(np.isfinite(T))


def test_generic_profile_is_nonresonant():
    assert resonance_classify(fig1_lattice(20)) == (False, False, -1)


@pytest.mark.parametrize("flags,ell", [((False, False), -1), ((True, False), 0),
                                       ((False, True), 0), ((True, True), 1)])
def test_ell_table(flags, ell):
    assert ell_from_flags(*flags) == ell


def test_scattering_data_json_round_trip():
    sd = scattering_data(fig1_lattice(20), n_chi=32, n_R=8)
    back = ScatteringData.from_json(sd.to_json())
    assert back == sd
    assert back.gap_z == [pytest.approx(FIG1_Z, abs=1e-12)]
