import math

import numpy as np
import pytest
from hypothesis import given, strategies as st
from hypothesis.extra.numpy import arrays

from rissim.codebook import ideal_states
from rissim.fields import (
    DirectionGrid,
    Pattern,
    SourceModel,
    aperture_directivity,
    directivity,
    field_at,
    illuminate,
    pattern_cut,
    pattern_rows,
    radiate,
    rcs_response,
)
from rissim.geometry import ArrayGeometry, Direction
from rissim.metrics import find_peak
from rissim.synthesis import ideal_phase_profile, quantize_phase_map, uniform_map

from conftest import FREQ, PITCH
from oracles import double_sum_field

COARSE = DirectionGrid(dtheta=2.0, dphi=10.0)
NORMAL = SourceModel.plane(Direction(0, 0))

complex_4x4 = st.tuples(
    arrays(np.float64, (4, 4), elements=st.floats(-1, 1)),
    arrays(np.float64, (4, 4), elements=st.floats(-1, 1)),
).map(lambda t: t[0] + 1j * t[1])


def test_normal_plane_wave_is_uniform(ris20):
    a = illuminate(ris20, NORMAL)
    np.testing.assert_allclose(a, 1.0 + 0j, atol=1e-15)


def test_oblique_plane_wave_linear_phase(ris20):
    a = illuminate(ris20, SourceModel.plane(Direction(30, 90)))
    np.testing.assert_allclose(np.abs(a), 1.0)
    step = np.angle(a[1:, :] / a[:-1, :])
    np.testing.assert_allclose(step, -ris20.wavenumber * PITCH * 0.5, atol=1e-12)
    np.testing.assert_allclose(np.angle(a[:, 1:] / a[:, :-1]), 0.0, atol=1e-12)


def test_spherical_boresight_feed():
    g = ArrayGeometry(5, 5, PITCH, FREQ)
    a = illuminate(g, SourceModel.spherical((0, 0, 0.25), taper_exponent=0))
    assert abs(a[2, 2]) == pytest.approx(1.0, abs=1e-15)
    d_c = 0.25
    d_corner = math.sqrt(2 * (2 * PITCH) ** 2 + 0.25**2)
    assert abs(a[0, 0]) == pytest.approx(d_c / d_corner, rel=1e-12)
    dphase = np.angle(a[0, 0] / a[2, 2])
    expected = -g.wavenumber * (d_corner - d_c)
    assert math.remainder(dphase - expected, 2 * math.pi) == pytest.approx(0.0, abs=1e-9)


def test_feed_taper_lowers_edge(ris20):
    a0 = np.abs(illuminate(ris20, SourceModel.spherical((0, 0, 0.25), 0)))
    a6 = np.abs(illuminate(ris20, SourceModel.spherical((0, 0, 0.25), 6.5)))
    assert a6[0, 0] < a0[0, 0] <= 1.0
    assert a6.max() == pytest.approx(1.0)


def test_feed_on_element_rejected():
    g = ArrayGeometry(1, 1, PITCH, FREQ)
    src = SourceModel("spherical", position=(0.0, 0.0, 1e-15))
    with pytest.raises(ValueError):
        illuminate(g, src)


def test_radiate_shape_mismatch(small):
    with pytest.raises(ValueError):
        radiate(small, np.ones((3, 4)), None, COARSE)
    with pytest.raises(ValueError):
        radiate(small, np.ones((4, 4)), np.ones((4, 3)), COARSE)


@given(complex_4x4, st.floats(0, 90), st.floats(0, 360, exclude_max=True))
def test_radiate_matches_double_sum(w, theta, phi):
    g = ArrayGeometry(4, 4, PITCH, FREQ)
    got = field_at(g, w, None, [(theta, phi)])[0]
    ref = double_sum_field(4, 4, PITCH, FREQ, w.tolist(), theta, phi)
    scale = max(np.abs(w).sum(), 1e-300)
    assert abs(got - ref) <= 1e-10 * scale


def test_full_grid_matches_pointwise(small):
    rng = np.random.default_rng(0)
    w = rng.normal(size=(4, 4)) + 1j * rng.normal(size=(4, 4))
    pat = radiate(small, w, None, COARSE)
    for i in (0, 7, 45):
        for j in (0, 11, 35):
            ref = double_sum_field(4, 4, PITCH, FREQ, w.tolist(), pat.thetas[i], pat.phis[j])
            assert pat.field[i, j] == pytest.approx(ref, rel=1e-10)


def test_single_element_follows_cosine():
    g = ArrayGeometry(1, 1, PITCH, FREQ)
    pat = radiate(g, np.array([[np.exp(0.7j)]]), None, COARSE)
    expected = np.cos(np.radians(pat.thetas))[:, None]
    np.testing.assert_allclose(np.abs(pat.field), np.broadcast_to(expected, pat.field.shape), atol=1e-15)
    assert find_peak(pat)[0].theta == 0.0


@given(complex_4x4, complex_4x4, st.complex_numbers(max_magnitude=5), st.complex_numbers(max_magnitude=5))
def test_linearity(a, b, alpha, beta):
    g = ArrayGeometry(4, 4, PITCH, FREQ)
    grid = DirectionGrid(10.0, 30.0)
    lhs = radiate(g, alpha * a + beta * b, None, grid).field
    rhs = alpha * radiate(g, a, None, grid).field + beta * radiate(g, b, None, grid).field
    scale = (abs(alpha) * np.abs(a).sum() + abs(beta) * np.abs(b).sum()) + 1e-300
    assert np.max(np.abs(lhs - rhs)) <= 1e-12 * scale


def test_mirror_about_x_axis_mirrors_azimuth(small):
    rng = np.random.default_rng(1)
    w = rng.normal(size=(4, 4)) + 1j * rng.normal(size=(4, 4))
    p = radiate(small, w, None, COARSE)
    m = radiate(small, w[::-1, :], None, COARSE)
    # phi -> 360 - phi
    j_mirror = (-np.arange(p.phis.size)) % p.phis.size
    np.testing.assert_allclose(m.field, p.field[:, j_mirror], rtol=1e-12, atol=1e-12)


def test_symmetric_excitation_gives_symmetric_cut(ris20):
    pat = radiate(ris20, np.ones(ris20.shape), None, DirectionGrid(0.5, 1.0))
    for plane in ("E-plane", "H-plane", 45.0):
        cut = pattern_cut(pat, plane)
        assert cut.angles[0] == -90 and cut.angles[-1] == 90
        np.testing.assert_allclose(cut.db, cut.db[::-1], atol=1e-9)
        assert np.max(cut.db) == 0.0


def test_broadside_first_sidelobe(ris20):
    pat = radiate(ris20, np.ones(ris20.shape), None, DirectionGrid(0.5, 1.0), element_q=0)
    cut = pattern_cut(pat, "H-plane")
    pos = cut.angles > 7.2  # beyond the first null
    first = cut.db[pos][: int(8 / 0.5)].max()
    assert first == pytest.approx(-13.2, abs=0.3)


def test_steered_cut_peaks_at_30(ris20):
    pm = ideal_phase_profile(ris20, NORMAL, Direction(30, 90))
    pat = radiate(ris20, illuminate(ris20, NORMAL), pm)
    cut = pattern_cut(pat, "H-plane")
    assert cut.angles[np.argmax(cut.db)] == 30.0


def test_off_grid_azimuth_names_nearest(small):
    pat = radiate(small, np.ones((4, 4)), None, COARSE)
    with pytest.raises(ValueError, match="nearest available is 40"):
        pattern_cut(pat, 42.0)
    with pytest.raises(ValueError):
        pattern_cut(pat, "X-plane")


def test_rcs_uniform_normal_peaks_broadside(ris20):
    pat = rcs_response(ris20, Direction(0, 0), uniform_map(ris20, 1, ideal_states(2)))
    assert pat.mode == "rcs"
    assert find_peak(pat)[0].theta == 0.0


@pytest.mark.parametrize("bits, mirror_ratio_db", [(2, -10.0), (1, -3.0)])
def test_rcs_quantized_lobes(ris20, bits, mirror_ratio_db):
    steer = Direction(30, 90)
    q = quantize_phase_map(ideal_phase_profile(ris20, NORMAL, steer), ideal_states(bits))
    pat = rcs_response(ris20, Direction(0, 0), q)
    cut = pattern_cut(pat, "H-plane")
    at = lambda a: cut.db[np.argmin(np.abs(cut.angles - a))]  # noqa: E731
    main = cut.db[np.abs(cut.angles - 30) <= 3].max()
    mirror = cut.db[np.abs(cut.angles + 30) <= 3].max()
    if bits == 2:
        assert find_peak(pat)[0].theta == pytest.approx(30, abs=1.0)
        assert mirror - main <= mirror_ratio_db
    else:
        assert mirror - main >= mirror_ratio_db
    assert at(30) <= 0.0


def test_directivity_near_aperture_bound(ris20):
    pat = radiate(ris20, np.ones(ris20.shape), None)
    bound = aperture_directivity(ris20)
    assert bound == pytest.approx(29.030908087989875, abs=1e-9)
    assert abs(directivity(pat) - bound) <= 1.5
    assert directivity(pat, Direction(0, 0)) == pytest.approx(directivity(pat))


def test_grid_refinement(ris20):
    pm = ideal_phase_profile(ris20, NORMAL, Direction(20, 90))
    ex = illuminate(ris20, NORMAL)
    coarse = radiate(ris20, ex, pm, DirectionGrid(0.5, 1.0))
    fine = radiate(ris20, ex, pm, DirectionGrid(0.25, 0.5))
    assert abs(directivity(coarse) - directivity(fine)) < 0.05
    assert abs(find_peak(coarse)[1] - find_peak(fine)[1]) < 0.05


def test_bad_grid_rejected():
    with pytest.raises(ValueError):
        DirectionGrid(0.7, 1.0)
    with pytest.raises(ValueError):
        DirectionGrid(1.0, 0.0)


def test_pattern_rows_relative(small):
    pat = radiate(small, np.ones((4, 4)), None, COARSE)
    rows = list(pattern_rows(pat))
    assert len(rows) == pat.thetas.size * pat.phis.size
    assert max(r[4] for r in rows) == 0.0
    assert rows[0][:2] == [0.0, 0.0]


def test_pattern_shape_checked():
    with pytest.raises(ValueError):
        Pattern(np.zeros(3), np.zeros(4), np.zeros((4, 3)), FREQ)
