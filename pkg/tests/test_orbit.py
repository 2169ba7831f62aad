import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from qinsim.orbit import (
    EARTH_RADIUS_KM,
    EARTH_ROTATION_RAD_S,
    GroundSite,
    Orbit,
    dual_visibility_windows,
    elevation_deg,
    great_circle_km,
    intersect_windows,
    line_of_sight_clear,
    max_ground_separation_km,
    orbital_period,
    propagate,
    slant_range_km,
    visibility_windows,
)
from qinsim.scenarios import overhead_orbit

# Sampling oracle over the sub-satellite geometry, 2e6 central angles in [0, pi/2].
SAMPLED_MAX_SEPARATION_KM = {
    (1000.0, 0.0): 6718.877109962375,
    (500.0, 10.0): 3127.2038332882603,
    (1000.0, 10.0): 4818.620006273957,
    (2000.0, 20.0): 5415.968186235019,
}


def oracle_elevation(orbit, site, t):
    """Elevation via an Earth-fixed frame and an explicit east-north-up basis."""
    sat_eci = propagate(orbit, t)
    theta = EARTH_ROTATION_RAD_S * t
    rot = np.array([[math.cos(theta), math.sin(theta), 0.0],
                    [-math.sin(theta), math.cos(theta), 0.0],
                    [0.0, 0.0, 1.0]])
    sat = rot @ sat_eci
    lat, lon = math.radians(site.latitude_deg), math.radians(site.longitude_deg)
    r = EARTH_RADIUS_KM + site.altitude_m / 1000
    gnd = r * np.array([math.cos(lat) * math.cos(lon), math.cos(lat) * math.sin(lon),
                        math.sin(lat)])
    east = np.array([-math.sin(lon), math.cos(lon), 0.0])
    north = np.array([-math.sin(lat) * math.cos(lon), -math.sin(lat) * math.sin(lon),
                      math.cos(lat)])
    up = np.cross(east, north)
    d = sat - gnd
    e, n, u = d @ east, d @ north, d @ up
    return math.degrees(math.atan2(u, math.hypot(e, n)))


def test_period_examples():
    assert orbital_period(0.0) == pytest.approx(5069.34, abs=1.0)
    assert orbital_period(1000.0) == pytest.approx(6307.12, abs=2.0)
    with pytest.raises(ValueError):
        orbital_period(-1.0)


@given(st.floats(0, 40000), st.floats(0, 40000))
def test_period_increasing(h1, h2):
    if h1 < h2:
        assert orbital_period(h1) < orbital_period(h2)


def test_orbit_validation():
    with pytest.raises(ValueError):
        Orbit(0.0)
    with pytest.raises(ValueError):
        Orbit(500, raan_deg=360.0)
    with pytest.raises(ValueError):
        GroundSite(91, 0)


def test_propagate_basics():
    o = Orbit(700, inclination_deg=53, raan_deg=40, initial_anomaly_deg=10, epoch_s=100)
    p0 = propagate(o, 100.0)
    assert propagate(o, 100.0 + orbital_period(700)) == pytest.approx(p0, rel=1e-6)
    eq = Orbit(700)
    assert np.all(propagate(eq, np.linspace(0, 1e4, 50))[:, 2] == 0)
    assert propagate(Orbit(700), 0.0) == pytest.approx([EARTH_RADIUS_KM + 700, 0, 0])


@settings(max_examples=100, deadline=None)
@given(h=st.floats(160, 36000), inc=st.floats(0, 180), raan=st.floats(0, 359.9),
       nu=st.floats(0, 359.9), t=st.floats(-1e6, 1e6))
def test_radius_is_constant(h, inc, raan, nu, t):
    o = Orbit(h, inc, raan, nu)
    assert np.linalg.norm(propagate(o, t)) == pytest.approx(EARTH_RADIUS_KM + h, rel=1e-6)


def test_zenith_and_antipode():
    site = GroundSite(0.0, 0.0)
    assert elevation_deg(Orbit(1000), site, 0.0) == pytest.approx(90.0, abs=0.1)
    assert slant_range_km(Orbit(1000), site, 0.0) == pytest.approx(1000.0, abs=1.0)
    assert elevation_deg(Orbit(1000, initial_anomaly_deg=180), site, 0.0) < 0


def test_overhead_orbit_for_any_latitude():
    for lat, lon in [(45.0, 7.0), (-33.0, 151.0), (0.0, -120.0)]:
        site = GroundSite(lat, lon)
        assert elevation_deg(overhead_orbit(site, 600), site, 0.0) == pytest.approx(90, abs=0.1)


def test_elevation_matches_oracle_over_a_period():
    o = Orbit(800, inclination_deg=60, raan_deg=30, initial_anomaly_deg=5)
    site = GroundSite(40.0, 20.0, 300.0)
    ts = np.arange(0.0, orbital_period(800), 1.0)
    ours = elevation_deg(o, site, ts)
    oracle = np.array([oracle_elevation(o, site, t) for t in ts[::7]])
    assert np.max(np.abs(ours[::7] - oracle)) < 0.01


@settings(max_examples=100, deadline=None)
@given(h=st.floats(200, 20000), inc=st.floats(0, 180), nu=st.floats(0, 359),
       lat=st.floats(-89, 89), lon=st.floats(-180, 180), t=st.floats(0, 1e5))
def test_slant_range_law_of_cosines(h, inc, nu, lat, lon, t):
    o = Orbit(h, inc, 0.0, nu)
    site = GroundSite(lat, lon)
    from qinsim.orbit import site_position

    sat, gnd = propagate(o, t), site_position(site, t)
    a = EARTH_RADIUS_KM + h
    cos_psi = sat @ gnd / (a * EARTH_RADIUS_KM)
    oracle = math.sqrt(EARTH_RADIUS_KM**2 + a**2 - 2 * EARTH_RADIUS_KM * a * cos_psi)
    assert slant_range_km(o, site, t) == pytest.approx(oracle, rel=1e-6)
    assert elevation_deg(o, site, t) == pytest.approx(oracle_elevation(o, site, t), abs=1e-6)


def test_horizon_range_exceeds_zenith_range():
    o = Orbit(1000)
    site = GroundSite(0, 0)
    ts = np.arange(0, 2000.0, 0.5)
    el = elevation_deg(o, site, ts)
    rng = slant_range_km(o, site, ts)
    near_horizon = np.argmin(np.abs(el))
    assert rng[near_horizon] > rng[0]


def test_mask_above_zenith_and_polar_site():
    o = Orbit(500)
    assert visibility_windows(o, GroundSite(0, 0), 90.1, 0, 20000) == []
    polar = GroundSite(89.0, 0.0)
    assert visibility_windows(o, polar, 10.0, 0, 20000) == []
    ts = np.arange(0, 20000.0, 1.0)
    assert elevation_deg(o, polar, ts).max() < 10.0


def test_windows_cover_exactly_the_visible_samples():
    o = Orbit(550, inclination_deg=53, raan_deg=10)
    site = GroundSite(45, 10)
    step = 1.0
    windows = visibility_windows(o, site, 10.0, 0.0, 86400.0, step)
    assert windows
    starts = [w.start_s for w in windows]
    assert starts == sorted(starts)
    for w1, w2 in zip(windows, windows[1:]):
        assert w1.end_s < w2.start_s
    ts = np.arange(0.0, 86400.0, step)
    above = elevation_deg(o, site, ts) >= 10.0
    inside = np.zeros_like(above)
    for w in windows:
        inside |= (ts >= w.start_s) & (ts <= w.end_s)
        assert w.max_elevation_deg >= 10.0
        assert elevation_deg(o, site, w.start_s) >= 10.0 - 1e-9
        assert elevation_deg(o, site, w.end_s) >= 10.0 - 1e-9
    assert np.array_equal(inside, above)


def test_windows_stable_under_halving_step():
    o = Orbit(550, inclination_deg=53, raan_deg=10)
    site = GroundSite(45, 10)
    coarse = visibility_windows(o, site, 10.0, 0.0, 43200.0, 2.0)
    fine = visibility_windows(o, site, 10.0, 0.0, 43200.0, 1.0)
    assert len(coarse) == len(fine)
    for a, b in zip(coarse, fine):
        assert abs(a.start_s - b.start_s) < 2.0
        assert abs(a.end_s - b.end_s) < 2.0


def test_dual_windows_symmetric_and_self():
    o = Orbit(1000)
    a, b = GroundSite(0, 0), GroundSite(0, 20)
    ab = dual_visibility_windows(o, a, b, 0.0, 0, 20000, 2.0)
    ba = dual_visibility_windows(o, b, a, 0.0, 0, 20000, 2.0)
    assert [(w.start_s, w.end_s) for w in ab] == [(w.start_s, w.end_s) for w in ba]
    single = visibility_windows(o, a, 0.0, 0, 20000, 2.0)
    self_dual = dual_visibility_windows(o, a, a, 0.0, 0, 20000, 2.0)
    assert [(w.start_s, w.end_s) for w in self_dual] == [(w.start_s, w.end_s) for w in single]


def test_intersect_windows():
    from qinsim.orbit import VisibilityWindow as W

    a = [W(0, 10, 20), W(20, 30, 20)]
    b = [W(5, 25, 20)]
    assert intersect_windows(a, b) == [(5, 10), (20, 25)]
    assert intersect_windows(b, a) == [(5, 10), (20, 25)]


@pytest.mark.parametrize("key", sorted(SAMPLED_MAX_SEPARATION_KM))
def test_max_separation_matches_sampling_oracle(key):
    h, mask = key
    assert max_ground_separation_km(h, mask) == pytest.approx(
        SAMPLED_MAX_SEPARATION_KM[key], abs=0.05
    )


def test_max_separation_limits():
    assert max_ground_separation_km(1e-9, 0.0) == pytest.approx(0.0, abs=1.0)
    assert max_ground_separation_km(1000, 89.99) == pytest.approx(0.0, abs=5.0)
    with pytest.raises(ValueError):
        max_ground_separation_km(1000, 90.0)
    with pytest.raises(ValueError):
        max_ground_separation_km(0.0, 0.0)


@given(st.floats(100, 30000), st.floats(100, 30000), st.floats(0, 80))
def test_max_separation_monotone(h1, h2, mask):
    lo, hi = sorted((h1, h2))
    assert max_ground_separation_km(lo, mask) <= max_ground_separation_km(hi, mask)
    assert max_ground_separation_km(hi, mask) >= max_ground_separation_km(hi, mask + 5)


def test_great_circle():
    assert great_circle_km(GroundSite(0, 0), GroundSite(0, 90)) == pytest.approx(
        math.pi / 2 * EARTH_RADIUS_KM
    )


def test_line_of_sight():
    r = EARTH_RADIUS_KM + 500
    c, s = math.cos(math.radians(30)), math.sin(math.radians(30))
    assert line_of_sight_clear([r, 0, 0], [r * c, r * s, 0])
    assert not line_of_sight_clear([r, 0, 0], [0, r, 0])
    assert not line_of_sight_clear([r, 0, 0], [-r, 0, 0])
