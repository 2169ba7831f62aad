"""Circular-orbit geometry: propagation, elevation, slant range and pass windows.

Conventions
-----------
* Earth is a sphere of radius ``EARTH_RADIUS_KM``; a site's ``altitude_m`` is
  added radially.
* The inertial x-axis coincides with the prime meridian at ``t = 0`` and the
  Earth turns at the sidereal rate ``EARTH_ROTATION_RAD_S``.
* Orbits are circular and Keplerian (no J2, no drag).
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.optimize import minimize_scalar

EARTH_RADIUS_KM = 6378.137
MU_EARTH_KM3_S2 = 398600.4418
EARTH_ROTATION_RAD_S = 7.2921159e-5

# Bisection stops once the bracket is narrower than step_s / BOUNDARY_REFINEMENT.
BOUNDARY_REFINEMENT = 100.0


@dataclass(frozen=True)
class GroundSite:
    latitude_deg: float
    longitude_deg: float
    altitude_m: float = 0.0

    def __post_init__(self):
        if not -90.0 <= self.latitude_deg <= 90.0:
            raise ValueError(f"latitude_deg out of range: {self.latitude_deg}")
        if not -180.0 <= self.longitude_deg <= 180.0:
            raise ValueError(f"longitude_deg out of range: {self.longitude_deg}")


@dataclass(frozen=True)
class Orbit:
    altitude_km: float
    inclination_deg: float = 0.0
    raan_deg: float = 0.0
    initial_anomaly_deg: float = 0.0
    epoch_s: float = 0.0

    def __post_init__(self):
        if not self.altitude_km > 0:
            raise ValueError(f"altitude_km must be positive: {self.altitude_km}")
        if not 0.0 <= self.inclination_deg <= 180.0:
            raise ValueError(f"inclination_deg out of range: {self.inclination_deg}")
        if not 0.0 <= self.raan_deg < 360.0:
            raise ValueError(f"raan_deg out of range: {self.raan_deg}")
        if not 0.0 <= self.initial_anomaly_deg < 360.0:
            raise ValueError(
                f"initial_anomaly_deg out of range: {self.initial_anomaly_deg}"
            )

    @property
    def radius_km(self) -> float:
        return EARTH_RADIUS_KM + self.altitude_km


@dataclass(frozen=True)
class VisibilityWindow:
    start_s: float
    end_s: float
    max_elevation_deg: float

    @property
    def duration_s(self) -> float:
        return self.end_s - self.start_s


def orbital_period(altitude_km: float) -> float:
    """Period in seconds of a circular orbit at ``altitude_km``."""
    if not altitude_km >= 0:
        raise ValueError(f"altitude_km must be nonnegative: {altitude_km}")
    a = EARTH_RADIUS_KM + altitude_km
    return 2.0 * math.pi * math.sqrt(a**3 / MU_EARTH_KM3_S2)


def propagate(orbit: Orbit, t_s):
    """ECI position (km) at time ``t_s``; accepts a scalar or an array of times.

    Returns shape ``(3,)`` for scalar input and ``(n, 3)`` for array input.
    """
    t = np.asarray(t_s, dtype=float)
    n = 2.0 * math.pi / orbital_period(orbit.altitude_km)
    u = math.radians(orbit.initial_anomaly_deg) + n * (t - orbit.epoch_s)
    inc = math.radians(orbit.inclination_deg)
    raan = math.radians(orbit.raan_deg)
    r = orbit.radius_km
    cu, su = np.cos(u), np.sin(u)
    x = r * (math.cos(raan) * cu - math.sin(raan) * su * math.cos(inc))
    y = r * (math.sin(raan) * cu + math.cos(raan) * su * math.cos(inc))
    z = r * su * math.sin(inc)
    return np.stack([x, y, z], axis=-1)


def site_position(site: GroundSite, t_s):
    """ECI position (km) of a ground site, rotating with the Earth."""
    t = np.asarray(t_s, dtype=float)
    lat = math.radians(site.latitude_deg)
    lon = math.radians(site.longitude_deg) + EARTH_ROTATION_RAD_S * t
    r = EARTH_RADIUS_KM + site.altitude_m / 1000.0
    return np.stack(
        [
            r * math.cos(lat) * np.cos(lon),
            r * math.cos(lat) * np.sin(lon),
            np.full_like(lon, r * math.sin(lat)),
        ],
        axis=-1,
    )


def _elevation_from_positions(sat, gnd):
    d = sat - gnd
    up = gnd / np.linalg.norm(gnd, axis=-1, keepdims=True)
    sin_el = np.sum(d * up, axis=-1) / np.linalg.norm(d, axis=-1)
    return np.degrees(np.arcsin(np.clip(sin_el, -1.0, 1.0)))


def elevation_deg(orbit: Orbit, site: GroundSite, t_s):
    """Geometric elevation of the satellite above the site's local horizon."""
    el = _elevation_from_positions(propagate(orbit, t_s), site_position(site, t_s))
    return float(el) if np.ndim(el) == 0 else el


def slant_range_km(orbit: Orbit, site: GroundSite, t_s):
    """Straight-line distance between satellite and site."""
    d = np.linalg.norm(propagate(orbit, t_s) - site_position(site, t_s), axis=-1)
    return float(d) if np.ndim(d) == 0 else d


def line_of_sight_clear(p1, p2, radius_km: float = EARTH_RADIUS_KM):
    """True where the segment p1-p2 does not pass through the sphere ``radius_km``.

    Works row-wise on ``(n, 3)`` arrays as well as on single vectors.
    """
    p1 = np.asarray(p1, dtype=float)
    p2 = np.asarray(p2, dtype=float)
    d = p2 - p1
    dd = np.sum(d * d, axis=-1)
    s = np.clip(-np.sum(p1 * d, axis=-1) / np.where(dd > 0, dd, 1.0), 0.0, 1.0)
    closest = p1 + s[..., None] * d
    return np.linalg.norm(closest, axis=-1) >= radius_km


def _refine_boundary(f, t_out: float, t_in: float, tol: float) -> float:
    # Invariant: f(t_in) is visible, f(t_out) is not; returns a visible instant.
    while abs(t_in - t_out) > tol:
        mid = 0.5 * (t_in + t_out)
        if f(mid):
            t_in = mid
        else:
            t_out = mid
    return t_in


def _scan_windows(el_fn, mask_deg, t0_s, t1_s, step_s):
    if not t1_s > t0_s:
        raise ValueError("t1_s must be greater than t0_s")
    if not step_s > 0:
        raise ValueError("step_s must be positive")
    times = np.arange(t0_s, t1_s, step_s)
    if times[-1] < t1_s:
        times = np.append(times, t1_s)
    el = el_fn(times)
    above = el >= mask_deg
    if not above.any():
        return [], times, el

    def visible(t):
        return el_fn(np.array([t]))[0] >= mask_deg

    tol = step_s / BOUNDARY_REFINEMENT
    edges = np.diff(above.astype(np.int8))
    rises = list(np.flatnonzero(edges == 1) + 1)
    falls = list(np.flatnonzero(edges == -1))
    if above[0]:
        rises.insert(0, 0)
    if above[-1]:
        falls.append(len(times) - 1)

    spans = []
    for i_start, i_end in zip(rises, falls):
        start = times[0] if i_start == 0 else _refine_boundary(
            visible, times[i_start - 1], times[i_start], tol
        )
        end = times[-1] if i_end == len(times) - 1 else _refine_boundary(
            visible, times[i_end + 1], times[i_end], tol
        )
        if end > start:
            spans.append((float(start), float(end), i_start, i_end))
    return spans, times, el


def _peak(el_fn, start, end, t_guess, step_s, sampled_max):
    lo, hi = max(start, t_guess - step_s), min(end, t_guess + step_s)
    if hi <= lo:
        return sampled_max
    res = minimize_scalar(
        lambda t: -el_fn(np.array([t]))[0],
        bounds=(lo, hi),
        method="bounded",
        options={"xatol": 1e-3},
    )
    return max(sampled_max, float(-res.fun))


def visibility_windows(
    orbit: Orbit,
    site: GroundSite,
    elevation_mask_deg: float,
    t0_s: float,
    t1_s: float,
    step_s: float = 1.0,
) -> list[VisibilityWindow]:
    """Maximal intervals in ``[t0_s, t1_s]`` with elevation at or above the mask.

    The timeline is scanned at ``step_s`` and each boundary is bisected to
    within ``step_s / 100``. A pass shorter than one step can be missed.
    """

    def el_fn(t):
        return np.atleast_1d(elevation_deg(orbit, site, t))

    spans, times, el = _scan_windows(el_fn, elevation_mask_deg, t0_s, t1_s, step_s)
    windows = []
    for start, end, i0, i1 in spans:
        seg = el[i0 : i1 + 1]
        k = int(np.argmax(seg))
        peak = _peak(el_fn, start, end, times[i0 + k], step_s, float(seg[k]))
        windows.append(VisibilityWindow(start, end, peak))
    return windows


def intersect_windows(
    a: list[VisibilityWindow], b: list[VisibilityWindow]
) -> list[tuple[float, float]]:
    """Pairwise intersection of two sorted, disjoint interval lists."""
    out = []
    i = j = 0
    while i < len(a) and j < len(b):
        lo = max(a[i].start_s, b[j].start_s)
        hi = min(a[i].end_s, b[j].end_s)
        if hi > lo:
            out.append((lo, hi))
        if a[i].end_s < b[j].end_s:
            i += 1
        else:
            j += 1
    return out


def dual_visibility_windows(
    orbit: Orbit,
    site_a: GroundSite,
    site_b: GroundSite,
    mask_deg: float,
    t0_s: float,
    t1_s: float,
    step_s: float = 1.0,
) -> list[VisibilityWindow]:
    """Intervals during which one satellite sees both sites above the mask.

    ``max_elevation_deg`` of a dual window is the peak of the lower of the two
    elevations, i.e. the best simultaneous geometry.
    """
    wa = visibility_windows(orbit, site_a, mask_deg, t0_s, t1_s, step_s)
    wb = visibility_windows(orbit, site_b, mask_deg, t0_s, t1_s, step_s)
    out = []
    for lo, hi in intersect_windows(wa, wb):
        n = max(3, int(math.ceil((hi - lo) / step_s)) + 1)
        ts = np.linspace(lo, hi, n)
        low = np.minimum(
            elevation_deg(orbit, site_a, ts), elevation_deg(orbit, site_b, ts)
        )
        out.append(VisibilityWindow(lo, hi, float(low.max())))
    return out


def max_ground_separation_km(altitude_km: float, elevation_mask_deg: float) -> float:
    """Largest great-circle distance between two sites a satellite can see at once.

    Both sites must be above ``elevation_mask_deg`` simultaneously, which
    bounds each site's Earth-central angle from the sub-satellite point.
    """
    if not altitude_km > 0:
        raise ValueError(f"altitude_km must be positive: {altitude_km}")
    if not 0.0 <= elevation_mask_deg < 90.0:
        raise ValueError(
            f"elevation_mask_deg must lie in [0, 90): {elevation_mask_deg}"
        )
    eps = math.radians(elevation_mask_deg)
    ratio = EARTH_RADIUS_KM * math.cos(eps) / (EARTH_RADIUS_KM + altitude_km)
    psi = math.acos(ratio) - eps
    return 2.0 * EARTH_RADIUS_KM * max(psi, 0.0)


def great_circle_km(a: GroundSite, b: GroundSite) -> float:
    """Surface distance between two sites on the spherical Earth."""
    la, lb = math.radians(a.latitude_deg), math.radians(b.latitude_deg)
    dlon = math.radians(b.longitude_deg - a.longitude_deg)
    c = math.sin(la) * math.sin(lb) + math.cos(la) * math.cos(lb) * math.cos(dlon)
    return EARTH_RADIUS_KM * math.acos(max(-1.0, min(1.0, c)))
