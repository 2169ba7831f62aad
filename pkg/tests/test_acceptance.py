"""Acceptance criteria, one test each, with a PASS/FAIL line per criterion.

Run with ``pytest tests/test_acceptance.py`` or directly as a script.
"""
import itertools
import math
import sys

import numpy as np
import pytest

from qinsim.linkbudget import (
    SECONDS_PER_CENTURY,
    channel_transmittance,
    expected_detections,
    fiber_transmittance,
    link_budget,
)
from qinsim.model import BsmParams, ChannelParams, EpsParams, MemoryParams, ScenarioId
from qinsim.orbit import (
    EARTH_RADIUS_KM,
    GroundSite,
    Orbit,
    dual_visibility_windows,
    max_ground_separation_km,
)
from qinsim.scenarios import tradeoff_table
from qinsim.sim import (
    SimConfig,
    direct_template,
    estimate_rate,
    fiber_chain,
    reference_chain,
    repeater_template,
    run_simulation,
    sweep_distance,
)
from qinsim.swapchain import ScalingModel, classify_scaling, memoryless_rate_hz


def _report(record, name, ok, detail):
    line = f"{'PASS' if ok else 'FAIL'}  {name}  {detail}"
    print(line)
    record(name, ok, detail)
    assert ok, line


def test_century_anchor(record):
    t = fiber_transmittance(1000.0, 0.2)
    n = expected_detections(1e10, t, SECONDS_PER_CENTURY)
    ok = abs(n - 0.3) <= 0.1 * 0.3 and n == pytest.approx(0.316, abs=0.02)
    _report(record, "1 century anchor", ok, f"{n:.4f} detections per century (target 0.3 +- 10%)")


def test_monte_carlo_matches_analytic(record):
    slots, batches = 10_000_000, 10
    cells = list(itertools.product((1, 2, 3), (0.05, 0.1, 0.3), (0.25, 0.5)))
    hits, worst = 0, 0.0
    for n, p, qv in cells:
        km = -10.0 * math.log10(p) / 0.2
        net, binding = fiber_chain([km] * n, bsm=BsmParams(qv))
        analytic = memoryless_rate_hz(reference_chain(net, binding))
        est = estimate_rate(net, binding, SimConfig(slots * 1e-9, 1e-9), batches,
                            engine="counts")
        z = abs(est.mean_rate_hz - analytic) / est.stderr_hz
        worst = max(worst, z)
        hits += z <= 3.0
    frac = hits / len(cells)
    _report(record, "2 monte carlo vs analytic", frac >= 0.95,
            f"{hits}/{len(cells)} cells within 3 SE (worst {worst:.2f} SE)")


def test_scaling_dichotomy(record):
    distances = [100.0 * k for k in range(1, 9)]
    direct = sweep_distance(direct_template(eps=EpsParams(1e10)), distances,
                            SimConfig(1e8, 1e-10), batches=4)
    fit_d = classify_scaling(distances, [r.rate_hz for r in direct])
    ok_d = (fit_d.model is ScalingModel.EXPONENTIAL
            and abs(fit_d.decay_db_per_km - 0.2) <= 0.05 * 0.2)

    memory = MemoryParams()
    template = repeater_template(100.0, repeater_memory=memory, user_memory=memory,
                                 strategy="nested")
    repeated = sweep_distance(template, distances, SimConfig(1e-3, 1e-9), batches=4)
    fit_r = classify_scaling(distances, [r.rate_hz for r in repeated])
    ok_r = fit_r.model is ScalingModel.POLYNOMIAL
    _report(record, "3 scaling dichotomy", ok_d and ok_r,
            f"direct {fit_d.model.value} at {fit_d.decay_db_per_km:.4f} dB/km; "
            f"repeater {fit_r.model.value} with exponent {fit_r.exponent:.2f}")


def _separated(distance_km, bearing):
    # second site at ``distance_km`` from (0, 0) along the equator or a meridian
    angle = math.degrees(distance_km / EARTH_RADIUS_KM)
    return GroundSite(0.0, angle) if bearing == "east" else GroundSite(angle, 0.0)


def test_dual_visibility_geometry(record):
    bound = max_ground_separation_km(1000.0, 0.0)
    ok_bound = abs(bound - 6733.0) <= 10.0

    site_a = GroundSite(0.0, 0.0)
    span, step = 2 * 86400.0, 10.0
    phasings = [
        Orbit(1000.0, inc, raan, anomaly)
        for inc in (0.0, 45.0, 90.0, 135.0)
        for raan in (0.0, 90.0, 180.0, 270.0)
        for anomaly in (0.0, 120.0, 240.0)
    ]
    leaks = 0
    for bearing in ("east", "north"):
        far = _separated(1.1 * bound, bearing)
        for orbit in phasings:
            leaks += bool(dual_visibility_windows(orbit, site_a, far, 0.0, 0.0, span, step))
    ok_far = leaks == 0

    near = _separated(0.5 * bound, "east")
    ok_near = any(
        dual_visibility_windows(orbit, site_a, near, 0.0, 0.0, span, step)
        for orbit in phasings
    )
    _report(record, "4 dual visibility", ok_bound and ok_far and ok_near,
            f"bound {bound:.1f} km (expected 6733 +- 10); "
            f"{leaks} dual windows at 110% over {2 * len(phasings)} phasings; "
            f"windows at 50%: {ok_near}")


def test_tradeoff_table(record):
    got = {r.scenario: (r.complexity_1to5, r.interest_1to5) for r in tradeoff_table()}
    want = {
        ScenarioId.S1B: (2, 5),
        ScenarioId.S2: (4, 3),
        ScenarioId.S3A: (4, 5),
        ScenarioId.S3B: (4, 4),
        ScenarioId.S4: (5, 2),
    }
    _report(record, "5 trade-off table", got == want and len(tradeoff_table()) == 5,
            ", ".join(f"{k.value}={v}" for k, v in got.items()))


def test_channel_rules(record):
    rng = np.random.default_rng(20261015)
    cases = 10_000
    violations = []
    for k in range(cases):
        ground_ap, space_ap = rng.uniform(0.05, 2.0, 2)
        down_db = rng.uniform(0.0, 20.0)
        up_db = down_db + rng.uniform(0.0, 20.0)
        extra = dict(
            wavelength_m=rng.uniform(400e-9, 2000e-9),
            pointing_loss_db=rng.uniform(0.0, 5.0),
            system_loss_db=rng.uniform(0.0, 5.0),
            detector_efficiency=rng.uniform(0.0, 1.0),
        )
        d1, d2 = np.sort(rng.uniform(0.1, 40_000.0, 2))
        alpha = rng.uniform(0.0, 1.0)
        fiber = ChannelParams("fiber", fiber_alpha_db_per_km=alpha,
                              system_loss_db=extra["system_loss_db"],
                              detector_efficiency=extra["detector_efficiency"])
        isl = ChannelParams("qoisl", tx_aperture_m=space_ap, rx_aperture_m=space_ap,
                            atmospheric_penalty_db=rng.uniform(0.0, 30.0), **extra)
        down = ChannelParams("downlink", tx_aperture_m=space_ap, rx_aperture_m=ground_ap,
                             atmospheric_penalty_db=down_db, **extra)
        up = ChannelParams("uplink", tx_aperture_m=ground_ap, rx_aperture_m=space_ap,
                           atmospheric_penalty_db=up_db, **extra)

        def t(ch, d):
            if ch.kind.value == "fiber":
                return float(channel_transmittance(ch, length_km=d))
            return float(channel_transmittance(ch, range_km=d))

        for ch in (fiber, isl, down, up):
            a, b = t(ch, d1), t(ch, d2)
            if not (0.0 <= a <= 1.0 and 0.0 <= b <= 1.0):
                violations.append((k, ch.kind.value, "range"))
            if b > a:
                violations.append((k, ch.kind.value, "monotonicity"))
        if link_budget(isl, range_km=d1).atmospheric_db != 0.0:
            violations.append((k, "qoisl", "atmosphere"))
        if t(up, d1) > t(down, d1):
            violations.append((k, "uplink", "above downlink"))
    _report(record, "6 channel rules", not violations,
            f"{cases} random draws, {len(violations)} violations")


def test_determinism(record):
    km = -10.0 * math.log10(0.1) / 0.2
    net, binding = fiber_chain([km])
    slots = 100_000
    same = all(
        run_simulation(net, binding, SimConfig(slots * 1e-9, 1e-9, 42), engine=engine)
        == run_simulation(net, binding, SimConfig(slots * 1e-9, 1e-9, 42), engine=engine)
        for engine in ("counts", "events")
    )
    seeds = 200
    counts = np.array([
        run_simulation(net, binding, SimConfig(slots * 1e-9, 1e-9, s)).e2e_successes
        for s in range(seeds)
    ])
    sigma = math.sqrt(slots * 0.1 * 0.9)
    spread = counts.std(ddof=1)
    # standard error of a sample standard deviation
    tol = 3.0 * sigma / math.sqrt(2.0 * (seeds - 1))
    ok = same and abs(spread - sigma) <= tol and abs(counts.mean() - 10_000) <= 3 * sigma / math.sqrt(seeds)
    _report(record, "7 determinism", ok,
            f"identical reruns: {same}; spread {spread:.1f} vs {sigma:.1f} +- {tol:.1f}")


if __name__ == "__main__":
    sys.exit(pytest.main([__file__, "-q", "-s", "-p", "no:cacheprovider"]))
