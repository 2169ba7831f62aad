"""Satellite entanglement-distribution architectures S1a to S4.

Each builder lays one repeater chain over a small network of ground sites and
satellites. Unless given explicitly, satellites sit on circular orbits chosen
so that each one is directly overhead its target point at ``t = 0``, which
makes a simulation window centred on zero cover the best part of the pass.

The qualitative scores and pros/cons of each architecture are static data
(:func:`tradeoff_table`, :data:`SATELLITE_ARCHITECTURES`); they are never
simulated.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import Mapping

import numpy as np

from .model import (
    BsmParams,
    ChannelParams,
    EpsParams,
    Link,
    LinkKind,
    MemoryParams,
    Network,
    Node,
    NodeId,
    NodeKind,
    ScenarioId,
    validate_network,
)
from .orbit import (
    EARTH_RADIUS_KM,
    GroundSite,
    Orbit,
    great_circle_km,
    max_ground_separation_km,
)
from .sim import (
    ChainBinding,
    Segment,
    SimConfig,
    estimate_rate,
    reference_chain,
)
from .swapchain import ChainConfig, SwapSchedule

NOT_SCORED = "not scored in paper"


class ScenarioError(ValueError):
    """Parameters that cannot produce the requested architecture."""


class DualVisibilityError(ScenarioError):
    """Two ground nodes served by one satellite are too far apart to be seen together."""


# -- trade-off metadata ----------------------------------------------------------


@dataclass(frozen=True)
class TradeoffRecord:
    scenario: ScenarioId
    complexity_1to5: int | None
    interest_1to5: int | None
    pros: tuple[str, ...] = ()
    cons: tuple[str, ...] = ()
    note: str = ""

    def __post_init__(self):
        object.__setattr__(self, "scenario", ScenarioId(self.scenario))
        for name in ("complexity_1to5", "interest_1to5"):
            score = getattr(self, name)
            if score is not None and not 1 <= score <= 5:
                raise ValueError(f"{name} must lie in 1..5, got {score}")

    @property
    def scored(self) -> bool:
        return self.complexity_1to5 is not None


_QOISL_PROS = (
    "QOISL allows a better link budget than space-to-ground link "
    "(with atmospheric impairments)",
    "QOISL allows for an extension into a satellite constellation",
    "QOISL telescopes could be smaller than space-to-ground telescope",
    "Reuse of existing OISL telescopes",
)
_BSM_PAYLOAD_CONS = (
    "Photonic equipment never realized, for the BSM payload",
    "Higher technological complexity for the BSM module",
    "Involves space quantum memory and stringent time-synchronization, for BSM",
    "Involves space single photon detectors",
)

_TABLE = (
    TradeoffRecord(
        ScenarioId.S1B, 2, 5,
        pros=(
            "Downlink has lower losses compared to uplink",
            "Photonic equipment feasible (see [1][2])",
            "Medium technological complexity",
            "No space quantum memory (for scenario 1 b))",
            "No BSM",
            "Space single photon detectors are not mandatory "
            "(except maybe for source health monitoring)",
        ),
        cons=(
            "Requires two large telescopes on-board the satellite",
            "Requires pointing toward two ground stations simultaneously",
            "Involve two space-to-ground links",
            "Involve space quantum memory for scenario 1 a)",
        ),
    ),
    TradeoffRecord(
        ScenarioId.S2, 4, 3,
        pros=("Allows the entanglement of remote photons at large distances",),
        cons=(
            "Requires two large receiving telescopes on-board the satellite",
            "Requires pointing toward two ground stations simultaneously",
            "Involve two ground-to-space links",
            "Uplink has higher losses compared to downlink",
            "Photonic equipment never realized in space",
            "Higher technological complexity: involves space quantum memory and "
            "stringent time-synchronization",
            "Involves space single photon detectors",
        ),
    ),
    TradeoffRecord(
        ScenarioId.S3A, 4, 5,
        pros=_QOISL_PROS,
        cons=("Space sources & space BSM to be synchronized",)
        + _BSM_PAYLOAD_CONS
        + (
            "Requires pointing toward a ground stations and a satellite "
            "simultaneously, or two satellites",
        ),
    ),
    TradeoffRecord(
        ScenarioId.S3B, 4, 4,
        pros=_QOISL_PROS + ("Only one QOISL to be managed in this configuration",),
        cons=("Space and ground sources & space BSM to be synchronized",)
        + _BSM_PAYLOAD_CONS
        + (
            "Requires pointing toward a ground stations and a satellite simultaneously",
            "Involves an uplink. Uplink has higher losses compared to downlink",
        ),
    ),
    TradeoffRecord(
        ScenarioId.S4, 5, 2,
        pros=_QOISL_PROS
        + ("Only one QOISL to be managed in this configuration", "No uplink involved"),
        cons=("Space source & BSM to be synchronized",)
        + _BSM_PAYLOAD_CONS
        + ("Requires pointing toward a ground stations and a satellite simultaneously",),
    ),
)


def tradeoff_table() -> list[TradeoffRecord]:
    """The five scored architectures with their complexity and interest out of 5."""
    return list(_TABLE)


def tradeoff_record(scenario: ScenarioId | str) -> TradeoffRecord:
    """Record for any scenario; unscored ones carry ``None`` scores and a note."""
    scenario = ScenarioId(scenario)
    for record in _TABLE:
        if record.scenario is scenario:
            return record
    return TradeoffRecord(scenario, None, None, note=NOT_SCORED)


@dataclass(frozen=True)
class ArchitectureNotes:
    name: str
    node_kinds: tuple[NodeKind, ...]
    pros: tuple[str, ...]
    cons: tuple[str, ...]


SATELLITE_ARCHITECTURES = {
    "specific": ArchitectureNotes(
        "Specific satellite",
        (NodeKind.SATELLITE_SOURCE, NodeKind.SATELLITE_REPEATER),
        pros=(
            "Relatively low size, weight and power",
            "Low design complexity (compared to hybrid satellites)",
        ),
        cons=(
            "Complex constellation layout: two adjacent repeater satellites are "
            "useless without a source satellite in-between",
            "Must be compatible with non-QOISL uses: if downlink configuration, no "
            "entanglement distribution possible if the only satellite available to "
            "connect two ground stations is a quantum repeater",
        ),
    ),
    "hybrid": ArchitectureNotes(
        "Hybrid satellite",
        (NodeKind.SATELLITE_HYBRID,),
        pros=(
            "Dynamic adaptation to network needs",
            "No specific arrangement of satellites in the constellation",
            "May require less satellites in the constellation",
        ),
        cons=(
            "Higher complexity to integrate both functions onboard a single satellite",
            "Higher size, weight, power and cost",
        ),
    ),
}


# -- parameters --------------------------------------------------------------------

DEFAULT_SITE_A = GroundSite(0.0, 0.0)
DEFAULT_SITE_B = GroundSite(0.0, math.degrees(1200.0 / EARTH_RADIUS_KM))

SATELLITE_COUNT = {
    ScenarioId.S1A: 1,
    ScenarioId.S1B: 1,
    ScenarioId.S1C: 1,
    ScenarioId.S1D: 2,
    ScenarioId.S2: 1,
    ScenarioId.S3A: 3,
    ScenarioId.S3B: 2,
    ScenarioId.S4: 2,
}


def default_channels(
    ground_aperture_m: float = 1.0,
    space_aperture_m: float = 0.3,
    downlink_penalty_db: float = 3.0,
    uplink_penalty_db: float = 10.0,
) -> dict[LinkKind, ChannelParams]:
    return {
        LinkKind.FIBER: ChannelParams(LinkKind.FIBER),
        LinkKind.DOWNLINK: ChannelParams(
            LinkKind.DOWNLINK,
            tx_aperture_m=space_aperture_m,
            rx_aperture_m=ground_aperture_m,
            atmospheric_penalty_db=downlink_penalty_db,
        ),
        LinkKind.UPLINK: ChannelParams(
            LinkKind.UPLINK,
            tx_aperture_m=ground_aperture_m,
            rx_aperture_m=space_aperture_m,
            atmospheric_penalty_db=uplink_penalty_db,
        ),
        LinkKind.QOISL: ChannelParams(
            LinkKind.QOISL, tx_aperture_m=space_aperture_m, rx_aperture_m=space_aperture_m
        ),
    }


@dataclass(frozen=True)
class ScenarioParams:
    """Sites, orbits and hardware shared by every architecture.

    ``orbits`` is either empty (orbits are placed automatically at
    ``altitude_km``) or lists exactly as many orbits as the scenario has
    satellites, in the order the builder names them ``sat1``, ``sat2``, ...
    ``node_overrides`` maps a node id to replacement values for ``eps``,
    ``bsm`` or ``memory``.
    """

    site_a: GroundSite = DEFAULT_SITE_A
    site_b: GroundSite = DEFAULT_SITE_B
    repeater_site: GroundSite | None = None
    repeater_fiber_km: float = 50.0
    orbits: tuple[Orbit, ...] = ()
    altitude_km: float = 500.0
    space_eps: EpsParams | None = field(default_factory=lambda: EpsParams(1e6))
    ground_eps: EpsParams | None = field(default_factory=lambda: EpsParams(1e6))
    bsm: BsmParams = field(default_factory=BsmParams)
    user_memory: MemoryParams | None = None
    repeater_memory: MemoryParams | None = None
    space_memory: MemoryParams | None = field(default_factory=MemoryParams)
    node_overrides: Mapping[NodeId, Mapping[str, object]] = field(default_factory=dict)
    channels: Mapping[LinkKind, ChannelParams] = field(default_factory=default_channels)
    ground_aperture_m: float = 1.0
    space_aperture_m: float = 0.3
    elevation_mask_deg: float = 10.0
    local_fiber_km: float = 1.0
    integrated_payload: bool | None = None
    hybrid_satellites: bool = False
    classical_heralding_latency_s: float = 0.0

    def __post_init__(self):
        object.__setattr__(self, "orbits", tuple(self.orbits))
        object.__setattr__(
            self, "channels", {LinkKind(k): v for k, v in self.channels.items()}
        )
        for kind, channel in self.channels.items():
            if channel.kind is not kind:
                raise ScenarioError(f"channel default for {kind.value} has kind {channel.kind.value}")
        if not self.altitude_km > 0:
            raise ScenarioError("altitude_km must be positive")
        if not self.local_fiber_km > 0 or not self.repeater_fiber_km > 0:
            raise ScenarioError("fiber lengths must be positive")


@dataclass(frozen=True)
class BuiltScenario:
    scenario: ScenarioId
    network: Network
    binding: ChainBinding
    chain: ChainConfig
    integrated_payload: bool

    @property
    def schedule(self) -> SwapSchedule | None:
        return self.binding.schedule


# -- geometry helpers ---------------------------------------------------------------


def _unit(site: GroundSite) -> np.ndarray:
    lat, lon = math.radians(site.latitude_deg), math.radians(site.longitude_deg)
    return np.array([math.cos(lat) * math.cos(lon), math.cos(lat) * math.sin(lon), math.sin(lat)])


def _site(v: np.ndarray) -> GroundSite:
    v = v / np.linalg.norm(v)
    lat = math.degrees(math.asin(max(-1.0, min(1.0, float(v[2])))))
    lon = math.degrees(math.atan2(float(v[1]), float(v[0])))
    return GroundSite(lat, lon)


def toward(a: GroundSite, b: GroundSite, distance_km: float) -> GroundSite:
    """Point ``distance_km`` from ``a`` along the great circle to ``b``."""
    ua, ub = _unit(a), _unit(b)
    total = math.acos(max(-1.0, min(1.0, float(ua @ ub))))
    if total == 0.0:
        return a
    f = distance_km / EARTH_RADIUS_KM / total
    return _site(math.sin((1 - f) * total) * ua + math.sin(f * total) * ub)


def midpoint(a: GroundSite, b: GroundSite) -> GroundSite:
    return toward(a, b, great_circle_km(a, b) / 2.0)


def overhead_orbit(site: GroundSite, altitude_km: float) -> Orbit:
    """Circular orbit whose satellite is at the zenith of ``site`` at ``t = 0``.

    The site must be the orbit's northernmost (or southernmost) point unless
    it lies on the equator, so the inclination equals ``|latitude|``.
    """
    lat, lon = site.latitude_deg, site.longitude_deg
    if lat == 0.0:
        return Orbit(altitude_km, 0.0, 0.0, lon % 360.0)
    if lat > 0:
        return Orbit(altitude_km, lat, (lon - 90.0) % 360.0, 90.0)
    return Orbit(altitude_km, -lat, (lon + 90.0) % 360.0, 270.0)


# -- builders -----------------------------------------------------------------------


class _Builder:
    def __init__(self, scenario: ScenarioId, params: ScenarioParams):
        self.scenario = scenario
        self.params = params
        self.nodes: dict[NodeId, Node] = {}
        self.links: list[Link] = []
        self.sat_count = 0
        expected = SATELLITE_COUNT[scenario]
        if params.orbits and len(params.orbits) != expected:
            raise ScenarioError(
                f"{scenario.value} needs {expected} orbit(s), got {len(params.orbits)}"
            )

    def ground(self, node_id, kind, site, **equipment):
        p = self.params
        if kind is NodeKind.GROUND_USER:
            equipment.setdefault("memory", p.user_memory)
        elif kind is NodeKind.GROUND_REPEATER:
            equipment.setdefault("memory", p.repeater_memory)
        self._add(Node(node_id, kind, site=site, telescope_aperture_m=p.ground_aperture_m,
                       **equipment))
        return node_id

    def satellite(self, kind, target: GroundSite, **equipment):
        p = self.params
        self.sat_count += 1
        node_id = f"sat{self.sat_count}"
        if p.orbits:
            orbit = p.orbits[self.sat_count - 1]
        else:
            orbit = overhead_orbit(target, p.altitude_km)
        if p.hybrid_satellites and kind is not NodeKind.SATELLITE_HYBRID:
            kind = NodeKind.SATELLITE_HYBRID
            equipment.setdefault("eps", p.space_eps)
            equipment.setdefault("bsm", p.bsm)
        if kind in (NodeKind.SATELLITE_REPEATER, NodeKind.SATELLITE_HYBRID):
            equipment.setdefault("memory", p.space_memory)
        self._add(Node(node_id, kind, orbit=orbit,
                       telescope_aperture_m=p.space_aperture_m, **equipment))
        return node_id

    def _add(self, node):
        overrides = self.params.node_overrides.get(node.id)
        if overrides:
            node = replace(node, **dict(overrides))
        self.nodes[node.id] = node

    def link(self, a, b, kind, length_km=None):
        self.links.append(Link(a, b, self.params.channels[kind], length_km))
        return (a, b)

    def finish(self, segments, end_users) -> BuiltScenario:
        p = self.params
        network = Network(
            tuple(self.nodes.values()),
            tuple(self.links),
            p.classical_heralding_latency_s,
            end_users,
            p.elevation_mask_deg,
        )
        problems = validate_network(network)
        if problems:
            raise ScenarioError(
                f"{self.scenario.value} network is invalid: " + "; ".join(problems)
            )
        _check_dual_visibility(network)
        binding = ChainBinding(tuple(segments))
        integrated = (
            self.scenario is ScenarioId.S4
            if p.integrated_payload is None
            else p.integrated_payload
        )
        return BuiltScenario(
            self.scenario, network, binding, reference_chain(network, binding), integrated
        )


def _check_dual_visibility(network: Network) -> None:
    served: dict[NodeId, list[NodeId]] = {}
    for link in network.links:
        if link.kind in (LinkKind.DOWNLINK, LinkKind.UPLINK):
            sat, gnd = (link.a, link.b) if link.kind is LinkKind.DOWNLINK else (link.b, link.a)
            served.setdefault(sat, []).append(gnd)
    for sat, grounds in served.items():
        limit = max_ground_separation_km(
            network.node(sat).orbit.altitude_km, network.elevation_mask_deg
        )
        for i, g1 in enumerate(grounds):
            for g2 in grounds[i + 1:]:
                sep = great_circle_km(network.node(g1).site, network.node(g2).site)
                if sep > limit:
                    raise DualVisibilityError(
                        f"{sat} serves {g1} and {g2}, {sep:.1f} km apart, but can see "
                        f"two sites at most {limit:.1f} km apart at mask "
                        f"{network.elevation_mask_deg} deg"
                    )


def _require(value, what, scenario):
    if value is None:
        raise ScenarioError(f"{scenario.value} requires {what}")
    return value


def _s1a(b: _Builder):
    p = b.params
    eps = _require(p.space_eps, "space_eps", b.scenario)
    memory = _require(p.space_memory, "space_memory on board", b.scenario)
    user = b.ground("user_a", NodeKind.GROUND_USER, p.site_a)
    sat = b.satellite(NodeKind.SATELLITE_SOURCE, p.site_a, eps=eps, memory=memory)
    arm = b.link(sat, user, LinkKind.DOWNLINK)
    return [Segment(sat, sat, user, (arm,))], (sat, user)


def _s1b(b: _Builder):
    p = b.params
    eps = _require(p.space_eps, "space_eps", b.scenario)
    ua = b.ground("user_a", NodeKind.GROUND_USER, p.site_a)
    ub = b.ground("user_b", NodeKind.GROUND_USER, p.site_b)
    sat = b.satellite(NodeKind.SATELLITE_SOURCE, midpoint(p.site_a, p.site_b), eps=eps)
    arms = (b.link(sat, ua, LinkKind.DOWNLINK), b.link(sat, ub, LinkKind.DOWNLINK))
    return [Segment(sat, ua, ub, arms)], (ua, ub)


def _s1c(b: _Builder):
    p = b.params
    space = _require(p.space_eps, "space_eps", b.scenario)
    ground = _require(p.ground_eps, "ground_eps at the repeater", b.scenario)
    rsite = p.repeater_site or toward(p.site_a, p.site_b, p.repeater_fiber_km)
    ua = b.ground("user_a", NodeKind.GROUND_USER, p.site_a)
    ub = b.ground("user_b", NodeKind.GROUND_USER, p.site_b)
    rep = b.ground("repeater", NodeKind.GROUND_REPEATER, rsite, eps=ground, bsm=p.bsm)
    sat = b.satellite(NodeKind.SATELLITE_SOURCE, midpoint(rsite, p.site_b), eps=space)
    fiber_km = great_circle_km(rsite, p.site_a)
    if fiber_km <= 0.0:
        raise ScenarioError("the repeater must not sit on user A's site")
    fiber = b.link(rep, ua, LinkKind.FIBER, fiber_km)
    down = (b.link(sat, rep, LinkKind.DOWNLINK), b.link(sat, ub, LinkKind.DOWNLINK))
    return [Segment(rep, ua, rep, (fiber,)), Segment(sat, rep, ub, down)], (ua, ub)


def _s1d(b: _Builder):
    p = b.params
    eps = _require(p.space_eps, "space_eps", b.scenario)
    rsite = p.repeater_site or midpoint(p.site_a, p.site_b)
    ua = b.ground("user_a", NodeKind.GROUND_USER, p.site_a)
    ub = b.ground("user_b", NodeKind.GROUND_USER, p.site_b)
    rep = b.ground("repeater", NodeKind.GROUND_REPEATER, rsite, bsm=p.bsm)
    s1 = b.satellite(NodeKind.SATELLITE_SOURCE, midpoint(p.site_a, rsite), eps=eps)
    s2 = b.satellite(NodeKind.SATELLITE_SOURCE, midpoint(rsite, p.site_b), eps=eps)
    left = (b.link(s1, ua, LinkKind.DOWNLINK), b.link(s1, rep, LinkKind.DOWNLINK))
    right = (b.link(s2, rep, LinkKind.DOWNLINK), b.link(s2, ub, LinkKind.DOWNLINK))
    return [Segment(s1, ua, rep, left), Segment(s2, rep, ub, right)], (ua, ub)


def _s2(b: _Builder):
    p = b.params
    eps = _require(p.ground_eps, "ground_eps for the two ground sources", b.scenario)
    ua = b.ground("user_a", NodeKind.GROUND_USER, p.site_a)
    ub = b.ground("user_b", NodeKind.GROUND_USER, p.site_b)
    sa = b.ground("source_a", NodeKind.GROUND_SOURCE, p.site_a, eps=eps)
    sb = b.ground("source_b", NodeKind.GROUND_SOURCE, p.site_b, eps=eps)
    sat = b.satellite(NodeKind.SATELLITE_REPEATER, midpoint(p.site_a, p.site_b), bsm=p.bsm)
    left = (b.link(sa, ua, LinkKind.FIBER, p.local_fiber_km), b.link(sa, sat, LinkKind.UPLINK))
    right = (b.link(sb, sat, LinkKind.UPLINK), b.link(sb, ub, LinkKind.FIBER, p.local_fiber_km))
    return [Segment(sa, ua, sat, left), Segment(sb, sat, ub, right)], (ua, ub)


def _s3a(b: _Builder):
    p = b.params
    eps = _require(p.space_eps, "space_eps", b.scenario)
    ua = b.ground("user_a", NodeKind.GROUND_USER, p.site_a)
    ub = b.ground("user_b", NodeKind.GROUND_USER, p.site_b)
    s1 = b.satellite(NodeKind.SATELLITE_SOURCE, p.site_a, eps=eps)
    s2 = b.satellite(NodeKind.SATELLITE_SOURCE, p.site_b, eps=eps)
    relay = b.satellite(NodeKind.SATELLITE_REPEATER, midpoint(p.site_a, p.site_b), bsm=p.bsm)
    left = (b.link(s1, ua, LinkKind.DOWNLINK), b.link(s1, relay, LinkKind.QOISL))
    right = (b.link(s2, relay, LinkKind.QOISL), b.link(s2, ub, LinkKind.DOWNLINK))
    return [Segment(s1, ua, relay, left), Segment(s2, relay, ub, right)], (ua, ub)


def _s3b(b: _Builder):
    p = b.params
    space = _require(p.space_eps, "space_eps", b.scenario)
    ground = _require(p.ground_eps, "ground_eps for the ground source", b.scenario)
    ua = b.ground("user_a", NodeKind.GROUND_USER, p.site_a)
    ub = b.ground("user_b", NodeKind.GROUND_USER, p.site_b)
    sb = b.ground("source_b", NodeKind.GROUND_SOURCE, p.site_b, eps=ground)
    s1 = b.satellite(NodeKind.SATELLITE_SOURCE, p.site_a, eps=space)
    relay = b.satellite(NodeKind.SATELLITE_REPEATER, p.site_b, bsm=p.bsm)
    left = (b.link(s1, ua, LinkKind.DOWNLINK), b.link(s1, relay, LinkKind.QOISL))
    right = (b.link(sb, relay, LinkKind.UPLINK), b.link(sb, ub, LinkKind.FIBER, p.local_fiber_km))
    return [Segment(s1, ua, relay, left), Segment(sb, relay, ub, right)], (ua, ub)


def _s4(b: _Builder):
    p = b.params
    eps = _require(p.space_eps, "space_eps", b.scenario)
    memory = _require(p.space_memory, "space_memory on the source satellite", b.scenario)
    ub = b.ground("user_b", NodeKind.GROUND_USER, p.site_b)
    s1 = b.satellite(NodeKind.SATELLITE_SOURCE, p.site_a, eps=eps, memory=memory)
    hybrid = b.satellite(NodeKind.SATELLITE_HYBRID, p.site_b, eps=eps, bsm=p.bsm)
    isl = b.link(s1, hybrid, LinkKind.QOISL)
    down = b.link(hybrid, ub, LinkKind.DOWNLINK)
    return [Segment(s1, s1, hybrid, (isl,)), Segment(hybrid, hybrid, ub, (down,))], (s1, ub)


_BUILDERS = {
    ScenarioId.S1A: _s1a,
    ScenarioId.S1B: _s1b,
    ScenarioId.S1C: _s1c,
    ScenarioId.S1D: _s1d,
    ScenarioId.S2: _s2,
    ScenarioId.S3A: _s3a,
    ScenarioId.S3B: _s3b,
    ScenarioId.S4: _s4,
}

DESCRIPTIONS = {
    ScenarioId.S1A: "source satellite, one photon down to a user, one kept in on-board memory",
    ScenarioId.S1B: "source satellite, two downlinks to two users",
    ScenarioId.S1C: "source satellite plus ground repeater with its own source and fiber to user A",
    ScenarioId.S1D: "two source satellites meeting at a ground repeater",
    ScenarioId.S2: "ground sources, two uplinks to a BSM satellite",
    ScenarioId.S3A: "two source satellites, QOISLs to a relay BSM satellite",
    ScenarioId.S3B: "one source satellite over QOISL and one ground source over uplink to a relay",
    ScenarioId.S4: "source satellite over QOISL to a hybrid satellite serving one user",
}


def build_scenario(
    scenario: ScenarioId | str, params: ScenarioParams | None = None
) -> BuiltScenario:
    """Network, bound chain and swap schedule for one architecture.

    Raises :class:`ScenarioError` when the parameters lack equipment the
    architecture needs or give the wrong number of orbits, and
    :class:`DualVisibilityError` when one satellite would have to see two
    ground nodes further apart than its altitude allows.
    """
    scenario = ScenarioId(scenario)
    builder = _Builder(scenario, params or ScenarioParams())
    segments, end_users = _BUILDERS[scenario](builder)
    return builder.finish(segments, end_users)


# -- comparison ---------------------------------------------------------------------

DEFAULT_COMPARE_SIM = SimConfig(duration_s=20.0, time_origin_s=-10.0)


@dataclass(frozen=True)
class ComparisonRow:
    scenario: ScenarioId
    rate_hz: float
    stderr_hz: float
    active_fraction: float
    complexity_1to5: int | None
    interest_1to5: int | None
    note: str = ""


def compare_scenarios(
    ids,
    params: ScenarioParams | None = None,
    sim: SimConfig | None = None,
    batches: int = 4,
    *,
    jobs: int = 1,
) -> list[ComparisonRow]:
    """Simulate each scenario under the same hardware and sites.

    Rows come back sorted by simulated rate, fastest first, with the
    trade-off scores attached.
    """
    ids = [ScenarioId(i) for i in ids]
    if not ids:
        raise ScenarioError("need at least one scenario")
    sim = sim or DEFAULT_COMPARE_SIM
    rows = []
    for scenario in ids:
        built = build_scenario(scenario, params)
        est = estimate_rate(built.network, built.binding, sim, batches, jobs=jobs)
        record = tradeoff_record(scenario)
        rows.append(ComparisonRow(
            scenario, est.mean_rate_hz, est.stderr_hz, est.active_fraction,
            record.complexity_1to5, record.interest_1to5, record.note,
        ))
    return sorted(rows, key=lambda r: -r.rate_hz)
