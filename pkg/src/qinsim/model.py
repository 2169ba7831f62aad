"""Domain types shared by every module: equipment, nodes, links and networks.

Range checks on individual fields raise ``ValueError`` at construction.
Structural rules that involve more than one object (endpoint kinds, missing
equipment, connectivity) are reported by :func:`validate_network` as data.
"""
from __future__ import annotations

import enum
import math
from collections import defaultdict, deque
from dataclasses import dataclass, field

from .orbit import GroundSite, Orbit

NodeId = str


class NodeKind(str, enum.Enum):
    """Role of a node in the network.

    Satellites are either *specific* (``SATELLITE_SOURCE`` or
    ``SATELLITE_REPEATER``, one function each) or *hybrid*
    (``SATELLITE_HYBRID``, carrying both a pair source and a BSM). The
    qualitative trade-off between the two designs is kept in
    :data:`qinsim.scenarios.SATELLITE_ARCHITECTURES`.
    """

    GROUND_USER = "ground_user"
    GROUND_SOURCE = "ground_source"
    GROUND_REPEATER = "ground_repeater"
    SATELLITE_SOURCE = "satellite_source"
    SATELLITE_REPEATER = "satellite_repeater"
    SATELLITE_HYBRID = "satellite_hybrid"

    @property
    def is_satellite(self) -> bool:
        return self.value.startswith("satellite")

    @property
    def is_ground(self) -> bool:
        return not self.is_satellite


class LinkKind(str, enum.Enum):
    FIBER = "fiber"
    DOWNLINK = "downlink"
    UPLINK = "uplink"
    QOISL = "qoisl"

    @property
    def is_optical(self) -> bool:
        return self is not LinkKind.FIBER


class ScenarioId(str, enum.Enum):
    S1A = "S1a"
    S1B = "S1b"
    S1C = "S1c"
    S1D = "S1d"
    S2 = "S2"
    S3A = "S3a"
    S3B = "S3b"
    S4 = "S4"

    @classmethod
    def _missing_(cls, value):
        if isinstance(value, str):
            for member in cls:
                if member.value.lower() == value.lower():
                    return member
        return None


def _check_unit(name, x):
    if not 0.0 <= x <= 1.0:
        raise ValueError(f"{name} must lie in [0, 1], got {x!r}")


def _check_positive(name, x):
    if not x > 0:
        raise ValueError(f"{name} must be positive, got {x!r}")


def _check_nonneg(name, x):
    if not x >= 0:
        raise ValueError(f"{name} must be nonnegative, got {x!r}")


@dataclass(frozen=True)
class EpsParams:
    """Entangled photon pair source."""

    pair_rate_hz: float
    heralding_efficiency: float = 1.0

    def __post_init__(self):
        _check_positive("pair_rate_hz", self.pair_rate_hz)
        _check_unit("heralding_efficiency", self.heralding_efficiency)


BSM_SUCCESS_CEILING = 0.5  # linear-optics Bell measurement


@dataclass(frozen=True)
class BsmParams:
    success_prob_q: float = BSM_SUCCESS_CEILING
    indistinguishability_v: float = 1.0
    coincidence_window_ps: float = 100.0

    def __post_init__(self):
        if not 0.0 <= self.success_prob_q <= BSM_SUCCESS_CEILING:
            raise ValueError(
                f"success_prob_q must lie in [0, {BSM_SUCCESS_CEILING}], "
                f"got {self.success_prob_q!r}"
            )
        _check_unit("indistinguishability_v", self.indistinguishability_v)
        _check_positive("coincidence_window_ps", self.coincidence_window_ps)

    @property
    def success_prob(self) -> float:
        """Probability that a swap succeeds with perfectly retrieved photons."""
        return self.success_prob_q * self.indistinguishability_v


@dataclass(frozen=True)
class MemoryParams:
    """Quantum memory with exponentially decaying retrieval and a hard cutoff."""

    efficiency_eta0: float = 1.0
    lifetime_tau_s: float = math.inf
    cutoff_s: float = math.inf

    def __post_init__(self):
        _check_unit("efficiency_eta0", self.efficiency_eta0)
        _check_positive("lifetime_tau_s", self.lifetime_tau_s)
        _check_positive("cutoff_s", self.cutoff_s)

    def retrieval_efficiency(self, storage_s: float) -> float:
        if storage_s > self.cutoff_s:
            return 0.0
        return self.efficiency_eta0 * math.exp(-storage_s / self.lifetime_tau_s)


@dataclass(frozen=True)
class ChannelParams:
    kind: LinkKind
    fiber_alpha_db_per_km: float = 0.2
    wavelength_m: float = 1550e-9
    tx_aperture_m: float | None = None
    rx_aperture_m: float | None = None
    atmospheric_penalty_db: float = 0.0
    pointing_loss_db: float = 0.0
    system_loss_db: float = 0.0
    detector_efficiency: float = 1.0

    def __post_init__(self):
        object.__setattr__(self, "kind", LinkKind(self.kind))
        _check_nonneg("fiber_alpha_db_per_km", self.fiber_alpha_db_per_km)
        _check_positive("wavelength_m", self.wavelength_m)
        for name in ("tx_aperture_m", "rx_aperture_m"):
            value = getattr(self, name)
            if value is not None:
                _check_positive(name, value)
        _check_nonneg("atmospheric_penalty_db", self.atmospheric_penalty_db)
        _check_nonneg("pointing_loss_db", self.pointing_loss_db)
        _check_nonneg("system_loss_db", self.system_loss_db)
        _check_unit("detector_efficiency", self.detector_efficiency)
        # Inter-satellite links never cross the atmosphere.
        if self.kind is LinkKind.QOISL:
            object.__setattr__(self, "atmospheric_penalty_db", 0.0)


@dataclass(frozen=True)
class Node:
    id: NodeId
    kind: NodeKind
    site: GroundSite | None = None
    orbit: Orbit | None = None
    eps: EpsParams | None = None
    bsm: BsmParams | None = None
    memory: MemoryParams | None = None
    telescope_aperture_m: float | None = None

    def __post_init__(self):
        object.__setattr__(self, "kind", NodeKind(self.kind))
        if not self.id:
            raise ValueError("node id must be a nonempty string")
        if self.telescope_aperture_m is not None:
            _check_positive("telescope_aperture_m", self.telescope_aperture_m)


@dataclass(frozen=True)
class Link:
    """Directed channel from ``a`` (transmitter side) to ``b``."""

    a: NodeId
    b: NodeId
    channel: ChannelParams
    static_length_km: float | None = None

    def __post_init__(self):
        if self.static_length_km is not None:
            _check_positive("static_length_km", self.static_length_km)

    @property
    def name(self) -> str:
        return f"{self.a}-{self.b}"

    @property
    def kind(self) -> LinkKind:
        return self.channel.kind


@dataclass(frozen=True)
class Network:
    nodes: tuple[Node, ...]
    links: tuple[Link, ...]
    classical_heralding_latency_s: float = 0.0
    end_users: tuple[NodeId, NodeId] | None = None
    elevation_mask_deg: float = 10.0
    _index: dict = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        object.__setattr__(self, "nodes", tuple(self.nodes))
        object.__setattr__(self, "links", tuple(self.links))
        if self.end_users is not None:
            object.__setattr__(self, "end_users", tuple(self.end_users))
        _check_nonneg("classical_heralding_latency_s", self.classical_heralding_latency_s)
        object.__setattr__(self, "_index", {n.id: n for n in self.nodes})

    def node(self, node_id: NodeId) -> Node:
        try:
            return self._index[node_id]
        except KeyError:
            raise KeyError(f"unknown node {node_id!r}") from None

    def link(self, a: NodeId, b: NodeId) -> Link:
        """The link joining ``a`` and ``b`` in either direction."""
        for link in self.links:
            if {link.a, link.b} == {a, b}:
                return link
        raise KeyError(f"no link between {a!r} and {b!r}")

    def links_of_kind(self, kind: LinkKind) -> list[Link]:
        return [link for link in self.links if link.kind is LinkKind(kind)]


# Equipment each kind must carry, and equipment it may never carry.
_REQUIRED = {
    NodeKind.GROUND_USER: (),
    NodeKind.GROUND_SOURCE: ("eps",),
    NodeKind.GROUND_REPEATER: ("bsm",),
    NodeKind.SATELLITE_SOURCE: ("eps",),
    NodeKind.SATELLITE_REPEATER: ("bsm",),
    NodeKind.SATELLITE_HYBRID: ("eps", "bsm"),
}
_FORBIDDEN = {
    NodeKind.GROUND_USER: ("eps", "bsm"),
    NodeKind.GROUND_SOURCE: ("bsm",),
    NodeKind.GROUND_REPEATER: (),
    NodeKind.SATELLITE_SOURCE: ("bsm",),
    NodeKind.SATELLITE_REPEATER: ("eps",),
    NodeKind.SATELLITE_HYBRID: (),
}


def _node_violations(node: Node) -> list[str]:
    out = []
    where = f"node {node.id}"
    if node.kind.is_ground:
        if node.site is None:
            out.append(f"{where}: ground node needs a site")
        if node.orbit is not None:
            out.append(f"{where}: ground node must not have an orbit")
    else:
        if node.orbit is None:
            out.append(f"{where}: satellite node needs an orbit")
        if node.site is not None:
            out.append(f"{where}: satellite node must not have a site")
    for item in _REQUIRED[node.kind]:
        if getattr(node, item) is None:
            out.append(f"{where}: {node.kind.value} requires {item}")
    for item in _FORBIDDEN[node.kind]:
        if getattr(node, item) is not None:
            out.append(f"{where}: {node.kind.value} must not carry {item}")
    return out


def _link_violations(link: Link, nodes: dict[NodeId, Node]) -> list[str]:
    where = f"link {link.name}"
    if link.a == link.b:
        return [f"{where}: endpoints must differ"]
    missing = [x for x in (link.a, link.b) if x not in nodes]
    if missing:
        return [f"{where}: unknown endpoint {x}" for x in missing]
    a, b = nodes[link.a].kind, nodes[link.b].kind
    kind = link.kind
    out = []
    if kind is LinkKind.QOISL and not (a.is_satellite and b.is_satellite):
        out.append(f"{where}: Qoisl requires satellite endpoints")
    elif kind is LinkKind.FIBER and not (a.is_ground and b.is_ground):
        out.append(f"{where}: Fiber requires ground endpoints")
    elif kind is LinkKind.DOWNLINK and not (a.is_satellite and b.is_ground):
        out.append(f"{where}: Downlink runs from a satellite to a ground node")
    elif kind is LinkKind.UPLINK and not (a.is_ground and b.is_satellite):
        out.append(f"{where}: Uplink runs from a ground node to a satellite")
    if kind is LinkKind.FIBER and link.static_length_km is None:
        out.append(f"{where}: Fiber link requires static_length_km")
    if kind.is_optical and (
        link.channel.tx_aperture_m is None or link.channel.rx_aperture_m is None
    ):
        out.append(f"{where}: optical link requires tx_aperture_m and rx_aperture_m")
    return out


def _connected(network: Network, src: NodeId, dst: NodeId) -> bool:
    adjacency = defaultdict(set)
    for link in network.links:
        adjacency[link.a].add(link.b)
        adjacency[link.b].add(link.a)
    seen, queue = {src}, deque([src])
    while queue:
        here = queue.popleft()
        if here == dst:
            return True
        for nxt in adjacency[here] - seen:
            seen.add(nxt)
            queue.append(nxt)
    return False


def validate_network(network: Network) -> list[str]:
    """Every structural rule the network breaks; an empty list means simulatable.

    The result is sorted, so it does not depend on node or link order.
    """
    violations = []
    nodes: dict[NodeId, Node] = {}
    for node in network.nodes:
        if node.id in nodes:
            violations.append(f"node {node.id}: duplicate id")
        nodes[node.id] = node
        violations.extend(_node_violations(node))

    seen_pairs = set()
    for link in network.links:
        pair = frozenset((link.a, link.b))
        if pair in seen_pairs:
            violations.append(f"link {link.name}: duplicate link between endpoints")
        seen_pairs.add(pair)
        violations.extend(_link_violations(link, nodes))

    downlink_penalties = [
        link.channel.atmospheric_penalty_db for link in network.links_of_kind("downlink")
    ]
    if downlink_penalties:
        floor = max(downlink_penalties)
        for link in network.links_of_kind("uplink"):
            if link.channel.atmospheric_penalty_db < floor:
                violations.append(
                    f"link {link.name}: uplink atmospheric penalty "
                    f"{link.channel.atmospheric_penalty_db} dB is below the downlink "
                    f"penalty {floor} dB"
                )

    if network.end_users is not None:
        users = network.end_users
        if len(users) != 2 or users[0] == users[1]:
            violations.append("network: end_users must name two distinct nodes")
        else:
            unknown = [u for u in users if u not in nodes]
            for u in unknown:
                violations.append(f"network: unknown end user {u}")
            if not unknown and not _connected(network, *users):
                violations.append(
                    f"network: end users {users[0]} and {users[1]} are disconnected"
                )
    return sorted(set(violations))
