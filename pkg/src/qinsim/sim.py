"""Seeded, slotted Monte Carlo simulation of entanglement distribution.

Time is divided into slots of ``slot_s`` seconds. In every slot each active
elementary link (a *segment*: one pair source and the one or two channels
carrying its photons) succeeds independently with probability

    min(1, rate * slot) * heralding_efficiency * prod(channel transmittances)

Successful pairs occupy the memories at the segment's ends. A repeater
performs its Bell measurement as soon as both neighbouring pairs are present
and reach as far as its round of the :class:`SwapSchedule` requires (see
:meth:`SwapSchedule.reach`); a failed measurement destroys both pairs. A
pair held at a node without memory is only usable in the slot it arrived. End-to-end entanglement is recorded as soon as a single pair spans
the whole chain.

Geometry (visibility and range of optical channels) is evaluated on a grid of
``geometry_step_s`` and held constant in between.

Two engines implement these rules:

* ``events`` is a discrete-event simulation that keeps the full memory
  state. A segment's next success is only drawn while its memories are free;
  it supports any hardware and the event log.
* ``counts`` applies when no repeater has memory. Slots are then independent
  and the run reduces to nested binomial draws per geometry block, which
  scales to any number of slots.

Event log ordering: events are sorted by time, then by variant rank
(``PASS_END`` < ``PASS_START`` < ``MEMORY_EXPIRED`` < ``PAIR_GENERATED`` <
``PHOTON_STORED`` < ``BSM_FIRED`` < ``END_TO_END``), then by firing order
for Bell measurements and by subject name otherwise.
"""
from __future__ import annotations

import enum
import heapq
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field
from typing import Callable, Iterable

import numpy as np

from .linkbudget import transmittance_profile
from .model import LinkKind, Network, NodeId, validate_network
from .orbit import line_of_sight_clear, propagate, site_position, _elevation_from_positions
from .swapchain import ChainConfig, SwapSchedule, SwapStrategy, build_swap_schedule

MAX_GEOMETRY_BLOCKS = 5_000_000
_NEVER = 2**62


class SimulationError(ValueError):
    """Raised when a network, binding or configuration cannot be simulated."""


@dataclass(frozen=True)
class Segment:
    """One elementary link of the chain.

    ``arms`` lists the channels, as ``(a, b)`` endpoint pairs, that carry the
    source's photons to ``left`` and ``right``. An endpoint equal to
    ``source`` keeps its photon locally and needs no arm.
    """

    source: NodeId
    left: NodeId
    right: NodeId
    arms: tuple[tuple[NodeId, NodeId], ...]

    def __post_init__(self):
        object.__setattr__(self, "arms", tuple(tuple(a) for a in self.arms))

    @property
    def label(self) -> str:
        return f"{self.left}~{self.right}"


@dataclass(frozen=True)
class ChainBinding:
    """A chain of segments laid onto the nodes and links of a network."""

    segments: tuple[Segment, ...]
    schedule: SwapSchedule | None = None

    def __post_init__(self):
        object.__setattr__(self, "segments", tuple(self.segments))
        if not self.segments:
            raise SimulationError("a chain needs at least one segment")
        for prev, nxt in zip(self.segments, self.segments[1:]):
            if prev.right != nxt.left:
                raise SimulationError(
                    f"segments {prev.label} and {nxt.label} do not share a node"
                )
        n_bsm = len(self.segments) - 1
        if self.schedule is None and n_bsm:
            object.__setattr__(
                self, "schedule", build_swap_schedule(n_bsm, SwapStrategy.BALANCED)
            )
        if self.schedule is not None and self.schedule.n_bsm != n_bsm:
            raise SimulationError(
                f"schedule covers {self.schedule.n_bsm} repeaters, chain has {n_bsm}"
            )

    @property
    def n_segments(self) -> int:
        return len(self.segments)

    @property
    def positions(self) -> list[NodeId]:
        """Node at each chain position ``0..N``."""
        return [self.segments[0].left] + [s.right for s in self.segments]

    @property
    def repeaters(self) -> list[NodeId]:
        return self.positions[1:-1]


@dataclass(frozen=True)
class SimConfig:
    duration_s: float
    slot_s: float | None = None
    """Attempt period; defaults to the inverse rate of the slowest source."""
    seed: int = 0
    time_origin_s: float = 0.0
    """Orbit time corresponding to simulation time zero."""
    geometry_step_s: float = 1.0

    def __post_init__(self):
        if not self.duration_s > 0:
            raise SimulationError("duration_s must be positive")
        if self.slot_s is not None and not self.slot_s > 0:
            raise SimulationError("slot_s must be positive")
        if not self.geometry_step_s > 0:
            raise SimulationError("geometry_step_s must be positive")
        if not 0 <= self.seed < 2**64:
            raise SimulationError("seed must be a 64-bit unsigned integer")


class EventKind(str, enum.Enum):
    PASS_END = "pass_end"
    PASS_START = "pass_start"
    MEMORY_EXPIRED = "memory_expired"
    PAIR_GENERATED = "pair_generated"
    PHOTON_STORED = "photon_stored"
    BSM_FIRED = "bsm_fired"
    END_TO_END = "end_to_end"


_RANK = {kind: i for i, kind in enumerate(EventKind)}


@dataclass(frozen=True)
class SimEvent:
    time_s: float
    kind: EventKind
    subject: str = ""
    """Node, segment or link the event concerns."""
    success: bool | None = None
    latency_s: float | None = None
    pairs: int | None = None
    swaps: int | None = None

    def to_dict(self) -> dict:
        d = {"time_s": self.time_s, "kind": self.kind.value, "subject": self.subject}
        for key in ("success", "latency_s", "pairs", "swaps"):
            value = getattr(self, key)
            if value is not None:
                d[key] = value
        return d


@dataclass(frozen=True)
class SimResult:
    e2e_successes: int
    duration_s: float
    slot_s: float
    n_slots: int
    seed: int
    engine: str
    mean_latency_s: float
    active_time_s: float
    per_link_attempts: dict[str, int]
    per_link_successes: dict[str, int]
    event_log: tuple[SimEvent, ...] | None = None
    events_total: int = 0

    @property
    def e2e_rate_hz(self) -> float:
        return self.e2e_successes / self.duration_s

    def to_dict(self) -> dict:
        d = asdict(self)
        d["e2e_rate_hz"] = self.e2e_rate_hz
        d["event_log"] = (
            None if self.event_log is None else [e.to_dict() for e in self.event_log]
        )
        if math.isnan(d["mean_latency_s"]):
            d["mean_latency_s"] = None
        return d


# -- binding checks and hardware lookup ------------------------------------


def check_binding(network: Network, binding: ChainBinding) -> list[str]:
    """Problems that prevent simulating ``binding`` on ``network``."""
    problems = []
    ids = {n.id for n in network.nodes}
    for seg in binding.segments:
        where = f"segment {seg.label}"
        for role in ("source", "left", "right"):
            if getattr(seg, role) not in ids:
                problems.append(f"{where}: unknown {role} node {getattr(seg, role)}")
        if seg.source in ids and network.node(seg.source).eps is None:
            problems.append(f"{where}: source {seg.source} has no pair source")
        reached = set()
        for a, b in seg.arms:
            try:
                network.link(a, b)
            except KeyError:
                problems.append(f"{where}: no link {a}-{b}")
                continue
            if seg.source not in (a, b):
                problems.append(f"{where}: arm {a}-{b} does not start at the source")
            reached.add(b if a == seg.source else a)
        for end in {seg.left, seg.right} - {seg.source}:
            if end not in reached:
                problems.append(f"{where}: no arm delivers a photon to {end}")
    for node_id in binding.repeaters:
        if node_id in ids and network.node(node_id).bsm is None:
            problems.append(f"repeater {node_id}: no Bell-state measurement device")
    return problems


def _require_simulatable(network: Network, binding: ChainBinding) -> None:
    problems = validate_network(network) + check_binding(network, binding)
    if problems:
        raise SimulationError("; ".join(problems))


def default_slot_s(network: Network, binding: ChainBinding) -> float:
    rates = [network.node(s.source).eps.pair_rate_hz for s in binding.segments]
    return 1.0 / min(rates)


def _slot_count(duration_s: float, slot_s: float) -> int:
    x = duration_s / slot_s
    nearest = round(x)
    if abs(x - nearest) <= 1e-9 * max(1.0, x):
        return int(nearest)
    return int(math.floor(x))


# -- geometry ----------------------------------------------------------------


def _node_positions(node, times):
    if node.orbit is not None:
        return propagate(node.orbit, times)
    return site_position(node.site, times)


def _link_profile(network: Network, a: NodeId, b: NodeId, times):
    """Visibility mask and transmittance of one channel at the given times."""
    link = network.link(a, b)
    if link.kind is LinkKind.FIBER:
        t = float(transmittance_profile(link.channel, link.static_length_km))
        return np.ones(len(times), bool), np.full(len(times), t)
    pa = _node_positions(network.node(link.a), times)
    pb = _node_positions(network.node(link.b), times)
    rng_km = np.linalg.norm(pa - pb, axis=-1)
    if link.kind is LinkKind.QOISL:
        visible = line_of_sight_clear(pa, pb)
    else:
        sat, gnd = (pa, pb) if link.kind is LinkKind.DOWNLINK else (pb, pa)
        visible = _elevation_from_positions(sat, gnd) >= network.elevation_mask_deg
    return visible, transmittance_profile(link.channel, rng_km)


@dataclass
class _Plan:
    """Everything precomputed for one run."""

    n_slots: int
    slot_s: float
    block_start: np.ndarray  # first slot of each geometry block
    block_len: np.ndarray
    seg_p: np.ndarray  # (N, blocks) per-slot success probability
    seg_active: np.ndarray  # (N, blocks)
    arm_visible: dict = field(default_factory=dict)  # link name -> (blocks,) bool


def _plan(network: Network, binding: ChainBinding, sim: SimConfig) -> _Plan:
    slot = sim.slot_s if sim.slot_s is not None else default_slot_s(network, binding)
    n_slots = _slot_count(sim.duration_s, slot)
    if n_slots < 1:
        raise SimulationError("duration_s is shorter than one slot")

    for node_id in binding.repeaters:
        node = network.node(node_id)
        window_s = node.bsm.coincidence_window_ps * 1e-12
        if node.memory is None and slot < window_s * (1 - 1e-9):
            raise SimulationError(
                f"slot {slot:g} s is shorter than the {window_s:g} s coincidence "
                f"window of {node_id}"
            )

    dynamic = any(
        network.link(a, b).kind.is_optical for s in binding.segments for a, b in s.arms
    )
    if dynamic:
        per_block = max(1, int(round(sim.geometry_step_s / slot)))
        n_blocks = -(-n_slots // per_block)
        if n_blocks > MAX_GEOMETRY_BLOCKS:
            raise SimulationError(
                f"{n_blocks} geometry blocks exceed the limit {MAX_GEOMETRY_BLOCKS}; "
                "raise geometry_step_s or shorten the run"
            )
        block_start = np.arange(n_blocks, dtype=np.int64) * per_block
    else:
        block_start = np.zeros(1, dtype=np.int64)
    block_len = np.diff(np.append(block_start, n_slots))
    times = sim.time_origin_s + block_start * slot

    seg_p = np.empty((binding.n_segments, len(block_start)))
    seg_active = np.empty_like(seg_p, dtype=bool)
    arm_visible = {}
    for i, seg in enumerate(binding.segments):
        eps = network.node(seg.source).eps
        p = np.full(len(times), min(1.0, eps.pair_rate_hz * slot) * eps.heralding_efficiency)
        active = np.ones(len(times), bool)
        for a, b in seg.arms:
            visible, t = _link_profile(network, a, b, times)
            link = network.link(a, b)
            if link.kind.is_optical:
                arm_visible[link.name] = visible
            active &= visible
            p *= t
        seg_active[i] = active
        seg_p[i] = np.where(active, np.clip(p, 0.0, 1.0), 0.0)
    return _Plan(n_slots, slot, block_start, block_len, seg_p, seg_active, arm_visible)


# -- engines -------------------------------------------------------------------


class _Arrivals:
    """Success slots of one segment, drawn lazily from its own stream.

    Success probabilities are constant within a geometry block, so the gap to
    the next success is geometric and may be redrawn whenever sampling
    restarts; draws never look at slots the segment cannot use.
    """

    def __init__(self, rng, plan: _Plan, i: int):
        self.rng = rng
        self.p = plan.seg_p[i]
        self.start = plan.block_start
        self.end = plan.block_start + plan.block_len
        self.live = np.flatnonzero(self.p > 0.0)

    def next_from(self, slot: int) -> int | None:
        """First success at or after ``slot``, or None within the run."""
        b = int(np.searchsorted(self.end, slot, side="right"))
        k = int(np.searchsorted(self.live, b))
        while k < len(self.live):
            b = int(self.live[k])
            lo = max(slot, int(self.start[b]))
            gap = int(self.rng.geometric(self.p[b])) - 1
            if lo + gap < self.end[b]:
                return lo + gap
            k += 1
        return None

    def count_between(self, lo: int, hi: int) -> int:
        """Number of successes in ``[lo, hi)``, for slots whose pair is discarded."""
        if hi <= lo:
            return 0
        overlap = np.minimum(self.end, hi) - np.maximum(self.start, lo)
        keep = overlap > 0
        return int(self.rng.binomial(overlap[keep], self.p[keep]).sum())


def _streams(seed: int, n_segments: int):
    children = np.random.SeedSequence(seed).spawn(n_segments + 1)
    return [np.random.Generator(np.random.PCG64(c)) for c in children]


def _swap_probs(network, binding):
    return [network.node(r).bsm.success_prob for r in binding.repeaters]


def _run_counts(network, binding, sim, plan) -> SimResult:
    """Memoryless chains: every slot is an independent trial."""
    rngs = _streams(sim.seed, binding.n_segments)
    n_b = plan.block_len
    joint = n_b.copy()
    successes = {}
    for i, seg in enumerate(binding.segments):
        rng = rngs[i]
        both = rng.binomial(joint, plan.seg_p[i])
        rest = rng.binomial(n_b - joint, plan.seg_p[i])
        successes[seg.label] = int(both.sum() + rest.sum())
        joint = both
    swap_p = math.prod(_swap_probs(network, binding))
    e2e = int(rngs[-1].binomial(joint, swap_p).sum())
    latency = network.classical_heralding_latency_s if e2e else math.nan
    return _result(network, binding, sim, plan, e2e, latency, successes, "counts", None, 0)


class _Span:
    """A stored pair stretching from chain position ``left`` to ``right``."""

    __slots__ = ("left", "right", "t_left", "t_right", "exp_left", "exp_right",
                 "earliest", "pairs", "swaps", "alive")

    def __init__(self, left, right, t_left, t_right, exp_left, exp_right,
                 earliest, pairs, swaps):
        self.left, self.right = left, right
        self.t_left, self.t_right = t_left, t_right
        self.exp_left, self.exp_right = exp_left, exp_right
        self.earliest, self.pairs, self.swaps = earliest, pairs, swaps
        self.alive = True

    @property
    def expiry(self):
        return min(self.exp_left, self.exp_right)


class _Log:
    def __init__(self, limit: int):
        self.limit = limit
        self.events: list[SimEvent] = []
        self.total = 0

    def add(self, event: SimEvent):
        self.total += 1
        if len(self.events) < self.limit:
            self.events.append(event)

    def add_sorted(self, events):
        for ev in sorted(events, key=lambda e: (e.time_s, _RANK[e.kind], e.subject)):
            self.add(ev)


def _pass_events(plan: _Plan, slot_s: float) -> list[SimEvent]:
    out = []
    for name, visible in plan.arm_visible.items():
        prev = False
        for b, vis in enumerate(visible):
            if vis != prev:
                kind = EventKind.PASS_START if vis else EventKind.PASS_END
                out.append(SimEvent(float(plan.block_start[b] * slot_s), kind, name))
                prev = vis
    out.sort(key=lambda e: (e.time_s, _RANK[e.kind], e.subject))
    return out


def _run_events(network, binding, sim, plan, max_events: int) -> SimResult:
    n = binding.n_segments
    n_slots = plan.n_slots
    slot_s = plan.slot_s
    rngs = _streams(sim.seed, n)
    bsm_rng = rngs[-1]
    arrivals = [_Arrivals(rngs[i], plan, i) for i in range(n)]
    positions = binding.positions
    labels = [seg.label for seg in binding.segments]
    nodes = [network.node(x) for x in positions]

    def max_age(node):
        if node.memory is None:
            return 0
        if math.isinf(node.memory.cutoff_s):
            return _NEVER
        return int(math.floor(node.memory.cutoff_s / slot_s + 1e-9))

    ages = [max_age(node) for node in nodes]
    swap_p = {j: nodes[j].bsm.success_prob for j in range(1, n)}
    order_of = binding.schedule.firing_order() if binding.schedule else []
    reach = binding.schedule.reach() if binding.schedule else {}
    heralding = network.classical_heralding_latency_s
    log = _Log(max_events) if max_events else None
    pass_events = _pass_events(plan, slot_s) if log else []
    pass_i = 0

    # Heap entries are (slot, phase, key, span): phase 0 expires ``span`` at
    # the start of the slot, phase 1 delivers a pair on segment ``key``.
    heap: list = []
    seq = 0
    by_left: dict[int, _Span] = {}
    by_right: dict[int, _Span] = {}
    blocked_since = [0] * n
    successes = [0] * n
    e2e = 0
    latency_sum = 0.0

    def schedule_arrival(i, slot):
        # Successes while the segment's memories were full are lost but counted.
        successes[i] += arrivals[i].count_between(blocked_since[i], slot)
        nxt = arrivals[i].next_from(slot)
        if nxt is not None:
            heapq.heappush(heap, (nxt, 1, i, None))

    def store(span):
        nonlocal seq
        by_left[span.left] = by_right[span.right] = span
        when = span.expiry + 1
        if when < n_slots:
            seq += 1
            heapq.heappush(heap, (when, 0, seq, span))

    def unlink(span):
        span.alive = False
        del by_left[span.left]
        del by_right[span.right]

    def eta(pos, stored_slot, now):
        mem = nodes[pos].memory
        if mem is None:
            return 1.0
        return mem.retrieval_efficiency((now - stored_slot) * slot_s)

    for i in range(n):
        schedule_arrival(i, 0)

    while heap:
        now = heap[0][0]
        t_now = now * slot_s
        pending = []
        if log:
            while pass_i < len(pass_events) and pass_events[pass_i].time_s <= t_now:
                pending.append(pass_events[pass_i])
                pass_i += 1
        while heap and heap[0][0] == now and heap[0][1] == 0:
            span = heapq.heappop(heap)[3]
            if not span.alive:
                continue
            unlink(span)
            if log:
                pos = span.left if span.exp_left <= span.exp_right else span.right
                pending.append(SimEvent(t_now, EventKind.MEMORY_EXPIRED, positions[pos]))
            for i in range(span.left, span.right):
                schedule_arrival(i, now)
        if log and pending:
            log.add_sorted(pending)

        arrived = []
        while heap and heap[0][0] == now:
            i = heapq.heappop(heap)[2]
            successes[i] += 1
            blocked_since[i] = now + 1
            store(_Span(i, i + 1, now, now, now + ages[i], now + ages[i + 1], now, 1, 0))
            if log:
                arrived.append(SimEvent(t_now, EventKind.PAIR_GENERATED, labels[i]))
                arrived.extend(
                    SimEvent(t_now, EventKind.PHOTON_STORED, positions[pos])
                    for pos in {i, i + 1}
                    if nodes[pos].memory is not None
                )
        if arrived:
            log.add_sorted(arrived)

        freed = []
        fired = True
        while fired:
            fired = False
            for j in order_of:
                left, right = by_right.get(j), by_left.get(j)
                if left is None or right is None:
                    continue
                lo, hi = reach[j]
                if left.left > lo or right.right < hi:
                    continue  # an earlier round has not finished this stretch
                p = swap_p[j] * eta(j, left.t_right, now) * eta(j, right.t_left, now)
                ok = bool(bsm_rng.random() < p)
                unlink(left)
                unlink(right)
                fired = True
                if log:
                    log.add(SimEvent(t_now, EventKind.BSM_FIRED, positions[j],
                                     success=ok))
                if ok:
                    store(_Span(left.left, right.right, left.t_left, right.t_right,
                                left.exp_left, right.exp_right,
                                min(left.earliest, right.earliest),
                                left.pairs + right.pairs,
                                left.swaps + right.swaps + 1))
                else:
                    freed.extend(range(left.left, right.right))

        full = by_left.get(0)
        if full is not None and full.right == n:
            unlink(full)
            freed.extend(range(n))
            e2e += 1
            latency = (now - full.earliest) * slot_s + heralding
            latency_sum += latency
            if log:
                log.add(SimEvent(t_now, EventKind.END_TO_END, latency_s=latency,
                                 pairs=full.pairs, swaps=full.swaps))
        for i in freed:
            schedule_arrival(i, now + 1)

    for span in by_left.values():
        for i in range(span.left, span.right):
            successes[i] += arrivals[i].count_between(blocked_since[i], n_slots)
    if log:
        log.add_sorted(pass_events[pass_i:])

    latency = latency_sum / e2e if e2e else math.nan
    counts = {labels[i]: successes[i] for i in range(n)}
    return _result(network, binding, sim, plan, e2e, latency, counts, "events",
                   tuple(log.events) if log else None, log.total if log else 0)


def _result(network, binding, sim, plan, e2e, latency, successes, engine, events,
            events_total) -> SimResult:
    attempts = {
        seg.label: int((plan.block_len * plan.seg_active[i]).sum())
        for i, seg in enumerate(binding.segments)
    }
    all_active = plan.seg_active.all(axis=0)
    return SimResult(
        e2e_successes=int(e2e),
        duration_s=sim.duration_s,
        slot_s=plan.slot_s,
        n_slots=plan.n_slots,
        seed=sim.seed,
        engine=engine,
        mean_latency_s=float(latency),
        active_time_s=float((plan.block_len * all_active).sum() * plan.slot_s),
        per_link_attempts=attempts,
        per_link_successes=successes,
        event_log=events,
        events_total=events_total,
    )


def run_simulation(
    network: Network,
    binding: ChainBinding,
    sim: SimConfig,
    *,
    max_events: int = 0,
    engine: str = "auto",
) -> SimResult:
    """Simulate ``binding`` on ``network`` for ``sim.duration_s`` seconds.

    ``max_events > 0`` records up to that many events in ``event_log``.
    ``engine`` is ``"auto"``, ``"events"`` or ``"counts"``; ``auto`` picks
    ``counts`` when no repeater has memory and no log is requested.
    """
    _require_simulatable(network, binding)
    plan = _plan(network, binding, sim)
    memoryless = all(network.node(r).memory is None for r in binding.repeaters)
    if engine == "auto":
        engine = "counts" if memoryless and not max_events else "events"
    if engine == "counts":
        if not memoryless:
            raise SimulationError("the counts engine needs memoryless repeaters")
        if max_events:
            raise SimulationError("the counts engine does not record events")
        return _run_counts(network, binding, sim, plan)
    if engine == "events":
        return _run_events(network, binding, sim, plan, max_events)
    raise SimulationError(f"unknown engine {engine!r}")


# -- batches and sweeps --------------------------------------------------------


@dataclass(frozen=True)
class RateEstimate:
    mean_rate_hz: float
    stderr_hz: float
    rates_hz: tuple[float, ...]
    active_fraction: float


def _one_batch(args):
    network, binding, sim, engine = args
    res = run_simulation(network, binding, sim, engine=engine)
    return res.e2e_rate_hz, res.active_time_s / sim.duration_s


def estimate_rate(
    network: Network,
    binding: ChainBinding,
    sim: SimConfig,
    batches: int = 10,
    *,
    jobs: int = 1,
    engine: str = "auto",
) -> RateEstimate:
    """Mean and standard error of the end-to-end rate over seeds ``seed .. seed+batches-1``."""
    if batches < 2:
        raise SimulationError("need at least two batches for a standard error")
    _require_simulatable(network, binding)
    tasks = [
        (network, binding, _with_seed(sim, sim.seed + b), engine) for b in range(batches)
    ]
    if jobs > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            out = list(pool.map(_one_batch, tasks))
    else:
        out = [_one_batch(t) for t in tasks]
    rates = np.array([r for r, _ in out])
    return RateEstimate(
        mean_rate_hz=float(rates.mean()),
        stderr_hz=float(rates.std(ddof=1) / math.sqrt(batches)),
        rates_hz=tuple(float(r) for r in rates),
        active_fraction=float(np.mean([a for _, a in out])),
    )


def _with_seed(sim: SimConfig, seed: int) -> SimConfig:
    return SimConfig(sim.duration_s, sim.slot_s, seed % 2**64, sim.time_origin_s,
                     sim.geometry_step_s)


@dataclass(frozen=True)
class SweepRow:
    distance_km: float
    rate_hz: float
    stderr_hz: float


def sweep_distance(
    template: Callable[[float], tuple[Network, ChainBinding]],
    distances_km: Iterable[float],
    sim: SimConfig,
    batches: int = 10,
    *,
    jobs: int = 1,
) -> list[SweepRow]:
    """Estimate the rate at each distance; ``template`` builds the network for one distance."""
    distances = [float(d) for d in distances_km]
    if not distances:
        raise SimulationError("need at least one distance")
    if any(b <= a for a, b in zip(distances, distances[1:])):
        raise SimulationError("distances must be strictly increasing")
    rows = []
    for d in distances:
        network, binding = template(d)
        est = estimate_rate(network, binding, sim, batches, jobs=jobs)
        rows.append(SweepRow(d, est.mean_rate_hz, est.stderr_hz))
    return rows


def reference_chain(network: Network, binding: ChainBinding, t_s: float = 0.0) -> ChainConfig:
    """Analytic chain equivalent to ``binding`` with geometry frozen at ``t_s``.

    Visibility is ignored; the rate is that of the slowest source and the
    Bell measurement and memory are taken from the first repeater.
    """
    times = np.array([t_s])
    probs = []
    for seg in binding.segments:
        eps = network.node(seg.source).eps
        p = eps.heralding_efficiency
        for a, b in seg.arms:
            p *= float(_link_profile(network, a, b, times)[1][0])
        probs.append(min(1.0, p))
    first = network.node(binding.repeaters[0]) if binding.repeaters else None
    from .model import BsmParams

    return ChainConfig(
        n_segments=binding.n_segments,
        per_segment_transmittance=tuple(probs),
        bsm=first.bsm if first else BsmParams(),
        source_attempt_rate_hz=1.0 / default_slot_s(network, binding),
        memory=first.memory if first else None,
    )


# -- fiber chain templates -------------------------------------------------------


def fiber_chain(
    segment_lengths_km,
    *,
    alpha_db_per_km: float = 0.2,
    eps=None,
    bsm=None,
    repeater_memory=None,
    user_memory=None,
    heralding_latency_s: float = 0.0,
    strategy: SwapStrategy | str = SwapStrategy.BALANCED,
) -> tuple[Network, ChainBinding]:
    """A terrestrial repeater chain with one pair source midway along each segment.

    Users sit at the two ends, repeaters between consecutive segments; each
    source feeds its two neighbours through fibers of half the segment length.
    """
    from .model import BsmParams, ChannelParams, EpsParams, Link, Node, NodeKind
    from .orbit import EARTH_RADIUS_KM, GroundSite

    lengths = [float(x) for x in segment_lengths_km]
    if not lengths or any(x <= 0 for x in lengths):
        raise SimulationError("segment lengths must be positive")
    eps = eps or EpsParams(pair_rate_hz=1e9)
    bsm = bsm or BsmParams()
    n = len(lengths)

    def site(km):
        lon = math.degrees(km / EARTH_RADIUS_KM)
        return GroundSite(0.0, (lon + 180.0) % 360.0 - 180.0)

    ends = ["user_a"] + [f"r{i}" for i in range(1, n)] + ["user_b"]
    offsets = np.concatenate([[0.0], np.cumsum(lengths)])
    nodes = [Node("user_a", "ground_user", site=site(0.0), memory=user_memory)]
    nodes += [
        Node(ends[i], "ground_repeater", site=site(offsets[i]), bsm=bsm,
             memory=repeater_memory)
        for i in range(1, n)
    ]
    nodes.append(Node("user_b", "ground_user", site=site(offsets[-1]), memory=user_memory))
    channel = ChannelParams("fiber", fiber_alpha_db_per_km=alpha_db_per_km)
    links, segments = [], []
    for i, length in enumerate(lengths):
        src = f"s{i + 1}"
        nodes.append(Node(src, "ground_source", site=site(offsets[i] + length / 2), eps=eps))
        links.append(Link(src, ends[i], channel, length / 2))
        links.append(Link(src, ends[i + 1], channel, length / 2))
        segments.append(Segment(src, ends[i], ends[i + 1],
                                ((src, ends[i]), (src, ends[i + 1]))))
    schedule = build_swap_schedule(n - 1, strategy) if n > 1 else None
    network = Network(nodes, links, heralding_latency_s, ("user_a", "user_b"))
    return network, ChainBinding(tuple(segments), schedule)


def repeater_template(segment_km: float, **kwargs) -> Callable[[float], tuple]:
    """Sweep template: a chain with ``round(d / segment_km)`` equal segments (at least one)."""
    from .swapchain import segment_chain

    def build(distance_km):
        n = max(1, int(round(distance_km / segment_km)))
        return fiber_chain(segment_chain(distance_km, n), **kwargs)

    return build


def direct_template(**kwargs) -> Callable[[float], tuple]:
    """Sweep template: one unrepeated fiber span between the users."""

    def build(distance_km):
        return fiber_chain([distance_km], **kwargs)

    return build
