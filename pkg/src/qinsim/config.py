"""Read and write network configuration files (JSON or TOML).

Layout, keys in snake_case with units in the names::

    schema_version = 1

    [network]
    classical_heralding_latency_s = 0.0
    elevation_mask_deg = 10.0
    end_users = ["user_a", "user_b"]

    [[nodes]]
    id = "sat1"
    kind = "satellite_source"
    orbit = { altitude_km = 500.0 }
    eps = { pair_rate_hz = 1e6 }

    [[links]]
    a = "sat1"
    b = "user_a"
    channel = { kind = "downlink", tx_aperture_m = 0.3, rx_aperture_m = 1.0 }

    [chain]                       # optional
    schedule = [[1, 3], [2]]      # or strategy = "nested"
    [[chain.segments]]
    source = "sat1"
    left = "user_a"
    right = "user_b"
    arms = [["sat1", "user_a"], ["sat1", "user_b"]]

    [sim]                         # optional SimConfig fields
    duration_s = 10.0

Infinite memory lifetimes or cutoffs are written as ``inf`` in TOML and
``Infinity`` in JSON.
"""
from __future__ import annotations

import hashlib
import json
import sys
from dataclasses import asdict, fields
from pathlib import Path

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib

from .model import (
    BsmParams,
    ChannelParams,
    EpsParams,
    Link,
    MemoryParams,
    Network,
    Node,
)
from .orbit import GroundSite, Orbit
from .sim import ChainBinding, Segment, SimConfig
from .swapchain import SwapSchedule, build_swap_schedule

SCHEMA_VERSION = 1


class ConfigError(ValueError):
    """A configuration file that cannot be turned into a network."""


_NODE_PARTS = {
    "site": GroundSite,
    "orbit": Orbit,
    "eps": EpsParams,
    "bsm": BsmParams,
    "memory": MemoryParams,
}


def _build(cls, data, where):
    if not isinstance(data, dict):
        raise ConfigError(f"{where}: expected a table, got {type(data).__name__}")
    known = {f.name for f in fields(cls) if f.init}
    unknown = sorted(set(data) - known)
    if unknown:
        raise ConfigError(f"{where}: unknown key(s) {', '.join(unknown)}")
    try:
        return cls(**data)
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"{where}: {exc}") from None


def _plain(obj):
    if obj is None:
        return None
    d = asdict(obj)
    return {k: (v.value if hasattr(v, "value") else v) for k, v in d.items() if v is not None}


def network_to_dict(network: Network, binding: ChainBinding | None = None,
                    sim: SimConfig | None = None) -> dict:
    nodes = []
    for node in network.nodes:
        entry = {"id": node.id, "kind": node.kind.value}
        for key in _NODE_PARTS:
            part = _plain(getattr(node, key))
            if part is not None:
                entry[key] = part
        if node.telescope_aperture_m is not None:
            entry["telescope_aperture_m"] = node.telescope_aperture_m
        nodes.append(entry)
    links = []
    for link in network.links:
        entry = {"a": link.a, "b": link.b, "channel": _plain(link.channel)}
        if link.static_length_km is not None:
            entry["static_length_km"] = link.static_length_km
        links.append(entry)
    net = {
        "classical_heralding_latency_s": network.classical_heralding_latency_s,
        "elevation_mask_deg": network.elevation_mask_deg,
    }
    if network.end_users is not None:
        net["end_users"] = list(network.end_users)
    out = {"schema_version": SCHEMA_VERSION, "network": net, "nodes": nodes, "links": links}
    if binding is not None:
        chain = {
            "segments": [
                {"source": s.source, "left": s.left, "right": s.right,
                 "arms": [list(arm) for arm in s.arms]}
                for s in binding.segments
            ]
        }
        if binding.schedule is not None:
            chain["schedule"] = [sorted(r) for r in binding.schedule.rounds]
        out["chain"] = chain
    if sim is not None:
        out["sim"] = {k: v for k, v in asdict(sim).items() if v is not None}
    return out


def network_from_dict(data: dict) -> tuple[Network, ChainBinding | None]:
    """Inverse of :func:`network_to_dict`; the ``sim`` table is ignored here."""
    version = data.get("schema_version")
    if version != SCHEMA_VERSION:
        raise ConfigError(
            f"unsupported schema_version {version!r}; expected {SCHEMA_VERSION}"
        )
    nodes = []
    for i, raw in enumerate(data.get("nodes", [])):
        raw = dict(raw)
        where = f"nodes[{i}]"
        for key, cls in _NODE_PARTS.items():
            if key in raw:
                raw[key] = _build(cls, raw[key], f"{where}.{key}")
        nodes.append(_build(Node, raw, where))
    links = []
    for i, raw in enumerate(data.get("links", [])):
        raw = dict(raw)
        where = f"links[{i}]"
        if "channel" not in raw:
            raise ConfigError(f"{where}: missing channel")
        raw["channel"] = _build(ChannelParams, raw["channel"], f"{where}.channel")
        links.append(_build(Link, raw, where))
    net = dict(data.get("network", {}))
    if "end_users" in net:
        net["end_users"] = tuple(net["end_users"])
    network = _build(Network, {"nodes": nodes, "links": links, **net}, "network")
    binding = _binding_from(data["chain"]) if "chain" in data else None
    return network, binding


def _binding_from(chain: dict) -> ChainBinding:
    segments = []
    for i, raw in enumerate(chain.get("segments", [])):
        raw = dict(raw)
        raw["arms"] = tuple(tuple(arm) for arm in raw.get("arms", ()))
        segments.append(_build(Segment, raw, f"chain.segments[{i}]"))
    n_bsm = len(segments) - 1
    schedule = None
    try:
        if "schedule" in chain:
            schedule = SwapSchedule(tuple(frozenset(r) for r in chain["schedule"]))
        elif "strategy" in chain and n_bsm > 0:
            schedule = build_swap_schedule(n_bsm, chain["strategy"])
        return ChainBinding(tuple(segments), schedule)
    except ValueError as exc:
        raise ConfigError(f"chain: {exc}") from None


def sim_from_dict(data: dict, **overrides) -> SimConfig | None:
    """SimConfig from the ``sim`` table, with non-None ``overrides`` taking precedence."""
    values = dict(data.get("sim", {}))
    values.update({k: v for k, v in overrides.items() if v is not None})
    if not values:
        return None
    return _build(SimConfig, values, "sim")


def parse_config(text: str, fmt: str) -> dict:
    try:
        if fmt == "json":
            return json.loads(text)
        if fmt == "toml":
            return tomllib.loads(text)
    except (json.JSONDecodeError, tomllib.TOMLDecodeError) as exc:
        raise ConfigError(f"cannot parse {fmt}: {exc}") from None
    raise ConfigError(f"unknown config format {fmt!r}")


def format_of(path: str | Path) -> str:
    suffix = Path(path).suffix.lower()
    return "toml" if suffix == ".toml" else "json"


def load_config(path: str | Path) -> tuple[dict, str]:
    """Parsed file contents and the SHA-256 hex digest of its bytes."""
    raw = Path(path).read_bytes()
    return parse_config(raw.decode("utf-8"), format_of(path)), hashlib.sha256(raw).hexdigest()


def load_network(path: str | Path) -> tuple[Network, ChainBinding | None]:
    data, _ = load_config(path)
    return network_from_dict(data)


def dumps(data: dict, fmt: str = "json") -> str:
    if fmt == "json":
        return json.dumps(data, indent=2) + "\n"
    if fmt == "toml":
        return _toml(data)
    raise ConfigError(f"unknown config format {fmt!r}")


# tomllib only reads, and the schema is small enough to emit by hand.


def _toml_value(v) -> str:
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, int):
        return str(v)
    if isinstance(v, float):
        if v != v:
            return "nan"
        if v in (float("inf"), float("-inf")):
            return "inf" if v > 0 else "-inf"
        return repr(v)
    if isinstance(v, str):
        return json.dumps(v)
    if isinstance(v, (list, tuple)):
        return "[" + ", ".join(_toml_value(x) for x in v) + "]"
    if isinstance(v, dict):
        return "{ " + ", ".join(f"{k} = {_toml_value(x)}" for k, x in v.items()) + " }"
    raise ConfigError(f"cannot write {type(v).__name__} to TOML")


def _toml_table(d: dict) -> list[str]:
    return [f"{k} = {_toml_value(v)}" for k, v in d.items()]


def _toml(data: dict) -> str:
    lines = [f"schema_version = {data['schema_version']}", "", "[network]"]
    lines += _toml_table(data["network"])
    for key in ("nodes", "links"):
        for entry in data[key]:
            lines += ["", f"[[{key}]]"] + _toml_table(entry)
    if "chain" in data:
        chain = data["chain"]
        lines += ["", "[chain]"]
        lines += _toml_table({k: v for k, v in chain.items() if k != "segments"})
        for seg in chain["segments"]:
            lines += ["", "[[chain.segments]]"] + _toml_table(seg)
    if "sim" in data:
        lines += ["", "[sim]"] + _toml_table(data["sim"])
    return "\n".join(lines) + "\n"
