"""Per-photon transmittance of fiber and free-space optical channels.

All losses compose multiplicatively (additively in dB) and every result is a
:class:`Transmittance` in ``[0, 1]``: a passive channel can only lose photons.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import TYPE_CHECKING

import numpy as np

if TYPE_CHECKING:
    from .model import ChannelParams

SECONDS_PER_CENTURY = 3.1557e9


class Transmittance(float):
    """A probability of photon survival; construction rejects values outside [0, 1]."""

    def __new__(cls, value):
        value = float(value)
        if not 0.0 <= value <= 1.0 or math.isnan(value):
            raise ValueError(f"transmittance must lie in [0, 1], got {value!r}")
        return super().__new__(cls, value)

    @property
    def value(self) -> float:
        return float(self)

    @property
    def loss_db(self) -> float:
        return math.inf if self == 0.0 else max(0.0, -10.0 * math.log10(self))


def _nonneg(name, x):
    if not x >= 0:
        raise ValueError(f"{name} must be nonnegative, got {x!r}")


def _positive(name, x):
    if not x > 0:
        raise ValueError(f"{name} must be positive, got {x!r}")


def db_to_transmittance(loss_db: float) -> Transmittance:
    _nonneg("loss_db", loss_db)
    return Transmittance(10.0 ** (-loss_db / 10.0))


def fiber_transmittance(length_km: float, alpha_db_per_km: float) -> Transmittance:
    _nonneg("length_km", length_km)
    _nonneg("alpha_db_per_km", alpha_db_per_km)
    return db_to_transmittance(alpha_db_per_km * length_km)


def freespace_geometric_transmittance(
    range_km: float, wavelength_m: float, tx_aperture_m: float, rx_aperture_m: float
) -> Transmittance:
    """Far-field diffraction-limited aperture coupling, capped at 1.

    ``(pi * Dt * Dr / (4 * lambda * L))**2``; in the near field the formula
    exceeds one and the receiver simply captures the whole beam.
    """
    _positive("range_km", range_km)
    _positive("wavelength_m", wavelength_m)
    _positive("tx_aperture_m", tx_aperture_m)
    _positive("rx_aperture_m", rx_aperture_m)
    return Transmittance(
        float(_coupling(range_km, wavelength_m, tx_aperture_m, rx_aperture_m))
    )


def _coupling(range_km, wavelength_m, tx_aperture_m, rx_aperture_m):
    ratio = math.pi * tx_aperture_m * rx_aperture_m / (4.0 * wavelength_m * 1e3)
    return np.minimum(1.0, (ratio / np.asarray(range_km, dtype=float)) ** 2)


@dataclass(frozen=True)
class LinkBudget:
    """Itemized losses of one channel at one geometry, all in dB."""

    kind: str
    distance_km: float
    geometric_db: float
    atmospheric_db: float
    pointing_db: float
    system_db: float
    detector_db: float

    @property
    def total_db(self) -> float:
        return (
            self.geometric_db
            + self.atmospheric_db
            + self.pointing_db
            + self.system_db
            + self.detector_db
        )

    @property
    def transmittance(self) -> Transmittance:
        if math.isinf(self.total_db):
            return Transmittance(0.0)
        return db_to_transmittance(self.total_db)


def _geometry_distance(channel: ChannelParams, length_km, range_km) -> float:
    from .model import LinkKind

    if channel.kind is LinkKind.FIBER:
        if range_km is not None or length_km is None:
            raise ValueError("Fiber channels take length_km, not range_km")
        return length_km
    if length_km is not None or range_km is None:
        raise ValueError(f"{channel.kind.value} channels take range_km, not length_km")
    return range_km


def link_budget(
    channel: ChannelParams,
    *,
    length_km: float | None = None,
    range_km: float | None = None,
) -> LinkBudget:
    """Itemize the losses of ``channel`` over the given distance."""
    from .model import LinkKind

    distance = _geometry_distance(channel, length_km, range_km)
    if channel.kind is LinkKind.FIBER:
        geometric = fiber_transmittance(distance, channel.fiber_alpha_db_per_km)
        atmospheric = 0.0
    else:
        if channel.tx_aperture_m is None or channel.rx_aperture_m is None:
            raise ValueError(f"{channel.kind.value} channel needs tx/rx apertures")
        geometric = freespace_geometric_transmittance(
            distance, channel.wavelength_m, channel.tx_aperture_m, channel.rx_aperture_m
        )
        atmospheric = (
            0.0 if channel.kind is LinkKind.QOISL else channel.atmospheric_penalty_db
        )
    return LinkBudget(
        kind=channel.kind.value,
        distance_km=distance,
        geometric_db=geometric.loss_db,
        atmospheric_db=atmospheric,
        pointing_db=0.0 if channel.kind is LinkKind.FIBER else channel.pointing_loss_db,
        system_db=channel.system_loss_db,
        detector_db=Transmittance(channel.detector_efficiency).loss_db,
    )


def channel_transmittance(
    channel: ChannelParams,
    *,
    length_km: float | None = None,
    range_km: float | None = None,
) -> Transmittance:
    """Photon survival probability through ``channel``, detector included.

    Fiber channels need ``length_km``; optical kinds need ``range_km``.
    Inter-satellite links never carry an atmospheric penalty.
    """
    from .model import LinkKind

    distance = _geometry_distance(channel, length_km, range_km)
    if channel.kind is LinkKind.FIBER:
        t = fiber_transmittance(distance, channel.fiber_alpha_db_per_km)
        extra_db = channel.system_loss_db
    else:
        if channel.tx_aperture_m is None or channel.rx_aperture_m is None:
            raise ValueError(f"{channel.kind.value} channel needs tx/rx apertures")
        t = freespace_geometric_transmittance(
            distance, channel.wavelength_m, channel.tx_aperture_m, channel.rx_aperture_m
        )
        atmospheric = (
            0.0 if channel.kind is LinkKind.QOISL else channel.atmospheric_penalty_db
        )
        extra_db = atmospheric + channel.pointing_loss_db + channel.system_loss_db
    return Transmittance(t * db_to_transmittance(extra_db) * channel.detector_efficiency)


def transmittance_profile(channel: ChannelParams, distances_km) -> np.ndarray:
    """:func:`channel_transmittance` evaluated over an array of distances."""
    from .model import LinkKind

    d = np.asarray(distances_km, dtype=float)
    if np.any(d < 0) or (channel.kind.is_optical and np.any(d <= 0)):
        raise ValueError("distances must be positive")
    if channel.kind is LinkKind.FIBER:
        base = 10.0 ** (-channel.fiber_alpha_db_per_km * d / 10.0)
        extra_db = channel.system_loss_db
    else:
        if channel.tx_aperture_m is None or channel.rx_aperture_m is None:
            raise ValueError(f"{channel.kind.value} channel needs tx/rx apertures")
        base = _coupling(
            d, channel.wavelength_m, channel.tx_aperture_m, channel.rx_aperture_m
        )
        atmospheric = (
            0.0 if channel.kind is LinkKind.QOISL else channel.atmospheric_penalty_db
        )
        extra_db = atmospheric + channel.pointing_loss_db + channel.system_loss_db
    return base * float(db_to_transmittance(extra_db)) * channel.detector_efficiency


def expected_detections(
    source_rate_hz: float, transmittance: float, duration_s: float
) -> float:
    """Mean photon count: emission rate x survival probability x time."""
    _nonneg("duration_s", duration_s)
    return source_rate_hz * float(Transmittance(transmittance)) * duration_s
