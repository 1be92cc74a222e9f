"""Overhead-pass geometry for a LEO satellite seen from a ground station.

Models a circular two-body orbit over a spherical Earth and derives the
range, elevation, radial velocity, Doppler shift, Doppler rate, and
free-space propagation loss time series that drive the long-run
acquisition experiments.  No ephemeris ingestion, no J2, no atmosphere:
the geometry only has to reproduce realistic LEO Doppler/power dynamics.

Sign convention: positive radial velocity means closing range and positive
Doppler, applied consistently everywhere.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

SPEED_OF_LIGHT = 299792458.0  # m/s
EARTH_RADIUS = 6371e3  # m, spherical model
MU_EARTH = 3.986004418e14  # m^3/s^2


@dataclass
class PassSample:
    """State of the link at one epoch of a pass."""

    t: float                 # seconds since scenario start
    range_m: float
    elevation_deg: float
    radial_velocity: float   # m/s, positive closing
    doppler: float           # Hz
    doppler_rate: float      # Hz/s
    path_loss_db: float


@dataclass
class PassScenario:
    """Time series of link geometry over one visibility window."""

    epoch_step: float
    samples: list[PassSample]

    def to_csv(self) -> str:
        lines = ["t_s,range_m,elev_deg,vrad_mps,doppler_hz,doppler_rate_hzps,path_loss_db"]
        for s in self.samples:
            lines.append(f"{s.t!r},{s.range_m!r},{s.elevation_deg!r},"
                         f"{s.radial_velocity!r},{s.doppler!r},"
                         f"{s.doppler_rate!r},{s.path_loss_db!r}")
        return "\n".join(lines) + "\n"


def doppler_shift(carrier_freq: float, radial_velocity: float) -> float:
    """Doppler shift f * v / c; positive when the range is closing."""
    return carrier_freq * radial_velocity / SPEED_OF_LIGHT


def radial_velocity(range_series, dt: float) -> np.ndarray:
    """Radial velocity from a range series sampled at fixed step dt.

    Central differences at interior points, one-sided at the ends, negated
    so that closing range gives positive velocity.
    """
    r = np.asarray(range_series, dtype=np.float64)
    if r.size < 2:
        raise ValueError("range series needs at least 2 samples")
    return -_central_difference(r, dt)


def _central_difference(y: np.ndarray, dt: float) -> np.ndarray:
    d = np.empty_like(y)
    d[1:-1] = (y[2:] - y[:-2]) / (2.0 * dt)
    d[0] = (y[1] - y[0]) / dt
    d[-1] = (y[-1] - y[-2]) / dt
    return d


def free_space_loss(range_m: float, freq: float) -> float:
    """Free-space path loss 20*log10(4*pi*d*f/c) in dB."""
    return 20.0 * np.log10(4.0 * np.pi * range_m * freq / SPEED_OF_LIGHT)


def max_slant_range(orbit_height: float, elevation_deg: float) -> float:
    """Slant range at a given elevation for a circular orbit (closed form)."""
    re = EARTH_RADIUS
    sin_e = math.sin(math.radians(elevation_deg))
    h = orbit_height
    return math.sqrt(re * re * sin_e * sin_e + 2.0 * re * h + h * h) - re * sin_e


def simulate_pass(orbit_height: float, elevation_mask: float = 10.0,
                  cross_track_offset_deg: float = 0.0,
                  epoch_step: float = 1.0,
                  carrier_freq: float = 1.5e9) -> PassScenario:
    """Simulate one visibility window of an overhead (or offset) pass.

    The satellite moves on a circular orbit of radius Re + h; the station
    sits at a fixed cross-track angular offset from the orbit plane.  The
    sample grid is symmetric about the point of closest approach, so for a
    directly-overhead pass the zenith sample has range == orbit_height
    exactly.  Samples are emitted only while elevation >= elevation_mask.
    """
    if not 200e3 < orbit_height < 2000e3:
        raise ValueError(f"orbit height {orbit_height} m outside (200 km, 2000 km)")
    if not 0 <= elevation_mask < 90:
        raise ValueError(f"elevation mask {elevation_mask} outside [0, 90)")

    re = EARTH_RADIUS
    r_orb = re + orbit_height
    omega = math.sqrt(MU_EARTH / r_orb ** 3)  # orbital angular rate, rad/s
    beta = math.radians(cross_track_offset_deg)

    # Earth-central angle at which elevation drops to the mask.
    e_mask = math.radians(elevation_mask)
    psi_max = math.acos(re / r_orb * math.cos(e_mask)) - e_mask
    if math.cos(psi_max) > math.cos(beta):
        raise ValueError(
            f"no visibility: cross-track offset {cross_track_offset_deg} deg "
            f"keeps the satellite below the {elevation_mask} deg mask")

    # Along-track half-angle of the visible arc, then a symmetric time grid
    # about closest approach (k = 0).
    theta_vis = math.acos(min(1.0, math.cos(psi_max) / math.cos(beta)))
    k_max = int(math.floor(theta_vis / (omega * epoch_step)))
    k = np.arange(-k_max, k_max + 1)
    theta = omega * epoch_step * k

    cos_psi = math.cos(beta) * np.cos(theta)
    # hypot form is exact at zenith: range = hypot(h, 0) = h.
    rng = np.hypot(r_orb - re, 2.0 * math.sqrt(re * r_orb)
                   * np.sin(np.arccos(np.clip(cos_psi, -1.0, 1.0)) / 2.0))
    sin_elev = (r_orb * cos_psi - re) / rng
    elev = np.degrees(np.arcsin(np.clip(sin_elev, -1.0, 1.0)))

    vrad = radial_velocity(rng, epoch_step)
    dopp = doppler_shift(carrier_freq, vrad)
    dopp_rate = _central_difference(dopp, epoch_step)
    loss = free_space_loss(rng, carrier_freq)

    t = (k + k_max) * epoch_step
    samples = [PassSample(t=float(t[i]), range_m=float(rng[i]),
                          elevation_deg=float(elev[i]),
                          radial_velocity=float(vrad[i]),
                          doppler=float(dopp[i]),
                          doppler_rate=float(dopp_rate[i]),
                          path_loss_db=float(loss[i]))
               for i in range(len(k))]
    return PassScenario(epoch_step=epoch_step, samples=samples)
