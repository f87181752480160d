"""Clustered mmWave channel with uniform planar arrays.

The channel is a sum of ``n_clusters * n_rays`` planar-wave contributions

.. math::

    H = \\gamma \\sum_{i,l} \\alpha_{il} \\Lambda_r \\Lambda_t
        a_r(\\phi^r_{il}, \\theta^r_{il}) a_t(\\phi^t_{il}, \\theta^t_{il})^H

with :math:`\\gamma = \\sqrt{N_t N_r / (N_{cl} N_{ray})}` so that
:math:`E\\|H\\|_F^2 = N_t N_r`.  Angles follow the convention of a UPA in
the yz-plane: ``elevation`` is measured from the z axis, so boresight is
``(azimuth, elevation) = (0, pi/2)``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

__all__ = [
    "ArrayGeometry",
    "ChannelConfig",
    "Ray",
    "ChannelRealization",
    "steering_vector",
    "element_gain",
    "sample_ray_angles",
    "generate_channel",
    "channel_from_rays",
    "write_channel",
    "read_channel",
]

DEFAULT_ANGLE_SPREAD = np.deg2rad(7.5)


@dataclass(frozen=True)
class ArrayGeometry:
    """Uniform planar array in the yz-plane.

    Parameters
    ----------
    n_y, n_z : int
        Grid points along y and z.
    spacing : float
        Element spacing in wavelengths.
    sector_azimuth_halfwidth, sector_elevation_halfwidth : float
        Half-widths (radians) of the ideal sector element pattern.
    omni : bool
        Disable sector gating.
    """

    n_y: int
    n_z: int
    spacing: float = 0.5
    sector_azimuth_halfwidth: float = np.pi / 6
    sector_elevation_halfwidth: float = np.pi / 12
    omni: bool = True

    def __post_init__(self):
        if self.n_y < 1 or self.n_z < 1:
            raise ValueError(f"array dimensions must be positive, got {self.n_y}x{self.n_z}")
        if self.spacing <= 0:
            raise ValueError("element spacing must be positive")

    @property
    def n_elements(self) -> int:
        return self.n_y * self.n_z

    @classmethod
    def sector(cls, n_y, n_z, azimuth_width=np.pi / 3, elevation_width=np.pi / 6, spacing=0.5):
        """Sectorized array; widths are full sector angles (60 and 30 degrees by default)."""
        return cls(n_y, n_z, spacing, azimuth_width / 2, elevation_width / 2, omni=False)


@dataclass(frozen=True)
class ChannelConfig:
    n_clusters: int
    n_rays: int
    tx_geometry: ArrayGeometry
    rx_geometry: ArrayGeometry
    angle_spread: float = DEFAULT_ANGLE_SPREAD
    seed: int = 0
    # cluster DoD means drawn inside the transmit sector; when False they are
    # drawn over the whole sphere and only gated by the element pattern
    confine_dod: bool = True

    def __post_init__(self):
        if self.n_clusters < 1 or self.n_rays < 1:
            raise ValueError("n_clusters and n_rays must be >= 1")
        if self.angle_spread < 0:
            raise ValueError("angle_spread must be non-negative")

    @property
    def gamma(self) -> float:
        n_t = self.tx_geometry.n_elements
        n_r = self.rx_geometry.n_elements
        return float(np.sqrt(n_t * n_r / (self.n_clusters * self.n_rays)))


@dataclass(frozen=True)
class Ray:
    cluster: int
    index: int
    alpha: complex
    dod: tuple  # (azimuth, elevation)
    doa: tuple


@dataclass
class ChannelRealization:
    h: np.ndarray
    rays: list = field(default_factory=list)
    seed: int | None = None

    @property
    def shape(self):
        return self.h.shape


def _steering_matrix(geometry, azimuth, elevation):
    # one unit-norm response per column; angles are 1-D arrays
    az = np.atleast_1d(np.asarray(azimuth, dtype=float))
    el = np.atleast_1d(np.asarray(elevation, dtype=float))
    m = np.repeat(np.arange(geometry.n_y), geometry.n_z)[:, None]
    n = np.tile(np.arange(geometry.n_z), geometry.n_y)[:, None]
    kd = 2.0 * np.pi * geometry.spacing
    phase = kd * (m * (np.sin(az) * np.sin(el)) + n * np.cos(el))
    return np.exp(1j * phase) / np.sqrt(geometry.n_elements)


def steering_vector(geometry: ArrayGeometry, azimuth: float, elevation: float) -> np.ndarray:
    """Unit-norm UPA response.

    Element ``(m, n)`` sits at flat index ``m * n_z + n`` and carries phase
    ``2*pi*spacing*(m*sin(az)*sin(el) + n*cos(el))``.
    """
    return _steering_matrix(geometry, azimuth, elevation)[:, 0]


def element_gain(geometry: ArrayGeometry, azimuth: float, elevation: float) -> float:
    if geometry.omni:
        return 1.0
    inside = (abs(azimuth) <= geometry.sector_azimuth_halfwidth
              and abs(elevation - np.pi / 2) <= geometry.sector_elevation_halfwidth)
    return 1.0 if inside else 0.0


def _wrap(azimuth):
    return (azimuth + np.pi) % (2 * np.pi) - np.pi


def _sphere_means(rng, size):
    az = rng.uniform(-np.pi, np.pi, size)
    el = np.arccos(rng.uniform(-1.0, 1.0, size))
    return az, el


def _sector_means(rng, geometry, size):
    if geometry.omni:
        return _sphere_means(rng, size)
    az = rng.uniform(-geometry.sector_azimuth_halfwidth, geometry.sector_azimuth_halfwidth, size)
    el = rng.uniform(np.pi / 2 - geometry.sector_elevation_halfwidth,
                     np.pi / 2 + geometry.sector_elevation_halfwidth, size)
    return az, el


def _angle_arrays(config, rng):
    n_cl, n_ray = config.n_clusters, config.n_rays
    if config.confine_dod:
        t_az, t_el = _sector_means(rng, config.tx_geometry, n_cl)
    else:
        t_az, t_el = _sphere_means(rng, n_cl)
    r_az, r_el = _sphere_means(rng, n_cl)
    off = rng.laplace(0.0, 1.0, size=(4, n_cl, n_ray)) * config.angle_spread
    dod_az = _wrap(t_az[:, None] + off[0]).ravel()
    dod_el = np.clip(t_el[:, None] + off[1], 0.0, np.pi).ravel()
    doa_az = _wrap(r_az[:, None] + off[2]).ravel()
    doa_el = np.clip(r_el[:, None] + off[3], 0.0, np.pi).ravel()
    return dod_az, dod_el, doa_az, doa_el


def sample_ray_angles(config: ChannelConfig, rng: np.random.Generator):
    """Draw ``(cluster, ray, dod, doa)`` tuples for every ray.

    Cluster means are uniform (DoD over the transmit sector, DoA over the
    sphere); per-ray offsets are Laplacian with scale ``angle_spread``.
    Azimuths wrap to [-pi, pi), elevations are clamped to [0, pi].
    """
    dod_az, dod_el, doa_az, doa_el = _angle_arrays(config, rng)
    out = []
    for k in range(dod_az.size):
        i, l = divmod(k, config.n_rays)
        out.append((i, l, (float(dod_az[k]), float(dod_el[k])), (float(doa_az[k]), float(doa_el[k]))))
    return out


def _gain_array(geometry, az, el):
    if geometry.omni:
        return np.ones_like(az)
    inside = ((np.abs(az) <= geometry.sector_azimuth_halfwidth)
              & (np.abs(el - np.pi / 2) <= geometry.sector_elevation_halfwidth))
    return inside.astype(float)


def _assemble(gamma, tx, rx, alpha, dod_az, dod_el, doa_az, doa_el):
    gains = alpha * _gain_array(tx, dod_az, dod_el) * _gain_array(rx, doa_az, doa_el)
    a_t = _steering_matrix(tx, dod_az, dod_el)
    a_r = _steering_matrix(rx, doa_az, doa_el)
    return gamma * (a_r * gains) @ a_t.conj().T


def channel_from_rays(rays, tx: ArrayGeometry, rx: ArrayGeometry, gamma: float) -> np.ndarray:
    """Rebuild the channel matrix from stored ray parameters."""
    if not rays:
        return np.zeros((rx.n_elements, tx.n_elements), dtype=complex)
    dod = np.array([r.dod for r in rays], dtype=float)
    doa = np.array([r.doa for r in rays], dtype=float)
    alpha = np.array([r.alpha for r in rays], dtype=complex)
    return _assemble(gamma, tx, rx, alpha, dod[:, 0], dod[:, 1], doa[:, 0], doa[:, 1])


def generate_channel(config: ChannelConfig, rng: np.random.Generator | None = None) -> ChannelRealization:
    """Draw one clustered channel realization.

    Ray gains are unit-variance circularly-symmetric complex normal.  When
    ``rng`` is omitted a generator seeded from ``config.seed`` is used.
    """
    if rng is None:
        rng = np.random.default_rng(config.seed)
    angles = _angle_arrays(config, rng)
    n = angles[0].size
    alpha = (rng.standard_normal(n) + 1j * rng.standard_normal(n)) / np.sqrt(2.0)
    h = _assemble(config.gamma, config.tx_geometry, config.rx_geometry, alpha, *angles)
    dod_az, dod_el, doa_az, doa_el = angles
    rays = [Ray(k // config.n_rays, k % config.n_rays, complex(alpha[k]),
                (float(dod_az[k]), float(dod_el[k])), (float(doa_az[k]), float(doa_el[k])))
            for k in range(n)]
    return ChannelRealization(h=h, rays=rays, seed=config.seed)


# -- MMWCH1 dump format ------------------------------------------------------
# text header "MMWCH1 N_r N_t seed\n" followed by N_r*N_t little-endian
# float64 pairs (real, imag) in row-major order

_MAGIC = "MMWCH1"


def write_channel(path, h: np.ndarray, seed: int = 0) -> None:
    h = np.asarray(h, dtype=complex)
    n_r, n_t = h.shape
    payload = np.empty(2 * h.size, dtype="<f8")
    payload[0::2] = h.real.ravel(order="C")
    payload[1::2] = h.imag.ravel(order="C")
    with open(path, "wb") as fh:
        fh.write(f"{_MAGIC} {n_r} {n_t} {int(seed)}\n".encode("ascii"))
        fh.write(payload.tobytes())


def read_channel(path):
    """Return ``(h, seed)`` from an MMWCH1 file."""
    data = Path(path).read_bytes()
    newline = data.find(b"\n")
    if newline < 0:
        raise ValueError(f"{path}: missing MMWCH1 header")
    fields = data[:newline].decode("ascii").split()
    if len(fields) != 4 or fields[0] != _MAGIC:
        raise ValueError(f"{path}: bad header {data[:newline]!r}")
    n_r, n_t, seed = int(fields[1]), int(fields[2]), int(fields[3])
    payload = np.frombuffer(data[newline + 1:], dtype="<f8")
    if payload.size != 2 * n_r * n_t:
        raise ValueError(f"{path}: expected {2 * n_r * n_t} floats, found {payload.size}")
    h = (payload[0::2] + 1j * payload[1::2]).reshape(n_r, n_t)
    return h, seed
