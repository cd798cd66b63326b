"""Aperture grid, frequency constants and direction conventions.

The surface lies in the z = 0 plane with its centre at the origin.  Waves are
re-radiated into the z > 0 hemisphere.  Element (i, j) sits at

    x = (j - (n_cols - 1) / 2) * pitch
    y = ((n_rows - 1) / 2 - i) * pitch

so row index i grows toward -y and arrays shaped ``(n_rows, n_cols)`` are
row-major in the same order as the element list.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

SPEED_OF_LIGHT = 299_792_458.0


@dataclass(frozen=True)
class ArrayGeometry:
    n_rows: int
    n_cols: int
    pitch: float  # m
    frequency: float  # Hz

    def __post_init__(self):
        if int(self.n_rows) != self.n_rows or self.n_rows < 1:
            raise ValueError(f"n_rows must be a positive integer, got {self.n_rows!r}")
        if int(self.n_cols) != self.n_cols or self.n_cols < 1:
            raise ValueError(f"n_cols must be a positive integer, got {self.n_cols!r}")
        if not self.pitch > 0:
            raise ValueError(f"pitch must be positive, got {self.pitch!r}")
        if not self.frequency > 0:
            raise ValueError(f"frequency must be positive, got {self.frequency!r}")
        object.__setattr__(self, "n_rows", int(self.n_rows))
        object.__setattr__(self, "n_cols", int(self.n_cols))
        object.__setattr__(self, "pitch", float(self.pitch))
        object.__setattr__(self, "frequency", float(self.frequency))

    @property
    def wavelength(self) -> float:
        return SPEED_OF_LIGHT / self.frequency

    @property
    def wavenumber(self) -> float:
        return 2.0 * np.pi / self.wavelength

    @property
    def n_elements(self) -> int:
        return self.n_rows * self.n_cols

    @property
    def shape(self) -> tuple[int, int]:
        return (self.n_rows, self.n_cols)

    @property
    def width(self) -> float:
        """Physical aperture extent along x (n_cols * pitch)."""
        return self.n_cols * self.pitch

    @property
    def height(self) -> float:
        return self.n_rows * self.pitch

    @property
    def area(self) -> float:
        return self.width * self.height

    def x_coords(self) -> np.ndarray:
        """Element x coordinate per column."""
        return (np.arange(self.n_cols) - (self.n_cols - 1) / 2.0) * self.pitch

    def y_coords(self) -> np.ndarray:
        """Element y coordinate per row."""
        return ((self.n_rows - 1) / 2.0 - np.arange(self.n_rows)) * self.pitch

    def position_grid(self) -> tuple[np.ndarray, np.ndarray]:
        """(X, Y) arrays of shape (n_rows, n_cols)."""
        X, Y = np.meshgrid(self.x_coords(), self.y_coords())
        return X, Y


def element_positions(geometry: ArrayGeometry) -> np.ndarray:
    """Element positions as an (n_rows * n_cols, 3) array, i outer and j inner."""
    X, Y = geometry.position_grid()
    return np.column_stack([X.ravel(), Y.ravel(), np.zeros(geometry.n_elements)])


def far_field_distance(geometry: ArrayGeometry) -> float:
    """Plane-wave illumination distance 2 D^2 / lambda, D the aperture diagonal."""
    diag_sq = geometry.width**2 + geometry.height**2
    return 2.0 * diag_sq / geometry.wavelength


@dataclass(frozen=True)
class Direction:
    """Direction in the reflection hemisphere, angles in degrees.

    ``theta`` is the polar angle from +z, ``phi`` the azimuth from +x.  Phi is
    reduced into [0, 360).
    """

    theta: float
    phi: float = 0.0

    def __post_init__(self):
        theta = float(self.theta)
        if not -1e-9 <= theta <= 90.0 + 1e-9:
            raise ValueError(f"theta must lie in [0, 90] degrees, got {theta}")
        object.__setattr__(self, "theta", min(max(theta, 0.0), 90.0))
        object.__setattr__(self, "phi", wrap360(self.phi))

    def unit_vector(self) -> np.ndarray:
        return unit_vector(self.theta, self.phi)

    @classmethod
    def from_vector(cls, v) -> "Direction":
        v = np.asarray(v, dtype=float)
        v = v / np.linalg.norm(v)
        theta = np.degrees(np.arccos(np.clip(v[2], -1.0, 1.0)))
        phi = np.degrees(np.arctan2(v[1], v[0])) if np.hypot(v[0], v[1]) > 1e-15 else 0.0
        return cls(theta, phi)

    @classmethod
    def from_cut_angle(cls, angle: float, phi0: float) -> "Direction":
        """Point on the great-circle cut at azimuth ``phi0``; negative angles
        fall on the ``phi0 + 180`` half."""
        if angle >= 0:
            return cls(angle, phi0)
        return cls(-angle, phi0 + 180.0)

    def mirrored(self) -> "Direction":
        """Specular partner: same polar angle, opposite azimuth."""
        return Direction(self.theta, self.phi + 180.0)


def wrap360(angle):
    """Reduce into [0, 360); guards the float case where -tiny % 360 == 360.

    Scalars come back as float, arrays as float arrays.
    """
    a = np.mod(np.asarray(angle, dtype=float), 360.0)
    a = np.where(a >= 360.0, 0.0, a)
    return float(a) if a.ndim == 0 else a


def unit_vector(theta_deg, phi_deg) -> np.ndarray:
    """Vectorised (sin t cos p, sin t sin p, cos t); trailing axis has length 3."""
    t = np.radians(theta_deg)
    p = np.radians(phi_deg)
    return np.stack([np.sin(t) * np.cos(p), np.sin(t) * np.sin(p), np.cos(t)], axis=-1)


def angular_distance(a: Direction, b: Direction) -> float:
    """Great-circle angle between two directions, degrees."""
    dot = float(np.dot(a.unit_vector(), b.unit_vector()))
    return float(np.degrees(np.arccos(np.clip(dot, -1.0, 1.0))))
