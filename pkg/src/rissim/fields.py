"""Aperture illumination and array-factor radiation patterns.

Scalar model only: each element re-radiates its incident field multiplied by
its complex reflection coefficient, weighted by a ``cos(theta)**q`` element
factor.  No coupling, edge diffraction or structural scattering.
"""

from __future__ import annotations

from dataclasses import dataclass, field as dc_field
from typing import Union

import numpy as np

from .geometry import ArrayGeometry, Direction, unit_vector

DEFAULT_FEED_Q = 6.5
DEFAULT_ELEMENT_Q = 1.0


@dataclass(frozen=True)
class SourceModel:
    """Spherical-wave feed or plane wave.

    For ``kind="spherical"`` ``position`` is the feed phase centre (m, z > 0)
    and ``taper_exponent`` the cos^q feed pattern exponent; the feed boresight
    points at the array centre.  For ``kind="plane"`` ``incidence`` is the
    direction the wave arrives *from* (it propagates toward -z).
    """

    kind: str
    position: tuple[float, float, float] | None = None
    taper_exponent: float = DEFAULT_FEED_Q
    incidence: Direction | None = None
    amplitude: float = 1.0

    def __post_init__(self):
        if self.kind == "spherical":
            if self.position is None:
                raise ValueError("spherical source needs a position")
            pos = tuple(float(v) for v in self.position)
            if len(pos) != 3:
                raise ValueError("position must be a 3-vector")
            if not pos[2] > 0:
                raise ValueError("spherical source must sit in front of the surface (z > 0)")
            if self.taper_exponent < 0:
                raise ValueError("taper_exponent must be >= 0")
            object.__setattr__(self, "position", pos)
        elif self.kind == "plane":
            if self.incidence is None:
                raise ValueError("plane source needs an incidence direction")
        else:
            raise ValueError(f"unknown source kind {self.kind!r}")

    @classmethod
    def spherical(cls, position, taper_exponent: float = DEFAULT_FEED_Q) -> "SourceModel":
        return cls("spherical", position=tuple(position), taper_exponent=taper_exponent)

    @classmethod
    def feed_at(
        cls, distance: float, theta: float, phi: float, taper_exponent: float = DEFAULT_FEED_Q
    ) -> "SourceModel":
        """Feed ``distance`` metres from the array centre along (theta, phi)."""
        pos = distance * unit_vector(theta, phi)
        return cls.spherical(pos, taper_exponent)

    @classmethod
    def plane(cls, incidence: Direction | None = None, amplitude: float = 1.0) -> "SourceModel":
        return cls("plane", incidence=incidence or Direction(0.0, 0.0), amplitude=amplitude)

    def arrival_vector(self) -> np.ndarray:
        """Unit vector from the array centre toward the source."""
        if self.kind == "plane":
            return self.incidence.unit_vector()
        p = np.asarray(self.position)
        return p / np.linalg.norm(p)

    def specular_direction(self) -> Direction:
        """Mirror reflection of the arrival direction about the surface normal."""
        s = self.arrival_vector()
        return Direction.from_vector([-s[0], -s[1], s[2]])

    def to_dict(self) -> dict:
        if self.kind == "plane":
            return {
                "kind": "plane",
                "incidence_deg": [self.incidence.theta, self.incidence.phi],
                "amplitude": self.amplitude,
            }
        return {"kind": "spherical", "position_m": list(self.position), "q_feed": self.taper_exponent}


def illuminate(geometry: ArrayGeometry, source: SourceModel) -> np.ndarray:
    """Complex incident field on each element, shape (n_rows, n_cols).

    Spherical feeds give ``cos^q(off-boresight) / distance`` amplitude with
    phase ``-k * distance``, normalised so the brightest element is 1.  A plane
    wave gives uniform amplitude and a linear phase front.
    """
    k = geometry.wavenumber
    X, Y = geometry.position_grid()
    if source.kind == "plane":
        s = source.arrival_vector()
        return source.amplitude * np.exp(1j * k * (s[0] * X + s[1] * Y))

    fx, fy, fz = source.position
    dx, dy, dz = X - fx, Y - fy, -fz
    dist = np.sqrt(dx**2 + dy**2 + dz**2)
    if np.any(dist < 1e-12):
        raise ValueError("feed position coincides with an element")
    # boresight: from feed toward array centre
    feed_norm = np.sqrt(fx**2 + fy**2 + fz**2)
    cos_off = (dx * -fx + dy * -fy + dz * -fz) / (dist * feed_norm)
    amp = np.clip(cos_off, 0.0, None) ** source.taper_exponent / dist
    amp = amp / amp.max()
    return amp * np.exp(-1j * k * dist)


def _coefficients(geometry: ArrayGeometry, reflection) -> np.ndarray:
    if reflection is None:
        gamma = np.ones(geometry.shape, dtype=complex)
    elif hasattr(reflection, "coefficients"):
        gamma = np.asarray(reflection.coefficients)
    else:
        gamma = np.asarray(reflection, dtype=complex)
    if gamma.shape != geometry.shape:
        raise ValueError(f"reflection shape {gamma.shape} does not match geometry {geometry.shape}")
    return gamma


@dataclass(frozen=True)
class DirectionGrid:
    """Rectangular (theta, phi) sampling of the z > 0 hemisphere, degrees."""

    dtheta: float = 0.5
    dphi: float = 1.0

    def __post_init__(self):
        for name, step, span in (("dtheta", self.dtheta, 90.0), ("dphi", self.dphi, 180.0)):
            if not step > 0:
                raise ValueError(f"{name} must be positive")
            n = span / step
            if abs(n - round(n)) > 1e-9:
                raise ValueError(f"{name}={step} must divide {span:g} degrees evenly")

    @property
    def thetas(self) -> np.ndarray:
        return np.linspace(0.0, 90.0, int(round(90.0 / self.dtheta)) + 1)

    @property
    def phis(self) -> np.ndarray:
        n = int(round(360.0 / self.dphi))
        return np.arange(n) * self.dphi


@dataclass
class Pattern:
    """Complex far-field samples on a (theta, phi) grid.

    ``field`` has shape (len(thetas), len(phis)); values are absolute in the
    model's units, so levels from different patterns of the same setup can be
    compared directly.
    """

    thetas: np.ndarray
    phis: np.ndarray
    field: np.ndarray
    frequency: float
    mode: str = "radiation"
    metadata: dict = dc_field(default_factory=dict)

    def __post_init__(self):
        if self.field.shape != (self.thetas.size, self.phis.size):
            raise ValueError("field shape does not match the direction grid")

    @property
    def power(self) -> np.ndarray:
        return np.abs(self.field) ** 2

    def level_db(self) -> np.ndarray:
        """20 log10 |E|; exact zeros map to -inf."""
        with np.errstate(divide="ignore"):
            return 20.0 * np.log10(np.abs(self.field))

    def relative_db(self) -> np.ndarray:
        return self.level_db() - float(np.max(self.level_db()))

    def dphi(self) -> float:
        return float(self.phis[1] - self.phis[0]) if self.phis.size > 1 else 360.0

    def dtheta(self) -> float:
        return float(self.thetas[1] - self.thetas[0])

    def phi_index(self, phi: float) -> int:
        phi = phi % 360.0
        d = np.abs((self.phis - phi + 180.0) % 360.0 - 180.0)
        i = int(np.argmin(d))
        if d[i] > 1e-9:
            raise ValueError(
                f"azimuth {phi:g} deg is not on the grid; nearest available is {self.phis[i]:g} deg"
            )
        return i

    def directions(self) -> np.ndarray:
        """Unit vectors, shape (n_theta, n_phi, 3)."""
        T, P = np.meshgrid(self.thetas, self.phis, indexing="ij")
        return unit_vector(T, P)


def array_factor(
    geometry: ArrayGeometry, weights: np.ndarray, theta, phi
) -> np.ndarray:
    """Sum of ``weights * exp(+j k u . r)`` at arbitrary (theta, phi) arrays.

    The grid is separable in x and y, so the double sum is evaluated as
    ``ey^T W ex`` per direction with a fixed element order.
    """
    k = geometry.wavenumber
    theta = np.asarray(theta, dtype=float)
    phi = np.asarray(phi, dtype=float)
    shape = np.broadcast(theta, phi).shape
    u = unit_vector(theta, phi).reshape(-1, 3)
    ex = np.exp(1j * k * np.outer(u[:, 0], geometry.x_coords()))  # (M, n_cols)
    ey = np.exp(1j * k * np.outer(u[:, 1], geometry.y_coords()))  # (M, n_rows)
    out = np.einsum("mi,ij,mj->m", ey, weights, ex, optimize=True)
    return out.reshape(shape)


def element_factor(theta, q: float) -> np.ndarray:
    c = np.cos(np.radians(theta))
    return np.clip(c, 0.0, None) ** q


def field_at(
    geometry: ArrayGeometry,
    excitation: np.ndarray,
    reflection,
    directions,
    element_q: float = DEFAULT_ELEMENT_Q,
) -> np.ndarray:
    """Radiated field at a list of directions (Direction objects or (theta, phi) pairs)."""
    gamma = _coefficients(geometry, reflection)
    excitation = np.asarray(excitation)
    if excitation.shape != geometry.shape:
        raise ValueError("excitation shape does not match geometry")
    angles = np.array(
        [(d.theta, d.phi) if isinstance(d, Direction) else tuple(d) for d in directions], dtype=float
    ).reshape(-1, 2)
    af = array_factor(geometry, excitation * gamma, angles[:, 0], angles[:, 1])
    return element_factor(angles[:, 0], element_q) * af


def radiate(
    geometry: ArrayGeometry,
    excitation: np.ndarray,
    reflection=None,
    grid: DirectionGrid | None = None,
    element_q: float = DEFAULT_ELEMENT_Q,
    metadata: dict | None = None,
    mode: str = "radiation",
) -> Pattern:
    """Far-field pattern ``cos^q(theta) * sum a_ij G_ij exp(+j k u . r_ij)``.

    ``reflection`` may be a PhaseMap, QuantizedMap, a complex array of
    reflection coefficients, or None (all ones).
    """
    grid = grid or DirectionGrid()
    gamma = _coefficients(geometry, reflection)
    excitation = np.asarray(excitation)
    if excitation.shape != geometry.shape:
        raise ValueError(f"excitation shape {excitation.shape} does not match geometry {geometry.shape}")
    thetas, phis = grid.thetas, grid.phis
    T, P = np.meshgrid(thetas, phis, indexing="ij")
    af = array_factor(geometry, excitation * gamma, T, P)
    values = element_factor(T, element_q) * af
    meta = {"element_q": element_q}
    meta.update(metadata or {})
    return Pattern(thetas, phis, values, geometry.frequency, mode=mode, metadata=meta)


def rcs_response(
    geometry: ArrayGeometry,
    incidence: Direction,
    reflection,
    grid: DirectionGrid | None = None,
    element_q: float = DEFAULT_ELEMENT_Q,
    metadata: dict | None = None,
) -> Pattern:
    """Scattered pattern under plane-wave illumination (relative levels, not dBsm)."""
    source = SourceModel.plane(incidence)
    meta = {"source": source.to_dict()}
    meta.update(metadata or {})
    return radiate(
        geometry, illuminate(geometry, source), reflection, grid, element_q, meta, mode="rcs"
    )


@dataclass
class Cut:
    """Great-circle cut through broadside; angles in [-90, 90] degrees."""

    angles: np.ndarray
    db: np.ndarray  # relative to the parent pattern's peak
    phi0: float


def _plane_azimuth(plane: Union[str, float]) -> float:
    if isinstance(plane, str):
        key = plane.strip().lower().replace("-", "").replace("_", "")
        # x-polarised incidence: E-plane is xz, H-plane is yz
        if key in ("e", "eplane"):
            return 0.0
        if key in ("h", "hplane"):
            return 90.0
        raise ValueError(f"unknown plane {plane!r}; use 'E-plane', 'H-plane' or an azimuth")
    return float(plane)


def pattern_cut(pattern: Pattern, plane: Union[str, float] = "H-plane") -> Cut:
    """Stitch the ``phi0 + 180`` and ``phi0`` half-cuts into one [-90, 90] cut."""
    phi0 = _plane_azimuth(plane)
    i_pos = pattern.phi_index(phi0)
    i_neg = pattern.phi_index(phi0 + 180.0)
    rel = pattern.relative_db()
    th = pattern.thetas
    angles = np.concatenate([-th[:0:-1], th])
    db = np.concatenate([rel[:0:-1, i_neg], rel[:, i_pos]])
    return Cut(angles, db, phi0 % 360.0)


def directivity_map(pattern: Pattern) -> np.ndarray:
    """4 pi U / P_rad in dBi, integrating power over the sampled hemisphere.

    Trapezoidal in theta with sin(theta) weight; the periodic phi axis uses
    equal weights.
    """
    p = pattern.power
    th = np.radians(pattern.thetas)
    ring = np.sum(p, axis=1) * np.radians(pattern.dphi())
    total = np.trapezoid(ring * np.sin(th), th)
    if total <= 0:
        raise ValueError("pattern carries no power")
    with np.errstate(divide="ignore"):
        return 10.0 * np.log10(4.0 * np.pi * p / total)


def directivity(pattern: Pattern, direction: Direction | None = None) -> float:
    """Directivity (dBi) at ``direction``, or at the pattern peak if omitted."""
    dmap = directivity_map(pattern)
    if direction is None:
        return float(np.max(dmap))
    i = int(np.argmin(np.abs(pattern.thetas - direction.theta)))
    j = pattern.phi_index(direction.phi) if direction.theta > 0 else 0
    return float(dmap[i, j])


def aperture_directivity(geometry: ArrayGeometry) -> float:
    """Uniform-aperture bound 4 pi A / lambda^2 in dBi."""
    return float(10.0 * np.log10(4.0 * np.pi * geometry.area / geometry.wavelength**2))


def pattern_rows(pattern: Pattern):
    """Rows ``theta_deg, phi_deg, re, im, power_db_rel`` in (theta, phi) order."""
    rel = pattern.relative_db()
    for i, t in enumerate(pattern.thetas):
        for j, p in enumerate(pattern.phis):
            v = pattern.field[i, j]
            yield [t, p, v.real, v.imag, rel[i, j]]
