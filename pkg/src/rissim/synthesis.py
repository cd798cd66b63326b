"""Ideal phase profiles and their quantisation onto discrete reflection states."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .codebook import PhaseState, _magnitudes, _phases
from .fields import DEFAULT_ELEMENT_Q, SourceModel, field_at, illuminate
from .geometry import ArrayGeometry, Direction, wrap360

# levels closer than this count as equal when picking the best offset
OFFSET_TIE_DB = 1e-6


@dataclass(frozen=True)
class PhaseMap:
    """Continuous per-element reflection phase in degrees, shape (n_rows, n_cols)."""

    geometry: ArrayGeometry
    phases: np.ndarray

    def __post_init__(self):
        ph = np.asarray(self.phases, dtype=float)
        if ph.shape != self.geometry.shape:
            raise ValueError(f"phase map shape {ph.shape} != geometry {self.geometry.shape}")
        object.__setattr__(self, "phases", wrap360(ph))

    @property
    def coefficients(self) -> np.ndarray:
        return np.exp(1j * np.radians(self.phases))


@dataclass(frozen=True)
class QuantizedMap:
    """Chosen state per element with its realised phase (deg) and magnitude.

    ``ideal_phases`` keeps the continuous target the states were picked from
    (equal to the state phases for uniform maps).
    """

    geometry: ArrayGeometry
    state_indices: np.ndarray
    realized_phase: np.ndarray
    realized_magnitude: np.ndarray
    ideal_phases: np.ndarray | None = None

    def __post_init__(self):
        idx = np.asarray(self.state_indices)
        shape = self.geometry.shape
        if idx.shape != shape or np.shape(self.realized_phase) != shape or np.shape(self.realized_magnitude) != shape:
            raise ValueError("quantized map arrays must match the geometry shape")
        object.__setattr__(self, "state_indices", idx.astype(int))
        object.__setattr__(self, "realized_phase", wrap360(self.realized_phase))
        object.__setattr__(self, "realized_magnitude", np.asarray(self.realized_magnitude, dtype=float))

    @property
    def coefficients(self) -> np.ndarray:
        return self.realized_magnitude * np.exp(1j * np.radians(self.realized_phase))

    def histogram(self, n_states: int | None = None) -> list[int]:
        n = n_states or int(self.state_indices.max()) + 1
        return np.bincount(self.state_indices.ravel(), minlength=n).tolist()

    @classmethod
    def from_indices(
        cls, geometry: ArrayGeometry, indices, states: Sequence[PhaseState], ideal_phases=None
    ) -> "QuantizedMap":
        indices = np.asarray(indices, dtype=int)
        if indices.size and (indices.min() < 0 or indices.max() >= len(states)):
            raise ValueError(f"state indices must lie in [0, {len(states) - 1}]")
        phases = _phases(states)
        mags = _magnitudes(states)
        return cls(geometry, indices, phases[indices], mags[indices], ideal_phases)


def ideal_phase_profile(
    geometry: ArrayGeometry, source: SourceModel, steer: Direction, offset: float = 0.0
) -> PhaseMap:
    """Continuous reflection phase that co-phases the re-radiated field toward ``steer``.

    Spherical feed: ``k |r_e - r_f| - k u0 . r_e + offset``.  Plane wave: the
    path term becomes ``-k s . r_e`` with ``s`` the arrival direction, the
    far-feed limit of the same expression.
    """
    k = geometry.wavenumber
    X, Y = geometry.position_grid()
    u0 = steer.unit_vector()
    if source.kind == "spherical":
        fx, fy, fz = source.position
        path = k * np.sqrt((X - fx) ** 2 + (Y - fy) ** 2 + fz**2)
    else:
        s = source.arrival_vector()
        path = -k * (s[0] * X + s[1] * Y)
    phase = path - k * (u0[0] * X + u0[1] * Y)
    return PhaseMap(geometry, np.degrees(phase) + offset)


def circular_distance(a, b) -> np.ndarray:
    """Shortest angular separation on the phase circle, degrees in [0, 180]."""
    d = np.abs(np.asarray(a, dtype=float) - np.asarray(b, dtype=float)) % 360.0
    return np.minimum(d, 360.0 - d)


def quantize_phase_map(phase_map: PhaseMap, states: Sequence[PhaseState]) -> QuantizedMap:
    """Assign each element the state nearest on the phase circle.

    Ties go to the lowest state index.  Magnitudes play no part in the choice
    but carry into the realised coefficient.
    """
    if len(states) < 2:
        raise ValueError("quantization needs at least two states")
    state_phases = _phases(states)
    dist = circular_distance(phase_map.phases[..., None], state_phases)
    idx = np.argmin(dist, axis=-1)  # first minimum == lowest index
    return QuantizedMap.from_indices(phase_map.geometry, idx, states, phase_map.phases)


def uniform_map(geometry: ArrayGeometry, state_index: int, states: Sequence[PhaseState]) -> QuantizedMap:
    """Every element set to one state (the unconfigured / OFF surface)."""
    if not 0 <= state_index < len(states):
        raise ValueError(f"state_index {state_index} outside [0, {len(states) - 1}]")
    idx = np.full(geometry.shape, state_index, dtype=int)
    return QuantizedMap.from_indices(
        geometry, idx, states, np.full(geometry.shape, states[state_index].phase)
    )


def optimize_offset(
    geometry: ArrayGeometry,
    source: SourceModel,
    steer: Direction,
    states: Sequence[PhaseState],
    candidate_offsets: Sequence[float],
    element_q: float = DEFAULT_ELEMENT_Q,
) -> tuple[float, float]:
    """Pick the phase offset whose quantised map radiates most toward ``steer``.

    Returns ``(best_offset, level_db)``.  Levels within ``OFFSET_TIE_DB`` of the
    best count as ties and the smallest such offset wins.
    """
    candidates = sorted(float(o) for o in candidate_offsets)
    if not candidates:
        raise ValueError("candidate_offsets is empty")
    excitation = illuminate(geometry, source)
    levels = []
    for off in candidates:
        qmap = quantize_phase_map(ideal_phase_profile(geometry, source, steer, off), states)
        e = field_at(geometry, excitation, qmap, [steer], element_q)[0]
        levels.append(20.0 * np.log10(max(abs(e), 1e-300)))
    levels = np.array(levels)
    best = int(np.flatnonzero(levels >= levels.max() - OFFSET_TIE_DB)[0])
    return candidates[best], float(levels[best])


def map_rows(qmap: QuantizedMap):
    """Rows ``row, col, ideal_phase_deg, state_index, realized_phase_deg, realized_mag_lin``."""
    ideal = qmap.ideal_phases if qmap.ideal_phases is not None else qmap.realized_phase
    ph = qmap.realized_phase
    mag = qmap.realized_magnitude
    for i in range(qmap.geometry.n_rows):
        for j in range(qmap.geometry.n_cols):
            yield [i, j, float(ideal[i, j]), int(qmap.state_indices[i, j]), float(ph[i, j]), float(mag[i, j])]
