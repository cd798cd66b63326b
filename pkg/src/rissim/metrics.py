"""Figures of merit extracted from patterns, plus the scan and loss studies."""

from __future__ import annotations

import logging
import math
from dataclasses import asdict, dataclass
from typing import Iterable, Sequence

import numpy as np

from .codebook import PhaseState, ideal_states
from .fields import (
    DEFAULT_ELEMENT_Q,
    DirectionGrid,
    Pattern,
    SourceModel,
    directivity,
    field_at,
    illuminate,
    pattern_cut,
    radiate,
)
from .geometry import ArrayGeometry, Direction, angular_distance
from .synthesis import ideal_phase_profile, quantize_phase_map

logger = logging.getLogger(__name__)

HALF_POWER_DB = 10.0 * math.log10(0.5)
SLL_EXCLUSION_WIDTH = 2.0  # main-lobe exclusion zone spans this many HPBWs
QLL_WINDOW_DEG = 3.0

CANONICAL_LOSS_STEERS = tuple(Direction(t, 90.0) for t in (10, 20, 30, 40, 50))
CANONICAL_LOSS_OFFSETS = tuple(float(o) for o in range(0, 360, 10))


class DegeneratePatternError(ValueError):
    """Pattern has no power, so no peak or relative metric exists."""


class MetricError(ValueError):
    """A metric is undefined for this pattern (e.g. no side-lobe region)."""


@dataclass
class PatternMetrics:
    peak_direction: Direction
    peak_level: float  # dB; directivity (dBi) when produced by evaluate_pattern
    hpbw: float | None
    sll: float | None
    qll: float | None = None

    def to_dict(self) -> dict:
        return {
            "peak_theta_deg": self.peak_direction.theta,
            "peak_phi_deg": self.peak_direction.phi,
            "peak_level_db": self.peak_level,
            "hpbw_deg": self.hpbw,
            "sll_db": self.sll,
            "qll_db": self.qll,
        }


def find_peak(pattern: Pattern) -> tuple[Direction, float]:
    """Grid argmax of |E|; ties resolve to the smallest theta, then smallest phi."""
    mag = np.abs(pattern.field)
    flat = int(np.argmax(mag))  # row-major: theta outer, phi inner
    i, j = np.unravel_index(flat, mag.shape)
    peak = float(mag[i, j])
    if not peak > 0 or not np.isfinite(peak):
        raise DegeneratePatternError("pattern is identically zero")
    phi = float(pattern.phis[j]) if pattern.thetas[i] > 0 else 0.0
    return Direction(float(pattern.thetas[i]), phi), 20.0 * math.log10(peak)


def cut_coordinate(direction: Direction, phi0: float, tol: float = 1e-6) -> float | None:
    """Signed angle of ``direction`` on the great-circle cut at azimuth ``phi0``.

    None when the direction is off that cut.
    """
    if direction.theta < tol:
        return 0.0
    d = (direction.phi - phi0) % 360.0
    if min(d, 360.0 - d) < tol:
        return direction.theta
    if abs(d - 180.0) < tol:
        return -direction.theta
    return None


def hpbw(pattern: Pattern, main: Direction | None = None) -> float:
    """Half-power beamwidth on the cut through ``main`` (azimuth of the peak)."""
    if main is None:
        main, _ = find_peak(pattern)
    cut = pattern_cut(pattern, main.phi)
    k0 = int(np.argmin(np.abs(cut.angles - main.theta)))
    ref = cut.db[k0]
    level = ref + HALF_POWER_DB

    def edge(step: int) -> float:
        k = k0
        while 0 <= k + step < cut.angles.size:
            nxt = k + step
            if cut.db[nxt] < level:
                a0, a1 = cut.angles[k], cut.angles[nxt]
                d0, d1 = cut.db[k], cut.db[nxt]
                return float(a0 + (level - d0) * (a1 - a0) / (d1 - d0))
            k = nxt
        raise MetricError("main lobe never drops to half power on the cut; HPBW undefined")

    return edge(+1) - edge(-1)


def side_lobe_level(
    pattern: Pattern,
    main: Direction | None = None,
    plane: float | str | None = None,
    exclusion_width: float = SLL_EXCLUSION_WIDTH,
) -> float:
    """Highest level outside the main-lobe zone, dB relative to the main lobe.

    The excluded zone is a cone around ``main`` of full angular width
    ``exclusion_width * HPBW``.  With ``plane`` set only that cut is searched.
    """
    level = pattern.level_db()
    if main is None:
        main, main_db = find_peak(pattern)
    else:
        main_db = _level_at(pattern, main)
    radius = 0.5 * exclusion_width * hpbw(pattern, main)

    if plane is None:
        u = pattern.directions()
        cosang = np.clip(u @ main.unit_vector(), -1.0, 1.0)
        dist = np.degrees(np.arccos(cosang))
        outside = level[dist > radius]
    else:
        cut = pattern_cut(pattern, plane)
        a0 = cut_coordinate(main, cut.phi0)
        if a0 is None:
            raise MetricError("main lobe does not lie on the requested cut")
        peak_rel = float(np.max(pattern.level_db()))
        outside = cut.db[np.abs(cut.angles - a0) > radius] + peak_rel
    if outside.size == 0:
        raise MetricError("main-lobe exclusion covers the whole grid; aperture too small for SLL")
    return float(np.max(outside) - main_db)


def _level_at(pattern: Pattern, d: Direction) -> float:
    i = int(np.argmin(np.abs(pattern.thetas - d.theta)))
    j = pattern.phi_index(d.phi) if pattern.thetas[i] > 0 else 0
    return float(pattern.level_db()[i, j])


def _window_max(pattern: Pattern, center: Direction, window: float) -> float:
    u = pattern.directions()
    dist = np.degrees(np.arccos(np.clip(u @ center.unit_vector(), -1.0, 1.0)))
    mask = dist <= window + 1e-9
    return float(np.max(pattern.level_db()[mask]))


def mirror_direction(steer: Direction, specular: Direction) -> Direction:
    """Reflection of ``steer`` about ``specular`` within the steering plane."""
    phi0 = steer.phi if steer.theta > 1e-6 else specular.phi
    a_spec = cut_coordinate(specular, phi0)
    if a_spec is None:
        raise MetricError("specular direction is not in the steering plane")
    a_mirror = 2.0 * a_spec - (steer.theta if steer.theta > 1e-6 else 0.0)
    if abs(a_mirror) > 90.0 + 1e-9:
        raise MetricError(f"mirror direction ({a_mirror:g} deg) is outside the hemisphere")
    return Direction.from_cut_angle(a_mirror, phi0)


def quantization_lobe_level(
    pattern: Pattern, steer: Direction, specular: Direction, window: float = QLL_WINDOW_DEG
) -> float:
    """Mirror-lobe level relative to the main lobe, each the max within ``window`` degrees."""
    mirror = mirror_direction(steer, specular)
    if angular_distance(mirror, steer) <= 2 * window:
        raise MetricError("mirror and steer directions coincide; no quantization lobe defined")
    return _window_max(pattern, mirror, window) - _window_max(pattern, steer, window)


def enhancement(on_level_at_target: float, off_level_at_target: float) -> float:
    """ON/OFF level difference in dB."""
    return on_level_at_target - off_level_at_target


def evaluate_pattern(
    pattern: Pattern, steer: Direction | None = None, specular: Direction | None = None
) -> PatternMetrics:
    """Peak (as directivity), HPBW, SLL and, when defined, QLL."""
    main, _ = find_peak(pattern)
    width = sll = None
    try:
        width = hpbw(pattern, main)
        sll = side_lobe_level(pattern, main)
    except MetricError as exc:
        logger.warning("beamwidth/SLL undefined: %s", exc)
    qll = None
    if steer is not None and specular is not None:
        try:
            qll = quantization_lobe_level(pattern, steer, specular)
        except MetricError as exc:
            logger.info("QLL undefined: %s", exc)
    return PatternMetrics(main, directivity(pattern), width, sll, qll)


def synthesize(
    geometry: ArrayGeometry,
    source: SourceModel,
    steer: Direction,
    states: Sequence[PhaseState] | None,
    offset: float = 0.0,
):
    """Ideal profile, quantised when ``states`` is given (else left continuous)."""
    pmap = ideal_phase_profile(geometry, source, steer, offset)
    return pmap if states is None else quantize_phase_map(pmap, states)


@dataclass
class ScanRow:
    theta_deg: float
    phi_deg: float
    peak_level_db: float
    sll_db: float
    pointing_error_deg: float
    error: str = ""

    def as_row(self) -> list:
        return list(asdict(self).values())


SCAN_FIELDS = ["theta_deg", "phi_deg", "peak_level_db", "sll_db", "pointing_error_deg", "error"]


def scan_sweep(
    geometry: ArrayGeometry,
    source: SourceModel,
    states: Sequence[PhaseState] | None,
    angles: Iterable[Direction],
    offset: float = 0.0,
    grid: DirectionGrid | None = None,
    element_q: float = DEFAULT_ELEMENT_Q,
) -> list[ScanRow]:
    """Synthesise, quantise and radiate each steer angle; one row per angle.

    ``peak_level_db`` is the peak directivity in dBi.  A failing angle yields a
    row with NaN metrics and the error text; the sweep carries on.
    """
    excitation = illuminate(geometry, source)
    rows = []
    for steer in angles:
        try:
            refl = synthesize(geometry, source, steer, states, offset)
            pat = radiate(geometry, excitation, refl, grid, element_q)
            peak, _ = find_peak(pat)
            rows.append(
                ScanRow(
                    steer.theta,
                    steer.phi,
                    directivity(pat),
                    side_lobe_level(pat, peak),
                    angular_distance(steer, peak),
                )
            )
        except ValueError as exc:
            logger.warning("scan angle %s failed: %s", steer, exc)
            nan = float("nan")
            rows.append(ScanRow(steer.theta, steer.phi, nan, nan, nan, str(exc)))
    return rows


@dataclass
class LossRow:
    bits: int
    mean_loss_db: float


def quantization_loss_study(
    geometry: ArrayGeometry,
    source: SourceModel,
    bit_depths: Sequence[int],
    steer_set: Sequence[Direction] = CANONICAL_LOSS_STEERS,
    offset_set: Sequence[float] = CANONICAL_LOSS_OFFSETS,
    element_q: float = DEFAULT_ELEMENT_Q,
) -> list[LossRow]:
    """Mean drop in level toward the steer direction caused by b-bit quantisation.

    Uses ideal codebooks (2**b evenly spaced unit-magnitude states) and
    averages the dB loss over every steer x offset pair.
    """
    excitation = illuminate(geometry, source)
    reference = {}
    for steer in steer_set:
        for off in offset_set:
            e = field_at(geometry, excitation, synthesize(geometry, source, steer, None, off), [steer], element_q)
            reference[steer, off] = 20.0 * math.log10(abs(e[0]))
    rows = []
    for bits in bit_depths:
        states = ideal_states(bits)
        losses = []
        for steer in steer_set:
            for off in offset_set:
                qmap = synthesize(geometry, source, steer, states, off)
                e = field_at(geometry, excitation, qmap, [steer], element_q)
                losses.append(reference[steer, off] - 20.0 * math.log10(abs(e[0])))
        rows.append(LossRow(int(bits), float(np.mean(losses))))
    return rows


def canonical_directions(thetas: Iterable[float], phi: float = 90.0) -> list[Direction]:
    return [Direction(float(t), phi) for t in thetas]

