"""Reconfigurable reflection states and the equivalent-bit bandwidth metric."""

from __future__ import annotations

import csv
import logging
import math
import warnings
from dataclasses import dataclass
from pathlib import Path
from typing import Sequence

import numpy as np

from .geometry import wrap360

logger = logging.getLogger(__name__)

MAGNITUDE_TOL = 1e-6
DEFAULT_BIT_THRESHOLD = 1.7


class CodebookParseError(ValueError):
    """Malformed codebook file; message carries the offending line number."""


class DegenerateStatesWarning(UserWarning):
    """All states share one phase, so the equivalent-bit metric collapses to 0."""


@dataclass(frozen=True)
class PhaseState:
    phase: float  # degrees, reduced into [0, 360)
    magnitude: float = 1.0  # linear

    def __post_init__(self):
        object.__setattr__(self, "phase", wrap360(self.phase))
        mag = float(self.magnitude)
        if not 0.0 < mag <= 1.0 + MAGNITUDE_TOL:
            raise ValueError(f"magnitude must lie in (0, 1], got {mag}")
        object.__setattr__(self, "magnitude", min(mag, 1.0))

    @property
    def coefficient(self) -> complex:
        return self.magnitude * np.exp(1j * np.radians(self.phase))


def _phases(states) -> np.ndarray:
    """Accept PhaseState objects or bare phase values in degrees."""
    return np.array(
        [s.phase if isinstance(s, PhaseState) else wrap360(s) for s in states],
        dtype=float,
    )


def _magnitudes(states) -> np.ndarray:
    return np.array(
        [s.magnitude if isinstance(s, PhaseState) else 1.0 for s in states], dtype=float
    )


def ideal_states(bits: int) -> list[PhaseState]:
    """2**bits equally spaced unit-magnitude states starting at 0 degrees."""
    if bits < 1:
        raise ValueError("bits must be >= 1")
    n = 2**bits
    return [PhaseState(360.0 * s / n, 1.0) for s in range(n)]


def adjacent_phase_differences(states) -> np.ndarray:
    """Circular gaps between sorted phases, wraparound gap last.

    >>> adjacent_phase_differences([0, 60, 180, 270]).tolist()
    [60.0, 120.0, 90.0, 90.0]
    """
    phases = np.sort(_phases(states))
    if phases.size < 2:
        raise ValueError("need at least two states")
    gaps = np.diff(phases)
    wrap = 360.0 - (phases[-1] - phases[0])
    return np.append(gaps, wrap)


def equivalent_bits(states) -> float:
    """Equivalent phase resolution ``0.5 * log2(360^3 / sum(gap^3))``.

    Equal spacing over S states gives ``log2(S)``; any unevenness lowers it.
    When every state has the same phase the result is 0 and a
    :class:`DegenerateStatesWarning` is emitted.
    """
    gaps = adjacent_phase_differences(states)
    if np.isclose(gaps.max(), 360.0, rtol=0.0, atol=1e-12):
        warnings.warn("all states share the same phase", DegenerateStatesWarning, stacklevel=2)
        return 0.0
    return 0.5 * math.log2(360.0**3 / float(np.sum(gaps**3)))


def average_magnitude(states) -> float:
    """Mean linear reflection magnitude expressed in dB."""
    mags = _magnitudes(states)
    if mags.size == 0:
        raise ValueError("need at least one state")
    return 20.0 * math.log10(float(np.mean(mags)))


def relative_bandwidth(f_low: float, f_high: float) -> float:
    """Fractional bandwidth 2 (fh - fl) / (fh + fl), as a fraction (not %)."""
    return 2.0 * (f_high - f_low) / (f_high + f_low)


@dataclass(frozen=True)
class PhaseCodebook:
    """Per-frequency reflection states.

    ``phases`` and ``magnitudes`` have shape (n_freq, n_states); column n is the
    same hardware configuration at every frequency.
    """

    frequencies: np.ndarray
    phases: np.ndarray
    magnitudes: np.ndarray

    def __post_init__(self):
        f = np.asarray(self.frequencies, dtype=float)
        ph = wrap360(np.asarray(self.phases, dtype=float))
        mag = np.asarray(self.magnitudes, dtype=float)
        if f.ndim != 1 or f.size == 0:
            raise ValueError("frequencies must be a non-empty 1-D array")
        if ph.ndim != 2 or ph.shape[0] != f.size or mag.shape != ph.shape:
            raise ValueError("phases and magnitudes must have shape (n_freq, n_states)")
        if ph.shape[1] < 2:
            raise ValueError("a codebook needs at least two states")
        if np.any(np.diff(f) <= 0):
            raise ValueError("frequencies must be strictly increasing")
        if np.any(mag <= 0) or np.any(mag > 1.0 + MAGNITUDE_TOL):
            raise ValueError("magnitudes must lie in (0, 1]")
        object.__setattr__(self, "frequencies", f)
        object.__setattr__(self, "phases", ph)
        object.__setattr__(self, "magnitudes", np.minimum(mag, 1.0))

    @property
    def n_states(self) -> int:
        return self.phases.shape[1]

    @property
    def entries(self) -> list[tuple[float, list[PhaseState]]]:
        return [(float(f), self._states_row(i)) for i, f in enumerate(self.frequencies)]

    def _states_row(self, i: int) -> list[PhaseState]:
        return [PhaseState(p, m) for p, m in zip(self.phases[i], self.magnitudes[i])]

    def states_at(self, frequency: float) -> list[PhaseState]:
        """States at ``frequency``, linearly interpolated between samples.

        Phases are unwrapped per state along frequency before interpolation.
        """
        f = self.frequencies
        if not f[0] - 1e-9 * f[0] <= frequency <= f[-1] + 1e-9 * f[-1]:
            raise ValueError(
                f"frequency {frequency:g} Hz outside codebook range [{f[0]:g}, {f[-1]:g}]"
            )
        hit = np.flatnonzero(np.isclose(f, frequency, rtol=1e-12, atol=0.0))
        if hit.size:
            return self._states_row(int(hit[0]))
        unwrapped = np.degrees(np.unwrap(np.radians(self.phases), axis=0))
        ph = [np.interp(frequency, f, unwrapped[:, s]) for s in range(self.n_states)]
        mag = [np.interp(frequency, f, self.magnitudes[:, s]) for s in range(self.n_states)]
        return [PhaseState(p, m) for p, m in zip(ph, mag)]

    def equivalent_bits(self) -> np.ndarray:
        """Equivalent bits at every sampled frequency."""
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", DegenerateStatesWarning)
            return np.array([equivalent_bits(self.phases[i]) for i in range(len(self.frequencies))])

    def average_magnitude_db(self) -> np.ndarray:
        return 20.0 * np.log10(np.mean(self.magnitudes, axis=1))

    @classmethod
    def constant(cls, states: Sequence[PhaseState], frequencies) -> "PhaseCodebook":
        """Frequency-independent codebook repeating ``states`` at every sample."""
        f = np.asarray(frequencies, dtype=float)
        ph = np.tile(_phases(states), (f.size, 1))
        mag = np.tile(_magnitudes(states), (f.size, 1))
        return cls(f, ph, mag)


def effective_bandwidth(
    codebook: PhaseCodebook, threshold: float = DEFAULT_BIT_THRESHOLD
) -> list[tuple[float, float]]:
    """Frequency intervals where equivalent bits exceed ``threshold``.

    Interval edges are placed where the piecewise-linear N_bit(f) curve crosses
    the threshold; an interval touching the sampled range ends at the range
    limit.
    """
    f = codebook.frequencies
    if f.size < 2:
        raise ValueError("effective_bandwidth needs at least two frequency samples")
    nb = codebook.equivalent_bits()
    above = nb > threshold

    def crossing(i: int) -> float:
        # threshold crossing between samples i and i+1
        return float(f[i] + (threshold - nb[i]) * (f[i + 1] - f[i]) / (nb[i + 1] - nb[i]))

    bands = []
    start = None
    for i in range(f.size):
        if above[i] and start is None:
            start = float(f[0]) if i == 0 else crossing(i - 1)
        elif not above[i] and start is not None:
            bands.append((start, crossing(i - 1)))
            start = None
    if start is not None:
        bands.append((start, float(f[-1])))
    return bands


def load_codebook(path) -> PhaseCodebook:
    """Read a codebook CSV.

    Header ``freq_hz,phase1_deg,...,phaseS_deg,mag1_db,...,magS_db``; lines
    starting with ``#`` are ignored.  Phases are reduced into [0, 360) and
    magnitudes converted from dB to linear.
    """
    path = Path(path)
    rows: list[tuple[int, list[str]]] = []
    with path.open(encoding="utf-8", newline="") as fh:
        for lineno, line in enumerate(fh, start=1):
            if not line.strip() or line.lstrip().startswith("#"):
                continue
            rows.append((lineno, next(csv.reader([line]))))
    if not rows:
        raise CodebookParseError(f"{path}: no header found")

    header_line, header = rows[0]
    header = [h.strip() for h in header]
    n_cols = len(header)
    if n_cols < 5 or (n_cols - 1) % 2 or header[0] != "freq_hz":
        raise CodebookParseError(
            f"{path}:{header_line}: expected header freq_hz,phase1_deg..phaseS_deg,mag1_db..magS_db"
        )
    n_states = (n_cols - 1) // 2
    expected = (
        ["freq_hz"]
        + [f"phase{s + 1}_deg" for s in range(n_states)]
        + [f"mag{s + 1}_db" for s in range(n_states)]
    )
    if header != expected:
        raise CodebookParseError(f"{path}:{header_line}: header {header} != {expected}")

    freqs, phases, mags = [], [], []
    for lineno, fields in rows[1:]:
        if len(fields) != n_cols:
            raise CodebookParseError(
                f"{path}:{lineno}: expected {n_cols} fields ({n_states} states), got {len(fields)}"
            )
        try:
            values = [float(v) for v in fields]
        except ValueError as exc:
            raise CodebookParseError(f"{path}:{lineno}: {exc}") from None
        if not all(math.isfinite(v) for v in values):
            raise CodebookParseError(f"{path}:{lineno}: non-finite value")
        if freqs and values[0] <= freqs[-1]:
            raise CodebookParseError(f"{path}:{lineno}: frequency {values[0]:g} not increasing")
        mag_lin = [10.0 ** (v / 20.0) for v in values[1 + n_states :]]
        if any(m > 1.0 + MAGNITUDE_TOL for m in mag_lin):
            raise CodebookParseError(f"{path}:{lineno}: magnitude above 0 dB (active reflection)")
        freqs.append(values[0])
        phases.append([v % 360.0 for v in values[1 : 1 + n_states]])
        mags.append(mag_lin)
    if not freqs:
        raise CodebookParseError(f"{path}: header but no data rows")
    logger.debug("loaded %d frequencies x %d states from %s", len(freqs), n_states, path)
    return PhaseCodebook(np.array(freqs), np.array(phases), np.array(mags))


def codebook_rows(codebook: PhaseCodebook) -> tuple[list[str], list[list[float]]]:
    """Header and rows in the on-disk CSV layout (magnitudes in dB)."""
    n = codebook.n_states
    header = (
        ["freq_hz"] + [f"phase{s + 1}_deg" for s in range(n)] + [f"mag{s + 1}_db" for s in range(n)]
    )
    rows = []
    for i, f in enumerate(codebook.frequencies):
        mag_db = 20.0 * np.log10(codebook.magnitudes[i])
        rows.append([float(f), *codebook.phases[i].tolist(), *mag_db.tolist()])
    return header, rows
