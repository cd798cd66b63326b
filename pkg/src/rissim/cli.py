"""Command-line front end: JSON run configs in, CSV/JSON artifacts out.

Exit codes: 0 success, 1 validation error, 2 computation error.
"""

from __future__ import annotations

import argparse
import csv
import hashlib
import json
import logging
import sys
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import control
from .codebook import (
    CodebookParseError,
    PhaseState,
    average_magnitude,
    effective_bandwidth,
    equivalent_bits,
    ideal_states,
    load_codebook,
    relative_bandwidth,
)
from .fields import (
    DEFAULT_ELEMENT_Q,
    DEFAULT_FEED_Q,
    DirectionGrid,
    SourceModel,
    illuminate,
    pattern_cut,
    pattern_rows,
    radiate,
)
from .geometry import ArrayGeometry, Direction
from .io import config_hash, write_csv, write_json, write_text_atomic
from .metrics import SCAN_FIELDS, evaluate_pattern, scan_sweep
from .synthesis import QuantizedMap, ideal_phase_profile, map_rows, optimize_offset, quantize_phase_map

logger = logging.getLogger("rissim")

MAP_FIELDS = ["row", "col", "ideal_phase_deg", "state_index", "realized_phase_deg", "realized_mag_lin"]
EXIT_OK, EXIT_INVALID, EXIT_COMPUTE = 0, 1, 2


class ConfigError(ValueError):
    """Invalid run configuration; message starts with the offending field path."""


def _get(d: dict, key: str, path: str, kind=float, default=...):
    if key not in d:
        if default is ...:
            raise ConfigError(f"{path}.{key}: required field missing")
        return default
    value = d[key]
    try:
        if kind is int:
            if isinstance(value, bool) or int(value) != value:
                raise TypeError
            return int(value)
        if kind is float:
            if isinstance(value, bool):
                raise TypeError
            return float(value)
        return kind(value)
    except (TypeError, ValueError):
        raise ConfigError(f"{path}.{key}: expected {kind.__name__}, got {value!r}") from None


def _section(cfg: dict, key: str, required: bool = True) -> dict:
    sec = cfg.get(key)
    if sec is None:
        if required:
            raise ConfigError(f"{key}: required section missing")
        return {}
    if not isinstance(sec, dict):
        raise ConfigError(f"{key}: expected an object")
    return sec


@dataclass
class RunConfig:
    geometry: ArrayGeometry
    source: SourceModel
    steer: Direction
    states: list[PhaseState] | None  # None = continuous phases
    offset: float = 0.0
    offset_sweep: list[float] | None = None
    grid: DirectionGrid = field(default_factory=DirectionGrid)
    element_q: float = DEFAULT_ELEMENT_Q
    scan_angles: list[float] = field(default_factory=list)
    scan_phi: float = 90.0
    mapping: control.StateMapping = field(default_factory=control.StateMapping.default)
    chain: control.ChainConfig = field(default_factory=control.ChainConfig)
    raw: dict = field(default_factory=dict)
    bits_label: str = ""

    @property
    def digest(self) -> str:
        return config_hash(self.raw)

    @classmethod
    def from_dict(cls, cfg: dict, base_dir: Path | None = None) -> "RunConfig":
        if not isinstance(cfg, dict):
            raise ConfigError("config: top level must be a JSON object")
        base_dir = base_dir or Path.cwd()

        g = _section(cfg, "geometry")
        try:
            geometry = ArrayGeometry(
                _get(g, "n_rows", "geometry", int),
                _get(g, "n_cols", "geometry", int),
                _get(g, "pitch_m", "geometry"),
                _get(g, "frequency_hz", "geometry"),
            )
        except ValueError as exc:
            raise ConfigError(f"geometry: {exc}") from None

        source = _parse_source(_section(cfg, "source"))

        s = _section(cfg, "steer")
        try:
            steer = Direction(_get(s, "theta_deg", "steer"), _get(s, "phi_deg", "steer", default=0.0))
        except ValueError as exc:
            raise ConfigError(f"steer: {exc}") from None

        states, label = _parse_quantization(_section(cfg, "quantization"), geometry, base_dir)

        offset = _get(cfg, "offset_deg", "config", default=0.0)
        sweep = cfg.get("offset_sweep")
        if sweep is not None:
            if not isinstance(sweep, list) or not sweep:
                raise ConfigError("offset_sweep: expected a non-empty list of degrees")
            sweep = [float(v) for v in sweep]

        gr = _section(cfg, "grid", required=False)
        try:
            grid = DirectionGrid(
                _get(gr, "dtheta_deg", "grid", default=0.5), _get(gr, "dphi_deg", "grid", default=1.0)
            )
        except ValueError as exc:
            raise ConfigError(f"grid: {exc}") from None

        sc = _section(cfg, "scan", required=False)
        angles = sc.get("angles_deg", [])
        if not isinstance(angles, list):
            raise ConfigError("scan.angles_deg: expected a list")

        ctl = _section(cfg, "control", required=False)
        try:
            mapping = (
                control.StateMapping.from_json(ctl["mapping"])
                if "mapping" in ctl
                else control.StateMapping.default()
            )
            chain = control.ChainConfig(_get(ctl, "register_width", "control", int, default=8))
        except (ValueError, TypeError, KeyError, IndexError) as exc:
            raise ConfigError(f"control: {exc}") from None

        return cls(
            geometry=geometry,
            source=source,
            steer=steer,
            states=states,
            offset=offset,
            offset_sweep=sweep,
            grid=grid,
            element_q=_get(cfg, "element_q", "config", default=DEFAULT_ELEMENT_Q),
            scan_angles=[float(a) for a in angles],
            scan_phi=_get(sc, "phi_deg", "scan", default=90.0),
            mapping=mapping,
            chain=chain,
            raw=cfg,
            bits_label=label,
        )


def _parse_source(s: dict) -> SourceModel:
    kind = s.get("kind")
    try:
        if kind == "plane":
            inc = s.get("incidence_deg", [0.0, 0.0])
            if isinstance(inc, (int, float)):
                inc = [inc, 0.0]
            if not isinstance(inc, list) or len(inc) != 2:
                raise ConfigError("source.incidence_deg: expected [theta_deg, phi_deg]")
            return SourceModel.plane(Direction(float(inc[0]), float(inc[1])), _get(s, "amplitude", "source", default=1.0))
        if kind == "spherical":
            q = _get(s, "q_feed", "source", default=DEFAULT_FEED_Q)
            if "position_m" in s:
                pos = s["position_m"]
                if not isinstance(pos, list) or len(pos) != 3:
                    raise ConfigError("source.position_m: expected [x, y, z]")
                return SourceModel.spherical([float(v) for v in pos], q)
            return SourceModel.feed_at(
                _get(s, "distance_m", "source"),
                _get(s, "theta_deg", "source"),
                _get(s, "phi_deg", "source", default=0.0),
                q,
            )
    except ConfigError:
        raise
    except ValueError as exc:
        raise ConfigError(f"source: {exc}") from None
    raise ConfigError(f"source.kind: expected 'plane' or 'spherical', got {kind!r}")


def _parse_quantization(q: dict, geometry: ArrayGeometry, base_dir: Path):
    present = [k for k in ("bits", "codebook_csv", "continuous") if q.get(k) not in (None, False)]
    if len(present) != 1:
        raise ConfigError(
            "quantization: exactly one of 'bits', 'codebook_csv' or 'continuous' must be given"
        )
    key = present[0]
    if key == "continuous":
        return None, "continuous"
    if key == "bits":
        bits = _get(q, "bits", "quantization", int)
        if not 1 <= bits <= 12:
            raise ConfigError("quantization.bits: expected 1..12")
        return ideal_states(bits), f"{bits}-bit"
    path = Path(q["codebook_csv"])
    if not path.is_absolute():
        path = base_dir / path
    if not path.exists():
        raise ConfigError(f"quantization.codebook_csv: file not found: {path}")
    try:
        book = load_codebook(path)
        freq = _get(q, "frequency_hz", "quantization", default=geometry.frequency)
        return book.states_at(freq), f"codebook:{path.name}"
    except CodebookParseError as exc:
        raise ConfigError(f"quantization.codebook_csv: {exc}") from None
    except ValueError as exc:
        raise ConfigError(f"quantization.frequency_hz: {exc}") from None


def load_config(path) -> RunConfig:
    path = Path(path)
    if not path.exists():
        raise ConfigError(f"config file not found: {path}")
    try:
        cfg = json.loads(path.read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}: invalid JSON: {exc}") from None
    return RunConfig.from_dict(cfg, path.parent)


def _resolve_offset(rc: RunConfig) -> float:
    if rc.offset_sweep and rc.states is not None:
        best, level = optimize_offset(
            rc.geometry, rc.source, rc.steer, rc.states, rc.offset_sweep, rc.element_q
        )
        logger.info("optimised offset %.1f deg (level %.3f dB)", best, level)
        return best
    return rc.offset


def _synthesize(rc: RunConfig):
    """Phase map and, unless running continuous, its quantised version."""
    offset = _resolve_offset(rc)
    pmap = ideal_phase_profile(rc.geometry, rc.source, rc.steer, offset)
    qmap = None if rc.states is None else quantize_phase_map(pmap, rc.states)
    return pmap, qmap, offset


def _continuous_rows(pmap):
    # no discrete state: state_index is written as -1
    for i in range(pmap.geometry.n_rows):
        for j in range(pmap.geometry.n_cols):
            ph = float(pmap.phases[i, j])
            yield [i, j, ph, -1, ph, 1.0]


def cmd_synth(args) -> int:
    rc = load_config(args.config)
    pmap, qmap, offset = _synthesize(rc)
    out = Path(args.output)
    rows = _continuous_rows(pmap) if qmap is None else map_rows(qmap)
    write_csv(out, MAP_FIELDS, rows, rc.digest)
    print(f"elements: {rc.geometry.n_elements}  quantization: {rc.bits_label}  offset: {offset:g} deg")
    if qmap is not None:
        hist = qmap.histogram(len(rc.states))
        print("state histogram: " + " ".join(f"{i}:{n}" for i, n in enumerate(hist)))
    print(f"wrote {out}")
    return EXIT_OK


def cmd_pattern(args) -> int:
    rc = load_config(args.config)
    pmap, qmap, offset = _synthesize(rc)
    refl = pmap if qmap is None else qmap
    mode = "rcs" if rc.source.kind == "plane" else "radiation"
    meta = {"source": rc.source.to_dict(), "steer": [rc.steer.theta, rc.steer.phi], "bits": rc.bits_label}
    pat = radiate(rc.geometry, illuminate(rc.geometry, rc.source), refl, rc.grid, rc.element_q, meta, mode)
    specular = rc.source.specular_direction() if rc.source.kind == "plane" else None
    metrics = evaluate_pattern(pat, rc.steer, specular)

    out = Path(args.outdir)
    d = rc.digest
    write_csv(out / "pattern.csv", ["theta_deg", "phi_deg", "re", "im", "power_db_rel"], pattern_rows(pat), d)
    for name, plane in (("cut_e_plane.csv", "E-plane"), ("cut_h_plane.csv", "H-plane")):
        cut = pattern_cut(pat, plane)
        write_csv(out / name, ["angle_deg", "power_db_rel"], zip(cut.angles.tolist(), cut.db.tolist()), d)
    write_json(out / "metrics.json", metrics.to_dict(), d)
    m = metrics.to_dict()
    print(
        f"peak ({m['peak_theta_deg']:g}, {m['peak_phi_deg']:g}) deg  D={m['peak_level_db']:.2f} dBi"
        + (f"  SLL={m['sll_db']:.2f} dB" if m["sll_db"] is not None else "")
        + (f"  QLL={m['qll_db']:.2f} dB" if m["qll_db"] is not None else "")
    )
    print(f"wrote {out}")
    return EXIT_OK


def cmd_codebook(args) -> int:
    path = Path(args.csv)
    if not path.exists():
        raise ConfigError(f"codebook file not found: {path}")
    book = load_codebook(path)
    digest = config_hash(
        {"codebook_sha256": hashlib.sha256(path.read_bytes()).hexdigest(), "threshold": args.threshold}
    )
    rows = []
    for f, states in book.entries:
        rows.append([f, equivalent_bits(states), average_magnitude(states)])
    bands = effective_bandwidth(book, args.threshold)
    out = Path(args.outdir)
    write_csv(out / "codebook_table.csv", ["freq_hz", "n_bit", "avg_mag_db"], rows, digest)
    report = {
        "threshold": args.threshold,
        "n_states": book.n_states,
        "bands": [
            {"f_low_hz": lo, "f_high_hz": hi, "relative_bw_pct": 100.0 * relative_bandwidth(lo, hi)}
            for lo, hi in bands
        ],
    }
    write_json(out / "bands.json", report, digest)
    for b in report["bands"]:
        print(f"band {b['f_low_hz'] / 1e9:.3f}-{b['f_high_hz'] / 1e9:.3f} GHz ({b['relative_bw_pct']:.1f}%)")
    if not bands:
        print(f"no band above N_bit > {args.threshold:g}")
    print(f"wrote {out}")
    return EXIT_OK


def cmd_sweep(args) -> int:
    rc = load_config(args.config)
    thetas = args.angles if args.angles is not None else rc.scan_angles
    try:
        angles = [Direction(t, rc.scan_phi) for t in thetas]
    except ValueError as exc:
        raise ConfigError(f"scan angles: {exc}") from None
    rows = scan_sweep(rc.geometry, rc.source, rc.states, angles, rc.offset, rc.grid, rc.element_q)
    out = Path(args.output)
    write_csv(out, SCAN_FIELDS, (r.as_row() for r in rows), rc.digest)
    for r in rows:
        print(
            f"{r.theta_deg:5.1f} deg  D={r.peak_level_db:6.2f} dBi  SLL={r.sll_db:6.2f} dB  "
            f"err={r.pointing_error_deg:.2f} deg {r.error}"
        )
    print(f"wrote {out} ({len(rows)} rows)")
    return EXIT_OK


def read_map_csv(path, geometry: ArrayGeometry) -> np.ndarray:
    """State-index grid from a map CSV written by ``synth``."""
    path = Path(path)
    if not path.exists():
        raise ConfigError(f"map file not found: {path}")
    with path.open(encoding="utf-8", newline="") as fh:
        lines = [ln for ln in fh if not ln.startswith("#")]
    reader = csv.DictReader(lines)
    if reader.fieldnames != MAP_FIELDS:
        raise ConfigError(f"{path}: header {reader.fieldnames} != {MAP_FIELDS}")
    idx = np.full(geometry.shape, -1, dtype=int)
    for n, row in enumerate(reader, start=2):
        try:
            i, j, s = int(row["row"]), int(row["col"]), int(row["state_index"])
        except (TypeError, ValueError):
            raise ConfigError(f"{path}: data row {n}: non-integer row/col/state_index") from None
        if not (0 <= i < geometry.n_rows and 0 <= j < geometry.n_cols):
            raise ConfigError(f"{path}: data row {n}: cell ({i}, {j}) outside the {geometry.shape} grid")
        idx[i, j] = s
    if np.any(idx == -1):
        raise ConfigError(f"{path}: map does not cover every cell")
    return idx


def cmd_bitstream(args) -> int:
    rc = load_config(args.config)
    mapping = rc.mapping
    if args.mapping:
        try:
            mapping = control.StateMapping.from_json(json.loads(Path(args.mapping).read_text(encoding="utf-8")))
        except (OSError, ValueError, TypeError, IndexError) as exc:
            raise ConfigError(f"--mapping: {exc}") from None
    idx = read_map_csv(args.map_csv, rc.geometry)
    bad = np.argwhere(~np.isin(idx, list(mapping.table)))
    if bad.size:
        i, j = bad[0]
        raise ConfigError(f"map cell ({i}, {j}) has state {idx[i, j]} which the mapping does not define")
    qmap = QuantizedMap(rc.geometry, idx, np.zeros(idx.shape), np.ones(idx.shape))
    frame = control.apply_mapping(qmap, mapping)
    bits = control.serialize(frame, rc.chain)

    out = Path(args.output)
    write_text_atomic(out, control.to_hex(bits))
    side = control.sidecar(rc.geometry.n_elements, rc.chain, mapping)
    side["data_bits"] = int(frame.lines.size)
    write_json(out.with_suffix(".json"), side, rc.digest)
    print(f"{frame.lines.size} data bits, {side['registers']} registers, {len(bits) // 8} bytes -> {out}")
    if args.verify:
        recovered = control.reparse(control.simulate_chain(bits, rc.chain), rc.geometry.n_elements)
        ok = recovered == frame and np.array_equal(
            control.frame_states(recovered, mapping), idx.ravel()
        )
        print("verify: PASS" if ok else "verify: FAIL")
        if not ok:
            return EXIT_COMPUTE
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="rissim", description=__doc__.splitlines()[0])
    ap.add_argument("-v", "--verbose", action="count", default=0)
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("synth", help="ideal + quantised phase map CSV")
    p.add_argument("config")
    p.add_argument("-o", "--output", default="phase_map.csv")
    p.set_defaults(func=cmd_synth)

    p = sub.add_parser("pattern", help="full-grid pattern, E/H cuts and metrics JSON")
    p.add_argument("config")
    p.add_argument("-o", "--outdir", default="pattern_out")
    p.set_defaults(func=cmd_pattern)

    p = sub.add_parser("codebook", help="equivalent-bit table and band report")
    p.add_argument("csv")
    p.add_argument("-t", "--threshold", type=float, default=1.7)
    p.add_argument("-o", "--outdir", default="codebook_out")
    p.set_defaults(func=cmd_codebook)

    p = sub.add_parser("sweep", help="beam-scan table")
    p.add_argument("config")
    p.add_argument("--angles", type=float, nargs="*", default=None, help="steer thetas in degrees")
    p.add_argument("-o", "--output", default="scan.csv")
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("bitstream", help="hex shift-register stream + JSON sidecar")
    p.add_argument("config")
    p.add_argument("map_csv")
    p.add_argument("-o", "--output", default="bitstream.hex")
    p.add_argument("--mapping", default=None, help="JSON file overriding the state mapping")
    p.add_argument("--verify", action="store_true", help="re-simulate the chain and check the round trip")
    p.set_defaults(func=cmd_bitstream)
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(
        level=logging.WARNING - 10 * min(args.verbose, 2), format="%(levelname)s %(name)s: %(message)s"
    )
    try:
        return args.func(args)
    except (ConfigError, CodebookParseError, control.BitstreamError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID
    except (ValueError, ArithmeticError, OSError) as exc:
        print(f"computation failed: {exc}", file=sys.stderr)
        return EXIT_COMPUTE


if __name__ == "__main__":
    raise SystemExit(main())
