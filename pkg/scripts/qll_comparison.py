"""Quantization-lobe level of continuous, 2-bit and 1-bit maps.

Normal plane-wave incidence, beam steered to 30 deg in the yz plane.  Writes
the H-plane cut of each case to a CSV (angle, then one column per case) for
external plotting.
"""

import argparse
from pathlib import Path

from rissim import ArrayGeometry, Direction, SourceModel, ideal_states, illuminate, pattern_cut, radiate
from rissim.io import write_csv
from rissim.metrics import evaluate_pattern, synthesize


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--steer", type=float, default=30.0, help="steer theta in the yz plane, deg")
    ap.add_argument("--freq", type=float, default=26e9)
    ap.add_argument("-o", "--output", type=Path, default=Path("qll_cuts.csv"))
    args = ap.parse_args()

    g = ArrayGeometry(20, 20, 4.6e-3, args.freq)
    src = SourceModel.plane(Direction(0, 0))
    steer = Direction(args.steer, 90)
    ex = illuminate(g, src)
    cuts = {}
    print("case,peak_theta_deg,sll_db,qll_db")
    for label, states in (("continuous", None), ("2-bit", ideal_states(2)), ("1-bit", ideal_states(1))):
        pat = radiate(g, ex, synthesize(g, src, steer, states))
        m = evaluate_pattern(pat, steer, src.specular_direction())
        print(f"{label},{m.peak_direction.theta:g},{m.sll:.2f},{m.qll:.2f}")
        cuts[label] = pattern_cut(pat, "H-plane")

    angles = next(iter(cuts.values())).angles
    rows = ([a, *(c.db[k] for c in cuts.values())] for k, a in enumerate(angles))
    write_csv(args.output, ["angle_deg", *cuts], rows)
    print(f"# wrote {args.output}")


if __name__ == "__main__":
    main()
