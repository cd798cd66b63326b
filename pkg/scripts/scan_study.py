"""Beam-scan table for the near-field feed setup at several bit depths.

Spherical feed 25 cm from the surface at 30 deg incidence, beam scanned
0-50 deg in the yz plane.  Peak level is reported as directivity (dBi).
"""

import argparse

import numpy as np

from rissim import ArrayGeometry, Direction, SourceModel, ideal_states, scan_sweep


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--angles", type=float, nargs="+", default=[0, 10, 20, 30, 40, 50])
    ap.add_argument("--bits", type=int, nargs="+", default=[1, 2, 3])
    ap.add_argument("--q-feed", type=float, default=6.5)
    args = ap.parse_args()

    g = ArrayGeometry(20, 20, 4.6e-3, 26e9)
    src = SourceModel.feed_at(0.25, 30, 270, args.q_feed)
    angles = [Direction(t, 90) for t in args.angles]
    print("bits,theta_deg,directivity_dbi,sll_db,pointing_error_deg")
    for bits in args.bits:
        rows = scan_sweep(g, src, ideal_states(bits), angles)
        for r in rows:
            print(f"{bits},{r.theta_deg:g},{r.peak_level_db:.2f},{r.sll_db:.2f},{r.pointing_error_deg:.2f}")
        levels = np.array([r.peak_level_db for r in rows])
        print(f"# {bits}-bit spread {np.ptp(levels):.2f} dB, worst SLL {max(r.sll_db for r in rows):.2f} dB")


if __name__ == "__main__":
    main()
