"""Mean steer-direction loss of b-bit ideal codebooks versus continuous phases.

Averages over the canonical steer set (10-50 deg in the yz plane) and offset
set (0-350 deg step 10) for a 20x20 surface under normal plane-wave incidence.
"""

import argparse
import time

from rissim import ArrayGeometry, Direction, SourceModel, quantization_loss_study


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--bits", type=int, nargs="+", default=[1, 2, 3, 4, 8])
    ap.add_argument("--size", type=int, default=20)
    ap.add_argument("--pitch", type=float, default=4.6e-3)
    ap.add_argument("--freq", type=float, default=26e9)
    ap.add_argument("--element-q", type=float, default=1.0)
    args = ap.parse_args()

    g = ArrayGeometry(args.size, args.size, args.pitch, args.freq)
    t0 = time.perf_counter()
    rows = quantization_loss_study(
        g, SourceModel.plane(Direction(0, 0)), args.bits, element_q=args.element_q
    )
    print("bits,mean_loss_db")
    for r in rows:
        print(f"{r.bits},{r.mean_loss_db:.4f}")
    print(f"# {time.perf_counter() - t0:.2f} s")


if __name__ == "__main__":
    main()
