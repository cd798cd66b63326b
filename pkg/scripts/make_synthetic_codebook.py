"""Write a synthetic 4-state codebook CSV with a known 2-bit band.

States sit at 0/90/180/(270 - d(f)) deg with the detuning
d(f) = d0 * ((f - fc) / hw)^2.  With d0 = 52.8 deg the equivalent-bit count
drops through 1.7 at fc +- hw, so the band edges are known in closed form.
Magnitudes follow a mild parabolic loss.  This is a stand-in for measured
unit-cell data, not a measurement.
"""

import argparse
from pathlib import Path

import numpy as np

from rissim.codebook import PhaseCodebook, codebook_rows
from rissim.io import write_csv


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--fmin", type=float, default=22e9)
    ap.add_argument("--fmax", type=float, default=30e9)
    ap.add_argument("--step", type=float, default=0.1e9)
    ap.add_argument("--center", type=float, default=25.9e9)
    ap.add_argument("--half-width", type=float, default=1.8e9)
    ap.add_argument("--detune", type=float, default=52.8, help="detuning at the band edges, deg")
    ap.add_argument("-o", "--output", type=Path, default=Path("synthetic_codebook.csv"))
    args = ap.parse_args()

    f = np.arange(args.fmin, args.fmax + args.step / 2, args.step)
    x = (f - args.center) / args.half_width
    d = args.detune * x**2
    phases = np.column_stack([np.zeros_like(f), np.full_like(f, 90.0), np.full_like(f, 180.0), 270.0 - d])
    loss_db = -0.4 - 0.3 * np.minimum(x**2, 4.0)[:, None] * np.array([1.0, 1.2, 0.8, 1.5])
    book = PhaseCodebook(f, phases, 10 ** (loss_db / 20))
    header, rows = codebook_rows(book)
    write_csv(args.output, header, rows)
    print(f"wrote {args.output}: {f.size} frequencies, expected band "
          f"{(args.center - args.half_width) / 1e9:.2f}-{(args.center + args.half_width) / 1e9:.2f} GHz "
          "(for the default detuning)")


if __name__ == "__main__":
    main()
