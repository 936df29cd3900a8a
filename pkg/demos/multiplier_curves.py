"""Trace multiplier curves and compare them with the boundary of U_delta.

Letting the multiplier run around the unit circle, exp(i theta), traces a
closed curve of parameters.  For a single letter (delta - 1) that curve is the
boundary of U_delta itself; longer words give curves that leave the region.
The script writes CSV files that any plotting tool can read.

    python3 demos/multiplier_curves.py [outdir]
"""

import sys
from pathlib import Path

import numpy as np

from treezeros.parabolic import multiplier_curve
from treezeros.region import udelta_boundary
from treezeros.reporting import emit_figure_data

delta = 3
samples = 128

single = multiplier_curve((delta - 1,), samples)
boundary = udelta_boundary(delta, samples)
lams = np.array([complex(s.lam) for s in single.solutions])
print(f"single-letter curve vs boundary: max gap {np.max(np.abs(lams - boundary)):.2e}")

# The word (1, 2) starts at its multiplier-one parameter when theta = 0.
pair = multiplier_curve((1, 2), samples)
first = complex(pair.solutions[0].lam)
print(f"(1, 2) curve at theta = 0: {first:.8f}")

outdir = Path(sys.argv[1] if len(sys.argv) > 1 else "figure_data")
outdir.mkdir(exist_ok=True)
for path in emit_figure_data([(delta - 1,), (1, 2), (1, 1, 2)], delta, samples, outdir):
    print("wrote", path)
