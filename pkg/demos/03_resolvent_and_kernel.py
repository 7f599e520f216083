"""The discrete resolvent against the Helmholtz kernel cos(r)/(4 pi r).

A unit mass in one cell is passed through the regularized multiplier and
compared with the real part of the outgoing fundamental solution. Then the
kernel is split into its annulus part Phi1 (frequencies near the sphere,
slow decay) and the remainder Phi2 (fast decay).
"""

import math
from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt
import numpy as np

import hdual
from hdual.kernel import psi_closed_form_3d
from hdual.resolvent import point_source_response

OUT = Path(__file__).with_name("output")
OUT.mkdir(exist_ok=True)

grid = hdual.make_grid(3, 8 * math.pi, 64)
i0 = grid.origin_index
x = grid.axis[i0[0]:]

# Along the positive x1 axis. Larger delta damps the response like exp(-delta r / 2).
fig, ax = plt.subplots(figsize=(6, 3.5))
ax.plot(x[1:], psi_closed_form_3d(x[1:]), "k-", lw=2, label="cos(r)/(4 pi r)")
for delta in (1e-3, 1.0 / 64, 0.1):
    u = point_source_response(hdual.make_plan(grid, delta)).values
    ax.plot(x[1:], u[i0[0] + 1:, i0[1], i0[2]], "--", label=f"delta = {delta:g}")
ax.set_xlabel("x1")
ax.set_ylim(-0.05, 0.1)
ax.legend(fontsize=8)
fig.tight_layout()
fig.savefig(OUT / "point_source.png", dpi=120)

# A sanity value: the Hankel route gives the same kernel as the closed form.
r = np.array([0.5, 2.0, 9.0, 30.0])
print("psi_value(3, r)      :", np.round(hdual.psi_value(3, r), 12))
print("cos(r)/(4 pi r)      :", np.round(psi_closed_form_3d(r), 12))

# Band split. Phi1 * (1+r) and Phi2 * (1+r)^2 should both stay bounded.
report = hdual.verify_band_split_bounds(3, grid)
print(f"annulus modes: {report.annulus_modes}")
print(f"sup |Phi1| (1+r)   = {report.phi1_constant:.4f}")
print(f"sup |Phi2| (1+r)^2 = {report.phi2_constant:.4f}")

psi, phi1, phi2 = hdual.band_split(grid)
fig, ax = plt.subplots(figsize=(6, 3.5))
line = (slice(i0[0] + 1, None), i0[1], i0[2])
ax.semilogy(x[1:], np.abs(phi1[line]) + 1e-12, label="|Phi1|")
ax.semilogy(x[1:], np.abs(phi2[line]) + 1e-12, label="|Phi2|")
ax.set_xlabel("x1")
ax.legend()
fig.tight_layout()
fig.savefig(OUT / "band_split.png", dpi=120)
print(f"figures written to {OUT}")
