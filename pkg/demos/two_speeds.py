"""A pulse hits a wavespeed jump and splits into reflected and
transmitted parts.

Scaled-down version of the measurement experiment: coarser mesh, shorter
horizon, about half a minute of compute.  The printed series is the
integral of |U| over a small box below the source; the small early bump
is the head wave racing ahead through the fast material, then the direct
arrival, then the interface reflection.
"""

import numpy as np

from tentdg import (
    BoundaryData,
    DGParams,
    ProblemSpec,
    WavespeedMap,
    box_l1_U,
    gaussian_pulse,
    retain_window,
    run_simulation,
)
from tentdg.studies import hetero_mesh

mesh = hetero_mesh(fine=0.08)
speeds = WavespeedMap({0: 1.0, 1: 3.0})
print(f"{mesh.num_elements} elements, "
      f"{int((mesh.material == 1).sum())} in the fast material")

eps = 2.0 ** -7
lo, hi = (1.0 - eps, 0.25 - eps), (1.0 + eps, 0.25 + eps)
box = [e for e in range(mesh.num_elements)
       if (v := mesh.vertices[mesh.elements[e]]).max(0)[0] >= lo[0]
       and v.min(0)[0] <= hi[0] and v.max(0)[1] >= lo[1]
       and v.min(0)[1] <= hi[1]]

spec = ProblemSpec(mesh, speeds, p=3, T=0.9,
                   initial=gaussian_pulse((1.0, 1.0), 0.02),
                   bc=BoundaryData.homogeneous(),
                   params=DGParams(recovery="bottom"))
rec = run_simulation(spec, retain=retain_window(0.0, spec.T, elements=box))
print(f"{rec.num_tents} tents solved in {rec.seconds:.1f}s")

ts = np.arange(0.0, spec.T, 0.02)
uc = np.array([box_l1_U(rec, lo, hi, t) for t in ts])
peak = uc.max()
for t, u in zip(ts, uc):
    bar = "#" * int(50 * u / peak)
    print(f"t={t:.2f} {bar}")
