"""Reproduce every CSV the experiment suite produces, at full scale.

Writes into results/ next to this script.  Expect roughly twenty minutes
of compute on one core; each study prints as it lands.  The plotting
package turns the directory into figures.
"""

import sys
import time
from pathlib import Path

from tentdg import studies

out = Path(__file__).resolve().parent / "results"
out.mkdir(exist_ok=True)
t0 = time.perf_counter()


def done(name):
    print(f"[{time.perf_counter() - t0:7.1f}s] {name}")


studies.convergence_study(n=1, out=out / "convergence-1d.csv")
done("convergence-1d.csv")
studies.convergence_study(n=2, ps=(1, 2), hs=(1 / 4, 1 / 8, 1 / 16),
                          out=out / "convergence-2d.csv")
done("convergence-2d.csv")
studies.p_convergence_study(out=out / "pconvergence.csv")
done("pconvergence.csv")
studies.compare_spaces_study(out=out / "compare-spaces.csv")
done("compare-spaces.csv")
studies.compare_meshing_study(out=out / "compare-meshing.csv")
done("compare-meshing.csv")
studies.seed_study(out=out / "seed-study.csv")
done("seed-study.csv")
studies.energy_study(out=out / "energy.csv")
done("energy.csv")
studies.lshape_study(out=out / "lshape.csv")
done("lshape.csv")
studies.hetero_study(out_measurement=out / "measurement.csv",
                     out_snapshots=out / "snapshots.csv")
done("measurement.csv + snapshots.csv")

print(f"all studies in {out}", file=sys.stderr)
