"""Optional k=6 row of the alpha table (not part of the test suite).

Takes a few minutes on one core and roughly 1 GB of memory.
"""

import json
import time

from stokesmg import bench
from stokesmg.assembly import TABLE_UD_RADIUS

for alpha in bench.TABLE_ALPHAS:
    t0 = time.perf_counter()
    _, rep, _ = bench.run(bench.RunConfig(level=6, alpha=alpha, ud_radius=TABLE_UD_RADIUS))
    print(json.dumps({"k": 6, "alpha": alpha, "n": rep.n, "q": round(rep.q, 4),
                      "converged": rep.converged, "seconds": round(time.perf_counter() - t0, 1)}))
