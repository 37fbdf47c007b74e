"""Empirical constants of the extension/embedding statements under refinement.

The Cantor-type domain keeps every constant bounded; the cusp domain is not
thick near its points, so the measure density constant grows with n and drags
the embedding constants along.  Writes trend plots when matplotlib is present.

    python demos/characterization_controls.py      (about a minute)
"""

import importlib.util

from qmext.workbench.runner import run

levels = {
    "cantor": [{"kind": "cantor_in_grid", "level": L} for L in (3, 4, 5)],
    "cusp": [{"kind": "cusp", "n": n} for n in (16, 64, 256)],
}
plot = importlib.util.find_spec("matplotlib") is not None

for name, refs in levels.items():
    task = {"op": "trend", "levels": refs, "params": {"Q": 1.0}}
    if plot:
        task["svg"] = f"trend_{name}.svg"
    bundle, code = run({"seed": 0, "tasks": [task]})
    assert code == 0, bundle.get("error")
    trend = bundle["results"][0]["result"]["trend"]
    print(name)
    for cell, row in sorted(trend.items()):
        vals = " ".join(f"{v:9.3f}" for v in row["values"])
        print(f"  {cell}: {vals}   stable={row['stable']} blowup={row['blowup']}")
