#!/usr/bin/env python3
"""End-to-end smoke test of the python bindings against the corpus."""

import subprocess
import sys
from pathlib import Path

ROOT = Path(__file__).resolve().parents[1]
sys.path.insert(0, str(ROOT / "python"))


def ensure_native():
    built = any(
        (ROOT / "target" / profile / "libflatflow_native.so").exists()
        for profile in ("release", "debug")
    )
    if not built:
        subprocess.run(["cargo", "build", "-p", "flatflow-py"], cwd=ROOT, check=True)


def main():
    ensure_native()
    import flatflow

    doc = (ROOT / "crates/flatflow/corpus/pillowcase.surf").read_text()
    pillowcase = flatflow.Surface.parse(doc)
    assert abs(pillowcase.area - 2.0) < 1e-12, pillowcase.area
    assert pillowcase.euler_characteristic == 2
    assert pillowcase.orientable and not pillowcase.boundary
    assert sum(c["singular"] for c in pillowcase.cone_points()) == 4

    info = flatflow.holonomy(pillowcase)
    assert info["order"] == 2 and info["rotation_order"] == 2, info
    assert info["really_flat"] and not info["failures"]

    stages = flatflow.unfold(pillowcase)
    assert len(stages) == 1
    cover = stages[-1]
    assert cover.degree == 2, repr(cover)
    passed, report = cover.verify(seed=1)
    assert passed, report

    torus = cover.total
    assert torus.euler_characteristic == 0
    assert flatflow.holonomy(torus)["order"] == 1
    assert flatflow.Surface.parse(torus.export()).export() == torus.export()

    path = flatflow.trace(torus, torus.polygons[0], (0.2, 0.3), (1.0, 1.618), 25.0)
    assert abs(path["length"] - 25.0) < 1e-9
    assert len(path["events"]) > 10
    assert all(e["kind"] == "crossing" for e in path["events"])

    table = flatflow.Surface.parse(
        (ROOT / "crates/flatflow/corpus/square-table.surf").read_text()
    )
    bounce = flatflow.trace(table, "sq", (0.3, 0.4), (1.0, 0.7), 8.0, billiard=True)
    assert any(e["kind"] == "reflection" for e in bounce["events"])

    result = flatflow.ergodicity(
        torus, "directional", samples=4, length=2000.0, depth=1, seed=7
    )
    again = flatflow.ergodicity(
        torus, "directional", samples=4, length=2000.0, depth=1, seed=7
    )
    assert result["report"] == again["report"]
    assert result["verdict"], result["report"]
    assert result["median_final"] < result["median_first"]

    print("smoke test passed")


if __name__ == "__main__":
    main()
