"""Smoke test for the pyicsfuzz extension module.

Build and install first:
    pip install maturin
    maturin build --release -m crates/py/Cargo.toml -o dist && pip install dist/pyicsfuzz-*.whl
"""

import json
import math

import pyicsfuzz as ic


def check_geometry():
    a = ic.Box(0.0, 0.0, 2.0, 1.0, 0.0)
    b = ic.Box(1.0, 0.0, 2.0, 1.0, 0.0)
    assert a.overlaps(b)
    assert math.isclose(a.intersection_area(b), 6.0, rel_tol=1e-9)
    assert math.isclose(a.iou(b), 6.0 / 10.0, rel_tol=1e-9)
    far = ic.Box(10.0, 0.0, 2.0, 1.0, math.pi / 4)
    assert not a.overlaps(far) and a.intersection_area(far) == 0.0
    assert len(a.corners()) == 4


def check_execution():
    p = ic.ControlParameters(7.0, 20.0, 1.0)
    e = ic.execute("PSF", p)
    assert e.verdict == "NC" and e.first_contact_s is None
    e = ic.execute("FLV", ic.ControlParameters(2.0, 20.0, 0.0), ic.DefectModel.perfect())
    assert e.verdict == "DC" and e.first_contact_s is not None
    try:
        ic.ControlParameters(9.0, 20.0, 0.0)
    except ValueError:
        pass
    else:
        raise AssertionError("out-of-range distance accepted")


def check_campaign():
    cfg = json.dumps({"budget": 240, "kinds": ["FLB", "LC", "InC"]})
    first = ic.run_campaign(cfg)
    second = ic.run_campaign(cfg)
    assert len(first) == 240
    log = first.log()
    assert log == second.log()
    totals = dict(first.totals())
    assert sum(totals.values()) == 240 and totals["FP"] == 0
    for line in log.splitlines()[::37]:
        rec = json.loads(line)
        assert ic.replay(line, cfg).verdict == rec["verdict"]
    csv = ic.report_from_log(log, "csv")
    assert csv == first.report("csv") and csv.startswith("axis,bucket,")
    assert ic.report_from_log(log, "svg").lstrip().startswith("<svg")
    manifest = json.loads(first.manifest_json())
    assert manifest["executions"] == 240


if __name__ == "__main__":
    check_geometry()
    check_execution()
    check_campaign()
    print("pyicsfuzz smoke test ok:", ", ".join(ic.SCENARIO_KINDS))
