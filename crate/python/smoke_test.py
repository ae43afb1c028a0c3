"""Smoke test for the sarforge Python extension.

Build and install first:
    pip install maturin
    pip install --no-build-isolation ./crates/python
"""

import json
import math
import os
import sys
import tempfile

import sarforge


def check(cond, msg):
    if not cond:
        print("FAIL:", msg)
        sys.exit(1)
    print("ok:", msg)


def main():
    check(abs(sarforge.plate_rcs(1.0, 1.0, 1e9) - 21.4557) < 1e-3, "plate closed form")

    plate = json.dumps({"name": "plate", "objects": [{"primitive": {"type": "plate", "width": 1, "length": 1}}]})
    sigma = sarforge.bistatic_rcs(plate, 1e9, 0.0, 90.0, 90.0, [0.0], polarization="H")
    check(abs(sigma[0] - sarforge.plate_rcs(1.0, 1.0, 1e9)) < 0.5, "PO plate broadside")

    prism = json.dumps({"name": "prism", "objects": [{"primitive": {"type": "box", "width": 1, "length": 1, "height": 10}}]})
    az = [i * 0.72 for i in range(500)]
    trace = sarforge.bistatic_rcs(prism, 1e9, 45.0, 0.0, 0.0, az)
    top = az[max(range(len(trace)), key=trace.__getitem__)]
    check(abs(top - 225.0) <= 2.0, "prism forward lobe at %.2f deg" % top)

    run = sarforge.point_run([(0, 0, 0, 1.0), (1, 2, 0, 0.5)])
    check((run.n_azimuth, run.n_frequency) == (500, 51), "default grid 500 x 51")
    img = run.image(start=475)
    peaks = img.peaks(max_peaks=2)
    near = min(peaks, key=lambda p: math.hypot(p[0] - 1.0, p[1] - 2.0))
    check(math.hypot(near[0] - 1.0, near[1] - 2.0) < 0.3, "scatterer recovered at (%.2f, %.2f)" % near[:2])
    check(abs(peaks[0][2] - peaks[1][2] - 6.02) < 1.0, "amplitude ratio %.2f dB" % (peaks[0][2] - peaks[1][2]))

    with tempfile.TemporaryDirectory() as d:
        path = os.path.join(d, "run.bsar")
        run.save(path)
        back = sarforge.Run.load(path)
        check(back.content_hash() == run.content_hash(), "run file round trip")
        img.write_png(os.path.join(d, "clip.png"))
        check(os.path.getsize(os.path.join(d, "clip.png")) > 0, "png written")
        check(sarforge.cli(["frobnicate"]) == 2, "cli usage error exit code")

    try:
        import jsonschema
    except ImportError:
        jsonschema = None
    if jsonschema is not None:
        here = os.path.dirname(os.path.abspath(__file__))
        with open(os.path.join(here, "..", "crates", "core", "schema", "project.schema.json")) as f:
            schema = json.load(f)
        configs = os.path.join(here, "..", "configs")
        for name in sorted(os.listdir(configs)):
            with open(os.path.join(configs, name)) as f:
                jsonschema.validate(json.load(f), schema)
            check(True, "schema accepts configs/%s" % name)

    print("python smoke test passed")


if __name__ == "__main__":
    main()
