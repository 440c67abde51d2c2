"""Smoke test for the rmt_locallaw extension.

Build with `maturin develop -m crates/py/Cargo.toml --features extension-module`,
or copy target/release/librmt_locallaw.so next to this file as rmt_locallaw.so.
"""

import json
import math
import os
import sys
import tempfile

sys.path.insert(0, os.path.dirname(os.path.abspath(__file__)))

import rmt_locallaw as rl


def main():
    m = rl.msc(complex(0.0, 1.0))
    assert abs(m * m + 1j * m + 1) < 1e-12, m
    assert abs(rl.rho_sc(0.0) - 1 / math.pi) < 1e-12
    assert abs(rl.nsc(0.0) - 0.5) < 1e-12

    profile = rl.Profile.wigner(200)
    dist = rl.Distribution.catalog("bernoulli")
    h = rl.sample_matrix(profile, dist, beta=2, seed=7)
    assert h.n == 200
    ev = h.eigvalsh()
    assert len(ev) == 200 and all(a <= b for a, b in zip(ev, ev[1:]))

    d = rl.diagnostics(h, profile, complex(0.0, 0.5))
    assert d["lambda_d"] < 0.5, d["lambda_d"]
    assert d["mainseeq_residual"] < 1e-8

    edge = rl.edge_check(ev, 0.05)
    assert edge["passes"], edge
    assert rl.rigidity_stat(ev) < 1.0

    law, m3, m4 = rl.match_four_moments(0.0, 2.0, 0.1)
    assert abs(m3) < 1e-12 and abs(m4 - 2.0) < 1e-10
    assert law.m4 > 0

    u = rl.unfold(ev)
    assert rl.ks_distance(u, u) == 0.0
    assert abs(rl.sine_kernel(0.0) - 1.0) < 1e-15

    cfg = {"experiment": "rigidity", "sizes": [100], "samples": 4, "seed": 1}
    with tempfile.TemporaryDirectory() as out:
        manifest = json.loads(rl.run_config(json.dumps(cfg), out))
        assert manifest["experiment"] == "rigidity"
        assert os.path.exists(os.path.join(out, "rigidity.manifest.json"))

    try:
        rl.parse_config('{"experiment": "rigidity", "sizes": [10], "samplse": 3}')
    except ValueError as e:
        assert "samplse" in str(e)
    else:
        raise AssertionError("typo accepted")

    print("smoke test ok")


if __name__ == "__main__":
    main()
