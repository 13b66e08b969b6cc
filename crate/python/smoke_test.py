"""Smoke test for the daqc_py extension.

Build and install first:
    pip install maturin
    maturin build --release -m crates/py/Cargo.toml -o dist && pip install dist/daqc_py-*.whl
"""

import math

import daqc_py


def main():
    s = daqc_py.compile("dqc", 3)
    assert s["events"] == 26, s["events"]
    assert s["total_time_us"] > 0

    blocks = daqc_py.block_times(3, [1.0, 1.0, 1.0])
    assert len(blocks) == 3
    try:
        daqc_py.block_times(4, [1.0] * 6)
    except ValueError:
        pass
    else:
        raise AssertionError("N = 4 must be rejected")

    clean = daqc_py.sweep("sdaqc", 3, trajectories=1, beta_points=5, control_noise=False,
                          bitflip=False, decoherence=False, measurement_error=False)
    assert all(abs(f - 1.0) < 1e-8 for f in clean["fidelity"]), clean["fidelity"]

    noisy = daqc_py.sweep("bdaqc", 3, trajectories=50, seed=3, beta_points=9)
    again = daqc_py.sweep("bdaqc", 3, trajectories=50, seed=3, beta_points=9)
    assert noisy == again
    assert 0.8 < noisy["average"] < 0.95, noisy["average"]

    b = [1 / 50, 1 / 100, 1 / 150, 1 / 200, 1 / 250]
    zero = [0.8651, 0.9532, 0.9713, 0.9778, 0.9808]
    assert abs(daqc_py.stage2(b, zero, "linear") - 0.9929) < 1e-3
    times = [1 / a for a in (0.94, 0.97, 1.00, 1.03, 1.07)]
    col = [0.7270, 0.7312, 0.7352, 0.7390, 0.7437]
    assert abs(daqc_py.stage1(times, col) - 0.8651) < 1e-3

    r = daqc_py.mitigate(from_paper_values=True)
    assert abs(r["stage2_z0"]["richardson"] - 0.2883) < 1e-3
    r = daqc_py.mitigate()
    assert len(r["fidelity"]) == 5 and all(len(row) == 5 for row in r["fidelity"])
    assert math.isfinite(r["stage2_fidelity"]["linear"])

    print("smoke test passed")


if __name__ == "__main__":
    main()
