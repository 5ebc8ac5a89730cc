"""Smoke test for the dcws extension module.

Build and install first:
    pip install maturin
    maturin build --release -m crates/python/Cargo.toml -o dist
    pip install dist/dcws-*.whl
"""

import json
import math

import dcws


def main():
    spec = dcws.SpectrumConfig(6e9, 30e6)
    assert spec.subband_count == 201
    assert spec.subbands()[0] == 100 and spec.subbands()[-1] == -100

    # all-ones chips fold only the DC subband, with weight 1
    c = dcws.fourier_coeffs([1] * 15)
    assert abs(c[7] - 1) < 1e-12
    assert all(abs(v) < 1e-12 for i, v in enumerate(c) if i != 7)

    small = dcws.SpectrumConfig.with_subbands(15)
    a = dcws.assemble_matrix(small, 7, list(range(1, 17)))
    assert len(a) == 16 and len(a[0]) == 15

    x = [0.0] * 15
    x[3] = x[11] = 1.5
    y = [sum((row[i] * x[i]).real for i in range(15)) for row in a]
    x_hat, report = dcws.bp_recover(a, y, epsilon=0.0)
    assert report["converged"] and report["feasible"]
    assert max(abs(p - q) for p, q in zip(x_hat, x)) < 1e-6
    assert dcws.oracle_recover(a, y, 2)[3] > 1.0
    assert dcws.decide([0.9, 0.1, 0.5], 0.5) == [True, False, False]

    cfg = dcws.ExperimentConfig(json.dumps({
        "spectrum": {"total_bandwidth_hz": 31.0, "subband_bandwidth_hz": 1.0},
        "pu_count": 2,
        "nodes": [8, 16],
        "trials": 20,
    }))
    cfg.set_sigma_w(0.0)
    trial = dcws.run_trial(cfg, 16, 0, 1e-3)
    assert trial["mse"] < 1e-8, trial["mse"]
    assert trial["counts"]["pd"] == 1.0

    cfg.set_snr_db(20.0)
    report = dcws.sweep_k(cfg)
    assert [row["K"] for row in report["per_k"]] == [8, 16]
    assert all(math.isfinite(row["mean_mse"]) for row in report["per_k"])

    rates = dcws.rate_table(dcws.ExperimentConfig())
    assert rates["nyquist_rate_hz"] == 6e9
    assert rates["existing_cs_rate_hz"] == 3.6e9
    assert rates["per_node_rate_hz"] == 30e6

    assert dcws.aliasing_selftest(seeds=5) < 1e-6

    try:
        dcws.SpectrumConfig(6e9, 35e6)
    except ValueError:
        pass
    else:
        raise AssertionError("non-integer partition accepted")

    print("dcws smoke test passed")


if __name__ == "__main__":
    main()
