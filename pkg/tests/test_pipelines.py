import numpy as np
import pytest

from entdistill.config import ExperimentConfig
from entdistill.metrics import eof
from entdistill.pipelines import (
    MEASURED_TABLE,
    SAMPLE_TVS,
    initial_state,
    run_distill,
    run_qpt_characterization,
    run_sweep_epsilon,
    run_sweep_tv,
    run_table1,
)
from entdistill.serialize import dumps_json
from entdistill.states import density_from_ket, make_phi


def test_initial_state_variants():
    pure = initial_state(ExperimentConfig(epsilon=0.49))
    np.testing.assert_allclose(pure, density_from_ket(make_phi(0.49)))
    exact = initial_state(ExperimentConfig(epsilon=0.59, lam=0.54, mixing="exact"))
    assert exact[0, 3].real == pytest.approx(0.59 * np.sqrt(0.46) / (1 + 0.59**2))
    dep = initial_state(ExperimentConfig(epsilon=1.0, depolarizing=0.03))
    assert dep[1, 1].real == pytest.approx(0.0075)
    with pytest.raises(ValueError, match="epsilon"):
        initial_state(ExperimentConfig())


def test_distill_optimum():
    rep = run_distill(ExperimentConfig(epsilon=0.49, t_v=0.2401))
    assert rep.distilled.metrics.eof == pytest.approx(1.0, abs=1e-8)
    assert rep.distilled.metrics.fidelity_bell == pytest.approx(1.0, abs=1e-8)
    assert rep.success_prob == pytest.approx(0.3872268, abs=1e-7)


def test_distill_suboptimal_filter():
    rep = run_distill(ExperimentConfig(epsilon=0.49, t_v=0.378))
    eps_d = 0.49 / np.sqrt(0.378)
    assert rep.distilled.metrics.epsilon_exp == pytest.approx(eps_d, abs=1e-9)
    assert eps_d == pytest.approx(0.797, abs=5e-4)
    assert rep.distilled.metrics.eof == pytest.approx(eof(density_from_ket(make_phi(eps_d))), abs=1e-9)


def test_distill_mixed_row1():
    rep = run_distill(ExperimentConfig(epsilon=0.59, lam=0.54, t_v=0.378))
    m = rep.distilled.metrics
    assert m.epsilon_exp == pytest.approx(0.96, abs=5e-3)
    assert m.lambda_exp == pytest.approx(0.54, abs=1e-9)
    assert m.eof == pytest.approx(0.63, abs=5e-3)
    assert abs(m.eof - 0.60) <= 0.03 + 5e-3


def test_distill_error_bars_present():
    cfg = ExperimentConfig(epsilon=0.59, lam=0.54, t_v=0.378, noise="poisson", mc_trials=20, seed=4)
    rep = run_distill(cfg)
    errs = rep.distilled.errors
    assert set(errs) == {"purity", "fidelity_bell", "eof", "concurrence", "epsilon_exp", "lambda_exp"}
    assert all(e.std >= 0 and e.n_trials == 20 for e in errs.values())
    assert "errors" in rep.as_dict()["initial"]


def test_distill_deterministic():
    cfg = ExperimentConfig(epsilon=0.59, lam=0.54, t_v=0.378, noise="poisson", mc_trials=10, seed=12)
    assert dumps_json(run_distill(cfg)) == dumps_json(run_distill(cfg))
    other = dumps_json(run_distill(cfg.with_(seed=13)))
    assert other != dumps_json(run_distill(cfg))


def test_sweep_tv_peak_and_purity():
    rows = run_sweep_tv(ExperimentConfig(epsilon=0.49), SAMPLE_TVS)
    assert [r["t_v"] for r in rows] == list(SAMPLE_TVS)
    best = max(rows, key=lambda r: r["eof"])
    assert best["t_v"] in (0.21, 0.27)
    expected = [0.8980, 0.9352, 0.9709, 0.99677, 0.99752, 0.9502, 0.8239]
    np.testing.assert_allclose([r["eof"] for r in rows], expected, atol=5e-4)
    for r in rows:
        assert r["purity"] == pytest.approx(1.0, abs=1e-9)


def test_sweep_tv_identity_filter():
    cfg = ExperimentConfig(epsilon=0.49)
    row = run_sweep_tv(cfg, [1.0])[0]
    rep = run_distill(cfg.with_(t_v=1.0))
    assert row["eof"] == pytest.approx(rep.initial.metrics.eof, abs=1e-12)
    assert row["success_prob"] == pytest.approx(1.0)


@pytest.mark.slow
def test_sweep_tv_poisson_close_to_noiseless():
    base = run_sweep_tv(ExperimentConfig(epsilon=0.49), SAMPLE_TVS)
    devs = []
    for seed in range(100):
        cfg = ExperimentConfig(epsilon=0.49, noise="poisson", seed=seed, method="mle")
        devs.append([a["eof"] - b["eof"] for a, b in zip(run_sweep_tv(cfg, SAMPLE_TVS), base)])
    devs = np.array(devs)
    assert np.all(np.abs(devs.mean(axis=0)) <= 0.03)
    assert np.all(devs.std(axis=0, ddof=1) <= 0.03)


def test_sweep_tv_rejects_empty():
    with pytest.raises(ValueError, match="tv_list"):
        run_sweep_tv(ExperimentConfig(epsilon=0.5), [])


def test_sweep_epsilon():
    tv = 0.3
    cfg = ExperimentConfig(t_v=tv)
    eps_list = [0.2, np.sqrt(tv), 0.8, 1.0]
    phi = run_sweep_epsilon(cfg, eps_list, "phi")
    psi = run_sweep_epsilon(cfg, eps_list, "psi")
    assert phi[1]["eof"] == pytest.approx(1.0, abs=1e-9)
    assert phi[3]["eof"] < 1.0 - 1e-3
    for a, b in zip(phi, psi):
        assert a["eof"] == pytest.approx(b["eof"], abs=1e-10)
        assert a["fidelity"] == pytest.approx(b["fidelity"], abs=1e-10)
    with pytest.raises(ValueError, match="eps_list"):
        run_sweep_epsilon(cfg, [])


def test_qpt_characterization_noiseless():
    res = run_qpt_characterization(ExperimentConfig(), 0.11)
    assert res.process_fidelity == pytest.approx(1.0, abs=1e-8)
    assert res.fitted_t_v == pytest.approx(0.11, abs=1e-4)
    one = run_qpt_characterization(ExperimentConfig(), 1.0)
    np.testing.assert_allclose(one.chi, np.diag([1, 0, 0, 0]), atol=1e-9)


def test_qpt_characterization_poisson_over_seeds():
    fits = np.array(
        [run_qpt_characterization(ExperimentConfig(noise="poisson", acquisition_scale=5000, seed=s), 0.69).fitted_t_v
         for s in range(100)]
    )
    assert abs(fits.mean() - 0.69) <= 0.03
    assert fits.std(ddof=1) <= 0.03


def test_table1_rows():
    rows = run_table1()
    assert len(rows) == 6
    assert [r.family for r in rows] == ["phi"] * 3 + ["psi"] * 3
    r1 = rows[0]
    assert r1.model_distilled.eof == pytest.approx(0.63, abs=5e-3)
    assert r1.measured_distilled["eof"] == (0.60, 0.03)
    r6 = rows[5]
    assert r6.t_v == pytest.approx(0.36, abs=1e-12)
    assert r6.model_distilled.epsilon_exp == pytest.approx(1.0, abs=1e-12)
    assert r6.measured_distilled["eof"] == (0.38, 0.02)
    for r in rows:
        assert r.report.distilled.metrics.eof == pytest.approx(r.model_distilled.eof, abs=1e-9)
        assert r.model_distilled.lambda_exp == pytest.approx(r.lam, abs=1e-9)


def test_table1_locc_average():
    for r in run_table1():
        assert r.report.success_prob * r.report.distilled.metrics.eof <= r.report.initial.metrics.eof + 0.02


def test_measured_table_shape():
    assert len(MEASURED_TABLE) == 6
    assert MEASURED_TABLE[3][0] == "psi" and MEASURED_TABLE[3][1] == (0.61, 0.01)


def test_zero_lambda_row_reaches_unit_fidelity():
    for eps in (0.3, 0.59):
        rep = run_distill(ExperimentConfig(epsilon=eps, t_v=eps**2))
        assert rep.distilled.metrics.fidelity_bell == pytest.approx(1.0, abs=1e-9)
