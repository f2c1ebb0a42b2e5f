import numpy as np
import pytest
from hypothesis import given, strategies as st
from scipy.special import kolmogorov
from scipy.stats import kstest

from spatial_unitroot import rng
from spatial_unitroot.errors import InvalidArgumentError
from spatial_unitroot.lattice import ModelParams
from spatial_unitroot.montecarlo import (
    StatSummary,
    StudyConfig,
    StudyReport,
    kolmogorov_sf,
    ks_normal_test,
    run_study,
    variance_convergence,
)


def _config(**kw):
    base = dict(n_list=(5, 8), M=30, params=ModelParams(0.5, 0.5), master_seed=11,
                statistics=("scaled_rho", "scaled_alpha", "scaled_beta", "s_sums"))
    base.update(kw)
    return StudyConfig(**base)


@given(st.floats(0.0, 4.0))
def test_kolmogorov_sf_matches_scipy(x):
    assert kolmogorov_sf(x) == pytest.approx(float(kolmogorov(x)), abs=1e-12)


def test_kolmogorov_sf_is_monotone():
    xs = np.linspace(0, 3, 301)
    p = np.array([kolmogorov_sf(x) for x in xs])
    assert p[0] == 1.0 and np.all(np.diff(p) <= 0)


def test_ks_point_mass():
    stat, p = ks_normal_test(np.zeros(1000), 1.0)
    assert stat == pytest.approx(0.5, abs=1e-12)
    assert p < 1e-100


def test_ks_statistic_matches_scipy():
    x = rng.standard_normal(4, 300) * 1.3
    stat, _ = ks_normal_test(x, 1.69)
    assert stat == pytest.approx(kstest(x, "norm", args=(0, 1.3)).statistic, rel=1e-12)


def test_ks_null_rarely_rejects():
    passes = sum(ks_normal_test(rng.standard_normal(seed, 1000), 1.0)[1] > 0.001 for seed in range(100))
    assert passes >= 99


def test_ks_detects_uniform_shape():
    k = np.arange(1000)
    u = rng.cell_noise(3, k, np.zeros_like(k), "uniform") / np.sqrt(3.0)
    _, p = ks_normal_test(u, 1.0 / 3.0)
    assert p < 0.01


def test_ks_rejects_bad_variance():
    with pytest.raises(InvalidArgumentError):
        ks_normal_test([0.1, 0.2], 0.0)


def test_study_is_deterministic():
    cfg = StudyConfig(n_list=(5,), M=2, params=ModelParams(0.5, 0.5), master_seed=1)
    assert run_study(cfg).to_json() == run_study(cfg).to_json()


def test_study_independent_of_worker_count():
    cfg = _config(M=60, keep_raw=True)
    one, three = run_study(cfg, workers=1), run_study(cfg, workers=3)
    assert one.to_json() == three.to_json()
    assert one.raw_csv() == three.raw_csv()


def test_report_contents():
    cfg = _config(keep_raw=True)
    rep = run_study(cfg)
    assert cfg.columns == ("scaled_rho", "scaled_alpha", "scaled_beta", "s1", "s2", "s3")
    assert rep.excluded == {5: 0, 8: 0}
    s = rep.summary(8, "scaled_rho")
    assert s.count == 30 and s.target_variance == pytest.approx(0.58749100, rel=1e-6)
    assert s.ks_p is None  # fewer than 100 replicates
    assert rep.summary(8, "s1").target_variance is None
    assert rep.correlation(8, "scaled_alpha", "scaled_alpha") == pytest.approx(1.0)
    lines = rep.raw_csv().splitlines()
    assert lines[0] == "n,replicate,statistic,value" and len(lines) == 1 + 2 * 30 * 6
    assert rep.to_csv().splitlines()[0].startswith("n,statistic,count,mean,variance")


def test_replicate_values_follow_from_seed():
    from spatial_unitroot.estimation import lse_canonical
    from spatial_unitroot.lattice import NoiseSpec, simulate_triangle

    cfg = _config(n_list=(6,), M=3, keep_raw=True)
    rep = run_study(cfg)
    fld = simulate_triangle(6, cfg.params, NoiseSpec("normal", rng.replicate_seed(11, 6, 2)))
    est = lse_canonical(fld, (1, 1))
    assert rep.raw[6]["scaled_rho"][2] == 6**1.25 * (est.rho_hat - 1.0)
    assert rep.raw[6]["scaled_alpha"][2] == 6 * (est.alpha_hat - 0.5)


def test_singular_replicates_are_excluded_and_counted():
    # on T_1 only one cell has nonzero regressors, so every fit is singular
    rep = run_study(_config(n_list=(1,), M=4))
    assert rep.excluded[1] == 4
    assert rep.summary(1, "scaled_rho").count == 0


@pytest.mark.parametrize(
    "kw",
    [dict(M=1), dict(n_list=()), dict(n_list=(0,)), dict(statistics=("nope",)),
     dict(params=ModelParams(0.7, 0.7)), dict(params=ModelParams(0.5, 0.0))],
)
def test_config_validation(kw):
    with pytest.raises(InvalidArgumentError):
        _config(**kw)


def _report_with_variances(variances, target):
    cfg = StudyConfig(n_list=tuple(range(10, 10 * len(variances) + 1, 10)), M=2, params=ModelParams(0.5, 0.5))
    sums = [StatSummary(n, "scaled_rho", 2, 0.0, v, target, None, None) for n, v in zip(cfg.n_list, variances)]
    return StudyReport(cfg, sums, {}, {})


def test_variance_convergence_exact_targets():
    rows, monotone = variance_convergence(_report_with_variances([0.5, 0.5, 0.5], 0.5), 0.5)
    assert [r.ratio for r in rows] == [1.0, 1.0, 1.0] and monotone


def test_variance_convergence_flags_non_monotone():
    rows, monotone = variance_convergence(_report_with_variances([1.4, 1.1, 1.2], 1.0), 1.0)
    assert [r.n for r in rows] == [10, 20, 30]
    assert not monotone
