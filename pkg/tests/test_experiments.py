import json

import numpy as np
import pytest

from isofield.config import ExperimentConfig
from isofield.errors import DomainError
from isofield.experiments import (
    CALIBRATED_N,
    DEFAULT_CONFIG_NAMES,
    default_config,
    pilot,
    rejection_rate,
    resolve_rotation,
    run_experiment,
    run_many,
)


def small(name, **kw):
    kw.setdefault("n", 120)
    return default_config(name, **kw)


# -- config ------------------------------------------------------------------------

def test_unknown_keys_rejected():
    with pytest.raises(DomainError, match="unknown config keys"):
        ExperimentConfig.from_dict({"lmax": 2, "colour": "red"})


@pytest.mark.parametrize("bad", [
    {"law": "Bogus"}, {"space": "plane"}, {"experiment": "x"}, {"n_perm": 10}, {"alpha": 1.5},
    {"lmax": -1}, {"n": 5}, {"orders": [2, 1]}, {"orders": [0, 5]}, {"rotation": [1, 2]},
    {"spectrum": [1.0]}, {"spectrum": {"amp": 1}}, {"selection": [[1, 2]]}, {"n_runs": 0},
    {"rotation": [0.0, 9.0, 0.0]}, {"lmax": True},
])
def test_validation_errors(bad):
    with pytest.raises(DomainError):
        ExperimentConfig(**bad)


def test_config_json_and_hash():
    cfg = ExperimentConfig(lmax=3, seed=5, spectrum={"amplitude": 2.0, "slope": 1.0})
    back = ExperimentConfig.from_json(json.dumps(cfg.to_dict()))
    assert back == cfg and back.config_hash() == cfg.config_hash()
    assert cfg.with_seed(6).config_hash() != cfg.config_hash()
    # the output path is not part of the experiment identity
    assert ExperimentConfig(output="x").config_hash() == ExperimentConfig(output="y").config_hash()
    with pytest.raises(DomainError):
        ExperimentConfig.from_json("[1, 2]")
    with pytest.raises(DomainError):
        ExperimentConfig.from_json("{not json")


def test_power_law_spectrum_view():
    cfg = ExperimentConfig(lmax=3, spectrum={"amplitude": 2.0, "slope": 1.0})
    np.testing.assert_allclose(cfg.spectrum_obj().as_array(), 2.0 / np.arange(1, 5))


def test_default_configs_are_valid():
    for name in DEFAULT_CONFIG_NAMES:
        default_config(name)
    with pytest.raises(DomainError):
        default_config("nope")
    assert default_config("independence_sphere_fmp").n == CALIBRATED_N["independence_sphere_fmp"]


# -- experiments ---------------------------------------------------------------------

def test_resolve_rotation_search_records_witness():
    g, rep = resolve_rotation(small("independence_sphere_fmp"))
    assert rep.witness == g and rep.min_gap > 1e-9


@pytest.mark.parametrize("name", DEFAULT_CONFIG_NAMES)
def test_every_default_experiment_runs(name):
    rep = run_experiment(small(name))
    assert 0.0 < rep.p_value <= 1.0
    assert rep.metadata["config_hash"] == small(name).config_hash()


def test_independence_experiment_pair_sweep_is_bonferroni():
    rep = run_experiment(small("independence_sphere_fmp", orders=None))
    pvals = rep.metadata["pair_p_values"]
    assert len(pvals) == 3
    assert rep.p_value == pytest.approx(min(1.0, 3 * min(pvals)))


def test_nonwitness_rotation_is_flagged():
    rep = run_experiment(small("independence_sphere_fmp", rotation=[0.0, 0.0, 0.0]))
    assert "warning" in rep.metadata


def test_fmp_dependence_is_detected_at_calibrated_n():
    reps = run_many(default_config("independence_sphere_fmp"), 5)
    assert rejection_rate(reps) >= 0.8


def test_gaussianity_rejects_rademacher():
    assert run_experiment(default_config("gaussianity_rademacher")).reject


def test_gaussianity_validation():
    with pytest.raises(DomainError):
        run_experiment(small("gaussianity_gaussian", selection=[]))
    with pytest.raises(DomainError):
        run_experiment(small("gaussianity_gaussian", selection=[[0, 0]]))  # monopole is zero


def test_run_many_is_seed_ordered_and_parallel_safe():
    cfg = small("invariance_torus_fmp", n=60)
    serial = run_many(cfg, 3)
    assert [r.seed for r in serial] == [0, 1, 2]
    parallel = run_many(cfg, 3, jobs=2)
    assert [r.to_dict() for r in serial] == [r.to_dict() for r in parallel]


def test_pilot_stops_at_target():
    res = pilot(default_config("independence_sphere_fmp"), grid=(25, 400, 800), n_runs=5)
    assert res["calibrated_n"] == 400
    assert [r["n"] for r in res["rows"]] == [25, 400]
