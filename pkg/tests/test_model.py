import json
import math

import numpy as np
import pytest

from ccpart.model import (
    ModelError,
    ProblemSpec,
    gen_block_example,
    gen_formation,
    gen_production,
    gen_prop3,
    generate,
    load_problem,
    parse_gen_spec,
    problem_from_dict,
    save_problem,
    to_json,
)
from ccpart.partition import CostMetric
from ccpart.rank import RankOracle, support_proxy_rank
from ccpart.setfn import IndexSet

ALL = [
    gen_block_example(10, 20, 10, seed=1),
    gen_prop3(3),
    gen_production(4, 6, seed=2),
    gen_formation(2, 3, seed=3),
    gen_formation(3, 2, seed=4),
]


def test_block_structure():
    spec = gen_block_example(10, 20, 10, seed=0)
    rows = spec.row_structures()
    assert CostMetric.from_rows("nnz", rows)(IndexSet.range(0, 10)) == 110
    assert support_proxy_rank(rows, IndexSet.range(0, 9), spec.n) == 10
    assert support_proxy_rank(rows, IndexSet.of([9]), spec.n) == 20


def test_prop3_shape():
    spec = gen_prop3(4)
    assert (spec.r, spec.n) == (17, 4)
    assert spec.generator["family"] == "prop3"
    assert support_proxy_rank(spec.row_structures(), IndexSet.range(0, 16), spec.n) == 1


def test_production_shape_and_ranks():
    m, machines = 10, 20
    spec = gen_production(m, machines, seed=0)
    assert spec.r == machines + 1
    rows = spec.row_structures()
    cap = [j for j, row in enumerate(spec.rows) if row.label == "capacity"]
    assert len(cap) == machines
    assert support_proxy_rank(rows, IndexSet.of(cap), spec.n) == m
    assert support_proxy_rank(rows, IndexSet.of([j for j in range(spec.r) if j not in cap]), spec.n) == 2 * m + 1
    sampled = RankOracle("sampled_linear", spec.n, spec.r, sampler=spec.coefficient_sampler())
    assert sampled.rank(IndexSet.of(cap)) == m


def test_formation_sizes():
    spec = gen_formation(2, 5, seed=0)
    assert spec.r == 16 + 40 and spec.config_count == 2 and spec.b == 4
    assert len(spec.feasible_configurations()) == spec.config_count
    three = gen_formation(3, 2, seed=0)
    assert len(three.feasible_configurations()) == three.config_count == 6
    with pytest.raises(ModelError):
        gen_formation(5, 20, seed=0)


@pytest.mark.parametrize("spec", ALL, ids=lambda s: s.generator["family"])
def test_round_trip(spec, tmp_path):
    path = tmp_path / "p.json"
    save_problem(spec, path)
    again = load_problem(path)
    assert again == spec
    assert again.to_json() == spec.to_json()


@pytest.mark.parametrize("family,params", [
    ("block", dict(m=3, n=5, r=4)),
    ("production", dict(m=3, machines=4)),
    ("formation", dict(agents=2, horizon=2)),
])
def test_generators_deterministic(family, params):
    assert generate(family, seed=7, **params).to_json() == generate(family, seed=7, **params).to_json()


def test_samples_stay_in_support():
    for spec in ALL:
        W = spec.sample_w(np.random.default_rng(0), 2000)
        for k, d in enumerate(spec.uncertainty):
            assert d.low <= W[:, k].min() and W[:, k].max() <= d.high
            if d.name == "discrete_uniform":
                assert np.all(W[:, k] == np.round(W[:, k]))


def test_instantiate_matches_affine_form():
    spec = gen_production(3, 4, seed=1)
    rng = np.random.default_rng(3)
    W = spec.sample_w(rng, 5)
    x = rng.normal(size=spec.n)
    A, c = spec.instantiate(range(spec.r), W)
    alpha, B = spec.affine_in_w(x)
    direct = A @ x + c
    via = alpha[None, :] + np.asarray(B @ W.T).T
    assert np.allclose(direct, via, rtol=1e-12, atol=1e-12)


def test_schema_missing_rows():
    doc = json.loads(ALL[0].to_json())
    del doc["rows"]
    with pytest.raises(ModelError, match="rows"):
        problem_from_dict(doc)


def test_schema_unknown_distribution_lists_supported():
    doc = json.loads(ALL[2].to_json())
    doc["uncertainty"][0]["name"] = "gauss"
    with pytest.raises(ModelError, match="uniform.*discrete_uniform"):
        problem_from_dict(doc)


def test_semantic_validation():
    doc = json.loads(ALL[0].to_json())
    doc["rows"][0]["id"] = 5
    with pytest.raises(ModelError):
        problem_from_dict(doc)
    doc = json.loads(ALL[0].to_json())
    doc["config_count"] = 2
    with pytest.raises(ModelError):
        problem_from_dict(doc)


def test_bad_json(tmp_path):
    p = tmp_path / "x.json"
    p.write_text("{", encoding="utf-8")
    with pytest.raises(ModelError, match="not valid JSON"):
        load_problem(p)


def test_parse_gen_spec():
    assert parse_gen_spec("block:m=10,n=20,r=10") == ("block", {"m": 10, "n": 20, "r": 10})
    assert parse_gen_spec("production:m=2,machines=3,seed=4,epsilon=0.2")[1]["epsilon"] == 0.2
    for bad in ["nope:m=1", "block:m=1,n=2", "block:m=1,n=2,r=3,q=4", "block:m=x,n=2,r=3", "block:m"]:
        with pytest.raises(ModelError):
            parse_gen_spec(bad)


def test_to_json_floats():
    assert to_json({"a": 0.1, "b": math.inf, "c": [1, 2.5]}) == '{"a":0.10000000000000001,"b":null,"c":[1,2.5]}'
