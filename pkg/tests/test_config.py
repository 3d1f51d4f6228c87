import json

import pytest
from hypothesis import given, strategies as st

from qobsent.config import RunConfig, from_dict, parse_config
from qobsent.errors import ConfigError

MINIMAL = '{"experiment": "quench", "model": {"L": 16, "N": 4}}'


def test_minimal_quench_gets_defaults():
    cfg = parse_config(MINIMAL)
    m = cfg.model
    assert (m.t, m.V, m.tp, m.Vp, m.density_shift) == (1.0, 1.0, 0.96, 0.96, True)
    assert cfg.quench.beta == 1.0 and cfg.quench.quench_time == 30.0
    assert (cfg.bins, cfg.blocks, cfg.seed) == (4, 4, 0)
    assert cfg.entropy_kinds == ("S_xE", "S_FOE", "S_diag", "S_VN_half")


def test_experiment_from_command():
    cfg = parse_config('{"model": {"L": 8, "N": 2}}', "sweep")
    assert cfg.experiment == "sweep"
    with pytest.raises(ConfigError, match="experiment"):
        parse_config(MINIMAL, "sweep")
    with pytest.raises(ConfigError, match="experiment"):
        parse_config('{"model": {"L": 8, "N": 2}}')


@pytest.mark.parametrize("doc,needle", [
    ('{"experiment": "quench", "model": {"L": 16, "N": 4}, "bins": 3}', "bins"),
    ('{"experiment": "quench", "model": {"L": 16, "N": 4}, "blocks": 5}', "blocks"),
    ('{"experiment": "quench", "model": {"L": 16, "N": 4}, "gamma": 1}', "gamma"),
    ('{"experiment": "quench", "model": {"L": 16, "N": 4, "gamma": 1}}', "model.gamma"),
    ('{"experiment": "quench", "model": {"L": 16, "N": 4}, "quench": {"bogus": 1}}', "quench.bogus"),
    ('{"experiment": "quench", "model": {"N": 4}}', "model.L"),
    ('{"experiment": "quench"}', "model"),
    ('{"experiment": "quench", "model": {"L": 16, "N": 20}}', "model.N"),
    ('{"experiment": "quench", "model": {"L": "16", "N": 4}}', "model.L"),
    ('{"experiment": "quench", "model": {"L": 16, "N": 4, "t": null}}', "model.t"),
    ('{"experiment": "quench", "model": {"L": 16, "N": 4}, "entropies": ["S_DOS"]}', "entropies"),
    ('{"experiment": "fly", "model": {"L": 16, "N": 4}}', "experiment"),
    ('{"experiment": "sweep", "model": {"L": 16, "N": 4}, "sweep": {"kinds": ["hot"]}}', "sweep.kinds"),
    ('{"experiment": "quench", "model": {"L": 16, "N": 4}, "quench": {"pre_L": 2}}', "quench.pre_L"),
    ('{"experiment": "quench", "model": {"L": 16, "N": 4}, "quench": {"canonical_beta": "x"}}', "canonical_beta"),
    ('[1, 2]', "object"),
])
def test_rejections_name_the_problem(doc, needle):
    with pytest.raises(ConfigError, match=needle.replace(".", r"\.")):
        parse_config(doc)


def test_malformed_json_reports_line():
    with pytest.raises(ConfigError, match="line 3"):
        parse_config('{\n "model": {"L": 16,\n  "N": 4,}\n}')


def test_bool_is_not_an_integer():
    with pytest.raises(ConfigError, match="seed"):
        parse_config('{"experiment": "quench", "model": {"L": 16, "N": 4}, "seed": true}')


@given(
    st.sampled_from([(8, 2), (12, 3), (16, 4)]),
    st.sampled_from(["quench", "sweep", "compute"]),
    st.integers(0, 10**6),
    st.floats(-3, 3, allow_nan=False),
    st.booleans(),
)
def test_round_trip(LN, experiment, seed, tp, shift):
    L, N = LN
    cfg = from_dict({
        "experiment": experiment, "seed": seed, "bins": 2, "blocks": L // 4,
        "model": {"L": L, "N": N, "tp": tp, "density_shift": shift},
        "quench": {"schedule": [0.0, 1.0, 2.5]}, "sweep": {"centers": [5, 9]},
    })
    again = parse_config(json.dumps(cfg.to_dict()))
    assert again == cfg
    assert parse_config(cfg.dumps()) == cfg
    assert isinstance(cfg, RunConfig)


def test_shipped_configs_parse():
    from pathlib import Path
    root = Path(__file__).resolve().parents[1] / "configs"
    names = sorted(p.name for p in root.glob("*.json"))
    assert names == ["compute.json", "quench.json", "sweep.json"]
    for path in root.glob("*.json"):
        assert parse_config(path.read_text()).experiment == path.stem
