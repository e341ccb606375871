import pytest
from hypothesis import given, settings, strategies as st

from oppccn.config import ConfigError, ScenarioConfig, dump_config, load_config, parse_config


def test_preset_a():
    cfg = load_config("scenario_a")
    assert (cfg.n_nodes, cfg.tx_range, cfg.n_producers, cfg.n_content_types,
            cfg.chunks_per_type) == (10, 20.0, 4, 10, 25)
    assert cfg.n_communities == 1 and cfg.inter_request == "geometric"
    assert cfg.inter_request_mean == 10000.0
    assert (cfg.warmup_end_s, cfg.request_end_s, cfg.duration) == (43200.0, 79200.0, 86400.0)


def test_preset_b():
    cfg = load_config("scenario_b")
    assert (cfg.n_nodes, cfg.n_communities, cfg.n_travellers, cfg.tx_range) == (30, 3, 3, 5.0)
    assert cfg.requests_per_consumer == 40
    assert (cfg.inter_request, cfg.inter_request_mean) == ("exponential", 1000.0)
    roles = cfg.roles()
    assert roles.producers == [0, 10, 20] and roles.consumers == [1, 11, 21]


def test_errors_name_the_key():
    with pytest.raises(ConfigError) as e:
        parse_config("n_consumers = 20\nn_nodes = 10\n")
    assert e.value.key == "n_consumers"
    with pytest.raises(ConfigError) as e:
        parse_config("colour = blue\n")
    assert e.value.key == "colour"
    with pytest.raises(ConfigError) as e:
        parse_config("tx_range = wide\n")
    assert e.value.key == "tx_range"
    with pytest.raises(ConfigError) as e:
        parse_config("request_end_s = 90000\n")
    assert e.value.key == "request_end_s"
    with pytest.raises(ConfigError):
        parse_config("just words\n")
    with pytest.raises(ConfigError):
        load_config("scenario_a").with_(protocol="flood")


def test_protocol_labels():
    cfg = load_config("scenario_a")
    assert cfg.with_(protocol="mobccn", retransmission=False).protocol_label() == "mobccn_noretrans"
    assert cfg.with_(protocol="epi1copy_noretrans").retrans_effective() is False
    assert cfg.with_(protocol="epidemic_ideal").protocol_label() == "epidemic_ideal"


@pytest.mark.parametrize("preset", ["scenario_a", "scenario_b"])
def test_round_trip_presets(preset):
    cfg = load_config(preset)
    assert parse_config(dump_config(cfg)) == cfg


@settings(max_examples=30, deadline=None)
@given(st.floats(1.0, 100.0), st.integers(2, 9), st.booleans(), st.sampled_from(
    ["mobccn", "mobccn_noretrans", "epidemic_ideal", "epi1copy", "epi1copy_noretrans"]),
    st.one_of(st.none(), st.floats(0.0, 1.0)))
def test_round_trip_random(tx, thr, cache, proto, frac):
    base = ScenarioConfig(n_nodes=30, n_communities=3, n_travellers=3, n_producers=3,
                          n_consumers=3)
    cfg = base.with_(tx_range=tx, retransmission_threshold=thr, caching=cache, protocol=proto,
                     home_fraction=frac)
    assert parse_config(dump_config(cfg)) == cfg
