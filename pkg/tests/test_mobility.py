import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy import stats

from oppccn.mobility import (DOWN, UP, ContactTrace, MobilityConfig, TraceError, cell_bounds,
                             community_of, contacts_from_positions, generate_positions,
                             generate_trace, inter_contact_times, read_trace, travellers,
                             write_trace)

SMALL = MobilityConfig(area_side=200.0, n_nodes=6, tx_range=20.0, duration=3600.0,
                       burn_in=600.0)


def test_positions_shape_and_bounds():
    pos = generate_positions(SMALL, np.random.default_rng(1))
    assert pos.shape == (3601, 6, 2)
    assert pos.min() >= 0 and pos.max() <= 200.0


def test_speed_within_range():
    pos = generate_positions(SMALL, np.random.default_rng(2))
    step = np.hypot(*np.moveaxis(np.diff(pos, axis=0), -1, 0))
    assert step.max() <= SMALL.speed_max + 1e-9


def test_communities_stay_home():
    cfg = MobilityConfig(n_nodes=12, n_communities=3, n_travellers=3, duration=3000.0,
                         burn_in=0.0)
    comm = community_of(cfg)
    assert comm == [0] * 4 + [1] * 4 + [2] * 4
    assert travellers(cfg) == [2, 6, 10]
    pos = generate_positions(cfg, np.random.default_rng(3))
    for k in range(12):
        if k in travellers(cfg):
            continue
        x0, y0, x1, y1 = cell_bounds(cfg, comm[k])
        assert (pos[:, k, 0] >= x0).all() and (pos[:, k, 0] <= x1).all()
        assert (pos[:, k, 1] >= y0).all() and (pos[:, k, 1] <= y1).all()
    assert cell_bounds(cfg, 3) == (500.0, 500.0, 1000.0, 1000.0)


def test_travellers_visit_foreign_cells():
    cfg = MobilityConfig(n_nodes=12, n_communities=3, n_travellers=3, duration=86400.0,
                         burn_in=0.0)
    pos = generate_positions(cfg, np.random.default_rng(4))
    x0, y0, x1, y1 = cell_bounds(cfg, 0)
    k = travellers(cfg)[0]
    outside = (pos[:, k, 0] > x1) | (pos[:, k, 1] > y1)
    assert outside.any()


def test_contacts_from_positions_hand_case():
    # two nodes approach, touch for 3 ticks, separate; a third stays away
    xs = [50, 30, 10, 0, 10, 30]
    pos = np.zeros((6, 3, 2))
    pos[:, 1, 0] = xs
    pos[:, 2, 0] = 500
    trace = contacts_from_positions(pos, tx_range=10.0)
    assert trace.events == [(2.0, 0, 1, UP), (5.0, 0, 1, DOWN)]
    assert trace.contacts() == [(0, 1, 2.0, 5.0)]


def test_open_contact_at_end_has_no_down():
    pos = np.zeros((3, 2, 2))
    trace = contacts_from_positions(pos, tx_range=1.0)
    assert trace.events == [(0.0, 0, 1, UP)]
    assert trace.contacts() == [(0, 1, 0.0, None)]


@settings(max_examples=20, deadline=None)
@given(st.integers(0, 10_000))
def test_trace_alternates(seed):
    trace = generate_trace(SMALL, np.random.default_rng(seed))
    trace.validate()
    state = {}
    for t, a, b, kind in trace.events:
        assert state.get((a, b), DOWN) != kind
        state[(a, b)] = kind


def test_validate_rejects_bad_traces():
    with pytest.raises(TraceError):
        ContactTrace(3, [(1.0, 0, 1, DOWN)]).validate()
    with pytest.raises(TraceError):
        ContactTrace(3, [(1.0, 0, 1, UP), (2.0, 0, 1, UP)]).validate()
    with pytest.raises(TraceError):
        ContactTrace(3, [(2.0, 0, 1, UP), (1.0, 0, 1, DOWN)]).validate()
    with pytest.raises(TraceError):
        ContactTrace(3, [(1.0, 0, 5, UP)]).validate()


def test_trace_file_round_trip(tmp_path):
    trace = generate_trace(SMALL, np.random.default_rng(5))
    path = tmp_path / "t.trace"
    write_trace(trace, path)
    back = read_trace(path)
    assert back.n_nodes == 6 and back.events == trace.events
    bad = tmp_path / "bad.trace"
    bad.write_text("no header\n")
    with pytest.raises(TraceError):
        read_trace(bad)
    bad.write_text("# oppnet-trace v1\n1.0\t0\t1\tSIDEWAYS\n")
    with pytest.raises(TraceError):
        read_trace(bad)


def test_config_validation():
    with pytest.raises(ValueError):
        MobilityConfig(n_communities=1, n_travellers=1).validate()
    with pytest.raises(ValueError):
        MobilityConfig(speed_min=2.0, speed_max=1.0).validate()
    with pytest.raises(ValueError):
        MobilityConfig(n_communities=5).validate()


def test_single_community_pairs_look_alike():
    """Pairs meet according to the same process: inter-contact samples of two
    halves of the pair set come from one distribution (coarse KS check)."""
    cfg = MobilityConfig(area_side=300.0, n_nodes=10, tx_range=20.0, duration=86400.0,
                         burn_in=7200.0)
    gaps = inter_contact_times(generate_trace(cfg, np.random.default_rng(11)))
    keys = sorted(gaps)
    assert len(keys) == 45 and all(len(gaps[k]) > 0 for k in keys)
    left = np.concatenate([gaps[k] for k in keys[0::2]])
    right = np.concatenate([gaps[k] for k in keys[1::2]])
    assert stats.ks_2samp(left, right).pvalue > 0.01
    means = np.array([np.mean(gaps[k]) for k in keys])
    assert np.isfinite(means).all()
