import numpy as np
import pytest

from tbsc import build_tbsc, feasibility
from tbsc.errors import ConstructionInvalidError, InadmissibleScheduleError, RelayCausalityError
from tbsc.relay import Relay, relay_lag, simulate_network, worst_case_delays
from tbsc.streaming import Encoder, ErasureSchedule


def sched(code, erased=()):
    return ErasureSchedule.for_code(code, erased)


def feasible_grid(bmax, tmax):
    for b1 in range(1, bmax + 1):
        for b2 in range(1, bmax + 1):
            for T in range(b1 + b2, tmax + 1):
                if feasibility(b1, b2, T).feasible:
                    yield b1, b2, T


def test_relay_lag_examples():
    assert [relay_lag(i, 5, 3) for i in range(1, 6)] == [2, 2, 1, 1, 1]
    assert [relay_lag(i, 3, 2) for i in range(1, 4)] == [2, 1, 1]
    assert all(relay_lag(k, k, b2) == 1 for k in range(1, 9) for b2 in range(1, 5))
    with pytest.raises(ValueError):
        relay_lag(0, 3, 2)


def test_worked_example_lag_table(example_spec):
    assert example_spec.lags == (4, 4, 2, 2, 2)


def test_lag_table_matches_closed_form_when_b1_le_b2():
    for b1, b2, T in feasible_grid(6, 30):
        spec = build_tbsc(b1, b2, T)
        if b1 <= b2:
            k = spec.k
            assert spec.lags == tuple(relay_lag(i, k, b2) * b1 for i in range(1, k + 1)), (b1, b2, T)


def relay_outputs(spec, messages):
    enc, relay = Encoder(spec.sr), Relay(spec)
    out = []
    for m in messages:
        msg = int("".join(map(str, m[::-1])), 2)
        r = relay.step((msg, enc.push_int(msg)))
        out.append([(r >> i) & 1 for i in range(spec.k)])
    return np.array(out)


def test_relay_emit_zero_stream(example_spec):
    assert not relay_outputs(example_spec, np.zeros((10, 5), dtype=int)).any()


def test_relay_emit_one_hot(example_spec):
    msgs = np.zeros((7, 5), dtype=int)
    msgs[0, 0] = 1
    r = relay_outputs(example_spec, msgs)
    # R_5[t] = S_1[t - 2]
    assert r[2, 4] == 1
    assert r.sum() == 1


def test_relay_emit_is_reversed_and_delayed(example_spec):
    rng = np.random.default_rng(5)
    msgs = rng.integers(0, 2, (20, 5))
    r = relay_outputs(example_spec, msgs)
    k = 5
    for t in range(20):
        for i in range(1, k + 1):
            s = t - example_spec.lags[i - 1]
            assert r[t, i - 1] == (msgs[s, k - i] if s >= 0 else 0)


def test_relay_causality_violation(example_spec):
    relay = Relay(example_spec)
    # erase more than the code can handle and keep going
    with pytest.raises(RelayCausalityError):
        for t in range(12):
            relay.step(None if t < 4 else (0, 0))


def test_simulate_no_erasures(example_spec):
    rep = simulate_network(example_spec)
    assert rep.success
    assert rep.max_delay == tuple(example_spec.lags[::-1])
    assert all(d <= 7 for d in rep.max_delay)


def test_simulate_worked_example_alignment(example_spec):
    rep = simulate_network(example_spec, sched(example_spec.sr, {0, 1}), sched(example_spec.rd, {4, 5, 6}))
    assert rep.success
    assert rep.max_delay == (7, 7, 7, 7, 7)
    for j in range(5):
        for t in (0, 1):
            lag = example_spec.d_sr[j + 1]
            if 4 <= t + lag <= 6:
                assert rep.destination_time[t, j] - t == 7


def test_simulate_rejects_inadmissible(example_spec):
    with pytest.raises(InadmissibleScheduleError):
        simulate_network(example_spec, sched(example_spec.sr, {0, 1, 2}))
    with pytest.raises(InadmissibleScheduleError):
        simulate_network(example_spec, rd_sched=sched(example_spec.rd, {0, 1, 2, 5}))


def test_simulate_trace(example_spec):
    rep = simulate_network(example_spec, sched(example_spec.sr, {3}), horizon=12, trace=True)
    lines = rep.trace.splitlines()
    assert len(lines) >= 12
    assert any("ERASED" in ln for ln in lines)


def test_report_dicts(example_spec):
    rep = simulate_network(example_spec, horizon=16)
    assert rep.destination_times[(0, 1)] == example_spec.d_sr[1]
    assert rep.relay_times[(3, 2)] == 3


@pytest.mark.parametrize(
    "args, expected",
    [((2, 3, 7), (7, 7, 7, 7, 7)), ((1, 2, 4), (4, 4, 4))],
)
def test_worst_case_examples(args, expected):
    assert tuple(worst_case_delays(build_tbsc(*args))) == expected


@pytest.mark.parametrize("args", [(2, 3, 5), (3, 2, 8)])
def test_worst_case_within_deadline(args):
    spec = build_tbsc(*args)
    assert max(worst_case_delays(spec)) <= spec.T


def test_sum_decomposition():
    for b1, b2, T in feasible_grid(4, 14):
        spec = build_tbsc(b1, b2, T)
        assert worst_case_delays(spec) == spec.predicted_end_to_end(), (b1, b2, T)


def test_factorized_scan_matches_literal_pairs():
    spec = build_tbsc(1, 2, 4)
    worst = np.zeros(spec.k, dtype=int)
    for s in range(10):
        for r in range(10):
            rep = simulate_network(
                spec, sched(spec.sr, range(s, s + 1)), sched(spec.rd, range(r, r + 2)), horizon=20, seed=3
            )
            assert rep.success
            worst = np.maximum(worst, rep.max_delay)
    assert tuple(worst) == tuple(worst_case_delays(spec, positions=range(10), horizon=20, seed=3))


def test_broken_relay_code_is_caught(example_spec):
    p4 = example_spec.sr.block(4)
    broken = example_spec.with_sr(example_spec.sr.with_block(4, p4 + p4))
    with pytest.raises(ConstructionInvalidError):
        worst_case_delays(broken)
    rep = simulate_network(broken, sched(broken.sr, {0, 1}), strict=False)
    assert not rep.success and rep.failures


def test_rate_preserved():
    for b1, b2, T in feasible_grid(4, 14):
        spec = build_tbsc(b1, b2, T)
        assert spec.sr.k == spec.rd.k and spec.sr.n == spec.rd.n
