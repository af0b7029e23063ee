import itertools

import pytest

from directlogic.actors import (
    ActorError, Cutoff, Event, EventLog, Fair, Message, Unfair, behavior,
    check_discreteness, count_go_deliveries, extract_orders, parse_seed_range,
    run_csp_contrast, run_unbounded, sweep,
)


def brute_closure(log):
    """Warshall over the union of activation and arrival edges."""
    ids = [e.id for e in log.events]
    rel = {(a, b) for a, b in log.activation_edges} | set(log.arrival_edges())
    for k in ids:
        for i in ids:
            if (i, k) in rel:
                for j in ids:
                    if (k, j) in rel:
                        rel.add((i, j))
    return frozenset(rel)


@pytest.mark.parametrize("seed", range(20))
def test_fair_run_terminates_and_count_matches_log(seed):
    o = run_unbounded(seed, Fair, 200)
    assert o.value is not Cutoff
    assert o.value == count_go_deliveries(o.log, "Counter", before_tag="stop")


def test_runs_are_reproducible():
    a = run_unbounded(11, Fair, 300)
    b = run_unbounded(11, Fair, 300)
    assert a.value == b.value and a.log.to_text() == b.log.to_text()
    c = run_csp_contrast(3, Unfair, 300)
    d = run_csp_contrast(3, Unfair, 300)
    assert c.value == d.value and c.log.to_text() == d.log.to_text()


def test_fair_outcomes_grow_with_budget():
    small = sweep(range(300), Fair, 100)
    large = sweep(range(300), Fair, 200)
    assert small.cutoffs == large.cutoffs == 0
    assert large.max_value > small.max_value
    assert large.distinct > small.distinct


def test_unfair_stop_starvation_cuts_off():
    outcomes = [run_unbounded(s, Unfair, 200) for s in range(40)]
    starved = [o for o in outcomes if o.cutoff]
    assert starved
    # the starved message is stop or the reply it triggers; either way the
    # driver never hears back
    for o in starved:
        assert all(e.actor != "Driver" for e in o.log.events)
    assert any(all(e.message.tag != "stop" for e in o.log.events) for o in starved)


def test_csp_fair_halts_and_recounts():
    for s in range(50):
        o = run_csp_contrast(s, Fair, 300)
        assert o.value is not Cutoff
        # every accepted go increments n, including the one answered with false
        assert o.value == count_go_deliveries(o.log, "Z")
        assert count_go_deliveries(o.log, "Z", before_tag="stop") == o.value - 1


def test_csp_unfair_can_fail_to_halt():
    assert any(run_csp_contrast(s, Unfair, 300).cutoff for s in range(40))


def test_combined_order_matches_brute_force():
    for seed in (0, 5, 9):
        log = run_unbounded(seed, Fair, 60).log
        log.validate()
        assert log.combined_order == brute_closure(log)
        orders = extract_orders(log)
        assert orders.activation <= orders.combined
        for rel in orders.arrival.values():
            assert rel <= orders.combined
        assert all(a != b for a, b in orders.combined)


def test_counter_arrival_chain_is_total():
    log = run_unbounded(7, Fair, 120).log
    chain = log.arrival_chains["Counter#1"]
    for a, b in itertools.combinations(chain, 2):
        assert log.precedes(a, b)


def test_discreteness_reports():
    log = run_unbounded(2, Fair, 120).log
    first, last = log.events[0].id, log.events[-1].id
    r = check_discreteness(log, first, last)
    assert r.finite
    assert r.combined == log.between(first, last)
    assert r.sizes["combined"] == len(r.combined)
    assert check_discreteness(log, first, first).combined == frozenset()
    with pytest.raises(ActorError):
        check_discreteness(log, first, 10 ** 6)


def test_between_set_matches_brute_force():
    log = run_unbounded(4, Fair, 80).log
    rel = brute_closure(log)
    ids = [e.id for e in log.events]
    for e1 in ids[:5]:
        for e2 in ids[-5:]:
            expect = {e for e in ids if (e1, e) in rel and (e, e2) in rel}
            assert log.between(e1, e2) == expect


def test_large_adversarial_log():
    n = 10_000
    events = [Event(i, f"A{i % 3}", Message("go"), i - 1 if i else None, i // 3)
              for i in range(n)]
    log = EventLog(events)
    r = check_discreteness(log, 0, n - 1)
    assert len(r.combined) == n - 2


def test_log_text_round_trip():
    log = run_csp_contrast(1, Fair, 100).log
    again = EventLog.from_text(log.to_text())
    assert again.to_text() == log.to_text()
    assert [e.message for e in again.events] == [
        Message(e.message.tag, e.message.payload) for e in log.events]


def test_malformed_log_line():
    with pytest.raises(ActorError):
        EventLog.from_text("event 0 A go\n")


def test_cycle_rejected():
    log = EventLog([Event(0, "A", Message("x"), 1, 0), Event(1, "B", Message("y"), 0, 0)])
    with pytest.raises(ActorError):
        log.validate()


def test_behavior_table_checked():
    with pytest.raises(ActorError):
        behavior("Bad", go=42)


def test_seed_range():
    assert list(parse_seed_range("3..5")) == [3, 4, 5]
    with pytest.raises(ActorError):
        parse_seed_range("5..3")


def test_histogram_rendering():
    h = sweep(range(5), Unfair, 50)
    text = h.to_text()
    assert text.startswith("program unbounded\nfairness unfair\n")
    assert h.runs == 5


def test_max_steps_must_be_positive():
    with pytest.raises(ActorError):
        run_unbounded(0, Fair, 0)


def test_parallel_sweep_matches_serial():
    assert sweep(range(40), Fair, 100, workers=2).counts == sweep(range(40), Fair, 100).counts
