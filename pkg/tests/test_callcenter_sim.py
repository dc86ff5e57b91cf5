"""Tests for the call-centre simulator, attribution and event classification."""
import pytest
from scipy.stats import binomtest

from src.callcenter_sim import (
    CallOutcome,
    DailyAggregate,
    Event,
    EventKind,
    NoSales,
    ShiftContext,
    SimConfig,
    Suggestion,
    aggregate_daily,
    aggregates_to_csv,
    attribute_sale,
    classify_event,
    events_to_csv,
    forbidden_event_counts,
    parse_events_csv,
    run_simulation,
    simulated_q,
)
from src.config import InvalidConfig
from src.empirics import compute_q, parse_table
from src.hna_core import Outcome

P, M = Outcome.PLUS, Outcome.MINUS

SHORT = SimConfig(days=3)


def absent_purchases(events):
    """Purchase events whose credited operator had no open shift."""
    on_shift, absent = set(), []
    for e in events:
        if e.kind is EventKind.SHIFT_START:
            on_shift.add(e.operator_id)
        elif e.kind is EventKind.SHIFT_END:
            on_shift.discard(e.operator_id)
        elif e.kind is EventKind.PURCHASE and e.operator_id not in on_shift:
            absent.append(e)
    return absent


def scripted_absent_sale_config():
    return SimConfig(
        days=1,
        dnd_break_rate=0.0,
        patience_mean_minutes=10_000.0,
        p_buy_immediate=0.0,
        p_defer=1.0,
        callback_delay_mean_hours=0.0,
        callback_delay_min_hours=1.0,
        p_buy_on_callback=1.0,
        p_new_service_on_callback=0.0,
    )


class TestAttributeSale:
    """Crediting sales to operators."""

    def test_original_service_on_callback_goes_to_first_operator(self):
        assert attribute_sale(Suggestion("S1", "A"), Suggestion("S1", "B")) == "A"

    def test_new_service_on_callback_goes_to_second_operator(self):
        assert attribute_sale(Suggestion("S1", "A"), Suggestion("S2", "B")) == "B"

    def test_first_call_purchase_goes_to_answering_operator(self):
        assert attribute_sale(Suggestion("S1", "A")) == "A"


class TestClassifyEvent:
    """Mapping finished calls onto the four events."""

    def test_abandoned_call(self):
        outcome = CallOutcome("c1", abandoned=True)
        result = classify_event(outcome, ShiftContext(None, on_shift=False, responding=False))
        assert (result.a1, result.a2) == (P, M)
        assert result.b1 is None and result.b2 is None

    def test_callback_purchase_by_off_shift_operator(self):
        outcome = CallOutcome("c1", abandoned=False, answering_operator="A", suggested_service="S1",
                              purchased=True, attributed_operator="A", purchase_time=70_000)
        result = classify_event(outcome, ShiftContext("A", on_shift=False, responding=False))
        assert result.a2 == P
        assert result.b2 == P

    def test_answered_without_purchase(self):
        outcome = CallOutcome("c1", abandoned=False, answering_operator="A", suggested_service="S1")
        result = classify_event(outcome, ShiftContext("A", on_shift=True, responding=True))
        assert result.as_tuple() == (-1, -1, 1, -1)

    def test_present_but_not_responding(self):
        outcome = CallOutcome("c1", abandoned=False, answering_operator="A")
        result = classify_event(outcome, ShiftContext("A", on_shift=True, responding=False))
        assert (result.b1, result.b2) == (M, M)

    def test_outcome_invariants(self):
        with pytest.raises(ValueError):
            CallOutcome("c1", abandoned=True, answering_operator="A")
        with pytest.raises(ValueError):
            CallOutcome("c1", abandoned=False, answering_operator="A", purchased=True)


class TestRunSimulation:
    """Event loop behavior on small runs."""

    @pytest.fixture(scope="class")
    def short_run(self):
        return run_simulation(SHORT)

    def test_no_arrivals_gives_zero_aggregates(self):
        config = SimConfig(days=7, arrival_rate_per_hour_working=0.0, arrival_rate_per_hour_holiday=0.0)
        result = run_simulation(config)
        assert len(result.daily) == 7
        assert all(a == DailyAggregate(date_index=a.date_index) for a in result.daily)

    def test_scripted_absent_sale(self):
        config = scripted_absent_sale_config()
        arrival = (config.shift_end - 10) * 60
        result = run_simulation(config, arrivals=[arrival])

        purchases = [e for e in result.events if e.kind is EventKind.PURCHASE]
        assert len(purchases) == 1
        sale = purchases[0]
        assert sale.operator_id == "op00"

        [day] = result.daily
        assert day.responded >= 1
        assert day.abandoned == 0
        assert day.absent_sales == sale.amount
        assert day.present_sales == 0
        assert simulated_q(result.daily) == 1.0

        [outcome] = result.outcomes
        assert outcome.attributed_operator == "op00"
        assert outcome.callback_operator != "op00"
        assignment = classify_event(outcome, result.contexts[outcome.call_id])
        assert assignment.as_tuple() == (-1, 1, -1, 1)

    def test_scripted_arrivals_outside_horizon(self):
        with pytest.raises(InvalidConfig):
            run_simulation(SimConfig(days=1), arrivals=[86_400])

    def test_invalid_config(self):
        with pytest.raises(InvalidConfig):
            run_simulation(SimConfig(p_buy_immediate=0.9, p_defer=0.5))

    def test_conservation(self, short_run):
        for day in short_run.daily:
            assert day.responded + day.abandoned == day.arrivals
        purchases = sum(e.amount for e in short_run.events if e.kind is EventKind.PURCHASE)
        assert purchases == sum(a.absent_sales + a.present_sales for a in short_run.daily)

    def test_calibrated_call_volume(self, short_run):
        first_calls = [e for e in short_run.events
                       if e.kind is EventKind.ARRIVAL and not e.call_id.endswith("r")]
        per_day = len(first_calls) / SHORT.days
        assert 1800 < per_day < 2400

    def test_structural_zeros(self, short_run):
        assert forbidden_event_counts(short_run.events) == {
            "abandoned_and_answered": 0,
            "off_shift_answers": 0,
            "unanswered_purchases": 0,
        }

    def test_event_fields(self, short_run):
        for e in short_run.events:
            if e.kind is EventKind.PURCHASE:
                assert e.operator_id is not None and e.amount >= 1
            if e.kind is EventKind.ABANDON:
                assert e.operator_id is None

    def test_events_in_time_order(self, short_run):
        times = [e.timestamp_s for e in short_run.events]
        assert times == sorted(times)

    def test_classification_agrees_with_aggregates(self, short_run):
        off_shift_sales = 0
        for outcome in short_run.outcomes:
            assignment = classify_event(outcome, short_run.contexts[outcome.call_id])
            if outcome.abandoned:
                assert assignment.a1 == P and assignment.b1 is None
            if assignment.a2 == P and assignment.b2 == P:
                off_shift_sales += 1
        assert off_shift_sales == len(absent_purchases(short_run.events))

    def test_responding_means_handling_the_purchasing_call(self, short_run):
        credited_to_first = 0
        for outcome in short_run.outcomes:
            if not outcome.purchased:
                continue
            handler = outcome.callback_operator or outcome.answering_operator
            context = short_run.contexts[outcome.call_id]
            assert context.responding == (outcome.attributed_operator == handler)
            if outcome.callback_operator and outcome.attributed_operator != outcome.callback_operator:
                credited_to_first += 1
                assert classify_event(outcome, context).b1 == M
        assert credited_to_first > 0

    def test_deterministic(self, short_run):
        again = run_simulation(SHORT)
        assert again.events == short_run.events
        assert aggregates_to_csv(again.daily) == aggregates_to_csv(short_run.daily)

    def test_seed_changes_output(self, short_run):
        other = run_simulation(SimConfig(days=3, seed=1))
        assert other.events != short_run.events

    def test_no_deferral_means_no_absent_sales(self):
        result = run_simulation(SimConfig(days=7, p_defer=0.0))
        assert all(a.absent_sales == 0 for a in result.daily)
        assert simulated_q(result.daily) == 0.0

    def test_progress_callback(self):
        seen = []
        run_simulation(SimConfig(days=2), progress=lambda done, total: seen.append((done, total)))
        assert seen[-1] == (2, 2)


class TestAggregation:
    """Daily aggregation and q."""

    def test_empty_log(self):
        assert aggregate_daily([]) == []

    def test_sales_booked_to_purchase_day(self):
        events = [
            Event(100, EventKind.SHIFT_START, operator_id="op00"),
            Event(200, EventKind.ARRIVAL, call_id="c000000"),
            Event(210, EventKind.ANSWER, call_id="c000000", operator_id="op00"),
            Event(300, EventKind.HANGUP, call_id="c000000", operator_id="op00"),
            Event(400, EventKind.SHIFT_END, operator_id="op00"),
            Event(86_500, EventKind.CALLBACK, call_id="c000000r"),
            Event(86_500, EventKind.ARRIVAL, call_id="c000000r"),
            Event(86_520, EventKind.ABANDON, call_id="c000000r"),
            Event(86_600, EventKind.PURCHASE, call_id="c000000r", operator_id="op00", amount=500),
        ]
        first, second = aggregate_daily(events)
        assert (first.responded, first.abandoned, first.absent_sales) == (1, 0, 0)
        assert (second.abandoned, second.absent_sales, second.present_sales) == (1, 500, 0)

    def test_simulated_q_published_totals(self):
        daily = [DailyAggregate(0, absent_sales=50373989, present_sales=1273102156)]
        assert simulated_q(daily) == pytest.approx(0.038062, abs=5e-7)

    def test_simulated_q_symmetry(self):
        assert simulated_q([DailyAggregate(0, absent_sales=7, present_sales=7)]) == 0.5

    def test_no_sales(self):
        with pytest.raises(NoSales):
            simulated_q([DailyAggregate(0, responded=10)])

    def test_forbidden_events_detected(self):
        events = [
            Event(0, EventKind.ARRIVAL, call_id="c1"),
            Event(5, EventKind.ANSWER, call_id="c1", operator_id="op00"),
            Event(6, EventKind.ABANDON, call_id="c1"),
            Event(7, EventKind.PURCHASE, call_id="c2", operator_id="op00", amount=1),
        ]
        assert forbidden_event_counts(events) == {
            "abandoned_and_answered": 1,
            "off_shift_answers": 1,
            "unanswered_purchases": 1,
        }

    def test_event_log_csv(self):
        result = run_simulation(SimConfig(days=1))
        text = events_to_csv(result.events)
        assert text.splitlines()[0] == "timestamp_s,kind,call_id,operator_id,amount"
        assert parse_events_csv(text) == result.events

    def test_aggregate_csv_format(self):
        text = aggregates_to_csv([DailyAggregate(0, 3, 1, 10, 20), DailyAggregate(1)])
        assert text == "day,responded,abandoned,absent_sales,present_sales\n0,3,1,10,20\n1,0,0,0,0\n"


@pytest.mark.slow
class TestAcceptance:
    """Full-length runs at the default configuration."""

    @pytest.fixture(scope="class")
    def runs(self):
        return {seed: run_simulation(SimConfig(seed=seed)) for seed in range(10)}

    def test_structural_zeros_every_seed(self, runs):
        for seed, result in runs.items():
            assert sum(forbidden_event_counts(result.events).values()) == 0, f"seed {seed}"

    def test_positive_q_every_seed(self, runs):
        for seed, result in runs.items():
            assert 0.0 < simulated_q(result.daily) < 1.0, f"seed {seed}"

    def test_rerun_is_byte_identical(self, runs):
        again = run_simulation(SimConfig(seed=0))
        assert events_to_csv(again.events) == events_to_csv(runs[0].events)
        assert aggregates_to_csv(again.daily) == aggregates_to_csv(runs[0].daily)

    def test_no_deferral_forces_zero(self):
        assert simulated_q(run_simulation(SimConfig(p_defer=0.0)).daily) == 0.0

    def test_cross_module_agreement(self, runs):
        for seed in range(5):
            daily = runs[seed].daily
            ds = parse_table(aggregates_to_csv(daily))
            assert abs(compute_q(ds) - simulated_q(daily)) <= 1e-12

    def test_more_deferral_means_more_callbacks(self):
        def callbacks(seed, p_defer):
            events = run_simulation(SimConfig(days=1, seed=seed, p_defer=p_defer)).events
            return sum(e.kind is EventKind.CALLBACK for e in events)

        pairs = [(callbacks(s, 0.05), callbacks(s, 0.2)) for s in range(30)]
        wins = sum(high > low for low, high in pairs)
        losses = sum(high < low for low, high in pairs)
        assert losses == 0
        assert binomtest(wins, wins + losses, 0.5, alternative="greater").pvalue < 0.01
