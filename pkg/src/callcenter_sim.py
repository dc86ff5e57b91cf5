"""
Discrete-event simulator of the call-centre sales process.

Calls arrive as a thinned Poisson process during opening hours, wait in a FIFO
queue, and are answered by the longest-idle available operator or abandoned
when the caller's patience runs out. Answered callers buy immediately, defer
and call back later, or decline. Sales made on a callback are credited by
attribute_sale, and a sale counts as an absent-operator sale when the credited
operator is not within a shift at purchase time.

Time runs in whole seconds. Random draws come from independent substreams
(arrivals, patience, amounts, per-call decisions, one per operator) spawned
from a single root seed, and every per-call draw is indexed by the call's
arrival number, so changing a probability only changes the draws it governs.
"""
import heapq
import io
import math
from collections import deque
from dataclasses import dataclass, field
from enum import Enum
from typing import Callable

import numpy as np
import pandas as pd
from scipy.stats import truncnorm

from src.config import InvalidConfig, validate_sim_config
from src.hna_core import Outcome

SECONDS_PER_DAY = 24 * 60 * 60

AGGREGATE_COLUMNS = ["day", "responded", "abandoned", "absent_sales", "present_sales"]
EVENT_COLUMNS = ["timestamp_s", "kind", "call_id", "operator_id", "amount"]


class NoSales(ValueError):
    """No sales were recorded, so q is undefined."""


@dataclass(frozen=True)
class SimConfig:
    days: int = 61
    arrival_rate_per_hour_working: float = 150.0
    arrival_rate_per_hour_holiday: float = 90.0
    operators_working_day: int = 19
    operators_holiday: int = 13
    shift_start: int = 8 * 60
    shift_end: int = 16 * 60
    late_shift_offset_minutes: int = 6 * 60
    holiday_index: int = 4
    dnd_break_rate: float = 0.5
    dnd_break_mean_minutes: float = 5.0
    patience_mean_minutes: float = 1.5
    talk_time_mean_minutes: float = 2.5
    p_buy_immediate: float = 0.6
    p_defer: float = 0.12
    callback_delay_mean_hours: float = 4.0
    callback_delay_min_hours: float = 0.0
    p_buy_on_callback: float = 0.6
    p_new_service_on_callback: float = 0.2
    sale_amount_mean: float = 11000.0
    sale_amount_spread: float = 4000.0
    service_count: int = 12
    seed: int = 0

    @property
    def open_start_s(self) -> int:
        return self.shift_start * 60

    @property
    def open_end_s(self) -> int:
        return (self.shift_end + self.late_shift_offset_minutes) * 60

    @property
    def operator_pool(self) -> int:
        return max(self.operators_working_day, self.operators_holiday)

    def is_holiday(self, day: int) -> bool:
        return day % 7 == self.holiday_index

    def rostered(self, day: int) -> int:
        return self.operators_holiday if self.is_holiday(day) else self.operators_working_day

    def shift_window_s(self, operator_index: int) -> tuple[int, int]:
        """Within-day (start, end) seconds; even operators work early, odd late."""
        offset = 0 if operator_index % 2 == 0 else self.late_shift_offset_minutes
        return (self.shift_start + offset) * 60, (self.shift_end + offset) * 60


class EventKind(str, Enum):
    ARRIVAL = "ARRIVAL"
    ABANDON = "ABANDON"
    ANSWER = "ANSWER"
    HANGUP = "HANGUP"
    DND_ON = "DND_ON"
    DND_OFF = "DND_OFF"
    SHIFT_START = "SHIFT_START"
    SHIFT_END = "SHIFT_END"
    PURCHASE = "PURCHASE"
    CALLBACK = "CALLBACK"


@dataclass(frozen=True, slots=True)
class Event:
    timestamp_s: int
    kind: EventKind
    call_id: str | None = None
    operator_id: str | None = None
    amount: int | None = None

    @property
    def timestamp(self) -> float:
        """Minutes since simulation start."""
        return self.timestamp_s / 60

    @property
    def day(self) -> int:
        return self.timestamp_s // SECONDS_PER_DAY


@dataclass(frozen=True)
class CallOutcome:
    call_id: str
    abandoned: bool
    answering_operator: str | None = None
    suggested_service: str | None = None
    purchased: bool = False
    attributed_operator: str | None = None
    purchase_time: int | None = None
    callback_call_id: str | None = None
    callback_operator: str | None = None

    def __post_init__(self):
        if self.abandoned and (self.answering_operator is not None or self.purchased):
            raise ValueError(f"Abandoned call {self.call_id} cannot be answered or purchased")
        if self.purchased and self.attributed_operator is None:
            raise ValueError(f"Purchase on {self.call_id} has no attributed operator")


@dataclass(frozen=True)
class ShiftContext:
    """State of the reference operator at the reference time."""
    operator_id: str | None
    on_shift: bool
    responding: bool


@dataclass(frozen=True)
class EventAssignment:
    """Hardy event readings for one call; None means unmeasured."""
    a1: Outcome | None
    a2: Outcome | None
    b1: Outcome | None
    b2: Outcome | None

    def as_tuple(self) -> tuple:
        return tuple(None if v is None else int(v) for v in (self.a1, self.a2, self.b1, self.b2))


@dataclass(frozen=True)
class DailyAggregate:
    date_index: int
    responded: int = 0
    abandoned: int = 0
    absent_sales: int = 0
    present_sales: int = 0
    arrivals: int = 0


@dataclass(frozen=True)
class Suggestion:
    service_id: str
    operator_id: str


@dataclass
class SimulationResult:
    events: list[Event]
    daily: list[DailyAggregate]
    outcomes: list[CallOutcome] = field(default_factory=list)
    contexts: dict[str, ShiftContext] = field(default_factory=dict)

    def __iter__(self):
        yield self.events
        yield self.daily


# === SALE ATTRIBUTION AND CLASSIFICATION ===

def attribute_sale(first_suggestion: Suggestion, callback_purchase: Suggestion | None = None) -> str:
    """
    Operator credited with a sale.

    A purchase of the originally suggested service is credited to the first
    operator even when a second operator registers it; a service newly
    suggested on the callback is credited to the second operator.
    """
    if callback_purchase is None:
        return first_suggestion.operator_id
    if callback_purchase.service_id == first_suggestion.service_id:
        return first_suggestion.operator_id
    return callback_purchase.operator_id


def classify_event(outcome: CallOutcome, context: ShiftContext) -> EventAssignment:
    """
    Map a finished call onto the four Hardy events.

    a1 = +1 abandoned, -1 answered; a2 = +1 purchased, -1 otherwise;
    b1 = +1 while the reference operator is responding to this call, -1
    otherwise (a callback sale credited to the first operator reads -1);
    b2 = +1 when the reference operator is not within a shift.
    The reference operator is the attributed (else answering) operator, read
    at purchase time for purchases and at answer time otherwise.
    """
    a1 = Outcome.PLUS if outcome.abandoned else Outcome.MINUS
    a2 = Outcome.PLUS if outcome.purchased else Outcome.MINUS
    if context.operator_id is None:
        return EventAssignment(a1=a1, a2=a2, b1=None, b2=None)

    b1 = Outcome.PLUS if context.responding else Outcome.MINUS
    b2 = Outcome.MINUS if context.on_shift else Outcome.PLUS
    return EventAssignment(a1=a1, a2=a2, b1=b1, b2=b2)


# === ENGINE ===

# Same-second ordering: freed operators are handled before new work arrives.
_HANGUP, _SHIFT_OFF, _DND_END, _SHIFT_ON, _DND_REQ, _CALLBACK_DUE, _ARRIVE, _PATIENCE = range(8)


class _Operator:
    __slots__ = ("index", "id", "rng", "present", "leaving", "busy", "dnd", "dnd_pending",
                 "dnd_token", "shift_serial", "shift_end_s", "idle_since")

    def __init__(self, index: int, rng: np.random.Generator):
        self.index = index
        self.id = f"op{index:02d}"
        self.rng = rng
        self.present = False
        self.leaving = False
        self.busy = None
        self.dnd = False
        self.dnd_pending = False
        self.dnd_token = 0
        self.shift_serial = 0
        self.shift_end_s = 0
        self.idle_since = 0

    @property
    def available(self) -> bool:
        return self.present and not self.leaving and self.busy is None and not self.dnd


class _Call:
    __slots__ = ("id", "row", "is_callback", "arrival_s", "state")

    def __init__(self, call_id: str, row: int, is_callback: bool, arrival_s: int):
        self.id = call_id
        self.row = row
        self.is_callback = is_callback
        self.arrival_s = arrival_s
        self.state = "waiting"


class _CallCenter:
    def __init__(self, config: SimConfig, arrivals: list[int]):
        self.config = config
        self.horizon_s = config.days * SECONDS_PER_DAY
        self.arrivals = arrivals

        root = np.random.SeedSequence(config.seed)
        _, patience_seq, amounts_seq, calls_seq, operators_seq = root.spawn(5)
        n = len(arrivals)

        calls_rng = np.random.default_rng(calls_seq)
        self.u = calls_rng.random((n, 5))
        self.services = calls_rng.integers(0, config.service_count, size=(n, 2))
        self.patience_s = _seconds(np.random.default_rng(patience_seq).exponential(
            config.patience_mean_minutes * 60, size=(n, 2)))
        self.amounts = _sale_amounts(np.random.default_rng(amounts_seq).random((n, 2)), config)

        self.operators = [
            _Operator(k, np.random.default_rng(seq))
            for k, seq in enumerate(operators_seq.spawn(config.operator_pool))
        ]
        self.queue = deque()
        self.heap = []
        self.seq = 0
        self.events: list[Event] = []
        self.first_contact: dict[int, dict] = {}
        self.contexts: dict[str, ShiftContext] = {}

    # --- scheduling ---

    def push(self, t: int, priority: int, payload) -> None:
        self.seq += 1
        heapq.heappush(self.heap, (t, priority, self.seq, payload))

    def log(self, t: int, kind: EventKind, call_id=None, operator_id=None, amount=None) -> None:
        self.events.append(Event(t, kind, call_id, operator_id, amount))

    def run(self, progress: Callable[[int, int], None] | None = None) -> None:
        cfg = self.config
        for day in range(cfg.days):
            base = day * SECONDS_PER_DAY
            for op in self.operators[:cfg.rostered(day)]:
                start, end = cfg.shift_window_s(op.index)
                self.push(base + start, _SHIFT_ON, (op, base + end))
                self.push(base + end, _SHIFT_OFF, op)
        for row, t in enumerate(self.arrivals):
            self.push(t, _ARRIVE, _Call(f"c{row:06d}", row, False, t))

        handlers = {
            _HANGUP: self.on_hangup,
            _SHIFT_OFF: self.on_shift_off,
            _DND_END: self.on_dnd_end,
            _SHIFT_ON: self.on_shift_on,
            _DND_REQ: self.on_dnd_request,
            _CALLBACK_DUE: self.on_callback_due,
            _ARRIVE: self.on_arrival,
            _PATIENCE: self.on_patience,
        }
        day = 0
        while self.heap:
            t, priority, _, payload = heapq.heappop(self.heap)
            if progress and t // SECONDS_PER_DAY > day and day < cfg.days:
                day = min(t // SECONDS_PER_DAY, cfg.days)
                progress(day, cfg.days)
            handlers[priority](t, payload)
        if progress and day < cfg.days:
            progress(cfg.days, cfg.days)

    # --- operators ---

    def on_shift_on(self, t: int, payload) -> None:
        op, end_s = payload
        op.present, op.leaving, op.dnd, op.dnd_pending = True, False, False, False
        op.shift_serial += 1
        op.shift_end_s = end_s
        op.idle_since = t
        self.log(t, EventKind.SHIFT_START, operator_id=op.id)
        self.schedule_break(op, t)
        self.dispatch(t)

    def on_shift_off(self, t: int, op: _Operator) -> None:
        op.dnd_pending = False
        if op.busy is not None:
            op.leaving = True
            return
        self.leave(op, t)

    def leave(self, op: _Operator, t: int) -> None:
        if op.dnd:
            op.dnd = False
            op.dnd_token += 1
            self.log(t, EventKind.DND_OFF, operator_id=op.id)
        op.present = op.leaving = False
        self.log(t, EventKind.SHIFT_END, operator_id=op.id)

    def schedule_break(self, op: _Operator, t: int) -> None:
        rate = self.config.dnd_break_rate
        if rate <= 0:
            return
        due = t + max(1, int(round(op.rng.exponential(3600 / rate))))
        if due < op.shift_end_s:
            self.push(due, _DND_REQ, (op, op.shift_serial))

    def on_dnd_request(self, t: int, payload) -> None:
        op, serial = payload
        if not op.present or op.leaving or serial != op.shift_serial:
            return
        if op.busy is not None:
            op.dnd_pending = True
        else:
            self.start_break(op, t)

    def start_break(self, op: _Operator, t: int) -> None:
        op.dnd_pending = False
        op.dnd = True
        op.dnd_token += 1
        self.log(t, EventKind.DND_ON, operator_id=op.id)
        duration = max(1, int(round(op.rng.exponential(self.config.dnd_break_mean_minutes * 60))))
        self.push(t + duration, _DND_END, (op, op.dnd_token))

    def on_dnd_end(self, t: int, payload) -> None:
        op, token = payload
        if not op.dnd or token != op.dnd_token:
            return
        op.dnd = False
        op.idle_since = t
        self.log(t, EventKind.DND_OFF, operator_id=op.id)
        self.schedule_break(op, t)
        self.dispatch(t)

    # --- calls ---

    def on_arrival(self, t: int, call: _Call) -> None:
        self.log(t, EventKind.ARRIVAL, call_id=call.id)
        self.queue.append(call)
        patience = int(self.patience_s[call.row, 1 if call.is_callback else 0])
        self.push(t + patience, _PATIENCE, call)
        self.dispatch(t)

    def on_patience(self, t: int, call: _Call) -> None:
        if call.state != "waiting":
            return
        call.state = "abandoned"
        self.log(t, EventKind.ABANDON, call_id=call.id)
        if not call.is_callback:
            self.first_contact[call.row] = {"abandoned": True}
            self.contexts[call.id] = ShiftContext(operator_id=None, on_shift=False, responding=False)

    def dispatch(self, t: int) -> None:
        while self.queue:
            call = self.queue[0]
            if call.state != "waiting":
                self.queue.popleft()
                continue
            free = [op for op in self.operators if op.available]
            if not free:
                return
            self.queue.popleft()
            self.answer(call, min(free, key=lambda op: (op.idle_since, op.index)), t)

    def answer(self, call: _Call, op: _Operator, t: int) -> None:
        call.state = "answered"
        op.busy = call
        self.log(t, EventKind.ANSWER, call_id=call.id, operator_id=op.id)

        cfg = self.config
        if call.is_callback:
            talk_u = self.u[call.row, 4]
            record = self.first_contact[call.row]
            record["callback_operator"] = op.id
        else:
            talk_u = self.u[call.row, 1]
            self.first_contact[call.row] = {
                "abandoned": False,
                "answering_operator": op.id,
                "suggested_service": _service_id(self.services[call.row, 0]),
            }
            self.contexts[call.id] = ShiftContext(operator_id=op.id, on_shift=True, responding=True)
        talk = max(1, int(round(-cfg.talk_time_mean_minutes * 60 * math.log1p(-talk_u))))
        self.push(t + talk, _HANGUP, (call, op))

    def on_hangup(self, t: int, payload) -> None:
        call, op = payload
        self.log(t, EventKind.HANGUP, call_id=call.id, operator_id=op.id)
        if call.is_callback:
            self.close_callback(call, op, t)
        else:
            self.close_first_contact(call, op, t)

        op.busy = None
        op.idle_since = t
        if op.leaving:
            self.leave(op, t)
        elif op.dnd_pending:
            self.start_break(op, t)
        else:
            self.dispatch(t)

    def close_first_contact(self, call: _Call, op: _Operator, t: int) -> None:
        cfg = self.config
        u = self.u[call.row, 0]
        record = self.first_contact[call.row]
        if u < cfg.p_buy_immediate:
            self.purchase(call, op, record, op.id, int(self.amounts[call.row, 0]), t)
        elif u < cfg.p_buy_immediate + cfg.p_defer:
            delay_h = cfg.callback_delay_min_hours - cfg.callback_delay_mean_hours * math.log1p(-self.u[call.row, 2])
            due = t + max(1, int(round(delay_h * 3600)))
            if due < self.horizon_s:
                self.push(due, _CALLBACK_DUE, call.row)

    def close_callback(self, call: _Call, op: _Operator, t: int) -> None:
        cfg = self.config
        u = self.u[call.row, 3]
        record = self.first_contact[call.row]
        first = Suggestion(record["suggested_service"], record["answering_operator"])
        if u < cfg.p_buy_on_callback:
            bought = Suggestion(first.service_id, op.id)
            amount = self.amounts[call.row, 0]
        elif u < cfg.p_buy_on_callback + cfg.p_new_service_on_callback:
            bought = Suggestion(self.new_service(call.row), op.id)
            amount = self.amounts[call.row, 1]
        else:
            return
        self.purchase(call, op, record, attribute_sale(first, bought), int(amount), t)

    def new_service(self, row: int) -> str:
        n = self.config.service_count
        original = int(self.services[row, 0])
        return _service_id((original + 1 + int(self.services[row, 1]) % (n - 1)) % n)

    def purchase(self, call: _Call, handler: _Operator, record: dict, operator_id: str, amount: int, t: int) -> None:
        self.log(t, EventKind.PURCHASE, call_id=call.id, operator_id=operator_id, amount=amount)
        record.update(purchased=True, attributed_operator=operator_id, purchase_time=t)

        # Responding means handling this call, not merely busy with another one.
        attributed = self.operators[int(operator_id[2:])]
        self.contexts[f"c{call.row:06d}"] = ShiftContext(
            operator_id=operator_id,
            on_shift=attributed.present,
            responding=attributed is handler,
        )

    def on_callback_due(self, t: int, row: int) -> None:
        call = _Call(f"c{row:06d}r", row, True, t)
        self.first_contact[row]["callback_call_id"] = call.id
        self.log(t, EventKind.CALLBACK, call_id=call.id)
        self.on_arrival(t, call)

    def outcomes(self) -> list[CallOutcome]:
        return [
            CallOutcome(call_id=f"c{row:06d}", **self.first_contact[row])
            for row in sorted(self.first_contact)
        ]


def _seconds(minutes_or_seconds: np.ndarray) -> np.ndarray:
    return np.maximum(1, np.rint(minutes_or_seconds)).astype(np.int64)


def _sale_amounts(u: np.ndarray, config: SimConfig) -> np.ndarray:
    """Truncated-normal amounts (>= 1 Toman) by inverse CDF, rounded to whole Toman."""
    if config.sale_amount_spread == 0:
        return np.full(u.shape, max(1, int(round(config.sale_amount_mean))), dtype=np.int64)
    lower = (1.0 - config.sale_amount_mean) / config.sale_amount_spread
    draws = truncnorm.ppf(u, lower, np.inf, loc=config.sale_amount_mean, scale=config.sale_amount_spread)
    return np.maximum(1, np.floor(draws + 0.5)).astype(np.int64)


def _service_id(index) -> str:
    return f"S{int(index) + 1}"


def poisson_arrivals(config: SimConfig) -> list[int]:
    """
    Arrival times in seconds, thinned from a homogeneous process by day type.

    Candidates are drawn at the larger of the two day-type rates over each
    day's opening hours and kept with probability rate(day) / max_rate.
    """
    peak = max(config.arrival_rate_per_hour_working, config.arrival_rate_per_hour_holiday)
    if peak <= 0:
        return []

    rng = np.random.default_rng(np.random.SeedSequence(config.seed).spawn(5)[0])
    open_len = config.open_end_s - config.open_start_s
    arrivals = []
    for day in range(config.days):
        rate = config.arrival_rate_per_hour_holiday if config.is_holiday(day) else config.arrival_rate_per_hour_working
        n = rng.poisson(peak * open_len / 3600)
        offsets = np.sort(rng.uniform(0, open_len, size=n))
        keep = rng.random(n) < rate / peak
        base = day * SECONDS_PER_DAY + config.open_start_s
        arrivals.extend(int(base + s) for s in np.floor(offsets[keep]))
    return arrivals


def run_simulation(
    config: SimConfig,
    arrivals: list[int] | None = None,
    progress: Callable[[int, int], None] | None = None,
) -> SimulationResult:
    """
    Simulate the call centre for config.days days.

    Args:
        config: Simulator configuration
        arrivals: Explicit arrival times in seconds; replaces the Poisson process
        progress: Called with (days done, total days) as simulated time advances

    Returns:
        SimulationResult with the event log, daily aggregates, per-call
        outcomes and the shift context used for classify_event
    """
    validate_sim_config(config)
    if arrivals is None:
        arrivals = poisson_arrivals(config)
    else:
        arrivals = sorted(int(t) for t in arrivals)
        horizon = config.days * SECONDS_PER_DAY
        if any(t < 0 or t >= horizon for t in arrivals):
            raise InvalidConfig("Scripted arrivals must fall inside the simulated days")

    center = _CallCenter(config, arrivals)
    center.run(progress)
    return SimulationResult(
        events=center.events,
        daily=aggregate_daily(center.events, days=config.days),
        outcomes=center.outcomes(),
        contexts=center.contexts,
    )


# === AGGREGATION ===

def aggregate_daily(events: list[Event], days: int | None = None) -> list[DailyAggregate]:
    """
    Per-day responded/abandoned counts and absent/present sales.

    Answers and abandonments are booked to the call's arrival day, sales to
    the purchase day. A sale is absent when the credited operator has no open
    SHIFT_START ... SHIFT_END interval at the purchase event.
    """
    if not events and days is None:
        return []

    n_days = days or 0
    for e in events:
        if e.kind in (EventKind.ARRIVAL, EventKind.SHIFT_START, EventKind.PURCHASE):
            n_days = max(n_days, e.day + 1)

    rows = {k: [0] * n_days for k in ("arrivals", "responded", "abandoned", "absent_sales", "present_sales")}
    arrival_day = {}
    on_shift = set()
    for e in events:
        if e.kind is EventKind.ARRIVAL:
            arrival_day[e.call_id] = e.day
            rows["arrivals"][e.day] += 1
        elif e.kind is EventKind.ANSWER:
            rows["responded"][arrival_day[e.call_id]] += 1
        elif e.kind is EventKind.ABANDON:
            rows["abandoned"][arrival_day[e.call_id]] += 1
        elif e.kind is EventKind.SHIFT_START:
            on_shift.add(e.operator_id)
        elif e.kind is EventKind.SHIFT_END:
            on_shift.discard(e.operator_id)
        elif e.kind is EventKind.PURCHASE:
            column = "present_sales" if e.operator_id in on_shift else "absent_sales"
            rows[column][e.day] += e.amount

    return [
        DailyAggregate(date_index=d, **{k: v[d] for k, v in rows.items()})
        for d in range(n_days)
    ]


def simulated_q(aggregates: list[DailyAggregate]) -> float:
    """Total absent-operator sales over total sales."""
    absent = sum(a.absent_sales for a in aggregates)
    present = sum(a.present_sales for a in aggregates)
    if absent + present == 0:
        raise NoSales("No sales in the simulated days")
    return absent / (absent + present)


def forbidden_event_counts(events: list[Event]) -> dict[str, int]:
    """
    Occurrences of the three structurally impossible event combinations:
    an abandoned call that was answered, an answer by an operator outside a
    shift, and a purchase on a call nobody answered.
    """
    answered, abandoned, on_shift = set(), set(), set()
    off_shift_answers = unanswered_purchases = 0
    for e in events:
        if e.kind is EventKind.SHIFT_START:
            on_shift.add(e.operator_id)
        elif e.kind is EventKind.SHIFT_END:
            on_shift.discard(e.operator_id)
        elif e.kind is EventKind.ANSWER:
            answered.add(e.call_id)
            if e.operator_id not in on_shift:
                off_shift_answers += 1
        elif e.kind is EventKind.ABANDON:
            abandoned.add(e.call_id)
        elif e.kind is EventKind.PURCHASE and e.call_id not in answered:
            unanswered_purchases += 1

    return {
        "abandoned_and_answered": len(answered & abandoned),
        "off_shift_answers": off_shift_answers,
        "unanswered_purchases": unanswered_purchases,
    }


# === CSV ===

def aggregates_to_csv(aggregates: list[DailyAggregate]) -> str:
    frame = pd.DataFrame(
        [[str(a.date_index), str(a.responded), str(a.abandoned), str(a.absent_sales), str(a.present_sales)]
         for a in aggregates],
        columns=AGGREGATE_COLUMNS,
        dtype=object,
    )
    return frame.to_csv(index=False, lineterminator="\n")


def events_to_csv(events: list[Event]) -> str:
    frame = pd.DataFrame(
        [[str(e.timestamp_s), e.kind.value, e.call_id or "", e.operator_id or "",
          "" if e.amount is None else str(e.amount)]
         for e in events],
        columns=EVENT_COLUMNS,
        dtype=object,
    )
    return frame.to_csv(index=False, lineterminator="\n")


def parse_events_csv(text: str) -> list[Event]:
    frame = pd.read_csv(io.StringIO(text), dtype=str, keep_default_na=False)
    if list(frame.columns) != EVENT_COLUMNS:
        raise ValueError(f"Event log header must be {','.join(EVENT_COLUMNS)}")
    return [
        Event(
            timestamp_s=int(row.timestamp_s),
            kind=EventKind(row.kind),
            call_id=row.call_id or None,
            operator_id=row.operator_id or None,
            amount=int(row.amount) if row.amount else None,
        )
        for row in frame.itertuples(index=False)
    ]
