"""Discrete-event Actor simulator with a seeded arbiter.

Two built-in programs are provided.  ``unbounded`` is the Counter program:
``start`` creates a Counter, sends it ``go`` and ``stop`` concurrently, and
replies with whatever ``stop`` returns.  ``csp`` is the three-process
guarded-command program (X offers stop, Y loops offering go, Z counts).

The arbiter decides which pending message is delivered next.

* ``Fair``: every sent message draws a geometric *patience* from the seeded
  PRNG, capped by a fairness bound derived from ``max_steps``.  A message
  whose patience has run out must be delivered next.  Otherwise the arbiter
  favours the newest message, holding older ones back as long as allowed.  Every run terminates, with no bound on the
  result fixed before the seed is drawn.
* ``Unfair``: the seed picks a set of starved message tags.  A starved
  message is delivered only when nothing else is pending.  Otherwise
  messages are picked uniformly.  Starving ``stop`` never halts.

The simulator is single threaded.  It models concurrency, it does not use
it.  Runs are reproducible bit for bit given (seed, fairness, max_steps).
"""

from __future__ import annotations

import math
import random
from collections import Counter as _Tally
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from enum import Enum
from typing import Callable, Iterable, Optional, Union


class ActorError(ValueError):
    pass


class Fairness(str, Enum):
    FAIR = "fair"
    UNFAIR = "unfair"


Fair = Fairness.FAIR
Unfair = Fairness.UNFAIR


class _CutoffType:
    """The outcome of a run that used up its step budget without replying."""

    _instance = None

    def __new__(cls):
        if cls._instance is None:
            cls._instance = super().__new__(cls)
        return cls._instance

    def __repr__(self):
        return "Cutoff"

    __str__ = __repr__

    def __reduce__(self):
        return (_CutoffType, ())


Cutoff = _CutoffType()

#: mean patience is the fairness bound divided by this
DEFAULT_PATIENCE_SCALE = 3.0


# ---------------------------------------------------------------------------
# Behaviors

@dataclass(frozen=True)
class Send:
    target: str
    tag: str
    payload: object = None
    customer: Optional[str] = None


@dataclass(frozen=True)
class Create:
    address: str
    behavior: str
    init: tuple


@dataclass(frozen=True)
class Become:
    updates: tuple


@dataclass(frozen=True)
class Halt:
    value: object


Effect = Union[Send, Create, Become, Halt]


@dataclass(frozen=True)
class Message:
    tag: str
    payload: object = None
    customer: Optional[str] = None

    def render(self) -> str:
        if self.payload is None:
            return self.tag
        return f"{self.tag}({_render_payload(self.payload)})"


def _render_payload(v) -> str:
    if v is True:
        return "true"
    if v is False:
        return "false"
    return str(v)


class Context:
    """What a handler sees: its own address, a snapshot of its state and the
    message.  Effects are collected and applied after the handler returns,
    so an update is visible only to the next message at this actor."""

    def __init__(self, sim: "Simulation", address: str, state: dict, message: Message):
        self._sim = sim
        self.self = address
        self.state = dict(state)
        self.message = message
        self.effects: list = []

    def send(self, target: str, tag: str, payload=None, customer=None):
        self.effects.append(Send(target, tag, payload, customer))

    def create(self, behavior: str, **init) -> str:
        address = self._sim._fresh_address(behavior)
        self.effects.append(Create(address, behavior, tuple(sorted(init.items()))))
        return address

    def become(self, **updates):
        self.effects.append(Become(tuple(sorted(updates.items()))))

    def reply(self, value):
        if self.message.customer is None:
            raise ActorError(f"{self.self}: reply to a message without a customer")
        self.effects.append(Send(self.message.customer, "reply", value))

    def halt(self, value):
        self.effects.append(Halt(value))


Handler = Callable[[Context], None]


@dataclass(frozen=True)
class ActorBehavior:
    name: str
    state: tuple = ()
    handlers: tuple = ()

    def handler(self, tag: str) -> Optional[Handler]:
        for t, h in self.handlers:
            if t == tag:
                return h
        return None

    def check(self) -> None:
        """Local finiteness: a behavior is a finite table of handlers, and each
        handler yields a finite effect list (checked again per event)."""
        if not isinstance(self.handlers, tuple):
            raise ActorError(f"{self.name}: handlers must be a finite tuple")
        tags = [t for t, _ in self.handlers]
        if len(tags) != len(set(tags)):
            raise ActorError(f"{self.name}: duplicate handler tags")
        for t, h in self.handlers:
            if not isinstance(t, str) or not callable(h):
                raise ActorError(f"{self.name}: bad handler entry {t!r}")


def behavior(name: str, state: Optional[dict] = None, **handlers) -> ActorBehavior:
    b = ActorBehavior(name, tuple(sorted((state or {}).items())),
                      tuple(sorted(handlers.items())))
    b.check()
    return b


# The Counter program

def _unbounded_start(ctx: Context):
    c = ctx.create("Counter", count=0)
    ctx.send(c, "go")
    ctx.send(c, "stop", customer=ctx.message.customer)


def _counter_stop(ctx: Context):
    ctx.reply(ctx.state["count"])


def _counter_go(ctx: Context):
    ctx.send(ctx.self, "go")
    ctx.become(count=ctx.state["count"] + 1)


def _driver_reply(ctx: Context):
    ctx.halt(ctx.message.payload)


UNBOUNDED_PROGRAM = {
    "Unbounded": behavior("Unbounded", start=_unbounded_start),
    "Counter": behavior("Counter", {"count": 0}, stop=_counter_stop, go=_counter_go),
    "Driver": behavior("Driver", reply=_driver_reply),
}


# The guarded-command contrast.  Rendezvous are modelled as messages: an
# offer sits in the pending pool until Z's repetitive command accepts it.

def _x_init(ctx: Context):
    ctx.send("Z", "stop")


def _y_init(ctx: Context):
    ctx.send("Z", "go")


def _y_guard(ctx: Context):
    if ctx.message.payload:
        ctx.send("Z", "go")
    else:
        ctx.become(done=True)
        ctx.send("Z", "ydone")


def _z_stop(ctx: Context):
    ctx.become(cont=False)


def _z_go(ctx: Context):
    ctx.become(n=ctx.state["n"] + 1)
    ctx.send("Y", "guard", ctx.state["cont"])


def _z_ydone(ctx: Context):
    # X finished when its stop was accepted; Y has now finished too
    ctx.halt(ctx.state["n"])


CSP_PROGRAM = {
    "X": behavior("X", init=_x_init),
    "Y": behavior("Y", {"done": False}, init=_y_init, guard=_y_guard),
    "Z": behavior("Z", {"n": 0, "cont": True}, stop=_z_stop, go=_z_go, ydone=_z_ydone),
}


# ---------------------------------------------------------------------------
# Events and orders

@dataclass(frozen=True)
class Event:
    id: int
    actor: str
    message: Message
    activated_by: Optional[int]
    seq_at_actor: int

    def to_line(self) -> str:
        act = "-" if self.activated_by is None else str(self.activated_by)
        return f"event {self.id} {self.actor} {self.message.render()} {act} {self.seq_at_actor}"


class EventLog:
    """Events of one run plus the activation order, per-actor arrival orders
    and their combined transitive closure.

    Both orders only point from earlier to later event ids, so the closure is
    computed by one reverse sweep with integer bitsets.
    """

    def __init__(self, events: Iterable[Event] = ()):
        self.events: list = list(events)
        self._by_id = {}
        for e in self.events:
            if e.id in self._by_id:
                raise ActorError(f"duplicate event id {e.id}")
            self._by_id[e.id] = e
        self._desc = None
        self._anc = None

    def __len__(self):
        return len(self.events)

    def __contains__(self, eid):
        return eid in self._by_id

    def event(self, eid: int) -> Event:
        try:
            return self._by_id[eid]
        except KeyError:
            raise ActorError(f"unknown event id {eid}") from None

    @property
    def activation_edges(self) -> list:
        return [(e.activated_by, e.id) for e in self.events if e.activated_by is not None]

    @property
    def arrival_chains(self) -> dict:
        chains: dict = {}
        for e in sorted(self.events, key=lambda e: (e.actor, e.seq_at_actor)):
            chains.setdefault(e.actor, []).append(e.id)
        return chains

    def arrival_edges(self) -> list:
        out = []
        for chain in self.arrival_chains.values():
            out.extend(zip(chain, chain[1:]))
        return out

    def validate(self) -> None:
        for a, b in self.activation_edges:
            if a not in self._by_id:
                raise ActorError(f"event {b} activated by unknown event {a}")
        for actor, chain in self.arrival_chains.items():
            seqs = [self._by_id[i].seq_at_actor for i in chain]
            if any(x >= y for x, y in zip(seqs, seqs[1:])):
                raise ActorError(f"arrival ordinals at {actor} are not strictly increasing")
        # acyclicity of the union
        self._closure()
        for e in self.events:
            if self._desc[e.id] >> self._index[e.id] & 1:
                raise ActorError(f"event {e.id} precedes itself")

    # closure --------------------------------------------------------------

    def _closure(self):
        if self._desc is not None:
            return
        order = _topological(self)
        self._index = {eid: i for i, eid in enumerate(order)}
        succ: dict = {eid: [] for eid in order}
        pred: dict = {eid: [] for eid in order}
        for a, b in self.activation_edges + self.arrival_edges():
            succ[a].append(b)
            pred[b].append(a)
        desc, anc = {}, {}
        for eid in reversed(order):
            bits = 0
            for s in succ[eid]:
                bits |= (1 << self._index[s]) | desc[s]
            desc[eid] = bits
        for eid in order:
            bits = 0
            for a in pred[eid]:
                bits |= (1 << self._index[a]) | anc[a]
            anc[eid] = bits
        self._order = order
        self._desc, self._anc = desc, anc

    def precedes(self, a: int, b: int) -> bool:
        self.event(a), self.event(b)
        self._closure()
        return bool(self._desc[a] >> self._index[b] & 1)

    @property
    def combined_order(self) -> frozenset:
        self._closure()
        pairs = set()
        for a in self._order:
            d = self._desc[a]
            while d:
                low = d & -d
                pairs.add((a, self._order[low.bit_length() - 1]))
                d ^= low
        return frozenset(pairs)

    def between(self, e1: int, e2: int) -> frozenset:
        self.event(e1), self.event(e2)
        self._closure()
        bits = self._desc[e1] & self._anc[e2]
        out = set()
        while bits:
            low = bits & -bits
            out.add(self._order[low.bit_length() - 1])
            bits ^= low
        return frozenset(out)

    # serialization ----------------------------------------------------------

    def to_text(self) -> str:
        return "".join(e.to_line() + "\n" for e in self.events)

    @classmethod
    def from_text(cls, text: str) -> "EventLog":
        events = []
        for n, line in enumerate(text.splitlines(), 1):
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            parts = line.split()
            if len(parts) != 6 or parts[0] != "event":
                raise ActorError(f"line {n}: expected 'event id actor msg activated_by seq'")
            _, eid, actor, msg, act, seq = parts
            try:
                events.append(Event(int(eid), actor, _parse_message(msg),
                                    None if act == "-" else int(act), int(seq)))
            except ValueError as exc:
                raise ActorError(f"line {n}: {exc}") from None
        return cls(events)


def _parse_message(text: str) -> Message:
    if "(" not in text:
        return Message(text)
    if not text.endswith(")"):
        raise ValueError(f"bad message {text!r}")
    tag, raw = text[:-1].split("(", 1)
    if raw == "true":
        value = True
    elif raw == "false":
        value = False
    else:
        try:
            value = int(raw)
        except ValueError:
            value = raw
    return Message(tag, value)


def _topological(log: EventLog) -> list:
    ids = [e.id for e in log.events]
    indeg = {i: 0 for i in ids}
    succ: dict = {i: [] for i in ids}
    for a, b in log.activation_edges + log.arrival_edges():
        if a not in indeg:
            raise ActorError(f"edge from unknown event {a}")
        succ[a].append(b)
        indeg[b] += 1
    ready = sorted(i for i in ids if indeg[i] == 0)
    out = []
    while ready:
        i = ready.pop()
        out.append(i)
        for s in succ[i]:
            indeg[s] -= 1
            if indeg[s] == 0:
                ready.append(s)
    if len(out) != len(ids):
        raise ActorError("event orders contain a cycle")
    return out


@dataclass(frozen=True)
class Orders:
    activation: frozenset
    arrival: dict
    combined: frozenset


def extract_orders(log: EventLog) -> Orders:
    arrival = {}
    for actor, chain in log.arrival_chains.items():
        arrival[actor] = frozenset((a, b) for i, a in enumerate(chain) for b in chain[i + 1:])
    return Orders(frozenset(log.activation_edges), arrival, log.combined_order)


@dataclass(frozen=True)
class DiscretenessReport:
    e1: int
    e2: int
    activation: frozenset
    arrival: dict
    combined: frozenset

    @property
    def finite(self) -> bool:
        # a finite log cannot violate discreteness; kept explicit for reports
        return True

    @property
    def sizes(self) -> dict:
        out = {"activation": len(self.activation), "combined": len(self.combined)}
        for actor, s in sorted(self.arrival.items()):
            out[f"arrival:{actor}"] = len(s)
        return out


def check_discreteness(log: EventLog, e1: int, e2: int) -> DiscretenessReport:
    """Between-sets {e | e1 < e < e2} for the activation order, each arrival
    order and the combined order."""
    log.event(e1), log.event(e2)
    # activation alone: rebuild with singleton arrival chains
    act_only = EventLog(Event(e.id, f"_{e.id}", e.message, e.activated_by, 0) for e in log.events)
    activation = act_only.between(e1, e2)
    arrival = {}
    for actor, chain in log.arrival_chains.items():
        if e1 in chain and e2 in chain:
            i, j = chain.index(e1), chain.index(e2)
            arrival[actor] = frozenset(chain[i + 1:j])
        else:
            arrival[actor] = frozenset()
    return DiscretenessReport(e1, e2, activation, arrival, log.between(e1, e2))


# ---------------------------------------------------------------------------
# Simulation

@dataclass
class _Pending:
    seq: int
    target: str
    message: Message
    sent_by: Optional[int]
    deadline: int
    rank: tuple = ()


@dataclass(frozen=True)
class Outcome:
    value: object
    steps: int
    log: EventLog = field(repr=False, compare=False)
    program: str = ""
    seed: int = 0
    fairness: Fairness = Fair

    @property
    def cutoff(self) -> bool:
        return self.value is Cutoff

    def to_text(self) -> str:
        return (f"program {self.program}\nseed {self.seed}\nfairness {self.fairness.value}\n"
                f"steps {self.steps}\noutcome {self.value}\n")

    def to_dict(self) -> dict:
        return {"program": self.program, "seed": self.seed, "fairness": self.fairness.value,
                "steps": self.steps, "outcome": "Cutoff" if self.cutoff else self.value}


class Simulation:
    def __init__(self, program: dict, seed: int, fairness: Fairness, max_steps: int,
                 patience_scale: float = DEFAULT_PATIENCE_SCALE):
        if max_steps < 1:
            raise ActorError("max_steps must be positive")
        if patience_scale <= 0:
            raise ActorError("patience scale must be positive")
        for b in program.values():
            b.check()
        self.program = program
        self.fairness = Fairness(fairness)
        self.max_steps = max_steps
        self.rng = random.Random(seed)
        self.patience_scale = patience_scale
        # a message sent at step t is delivered by about t + bound; a run
        # chains at most three such waits (start, stop, reply) before halting
        self.bound = max(1, (max_steps - 6) // 3)
        self.actors: dict = {}
        self.states: dict = {}
        self.seq: dict = {}
        self.pending: list = []
        self.events: list = []
        self.now = 0
        self._next_msg = 0
        self._created = _Tally()
        tags = sorted({t for b in program.values() for t, _ in b.handlers})
        # an unfair arbiter owes nothing: the seed decides whom it ignores
        self.starved = frozenset(t for t in tags if self.rng.random() < 0.5) \
            if self.fairness is Unfair else frozenset()

    def _fresh_address(self, behavior: str) -> str:
        self._created[behavior] += 1
        return f"{behavior}#{self._created[behavior]}"

    def spawn(self, address: str, behavior: str, **init):
        if behavior not in self.program:
            raise ActorError(f"unknown behavior {behavior}")
        self.actors[address] = behavior
        state = dict(self.program[behavior].state)
        state.update(init)
        self.states[address] = state
        self.seq[address] = 0

    def _patience(self) -> int:
        # geometric on 1, 2, ... with mean about bound / scale; inverse
        # transform keeps one draw per message
        u = self.rng.random()
        p = min(1.0, self.patience_scale / self.bound)
        if p >= 1:
            k = 1
        else:
            k = 1 + int(math.log(1.0 - u) / math.log(1.0 - p))
        return min(k, self.bound)

    def post(self, target: str, message: Message, sent_by: Optional[int]):
        deadline = self.now + self._patience() if self.fairness is Fair else 0
        # sends from one event are concurrent: a coin orders them
        rank = (self.now, self.rng.random()) if self.fairness is Fair else ()
        self.pending.append(_Pending(self._next_msg, target, message, sent_by, deadline, rank))
        self._next_msg += 1

    def _pick(self) -> _Pending:
        if self.fairness is Fair:
            expired = [m for m in self.pending if m.deadline <= self.now]
            if expired:
                chosen = min(expired, key=lambda m: (m.deadline, m.seq))
            else:
                # free choice: hold older messages back as long as allowed
                chosen = max(self.pending, key=lambda m: m.rank)
        else:
            free = [m for m in self.pending if m.message.tag not in self.starved]
            pool = free or self.pending
            chosen = pool[self.rng.randrange(len(pool))]
        self.pending.remove(chosen)
        return chosen

    def run(self) -> object:
        while self.pending:
            if self.now >= self.max_steps:
                return Cutoff
            m = self._pick()
            self.now += 1
            result = self._deliver(m)
            if result is not None:
                return result[0]
        return Cutoff

    def _deliver(self, m: _Pending):
        if m.target not in self.actors:
            raise ActorError(f"message to unknown actor {m.target}")
        eid = len(self.events)
        seq = self.seq[m.target]
        self.seq[m.target] = seq + 1
        self.events.append(Event(eid, m.target, m.message, m.sent_by, seq))
        b = self.program[self.actors[m.target]]
        h = b.handler(m.message.tag)
        if h is None:
            raise ActorError(f"{m.target} has no handler for {m.message.tag}")
        ctx = Context(self, m.target, self.states[m.target], m.message)
        h(ctx)
        if not isinstance(ctx.effects, list):
            raise ActorError("handler effects must be a finite list")
        halted = None
        for eff in ctx.effects:
            if isinstance(eff, Create):
                self.spawn(eff.address, eff.behavior, **dict(eff.init))
            elif isinstance(eff, Become):
                self.states[m.target].update(dict(eff.updates))
            elif isinstance(eff, Send):
                self.post(eff.target, Message(eff.tag, eff.payload, eff.customer), eid)
            elif isinstance(eff, Halt):
                halted = (eff.value,)
        return halted


PROGRAMS = {"unbounded": UNBOUNDED_PROGRAM, "csp": CSP_PROGRAM}


def _setup(name: str, sim: Simulation):
    if name == "unbounded":
        sim.spawn("Driver", "Driver")
        sim.spawn("Unbounded", "Unbounded")
        sim.post("Unbounded", Message("start", customer="Driver"), None)
    elif name == "csp":
        for p in ("X", "Y", "Z"):
            sim.spawn(p, p)
        sim.post("X", Message("init"), None)
        sim.post("Y", Message("init"), None)
    else:
        raise ActorError(f"unknown program {name}")


def run_program(name: str, seed: int, fairness: Fairness = Fair, max_steps: int = 1000,
                patience_scale: float = DEFAULT_PATIENCE_SCALE) -> Outcome:
    sim = Simulation(PROGRAMS.get(name, {}) or _unknown(name), seed, fairness,
                     max_steps, patience_scale)
    _setup(name, sim)
    value = sim.run()
    return Outcome(value, sim.now, EventLog(sim.events), name, seed, sim.fairness)


def _unknown(name):
    raise ActorError(f"unknown program {name}")


def run_unbounded(seed: int, fairness: Fairness = Fair, max_steps: int = 1000,
                  patience_scale: float = DEFAULT_PATIENCE_SCALE) -> Outcome:
    return run_program("unbounded", seed, fairness, max_steps, patience_scale)


def run_csp_contrast(seed: int, fairness: Fairness = Fair, max_steps: int = 1000,
                     patience_scale: float = DEFAULT_PATIENCE_SCALE) -> Outcome:
    return run_program("csp", seed, fairness, max_steps, patience_scale)


def count_go_deliveries(log: EventLog, actor_prefix: str, before_tag: Optional[str] = None) -> int:
    """Recount go deliveries at an actor from the log alone, optionally only
    those that arrived before the first ``before_tag`` message there."""
    n = 0
    for e in sorted(log.events, key=lambda e: e.id):
        if not e.actor.startswith(actor_prefix):
            continue
        if before_tag is not None and e.message.tag == before_tag:
            break
        if e.message.tag == "go":
            n += 1
    return n


# ---------------------------------------------------------------------------
# Sweeps

@dataclass(frozen=True)
class OutcomeHistogram:
    program: str
    fairness: Fairness
    max_steps: int
    counts: dict

    @property
    def values(self) -> frozenset:
        return frozenset(v for v in self.counts if v is not Cutoff)

    @property
    def distinct(self) -> int:
        return len(self.values)

    @property
    def cutoffs(self) -> int:
        return self.counts.get(Cutoff, 0)

    @property
    def runs(self) -> int:
        return sum(self.counts.values())

    @property
    def max_value(self) -> Optional[int]:
        return max(self.values, default=None)

    def to_text(self) -> str:
        lines = [f"program {self.program}", f"fairness {self.fairness.value}",
                 f"max_steps {self.max_steps}", f"runs {self.runs}",
                 f"distinct {self.distinct}", f"cutoffs {self.cutoffs}", "outcome count"]
        for v in sorted(self.values):
            lines.append(f"{v} {self.counts[v]}")
        if self.cutoffs:
            lines.append(f"Cutoff {self.cutoffs}")
        return "\n".join(lines) + "\n"

    def to_dict(self) -> dict:
        return {"program": self.program, "fairness": self.fairness.value,
                "max_steps": self.max_steps, "runs": self.runs,
                "distinct": self.distinct, "cutoffs": self.cutoffs,
                "histogram": {str(v): self.counts[v] for v in sorted(self.values)}}


def _one(args):
    name, seed, fairness, max_steps, scale = args
    return run_program(name, seed, fairness, max_steps, scale).value


def sweep(seeds: Iterable[int], fairness: Fairness = Fair, max_steps: int = 1000,
          program: str = "unbounded", patience_scale: float = DEFAULT_PATIENCE_SCALE,
          workers: int = 1) -> OutcomeHistogram:
    """Histogram of outcomes over seeds.  ``workers > 1`` farms whole runs out
    to processes; each run is still sequential, so results do not change."""
    fairness = Fairness(fairness)
    jobs = [(program, s, fairness, max_steps, patience_scale) for s in seeds]
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            values = list(pool.map(_one, jobs, chunksize=64))
    else:
        values = [_one(j) for j in jobs]
    return OutcomeHistogram(program, fairness, max_steps, dict(_Tally(values)))


def parse_seed_range(text: str) -> range:
    """``A..B`` inclusive."""
    try:
        a, b = text.split("..")
        lo, hi = int(a), int(b)
    except ValueError:
        raise ActorError(f"bad seed range {text!r}; expected A..B") from None
    if hi < lo:
        raise ActorError(f"empty seed range {text!r}")
    return range(lo, hi + 1)
