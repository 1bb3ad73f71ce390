"""Experiment harnesses.

Two experiment kinds share the agents and virtual subjects:

* the search experiment: how many distinct spiders an agent presents
  before hitting a target stress category, averaged over a population
  and repetitions;
* the timed session protocol: relax 120 s, anxious 280 s split into a
  low-target segment and a high-target segment with one adaptation per
  20 s, run twice per subject with the two adaptive methods in
  counterbalanced order. A reversed variant swaps the segment targets
  and starts from the all-max spider.

Time inside a session is logical; the 20 s interval only stamps trace
rows. All randomness derives from one master seed via subject, block
and repetition indices, so reruns are byte-identical.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, replace
from typing import Optional, Sequence

from . import seeding
from .agents import AGENT_KINDS, AgentConfig, apply_slot, make_agent
from .reward import reward
from .spider import (
    ATTRIBUTE_COLUMNS,
    STATE_ATTRIBUTES,
    AttributeAction,
    SpiderAttributes,
    encode,
)
from .subjects import SubjectResponder, VirtualSubject

REPORT_ACCURACY_MIN = 0.75

PHASE_RELAX = "relax"
PHASE_LOW = "low_anxiety"
PHASE_HIGH = "high_anxiety"

TRACE_COLUMNS = (
    "t_s", "phase", "agent", "state_index",
    *ATTRIBUTE_COLUMNS,
    "anxiety", "reward", "action_attr", "action_dir",
)


class TraceIntegrityError(ValueError):
    """Raised when a trace is truncated or otherwise malformed."""


# ---------------------------------------------------------------------------
# Search experiment
# ---------------------------------------------------------------------------

DEFAULT_CATEGORIES = (("low", 1, 3), ("moderate", 4, 6), ("high", 7, 9))


def default_initial_states() -> tuple[SpiderAttributes, ...]:
    return (
        SpiderAttributes.all_zero(),
        SpiderAttributes(1, 1, 1, 1, 1, 1),
        SpiderAttributes.all_max(),
    )


@dataclass(frozen=True)
class SearchExperimentConfig:
    categories: tuple[tuple[str, int, int], ...] = DEFAULT_CATEGORIES
    initial_states: tuple[SpiderAttributes, ...] = ()
    budget: int = 30
    repetitions: int = 10
    agents: tuple[str, ...] = AGENT_KINDS
    agent_config: AgentConfig = AgentConfig()
    rules_empty_policy: str = "hold"
    # The budget caps distinct spiders shown; revisits are free but the
    # attempt still ends after budget * max_steps_factor adaptation steps,
    # so agents that stop progressing (e.g. a held rules policy) terminate.
    max_steps_factor: int = 10

    def __post_init__(self) -> None:
        if not self.initial_states:
            object.__setattr__(self, "initial_states", default_initial_states())
        for name, lo, hi in self.categories:
            if not (0 <= lo <= hi <= 10):
                raise ValueError(f"category {name}: bounds {lo}..{hi} outside 0..10")
        if self.budget < 0:
            raise ValueError("budget must be >= 0")
        if self.repetitions < 1:
            raise ValueError("need at least one repetition")
        if self.max_steps_factor < 1:
            raise ValueError("max_steps_factor must be >= 1")
        for kind in self.agents:
            if kind not in AGENT_KINDS:
                raise ValueError(f"unknown agent kind {kind!r}")


@dataclass(frozen=True)
class SearchCell:
    """Aggregate for one agent x category x initial state."""

    agent: str
    category: str
    initial_state: str
    accuracy: float
    spiders_presented: Optional[float]  # None when unreported
    reported: bool
    n_attempts: int
    n_successes: int


@dataclass(frozen=True)
class SearchCategorySummary:
    """Aggregate for one agent x category, pooled over initial states."""

    agent: str
    category: str
    accuracy: float
    spiders_presented: Optional[float]
    reported: bool


@dataclass(frozen=True)
class SearchOutcome:
    cells: tuple[SearchCell, ...]
    categories: tuple[SearchCategorySummary, ...]


def state_label(spider: SpiderAttributes) -> str:
    return "-".join(str(v) for v in spider.as_tuple())


def _run_attempt(agent, responder: SubjectResponder, initial_index: int,
                 lo: int, hi: int, target: int, budget: int,
                 max_steps: int) -> tuple[bool, int]:
    """One search attempt. Returns (success, distinct spiders shown).

    The attempt fails once showing another distinct spider would exceed
    the budget, or after ``max_steps`` adaptation steps without a hit.
    """
    if budget <= 0:
        return False, 0
    state = initial_index
    presented = {state}
    anxiety = responder.anxiety_of_index(state)
    if lo <= anxiety <= hi:
        return True, len(presented)
    for _ in range(max_steps):
        slot = agent.act(state, anxiety, target)
        nxt = apply_slot(state, slot)
        if nxt not in presented:
            if len(presented) >= budget:
                return False, len(presented)
            presented.add(nxt)
        nxt_anxiety = responder.anxiety_of_index(nxt)
        if slot is not None:
            agent.learn(state, slot, reward(nxt_anxiety, target), nxt)
        state, anxiety = nxt, nxt_anxiety
        if lo <= anxiety <= hi:
            return True, len(presented)
    return False, len(presented)


def run_search(cfg: SearchExperimentConfig, population: Sequence[VirtualSubject],
               master_seed: int) -> SearchOutcome:
    """Run every agent against every category and initial state.

    An attempt succeeds when a presented spider's discretized anxiety
    falls inside the closed category interval before the presentation
    budget runs out. ``spiders_presented`` counts distinct spiders shown
    on successful attempts only, and a cell is unreported below 75%
    accuracy.

    Adaptation is per individual: within one experimental cell a
    learning agent keeps its Q-table across the repetitions for the same
    subject. Nothing transfers between subjects or cells.
    """
    if not population:
        raise ValueError("search experiment needs a non-empty population")
    cells = []
    summaries = []
    for a_idx, kind in enumerate(cfg.agents):
        for c_idx, (cat_name, lo, hi) in enumerate(cfg.categories):
            target = (lo + hi) // 2
            cat_presented: list[int] = []
            cat_attempts = 0
            cat_successes = 0
            for s_idx, initial in enumerate(cfg.initial_states):
                initial_index = encode(initial)
                presented_counts: list[int] = []
                attempts = 0
                for subj_idx, subject in enumerate(population):
                    noisy = subject.noise_sigma > 0
                    path = (seeding.STREAM_SEARCH, a_idx, c_idx, s_idx, subj_idx)
                    agent = make_agent(
                        kind, cfg.agent_config,
                        seeding.derive_seed(master_seed, *path),
                        cfg.rules_empty_policy,
                    )
                    for rep in range(cfg.repetitions):
                        rng = (
                            seeding.derive_rng(
                                master_seed, seeding.STREAM_NOISE,
                                a_idx, c_idx, s_idx, subj_idx, rep,
                            )
                            if noisy else None
                        )
                        responder = SubjectResponder(subject, rng)
                        ok, shown = _run_attempt(
                            agent, responder, initial_index, lo, hi, target,
                            cfg.budget, cfg.budget * cfg.max_steps_factor,
                        )
                        attempts += 1
                        if ok:
                            presented_counts.append(shown)
                accuracy = len(presented_counts) / attempts if attempts else 0.0
                reported = accuracy >= REPORT_ACCURACY_MIN
                mean_presented = (
                    sum(presented_counts) / len(presented_counts)
                    if presented_counts else None
                )
                cells.append(SearchCell(
                    agent=kind,
                    category=cat_name,
                    initial_state=state_label(initial),
                    accuracy=accuracy,
                    spiders_presented=mean_presented if reported else None,
                    reported=reported,
                    n_attempts=attempts,
                    n_successes=len(presented_counts),
                ))
                cat_presented.extend(presented_counts)
                cat_attempts += attempts
                cat_successes += len(presented_counts)
            cat_accuracy = cat_successes / cat_attempts if cat_attempts else 0.0
            cat_reported = cat_accuracy >= REPORT_ACCURACY_MIN
            summaries.append(SearchCategorySummary(
                agent=kind,
                category=cat_name,
                accuracy=cat_accuracy,
                spiders_presented=(
                    sum(cat_presented) / len(cat_presented)
                    if (cat_presented and cat_reported) else None
                ),
                reported=cat_reported,
            ))
    return SearchOutcome(cells=tuple(cells), categories=tuple(summaries))


def write_search_csv(outcome: SearchOutcome, path) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(
            ["agent", "category", "initial_state", "spiders_presented", "accuracy", "reported"]
        )
        for cell in outcome.cells:
            writer.writerow([
                cell.agent,
                cell.category,
                cell.initial_state,
                "" if cell.spiders_presented is None else repr(cell.spiders_presented),
                repr(cell.accuracy),
                "true" if cell.reported else "false",
            ])


# ---------------------------------------------------------------------------
# Session protocol
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class SessionProtocol:
    relax_s: int = 120
    anxious_s: int = 280
    adapt_interval_s: int = 20
    low_target: int = 3
    high_target: int = 7
    order: str = "rl-first"  # or "rules-first"
    reversed_targets: bool = False

    def __post_init__(self) -> None:
        if self.anxious_s % (2 * self.adapt_interval_s) != 0:
            raise ValueError("anxious duration must split into equal 20 s segments")
        if self.order not in ("rl-first", "rules-first"):
            raise ValueError(f"unknown order {self.order!r}")
        for t in (self.low_target, self.high_target):
            if not 0 <= t <= 10:
                raise ValueError(f"target {t} outside 0..10")

    @property
    def steps_per_block(self) -> int:
        return self.anxious_s // self.adapt_interval_s

    @property
    def steps_per_segment(self) -> int:
        return self.steps_per_block // 2

    def initial_state(self) -> SpiderAttributes:
        # Reversed variant starts from the all-max spider.
        return SpiderAttributes.all_max() if self.reversed_targets else SpiderAttributes.all_zero()

    def step_target(self, step: int) -> int:
        first_low = not self.reversed_targets
        in_first = step <= self.steps_per_segment
        return self.low_target if (in_first == first_low) else self.high_target

    def step_phase(self, step: int) -> str:
        return PHASE_LOW if self.step_target(step) == self.low_target else PHASE_HIGH


@dataclass(frozen=True)
class TraceRow:
    t_s: int
    phase: str
    agent: str
    state_index: Optional[int]
    anxiety: Optional[int]
    reward: Optional[float]
    action: Optional[AttributeAction]

    @property
    def is_step(self) -> bool:
        return self.anxiety is not None


@dataclass
class SessionTrace:
    subject_index: int
    agent: str  # "rl" | "rules"
    order: str
    protocol: SessionProtocol
    rows: list[TraceRow]


def _run_block(agent, agent_name: str, responder: SubjectResponder,
               protocol: SessionProtocol, relax_start: int) -> list[TraceRow]:
    block_start = relax_start + protocol.relax_s
    rows = [TraceRow(relax_start, PHASE_RELAX, "", None, None, None, None)]
    state = encode(protocol.initial_state())
    rows.append(TraceRow(block_start, protocol.step_phase(1), agent_name, state,
                         None, None, None))
    prev_state: Optional[int] = None
    prev_slot: Optional[int] = None
    for step in range(1, protocol.steps_per_block + 1):
        target = protocol.step_target(step)
        t = block_start + step * protocol.adapt_interval_s
        anxiety = responder.anxiety_of_index(state)
        r = reward(anxiety, target)
        if prev_slot is not None:
            agent.learn(prev_state, prev_slot, r, state)
        slot = agent.act(state, anxiety, target)
        action = None if slot is None else AttributeAction.from_slot(slot)
        rows.append(TraceRow(t, protocol.step_phase(step), agent_name, state,
                             anxiety, r, action))
        prev_state, prev_slot = state, slot
        state = apply_slot(state, slot)
    return rows


def run_session(
    protocol: SessionProtocol,
    subject: VirtualSubject,
    subject_index: int,
    master_seed: int,
    agent_cfg: AgentConfig = AgentConfig(),
    rl_kind: str = "rl_zero",
    rules_empty_policy: str = "hold",
) -> tuple[SessionTrace, SessionTrace]:
    """One full session: two anxious blocks, one per adaptive method.

    Returns the RL trace and the rules trace, in that order regardless
    of the counterbalancing order actually run. The Q-table persists
    across the two target segments within the RL block.
    """
    names = ("rl", "rules") if protocol.order == "rl-first" else ("rules", "rl")
    traces: dict[str, SessionTrace] = {}
    t = 0
    for block, name in enumerate(names):
        seed = seeding.derive_seed(master_seed, seeding.STREAM_SESSION,
                                   subject_index, block, seeding.STREAM_AGENT)
        kind = rl_kind if name == "rl" else "rules"
        agent = make_agent(kind, agent_cfg, seed, rules_empty_policy)
        rng = seeding.derive_rng(master_seed, seeding.STREAM_SESSION,
                                 subject_index, block, seeding.STREAM_NOISE)
        responder = SubjectResponder(subject, rng)
        rows = _run_block(agent, name, responder, protocol, relax_start=t)
        traces[name] = SessionTrace(subject_index, name, protocol.order, protocol, rows)
        t += protocol.relax_s + protocol.anxious_s
    return traces["rl"], traces["rules"]


def run_counterbalanced_sessions(
    protocol: SessionProtocol,
    population: Sequence[VirtualSubject],
    master_seed: int,
    agent_cfg: AgentConfig = AgentConfig(),
    rl_kind: str = "rl_zero",
    rules_empty_policy: str = "hold",
) -> list[tuple[SessionTrace, SessionTrace]]:
    """One session per subject; even subject indices run RL first."""
    sessions = []
    for idx, subject in enumerate(population):
        order = "rl-first" if idx % 2 == 0 else "rules-first"
        sessions.append(run_session(
            replace(protocol, order=order), subject, idx, master_seed,
            agent_cfg, rl_kind, rules_empty_policy,
        ))
    return sessions


# ---------------------------------------------------------------------------
# Trace summaries and CSV round-trip
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class SegmentSummary:
    phase: str
    target: int
    mean_anxiety: float
    mse: float
    mean_reward: float
    n_steps: int


def summarize_steps(rows: Sequence[TraceRow], low_target: int, high_target: int,
                    steps_per_segment: int) -> dict[str, SegmentSummary]:
    """Per-segment mean anxiety, MSE against the segment target and mean reward."""
    out = {}
    for phase, target in ((PHASE_LOW, low_target), (PHASE_HIGH, high_target)):
        steps = [r for r in rows if r.is_step and r.phase == phase]
        if len(steps) != steps_per_segment:
            raise TraceIntegrityError(
                f"{phase}: expected {steps_per_segment} adaptation steps, found {len(steps)}"
            )
        anx = [r.anxiety for r in steps]
        out[phase] = SegmentSummary(
            phase=phase,
            target=target,
            mean_anxiety=sum(anx) / len(anx),
            mse=sum((a - target) ** 2 for a in anx) / len(anx),
            mean_reward=sum(r.reward for r in steps) / len(steps),
            n_steps=len(steps),
        )
    return out


def segment_summary(trace: SessionTrace) -> dict[str, SegmentSummary]:
    p = trace.protocol
    return summarize_steps(trace.rows, p.low_target, p.high_target, p.steps_per_segment)


def max_anxiety_state(rows: Sequence[TraceRow]) -> tuple[SpiderAttributes, int]:
    """Spider with the highest observed anxiety (first occurrence wins ties)."""
    best: Optional[TraceRow] = None
    for row in rows:
        if row.is_step and (best is None or row.anxiety > best.anxiety):
            best = row
    if best is None:
        raise TraceIntegrityError("trace has no adaptation steps")
    return SpiderAttributes.from_tuple(STATE_ATTRIBUTES[best.state_index]), best.anxiety


def write_trace_csv(trace: SessionTrace, path) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(TRACE_COLUMNS)
        for row in trace.rows:
            attrs = (
                [""] * 6 if row.state_index is None
                else [int(v) for v in STATE_ATTRIBUTES[row.state_index]]
            )
            writer.writerow([
                row.t_s,
                row.phase,
                row.agent,
                "" if row.state_index is None else row.state_index,
                *attrs,
                "" if row.anxiety is None else row.anxiety,
                "" if row.reward is None else repr(row.reward),
                "" if row.action is None else row.action.attribute_index,
                "" if row.action is None else row.action.direction,
            ])


def read_trace_rows(path) -> list[TraceRow]:
    rows = []
    with open(path, newline="") as fh:
        reader = csv.DictReader(fh)
        missing = set(TRACE_COLUMNS) - set(reader.fieldnames or ())
        if missing:
            raise TraceIntegrityError(f"{path}: missing columns {sorted(missing)}")
        for rec in reader:
            action = None
            if rec["action_attr"] != "":
                action = AttributeAction(int(rec["action_attr"]), int(rec["action_dir"]))
            rows.append(TraceRow(
                t_s=int(rec["t_s"]),
                phase=rec["phase"],
                agent=rec["agent"],
                state_index=None if rec["state_index"] == "" else int(rec["state_index"]),
                anxiety=None if rec["anxiety"] == "" else int(rec["anxiety"]),
                reward=None if rec["reward"] == "" else float(rec["reward"]),
                action=action,
            ))
    return rows
