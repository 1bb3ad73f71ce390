"""Experiment configuration files.

INI-style sections with flat keys (parsed by configparser). Documented
keys, all optional unless noted:

  [run]        seed (required unless EDPCGRL_SEED is set)
  [subjects]   n_subjects, noise_sigma, habituation (on|off),
               habituation_decay, impact.<attr>.mean, impact.<attr>.std, seed
  [agents]     epsilon, alpha, gamma, rules_empty_policy (hold|nudge)
  [protocol]   relax_s, anxious_s, adapt_interval_s, targets ("low,high")
  [experiment] budget, repetitions, categories ("name:lo-hi,..."),
               initial_states ("zero,mid,max" or "0-0-0-0-0-0,..."),
               agents ("rl_zero,rl_random,rules,random_walk")

The EDPCGRL_SEED environment variable overrides [run] seed so CI can
pin reruns without editing files.
"""

from __future__ import annotations

import configparser
import os
from dataclasses import dataclass

from .agents import AGENT_KINDS, AgentConfig
from .session import SearchExperimentConfig, SessionProtocol
from .spider import ATTRIBUTE_NAMES, SpiderAttributes
from .subjects import SubjectPopulationConfig, default_population_config

SEED_ENV_VAR = "EDPCGRL_SEED"


class ConfigError(ValueError):
    """Missing or malformed configuration; the message names the key."""


@dataclass(frozen=True)
class RunConfig:
    master_seed: int
    population: SubjectPopulationConfig
    agent: AgentConfig
    rules_empty_policy: str
    protocol: SessionProtocol
    experiment: SearchExperimentConfig


def _parse_state(label: str) -> SpiderAttributes:
    named = {
        "zero": SpiderAttributes.all_zero(),
        "mid": SpiderAttributes(1, 1, 1, 1, 1, 1),
        "max": SpiderAttributes.all_max(),
    }
    label = label.strip()
    if label in named:
        return named[label]
    try:
        return SpiderAttributes.from_tuple(int(v) for v in label.split("-"))
    except (ValueError, TypeError) as exc:
        raise ConfigError(f"experiment.initial_states: bad state {label!r} ({exc})") from None


def _parse_categories(raw: str) -> tuple[tuple[str, int, int], ...]:
    out = []
    for part in raw.split(","):
        try:
            name, bounds = part.split(":")
            lo, hi = bounds.split("-")
            out.append((name.strip(), int(lo), int(hi)))
        except ValueError:
            raise ConfigError(f"experiment.categories: bad entry {part!r}") from None
    return tuple(out)


def load_run_config(path) -> RunConfig:
    if not os.path.exists(path):
        raise ConfigError(f"config file not found: {path}")
    parser = configparser.ConfigParser()
    try:
        parser.read(path)
    except configparser.Error as exc:
        raise ConfigError(f"{path}: {exc}") from None

    def get(section: str, key: str, fallback=None):
        return parser.get(section, key, fallback=fallback)

    env_seed = os.environ.get(SEED_ENV_VAR)
    raw_seed = env_seed if env_seed is not None else get("run", "seed")
    if raw_seed is None:
        raise ConfigError(f"missing key run.seed (or {SEED_ENV_VAR} environment variable)")
    try:
        master_seed = int(raw_seed)
    except ValueError:
        raise ConfigError(f"run.seed: not an integer: {raw_seed!r}") from None

    defaults = default_population_config()
    means = []
    stds = []
    for i, attr in enumerate(ATTRIBUTE_NAMES):
        means.append(float(get("subjects", f"impact.{attr}.mean", defaults.impact_means[i])))
        stds.append(float(get("subjects", f"impact.{attr}.std", defaults.impact_stds[i])))
    habituation = get("subjects", "habituation", "off").strip().lower()
    if habituation not in ("on", "off"):
        raise ConfigError(f"subjects.habituation: expected on|off, got {habituation!r}")
    decay = float(get("subjects", "habituation_decay", 0.98))
    try:
        population = SubjectPopulationConfig(
            impact_means=tuple(means),
            impact_stds=tuple(stds),
            noise_sigma=float(get("subjects", "noise_sigma", defaults.noise_sigma)),
            n_subjects=int(get("subjects", "n_subjects", defaults.n_subjects)),
            master_seed=int(get("subjects", "seed", master_seed)),
            habituation_decay=decay if habituation == "on" else None,
        )
        agent = AgentConfig(
            epsilon=float(get("agents", "epsilon", 0.05)),
            alpha=float(get("agents", "alpha", 0.5)),
            gamma=float(get("agents", "gamma", 0.8)),
        )
    except ValueError as exc:
        raise ConfigError(str(exc)) from None

    empty_policy = get("agents", "rules_empty_policy", "hold").strip()
    if empty_policy not in ("hold", "nudge"):
        raise ConfigError(f"agents.rules_empty_policy: expected hold|nudge, got {empty_policy!r}")

    targets_raw = get("protocol", "targets", "3,7")
    try:
        low_target, high_target = (int(t) for t in targets_raw.split(","))
    except ValueError:
        raise ConfigError(f"protocol.targets: expected 'low,high', got {targets_raw!r}") from None
    try:
        protocol = SessionProtocol(
            relax_s=int(get("protocol", "relax_s", 120)),
            anxious_s=int(get("protocol", "anxious_s", 280)),
            adapt_interval_s=int(get("protocol", "adapt_interval_s", 20)),
            low_target=low_target,
            high_target=high_target,
        )
    except ValueError as exc:
        raise ConfigError(f"protocol: {exc}") from None

    agents_raw = get("experiment", "agents", ",".join(AGENT_KINDS))
    agent_kinds = tuple(a.strip() for a in agents_raw.split(",") if a.strip())
    states_raw = get("experiment", "initial_states", "zero,mid,max")
    initial_states = tuple(_parse_state(s) for s in states_raw.split(","))
    categories = _parse_categories(get("experiment", "categories", "low:1-3,moderate:4-6,high:7-9"))
    try:
        experiment = SearchExperimentConfig(
            categories=categories,
            initial_states=initial_states,
            budget=int(get("experiment", "budget", 30)),
            repetitions=int(get("experiment", "repetitions", 10)),
            agents=agent_kinds,
            agent_config=agent,
            rules_empty_policy=empty_policy,
        )
    except ValueError as exc:
        raise ConfigError(f"experiment: {exc}") from None

    return RunConfig(
        master_seed=master_seed,
        population=population,
        agent=agent,
        rules_empty_policy=empty_policy,
        protocol=protocol,
        experiment=experiment,
    )
