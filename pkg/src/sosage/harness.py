"""Experiment orchestration: config files, metrics, checkpoints, verification.

Everything here is deterministic plumbing around the symbiosis loop. A config
plus its seed fully determines the metrics CSV and checkpoint bytes; resuming
a checkpoint replays the exact continuation of the original run.
"""

from __future__ import annotations

import hashlib
import json
import os
import re
from dataclasses import dataclass, replace
from pathlib import Path
from typing import Any, Callable, Mapping, Optional, TextIO

from .envs import EnvSpec, make_env
from .errors import DigestMismatch, ParseError, ValidationError
from .hyperstruct import Universe
from .population import Population, ProblemSpec, StallDetector
from .rng import seed_from_hex, seed_to_hex
from .symbio import (
    SAMPLE_RING_FACTOR,
    EvolutionConfig,
    FitnessLedger,
    LoopState,
    NeuronGene,
    decode_payload,
    encode_payload,
    fmt_weight,
    new_loop_state,
    run_symbiosis,
)

METRICS_HEADER = "generation,best_fitness,mean_fitness,pop_order,roster_size,breaks_so_far"
CHECKPOINT_FORMAT = "sosage-checkpoint-v1"
OUTPUT_DIR_ENV = "SOSAGE_OUTPUT_DIR"


# ---------------------------------------------------------------------------
# configuration
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class RunConfig:
    problem: ProblemSpec
    env: EnvSpec
    evolution: EvolutionConfig
    roster_size: int
    population_limit: int
    max_order: int
    breaks_enabled: bool
    reverse_enabled: bool
    output_dir: str
    checkpoint_every: int

    @property
    def seed(self) -> int:
        return self.evolution.seed


@dataclass(frozen=True)
class RunReport:
    solved: bool
    generations_to_solve: Optional[int]
    final_pop_order: int
    metrics_path: str
    checkpoint_path: str
    break_events: int


_TOP_KEYS = {
    "seed", "env", "problem", "evolution", "roster_size", "population_limit",
    "max_order", "breaks_enabled", "reverse_enabled", "output_dir", "checkpoint_every",
}
_ENV_KEYS = {"name", "params"}
_PROBLEM_KEYS = {"problem_order_x", "base_solver_order_r"}
# seed is configured at the top level only
_EVOLUTION_KEYS = {
    "network_size", "assemblies_per_generation", "elite_fraction", "mutation_rate",
    "mutation_sigma", "crossover_rate", "top_m", "dependency_delta",
    "min_cooccur_samples", "window_G", "min_improvement", "break_warmup",
    "max_generations", "w_max",
}


def _reject_unknown(doc: Mapping[str, Any], allowed: set[str], where: str) -> None:
    unknown = sorted(set(doc) - allowed)
    if unknown:
        label = f"{where}.{unknown[0]}" if where else unknown[0]
        raise ValidationError(label, "unknown key")


def _section(doc: Mapping[str, Any], key: str) -> Mapping[str, Any]:
    raw = doc.get(key, {})
    if not isinstance(raw, Mapping):
        raise ValidationError(key, "must be an object")
    return raw


def _as_int(raw: Any, field: str) -> int:
    if isinstance(raw, bool) or not isinstance(raw, int):
        raise ValidationError(field, "must be an integer")
    return raw


def _as_float(raw: Any, field: str) -> float:
    if isinstance(raw, bool) or not isinstance(raw, (int, float)):
        raise ValidationError(field, "must be a number")
    return float(raw)


def _as_bool(raw: Any, field: str) -> bool:
    if not isinstance(raw, bool):
        raise ValidationError(field, "must be true or false")
    return raw


def config_from_dict(doc: Mapping[str, Any]) -> RunConfig:
    """Validate a raw config mapping and fill every default."""
    if not isinstance(doc, Mapping):
        raise ValidationError("config", "top level must be an object")
    _reject_unknown(doc, _TOP_KEYS, "")

    env_doc = _section(doc, "env")
    _reject_unknown(env_doc, _ENV_KEYS, "env")
    if "name" not in env_doc:
        raise ValidationError("env.name", "is required")
    env_name = env_doc["name"]
    env_params = env_doc.get("params", {})
    if not isinstance(env_params, Mapping):
        raise ValidationError("env.params", "must be an object")
    # building the env validates name and params and fills param defaults
    env = make_env(env_name, env_params)

    problem_doc = _section(doc, "problem")
    _reject_unknown(problem_doc, _PROBLEM_KEYS, "problem")
    problem = ProblemSpec(
        problem_order_x=_as_int(problem_doc.get("problem_order_x", 1), "problem.problem_order_x"),
        base_solver_order_r=_as_int(
            problem_doc.get("base_solver_order_r", 1), "problem.base_solver_order_r"
        ),
    )
    if problem.problem_order_x < 1:
        raise ValidationError("problem.problem_order_x", "must be >= 1")
    if problem.base_solver_order_r < 1:
        raise ValidationError("problem.base_solver_order_r", "must be >= 1")

    evo_doc = _section(doc, "evolution")
    _reject_unknown(evo_doc, _EVOLUTION_KEYS, "evolution")
    defaults = EvolutionConfig()
    kwargs: dict[str, Any] = {}
    for name in ("network_size", "assemblies_per_generation", "top_m", "min_cooccur_samples",
                 "window_G", "break_warmup", "max_generations"):
        if name in evo_doc:
            kwargs[name] = _as_int(evo_doc[name], f"evolution.{name}")
    for name in ("elite_fraction", "mutation_rate", "mutation_sigma", "crossover_rate",
                 "dependency_delta", "min_improvement", "w_max"):
        if name in evo_doc:
            kwargs[name] = _as_float(evo_doc[name], f"evolution.{name}")
    kwargs["seed"] = _as_int(doc.get("seed", 0), "seed")
    evolution = replace(defaults, **kwargs)
    evolution.validate()

    roster_size = _as_int(doc.get("roster_size", 24), "roster_size")
    population_limit = _as_int(doc.get("population_limit", 2 * roster_size), "population_limit")
    max_order = _as_int(doc.get("max_order", 8), "max_order")
    breaks_enabled = _as_bool(doc.get("breaks_enabled", True), "breaks_enabled")
    reverse_enabled = _as_bool(doc.get("reverse_enabled", True), "reverse_enabled")
    output_dir = doc.get("output_dir", "runs")
    if not isinstance(output_dir, str) or not output_dir:
        raise ValidationError("output_dir", "must be a non-empty string")
    checkpoint_every = _as_int(doc.get("checkpoint_every", 0), "checkpoint_every")

    if roster_size < 1:
        raise ValidationError("roster_size", "must be >= 1")
    if roster_size > population_limit:
        raise ValidationError("roster_size", "must not exceed population_limit")
    if evolution.network_size > roster_size:
        raise ValidationError("evolution.network_size", "must not exceed roster_size")
    if evolution.network_size > population_limit:
        raise ValidationError("evolution.network_size", "must not exceed population_limit")
    if max_order < problem.base_solver_order_r:
        raise ValidationError("max_order", "must be >= problem.base_solver_order_r")
    if checkpoint_every < 0:
        raise ValidationError("checkpoint_every", "must be >= 0")

    return RunConfig(
        problem=problem,
        env=env.spec,
        evolution=evolution,
        roster_size=roster_size,
        population_limit=population_limit,
        max_order=max_order,
        breaks_enabled=breaks_enabled,
        reverse_enabled=reverse_enabled,
        output_dir=output_dir,
        checkpoint_every=checkpoint_every,
    )


def load_config(path: str | Path) -> RunConfig:
    """Read and validate a JSON config file, defaults filled."""
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as e:
        raise ParseError(f"cannot read config {path}: {e}") from e
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as e:
        raise ParseError(f"{path}: line {e.lineno} column {e.colno}: {e.msg}") from e
    return config_from_dict(doc)


def config_to_json_dict(config: RunConfig) -> dict:
    """The fully defaulted config, echoed in file schema form."""
    evo = {name: getattr(config.evolution, name) for name in sorted(_EVOLUTION_KEYS)}
    return {
        "seed": config.evolution.seed,
        "env": {"name": config.env.name, "params": dict(config.env.params)},
        "problem": {
            "problem_order_x": config.problem.problem_order_x,
            "base_solver_order_r": config.problem.base_solver_order_r,
        },
        "evolution": evo,
        "roster_size": config.roster_size,
        "population_limit": config.population_limit,
        "max_order": config.max_order,
        "breaks_enabled": config.breaks_enabled,
        "reverse_enabled": config.reverse_enabled,
        "output_dir": config.output_dir,
        "checkpoint_every": config.checkpoint_every,
    }


def config_digest(config: RunConfig) -> str:
    canonical = json.dumps(config_to_json_dict(config), sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(canonical.encode("utf-8")).hexdigest()


def with_seed(config: RunConfig, seed: int) -> RunConfig:
    return replace(config, evolution=replace(config.evolution, seed=seed))


def resolve_output_dir(config: RunConfig) -> Path:
    out = Path(os.environ.get(OUTPUT_DIR_ENV) or config.output_dir)
    out.mkdir(parents=True, exist_ok=True)
    return out


# ---------------------------------------------------------------------------
# metrics
# ---------------------------------------------------------------------------

def write_metrics_header(sink: TextIO) -> None:
    sink.write(METRICS_HEADER + "\n")
    sink.flush()

def write_metrics_row(
    sink: TextIO,
    generation: int,
    best_fitness: float,
    mean_fitness: float,
    pop_order: int,
    roster_size: int,
    breaks_so_far: int,
) -> None:
    sink.write(
        f"{generation},{best_fitness:.6f},{mean_fitness:.6f},"
        f"{pop_order},{roster_size},{breaks_so_far}\n"
    )
    sink.flush()


# ---------------------------------------------------------------------------
# checkpoints
# ---------------------------------------------------------------------------

@dataclass
class Checkpoint:
    config: RunConfig
    generation: int
    state: LoopState


def _state_to_json_dict(state: LoopState) -> dict:
    return {
        "universe": state.universe.to_json_dict(payload_encoder=encode_payload),
        "population": state.pop.to_json_dict(),
        "ledger": state.ledger.to_json_dict(),
        "loop": {
            "stall_history": [fmt_weight(v) for v in state.detector.history],
            "reverse_counters": {str(k): v for k, v in sorted(state.reverse_counters.items())},
            "solved_at": state.solved_at,
        },
    }


def checkpoint_to_json_dict(ckpt: Checkpoint) -> dict:
    doc = {
        "format": CHECKPOINT_FORMAT,
        "config": config_to_json_dict(ckpt.config),
        "config_digest": config_digest(ckpt.config),
        "generation": ckpt.generation,
        "rng_state": seed_to_hex(ckpt.config.evolution.seed),
    }
    doc.update(_state_to_json_dict(ckpt.state))
    return doc


def save_checkpoint(path: str | Path, ckpt: Checkpoint) -> None:
    text = json.dumps(checkpoint_to_json_dict(ckpt), sort_keys=True, indent=1)
    Path(path).write_text(text + "\n", encoding="utf-8", newline="\n")


def checkpoint_from_json_dict(doc: Mapping[str, Any]) -> Checkpoint:
    if doc.get("format") != CHECKPOINT_FORMAT:
        raise ParseError(f"not a {CHECKPOINT_FORMAT} document")
    config = config_from_dict(doc["config"])
    stored = doc.get("config_digest", "")
    if config_digest(config) != stored:
        raise DigestMismatch("embedded config does not match its stored digest")
    if seed_from_hex(doc["rng_state"]) != config.evolution.seed:
        raise DigestMismatch("rng state does not match the config seed")
    universe = Universe.from_json_dict(doc["universe"], payload_decoder=decode_payload)
    pop = Population.from_json_dict(doc["population"])
    ledger = FitnessLedger.from_json_dict(doc["ledger"])
    loop = doc["loop"]
    detector = StallDetector(
        window_G=config.evolution.window_G,
        min_improvement=config.evolution.min_improvement,
        history=[float(v) for v in loop["stall_history"]],
    )
    state = LoopState(
        universe=universe,
        problem=config.problem,
        pop=pop,
        ledger=ledger,
        detector=detector,
        reverse_counters={int(k): int(v) for k, v in loop["reverse_counters"].items()},
        solved_at=None if loop.get("solved_at") is None else int(loop["solved_at"]),
    )
    return Checkpoint(config=config, generation=int(doc["generation"]), state=state)


def load_checkpoint(path: str | Path) -> Checkpoint:
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as e:
        raise ParseError(f"cannot read checkpoint {path}: {e}") from e
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as e:
        raise ParseError(f"{path}: line {e.lineno} column {e.colno}: {e.msg}") from e
    return checkpoint_from_json_dict(doc)


# ---------------------------------------------------------------------------
# running
# ---------------------------------------------------------------------------

def build_state(config: RunConfig, env=None) -> LoopState:
    env = env or make_env(config.env.name, config.env.params)
    return new_loop_state(
        problem=config.problem,
        env=env,
        config=config.evolution,
        roster_size=config.roster_size,
        population_limit=config.population_limit,
        max_order=config.max_order,
    )


def _drive(
    config: RunConfig,
    env,
    state: LoopState,
    start_generation: int,
    out_dir: Path,
    metrics_name: str,
    final_name: str,
    progress: Optional[Callable[[str], None]],
) -> RunReport:
    seed = config.evolution.seed
    metrics_path = out_dir / metrics_name
    final_path = out_dir / final_name

    def on_row(row) -> None:
        write_metrics_row(
            sink, row.generation, row.best_fitness, row.mean_fitness,
            row.pop_order, row.roster_size, row.breaks_so_far,
        )
        if progress is not None:
            progress(
                f"gen {row.generation}: best {row.best_fitness:.4f} "
                f"mean {row.mean_fitness:.4f} order {row.pop_order} "
                f"breaks {row.breaks_so_far}"
            )

    def on_checkpoint(generation: int, st: LoopState) -> None:
        save_checkpoint(
            out_dir / f"checkpoint-{seed}-gen{generation}.json",
            Checkpoint(config=config, generation=generation, state=st),
        )

    with open(metrics_path, "w", encoding="utf-8", newline="") as sink:
        write_metrics_header(sink)
        outcome = run_symbiosis(
            env,
            config.evolution,
            state,
            breaks_enabled=config.breaks_enabled,
            reverse_enabled=config.reverse_enabled,
            start_generation=start_generation,
            on_row=on_row,
            on_checkpoint=on_checkpoint,
            checkpoint_every=config.checkpoint_every,
        )
    save_checkpoint(final_path, Checkpoint(config=config, generation=outcome.next_generation, state=state))
    return RunReport(
        solved=outcome.solved,
        generations_to_solve=outcome.generations_to_solve,
        final_pop_order=outcome.final_pop_order,
        metrics_path=str(metrics_path),
        checkpoint_path=str(final_path),
        break_events=len(state.pop.break_log),
    )


def run(config: RunConfig, progress: Optional[Callable[[str], None]] = None) -> RunReport:
    """Execute a fresh run: metrics CSV, periodic checkpoints, final checkpoint."""
    out_dir = resolve_output_dir(config)
    env = make_env(config.env.name, config.env.params)
    state = build_state(config, env)
    seed = config.evolution.seed
    return _drive(
        config, env, state, 0, out_dir,
        f"metrics-{seed}.csv", f"checkpoint-{seed}-final.json", progress,
    )


def resume(ckpt: Checkpoint, progress: Optional[Callable[[str], None]] = None) -> RunReport:
    """Continue a checkpointed run; outputs go to from-generation suffixed files
    so the original run's files stay intact."""
    config = ckpt.config
    out_dir = resolve_output_dir(config)
    env = make_env(config.env.name, config.env.params)
    seed = config.evolution.seed
    g = ckpt.generation
    return _drive(
        config, env, ckpt.state, g, out_dir,
        f"metrics-{seed}-from{g}.csv", f"checkpoint-{seed}-from{g}-final.json", progress,
    )


SWEEP_HEADER = "seed,solved,generations_to_solve,final_pop_order,breaks"


def sweep(
    config: RunConfig, n_seeds: int, progress: Optional[Callable[[str], None]] = None
) -> tuple[list[RunReport], str]:
    """Run n_seeds consecutive seeds starting at the config seed and write a
    one-row-per-seed summary CSV."""
    if n_seeds < 1:
        raise ValidationError("seeds", "must be >= 1")
    out_dir = resolve_output_dir(config)
    base = config.evolution.seed
    reports: list[RunReport] = []
    summary_path = out_dir / "sweep-summary.csv"
    with open(summary_path, "w", encoding="utf-8", newline="") as sink:
        sink.write(SWEEP_HEADER + "\n")
        for i in range(n_seeds):
            cfg = with_seed(config, base + i)
            report = run(cfg, progress)
            reports.append(report)
            gts = "" if report.generations_to_solve is None else report.generations_to_solve
            sink.write(
                f"{base + i},{str(report.solved).lower()},{gts},"
                f"{report.final_pop_order},{report.break_events}\n"
            )
            sink.flush()
            if progress is not None:
                progress(f"seed {base + i}: solved={report.solved} breaks={report.break_events}")
    return reports, str(summary_path)


# ---------------------------------------------------------------------------
# verification
# ---------------------------------------------------------------------------

@dataclass
class InvariantResult:
    name: str
    passed: bool
    detail: str = ""


@dataclass
class VerifyReport:
    results: list[InvariantResult]

    @property
    def passed(self) -> bool:
        return all(r.passed for r in self.results)

    def failures(self) -> list[InvariantResult]:
        return [r for r in self.results if not r.passed]


_OFFSPRING_TAG = re.compile(r"^o\d+:(\d+)(?:x(\d+))?$")
_CLONE_TAG = re.compile(r"^c\d+:(\d+)$")


def verify(ckpt: Checkpoint) -> VerifyReport:
    """Run every structural invariant against the snapshot; failures carry the
    offending ids instead of raising."""
    u = ckpt.state.universe
    pop = ckpt.state.pop
    ledger = ckpt.state.ledger
    env = make_env(ckpt.config.env.name, ckpt.config.env.params)
    w_max = ckpt.config.evolution.w_max
    results: list[InvariantResult] = []

    def record(name: str, bad: list[str]) -> None:
        results.append(InvariantResult(name, not bad, "; ".join(bad[:5])))

    bad = []
    for i, s in u.structures.items():
        if s.order < 1 or s.order > u.max_order:
            bad.append(f"structure {i} order {s.order} outside 1..{u.max_order}")
        if s.order == 1 and s.constituents:
            bad.append(f"primitive {i} has constituents")
        if s.order > 1:
            if not s.constituents:
                bad.append(f"composite {i} has no constituents")
            elif any(c not in u for c in s.constituents):
                bad.append(f"composite {i} references unknown constituents")
            elif s.order != 1 + max(u.structures[c].order for c in s.constituents):
                bad.append(f"composite {i} violates the order law")
    record("construction-order", bad)

    bad = []
    for a, b, level in u.graph.interaction_edges():
        if a not in u or b not in u:
            bad.append(f"interaction ({a},{b}) references unknown structure")
        if level < 1:
            bad.append(f"interaction ({a},{b}) at level {level} < 1")
        if a > b:
            bad.append(f"interaction ({a},{b}) stored unnormalized")
    for i in u.structures:
        if not u.graph.interacts(i, i):
            bad.append(f"reflexivity fails at {i}")
    record("interaction-symmetry", bad)

    interactions = {(a, b, lv) for a, b, lv in u.graph.interaction_edges()}
    bad = []
    for d, e, level in u.graph.dependency_edges():
        key = (min(d, e), max(d, e), level)
        if key not in interactions:
            bad.append(f"dependency ({d},{e}) level {level} lacks its interaction edge")
    record("dependency-implies-interaction", bad)

    bad = []
    for d, e, level in u.graph.dependency_edges():
        gap = u.get(d).order - u.get(e).order
        if gap != 1:
            bad.append(f"dependency ({d},{e}) spans order gap {gap}")
    record("dependency-order-gap", bad)

    bad = []
    if not u.check_acyclic():
        bad.append("constituent relation holds a cycle")
    adjacency: dict[int, list[int]] = {}
    for d, e, _ in u.graph.dependency_edges():
        adjacency.setdefault(d, []).append(e)
    color: dict[int, int] = {}

    def dep_dfs(i: int) -> bool:
        color[i] = 1
        for nxt in adjacency.get(i, ()):
            c = color.get(nxt, 0)
            if c == 1 or (c == 0 and not dep_dfs(nxt)):
                return False
        color[i] = 2
        return True

    for i in adjacency:
        if color.get(i, 0) == 0 and not dep_dfs(i):
            bad.append(f"dependency cycle through {i}")
            break
    record("dependency-acyclic", bad)

    bad = []
    seen_members: set[int] = set()
    for m in pop.members:
        if m not in u:
            bad.append(f"member {m} not in universe")
        if m in seen_members:
            bad.append(f"member {m} listed twice")
        seen_members.add(m)
    if len(pop.members) > pop.population_limit:
        bad.append(f"roster {len(pop.members)} exceeds limit {pop.population_limit}")
    record("roster-membership", bad)

    bad = []
    if pop.pop_order_n < 1:
        bad.append(f"pop_order {pop.pop_order_n} < 1")
    orders = [u.get(m).order for m in pop.members if m in u]
    if orders:
        if max(orders) != pop.top_order:
            bad.append(f"max member order {max(orders)} != top order {pop.top_order}")
        if min(orders) < pop.base_order_r:
            bad.append(f"member order {min(orders)} below base order {pop.base_order_r}")
    record("population-order", bad)

    bad = []
    for event in pop.break_log:
        if event.composite not in u:
            bad.append(f"break composite {event.composite} missing")
            continue
        z = u.get(event.composite)
        if z.constituents != frozenset((event.dependent, event.dependee)):
            bad.append(f"break composite {event.composite} constituents differ from the event pair")
        expected_level = event.level_observed + 1
        for part in (event.dependent, event.dependee):
            if expected_level not in u.graph.dependency_levels(event.composite, part):
                bad.append(
                    f"break composite {event.composite} lacks the level-{expected_level} "
                    f"dependency on {part}"
                )
        if z.order != pop.base_order_r + event.level_observed:
            bad.append(f"break composite {event.composite} order {z.order} off its level")
    record("break-log", bad)

    bad = []
    for event in pop.break_log:
        levels = ledger.pending_levels(event.dependent, event.dependee)
        if event.level_observed not in levels:
            bad.append(
                f"break at gen {event.generation}: level {event.level_observed} not in "
                f"the pending record"
            )
        if event.level_observed - 1 in levels:
            bad.append(
                f"break at gen {event.generation}: pair already pending one level down"
            )
    record("break-log-emergence", bad)

    bad = []
    cap = SAMPLE_RING_FACTOR * ledger.top_m
    for m, stats in ledger.per_member.items():
        if m not in u:
            bad.append(f"ledger member {m} unknown")
        if len(stats.samples) > cap:
            bad.append(f"ledger member {m} holds {len(stats.samples)} samples, cap {cap}")
        if stats.participation_count < len(stats.samples):
            bad.append(f"ledger member {m} participation below sample count")
    for (x, y) in ledger.cooccur:
        if x == y:
            bad.append(f"cooccurrence pair ({x},{y}) is reflexive")
        if x not in u or y not in u:
            bad.append(f"cooccurrence pair ({x},{y}) references unknown structures")
    for (x, y) in ledger.pending:
        if x not in u or y not in u:
            bad.append(f"pending pair ({x},{y}) references unknown structures")
    record("ledger-references", bad)

    bad = []
    for i, s in u.structures.items():
        if s.order != 1:
            continue
        g = s.payload
        if not isinstance(g, NeuronGene):
            bad.append(f"primitive {i} payload is not a genome")
            continue
        if len(g.in_weights) != env.input_dim + 1:
            bad.append(f"genome {i} has {len(g.in_weights)} input weights, want {env.input_dim + 1}")
        if any(not 0 <= slot < env.output_dim for slot, _ in g.out_targets):
            bad.append(f"genome {i} targets an output slot outside 0..{env.output_dim - 1}")
        if g.activation not in ("tanh", "step"):
            bad.append(f"genome {i} activation {g.activation!r}")
        weights = list(g.in_weights) + [w for _, w in g.out_targets]
        if any(abs(w) > w_max for w in weights):
            bad.append(f"genome {i} weight exceeds {w_max}")
    record("genome-shape", bad)

    bad = []
    for i, s in u.structures.items():
        m = _OFFSPRING_TAG.match(s.tag)
        if m is not None:
            parents = [int(p) for p in m.groups() if p is not None]
            for p in parents:
                if p in u and u.get(p).order != s.order:
                    bad.append(f"offspring {i} (order {s.order}) from parent {p} of other order")
            continue
        m = _CLONE_TAG.match(s.tag)
        if m is not None:
            orig = int(m.group(1))
            if orig in u and u.get(orig).order != s.order:
                bad.append(f"clone {i} (order {s.order}) from original {orig} of other order")
    record("lineage-strata", bad)

    return VerifyReport(results)


# ---------------------------------------------------------------------------
# inspection
# ---------------------------------------------------------------------------

def summarize_checkpoint(ckpt: Checkpoint) -> dict:
    """The inspect payload: population order, strata, break table, top scores."""
    u = ckpt.state.universe
    pop = ckpt.state.pop
    ledger = ckpt.state.ledger
    strata = pop.strata(u)
    scored = [
        (m, ledger.score(m)) for m in pop.members if ledger.score(m) is not None
    ]
    scored.sort(key=lambda pair: (-pair[1], pair[0]))
    return {
        "generation": ckpt.generation,
        "pop_order": pop.pop_order_n,
        "roster_size": len(pop.members),
        "strata": {str(order): sorted(members) for order, members in sorted(strata.items())},
        "breaks": [e.to_json_dict() for e in pop.break_log],
        "top_scores": [[m, s] for m, s in scored[:5]],
        "solved_at": ckpt.state.solved_at,
    }


def format_summary_text(summary: Mapping[str, Any]) -> str:
    lines = [
        f"generation: {summary['generation']}",
        f"pop_order: {summary['pop_order']}",
        f"roster_size: {summary['roster_size']}",
        "strata:",
    ]
    for order, members in summary["strata"].items():
        shown = ", ".join(str(m) for m in members)
        lines.append(f"  order {order}: {len(members)} members [{shown}]")
    lines.append("breaks:")
    if not summary["breaks"]:
        lines.append("  (none)")
    else:
        lines.append("  generation  dependent  dependee  composite  reversed")
        for e in summary["breaks"]:
            reversed_mark = "-" if e["reversed_at"] is None else str(e["reversed_at"])
            lines.append(
                f"  {e['generation']:<11} {e['dependent']:<10} {e['dependee']:<9} "
                f"{e['composite']:<10} {reversed_mark}"
            )
    lines.append("top scores:")
    if not summary["top_scores"]:
        lines.append("  (none)")
    for m, s in summary["top_scores"]:
        lines.append(f"  {m}: {s:.6f}")
    solved = summary["solved_at"]
    lines.append(f"solved_at: {'-' if solved is None else solved}")
    return "\n".join(lines) + "\n"
