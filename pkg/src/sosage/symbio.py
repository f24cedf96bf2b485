"""Symbiotic neuro-evolution over the structure roster.

Order-1 members carry neuron genomes. Each generation samples roster members
into complete single-hidden-layer networks (composites are sampled as one
unit and flattened to their neurons for wiring), evaluates them on the
environment, and distributes the concrete network fitness back to the
members that took part. Co-occurrence statistics over the top stratum feed
dependency detection; a stalled population may then break a dependent pair
into a composite that is evolved as an indivisible unit from then on.
Evolution is stratified: genomes only ever cross within their own order.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import Any, Callable, Mapping, Optional, Sequence

import numpy as np

from .envs import Episode
from .errors import (
    DimensionMismatch,
    LimitExceeded,
    NoScores,
    RosterTooSmall,
    UnevaluatedAssembly,
    ValidationError,
)
from .hyperstruct import StructureId, Universe
from .population import (
    PendingDependency,
    Population,
    ProblemSpec,
    StallDetector,
    apply_break,
    apply_reverse_break,
    can_break,
    goal_reached,
    init_population,
)
from .rng import substream

# ring capacity for per-member fitness samples, in units of top_m
SAMPLE_RING_FACTOR = 4

NEG_INF = float("-inf")


def fmt_weight(x: float) -> str:
    """Decimal string with 17 significant digits; round-trips float64 exactly."""
    return format(float(x), ".17g")


# ---------------------------------------------------------------------------
# genomes and networks
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class NeuronGene:
    """One hidden neuron: input weights (bias last) and output connections."""

    unit_id: int
    in_weights: tuple[float, ...]
    out_targets: tuple[tuple[int, float], ...]
    activation: str = "tanh"  # "tanh" | "step"

    def to_json_dict(self) -> dict:
        return {
            "unit_id": self.unit_id,
            "in_weights": [fmt_weight(w) for w in self.in_weights],
            "out_targets": [[slot, fmt_weight(w)] for slot, w in self.out_targets],
            "activation": self.activation,
        }

    @classmethod
    def from_json_dict(cls, row: Mapping[str, Any]) -> "NeuronGene":
        return cls(
            unit_id=int(row["unit_id"]),
            in_weights=tuple(float(w) for w in row["in_weights"]),
            out_targets=tuple((int(slot), float(w)) for slot, w in row["out_targets"]),
            activation=str(row["activation"]),
        )


def encode_payload(payload: Any) -> Any:
    return payload.to_json_dict() if isinstance(payload, NeuronGene) else payload


def decode_payload(raw: Any) -> Any:
    if isinstance(raw, dict) and {"unit_id", "in_weights", "out_targets"} <= raw.keys():
        return NeuronGene.from_json_dict(raw)
    return raw


def random_genome(
    unit_id: int, input_dim: int, output_dim: int, rng: np.random.Generator
) -> NeuronGene:
    in_weights = tuple(float(w) for w in rng.uniform(-1.0, 1.0, size=input_dim + 1))
    out_targets = tuple((k, float(rng.uniform(-1.0, 1.0))) for k in range(output_dim))
    return NeuronGene(unit_id=unit_id, in_weights=in_weights, out_targets=out_targets)


def _clamp(w: float, w_max: float) -> float:
    return max(-w_max, min(w_max, w))


def mutate_genome(
    gene: NeuronGene, rng: np.random.Generator, rate: float, sigma: float, w_max: float
) -> NeuronGene:
    def jiggle(w: float) -> float:
        if rng.random() < rate:
            return _clamp(w + float(rng.normal(0.0, sigma)), w_max)
        return w

    return replace(
        gene,
        in_weights=tuple(jiggle(w) for w in gene.in_weights),
        out_targets=tuple((slot, jiggle(w)) for slot, w in gene.out_targets),
    )


def crossover_genomes(a: NeuronGene, b: NeuronGene, rng: np.random.Generator) -> NeuronGene:
    """Uniform crossover position-by-position; topology slots are shared."""
    in_weights = tuple(
        aw if rng.random() < 0.5 else bw for aw, bw in zip(a.in_weights, b.in_weights)
    )
    out_targets = tuple(
        (sa, wa if rng.random() < 0.5 else wb)
        for (sa, wa), (_, wb) in zip(a.out_targets, b.out_targets)
    )
    return replace(a, in_weights=in_weights, out_targets=out_targets)


def _activate(kind: str, x: float) -> float:
    if kind == "tanh":
        return math.tanh(x)
    return 1.0 if x >= 0.0 else -1.0  # "step"


def net_forward(wiring: Sequence[NeuronGene], obs: Sequence[float], output_dim: int) -> list[float]:
    out = [0.0] * output_dim
    for gene in wiring:
        pre = gene.in_weights[-1]
        for w, v in zip(gene.in_weights, obs):
            pre += w * v
        h = _activate(gene.activation, pre)
        for slot, w in gene.out_targets:
            out[slot] += w * h
    return out


# ---------------------------------------------------------------------------
# assemblies
# ---------------------------------------------------------------------------

@dataclass
class Assembly:
    """A complete evaluable network sampled from the roster."""

    participants: tuple[StructureId, ...]
    wiring: tuple[NeuronGene, ...]
    fitness: Optional[float] = None
    solved: bool = False
    episodes: tuple[Episode, ...] = ()


def flatten_to_genes(universe: Universe, participants: Sequence[StructureId]) -> tuple[NeuronGene, ...]:
    """All order-1 descendants of the participants, each wired once, in
    first-encounter depth-first order."""
    seen: set[StructureId] = set()
    genes: list[NeuronGene] = []

    def visit(i: StructureId) -> None:
        if i in seen:
            return
        seen.add(i)
        s = universe.get(i)
        if s.order == 1:
            if not isinstance(s.payload, NeuronGene):
                raise TypeError(f"structure {i} payload is not a neuron genome")
            genes.append(s.payload)
        else:
            for c in sorted(s.constituents):
                visit(c)

    for p in participants:
        visit(p)
    return tuple(genes)


# ---------------------------------------------------------------------------
# fitness ledger
# ---------------------------------------------------------------------------

@dataclass
class _MemberStats:
    samples: list[float] = field(default_factory=list)
    participation_count: int = 0


@dataclass
class _CooccurCell:
    both_count: int = 0
    both_total: float = 0.0
    solo_count: int = 0
    solo_total: float = 0.0


class FitnessLedger:
    """Per-member fitness statistics, co-occurrence tallies, and pending
    equal-order dependency observations."""

    def __init__(self, top_m: int) -> None:
        self.top_m = top_m
        self.per_member: dict[StructureId, _MemberStats] = {}
        self.cooccur: dict[tuple[StructureId, StructureId], _CooccurCell] = {}
        self.pending: dict[tuple[StructureId, StructureId], set[int]] = {}

    # --- member credit ---

    def credit(self, member: StructureId, fitness: float) -> None:
        stats = self.per_member.setdefault(member, _MemberStats())
        stats.samples.append(fitness)
        cap = SAMPLE_RING_FACTOR * self.top_m
        if len(stats.samples) > cap:
            del stats.samples[0]
        stats.participation_count += 1

    def score(self, member: StructureId) -> Optional[float]:
        stats = self.per_member.get(member)
        if stats is None or not stats.samples:
            return None
        best = sorted(stats.samples, reverse=True)[: self.top_m]
        return sum(best) / len(best)

    # --- co-occurrence ---

    def tally_cooccurrence(
        self, participants: set[StructureId], fitness: float, cohort: Sequence[StructureId]
    ) -> None:
        present = [m for m in cohort if m in participants]
        for x in present:
            for y in cohort:
                if y == x:
                    continue
                cell = self.cooccur.setdefault((x, y), _CooccurCell())
                if y in participants:
                    cell.both_count += 1
                    cell.both_total += fitness
                else:
                    cell.solo_count += 1
                    cell.solo_total += fitness

    # --- pending dependency observations ---

    def record_pending(self, dependent: StructureId, dependee: StructureId, level: int) -> None:
        self.pending.setdefault((dependent, dependee), set()).add(level)

    def pending_levels(self, dependent: StructureId, dependee: StructureId) -> frozenset[int]:
        return frozenset(self.pending.get((dependent, dependee), ()))

    # --- serialization ---

    def to_json_dict(self) -> dict:
        return {
            "top_m": self.top_m,
            "per_member": {
                str(m): {
                    "fitness_samples": [fmt_weight(s) for s in stats.samples],
                    "participation_count": stats.participation_count,
                }
                for m, stats in sorted(self.per_member.items())
            },
            "cooccur": {
                f"{x},{y}": {
                    "with_both": [cell.both_count, fmt_weight(cell.both_total)],
                    "with_x_only": [cell.solo_count, fmt_weight(cell.solo_total)],
                }
                for (x, y), cell in sorted(self.cooccur.items())
            },
            "pending": {
                f"{x},{y}": sorted(levels) for (x, y), levels in sorted(self.pending.items())
            },
        }

    @classmethod
    def from_json_dict(cls, doc: Mapping[str, Any]) -> "FitnessLedger":
        ledger = cls(top_m=int(doc["top_m"]))
        for key, row in doc["per_member"].items():
            stats = _MemberStats(
                samples=[float(s) for s in row["fitness_samples"]],
                participation_count=int(row["participation_count"]),
            )
            ledger.per_member[int(key)] = stats
        for key, row in doc["cooccur"].items():
            x, y = (int(p) for p in key.split(","))
            bc, bt = row["with_both"]
            sc, st = row["with_x_only"]
            ledger.cooccur[(x, y)] = _CooccurCell(int(bc), float(bt), int(sc), float(st))
        for key, levels in doc["pending"].items():
            x, y = (int(p) for p in key.split(","))
            ledger.pending[(x, y)] = {int(lv) for lv in levels}
        return ledger


# ---------------------------------------------------------------------------
# evolution configuration
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class EvolutionConfig:
    network_size: int = 3
    assemblies_per_generation: int = 30
    elite_fraction: float = 0.25
    mutation_rate: float = 0.3
    mutation_sigma: float = 0.5
    crossover_rate: float = 0.7
    top_m: int = 5
    dependency_delta: float = 0.25
    min_cooccur_samples: int = 6
    window_G: int = 8
    min_improvement: float = 0.01
    break_warmup: int = 0
    max_generations: int = 200
    seed: int = 0
    w_max: float = 5.0

    def validate(self, prefix: str = "evolution") -> None:
        def check(cond: bool, name: str, rule: str) -> None:
            if not cond:
                raise ValidationError(f"{prefix}.{name}", rule)

        check(self.network_size >= 1, "network_size", "must be >= 1")
        check(self.assemblies_per_generation >= 1, "assemblies_per_generation", "must be >= 1")
        check(0.0 < self.elite_fraction < 1.0, "elite_fraction", "must lie in (0, 1)")
        check(0.0 <= self.mutation_rate <= 1.0, "mutation_rate", "must lie in [0, 1]")
        check(self.mutation_sigma > 0.0, "mutation_sigma", "must be > 0")
        check(0.0 <= self.crossover_rate <= 1.0, "crossover_rate", "must lie in [0, 1]")
        check(self.top_m >= 1, "top_m", "must be >= 1")
        check(self.dependency_delta > 0.0, "dependency_delta", "must be > 0")
        check(self.min_cooccur_samples >= 1, "min_cooccur_samples", "must be >= 1")
        check(self.window_G >= 1, "window_G", "must be >= 1")
        check(self.min_improvement >= 0.0, "min_improvement", "must be >= 0")
        check(self.break_warmup >= 0, "break_warmup", "must be >= 0")
        check(self.max_generations >= 0, "max_generations", "must be >= 0")
        check(0 <= self.seed < 2 ** 64, "seed", "must be an unsigned 64-bit integer")
        check(self.w_max > 0.0, "w_max", "must be > 0")


# ---------------------------------------------------------------------------
# generation phases
# ---------------------------------------------------------------------------

def assemble(
    universe: Universe,
    pop: Population,
    config: EvolutionConfig,
    rng: np.random.Generator,
) -> list[Assembly]:
    """Sample the generation's assemblies.

    Members are dealt from one shuffle into the first assemblies so every
    roster member appears at least once per generation; remaining assemblies
    are uniform without-replacement samples. Composites count as one sampled
    unit and are flattened to their neurons for wiring.
    """
    roster = list(pop.members)
    k = config.network_size
    if len(roster) < k:
        raise RosterTooSmall(f"roster of {len(roster)} cannot fill networks of size {k}")
    order = [roster[i] for i in rng.permutation(len(roster))]
    assemblies: list[Assembly] = []
    cover = -(-len(roster) // k)  # ceil
    for a in range(min(cover, config.assemblies_per_generation)):
        chunk = order[a * k: (a + 1) * k]
        if len(chunk) < k:
            pool = [m for m in roster if m not in chunk]
            extra = rng.choice(len(pool), size=k - len(chunk), replace=False)
            chunk = chunk + [pool[int(i)] for i in extra]
        assemblies.append(Assembly(tuple(chunk), flatten_to_genes(universe, chunk)))
    while len(assemblies) < config.assemblies_per_generation:
        picks = rng.choice(len(roster), size=k, replace=False)
        chunk = [roster[int(i)] for i in picks]
        assemblies.append(Assembly(tuple(chunk), flatten_to_genes(universe, chunk)))
    return assemblies


def evaluate(
    assembly: Assembly, env, episodes: int, rng: np.random.Generator
) -> float:
    """Roll out the assembly's network and record its fitness: the summed
    episodic return over the evaluation batch."""
    for gene in assembly.wiring:
        if len(gene.in_weights) != env.input_dim + 1:
            raise DimensionMismatch(
                f"genome expects {len(gene.in_weights) - 1} inputs, env has {env.input_dim}"
            )
        for slot, _ in gene.out_targets:
            if not 0 <= slot < env.output_dim:
                raise DimensionMismatch(f"output slot {slot} outside env outputs {env.output_dim}")
    runs: list[Episode] = []
    total = 0.0
    for ep_idx in range(episodes):
        state = env.reset(ep_idx)
        steps: list[tuple[tuple[float, ...], int, float]] = []
        terminal = False
        while not terminal and len(steps) < env.max_steps:
            obs = env.observation(state)
            action = env.select_action(net_forward(assembly.wiring, obs, env.output_dim))
            state, reward, terminal = env.step(state, action)
            steps.append((obs, action, reward))
        ep = Episode(steps=tuple(steps), terminal=terminal, return_value=sum(r for _, _, r in steps))
        runs.append(ep)
        total += ep.return_value
    assembly.episodes = tuple(runs)
    assembly.fitness = total
    assembly.solved = bool(runs) and all(env.succeeded(ep) for ep in runs)
    return total


def distribute_fitness(
    ledger: FitnessLedger,
    assemblies: Sequence[Assembly],
    cohort: Sequence[StructureId] = (),
) -> None:
    """Credit every participant with its assemblies' fitnesses and tally
    co-occurrence over the dependency cohort (the top stratum).

    Members in no assembly this generation are untouched, so their score is
    exactly what it was before.
    """
    for assembly in assemblies:
        if assembly.fitness is None:
            raise UnevaluatedAssembly(f"assembly {assembly.participants} has no fitness")
    for assembly in assemblies:
        present = set(assembly.participants)
        for member in assembly.participants:
            ledger.credit(member, assembly.fitness)
        if cohort:
            ledger.tally_cooccurrence(present, assembly.fitness, cohort)


def detect_dependency(
    universe: Universe,
    ledger: FitnessLedger,
    pop: Population,
    config: EvolutionConfig,
) -> list[tuple[StructureId, StructureId]]:
    """Equal-order pairs (X, Y) in the top stratum where X's assemblies do
    better with Y present by at least dependency_delta, both cells having
    enough samples. Sorted; pure."""
    top = pop.top_order
    stratum = {m for m in pop.members if universe.structural_order(m) == top}
    pairs: list[tuple[StructureId, StructureId]] = []
    for (x, y), cell in ledger.cooccur.items():
        if x not in stratum or y not in stratum:
            continue
        if cell.both_count < config.min_cooccur_samples or cell.solo_count < config.min_cooccur_samples:
            continue
        gain = cell.both_total / cell.both_count - cell.solo_total / cell.solo_count
        if gain >= config.dependency_delta:
            pairs.append((x, y))
    return sorted(pairs)


def _clone_composite(
    universe: Universe,
    original: StructureId,
    mutate: Callable[[NeuronGene], NeuronGene],
    generation: int,
) -> StructureId:
    """Deep-copy a composite with mutated leaf genomes and fresh ids at every
    level; internal dependency edges are copied at their recorded levels.
    Every cloned node is tagged with its own original so lineage stays
    auditable per stratum."""
    s = universe.get(original)
    tag = f"c{generation}:{original}"
    if s.order == 1:
        gene = mutate(s.payload)
        gene = replace(gene, unit_id=universe.peek_next_id())
        return universe.add_primitive(gene, tag=tag)
    clones = {c: _clone_composite(universe, c, mutate, generation) for c in sorted(s.constituents)}
    new_id = universe.construct(set(clones.values()), tag=tag)
    for c, c_clone in clones.items():
        for level in universe.graph.dependency_levels(original, c):
            universe.declare_dependency(new_id, c_clone, level)
    return new_id


def evolve_generation(
    universe: Universe,
    pop: Population,
    ledger: FitnessLedger,
    config: EvolutionConfig,
    rng: np.random.Generator,
    generation: int = 0,
) -> None:
    """Replace each stratum's non-elites with offspring of its elites.

    Order-1 offspring come from uniform crossover of two elites (probability
    crossover_rate, else a clone) plus Gaussian weight mutation. Higher-order
    members are cloned whole: inner genomes mutate together and never cross
    with outsiders. Offspring take over the replaced roster slots under fresh
    ids; member counts and orders per stratum are preserved.
    """
    scores = {m: ledger.score(m) for m in pop.members}
    if all(s is None for s in scores.values()):
        raise NoScores("no roster member has a fitness score; distribute fitness first")

    def rank_key(m: StructureId):
        s = scores[m]
        return (-(s if s is not None else NEG_INF), m)

    strata = pop.strata(universe)
    slot_of = {m: i for i, m in enumerate(pop.members)}
    for order in sorted(strata):
        members = strata[order]
        ranked = sorted(members, key=rank_key)
        n_elite = max(1, int(config.elite_fraction * len(members)))
        elites = ranked[:n_elite]
        for m in ranked[n_elite:]:
            if order == 1:
                if rng.random() < config.crossover_rate and len(elites) >= 2:
                    pa, pb = (elites[int(i)] for i in rng.choice(len(elites), size=2, replace=False))
                    child = crossover_genomes(universe.get(pa).payload, universe.get(pb).payload, rng)
                    tag = f"o{generation}:{pa}x{pb}"
                else:
                    pa = elites[int(rng.integers(len(elites)))]
                    child = universe.get(pa).payload
                    tag = f"o{generation}:{pa}"
                child = mutate_genome(child, rng, config.mutation_rate, config.mutation_sigma, config.w_max)
                child = replace(child, unit_id=universe.peek_next_id())
                new_id = universe.add_primitive(child, tag=tag)
            else:
                pa = elites[int(rng.integers(len(elites)))]
                new_id = _clone_composite(
                    universe,
                    pa,
                    lambda g: mutate_genome(g, rng, config.mutation_rate, config.mutation_sigma, config.w_max),
                    generation,
                )
            pop.members[slot_of[m]] = new_id


# ---------------------------------------------------------------------------
# the symbiosis loop
# ---------------------------------------------------------------------------

@dataclass
class LoopState:
    """Everything the loop mutates; checkpoints snapshot exactly this."""

    universe: Universe
    problem: ProblemSpec
    pop: Population
    ledger: FitnessLedger
    detector: StallDetector
    reverse_counters: dict[StructureId, int] = field(default_factory=dict)
    solved_at: Optional[int] = None


@dataclass
class GenerationRow:
    generation: int
    best_fitness: float
    mean_fitness: float
    pop_order: int
    roster_size: int
    breaks_so_far: int


@dataclass
class LoopOutcome:
    solved: bool
    generations_to_solve: Optional[int]
    final_pop_order: int
    next_generation: int
    rows: list[GenerationRow]


def new_loop_state(
    problem: ProblemSpec,
    env,
    config: EvolutionConfig,
    roster_size: int,
    population_limit: int,
    max_order: int,
) -> LoopState:
    """Fresh universe + homogeneous initial population of random genomes."""
    universe = Universe(max_order=max_order)
    rng = substream(config.seed, "init")
    genomes = [
        random_genome(k, env.input_dim, env.output_dim, rng) for k in range(roster_size)
    ]
    pop = init_population(universe, problem, genomes, population_limit)
    ledger = FitnessLedger(top_m=config.top_m)
    detector = StallDetector(window_G=config.window_G, min_improvement=config.min_improvement)
    return LoopState(universe=universe, problem=problem, pop=pop, ledger=ledger, detector=detector)


def run_symbiosis(
    env,
    config: EvolutionConfig,
    state: LoopState,
    breaks_enabled: bool = True,
    reverse_enabled: bool = True,
    start_generation: int = 0,
    on_row: Optional[Callable[[GenerationRow], None]] = None,
    on_checkpoint: Optional[Callable[[int, LoopState], None]] = None,
    checkpoint_every: int = 0,
) -> LoopOutcome:
    """Drive generations until the goal is reached or the budget runs out.

    Each generation: assemble, evaluate, distribute fitness, then (stall
    permitting) detect dependencies and apply at most one break, then the
    reverse-break safeguard, then stratified evolution. The checkpoint hook
    fires at the start of a generation so a resumed run replays it exactly.
    """
    universe, pop, ledger, detector = state.universe, state.pop, state.ledger, state.detector
    rows: list[GenerationRow] = []
    generation = start_generation
    while generation < config.max_generations:
        if state.solved_at is not None:
            break  # resumed a finished run
        if on_checkpoint is not None and checkpoint_every > 0 and generation > start_generation \
                and (generation % checkpoint_every) == 0:
            on_checkpoint(generation, state)

        assemblies = assemble(universe, pop, config, substream(config.seed, "assemble", generation))
        for idx, assembly in enumerate(assemblies):
            evaluate(assembly, env, env.eval_episodes, substream(config.seed, "evaluate", generation, idx))
        top = pop.top_order
        cohort = [m for m in pop.members if universe.structural_order(m) == top]
        distribute_fitness(ledger, assemblies, cohort)

        fitnesses = [a.fitness for a in assemblies]
        best = max(fitnesses)
        mean = sum(fitnesses) / len(fitnesses)
        # the detector watches the running best so sampling noise in a single
        # generation's best cannot mask a stall; resets restart the reference
        prior = detector.history[-1] if detector.history else NEG_INF
        detector.update(max(best, prior))
        solved_now = any(a.solved for a in assemblies)
        done = goal_reached(state.problem, pop, solved_now)
        if done and state.solved_at is None:
            state.solved_at = generation

        if not done:
            # breaks wait out the warmup: a population still in its first
            # selection sweeps has not failed, it just has not started
            if breaks_enabled and generation >= config.break_warmup and detector.stalled():
                pairs = detect_dependency(universe, ledger, pop, config)
                n = pop.pop_order_n
                for x, y in pairs:
                    ledger.record_pending(x, y, n)
                candidates = [
                    PendingDependency(x, y, ledger.pending_levels(x, y)) for x, y in pairs
                ]
                selected = can_break(universe, pop, candidates)
                if selected is not None:
                    apply_break(universe, pop, selected[0], selected[1], generation)
                    detector.reset()
            if reverse_enabled:
                _maybe_reverse(state, config, generation)

        row = GenerationRow(
            generation=generation,
            best_fitness=best,
            mean_fitness=mean,
            pop_order=pop.pop_order_n,
            roster_size=len(pop.members),
            breaks_so_far=len(pop.break_log),
        )
        rows.append(row)
        if on_row is not None:
            on_row(row)
        generation += 1
        if done:
            break
        evolve_generation(universe, pop, ledger, config, substream(config.seed, "evolve", row.generation), row.generation)

    return LoopOutcome(
        solved=state.solved_at is not None,
        generations_to_solve=state.solved_at,
        final_pop_order=pop.pop_order_n,
        next_generation=generation,
        rows=rows,
    )


def _maybe_reverse(state: LoopState, config: EvolutionConfig, generation: int) -> None:
    """Dissolve at most one composite stuck in the roster's bottom quartile
    for window_G straight generations.

    The cohort is the whole roster, not the composite's own order stratum: a
    break-created composite usually sits alone at its order, where a
    within-stratum quartile is vacuous and a useless composite would survive
    forever. Ranking it against every member it competes with for assembly
    slots makes the safeguard selective: composites that pull their weight
    stay, the rest dissolve. Only break-created composites with a live event
    qualify; rosters below 4 members have no bottom quartile."""
    universe, pop, ledger = state.universe, state.pop, state.ledger
    live = {e.composite for e in pop.break_log if e.reversed_at is None}
    counters = state.reverse_counters
    in_roster = set(pop.members)
    for stale in [c for c in counters if c not in in_roster or c not in live]:
        del counters[stale]
    size = len(pop.members)
    threshold = -(-3 * size // 4)  # ceil(3s/4); ranks below it are safe
    ranked = sorted(
        pop.members,
        key=lambda m: (-(ledger.score(m) if ledger.score(m) is not None else NEG_INF), m),
    )
    for rank, m in enumerate(ranked):
        if m not in live:
            continue
        if rank >= threshold:
            counters[m] = counters.get(m, 0) + 1
        else:
            counters.pop(m, None)
    due = sorted(c for c, n in counters.items() if n >= config.window_G)
    for composite in due:
        try:
            apply_reverse_break(universe, pop, composite, generation)
        except LimitExceeded:
            continue  # roster limit blocks restoration; retry next generation
        del counters[composite]
        state.detector.reset()
        break
