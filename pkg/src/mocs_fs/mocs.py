"""Binary multi-objective coordinate search.

The optimizer keeps only the current Pareto front.  Each iteration picks the
next variable from a random permutation, flips that one bit in every front
member, evaluates the flipped copies, and admits a copy when its parent does
not dominate it (and it does not duplicate an existing genotype).  Survival
reduces the merged set to non-dominated sorting front 0 and truncates by
crowding distance when the front outgrows its cap, so the population never
exceeds twice the cap before survival.

Termination: the evaluation budget is checked after each variable iteration,
or the run is declared converged once the front's genotype set has stayed
unchanged for two full sweeps (2 x number of variables) - at that point
every single-bit flip of every member has been tried without effect.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .data import mask_key, random_mask
from .evaluation import Evaluator, Individual
from .moo import dominates, hypervolume_2d, non_dominated_sort, truncate_by_crowding
from .record import RunRecord

TraceSink = Callable[[int, float], None]


@dataclass
class MocsConfig:
    """Coordinate-search settings.

    ``n`` is both the initial population size and the default front cap;
    ``front_cap`` overrides the cap (use a huge value for an effectively
    uncapped front on small problems).
    """

    n: int = 100
    max_nfc: int = 50_000
    seed: int = 0
    front_cap: int | None = None

    def resolved_cap(self) -> int:
        return self.n if self.front_cap is None else self.front_cap

    def validate(self) -> None:
        if self.n < 1:
            raise ValueError("population size must be at least 1")
        if self.max_nfc < self.n:
            raise ValueError("evaluation budget must cover the initial population")
        if self.resolved_cap() < 1:
            raise ValueError("front cap must be at least 1")


@dataclass
class MocsState:
    """Mutable search state between variable iterations."""

    population: list[Individual]
    permutation: np.ndarray
    cursor: int
    unchanged_iters: int
    n_cap: int
    d: int
    rng: np.random.Generator
    iteration_sizes: list[int] = field(default_factory=list)


def sample_distinct_genotypes(
    rng: np.random.Generator, n: int, d: int
) -> list[np.ndarray]:
    """Binary random sampling with duplicate elimination.

    Each bit is drawn independently with probability 1/2; duplicate
    genotypes are regenerated until the sample is distinct.
    """
    if d < 63 and n > 2**d:
        raise ValueError(f"cannot draw {n} distinct genotypes of length {d}")
    genotypes: list[np.ndarray] = []
    seen: set[bytes] = set()
    while len(genotypes) < n:
        g = random_mask(rng, d)
        key = mask_key(g)
        if key in seen:
            continue
        seen.add(key)
        genotypes.append(g)
    return genotypes


def initialize(cfg: MocsConfig, ev: Evaluator) -> MocsState:
    """Draw, evaluate, and rank the initial population.

    NFC equals ``cfg.n`` afterwards; the surviving population is the
    non-dominated front of the sample.
    """
    cfg.validate()
    d = ev.n_features
    rng = np.random.default_rng(cfg.seed)
    genotypes = sample_distinct_genotypes(rng, cfg.n, d)
    individuals = ev.evaluate_individuals(genotypes)
    front0 = non_dominated_sort([ind.objectives for ind in individuals]).fronts[0]
    return MocsState(
        population=[individuals[i] for i in front0],
        permutation=rng.permutation(d),
        cursor=0,
        unchanged_iters=0,
        n_cap=cfg.resolved_cap(),
        d=d,
        rng=rng,
    )


def mocs_iteration(state: MocsState, ev: Evaluator) -> MocsState:
    """Assess one variable: flip it in every front member and survive.

    Every flipped copy costs one NFC.  A copy is discarded when its parent
    dominates it or when its genotype duplicates a front member (duplicates
    still cost their evaluation).  Survival keeps non-dominated sorting
    front 0 of parents plus admitted copies, truncated by crowding distance
    to the front cap; the unchanged-iteration counter resets whenever the
    surviving genotype set differs from the pre-iteration front.
    """
    index = int(state.permutation[state.cursor])
    population = state.population
    state.iteration_sizes.append(len(population))

    flipped = []
    for member in population:
        child = member.genotype.copy()
        child[index] = not child[index]
        flipped.append(child)
    children = ev.evaluate_individuals(flipped)

    before_keys = {member.key for member in population}
    seen = set(before_keys)
    candidates: list[Individual] = []
    for parent, child in zip(population, children):
        if dominates(parent.objectives, child.objectives):
            continue
        if child.key in seen:
            continue
        seen.add(child.key)
        candidates.append(child)

    merged = population + candidates
    front0 = non_dominated_sort([ind.objectives for ind in merged]).fronts[0]
    survivors = [merged[i] for i in front0]
    if len(survivors) > state.n_cap:
        survivors = truncate_by_crowding(
            survivors, state.n_cap, key=lambda ind: ind.objectives
        )

    after_keys = {member.key for member in survivors}
    state.population = survivors
    state.unchanged_iters = 0 if after_keys != before_keys else state.unchanged_iters + 1
    state.cursor += 1
    if state.cursor >= state.d:
        state.cursor = 0
        state.permutation = state.rng.permutation(state.d)
    return state


def run_mocs(
    cfg: MocsConfig, ev: Evaluator, trace: TraceSink | None = None
) -> tuple[list[Individual], RunRecord]:
    """Run coordinate search to its budget or convergence.

    Emits ``(nfc, train hypervolume)`` after initialization and after every
    variable iteration.  The budget check happens after the iteration's
    evaluations, so the final iteration may overshoot ``max_nfc`` by up to
    the population size; the trace records true NFC values.  Returns the
    final front plus a :class:`RunRecord` with test objectives evaluated
    once per front member.
    """
    started = time.perf_counter()
    state = initialize(cfg, ev)
    record = RunRecord(algorithm="mocs", seed=cfg.seed)

    def emit(nfc: int, hv: float) -> None:
        record.hv_trace.append((nfc, hv))
        if trace is not None:
            trace(nfc, hv)

    emit(ev.nfc, hypervolume_2d([ind.objectives for ind in state.population]))

    if ev.nfc >= cfg.max_nfc:
        record.termination_reason = "budget"
    else:
        while True:
            mocs_iteration(state, ev)
            emit(ev.nfc, hypervolume_2d([ind.objectives for ind in state.population]))
            if ev.nfc > cfg.max_nfc:
                record.termination_reason = "budget"
                break
            if state.unchanged_iters >= 2 * state.d:
                record.termination_reason = "converged"
                break

    record.train_front = [(ind.objectives, ind.genotype) for ind in state.population]
    if ev.test is not None:
        record.test_front = [
            ev.evaluate_on_test(ind.genotype) for ind in state.population
        ]
    record.final_nfc = ev.nfc
    record.wall_time_s = time.perf_counter() - started
    return state.population, record
