"""NSGA-II baseline sharing the Pareto machinery and the kNN evaluator.

Standard generational loop: binary tournament selection on (rank, crowding),
single-point crossover, per-bit flip mutation, and environmental selection
of the parent population size from parents plus offspring by front rank then
crowding distance.  Offspring duplicating a live genotype are regenerated a
bounded number of times before being accepted, mirroring the duplicate
elimination used by coordinate search.
"""

from __future__ import annotations

import time
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .data import BitMask, mask_key
from .evaluation import Evaluator, Individual
from .moo import (
    RankedPopulation,
    hypervolume_2d,
    non_dominated_sort,
    truncate_by_crowding,
)
from .record import RunRecord
from .mocs import sample_distinct_genotypes

TraceSink = Callable[[int, float], None]

DUPLICATE_RETRIES = 8


@dataclass
class Nsga2Config:
    """Canonical NSGA-II settings for bitstring genotypes.

    ``mutation_prob`` defaults to ``1 / n_features`` when left ``None``
    (one expected flip per genotype).
    """

    pop_size: int = 100
    max_nfc: int = 50_000
    crossover_prob: float = 0.9
    mutation_prob: float | None = None
    tournament_size: int = 2
    seed: int = 0

    def validate(self) -> None:
        if self.pop_size < 2 or self.pop_size % 2:
            raise ValueError("population size must be even and at least 2")
        if self.max_nfc < self.pop_size:
            raise ValueError("evaluation budget must cover the initial population")
        if not 0.0 <= self.crossover_prob <= 1.0:
            raise ValueError("crossover probability must lie in [0, 1]")
        if self.mutation_prob is not None and not 0.0 <= self.mutation_prob <= 1.0:
            raise ValueError("mutation probability must lie in [0, 1]")
        if self.tournament_size < 1:
            raise ValueError("tournament size must be at least 1")


def tournament_winner(
    entrants: list[int], ranking: RankedPopulation
) -> int:
    """Winner among entrant indices: lowest front rank, ties by larger
    crowding distance, remaining ties by draw order."""
    best = entrants[0]
    for idx in entrants[1:]:
        if ranking.rank[idx] < ranking.rank[best]:
            best = idx
        elif ranking.rank[idx] == ranking.rank[best] and (
            ranking.crowding[idx] > ranking.crowding[best]
        ):
            best = idx
    return best


def tournament_select(
    population: list[Individual],
    ranking: RankedPopulation,
    rng: np.random.Generator,
    tournament_size: int = 2,
) -> Individual:
    """Draw ``tournament_size`` entrants uniformly (with replacement) and
    return the winner."""
    entrants = rng.integers(0, len(population), size=tournament_size).tolist()
    return population[tournament_winner(entrants, ranking)]


def single_point_cross(a: BitMask, b: BitMask, cut: int) -> tuple[BitMask, BitMask]:
    """Swap suffixes at ``cut`` (1 <= cut <= len - 1)."""
    child_a = np.concatenate([a[:cut], b[cut:]])
    child_b = np.concatenate([b[:cut], a[cut:]])
    return child_a, child_b


def spx_crossover(
    a: BitMask,
    b: BitMask,
    rng: np.random.Generator,
    prob: float = 1.0,
) -> tuple[BitMask, BitMask]:
    """Single-point crossover, applied with probability ``prob``.

    When the gate fails, or the genotype has a single bit (no interior cut
    point), the children are copies of the parents.
    """
    if a.size != b.size:
        raise ValueError("parents must have equal length")
    if a.size < 2 or rng.random() >= prob:
        return a.copy(), b.copy()
    cut = int(rng.integers(1, a.size))
    return single_point_cross(a, b, cut)


def bitflip_mutate(
    genotype: BitMask, prob: float, rng: np.random.Generator
) -> BitMask:
    """Flip each bit independently with probability ``prob``."""
    if not 0.0 <= prob <= 1.0:
        raise ValueError("mutation probability must lie in [0, 1]")
    return genotype ^ (rng.random(genotype.size) < prob)


def _environmental_selection(
    merged: list[Individual], pop_size: int
) -> list[Individual]:
    """Fill the next population front by front; split the partial front by
    crowding.  The selected set is rank-prefix-closed and has exactly
    ``pop_size`` members."""
    ranking = non_dominated_sort([ind.objectives for ind in merged])
    selected: list[Individual] = []
    for front in ranking.fronts:
        members = [merged[i] for i in front]
        if len(selected) + len(members) <= pop_size:
            selected.extend(members)
            if len(selected) == pop_size:
                break
        else:
            selected.extend(
                truncate_by_crowding(
                    members, pop_size - len(selected), key=lambda ind: ind.objectives
                )
            )
            break
    return selected


def run_nsga2(
    cfg: Nsga2Config, ev: Evaluator, trace: TraceSink | None = None
) -> tuple[list[Individual], RunRecord]:
    """Run the generational loop until the evaluation budget is reached.

    Each generation creates ``pop_size`` offspring (every accepted offspring
    costs one NFC), merges them with the parents, and selects the next
    population.  The trace gets one ``(nfc, hypervolume of front 0)`` point
    for the initial population and per generation; the loop stops once
    ``nfc >= max_nfc``.  Returns the final front-0 individuals plus the run
    record with their test objectives.
    """
    cfg.validate()
    started = time.perf_counter()
    d = ev.n_features
    mutation_prob = 1.0 / d if cfg.mutation_prob is None else cfg.mutation_prob
    rng = np.random.default_rng(cfg.seed)
    record = RunRecord(algorithm="nsga2", seed=cfg.seed)

    population = ev.evaluate_individuals(sample_distinct_genotypes(rng, cfg.pop_size, d))
    ranking = non_dominated_sort([ind.objectives for ind in population])

    def emit() -> None:
        front0 = [population[i].objectives for i in ranking.fronts[0]]
        hv = hypervolume_2d(front0)
        record.hv_trace.append((ev.nfc, hv))
        if trace is not None:
            trace(ev.nfc, hv)

    emit()

    while ev.nfc < cfg.max_nfc:
        live_keys = {ind.key for ind in population}
        offspring_genotypes: list[BitMask] = []
        while len(offspring_genotypes) < cfg.pop_size:
            pair = _make_offspring_pair(
                population, ranking, rng, cfg, mutation_prob, live_keys
            )
            for child in pair:
                if len(offspring_genotypes) < cfg.pop_size:
                    offspring_genotypes.append(child)
                    live_keys.add(mask_key(child))
        offspring = ev.evaluate_individuals(offspring_genotypes)
        population = _environmental_selection(population + offspring, cfg.pop_size)
        ranking = non_dominated_sort([ind.objectives for ind in population])
        emit()

    record.termination_reason = "budget"
    front = [population[i] for i in ranking.fronts[0]]
    record.train_front = [(ind.objectives, ind.genotype) for ind in front]
    if ev.test is not None:
        record.test_front = [ev.evaluate_on_test(ind.genotype) for ind in front]
    record.final_nfc = ev.nfc
    record.wall_time_s = time.perf_counter() - started
    return front, record


def _make_offspring_pair(
    population: list[Individual],
    ranking: RankedPopulation,
    rng: np.random.Generator,
    cfg: Nsga2Config,
    mutation_prob: float,
    live_keys: set[bytes],
) -> tuple[BitMask, BitMask]:
    """Select, cross, and mutate one pair; regenerate up to a bounded number
    of retries when a child duplicates a live genotype, then accept."""
    for _ in range(DUPLICATE_RETRIES + 1):
        parent_a = tournament_select(population, ranking, rng, cfg.tournament_size)
        parent_b = tournament_select(population, ranking, rng, cfg.tournament_size)
        child_a, child_b = spx_crossover(
            parent_a.genotype, parent_b.genotype, rng, cfg.crossover_prob
        )
        child_a = bitflip_mutate(child_a, mutation_prob, rng)
        child_b = bitflip_mutate(child_b, mutation_prob, rng)
        key_a, key_b = mask_key(child_a), mask_key(child_b)
        if key_a not in live_keys and key_b not in live_keys and key_a != key_b:
            break
    return child_a, child_b
