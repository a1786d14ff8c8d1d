"""Genetic algorithm for joint customer segmentation and targeting.

A chromosome is 137 bits. The first 12 switch the four candidate quintile
breakpoints on or off for R, F and M (bits 0-3 recency, 4-7 frequency,
8-11 monetary). The active breakpoints cut each variable into intervals and
the segments are the cartesian product, numbered R-major. Bit ``12 + s``
targets segment ``s``; target bits beyond the segment count are ignored.
Fitness is the total LTV of targeted customers (see ``ltv_model``).

Random draws, all from one SplitMix64 stream seeded with ``rng_seed``:

1. initial population: ``population_size * length`` uniforms, row-major,
   bit = ``u < 0.5``;
2. per generation, after copying the elites: one uniform per parent for the
   roulette wheel, all pairs drawn before any crossover;
3. per pair: one uniform against ``crossover_rate``, then, if crossing,
   ``below(length - 1)`` for the cut; then ``length`` uniforms to mutate
   child 1 and ``length`` for child 2 (always drawn, even at rate 0).
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from .errors import EmptyDataset
from .ltv_model import CampaignStrategy, LtvParams, lifetime_values
from .rfm_codec import RFM_FIELDS, QuantileBoundaries, bucketize_array, compute_boundaries
from .rng import SplitMix64

N_VARIABLES = 3
CANDIDATE_BREAKPOINTS = 4
N_ACTIVATION_BITS = N_VARIABLES * CANDIDATE_BREAKPOINTS
MAX_SEGMENTS = (CANDIDATE_BREAKPOINTS + 1) ** N_VARIABLES
CHROMOSOME_LENGTH = N_ACTIVATION_BITS + MAX_SEGMENTS


@dataclass(frozen=True)
class GaConfig:
    population_size: int = 50
    crossover_rate: float = 0.7
    mutation_rate: float = 0.01
    max_generations: int = 100
    stagnation_limit: int = 0  # 0 disables
    elitism_count: int = 1
    rng_seed: int = 0

    def __post_init__(self):
        if self.population_size < 2:
            raise ValueError("population_size must be >= 2")
        if not 0.0 <= self.crossover_rate <= 1.0 or not 0.0 <= self.mutation_rate <= 1.0:
            raise ValueError("crossover_rate and mutation_rate must lie in [0, 1]")
        if self.max_generations < 1:
            raise ValueError("max_generations must be >= 1")
        if not 0 <= self.elitism_count < self.population_size:
            raise ValueError("elitism_count must satisfy 0 <= elitism_count < population_size")
        if self.stagnation_limit < 0:
            raise ValueError("stagnation_limit must be >= 0")


@dataclass(frozen=True)
class Segmentation:
    active: tuple[tuple[float, ...], ...]  # active breakpoint values per variable
    active_mask: tuple[tuple[bool, ...], ...]
    targeted: frozenset[int]

    @property
    def shape(self) -> tuple[int, ...]:
        return tuple(len(a) + 1 for a in self.active)

    @property
    def segment_count(self) -> int:
        return int(np.prod(self.shape))

    def intervals(self, segment: int) -> list[tuple[float, float]]:
        """``(low, high]`` per variable for one segment, with infinite outer edges."""
        out = []
        rest = segment
        for v in reversed(range(N_VARIABLES)):
            rest, i = divmod(rest, self.shape[v])
            edges = (-np.inf,) + self.active[v] + (np.inf,)
            out.append((float(edges[i]), float(edges[i + 1])))
        return out[::-1]

    def assign(self, customers) -> np.ndarray:
        """Segment index of every customer."""
        index = np.zeros(len(customers), dtype=np.int64)
        for v, name in enumerate(RFM_FIELDS):
            values = np.array([getattr(c, name) for c in customers], dtype=np.float64)
            pos = np.searchsorted(np.asarray(self.active[v], dtype=np.float64), values, side="left")
            index = index * self.shape[v] + pos
        return index

    def to_dict(self) -> dict:
        def edge(x):
            return None if np.isinf(x) else x

        return {
            "active_breakpoints": {n: list(a) for n, a in zip(RFM_FIELDS, self.active)},
            "segment_count": self.segment_count,
            "targeted": sorted(self.targeted),
            "segments": [
                {"index": s, "intervals": {n: [edge(lo), edge(hi)] for n, (lo, hi) in zip(RFM_FIELDS, self.intervals(s))}}
                for s in range(self.segment_count)
            ],
        }


def decode_segmentation(chromosome, boundaries: QuantileBoundaries) -> Segmentation:
    bits = np.asarray(chromosome, dtype=np.uint8)
    if bits.shape != (CHROMOSOME_LENGTH,):
        raise ValueError(f"chromosome must have {CHROMOSOME_LENGTH} bits")
    mask = bits[:N_ACTIVATION_BITS].reshape(N_VARIABLES, CANDIDATE_BREAKPOINTS).astype(bool)
    active = tuple(
        tuple(bp for bp, on in zip(cands, row) if on) for cands, row in zip(boundaries.as_list(), mask)
    )
    count = int(np.prod([len(a) + 1 for a in active]))
    target_bits = bits[N_ACTIVATION_BITS:N_ACTIVATION_BITS + count]
    return Segmentation(
        active=active,
        active_mask=tuple(tuple(bool(x) for x in row) for row in mask),
        targeted=frozenset(int(i) for i in np.flatnonzero(target_bits)),
    )


class FitnessContext:
    """Per-customer quintile buckets and LTVs, computed once and reused for every chromosome."""

    def __init__(self, customers, ltv_params: LtvParams, campaign: CampaignStrategy | None = None,
                 boundaries: QuantileBoundaries | None = None):
        customers = list(customers)
        if not customers:
            raise EmptyDataset("EmptyDataset: no customers")
        self.boundaries = boundaries or compute_boundaries(customers)
        self.segment_cost = ltv_params.segment_cost
        self.ltv = lifetime_values(customers, ltv_params, campaign)
        # 0-based count of candidate breakpoints strictly below each value
        self.below = np.stack([
            bucketize_array([getattr(c, f) for c in customers], self.boundaries.for_field(f)) - 1
            for f in RFM_FIELDS
        ])

    def segment_indices(self, chromosome) -> tuple[np.ndarray, int]:
        bits = np.asarray(chromosome, dtype=np.int64)
        mask = bits[:N_ACTIVATION_BITS].reshape(N_VARIABLES, CANDIDATE_BREAKPOINTS)
        prefix = np.concatenate([np.zeros((N_VARIABLES, 1), dtype=np.int64), np.cumsum(mask, axis=1)], axis=1)
        index = np.zeros(self.below.shape[1], dtype=np.int64)
        count = 1
        for v in range(N_VARIABLES):
            n_v = int(prefix[v, -1]) + 1
            index = index * n_v + prefix[v, self.below[v]]
            count *= n_v
        return index, count

    def __call__(self, chromosome) -> int:
        bits = np.asarray(chromosome, dtype=np.int64)
        index, count = self.segment_indices(bits)
        targets = bits[N_ACTIVATION_BITS:N_ACTIVATION_BITS + count]
        return int(self.ltv[targets[index] == 1].sum()) - self.segment_cost * int(targets.sum())

    def population(self, population) -> np.ndarray:
        return np.array([self(ch) for ch in population], dtype=np.int64)


def initialize_population(config: GaConfig, rng: SplitMix64 | None = None,
                          length: int = CHROMOSOME_LENGTH) -> np.ndarray:
    rng = rng if rng is not None else SplitMix64(config.rng_seed)
    u = rng.random_array(config.population_size * length)
    return (u < 0.5).astype(np.uint8).reshape(config.population_size, length)


def evaluate(chromosome, customers, ltv_params: LtvParams, campaign: CampaignStrategy | None = None,
             boundaries: QuantileBoundaries | None = None) -> int:
    return FitnessContext(customers, ltv_params, campaign, boundaries)(chromosome)


def elite_indices(fitnesses: Sequence[float], count: int) -> list[int]:
    """Indices of the ``count`` fittest chromosomes; ties go to the lower index."""
    values = np.asarray(fitnesses).tolist()
    return sorted(range(len(values)), key=lambda i: (-values[i], i))[:count]


def _as_fitness(values) -> np.ndarray:
    values = np.asarray(values)
    return values.astype(np.int64) if values.dtype.kind in "ub" else values


def _roulette_weights(fitnesses) -> np.ndarray:
    f = np.asarray(fitnesses, dtype=np.float64)
    if f.min() < 0:
        f = f - f.min()
    return f


def select_parents(population, fitnesses, rng: SplitMix64, n_pairs: int) -> list[tuple[int, int]]:
    """Roulette-wheel parent pairs, sampled with replacement.

    Negative fitnesses are shifted by the minimum; when every weight is zero
    the draw is uniform.
    """
    size = len(population)
    weights = _roulette_weights(fitnesses)
    cumulative = np.cumsum(weights)
    total = cumulative[-1]
    picks = []
    for _ in range(2 * n_pairs):
        if total <= 0:
            picks.append(rng.below(size))
        else:
            i = int(np.searchsorted(cumulative, rng.random() * total, side="right"))
            picks.append(min(i, size - 1))
    return list(zip(picks[::2], picks[1::2]))


def single_point_crossover(a, b, cut: int):
    a, b = np.asarray(a), np.asarray(b)
    return np.concatenate([a[:cut], b[cut:]]), np.concatenate([b[:cut], a[cut:]])


def crossover(a, b, crossover_rate: float, rng: SplitMix64):
    a, b = np.asarray(a), np.asarray(b)
    if len(a) != len(b):
        raise ValueError("parents must have equal length")
    if rng.random() < crossover_rate and len(a) > 1:
        return single_point_crossover(a, b, 1 + rng.below(len(a) - 1))
    return a.copy(), b.copy()


def mutate(chromosome, mutation_rate: float, rng: SplitMix64) -> np.ndarray:
    bits = np.asarray(chromosome, dtype=np.uint8)
    flips = rng.random_array(len(bits)) < mutation_rate
    return bits ^ flips.astype(np.uint8)


@dataclass
class EvolutionResult:
    best: np.ndarray
    best_fitness: float
    segmentation: Segmentation | None
    history: list[tuple[int, float, float]] = field(default_factory=list)  # (generation, best-ever, mean)


def evolve(config: GaConfig, customers=None, ltv_params: LtvParams | None = None,
           campaign: CampaignStrategy | None = None, boundaries: QuantileBoundaries | None = None,
           fitness_fn: Callable[[np.ndarray], np.ndarray] | None = None,
           length: int = CHROMOSOME_LENGTH) -> EvolutionResult:
    """Run the GA until ``max_generations`` or ``stagnation_limit`` idle generations.

    ``fitness_fn`` replaces the LTV fitness (it maps a population array to a
    fitness array); it is a hook for testing the search itself.
    """
    context = None
    if fitness_fn is None:
        if not customers:
            raise EmptyDataset("EmptyDataset: no customers")
        context = FitnessContext(customers, ltv_params or LtvParams(), campaign, boundaries)
        fitness_fn = context.population
        length = CHROMOSOME_LENGTH

    rng = SplitMix64(config.rng_seed)
    population = initialize_population(config, rng, length)
    fit = _as_fitness(fitness_fn(population))
    lead = elite_indices(fit, 1)[0]
    best, best_fit = population[lead].copy(), fit[lead]
    history = [(0, best_fit, float(fit.mean()))]
    idle = 0

    for generation in range(1, config.max_generations):
        children = [population[i].copy() for i in elite_indices(fit, config.elitism_count)]
        n_pairs = -(-(config.population_size - len(children)) // 2)
        for i, j in select_parents(population, fit, rng, n_pairs):
            c1, c2 = crossover(population[i], population[j], config.crossover_rate, rng)
            children.append(mutate(c1, config.mutation_rate, rng))
            children.append(mutate(c2, config.mutation_rate, rng))
        population = np.stack(children[:config.population_size])
        fit = _as_fitness(fitness_fn(population))
        lead = elite_indices(fit, 1)[0]
        if fit[lead] > best_fit:
            best, best_fit = population[lead].copy(), fit[lead]
            idle = 0
        else:
            idle += 1
        history.append((generation, best_fit, float(fit.mean())))
        if config.stagnation_limit and idle >= config.stagnation_limit:
            break

    segmentation = decode_segmentation(best, context.boundaries) if context is not None else None
    return EvolutionResult(best, best_fit.item(), segmentation, [(g, b.item(), m) for g, b, m in history])
