"""Per-subcarrier power allocation: continuous GA, equal split and PSO.

Candidate solutions are gene vectors in [0, 1]^K. A gene vector is mapped
to physical powers by scaling it so that the subcarrier budget
``sum_k p_k ||b_k||^2 = P_T / C`` holds with equality. Its fitness is the
subcarrier sum-rate at those powers.

The genetic operators accept a single gene vector of shape (K,) or a
stack of shape (n, K). The GA applies them to the whole population at
once.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import DegenerateChromosomeError, InvalidConfigError
from .metrics import gain_matrix, sum_rate_from_gains

__all__ = [
    "GaConfig",
    "PsoConfig",
    "SubcarrierProblem",
    "normalize_powers",
    "fitness",
    "tournament_select",
    "linear_crossover",
    "uniform_crossover",
    "mutate",
    "ga_allocate",
    "eq_allocate",
    "pso_allocate",
]


@dataclass(frozen=True)
class GaConfig:
    population_np: int = 100
    generations_q: int = 10
    init_kappa: float = 1.0 / 20.0
    mating_fraction: float = 0.40
    tournament_fraction: float = 0.10
    elite_fraction: float = 0.80
    mutation_rate: float = 0.60
    mutation_variance: float = 1e-4
    seed_equal_chromosome: bool = True

    def __post_init__(self):
        if self.population_np < 4 or self.population_np % 2:
            raise InvalidConfigError(f"population must be even and >= 4, got {self.population_np}")
        if self.generations_q < 1:
            raise InvalidConfigError("at least one generation is required")
        if not 0 < self.init_kappa <= 1:
            raise InvalidConfigError(f"kappa must lie in (0, 1], got {self.init_kappa}")
        for name in ("mating_fraction", "tournament_fraction", "elite_fraction"):
            value = getattr(self, name)
            if not 0 < value <= 1:
                raise InvalidConfigError(f"{name} must lie in (0, 1], got {value}")
        if not 0 <= self.mutation_rate <= 1:
            raise InvalidConfigError(f"mutation_rate must lie in [0, 1], got {self.mutation_rate}")
        if self.mutation_variance < 0:
            raise InvalidConfigError("mutation variance must be non-negative")

    @property
    def mating_size(self) -> int:
        return min(self.population_np, max(1, round(self.mating_fraction * self.population_np)))

    @property
    def elite_size(self) -> int:
        return min(self.population_np, max(1, round(self.elite_fraction * self.population_np)))


@dataclass(frozen=True)
class PsoConfig:
    """Global-best PSO settings (textbook coefficients)."""

    swarm_size: int = 100
    iterations: int = 10
    inertia: float = 0.7
    cognitive_c1: float = 1.5
    social_c2: float = 1.5
    velocity_clamp: float = 0.2

    def __post_init__(self):
        if self.swarm_size < 1 or self.iterations < 1:
            raise InvalidConfigError("swarm size and iterations must be positive")
        if not 0 < self.inertia < 1:
            raise InvalidConfigError(f"inertia must lie in (0, 1), got {self.inertia}")
        if self.cognitive_c1 < 0 or self.social_c2 < 0 or not self.velocity_clamp > 0:
            raise InvalidConfigError("PSO coefficients must be non-negative, clamp positive")


def _budget(p_t: float, c: int) -> float:
    return p_t / c


def _column_norms(b: np.ndarray) -> np.ndarray:
    return np.sum(np.abs(b) ** 2, axis=-2)


def _normalize(genes: np.ndarray, col_norms: np.ndarray, budget: float):
    weighted = genes @ col_norms
    if np.any(weighted <= 0):
        raise DegenerateChromosomeError("gene vector carries no power")
    eps2 = weighted / budget
    return genes / np.expand_dims(eps2, -1), np.sqrt(eps2)


def normalize_powers(genes, b: np.ndarray, p_t: float, c: int):
    """Scale genes to physical powers that exhaust the subcarrier budget.

    Returns ``(powers, epsilon)`` with ``powers = genes / epsilon**2`` and
    ``epsilon**2 = sum_k genes_k ||b_k||^2 / (p_t / c)``.
    """
    genes = np.asarray(genes, dtype=float)
    return _normalize(genes, _column_norms(np.asarray(b)), _budget(p_t, c))


class SubcarrierProblem:
    """Fitness evaluator for one subcarrier, built from the precoded gains."""

    def __init__(self, gains: np.ndarray, col_norms: np.ndarray, sigma2: float, budget: float):
        self.gains = gains
        self.col_norms = col_norms
        self.sigma2 = sigma2
        self.budget = budget

    @classmethod
    def from_precoder(cls, eff, b, sigma2, p_t, c) -> SubcarrierProblem:
        b = np.asarray(b)
        return cls(gain_matrix(eff, b), _column_norms(b), sigma2, _budget(p_t, c))

    @property
    def n_users(self) -> int:
        return self.gains.shape[0]

    def powers(self, genes: np.ndarray) -> np.ndarray:
        return _normalize(genes, self.col_norms, self.budget)[0]

    def fitness(self, genes: np.ndarray) -> np.ndarray:
        return sum_rate_from_gains(self.gains, self.powers(genes), self.sigma2)


def fitness(genes, eff, b, sigma2: float, p_t: float, c: int) -> float:
    """Subcarrier sum-rate achieved by the normalized genes."""
    problem = SubcarrierProblem.from_precoder(eff, b, sigma2, p_t, c)
    return float(problem.fitness(np.asarray(genes, dtype=float)))


def tournament_select(fitness_values, rho_sub: float, rng: np.random.Generator, size=None):
    """Index of the fittest member of a random ``ceil(rho_sub * n)`` subset.

    Subset members are distinct. Ties go to the lower index. ``size``
    runs that many independent tournaments and returns an index array.
    """
    fit = np.asarray(fitness_values, dtype=float)
    n = fit.size
    if n == 0:
        raise ValueError("tournament pool is empty")
    k = min(n, max(1, math.ceil(rho_sub * n - 1e-9)))
    m = 1 if size is None else int(size)
    subsets = np.sort(np.argsort(rng.random((m, n)), axis=1)[:, :k], axis=1)
    winners = subsets[np.arange(m), np.argmax(fit[subsets], axis=1)]
    return int(winners[0]) if size is None else winners


def linear_crossover(p1, p2):
    """Offspring ``(3 p1 - p2) / 2`` and ``(3 p2 - p1) / 2``.

    A gene that falls outside [0, 1] is replaced by the matching parent gene.
    """
    p1 = np.asarray(p1, dtype=float)
    p2 = np.asarray(p2, dtype=float)
    c1 = (3.0 * p1 - p2) / 2.0
    c2 = (3.0 * p2 - p1) / 2.0
    o1 = np.where((c1 >= 0) & (c1 <= 1), c1, p1)
    o2 = np.where((c2 >= 0) & (c2 <= 1), c2, p2)
    return o1, o2


def uniform_crossover(o1, o2, rng: np.random.Generator, swap_probability: float = 0.5):
    o1 = np.asarray(o1, dtype=float)
    o2 = np.asarray(o2, dtype=float)
    swap = rng.random(o1.shape) < swap_probability
    return np.where(swap, o2, o1), np.where(swap, o1, o2)


def mutate(genes, rho_mut: float, variance: float, rng: np.random.Generator):
    """Add N(0, variance) noise to each gene with probability ``rho_mut``, then clamp."""
    genes = np.asarray(genes, dtype=float)
    hit = rng.random(genes.shape) < rho_mut
    noise = rng.normal(0.0, math.sqrt(variance), genes.shape)
    return np.clip(np.where(hit, genes + noise, genes), 0.0, 1.0)


def _repair_degenerate(pop: np.ndarray, kappa: float, rng: np.random.Generator) -> np.ndarray:
    dead = ~np.any(pop > 0, axis=-1)
    while np.any(dead):
        pop[dead] = rng.uniform(0.0, kappa, (int(dead.sum()), pop.shape[-1]))
        dead = ~np.any(pop > 0, axis=-1)
    return pop


def _run_ga(problem: SubcarrierProblem, ga: GaConfig, rng: np.random.Generator):
    n_pop, n_users = ga.population_np, problem.n_users
    n_mate = ga.mating_size
    n_children = n_pop - n_mate
    n_pairs = n_children // 2
    n_elite = ga.elite_size

    pop = rng.uniform(0.0, ga.init_kappa, (n_pop, n_users))
    if ga.seed_equal_chromosome:
        pop[0] = ga.init_kappa
    pop = _repair_degenerate(pop, ga.init_kappa, rng)
    fit = problem.fitness(pop)

    trace = []
    for _ in range(ga.generations_q):
        order = np.argsort(-fit, kind="stable")
        pool, pool_fit = pop[order[:n_mate]], fit[order[:n_mate]]

        children = np.empty((0, n_users))
        if n_pairs:
            picks = tournament_select(pool_fit, ga.tournament_fraction, rng, size=2 * n_pairs)
            o1, o2 = linear_crossover(pool[picks[0::2]], pool[picks[1::2]])
            o1, o2 = uniform_crossover(o1, o2, rng)
            children = np.concatenate([o1, o2])
        if n_children % 2:
            if n_pairs:
                extra = children[-1:]
            else:
                extra = pool[[tournament_select(pool_fit, ga.tournament_fraction, rng)]]
            children = np.concatenate([children, extra])
        children = _repair_degenerate(children, ga.init_kappa, rng)

        pop = np.concatenate([pool, children])
        fit = np.concatenate([pool_fit, problem.fitness(children)])
        order = np.argsort(-fit, kind="stable")
        pop, fit = pop[order], fit[order]

        if n_elite < n_pop:
            rest = mutate(pop[n_elite:], ga.mutation_rate, ga.mutation_variance, rng)
            pop[n_elite:] = _repair_degenerate(rest, ga.init_kappa, rng)
            fit[n_elite:] = problem.fitness(pop[n_elite:])
        trace.append(float(fit.max()))

    best = int(np.argmax(fit))
    return problem.powers(pop[best]), trace


def ga_allocate(eff, b, sigma2: float, p_t: float, c: int, ga: GaConfig | None = None,
                rng: np.random.Generator | None = None, problem: SubcarrierProblem | None = None):
    """Run the GA on one subcarrier.

    Returns the best chromosome as physical powers (budget met with
    equality) together with the best fitness after each generation.
    ``problem`` may be passed to reuse precomputed gains.
    """
    ga = ga or GaConfig()
    rng = rng if rng is not None else np.random.default_rng()
    if problem is None:
        problem = SubcarrierProblem.from_precoder(eff, b, sigma2, p_t, c)
    return _run_ga(problem, ga, rng)


def eq_allocate(b, p_t: float, c: int, k_users: int | None = None) -> np.ndarray:
    """Identical power for every user, scaled to exhaust the subcarrier budget."""
    norms = _column_norms(np.asarray(b))
    if k_users is not None and k_users != norms.shape[-1]:
        raise InvalidConfigError(f"precoder has {norms.shape[-1]} columns, expected {k_users}")
    level = _budget(p_t, c) / norms.sum(axis=-1)
    return np.broadcast_to(np.expand_dims(level, -1), norms.shape).copy()


def _run_pso(problem: SubcarrierProblem, pso: PsoConfig, rng: np.random.Generator):
    shape = (pso.swarm_size, problem.n_users)
    vmax = pso.velocity_clamp
    x = _repair_degenerate(rng.uniform(0.0, 1.0, shape), 1.0, rng)
    v = rng.uniform(-vmax, vmax, shape)
    fit = problem.fitness(x)
    best_x, best_fit = x.copy(), fit.copy()
    g = int(np.argmax(best_fit))
    trace = []
    for _ in range(pso.iterations):
        r1 = rng.random(shape)
        r2 = rng.random(shape)
        v = (pso.inertia * v
             + pso.cognitive_c1 * r1 * (best_x - x)
             + pso.social_c2 * r2 * (best_x[g] - x))
        v = np.clip(v, -vmax, vmax)
        x = _repair_degenerate(np.clip(x + v, 0.0, 1.0), 1.0, rng)
        fit = problem.fitness(x)
        better = fit > best_fit
        best_x[better] = x[better]
        best_fit[better] = fit[better]
        g = int(np.argmax(best_fit))
        trace.append(float(best_fit[g]))
    return problem.powers(best_x[g]), trace


def pso_allocate(eff, b, sigma2: float, p_t: float, c: int, pso: PsoConfig | None = None,
                 rng: np.random.Generator | None = None, problem: SubcarrierProblem | None = None,
                 return_trace: bool = False):
    """Global-best PSO over the same gene space and fitness as the GA."""
    pso = pso or PsoConfig()
    rng = rng if rng is not None else np.random.default_rng()
    if problem is None:
        problem = SubcarrierProblem.from_precoder(eff, b, sigma2, p_t, c)
    powers, trace = _run_pso(problem, pso, rng)
    return (powers, trace) if return_trace else powers
