"""Assembling a lab: planted machine table, snapshots and test populations.

Everything here is a deterministic function of a :class:`RunConfig`.  The
machine table holds, in order, the catalog codes (states, then circuits),
a few probability measures over whole numbers, and one measure per group of
map instances whose support is the group's map codes.
"""

from __future__ import annotations

import random
from dataclasses import dataclass
from fractions import Fraction
from functools import cached_property

from .algstats import MAX_LEVEL, weighted_level
from .codec import PrimitiveMap, PrimitiveMeasure, encode_map, encode_measure, xi_index
from .config import RunConfig
from .entropy import Catalog, CatalogPlan, plan_catalog, planted_exotic_state
from .machine import (
    HaltingApprox,
    ReferenceMachine,
    UniverseSnapshot,
    build_halting,
    enumerate_universe,
    left_totalize,
)
from .quantum import PureState, random_approximate_state, random_primitive_state

F = Fraction

# Measures over whole numbers available to unconditional stochasticity.
WHOLE_MEASURES: tuple[tuple[str, dict[int, Fraction]], ...] = (
    ("uniform-8", {a: F(1, 8) for a in range(8)}),
    ("dyadic-4", {0: F(1, 2), 1: F(1, 4), 2: F(1, 8), 3: F(1, 8)}),
    ("point-5", {5: F(1)}),
    ("thirds", {1: F(1, 3), 2: F(1, 3), 9: F(1, 3)}),
)

GROUP_SIZE = 5
N_GROUPS = 4


def map_key(f: PrimitiveMap) -> int:
    """The whole number whose ξ-string is the map's code."""
    return xi_index(encode_map(f))


@dataclass(frozen=True)
class MapInstance:
    label: str
    f: PrimitiveMap
    m: PrimitiveMeasure
    group: int


@dataclass(frozen=True)
class StatsPlan:
    whole_measures: tuple[tuple[str, PrimitiveMeasure], ...]
    instances: tuple[MapInstance, ...]

    @cached_property
    def map_measures(self) -> tuple[tuple[str, PrimitiveMeasure], ...]:
        """Uniform measure over each group's map keys."""
        out = []
        for g in sorted({i.group for i in self.instances}):
            keys = sorted({map_key(i.f) for i in self.instances if i.group == g})
            out.append((f"maps-{g}", PrimitiveMeasure.from_dict({k: F(1, len(keys)) for k in keys})))
        return tuple(out)

    def codes(self) -> list[str]:
        return [encode_measure(q) for _, q in self.whole_measures + self.map_measures]


def _random_measure(rng: random.Random) -> PrimitiveMeasure:
    support = sorted(rng.sample(range(8), rng.randint(2, 6)))
    weights = [rng.randint(1, 4) for _ in support]
    total = sum(weights)
    return PrimitiveMeasure.from_dict({a: F(w, total) for a, w in zip(support, weights)})


def _random_instance(rng: random.Random, label: str, group: int) -> MapInstance:
    while True:
        m = _random_measure(rng)
        dom = sorted(set(rng.sample(m.support, rng.randint(1, len(m.support)))) | {rng.randrange(12)})
        f = PrimitiveMap.from_dict({a: rng.randint(0, 4) for a in dom})
        if weighted_level(f, m) <= MAX_LEVEL:
            return MapInstance(label, f, m, group)


def plan_stats(seed: int = 3) -> StatsPlan:
    """Two hand-picked instances followed by seeded random ones, in groups of five."""
    rng = random.Random(seed)
    uniform4 = PrimitiveMeasure.from_dict({a: F(1, 4) for a in range(4)})
    fixed = [
        MapInstance("constant-zero", PrimitiveMap.from_dict({a: 0 for a in range(4)}), uniform4, 0),
        MapInstance("one-cheap", PrimitiveMap.from_dict({0: 0, 1: 40, 2: 40, 3: 40}), uniform4, 0),
    ]
    seen = {map_key(i.f) for i in fixed}
    instances = list(fixed)
    while len(instances) < GROUP_SIZE * N_GROUPS:
        k = len(instances)
        inst = _random_instance(rng, f"random-{k}", k // GROUP_SIZE)
        if map_key(inst.f) not in seen:
            seen.add(map_key(inst.f))
            instances.append(inst)
    measures = tuple((label, PrimitiveMeasure.from_dict(d)) for label, d in WHOLE_MEASURES)
    return StatsPlan(measures, tuple(instances))


def lab_table(catalog_plan: CatalogPlan, stats_plan: StatsPlan) -> tuple[str, ...]:
    return tuple(catalog_plan.codes() + stats_plan.codes())


@dataclass
class Lab:
    """Snapshots and plans shared by every experiment of one configuration."""

    config: RunConfig
    catalog_plan: CatalogPlan
    stats_plan: StatsPlan
    machine: ReferenceMachine
    snapshot: UniverseSnapshot
    halting: HaltingApprox
    remapped: UniverseSnapshot
    catalog: Catalog

    @property
    def halting_aux(self) -> str:
        return self.halting.bits

    @cached_property
    def stats_snapshot(self) -> UniverseSnapshot:
        """Longer programs for conditional statistics; other tapes are probed on demand."""
        m = self.machine.with_budgets(lmax=self.config.stats_lmax)
        return enumerate_universe(m, [""], self.config.workers)

    @cached_property
    def exotic_state(self) -> PureState:
        return planted_exotic_state(self.catalog, self.halting, self.config.signature_states)

    def entropy_population(self) -> list[tuple[str, PureState]]:
        cfg = self.config
        rng = random.Random(cfg.population_seed * 1_000_003 + 17)
        states = [(e.label, e.obj) for e in self.catalog.states]
        states += [(f"primitive-{i}", random_primitive_state(cfg.qubits, rng)) for i in range(cfg.entropy_random)]
        states += [(f"approximate-{i}", random_approximate_state(cfg.qubits, rng)) for i in range(cfg.entropy_approx)]
        return states

    def gap_population(self) -> list[tuple[str, PureState]]:
        cfg = self.config
        rng = random.Random(cfg.population_seed * 1_000_003 + 29)
        states = [(e.label, e.obj) for e in self.catalog.states]
        states += [(f"primitive-{i}", random_primitive_state(cfg.qubits, rng)) for i in range(cfg.gap_random)]
        states.append(("planted-exotic", self.exotic_state))
        return states


def build_lab(config: RunConfig | None = None) -> Lab:
    config = config or RunConfig()
    cplan = plan_catalog(config.qubits, config.catalog_seed, config.catalog_random)
    splan = plan_stats(config.instance_seed)
    machine = ReferenceMachine(lab_table(cplan, splan), config.steps, config.lmax)
    base = enumerate_universe(machine, [""], config.workers)
    halting = build_halting(base)
    snapshot = enumerate_universe(machine, ["", halting.bits], config.workers)
    remapped = left_totalize(snapshot)
    catalog = Catalog.from_snapshot(cplan, snapshot)
    return Lab(config, cplan, splan, machine, snapshot, halting, remapped, catalog)
