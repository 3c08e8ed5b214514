"""Game definition: strategies, formation rules, payoff tables, and the
mechanism-axiom checker.

A strategy is a (desired partition, local action) pair. A formation rule is a
total deterministic map from announced-strategy profiles to one realized
partition; payoffs are looked up per (realized partition, action profile)
with an explicit default vector for unlisted combinations, plus an optional
per-player bonus paid when a designated partition is realized.

``Game`` is immutable after construction; the derived arrays (realized
partition index per profile, payoff tensor) are computed lazily once and
shared by the solver.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field, replace
from functools import cached_property, lru_cache
from typing import Iterable, Mapping, Sequence

import numpy as np

from .errors import BudgetExceededError, InvalidParameterError
from .partitions import (
    Coalition,
    Partition,
    PartitionFamily,
    count_partitions,
    enumerate_partitions,
)

#: Ceiling on exhaustive enumerations (profiles or support combinations)
#: unless the caller overrides it. Checked before work starts, never after.
DEFAULT_BUDGET = 1_000_000


@dataclass(frozen=True, order=True)
class Action:
    """One local action, e.g. id=1 label="H"."""

    id: int
    label: str


@dataclass(frozen=True)
class PartitionStrategy:
    """A player's announcement: the partition they want plus the action they
    would play in it."""

    desired: Partition
    action: Action

    def __str__(self) -> str:
        return f"{self.action.label}@{self.desired.key}"


@dataclass(frozen=True)
class StrategyProfile:
    """One announcement per player."""

    choices: tuple[PartitionStrategy, ...]

    @property
    def n(self) -> int:
        return len(self.choices)

    def __iter__(self):
        return iter(self.choices)

    def __str__(self) -> str:
        return "(" + ", ".join(str(c) for c in self.choices) + ")"


@lru_cache(maxsize=65536)
def _form_by_mutual_consent(own_blocks: tuple[tuple[int, ...], ...]) -> Partition:
    """Realized partition when a multi-player block forms iff all its members
    announced exactly it; everyone else ends up a singleton."""
    n = len(own_blocks)
    formed: list[tuple[int, ...]] = []
    placed = [False] * n
    for i, block in enumerate(own_blocks):
        if placed[i] or len(block) < 2:
            continue
        if all(own_blocks[j] == block for j in block):
            formed.append(block)
            for j in block:
                placed[j] = True
    blocks = formed + [(i,) for i in range(n) if not placed[i]]
    blocks.sort(key=lambda b: b[0])
    return Partition(tuple(Coalition(b) for b in blocks), n)


class FormationRule:
    """Total deterministic map from a strategy profile to a realized partition.

    Implementations must be pure functions of the profile so results can be
    cached and shared across threads.
    """

    kind: str = "abstract"

    def realize(self, profile: StrategyProfile) -> Partition:
        raise NotImplementedError

    def __repr__(self) -> str:
        return f"{type(self).__name__}()"


class CoalitionUnanimity(FormationRule):
    """A coalition of two or more players forms iff every member announced it
    as their own block; non-selected players eat alone (become singletons)."""

    kind = "coalition_unanimity"

    def realize(self, profile: StrategyProfile) -> Partition:
        own = tuple(
            choice.desired.block_of(i).members for i, choice in enumerate(profile)
        )
        return _form_by_mutual_consent(own)


class PartitionUnanimity(FormationRule):
    """A non-all-singleton partition forms iff every player announced exactly
    that partition; any disagreement collapses to all singletons."""

    kind = "partition_unanimity"

    def realize(self, profile: StrategyProfile) -> Partition:
        first = profile.choices[0].desired
        if all(choice.desired == first for choice in profile):
            return first
        return Partition.singletons(profile.n)


RULES: dict[str, FormationRule] = {
    rule.kind: rule for rule in (CoalitionUnanimity(), PartitionUnanimity())
}


def _as_finite_vector(values: Sequence[float], n: int, what: str) -> tuple[float, ...]:
    vec = tuple(float(v) for v in values)
    if len(vec) != n:
        raise InvalidParameterError(f"{what} must have length {n}, got {len(vec)}")
    if not all(np.isfinite(vec)):
        raise InvalidParameterError(f"{what} must be finite, got {vec}")
    return vec


@dataclass(frozen=True)
class PayoffTable:
    """Payoff vectors keyed by (realized partition, action profile).

    Lookup order: exact (partition, actions) entry, then a partition-wide
    entry covering all action profiles, then ``default``. All stored values
    are finite.
    """

    n: int
    exact: Mapping[tuple[str, tuple[int, ...]], tuple[float, ...]]
    partition_wide: Mapping[str, tuple[float, ...]]
    default: tuple[float, ...]

    def __post_init__(self):
        _as_finite_vector(self.default, self.n, "default payoff")
        for key, vec in self.exact.items():
            _as_finite_vector(vec, self.n, f"payoff for {key}")
        for key, vec in self.partition_wide.items():
            _as_finite_vector(vec, self.n, f"payoff for partition {key}")

    def lookup(self, partition_key: str, action_ids: tuple[int, ...]) -> tuple[float, ...]:
        hit = self.exact.get((partition_key, action_ids))
        if hit is not None:
            return hit
        hit = self.partition_wide.get(partition_key)
        if hit is not None:
            return hit
        return self.default

    def shifted(self, player: int, offset: float) -> "PayoffTable":
        """A copy with ``offset`` added to every payoff of one player."""

        def bump(vec: tuple[float, ...]) -> tuple[float, ...]:
            return tuple(v + offset if i == player else v for i, v in enumerate(vec))

        return PayoffTable(
            n=self.n,
            exact={k: bump(v) for k, v in self.exact.items()},
            partition_wide={k: bump(v) for k, v in self.partition_wide.items()},
            default=bump(self.default),
        )


@dataclass(frozen=True)
class EpsilonBonus:
    """Additive per-player bonus paid whenever ``partition`` is realized."""

    partition: Partition
    per_player: tuple[float, ...]


@dataclass(frozen=True, eq=False)
class Game:
    """A coalition-structure formation game over P(K).

    ``action_sets[i][p]`` lists player i's actions in partition ``family[p]``;
    strategy sets, the realized-partition index array, and the payoff tensor
    are derived lazily and cached. The object is immutable and shareable.
    """

    players: tuple[str, ...]
    K: int
    family: PartitionFamily
    action_sets: tuple[tuple[tuple[Action, ...], ...], ...]
    rule: FormationRule
    payoffs: PayoffTable
    epsilon: EpsilonBonus | None = None
    name: str = ""

    def __post_init__(self):
        n = len(self.players)
        if n < 2:
            raise InvalidParameterError(f"need at least 2 players, got {n}")
        if not 1 <= self.K <= n:
            raise InvalidParameterError(f"K={self.K} not in 1..{n}")
        if self.family.n != n or self.family.K != self.K:
            raise InvalidParameterError("family does not match the game's n and K")
        if len(self.family) != count_partitions(n, self.K):
            raise InvalidParameterError("family is not the full P(K)")
        if len(self.action_sets) != n:
            raise InvalidParameterError("need one action-set row per player")
        for i, per_partition in enumerate(self.action_sets):
            if len(per_partition) != len(self.family):
                raise InvalidParameterError(
                    f"player {i} needs an action set for each of the "
                    f"{len(self.family)} partitions"
                )
            for p, actions in enumerate(per_partition):
                if not actions:
                    raise InvalidParameterError(
                        f"empty action set for player {i} in partition "
                        f"{self.family[p].key}"
                    )
        if self.payoffs.n != n:
            raise InvalidParameterError("payoff table has the wrong player count")
        if self.epsilon is not None:
            _as_finite_vector(self.epsilon.per_player, n, "epsilon bonus")
            if self.epsilon.partition not in self.family:
                raise InvalidParameterError(
                    f"epsilon partition {self.epsilon.partition} is not in P(K)"
                )

    @property
    def n(self) -> int:
        return len(self.players)

    @cached_property
    def strategy_sets(self) -> tuple[tuple[PartitionStrategy, ...], ...]:
        """Per player: all (partition, action) pairs in (partition order,
        action id) order."""
        sets = []
        for i in range(self.n):
            strategies = [
                PartitionStrategy(desired=partition, action=action)
                for p, partition in enumerate(self.family)
                for action in self.action_sets[i][p]
            ]
            sets.append(tuple(strategies))
        return tuple(sets)

    @cached_property
    def strategy_counts(self) -> tuple[int, ...]:
        return tuple(len(s) for s in self.strategy_sets)

    @cached_property
    def profile_count(self) -> int:
        count = 1
        for m in self.strategy_counts:
            count *= m
        return count

    @cached_property
    def _strategy_index(self) -> tuple[dict[PartitionStrategy, int], ...]:
        return tuple(
            {s: k for k, s in enumerate(strategies)}
            for strategies in self.strategy_sets
        )

    def strategy_index(self, player: int, strategy: PartitionStrategy) -> int:
        try:
            return self._strategy_index[player][strategy]
        except KeyError:
            raise InvalidParameterError(
                f"{strategy} is not a strategy of player {player}"
            ) from None

    def profile_from_indices(self, indices: Sequence[int]) -> StrategyProfile:
        return StrategyProfile(
            tuple(self.strategy_sets[i][k] for i, k in enumerate(indices))
        )

    def indices_of_profile(self, profile: StrategyProfile) -> tuple[int, ...]:
        if profile.n != self.n:
            raise InvalidParameterError(
                f"profile has {profile.n} entries, game has {self.n} players"
            )
        return tuple(
            self.strategy_index(i, choice) for i, choice in enumerate(profile)
        )

    def iter_profiles(self):
        """All pure profiles in lexicographic index order."""
        for indices in itertools.product(*(range(m) for m in self.strategy_counts)):
            yield indices, self.profile_from_indices(indices)

    @cached_property
    def realized_index(self) -> np.ndarray:
        """Index into ``family`` of the realized partition, per pure profile;
        -1 where the rule leaves the family (only possible for broken rules)."""
        out = np.empty(self.strategy_counts, dtype=np.int32)
        lookup = self.family._index
        for indices, profile in self.iter_profiles():
            realized = self.rule.realize(profile)
            out[indices] = lookup.get(realized, -1)
        out.flags.writeable = False
        return out

    @cached_property
    def payoff_tensor(self) -> np.ndarray:
        """Payoff vectors for every pure profile, shape strategy_counts + (n,)."""
        out = np.empty(self.strategy_counts + (self.n,), dtype=np.float64)
        keys = [p.key for p in self.family]
        bonus_index = (
            self.family.index_of(self.epsilon.partition)
            if self.epsilon is not None
            else -2
        )
        bonus = (
            np.asarray(self.epsilon.per_player) if self.epsilon is not None else None
        )
        realized = self.realized_index
        for indices, profile in self.iter_profiles():
            p = int(realized[indices])
            if p >= 0:
                key = keys[p]
            else:
                key = self.rule.realize(profile).key
            actions = tuple(choice.action.id for choice in profile)
            vec = np.asarray(self.payoffs.lookup(key, actions), dtype=np.float64)
            if p == bonus_index:
                vec = vec + bonus
            out[indices] = vec
        out.flags.writeable = False
        return out

    def with_payoffs(self, payoffs: PayoffTable) -> "Game":
        return replace(self, payoffs=payoffs)


def build_strategy_set(game: Game, player: int) -> list[PartitionStrategy]:
    """All (partition, action) pairs available to ``player``, in deterministic
    (partition order, action id) order."""
    if not 0 <= player < game.n:
        raise InvalidParameterError(f"player {player} not in 0..{game.n - 1}")
    return list(game.strategy_sets[player])


def apply_formation_rule(game: Game, profile: StrategyProfile) -> Partition:
    """Realized partition for one announced profile."""
    game.indices_of_profile(profile)  # validates membership
    return game.rule.realize(profile)


def payoff(game: Game, profile: StrategyProfile) -> np.ndarray:
    """Payoff vector for one announced profile: table lookup on the realized
    partition and action profile, plus the bonus if the designated partition
    was realized."""
    indices = game.indices_of_profile(profile)
    return game.payoff_tensor[indices].copy()


def induced_domain(
    game: Game, partition: Partition, *, budget: int | None = None
) -> list[StrategyProfile]:
    """All pure profiles the rule maps to ``partition``, by exhaustive
    enumeration, in lexicographic profile order."""
    target = game.family.index_of(partition)
    _check_budget(game.profile_count, budget, "induced_domain")
    realized = game.realized_index
    return [
        game.profile_from_indices(indices)
        for indices in np.argwhere(realized == target)
    ]


def _check_budget(required: int, budget: int | None, what: str) -> None:
    limit = DEFAULT_BUDGET if budget is None else budget
    if required > limit:
        raise BudgetExceededError(
            f"{what} needs {required} profile evaluations, over the budget of "
            f"{limit}; raise the budget to force the exhaustive check",
            required=required,
            budget=limit,
        )


@dataclass(frozen=True)
class AxiomCheck:
    """Outcome of one mechanism axiom: ok flag plus a counterexample profile
    (as strategy indices) when it failed."""

    ok: bool
    counterexample: tuple[int, ...] | None = None
    detail: str = ""


@dataclass(frozen=True)
class MechanismAxiomReport:
    """Exhaustive verification that the rule partitions the profile space."""

    maps_into_family: AxiomCheck
    domains_disjoint: AxiomCheck
    domains_cover: AxiomCheck
    domain_sizes: dict[Partition, int] = field(default_factory=dict)

    @property
    def ok(self) -> bool:
        return (
            self.maps_into_family.ok
            and self.domains_disjoint.ok
            and self.domains_cover.ok
        )


def check_mechanism_axioms(
    game: Game, *, budget: int | None = None
) -> MechanismAxiomReport:
    """Verify by enumeration that (a) every profile maps to exactly one
    partition of the family, (b) the induced domains are pairwise disjoint,
    and (c) the domains cover the whole profile space.

    Never silently truncates: a profile space over budget raises instead.
    """
    _check_budget(game.profile_count, budget, "check_mechanism_axioms")
    realized = game.realized_index
    flat = realized.reshape(-1)

    bad = np.nonzero(flat < 0)[0]
    if bad.size:
        counter = tuple(
            int(v) for v in np.unravel_index(int(bad[0]), game.strategy_counts)
        )
        maps_into = AxiomCheck(
            ok=False,
            counterexample=counter,
            detail="rule output is outside the partition family",
        )
    else:
        maps_into = AxiomCheck(ok=True)

    # Membership lists per partition; a profile in two domains or in none
    # breaks disjointness/coverage respectively.
    domains: list[set[int]] = [set() for _ in range(len(game.family))]
    for pos, p in enumerate(flat):
        if p >= 0:
            domains[int(p)].add(pos)
    sizes = [len(d) for d in domains]
    total = sum(sizes)
    overlap_free = total == len(set().union(*domains)) if domains else True
    disjoint = AxiomCheck(ok=overlap_free)
    if total == game.profile_count and overlap_free:
        cover = AxiomCheck(ok=True)
    else:
        missing = set(range(game.profile_count)) - set().union(*domains)
        pos = min(missing) if missing else 0
        cover = AxiomCheck(
            ok=False,
            counterexample=tuple(
                int(v) for v in np.unravel_index(pos, game.strategy_counts)
            ),
            detail=f"domains cover {total} of {game.profile_count} profiles",
        )

    return MechanismAxiomReport(
        maps_into_family=maps_into,
        domains_disjoint=disjoint,
        domains_cover=cover,
        domain_sizes={
            game.family[p]: sizes[p] for p in range(len(game.family)) if sizes[p]
        },
    )


def coalition_values(
    partition: Partition, payoffs: Sequence[float]
) -> dict[Coalition, float]:
    """Value of each block as the sum of its members' payoffs (the
    cooperative-game reading of a payoff profile)."""
    vec = _as_finite_vector(payoffs, partition.n, "payoffs")
    return {block: float(sum(vec[i] for i in block)) for block in partition}


def make_game(
    players: Sequence[str],
    K: int,
    *,
    rule: FormationRule | str = "coalition_unanimity",
    action_labels: Sequence[str] | Mapping[str, Sequence[str]] = ("act",),
    exact_payoffs: Mapping[tuple[str, tuple[str, ...]], Sequence[float]] | None = None,
    partition_payoffs: Mapping[str, Sequence[float]] | None = None,
    default_payoff: Sequence[float] | None = None,
    epsilon_partition: str | None = None,
    epsilon_bonus: float | Sequence[float] = 0.0,
    name: str = "",
    max_n: int = 16,
) -> Game:
    """Assemble a game from label-level data.

    ``action_labels`` is either one shared list or a mapping from canonical
    partition key (or ``"default"``) to a list; payoff keys use canonical
    partition strings and action labels. This is the programmatic counterpart
    of the spec-file format.
    """
    from .partitions import parse_partition  # local to avoid cycle at import time

    players = tuple(players)
    n = len(players)
    family = enumerate_partitions(n, K, max_n=max_n)

    def labels_for(partition: Partition) -> tuple[str, ...]:
        if isinstance(action_labels, Mapping):
            hit = action_labels.get(partition.key, action_labels.get("default"))
            if hit is None:
                raise InvalidParameterError(
                    f"no action set declared for partition {partition.key}"
                )
            return tuple(hit)
        return tuple(action_labels)

    per_partition = tuple(
        tuple(Action(i, label) for i, label in enumerate(labels_for(partition)))
        for partition in family
    )
    action_sets = tuple(per_partition for _ in range(n))

    label_to_id = {
        partition.key: {a.label: a.id for a in per_partition[p]}
        for p, partition in enumerate(family)
    }

    exact: dict[tuple[str, tuple[int, ...]], tuple[float, ...]] = {}
    for (raw_key, labels), vec in (exact_payoffs or {}).items():
        key = parse_partition(raw_key, n).key
        if key not in label_to_id:
            continue  # partition beyond this K; harmless for restricted games
        try:
            ids = tuple(label_to_id[key][label] for label in labels)
        except KeyError as exc:
            raise InvalidParameterError(
                f"action label {exc.args[0]!r} not declared for partition {raw_key}"
            ) from None
        exact[(key, ids)] = _as_finite_vector(vec, n, f"payoff for {raw_key}")
    wide: dict[str, tuple[float, ...]] = {}
    for raw_key, vec in (partition_payoffs or {}).items():
        key = parse_partition(raw_key, n).key
        if key in label_to_id:
            wide[key] = _as_finite_vector(vec, n, f"payoff for {raw_key}")

    table = PayoffTable(
        n=n,
        exact=exact,
        partition_wide=wide,
        default=_as_finite_vector(default_payoff or (0.0,) * n, n, "default payoff"),
    )

    bonus = None
    if epsilon_partition is not None:
        target = parse_partition(epsilon_partition, n)
        if target in family:
            per_player = (
                tuple(float(b) for b in epsilon_bonus)
                if isinstance(epsilon_bonus, (list, tuple))
                else (float(epsilon_bonus),) * n
            )
            bonus = EpsilonBonus(partition=target, per_player=per_player)

    if isinstance(rule, str):
        if rule not in RULES:
            raise InvalidParameterError(
                f"unknown formation rule {rule!r}; known: {sorted(RULES)}"
            )
        rule_obj = RULES[rule]
    else:
        rule_obj = rule
    return Game(
        players=players,
        K=K,
        family=family,
        action_sets=action_sets,
        rule=rule_obj,
        payoffs=table,
        epsilon=bonus,
        name=name,
    )
