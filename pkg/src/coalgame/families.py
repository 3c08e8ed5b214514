"""Nested families of games over a contiguous range of max coalition sizes.

A family is stored as one spec plus per-K restrictions, which makes nesting
true by construction; :func:`check_nesting` re-verifies it exhaustively
(partition families, strategy sets, payoff restriction, and rule agreement on
the embedded profile space) so it doubles as a regression test for the
derivation. :func:`equilibria_across_k` solves each game and diffs the
equilibrium-partition supports between consecutive K.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterator, Sequence

import numpy as np

from .errors import BudgetExceededError, InvalidParameterError
from .games import DEFAULT_BUDGET, Game
from .gamespec import GameSpec, build_game
from .partitions import Partition, is_nested
from .solver import (
    DEFAULT_TOL,
    EquilibriumResult,
    _dedup_key,
    _support_count,
    enumerate_pure_equilibria,
    support_enumeration,
)

DEDUP_TOL = 1e-6


@dataclass(frozen=True, eq=False)
class GameFamily:
    """Games for each K in a contiguous range, derived from one spec."""

    base: GameSpec
    games: dict[int, Game]

    def __post_init__(self):
        ks = self.k_values
        if not ks:
            raise InvalidParameterError("family must contain at least one game")
        if list(ks) != list(range(ks[0], ks[-1] + 1)):
            raise InvalidParameterError(f"family range must be contiguous, got {ks}")
        first = self.games[ks[0]]
        for k in ks:
            game = self.games[k]
            if game.K != k:
                raise InvalidParameterError(f"game stored under K={k} has K={game.K}")
            if game.players != first.players or game.rule.kind != first.rule.kind:
                raise InvalidParameterError(
                    "all games in a family must share players and rule"
                )

    @property
    def k_values(self) -> tuple[int, ...]:
        return tuple(sorted(self.games))

    @property
    def n(self) -> int:
        return self.games[self.k_values[0]].n

    def __getitem__(self, K: int) -> Game:
        try:
            return self.games[K]
        except KeyError:
            raise InvalidParameterError(
                f"family has no game for K={K}; range is {self.k_values}"
            ) from None

    def __iter__(self) -> Iterator[tuple[int, Game]]:
        return iter(sorted(self.games.items()))

    def __len__(self) -> int:
        return len(self.games)


def build_family(
    spec: GameSpec,
    k_range: tuple[int, int] | None = None,
    *,
    epsilon_bonus: float | Sequence[float] | None = None,
) -> GameFamily:
    """Construct the game for every K in ``k_range`` (default: the spec's
    own range) by restricting the spec to P(K)."""
    lo, hi = k_range if k_range is not None else (spec.k_min, spec.k_max)
    if not 1 <= lo <= hi <= spec.n:
        raise InvalidParameterError(
            f"need 1 <= K_min <= K_max <= {spec.n}, got {lo}..{hi}"
        )
    games = {
        k: build_game(spec, k, epsilon_bonus=epsilon_bonus) for k in range(lo, hi + 1)
    }
    return GameFamily(base=spec, games=games)


@dataclass(frozen=True)
class NestingCheck:
    ok: bool
    detail: str = ""


@dataclass(frozen=True)
class PairNestingReport:
    """Consistency of one consecutive pair Γ(K) vs Γ(K+1)."""

    k_small: int
    k_large: int
    partition_nesting: NestingCheck
    strategy_nesting: NestingCheck
    payoff_consistency: NestingCheck
    rule_consistency: NestingCheck

    @property
    def ok(self) -> bool:
        return (
            self.partition_nesting.ok
            and self.strategy_nesting.ok
            and self.payoff_consistency.ok
            and self.rule_consistency.ok
        )

    @property
    def checks(self) -> dict[str, NestingCheck]:
        return {
            "partition_nesting": self.partition_nesting,
            "strategy_nesting": self.strategy_nesting,
            "payoff_consistency": self.payoff_consistency,
            "rule_consistency": self.rule_consistency,
        }


@dataclass(frozen=True)
class NestingReport:
    pairs: tuple[PairNestingReport, ...]

    @property
    def ok(self) -> bool:
        return all(pair.ok for pair in self.pairs)


def _strategy_embedding(small: Game, large: Game) -> tuple[list[list[int]], str]:
    """Index of each Γ(K) strategy inside Γ(K+1)'s strategy list, per player."""
    embedding: list[list[int]] = []
    for i in range(small.n):
        row = []
        for strategy in small.strategy_sets[i]:
            try:
                row.append(large.strategy_index(i, strategy))
            except InvalidParameterError:
                return [], (
                    f"player {i} strategy {strategy} of K={small.K} is missing "
                    f"from K={large.K}"
                )
        if row != sorted(row):
            return [], f"player {i}: strategy order changes between K levels"
        embedding.append(row)
    return embedding, ""


def check_nesting(family: GameFamily) -> NestingReport:
    """Exhaustively verify the nesting of consecutive games: P(K) inside
    P(K+1), strategy sets as sub-lists, identical payoffs on the embedded
    profiles, and identical rule outputs on them."""
    pairs = []
    ks = family.k_values
    for k_small, k_large in zip(ks, ks[1:]):
        small, large = family[k_small], family[k_large]

        missing = [p for p in small.family if p not in large.family]
        part_check = NestingCheck(
            ok=not missing,
            detail="" if not missing else f"partition {missing[0]} missing",
        )
        if is_nested(small.family, large.family) != part_check.ok:
            part_check = NestingCheck(ok=False, detail="nesting check disagreement")

        embedding, err = _strategy_embedding(small, large)
        strat_check = NestingCheck(ok=not err, detail=err)

        if embedding:
            ix = np.ix_(*embedding)
            sub_payoff = large.payoff_tensor[ix]
            if np.array_equal(sub_payoff, small.payoff_tensor):
                pay_check = NestingCheck(ok=True)
            else:
                diff = np.argwhere(
                    np.any(sub_payoff != small.payoff_tensor, axis=-1)
                )[0]
                cell = tuple(int(v) for v in diff)
                p = int(small.realized_index[cell])
                key = small.family[p].key if p >= 0 else "<outside family>"
                pay_check = NestingCheck(
                    ok=False,
                    detail=(
                        f"payoff mismatch at profile {cell} "
                        f"(realized partition {key}): "
                        f"{small.payoff_tensor[cell].tolist()} in K={k_small} vs "
                        f"{sub_payoff[cell].tolist()} in K={k_large}"
                    ),
                )

            # Compare realized partitions through the family index maps.
            to_small = np.array(
                [
                    small.family._index.get(partition, -2)
                    for partition in large.family
                ],
                dtype=np.int32,
            )
            sub_realized = large.realized_index[ix]
            mapped = np.where(
                sub_realized >= 0, to_small[np.clip(sub_realized, 0, None)], -3
            )
            if np.array_equal(mapped, small.realized_index):
                rule_check = NestingCheck(ok=True)
            else:
                diff = np.argwhere(mapped != small.realized_index)[0]
                cell = tuple(int(v) for v in diff)
                rule_check = NestingCheck(
                    ok=False,
                    detail=f"rule output differs at embedded profile {cell}",
                )
        else:
            pay_check = NestingCheck(ok=False, detail="no embedding")
            rule_check = NestingCheck(ok=False, detail="no embedding")

        pairs.append(
            PairNestingReport(
                k_small=k_small,
                k_large=k_large,
                partition_nesting=part_check,
                strategy_nesting=strat_check,
                payoff_consistency=pay_check,
                rule_consistency=rule_check,
            )
        )
    return NestingReport(pairs=tuple(pairs))


@dataclass(frozen=True)
class SolveOptions:
    """Knobs shared by the solvers and the CLI."""

    mode: str = "weak"
    tol: float = DEFAULT_TOL
    max_support: int | None = None
    budget: int | None = None
    include_mixed: bool = True
    threads: int = 1

    @property
    def effective_budget(self) -> int:
        return DEFAULT_BUDGET if self.budget is None else self.budget


@dataclass(frozen=True, eq=False)
class KReport:
    """Solver output for one K: validated equilibria and the partitions they
    realize; ``error`` carries a budget failure instead of aborting the rest
    of the family."""

    K: int
    equilibria: tuple[EquilibriumResult, ...]
    partitions: tuple[Partition, ...]
    error: str | None = None
    notes: tuple[str, ...] = ()


@dataclass(frozen=True)
class KDiff:
    k_from: int
    k_to: int
    partitions_gained: tuple[Partition, ...]
    partitions_lost: tuple[Partition, ...]


@dataclass(frozen=True, eq=False)
class FamilyEquilibriumReport:
    per_k: tuple[KReport, ...]
    diffs: tuple[KDiff, ...]

    def report_for(self, K: int) -> KReport:
        for entry in self.per_k:
            if entry.K == K:
                return entry
        raise InvalidParameterError(f"no report for K={K}")


def _solve_game(
    game: Game, options: SolveOptions
) -> tuple[list[EquilibriumResult], list[str]]:
    """Pure enumeration plus (budget permitting) mixed support search,
    merged and deduplicated. Raises on a blown budget."""
    notes: list[str] = []
    equilibria = list(
        enumerate_pure_equilibria(game, options.mode, options.tol, budget=options.budget)
    )

    if options.include_mixed:
        caps = [
            min(m, options.max_support if options.max_support else m)
            for m in game.strategy_counts
        ]
        combos = 1
        for m, cap in zip(game.strategy_counts, caps):
            combos *= _support_count(m, cap)
        if combos > options.effective_budget:
            notes.append(
                f"mixed search skipped: {combos} support combinations exceed "
                f"the budget of {options.effective_budget}"
            )
        else:
            kept = [_dedup_key(r.profile.vectors()) for r in equilibria]
            for result in support_enumeration(
                game,
                options.max_support,
                options.tol,
                budget=options.budget,
                threads=options.threads,
            ):
                key = _dedup_key(result.profile.vectors())
                if any(np.abs(key - seen).max() <= DEDUP_TOL for seen in kept):
                    continue
                kept.append(key)
                equilibria.append(result)
    return equilibria, notes


def _solve_one(game: Game, options: SolveOptions) -> KReport:
    try:
        equilibria, notes = _solve_game(game, options)
    except BudgetExceededError as exc:
        return KReport(K=game.K, equilibria=(), partitions=(), error=str(exc))

    mass: dict[Partition, float] = {}
    for result in equilibria:
        for partition, prob in result.partition_distribution.items():
            if prob > 1e-9:
                mass[partition] = mass.get(partition, 0.0) + prob
    ordered = tuple(
        sorted(mass, key=lambda p: game.family.index_of(p))
    )
    return KReport(
        K=game.K,
        equilibria=tuple(equilibria),
        partitions=ordered,
        notes=tuple(notes),
    )


def equilibria_across_k(
    family: GameFamily, options: SolveOptions | None = None
) -> FamilyEquilibriumReport:
    """Solve every game in the family and diff the equilibrium-partition
    supports between consecutive K. Budget failures are recorded per K and do
    not abort the other games."""
    options = options or SolveOptions()
    per_k = tuple(_solve_one(game, options) for _, game in family)
    diffs = []
    for a, b in zip(per_k, per_k[1:]):
        if a.error or b.error:
            continue
        set_a, set_b = set(a.partitions), set(b.partitions)
        diffs.append(
            KDiff(
                k_from=a.K,
                k_to=b.K,
                partitions_gained=tuple(p for p in b.partitions if p not in set_a),
                partitions_lost=tuple(p for p in a.partitions if p not in set_b),
            )
        )
    return FamilyEquilibriumReport(per_k=per_k, diffs=tuple(diffs))
