"""Human-readable and machine-readable reports for the CLI and for scripts.

The machine-readable form is plain JSON-compatible dicts; ``json.dumps``
followed by ``json.loads`` reproduces them exactly, and every reported
profile can be fed back through ``is_equilibrium``.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .families import (
    FamilyEquilibriumReport,
    GameFamily,
    NestingReport,
    SolveOptions,
    _solve_game,
    check_nesting,
)
from .games import Game, MechanismAxiomReport, check_mechanism_axioms
from .solver import EquilibriumResult, MixedProfile, is_equilibrium
from .partitions import Partition


def pretty_partition(partition: Partition, players: tuple[str, ...]) -> str:
    """Partition rendered with player names, e.g. ``{A,B | C1,C2}``."""
    return (
        "{"
        + " | ".join(
            ",".join(players[i] for i in block) for block in partition.blocks
        )
        + "}"
    )


def game_summary(game: Game) -> dict:
    return {
        "name": game.name,
        "players": list(game.players),
        "K": game.K,
        "rule": game.rule.kind,
        "partition_count": len(game.family),
        "strategy_counts": list(game.strategy_counts),
        "profile_count": game.profile_count,
    }


def equilibrium_to_dict(game: Game, result: EquilibriumResult, strict: bool) -> dict:
    return {
        "profile": [v.tolist() for v in result.profile.vectors()],
        "support": [list(s) for s in result.support],
        "strategy_labels": [
            [str(game.strategy_sets[i][k]) for k in support]
            for i, support in enumerate(result.support)
        ],
        "payoffs": [float(x) for x in result.payoffs],
        "partition_distribution": {
            p.key: float(w) for p, w in sorted(
                result.partition_distribution.items(),
                key=lambda item: game.family.index_of(item[0]),
            )
        },
        "max_regret": float(result.max_regret),
        "mode": result.mode,
        "strict": bool(strict),
        "degenerate": bool(result.degenerate),
    }


@dataclass(frozen=True, eq=False)
class SolveReport:
    """Equilibria of one game plus notes; text and dict renderings."""

    game: Game
    options: SolveOptions
    equilibria: tuple[EquilibriumResult, ...]
    strict_flags: tuple[bool, ...]
    notes: tuple[str, ...] = ()

    def to_dict(self) -> dict:
        return {
            "kind": "solve",
            "game": game_summary(self.game),
            "mode": self.options.mode,
            "tol": self.options.tol,
            "equilibrium_count": len(self.equilibria),
            "equilibria": [
                equilibrium_to_dict(self.game, r, s)
                for r, s in zip(self.equilibria, self.strict_flags)
            ],
            "notes": list(self.notes),
        }

    def render_text(self, max_rows: int = 24) -> str:
        game = self.game
        lines = [
            f"game {game.name or '<unnamed>'}: {len(game.players)} players, "
            f"K={game.K}, rule={game.rule.kind}, "
            f"{len(game.family)} partitions, {game.profile_count} profiles",
            f"mode={self.options.mode} tol={self.options.tol:g}",
            f"{len(self.equilibria)} validated equilibria",
        ]
        by_partition: dict[str, int] = {}
        for result in self.equilibria:
            for p, w in result.partition_distribution.items():
                if w > 1e-9:
                    by_partition[p.key] = by_partition.get(p.key, 0) + 1
        if by_partition:
            lines.append("equilibrium partitions (count of equilibria touching):")
            for key, cnt in sorted(
                by_partition.items(),
                key=lambda kv: self.game.family.index_of(
                    next(p for p in self.game.family if p.key == kv[0])
                ),
            ):
                named = pretty_partition(
                    next(p for p in game.family if p.key == key), game.players
                )
                lines.append(f"  {key}  {named}  x{cnt}")
        shown = self.equilibria[:max_rows]
        for idx, (result, strict) in enumerate(zip(shown, self.strict_flags)):
            dist = ", ".join(
                f"{p.key}:{w:.6g}"
                for p, w in sorted(
                    result.partition_distribution.items(),
                    key=lambda item: game.family.index_of(item[0]),
                )
            )
            tag = "strict" if strict else result.mode
            if result.degenerate:
                tag += ", family sample"
            probs = "; ".join(
                "[" + ", ".join(f"{x:.6g}" for x in v) + "]"
                for v in result.profile.vectors()
            )
            payoff = "(" + ", ".join(f"{x:g}" for x in result.payoffs) + ")"
            lines.append(
                f"#{idx}: {tag}; payoffs {payoff}; partition {dist}; "
                f"max_regret {result.max_regret:.3g}; profile {probs}"
            )
        if len(self.equilibria) > max_rows:
            lines.append(
                f"... {len(self.equilibria) - max_rows} more; use --format json "
                "for the full list"
            )
        for note in self.notes:
            lines.append(f"note: {note}")
        return "\n".join(lines)


def build_solve_report(game: Game, options: SolveOptions | None = None) -> SolveReport:
    """Run the solvers on one game and package the results.

    Pure equilibria come first, then deduplicated mixed ones; each result is
    tagged with its strict status. When a strict equilibrium coexists with
    weak-but-not-strict ones, a caveat note is emitted: uniqueness then holds
    only under the strict comparison, because switching the announced
    partition alone can leave the realized partition (and the payoff)
    unchanged.
    """
    options = options or SolveOptions()
    equilibria, solver_notes = _solve_game(game, options)
    strict_flags = tuple(
        is_equilibrium(game, r.profile, "strict", options.tol).ok for r in equilibria
    )
    if options.mode == "strict":
        pairs = [
            (r, s) for r, s in zip(equilibria, strict_flags) if s
        ]
        equilibria = tuple(r for r, _ in pairs)
        strict_flags = tuple(True for _ in pairs)
    notes = list(solver_notes)
    strict_count = sum(strict_flags)
    weak_only = len(equilibria) - strict_count
    if strict_count and weak_only:
        notes.append(
            "uniqueness caveat: "
            f"{strict_count} strict equilibrium(s) coexist with {weak_only} "
            "weak-but-not-strict one(s); a unilateral switch of the announced "
            "partition cannot change the realized partition, so those weak "
            "profiles cannot be improved upon and uniqueness holds only under "
            "the strict reading"
        )
    return SolveReport(
        game=game,
        options=options,
        equilibria=tuple(equilibria),
        strict_flags=tuple(strict_flags),
        notes=tuple(notes),
    )


def profiles_from_report(report_dict: dict) -> list[MixedProfile]:
    """Rebuild the mixed profiles listed in a solve report dict."""
    return [
        MixedProfile.from_vectors([np.asarray(v) for v in entry["profile"]])
        for entry in report_dict["equilibria"]
    ]


@dataclass(frozen=True, eq=False)
class ValidateReport:
    """Mechanism axioms per K plus the nesting verification."""

    family: GameFamily
    axioms: dict[int, MechanismAxiomReport]
    nesting: NestingReport

    @property
    def ok(self) -> bool:
        return all(r.ok for r in self.axioms.values()) and self.nesting.ok

    def to_dict(self) -> dict:
        return {
            "kind": "validate",
            "ok": self.ok,
            "axioms": {
                str(k): {
                    "ok": report.ok,
                    "maps_into_family": report.maps_into_family.ok,
                    "domains_disjoint": report.domains_disjoint.ok,
                    "domains_cover": report.domains_cover.ok,
                    "domain_sizes": {
                        p.key: size for p, size in sorted(
                            report.domain_sizes.items(),
                            key=lambda item: self.family[k].family.index_of(item[0]),
                        )
                    },
                }
                for k, report in self.axioms.items()
            },
            "nesting": {
                "ok": self.nesting.ok,
                "pairs": [
                    {
                        "k_small": pair.k_small,
                        "k_large": pair.k_large,
                        **{
                            name: {"ok": check.ok, "detail": check.detail}
                            for name, check in pair.checks.items()
                        },
                    }
                    for pair in self.nesting.pairs
                ],
            },
        }

    def render_text(self) -> str:
        lines = [f"validate: {'ok' if self.ok else 'FAILED'}"]
        for k, report in sorted(self.axioms.items()):
            lines.append(
                f"K={k}: axioms "
                f"maps_into_family={'ok' if report.maps_into_family.ok else 'FAIL'} "
                f"disjoint={'ok' if report.domains_disjoint.ok else 'FAIL'} "
                f"cover={'ok' if report.domains_cover.ok else 'FAIL'}"
            )
            sizes = ", ".join(
                f"{p.key}:{size}"
                for p, size in sorted(
                    report.domain_sizes.items(),
                    key=lambda item: self.family[k].family.index_of(item[0]),
                )
            )
            lines.append(f"  domain sizes: {sizes}")
        for pair in self.nesting.pairs:
            status = "ok" if pair.ok else "FAIL"
            lines.append(f"nesting K={pair.k_small} into K={pair.k_large}: {status}")
            for name, check in pair.checks.items():
                if not check.ok:
                    lines.append(f"  {name}: {check.detail}")
        return "\n".join(lines)


def build_validate_report(
    family: GameFamily, *, budget: int | None = None
) -> ValidateReport:
    axioms = {
        k: check_mechanism_axioms(game, budget=budget) for k, game in family
    }
    return ValidateReport(family=family, axioms=axioms, nesting=check_nesting(family))


@dataclass(frozen=True, eq=False)
class FamilyReport:
    """Cross-K equilibrium report with partition-support diffs."""

    family: GameFamily
    result: FamilyEquilibriumReport
    options: SolveOptions

    def to_dict(self) -> dict:
        per_k = []
        for entry in self.result.per_k:
            game = self.family[entry.K]
            per_k.append(
                {
                    "K": entry.K,
                    "error": entry.error,
                    "notes": list(entry.notes),
                    "equilibrium_count": len(entry.equilibria),
                    "equilibrium_partitions": [p.key for p in entry.partitions],
                    "equilibria": [
                        equilibrium_to_dict(
                            game,
                            r,
                            is_equilibrium(
                                game, r.profile, "strict", self.options.tol
                            ).ok,
                        )
                        for r in entry.equilibria
                    ],
                }
            )
        return {
            "kind": "family",
            "game": self.family.base.name,
            "per_k": per_k,
            "diffs": [
                {
                    "from_K": d.k_from,
                    "to_K": d.k_to,
                    "partitions_gained": [p.key for p in d.partitions_gained],
                    "partitions_lost": [p.key for p in d.partitions_lost],
                }
                for d in self.result.diffs
            ],
        }

    def render_text(self) -> str:
        lines = [f"family report: {self.family.base.name or '<unnamed>'}"]
        players = self.family[self.family.k_values[0]].players
        for entry in self.result.per_k:
            if entry.error:
                lines.append(f"K={entry.K}: ERROR {entry.error}")
                continue
            parts = ", ".join(
                f"{p.key} {pretty_partition(p, players)}" for p in entry.partitions
            )
            lines.append(
                f"K={entry.K}: {len(entry.equilibria)} equilibria; "
                f"partitions: {parts or '<none>'}"
            )
            for note in entry.notes:
                lines.append(f"  note: {note}")
        for d in self.result.diffs:
            gained = ", ".join(p.key for p in d.partitions_gained) or "-"
            lost = ", ".join(p.key for p in d.partitions_lost) or "-"
            lines.append(
                f"K={d.k_from} -> K={d.k_to}: partitions gained [{gained}], "
                f"lost [{lost}]"
            )
        return "\n".join(lines)
