"""Leakage-safe dataset partitioning.

Two protocols, both deterministic given their inputs:

* cause-of-action disjoint train/test splits for token-level records: whole
  CoA groups are assigned to one side only, so no legal grounds seen in
  training ever appear in the test set;
* leave-one-domain-out folds for premise/hypothesis records: each fold
  holds out one legal domain entirely and trains on the rest.

Plans serialize as id lists, never as copied data, so they stay small and
diffable.
"""

from __future__ import annotations

import random
from dataclasses import dataclass
from typing import Mapping, Sequence

from .corpus import LegalDomain, NerRecord, NliRecord
from .errors import SplitError

__all__ = ["SplitPlan", "Fold", "FoldPlan", "coa_split", "leave_one_out"]


@dataclass(frozen=True)
class SplitPlan:
    """A train/test partition by record id."""

    train_ids: frozenset[str]
    test_ids: frozenset[str]
    seed: int
    test_fraction_target: float

    def to_json_dict(self) -> dict:
        return {
            "seed": self.seed,
            "test_fraction_target": self.test_fraction_target,
            "train_ids": sorted(self.train_ids),
            "test_ids": sorted(self.test_ids),
        }

    @classmethod
    def from_json_dict(cls, obj: Mapping) -> "SplitPlan":
        return cls(
            train_ids=frozenset(obj["train_ids"]),
            test_ids=frozenset(obj["test_ids"]),
            seed=int(obj["seed"]),
            test_fraction_target=float(obj["test_fraction_target"]),
        )


@dataclass(frozen=True)
class Fold:
    held_out_domain: LegalDomain
    train_ids: frozenset[str]
    test_ids: frozenset[str]

    def to_json_dict(self) -> dict:
        return {
            "held_out_domain": self.held_out_domain.name,
            "train_ids": sorted(self.train_ids),
            "test_ids": sorted(self.test_ids),
        }


@dataclass(frozen=True)
class FoldPlan:
    """One fold per distinct domain, in canonical domain order."""

    folds: tuple[Fold, ...]

    def to_json_dict(self) -> dict:
        return {"folds": [f.to_json_dict() for f in self.folds]}

    @classmethod
    def from_json_dict(cls, obj: Mapping) -> "FoldPlan":
        folds = tuple(
            Fold(
                held_out_domain=LegalDomain.from_string(f["held_out_domain"]),
                train_ids=frozenset(f["train_ids"]),
                test_ids=frozenset(f["test_ids"]),
            )
            for f in obj["folds"]
        )
        return cls(folds=folds)


def _check_unique_ids(ids: Sequence[str]) -> None:
    if len(set(ids)) != len(ids):
        seen = set()
        for i in ids:
            if i in seen:
                raise SplitError(f"duplicate record id: {i!r}")
            seen.add(i)


def coa_split(records: Sequence[NerRecord], test_fraction: float, seed: int) -> SplitPlan:
    """Assign whole cause-of-action groups to the test side, shuffled by
    ``seed``, until the test record count first reaches or exceeds
    ``test_fraction * len(records)``.

    Records without a cause of action form a sentinel group that always goes
    to the train side, keeping the test side's provenance clean. Requires at
    least two distinct cause-of-action values, otherwise a disjoint split is
    impossible.
    """
    if not (0.0 < test_fraction < 1.0):
        raise ValueError(f"test_fraction must be in (0, 1), got {test_fraction}")
    _check_unique_ids([r.id for r in records])

    groups: dict[str, list[str]] = {}
    sentinel_ids: list[str] = []
    for r in records:
        coa = r.cause_of_action
        if coa is None or not coa.strip():
            sentinel_ids.append(r.id)
        else:
            groups.setdefault(coa, []).append(r.id)
    if len(groups) < 2:
        raise SplitError(
            f"need at least 2 distinct cause-of-action groups for a disjoint split, got {len(groups)}"
        )

    keys = sorted(groups)
    random.Random(seed).shuffle(keys)

    target = test_fraction * len(records)
    test_ids: set[str] = set()
    for key in keys:
        test_ids.update(groups[key])
        if len(test_ids) >= target:
            break
    train_ids = {r.id for r in records} - test_ids
    return SplitPlan(
        train_ids=frozenset(train_ids),
        test_ids=frozenset(test_ids),
        seed=seed,
        test_fraction_target=test_fraction,
    )


def leave_one_out(records: Sequence[NliRecord]) -> FoldPlan:
    """Build one fold per distinct legal domain; each fold tests exactly the
    held-out domain's records and trains on everything else.

    Folds are ordered canonically (the four known domains first, then other
    domains lexicographically). Requires at least two distinct domains.
    """
    _check_unique_ids([r.id for r in records])
    by_domain: dict[LegalDomain, list[str]] = {}
    for r in records:
        by_domain.setdefault(r.domain, []).append(r.id)
    if len(by_domain) < 2:
        raise SplitError(
            f"need at least 2 distinct domains for leave-one-out folds, got {len(by_domain)}"
        )
    all_ids = {r.id for r in records}
    folds = []
    for domain in sorted(by_domain, key=lambda d: d.sort_key):
        test = frozenset(by_domain[domain])
        folds.append(Fold(held_out_domain=domain, train_ids=frozenset(all_ids - test), test_ids=test))
    return FoldPlan(folds=tuple(folds))
