"""Loading and validation of ranking lists, item registries, and manifests.

Heterogeneous sources (numeric citation metrics, ordinal grade scales) are
normalized into weak orderings: each list maps item ids to real-valued
levels, with a per-list direction flag saying whether larger levels mean
better. Ordinal grades are mapped to integers that preserve the declared
grade order; ties are exact equality of levels, never an epsilon window.
"""

from __future__ import annotations

import csv
import io
import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import IO, Iterable, Literal, Sequence

from .errors import (
    DuplicateEntryError,
    MissingHeaderError,
    UncoveredItemError,
    UnknownGradeError,
    UnknownItemError,
)

Direction = Literal["higher_is_better", "lower_is_better"]

RANKING_HEADER = ("item_id", "level")
REGISTRY_HEADER = ("item_id", "label")


@dataclass(frozen=True)
class ItemRegistry:
    """Canonical set of ranked items with stable identifiers.

    ``items`` is an ordered sequence of ``(item_id, label)`` pairs; the item
    at ``constraint_index`` is the reference whose ability is pinned to zero
    by the fitting code.
    """

    items: tuple[tuple[str, str], ...]
    constraint_index: int = 0

    def __post_init__(self) -> None:
        ids = [item_id for item_id, _ in self.items]
        if any(not item_id for item_id in ids):
            raise UnknownItemError("registry contains an empty item_id")
        if len(set(ids)) != len(ids):
            dupes = sorted({i for i in ids if ids.count(i) > 1})
            raise DuplicateEntryError(f"duplicate item_id(s) in registry: {', '.join(dupes)}")
        if not 0 <= self.constraint_index < len(self.items):
            raise IndexError(
                f"constraint_index {self.constraint_index} out of range for {len(self.items)} items"
            )

    @property
    def item_ids(self) -> tuple[str, ...]:
        return tuple(item_id for item_id, _ in self.items)

    @property
    def labels(self) -> tuple[str, ...]:
        return tuple(label for _, label in self.items)

    @property
    def n_items(self) -> int:
        return len(self.items)

    def index_of(self, item_id: str) -> int:
        try:
            return self.item_ids.index(item_id)
        except ValueError:
            raise UnknownItemError(f"item '{item_id}' not in registry") from None


@dataclass(frozen=True)
class RankingList:
    """One source's weak ordering over a subset of items.

    ``entries`` maps item ids to levels. ``direction`` states whether larger
    levels mean better quality; the tool never guesses it.
    """

    ranking_id: str
    year: int
    direction: Direction
    entries: dict[str, float]

    def __post_init__(self) -> None:
        if not self.ranking_id:
            raise ValueError("ranking_id must be non-empty")
        if self.direction not in ("higher_is_better", "lower_is_better"):
            raise ValueError(f"bad direction {self.direction!r}")
        if not self.entries:
            raise MissingHeaderError(f"ranking '{self.ranking_id}' has no entries")

    def rates(self, item_id: str) -> bool:
        return item_id in self.entries

    def strength(self, item_id: str) -> float:
        """Level normalized so that larger always means better."""
        level = self.entries[item_id]
        return level if self.direction == "higher_is_better" else -level

    @property
    def rated_ids(self) -> tuple[str, ...]:
        return tuple(self.entries)


@dataclass(frozen=True)
class Dataset:
    """A registry together with lists validated against it."""

    registry: ItemRegistry
    lists: tuple[RankingList, ...]

    @property
    def n_rankings(self) -> int:
        return len(self.lists)


def _read_rows(source: bytes | str | IO, expected_header: tuple[str, str], what: str) -> list[list[str]]:
    if isinstance(source, bytes):
        text = source.decode("utf-8-sig")
    elif isinstance(source, str):
        text = source.lstrip("﻿")
    else:
        raw = source.read()
        text = raw.decode("utf-8-sig") if isinstance(raw, bytes) else raw.lstrip("﻿")
    rows = [row for row in csv.reader(io.StringIO(text)) if row and any(cell.strip() for cell in row)]
    if not rows:
        raise MissingHeaderError(f"empty {what} source")
    header = tuple(cell.strip() for cell in rows[0])
    if header != expected_header:
        raise MissingHeaderError(
            f"{what} header must be '{','.join(expected_header)}', got '{','.join(header)}'"
        )
    body = []
    for row in rows[1:]:
        if len(row) != 2:
            raise MissingHeaderError(f"garbled {what} row: {row!r}")
        body.append([cell.strip() for cell in row])
    return body


def parse_ranking_csv(
    source: bytes | str | IO,
    *,
    ranking_id: str,
    year: int,
    direction: Direction,
    grade_order: Sequence[str] | None = None,
) -> RankingList:
    """Parse a ``item_id,level`` CSV into a :class:`RankingList`.

    With a ``grade_order`` (worst to best), level tokens are mapped to their
    1-based position, preserving the declared order. Without one, levels must
    parse as numbers and pass through unchanged.
    """
    rows = _read_rows(source, RANKING_HEADER, f"ranking '{ranking_id}'")
    grade_index: dict[str, int] | None = None
    if grade_order is not None:
        grade_index = {str(g): pos for pos, g in enumerate(grade_order, start=1)}
        if len(grade_index) != len(grade_order):
            raise UnknownGradeError(f"ranking '{ranking_id}': grade order contains duplicates")
    entries: dict[str, float] = {}
    for item_id, token in rows:
        if not item_id:
            raise MissingHeaderError(f"ranking '{ranking_id}': row with empty item_id")
        if item_id in entries:
            raise DuplicateEntryError(f"ranking '{ranking_id}': item '{item_id}' listed twice")
        if grade_index is not None:
            if token not in grade_index:
                raise UnknownGradeError(
                    f"ranking '{ranking_id}': level '{token}' not in declared grade order"
                )
            entries[item_id] = float(grade_index[token])
        else:
            try:
                entries[item_id] = float(token)
            except ValueError:
                raise UnknownGradeError(
                    f"ranking '{ranking_id}': non-numeric level '{token}' and no grade order declared"
                ) from None
    return RankingList(ranking_id=ranking_id, year=year, direction=direction, entries=entries)


def ranking_to_csv(ranking: RankingList) -> str:
    """Serialize entries back to the ``item_id,level`` CSV format."""
    out = io.StringIO()
    writer = csv.writer(out, lineterminator="\n")
    writer.writerow(RANKING_HEADER)
    for item_id, level in ranking.entries.items():
        writer.writerow([item_id, format(level, "g")])
    return out.getvalue()


def registry_from_csv(source: bytes | str | IO, *, constraint_item: str | None = None) -> ItemRegistry:
    """Parse a ``item_id,label`` CSV; the first row is the reference item
    unless ``constraint_item`` overrides it."""
    rows = _read_rows(source, REGISTRY_HEADER, "registry")
    if not rows:
        raise MissingHeaderError("registry has no items")
    items = tuple((item_id, label) for item_id, label in rows)
    registry = ItemRegistry(items=items, constraint_index=0)
    if constraint_item is not None:
        registry = ItemRegistry(items=items, constraint_index=registry.index_of(constraint_item))
    return registry


def validate_against_registry(lists: Iterable[RankingList], registry: ItemRegistry) -> Dataset:
    """Check that lists and registry cover each other.

    Every item referenced by a list must resolve in the registry, and every
    registry item must be rated by at least one list.
    """
    lists = tuple(lists)
    known = set(registry.item_ids)
    covered: set[str] = set()
    for ranking in lists:
        unknown = sorted(set(ranking.entries) - known)
        if unknown:
            raise UnknownItemError(
                f"ranking '{ranking.ranking_id}' references unknown item(s): {', '.join(unknown)}"
            )
        covered.update(ranking.entries)
    uncovered = sorted(known - covered)
    if uncovered:
        raise UncoveredItemError(f"registry item(s) rated by no list: {', '.join(uncovered)}")
    return Dataset(registry=registry, lists=lists)


# --- manifest ---------------------------------------------------------------

@dataclass(frozen=True)
class ManifestEntry:
    path: str
    ranking_id: str
    year: int
    direction: Direction
    grade_order: tuple[str, ...] | None = None


@dataclass(frozen=True)
class Manifest:
    """Structured description of a dataset on disk: registry plus rankings."""

    registry_path: str
    rankings: tuple[ManifestEntry, ...]
    constraint_item: str | None = None
    seed: int = 0
    base_dir: Path = field(default_factory=Path)

    def resolve(self, path: str) -> Path:
        p = Path(path)
        return p if p.is_absolute() else self.base_dir / p


def load_manifest(path: str | Path) -> Manifest:
    """Load a JSON dataset manifest; relative paths resolve against its directory."""
    path = Path(path)
    try:
        with open(path, encoding="utf-8") as fh:
            raw = json.load(fh)
        entries = []
        for entry in raw["rankings"]:
            entries.append(
                ManifestEntry(
                    path=entry["path"],
                    ranking_id=entry["ranking_id"],
                    year=int(entry["year"]),
                    direction=entry["direction"],
                    grade_order=tuple(entry["grade_order"]) if entry.get("grade_order") else None,
                )
            )
        return Manifest(
            registry_path=raw["registry"],
            rankings=tuple(entries),
            constraint_item=raw.get("constraint_item"),
            seed=int(raw.get("seed", 0)),
            base_dir=path.parent,
        )
    except (json.JSONDecodeError, KeyError, TypeError, ValueError) as exc:
        raise MissingHeaderError(f"garbled manifest {path}: {exc}") from exc


def load_dataset(manifest: Manifest, *, year_min: int | None = None) -> Dataset:
    """Parse every file referenced by the manifest and validate the result.

    ``year_min`` drops rankings older than the given year before validation,
    so a currency-filtered run is exactly a run on the filtered manifest.
    """
    with open(manifest.resolve(manifest.registry_path), "rb") as fh:
        registry = registry_from_csv(fh, constraint_item=manifest.constraint_item)
    lists = []
    for entry in manifest.rankings:
        if year_min is not None and entry.year < year_min:
            continue
        with open(manifest.resolve(entry.path), "rb") as fh:
            lists.append(
                parse_ranking_csv(
                    fh,
                    ranking_id=entry.ranking_id,
                    year=entry.year,
                    direction=entry.direction,
                    grade_order=entry.grade_order,
                )
            )
    return validate_against_registry(lists, registry)
