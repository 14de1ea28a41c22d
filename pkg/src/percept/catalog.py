"""Reference data for the perception framework.

Twelve perception dimensions, each measured by one or more Likert-rated
statements (25 in total). The catalog is immutable reference data shared by
every other module; two statements are reverse-coded (agreement indicates a
LOWER dimension value).
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass, field
from enum import Enum


class Dimension(str, Enum):
    """The twelve perception dimensions."""

    NEWSWORTHINESS = "Newsworthiness"
    UNDERSTANDABILITY = "Understandability"
    EXPERTISE = "Expertise"
    IMPORTANCE = "Importance"
    FUN = "Fun"
    SURPRISINGNESS = "Surprisingness"
    CONTROVERSY = "Controversy"
    EXAGGERATION = "Exaggeration"
    INTERESTINGNESS = "Interestingness"
    BENEFIT = "Benefit"
    SHARING = "Sharing"
    READING = "Reading"


DIMENSIONS: tuple[Dimension, ...] = tuple(Dimension)

# Expected statement counts per dimension for the canonical catalog.
EXPECTED_GROUP_SIZES: dict[Dimension, int] = {
    Dimension.NEWSWORTHINESS: 1,
    Dimension.UNDERSTANDABILITY: 1,
    Dimension.EXPERTISE: 1,
    Dimension.IMPORTANCE: 1,
    Dimension.FUN: 1,
    Dimension.SURPRISINGNESS: 1,
    Dimension.CONTROVERSY: 1,
    Dimension.EXAGGERATION: 1,
    Dimension.INTERESTINGNESS: 2,
    Dimension.BENEFIT: 6,
    Dimension.SHARING: 3,
    Dimension.READING: 6,
}


class UnknownStatementError(KeyError):
    """Raised when a statement id is not present in the catalog."""


@dataclass(frozen=True)
class Statement:
    id: str
    text: str
    dimension: Dimension
    reverse_coded: bool = False


@dataclass(frozen=True)
class StatementCatalog:
    statements: tuple[Statement, ...]
    version: str = "1.0"
    _by_id: dict[str, Statement] = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        object.__setattr__(self, "_by_id", {s.id: s for s in self.statements})

    def __len__(self) -> int:
        return len(self.statements)

    def __contains__(self, statement_id: str) -> bool:
        return statement_id in self._by_id

    def get(self, statement_id: str) -> Statement:
        try:
            return self._by_id[statement_id]
        except KeyError:
            raise UnknownStatementError(f"unknown statement id: {statement_id!r}") from None

    def statement_ids(self) -> list[str]:
        return [s.id for s in self.statements]

    def statements_for(self, dimension: Dimension) -> list[Statement]:
        return [s for s in self.statements if s.dimension == dimension]

    def to_dict(self) -> dict:
        return {
            "version": self.version,
            "statements": [
                {
                    "id": s.id,
                    "text": s.text,
                    "dimension": s.dimension.value,
                    "reverse_coded": s.reverse_coded,
                }
                for s in self.statements
            ],
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True, ensure_ascii=False)

    @classmethod
    def from_dict(cls, data: dict) -> "StatementCatalog":
        statements = tuple(
            Statement(
                id=item["id"],
                text=item["text"],
                dimension=Dimension(item["dimension"]),
                reverse_coded=bool(item["reverse_coded"]),
            )
            for item in data["statements"]
        )
        return cls(statements=statements, version=data.get("version", "1.0"))

    @classmethod
    def from_json(cls, text: str) -> "StatementCatalog":
        return cls.from_dict(json.loads(text))


def catalog_hash(catalog: StatementCatalog) -> str:
    """Content hash of the canonical serialization; ties models to catalogs."""
    return hashlib.sha256(catalog.to_json().encode("utf-8")).hexdigest()


_DEFAULT_STATEMENTS: tuple[Statement, ...] = (
    Statement(
        "newsworthy_publish",
        "The science news story should be published in the news",
        Dimension.NEWSWORTHINESS,
    ),
    Statement(
        "understand_can",
        "I can understand the science news story",
        Dimension.UNDERSTANDABILITY,
    ),
    Statement(
        "expertise_needed",
        "Understanding the science news story requires specialized knowledge",
        Dimension.EXPERTISE,
    ),
    Statement(
        "important_issue",
        "The science news story tackles an important issue",
        Dimension.IMPORTANCE,
    ),
    Statement(
        "fun_to_read",
        "The science news story is fun to read",
        Dimension.FUN,
    ),
    Statement(
        "surprising_finding",
        "The scientific finding seems surprising to me",
        Dimension.SURPRISINGNESS,
    ),
    Statement(
        "controversial_finding",
        "The scientific finding could be controversial",
        Dimension.CONTROVERSY,
    ),
    Statement(
        "exaggerated_story",
        "This science news story is overstated or exaggerated",
        Dimension.EXAGGERATION,
    ),
    Statement(
        "interest_me",
        "The science news story sounds interesting to me",
        Dimension.INTERESTINGNESS,
    ),
    Statement(
        "interest_public",
        "The science news story could be interesting to the general public",
        Dimension.INTERESTINGNESS,
    ),
    Statement(
        "benefit_public",
        "Learning about this finding could benefit the general public",
        Dimension.BENEFIT,
    ),
    Statement(
        "benefit_segment",
        "Learning about this finding could benefit a segment of the public",
        Dimension.BENEFIT,
    ),
    Statement(
        "benefit_policy",
        "Learning about this finding could benefit policy makers",
        Dimension.BENEFIT,
    ),
    Statement(
        "benefit_industry",
        "Learning about this finding could benefit companies in the related industries",
        Dimension.BENEFIT,
    ),
    Statement(
        "benefit_learned",
        "I learned something useful from the science news story",
        Dimension.BENEFIT,
    ),
    Statement(
        "benefit_many",
        "Knowing about this science could benefit a lot of people",
        Dimension.BENEFIT,
    ),
    Statement(
        "share_direct",
        "I would share this science news story with someone I know directly",
        Dimension.SHARING,
    ),
    Statement(
        "share_forum",
        "I would share this science news story with a wider forum like a mailing list, Twitter, Reddit",
        Dimension.SHARING,
    ),
    Statement(
        "share_unlikely",
        "I would be unlikely to share this science news story with anyone",
        Dimension.SHARING,
        reverse_coded=True,
    ),
    Statement(
        "read_general_news",
        "If I'm browsing news articles from general news outlets (e.g. BBC, New York Times, Fox News), "
        "I would be likely to open and read the science news story above",
        Dimension.READING,
    ),
    Statement(
        "read_scitech",
        "If I'm browsing news articles from science and technology media (e.g. Scientific American, "
        "National Geographic), I would be likely to open and read the science news story above",
        Dimension.READING,
    ),
    Statement(
        "read_print",
        "If I'm browsing news articles from other popular printing media (e.g. Vogue, GQ, Elle), "
        "I would be likely to open and read the science news story above",
        Dimension.READING,
    ),
    Statement(
        "read_popular_media",
        "If I'm browsing news articles from other popular media (e.g. TV and radio), "
        "I would be likely to open and read the science news story above",
        Dimension.READING,
    ),
    Statement(
        "read_social_feed",
        "I would be willing to read the science news story in my social media feed",
        Dimension.READING,
    ),
    Statement(
        "read_not_public",
        "It should not be published in public media outside the science community",
        Dimension.READING,
        reverse_coded=True,
    ),
)


def default_catalog() -> StatementCatalog:
    """The canonical 25-statement catalog.

    Deterministic: repeated calls serialize byte-identically.
    """
    return StatementCatalog(statements=_DEFAULT_STATEMENTS, version="1.0")


def dimension_of(catalog: StatementCatalog, statement_id: str) -> Dimension:
    """Dimension owning a statement; raises UnknownStatementError for absent ids."""
    return catalog.get(statement_id).dimension


def validate_catalog(catalog: StatementCatalog) -> list[str]:
    """Check catalog invariants; returns a list of violation messages (empty = valid)."""
    violations: list[str] = []

    if len(catalog.statements) != 25:
        violations.append(f"statement count {len(catalog.statements)} != 25")

    seen: set[str] = set()
    for s in catalog.statements:
        if s.id in seen:
            violations.append(f"duplicate id: {s.id}")
        seen.add(s.id)
        if not s.text.strip():
            violations.append(f"empty text for statement {s.id}")

    counts = {d: 0 for d in DIMENSIONS}
    for s in catalog.statements:
        counts[s.dimension] += 1
    for d, expected in EXPECTED_GROUP_SIZES.items():
        if counts[d] != expected:
            violations.append(f"{d.value}: {counts[d]} statements, expected {expected}")

    n_reversed = sum(1 for s in catalog.statements if s.reverse_coded)
    if n_reversed != 2:
        violations.append(f"reverse-coded count {n_reversed} != 2")

    return violations
