"""Per-tweet confidences for the socio-linguistic characteristics.

Confidences arrive either from an externally produced CSV table or from
the built-in deterministic lexicon scorer (a stand-in that lets the
pipeline run end-to-end without model inference). All values live in
[0, 1]; binarization thresholds them into 0/1 labels.
"""

from __future__ import annotations

import csv
import re
from dataclasses import dataclass
from importlib import resources
from typing import Iterable

import numpy as np

from coordnet.corpus import MATCH_NORMALIZE, Corpus, TweetRecord, normalize_text

ATTITUDES = ("vote_for", "vote_against", "moral", "immoral")

CONCERNS = (
    "economy",
    "terrorism",
    "religion",
    "immigration",
    "international_alliances",
    "russia_relations",
    "national_identity",
    "environment",
    "misinformation",
    "democracy",
)

EMOTIONS = (
    "anger_hate",
    "embarrassment_shame",
    "admiration_love",
    "optimism_hope",
    "joy_happiness",
    "pride_national",
    "fear_pessimism",
    "amusement",
    "positive_other",
    "negative_other",
)

CHARACTERISTICS: tuple[str, ...] = ATTITUDES + CONCERNS + EMOTIONS

GROUP_OF = {name: "attitude" for name in ATTITUDES}
GROUP_OF.update({name: "concern" for name in CONCERNS})
GROUP_OF.update({name: "emotion" for name in EMOTIONS})

# Accepted alternate column/row names ("sarcasm" is the amusement group's
# other common label).
ALIASES = {"sarcasm": "amusement"}

_COLUMN_INDEX = {name: i for i, name in enumerate(CHARACTERISTICS)}

N_CHARACTERISTICS = len(CHARACTERISTICS)

assert N_CHARACTERISTICS == len(ATTITUDES) + len(CONCERNS) + len(EMOTIONS)


def canonical_name(name: str) -> str:
    key = name.strip().lower()
    key = ALIASES.get(key, key)
    if key not in _COLUMN_INDEX:
        raise ValueError(f"unknown characteristic: {name!r}")
    return key


def characteristic_index(name: str) -> int:
    return _COLUMN_INDEX[canonical_name(name)]


class TableError(ValueError):
    """A malformed confidence or lexicon file."""


class CharacteristicTable:
    """tweet_id -> one confidence in [0, 1] per registered characteristic.

    Lookups for tweets without a row return all zeros and increment
    missing_lookups (external model runs may not cover every tweet).
    """

    def __init__(self, tweet_ids: list[str], matrix: np.ndarray, provenance: str):
        self.tweet_ids = tweet_ids
        self.matrix = matrix
        self.provenance = provenance
        self.missing_lookups = 0
        self.missing_values = 0
        self._row_of = {tid: i for i, tid in enumerate(tweet_ids)}
        self._zeros = np.zeros(N_CHARACTERISTICS, dtype=np.float64)

    def __len__(self) -> int:
        return len(self.tweet_ids)

    def __contains__(self, tweet_id: str) -> bool:
        return tweet_id in self._row_of

    def get(self, tweet_id: str) -> np.ndarray:
        row = self._row_of.get(tweet_id)
        if row is None:
            self.missing_lookups += 1
            return self._zeros
        return self.matrix[row]

    def rows_for(self, tweet_ids: Iterable[str]) -> np.ndarray:
        """Confidence matrix for the given tweets (zeros where missing)."""
        return np.vstack([self.get(tid) for tid in tweet_ids])

    def column_index(self, name: str) -> int:
        return characteristic_index(name)

    def column(self, name: str) -> np.ndarray:
        return self.matrix[:, characteristic_index(name)]


def load_confidences(source) -> CharacteristicTable:
    """Load an external confidence CSV: tweet_id plus one column per
    registered characteristic.

    Columns may appear in any order; unknown or absent characteristics,
    duplicate tweet_ids, and out-of-range values are errors. Empty cells
    default to 0.0 and are counted in missing_values.
    """
    if isinstance(source, (str, bytes)) or hasattr(source, "__fspath__"):
        with open(source, "r", encoding="utf-8", newline="") as fp:
            return load_confidences(fp)
    reader = csv.reader(source)
    try:
        header = next(reader)
    except StopIteration:
        raise TableError("empty confidence file") from None
    if not header or header[0].strip().lower() != "tweet_id":
        raise TableError("first column must be tweet_id")
    columns = []
    for raw in header[1:]:
        try:
            columns.append(canonical_name(raw))
        except ValueError:
            raise TableError(f"unknown column: {raw!r}") from None
    seen_cols = set(columns)
    if len(seen_cols) != len(columns):
        dupes = sorted({c for c in columns if columns.count(c) > 1})
        raise TableError(f"duplicate columns: {', '.join(dupes)}")
    missing = [name for name in CHARACTERISTICS if name not in seen_cols]
    if missing:
        raise TableError(f"missing columns: {', '.join(missing)}")

    tweet_ids: list[str] = []
    rows: list[list[float]] = []
    seen_ids: set[str] = set()
    missing_values = 0
    for line_no, row in enumerate(reader, start=2):
        if not row:
            continue
        if len(row) != len(columns) + 1:
            raise TableError(f"row {line_no}: expected {len(columns) + 1} fields, got {len(row)}")
        tid = row[0]
        if tid in seen_ids:
            raise TableError(f"row {line_no}: duplicate tweet_id {tid!r}")
        seen_ids.add(tid)
        values = [0.0] * N_CHARACTERISTICS
        for col_name, cell in zip(columns, row[1:]):
            if cell.strip() == "":
                missing_values += 1
                continue
            try:
                v = float(cell)
            except ValueError:
                raise TableError(f"row {line_no}, column {col_name}: not a number: {cell!r}") from None
            if not 0.0 <= v <= 1.0:
                raise TableError(f"row {line_no}, column {col_name}: value {v} outside [0, 1]")
            values[_COLUMN_INDEX[col_name]] = v
        tweet_ids.append(tid)
        rows.append(values)
    matrix = (
        np.array(rows, dtype=np.float64)
        if rows
        else np.empty((0, N_CHARACTERISTICS), dtype=np.float64)
    )
    table = CharacteristicTable(tweet_ids, matrix, provenance="external")
    table.missing_values = missing_values
    return table


def write_confidences(table: CharacteristicTable, fp) -> None:
    writer = csv.writer(fp, lineterminator="\n")
    writer.writerow(("tweet_id",) + CHARACTERISTICS)
    for i, tid in enumerate(table.tweet_ids):
        writer.writerow([tid] + [repr(float(v)) for v in table.matrix[i]])


# ---------------------------------------------------------------------------
# Lexicon scorer
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class LexiconEntry:
    characteristic: str
    phrase: str
    weight: float
    language: str | None = None


class Lexicon:
    """Weighted phrase lists per characteristic, combined by noisy-OR."""

    def __init__(self, entries: list[LexiconEntry]):
        self.entries = entries
        self._compiled = [
            (
                _COLUMN_INDEX[e.characteristic],
                re.compile(r"(?<!\w)" + re.escape(e.phrase) + r"(?!\w)"),
                e.weight,
                e.language,
            )
            for e in entries
        ]

    def __len__(self) -> int:
        return len(self.entries)

    def score(self, tweet: TweetRecord) -> np.ndarray:
        return lexicon_score(tweet, self)


def load_lexicon(source) -> Lexicon:
    """Load a lexicon CSV: characteristic,phrase,weight[,language]."""
    if isinstance(source, (str, bytes)) or hasattr(source, "__fspath__"):
        with open(source, "r", encoding="utf-8", newline="") as fp:
            return load_lexicon(fp)
    reader = csv.reader(source)
    header = next(reader, None)
    if header is None:
        raise TableError("empty lexicon file")
    entries = []
    for line_no, row in enumerate(reader, start=2):
        if not row:
            continue
        if len(row) < 3:
            raise TableError(f"row {line_no}: expected characteristic,phrase,weight")
        name = canonical_name(row[0])
        phrase = normalize_text(row[1], MATCH_NORMALIZE)
        if not phrase:
            raise TableError(f"row {line_no}: empty phrase")
        try:
            weight = float(row[2])
        except ValueError:
            raise TableError(f"row {line_no}: weight not a number: {row[2]!r}") from None
        if not 0.0 < weight <= 1.0:
            raise TableError(f"row {line_no}: weight {weight} outside (0, 1]")
        language = row[3].strip() if len(row) > 3 and row[3].strip() else None
        entries.append(LexiconEntry(name, phrase, weight, language))
    return Lexicon(entries)


def builtin_lexicon() -> Lexicon:
    """The packaged demonstration lexicon (deterministic stand-in scorer)."""
    ref = resources.files("coordnet.data").joinpath("default_lexicon.csv")
    with ref.open("r", encoding="utf-8") as fp:
        return load_lexicon(fp)


def lexicon_score(tweet: TweetRecord, lexicon: Lexicon) -> np.ndarray:
    """Noisy-OR confidence per characteristic from matched phrases.

    Each occurrence of a matched phrase contributes its weight:
    confidence = 1 - prod(1 - w) over occurrences. Matching runs on
    normalized text (URLs stripped, mentions replaced, hashtag marks
    removed, lowercased; accents kept).
    """
    text = normalize_text(tweet.text, MATCH_NORMALIZE)
    miss = np.ones(N_CHARACTERISTICS, dtype=np.float64)
    for col, pattern, weight, language in lexicon._compiled:
        if language is not None and language != tweet.language:
            continue
        hits = len(pattern.findall(text))
        if hits:
            miss[col] *= (1.0 - weight) ** hits
    return 1.0 - miss


def score_corpus(corpus: Corpus, lexicon: Lexicon, threads: int = 1) -> CharacteristicTable:
    """Score every distinct tweet_id in the corpus with the lexicon.

    Per-tweet scoring is independent, so the work can fan out over a
    thread pool; rows are assembled in corpus order either way.
    """
    seen: set[str] = set()
    records = []
    for rec in corpus.records:
        if rec.tweet_id in seen:
            continue
        seen.add(rec.tweet_id)
        records.append(rec)
    if threads > 1 and len(records) > 1:
        from concurrent.futures import ThreadPoolExecutor

        with ThreadPoolExecutor(max_workers=threads) as pool:
            scores = list(pool.map(lexicon.score, records, chunksize=256))
    else:
        scores = [lexicon.score(rec) for rec in records]
    matrix = (
        np.vstack(scores) if scores else np.empty((0, N_CHARACTERISTICS), dtype=np.float64)
    )
    return CharacteristicTable([r.tweet_id for r in records], matrix, provenance="lexicon")


def binarize(table: CharacteristicTable, threshold: float = 0.5) -> CharacteristicTable:
    """Threshold confidences into 0/1 labels (label 1 iff value >= threshold)."""
    if not 0.0 < threshold < 1.0:
        raise ValueError("threshold must be in (0, 1)")
    labels = np.where(table.matrix >= threshold, 1.0, 0.0)
    return CharacteristicTable(list(table.tweet_ids), labels, provenance=table.provenance)
