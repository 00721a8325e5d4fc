"""Vocabulary, viseme analysis, homophene clustering, distractor choice,
and free-text answer grading.

Data files:
  - pronunciation dictionary: lines "WORD PH1 PH2 ..." (ARPABET codes,
    optional stress digits); ";;;" starts a comment
  - viseme map: TSV "PHONEME<TAB>CLASS"; "#" starts a comment
  - vocabulary: JSON array of VocabEntry objects
"""

from __future__ import annotations

import json
import random
import re
from dataclasses import dataclass
from importlib import resources

PROTOCOLS = ("WL", "SL", "MWIS")

__all__ = [
    "PROTOCOLS",
    "OutOfVocabulary",
    "InsufficientPool",
    "VocabError",
    "VocabEntry",
    "VisemeSequence",
    "HomopheneCluster",
    "GradingConfig",
    "load_pron_dict",
    "load_viseme_map",
    "load_vocab",
    "default_pron_dict",
    "default_viseme_map",
    "default_vocab",
    "viseme_sequence",
    "cluster_homophenes",
    "generate_distractors",
    "edit_distance",
    "grade_free_text",
]


class OutOfVocabulary(KeyError):
    pass


class InsufficientPool(ValueError):
    pass


class VocabError(ValueError):
    pass


_STRESS = re.compile(r"\d+$")
_VARIANT = re.compile(r"\(\d+\)$")  # alternate-pronunciation marker: WORD(2)


def load_pron_dict(path) -> dict[str, tuple[str, ...]]:
    """Word -> phoneme codes (stress digits stripped).  First listed
    pronunciation wins when a word repeats or carries a (2)-style
    variant marker."""
    out: dict[str, tuple[str, ...]] = {}
    with open(path, encoding="utf-8") as fh:
        for raw in fh:
            line = raw.strip()
            if not line or line.startswith(";;;"):
                continue
            parts = line.split()
            word = _VARIANT.sub("", parts[0].casefold())
            if word in out:
                continue
            out[word] = tuple(_STRESS.sub("", p).upper() for p in parts[1:])
    return out


def load_viseme_map(path) -> dict[str, str]:
    out: dict[str, str] = {}
    with open(path, encoding="utf-8") as fh:
        for raw in fh:
            line = raw.strip()
            if not line or line.startswith("#"):
                continue
            phoneme, cls = line.split("\t")
            out[phoneme.upper()] = cls
    return out


def _data_path(name: str):
    return resources.files("liptrain.data").joinpath(name)


def default_pron_dict() -> dict[str, tuple[str, ...]]:
    with resources.as_file(_data_path("pron_test.dict")) as p:
        return load_pron_dict(p)


def default_viseme_map() -> dict[str, str]:
    with resources.as_file(_data_path("visemes_13.tsv")) as p:
        return load_viseme_map(p)


@dataclass(frozen=True)
class VisemeSequence:
    """A word with its phoneme string and viseme-class string.

    Equality and hashing look at the visemes only: two words compare
    equal exactly when a lipreader cannot tell them apart.
    """

    word: str
    phonemes: tuple[str, ...]
    visemes: tuple[str, ...]

    def __eq__(self, other) -> bool:
        if not isinstance(other, VisemeSequence):
            return NotImplemented
        return self.visemes == other.visemes

    def __hash__(self) -> int:
        return hash(self.visemes)

    @property
    def key(self) -> str:
        return "-".join(self.visemes)


def viseme_sequence(word: str, pron_dict: dict[str, tuple[str, ...]],
                    viseme_map: dict[str, str]) -> VisemeSequence:
    folded = word.casefold().strip()
    if folded not in pron_dict:
        raise OutOfVocabulary(folded)
    phonemes = pron_dict[folded]
    try:
        visemes = tuple(viseme_map[p] for p in phonemes)
    except KeyError as exc:
        raise VocabError(f"phoneme {exc.args[0]!r} of {word!r} missing from viseme map") from exc
    return VisemeSequence(folded, phonemes, visemes)


@dataclass(frozen=True)
class HomopheneCluster:
    viseme_key: str
    members: frozenset[str]


def cluster_homophenes(words, pron_dict, viseme_map) -> tuple[list[HomopheneCluster], list[str]]:
    """Partition words by exact viseme-sequence equality.

    Returns (clusters, skipped) where skipped lists out-of-vocabulary
    words.  Clusters are sorted by key for determinism.
    """
    groups: dict[tuple[str, ...], set[str]] = {}
    skipped: list[str] = []
    for word in words:
        try:
            seq = viseme_sequence(word, pron_dict, viseme_map)
        except OutOfVocabulary:
            skipped.append(word)
            continue
        groups.setdefault(seq.visemes, set()).add(seq.word)
    clusters = [
        HomopheneCluster("-".join(k), frozenset(v))
        for k, v in sorted(groups.items())
    ]
    return clusters, skipped


def edit_distance(a, b) -> int:
    """Levenshtein distance between two sequences (unit costs)."""
    if len(a) < len(b):
        a, b = b, a
    prev = list(range(len(b) + 1))
    for i, ca in enumerate(a, 1):
        cur = [i]
        for j, cb in enumerate(b, 1):
            cur.append(min(prev[j] + 1, cur[j - 1] + 1, prev[j - 1] + (ca != cb)))
        prev = cur
    return prev[-1]


def generate_distractors(answer: str, k: int, pool, rng_seed: int,
                         pron_dict, viseme_map) -> list[str]:
    """Pick k wrong options for a word question.

    Preference: exact homophenes of the answer, then words whose viseme
    sequence is closest by edit distance, then pool words with no
    pronunciation (random).  Deterministic for a given seed; never
    returns the answer or a duplicate.
    """
    if k < 0:
        raise ValueError("k must be >= 0")
    folded = answer.casefold().strip()
    candidates: list[str] = []
    seen = {folded}
    for w in pool:
        wf = w.casefold().strip()
        if wf in seen:
            continue
        seen.add(wf)
        candidates.append(wf)
    if len(candidates) < k:
        raise InsufficientPool(f"pool has {len(candidates)} usable words, need {k}")
    if k == 0:
        return []

    try:
        target = viseme_sequence(folded, pron_dict, viseme_map)
    except OutOfVocabulary:
        target = None

    rng = random.Random(rng_seed)
    jitter = {w: rng.random() for w in candidates}

    def rank(w: str):
        if target is not None:
            try:
                seq = viseme_sequence(w, pron_dict, viseme_map)
            except OutOfVocabulary:
                return (2, 0, jitter[w])
            dist = edit_distance(seq.visemes, target.visemes)
            return (0 if dist == 0 else 1, dist, jitter[w])
        return (2, 0, jitter[w])

    candidates.sort(key=rank)
    return candidates[:k]


@dataclass(frozen=True)
class GradingConfig:
    """Spelling tolerance: distance <= len(truth) // divisor, with a floor
    of 1 allowed mistake once the answer reaches floor_from_length."""

    divisor: int = 5
    floor_from_length: int = 4

    def tolerance(self, truth: str) -> int:
        tol = max(0, len(truth) // self.divisor)
        if len(truth) >= self.floor_from_length:
            tol = max(tol, 1)
        return tol


def grade_free_text(submitted: str, truth: str,
                    config: GradingConfig = GradingConfig()) -> bool:
    """Case-folded, trimmed comparison accepting minor spelling mistakes."""
    s = submitted.casefold().strip()
    t = truth.casefold().strip()
    return edit_distance(s, t) <= config.tolerance(t)


@dataclass(frozen=True)
class VocabEntry:
    label_id: str
    text: str
    protocol: str
    context_tag: str | None = None
    masked_index: int | None = None

    def __post_init__(self) -> None:
        if self.protocol not in PROTOCOLS:
            raise VocabError(f"{self.label_id}: unknown protocol {self.protocol!r}")
        if self.protocol == "SL" and not self.context_tag:
            raise VocabError(f"{self.label_id}: SL entries need a context_tag")
        if self.protocol == "MWIS":
            words = self.text.split()
            if self.masked_index is None or not 0 <= self.masked_index < len(words):
                raise VocabError(
                    f"{self.label_id}: masked_index {self.masked_index!r} outside "
                    f"sentence of {len(words)} words")
        if self.protocol == "WL" and len(self.text.split()) != 1:
            raise VocabError(f"{self.label_id}: WL entries are single words")

    @property
    def masked_word(self) -> str:
        if self.protocol != "MWIS":
            raise VocabError(f"{self.label_id}: masked_word only applies to MWIS")
        return self.text.split()[self.masked_index]

    @property
    def masked_text(self) -> str:
        words = self.text.split()
        words[self.masked_index] = "___"
        return " ".join(words)

    def to_dict(self) -> dict:
        d = {"label_id": self.label_id, "text": self.text, "protocol": self.protocol}
        if self.context_tag is not None:
            d["context_tag"] = self.context_tag
        if self.masked_index is not None:
            d["masked_index"] = self.masked_index
        return d


def load_vocab(path) -> list[VocabEntry]:
    with open(path, encoding="utf-8") as fh:
        raw = json.load(fh)
    if not isinstance(raw, list):
        raise VocabError("vocabulary file must be a JSON array")
    entries = [VocabEntry(
        label_id=str(d["label_id"]),
        text=str(d["text"]),
        protocol=str(d["protocol"]),
        context_tag=d.get("context_tag"),
        masked_index=d.get("masked_index"),
    ) for d in raw]
    ids = [e.label_id for e in entries]
    if len(set(ids)) != len(ids):
        raise VocabError("duplicate label_id in vocabulary")
    return entries


def default_vocab() -> list[VocabEntry]:
    with resources.as_file(_data_path("vocab_demo.json")) as p:
        return load_vocab(p)
