"""Tweet normalization: lowercasing, emoji-to-word, hashtag segmentation,
mention collapsing, and rare-word substitution.

All operations are pure functions over immutable tables, applied in a fixed
order by `normalize`. Hashtag camel-case detection runs on the original-case
hashtag body captured before lowercasing.
"""

from __future__ import annotations

import logging
import math
import re
from dataclasses import dataclass, field
from importlib import resources

log = logging.getLogger(__name__)

STEP_ORDER = ("lowercase_strip", "emoji_to_words", "segment_hashtags",
              "collapse_mentions", "substitute_rare")

MENTION = "@user"
MENTIONS = "@users"

# blocks treated as emoji when deciding whether an unmatched codepoint
# should be dropped rather than passed through
_EMOJI_RANGES = (
    (0x1F000, 0x1FAFF),
    (0x2600, 0x27BF),
    (0x2B00, 0x2BFF),
    (0xFE0E, 0xFE0F),
    (0x200D, 0x200D),
    (0x20E3, 0x20E3),
)


def _is_emoji_char(ch: str) -> bool:
    cp = ord(ch)
    return any(lo <= cp <= hi for lo, hi in _EMOJI_RANGES)


@dataclass(frozen=True)
class RawTweet:
    id: str
    text: str

    def __post_init__(self):
        if not self.id:
            raise ValueError("tweet id must be non-empty")


@dataclass(frozen=True)
class NormalizedTweet:
    id: str
    text: str
    steps_applied: tuple[str, ...]


@dataclass(frozen=True)
class EmojiTable:
    """Emoji codepoint sequence -> space-separated lowercase name words."""
    entries: dict[str, str]
    max_key_len: int = field(init=False)

    def __post_init__(self):
        for key, name in self.entries.items():
            if not re.fullmatch(r"[a-z0-9]+( [a-z0-9]+)*", name):
                raise ValueError(f"emoji name {name!r} not clean lowercase words")
            if not key:
                raise ValueError("empty emoji key")
        object.__setattr__(
            self, "max_key_len", max((len(k) for k in self.entries), default=1)
        )

    @classmethod
    def load(cls, path) -> "EmojiTable":
        """Read tab-separated `emoji<TAB>name words` lines; `#` comments allowed."""
        entries = {}
        with open(path, encoding="utf-8") as handle:
            for line in handle:
                line = line.rstrip("\n")
                if not line or line.startswith("#"):
                    continue
                emoji, _, name = line.partition("\t")
                entries[emoji] = name.strip()
        return cls(entries)


@dataclass(frozen=True)
class UnigramTable:
    """Lowercase word frequencies used by hashtag segmentation."""
    counts: dict[str, int]
    total: int = field(init=False)

    def __post_init__(self):
        for word, count in self.counts.items():
            if not word or word != word.lower() or count <= 0:
                raise ValueError(f"bad unigram entry {word!r}: {count}")
        object.__setattr__(self, "total", sum(self.counts.values()))

    @classmethod
    def load(cls, path) -> "UnigramTable":
        counts = {}
        with open(path, encoding="utf-8") as handle:
            for line in handle:
                line = line.rstrip("\n")
                if not line or line.startswith("#"):
                    continue
                word, _, count = line.partition("\t")
                counts[word] = int(count)
        return cls(counts)

    def log_prob(self, word: str) -> float:
        """log10 unigram probability; unknown words get a length penalty."""
        count = self.counts.get(word)
        if count is not None:
            return math.log10(count / self.total)
        return -math.log10(max(self.total, 1)) - len(word)


def bundled_emoji_table() -> EmojiTable:
    ref = resources.files("offlang.data").joinpath("emoji.tsv")
    with resources.as_file(ref) as path:
        return EmojiTable.load(path)


def bundled_unigram_table() -> UnigramTable:
    ref = resources.files("offlang.data").joinpath("unigrams.tsv")
    with resources.as_file(ref) as path:
        return UnigramTable.load(path)


def emoji_to_words(text: str, table: EmojiTable) -> str:
    """Replace every known emoji sequence with its name words.

    Longest table key wins at each position. Emoji-block codepoints absent
    from the table are dropped and tallied in a warning. Text without emoji
    is returned unchanged.
    """
    out: list[str] = []
    i = 0
    replaced = False
    unknown = 0
    n = len(text)
    while i < n:
        match = None
        for length in range(min(table.max_key_len, n - i), 0, -1):
            candidate = text[i:i + length]
            if candidate in table.entries:
                match = candidate
                break
        if match is not None:
            out.append("\x00" + table.entries[match] + "\x00")
            i += len(match)
            replaced = True
        elif _is_emoji_char(text[i]):
            out.append("\x00\x00")
            unknown += 1
            i += 1
            replaced = True
        else:
            out.append(text[i])
            i += 1
    if not replaced:
        return text
    if unknown:
        log.warning("dropped %d emoji absent from the emoji table", unknown)
    result = re.sub(r"\s*\x00(?:([^\x00]*)\x00\s*)?", lambda m: f" {m.group(1) or ''} ", "".join(out))
    result = re.sub(r" {2,}", " ", result)
    return result.strip()


def _capital_runs(tag: str) -> list[str]:
    return re.findall(r"[A-Z][^A-Z]*|^[^A-Z]+", tag)


def segment_hashtag(tag: str, unigrams: UnigramTable) -> str:
    """Split a hashtag body into lowercase words.

    Camel-case tags (two or more capital-initiated runs, not all-caps) split
    at the capitals. Everything else goes through dynamic-programming
    segmentation maximizing the summed unigram log-probability, ties broken
    by fewest words then lexicographically.
    """
    if not tag:
        return ""
    if not tag.isupper():
        runs = _capital_runs(tag)
        if len([r for r in runs if r]) >= 2 and "".join(runs) == tag:
            return " ".join(r.lower() for r in runs)
    return " ".join(_dp_segment(tag.lower(), unigrams))


_TIE_EPS = 1e-12


def _better(cand, best):
    """Compare (score, n_words, words) segmentation candidates."""
    if best is None:
        return True
    if cand[0] > best[0] + _TIE_EPS:
        return True
    if cand[0] < best[0] - _TIE_EPS:
        return False
    return (cand[1], cand[2]) < (best[1], best[2])


def _dp_segment(text: str, unigrams: UnigramTable) -> tuple[str, ...]:
    n = len(text)
    # best[i]: (score, n_words, words) over text[:i]
    best: list = [None] * (n + 1)
    best[0] = (0.0, 0, ())
    for end in range(1, n + 1):
        for start in range(end):
            prev = best[start]
            word = text[start:end]
            cand = (prev[0] + unigrams.log_prob(word), prev[1] + 1, prev[2] + (word,))
            if _better(cand, best[end]):
                best[end] = cand
    return best[n][2]


def brute_force_segment(text: str, unigrams: UnigramTable) -> tuple[str, ...]:
    """Enumerate all 2^(n-1) segmentations; oracle for the DP."""
    n = len(text)
    if n == 0:
        return ()
    best = None
    for bits in range(1 << (n - 1)):
        words = []
        start = 0
        for i in range(1, n):
            if bits & (1 << (i - 1)):
                words.append(text[start:i])
                start = i
        words.append(text[start:])
        score = sum(unigrams.log_prob(w) for w in words)
        cand = (score, len(words), tuple(words))
        if _better(cand, best):
            best = cand
    return best[2]


def collapse_mentions(text: str) -> str:
    """Two or more `@user` tokens collapse into one `@users` at the first slot."""
    tokens = text.split()
    positions = [i for i, tok in enumerate(tokens) if tok == MENTION]
    if len(positions) < 2:
        return text
    kept = [tok for i, tok in enumerate(tokens) if i not in positions]
    kept.insert(positions[0], MENTIONS)
    return " ".join(kept)


def substitute_rare(text: str, substitutions: dict[str, str]) -> str:
    """Whole-token substitution (url -> http and friends)."""
    if substitutions.get("url") != "http":
        raise ValueError("substitutions must map 'url' to 'http'")
    tokens = text.split(" ")
    if not any(tok in substitutions for tok in tokens):
        return text
    return " ".join(substitutions.get(tok, tok) for tok in tokens)


_HASHTAG = re.compile(r"#(\w+)")


def normalize(tweet: RawTweet, table: EmojiTable, unigrams: UnigramTable,
              substitutions: dict[str, str] | None = None) -> NormalizedTweet:
    """Apply the full preprocessing pipeline in its fixed step order."""
    if substitutions is None:
        substitutions = {"url": "http"}

    # original-case hashtag bodies drive the camel-case split
    segmented = {
        body.lower(): segment_hashtag(body, unigrams)
        for body in _HASHTAG.findall(tweet.text)
    }

    text = tweet.text.lower().strip()
    text = emoji_to_words(text, table)
    text = _HASHTAG.sub(lambda m: segmented.get(m.group(1), segment_hashtag(m.group(1), unigrams)), text)
    text = collapse_mentions(text)
    text = substitute_rare(text, substitutions)
    return NormalizedTweet(id=tweet.id, text=text, steps_applied=STEP_ORDER)
