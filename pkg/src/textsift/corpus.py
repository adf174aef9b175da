"""Corpus ingestion: Q&A dump parsing, HTML stripping, sentence splitting, token cleanup.

The ingest pipeline turns raw dump rows into `CleanSentence` records:

    parse_dump -> strip_html -> split_sentences -> normalize

Tweets and labeled comments enter through their own loaders but end up as the
same `CleanSentence` type so every downstream stage sees one shape of data.
"""

from __future__ import annotations

import html
import logging
import re
from dataclasses import dataclass
from enum import Enum
from pathlib import Path
from typing import IO, Iterator

from xml.parsers import expat

from .errors import DataError, DumpParseError

logger = logging.getLogger(__name__)

__all__ = [
    "DocKind",
    "DumpSource",
    "Label",
    "RawDocument",
    "CleanSentence",
    "DumpStats",
    "parse_dump",
    "strip_html",
    "split_sentences",
    "normalize",
    "load_tweets",
    "load_labeled_comments",
]


class DocKind(Enum):
    POST = "post"
    COMMENT = "comment"
    TITLE = "title"


class DumpSource(Enum):
    STACK_EXCHANGE_SE = "stackexchange-se"
    STACK_OVERFLOW = "stackoverflow"
    OTHER = "other"


class Label(Enum):
    INFORMATIVE = 1
    NON_INFORMATIVE = 0


@dataclass(frozen=True)
class RawDocument:
    """One unit of text pulled from a dump row."""

    id: str
    kind: DocKind
    body: str
    source: DumpSource = DumpSource.OTHER


@dataclass(frozen=True)
class CleanSentence:
    """A normalized sentence: lowercase alphanumeric tokens, space-joined text.

    Invariants: ``text == " ".join(tokens)``, ``char_len == len(text)``, and no
    token consists only of digits.
    """

    text: str
    tokens: tuple[str, ...]
    char_len: int
    origin_id: str = ""


@dataclass
class DumpStats:
    """Counters accumulated while a dump iterator is consumed."""

    rows_read: int = 0
    docs_emitted: int = 0
    skipped_no_body: int = 0
    skipped_no_id: int = 0


_CHUNK_SIZE = 1 << 16


class _DumpIterator:
    """Streaming iterator over dump rows; exposes `.stats` while iterating."""

    def __init__(self, stream: IO[bytes], kind: DocKind, source: DumpSource) -> None:
        if kind not in (DocKind.POST, DocKind.COMMENT):
            raise ValueError(f"dump kind must be POST or COMMENT, got {kind}")
        self._stream = stream
        self._kind = kind
        self._source = source
        self.stats = DumpStats()
        self._pending: list[dict[str, str]] = []
        self._docs: list[RawDocument] = []
        self._done = False
        self._parser = expat.ParserCreate()
        self._parser.buffer_text = True
        self._parser.StartElementHandler = self._on_start_element

    def _on_start_element(self, name: str, attrs: dict[str, str]) -> None:
        if name == "row":
            self._pending.append(attrs)

    def __iter__(self) -> Iterator[RawDocument]:
        return self

    def __next__(self) -> RawDocument:
        while True:
            doc = self._next_from_pending()
            if doc is not None:
                return doc
            if self._done:
                raise StopIteration
            self._feed()

    def _feed(self) -> None:
        chunk = self._stream.read(_CHUNK_SIZE)
        final = not chunk
        try:
            self._parser.Parse(chunk, final)
        except expat.ExpatError as exc:
            raise DumpParseError(
                f"malformed dump XML: {expat.errors.messages[exc.code]}",
                self._parser.ErrorByteIndex,
            ) from exc
        if final:
            self._done = True

    def _next_from_pending(self) -> RawDocument | None:
        while True:
            if self._docs:
                self.stats.docs_emitted += 1
                return self._docs.pop(0)
            if not self._pending:
                return None
            self._expand_row(self._pending.pop(0))

    def _expand_row(self, attrs: dict[str, str]) -> None:
        self.stats.rows_read += 1
        row_id = attrs.get("Id", "")
        if not row_id:
            self.stats.skipped_no_id += 1
            return
        body = attrs.get("Body", "")
        if body:
            self._docs.append(
                RawDocument(id=row_id, kind=self._kind, body=body, source=self._source)
            )
        else:
            self.stats.skipped_no_body += 1
        if self._kind is DocKind.POST:
            title = attrs.get("Title", "")
            if title:
                self._docs.append(
                    RawDocument(id=row_id, kind=DocKind.TITLE, body=title, source=self._source)
                )


def parse_dump(
    xml_stream: IO[bytes],
    kind: DocKind,
    source: DumpSource = DumpSource.OTHER,
) -> _DumpIterator:
    """Stream `RawDocument`s out of a Q&A dump file (``<rows><row .../>...``).

    Yields one document per row with a non-empty Body attribute; post rows with
    a non-empty Title additionally yield a TITLE document.  Rows without a Body
    are counted in ``stats.skipped_no_body``.  Malformed XML raises
    `DumpParseError` carrying the byte offset of the failure.
    """
    return _DumpIterator(xml_stream, kind, source)


_TAG_RE = re.compile(r"<[^>]*>")
_WS_RE = re.compile(r"\s+")


def strip_html(text: str) -> str:
    """Drop ``<...>`` tag spans, keep inner text, decode entities, tidy whitespace.

    A ``<`` that never closes discards the rest of the string (logged), so no
    markup fragments leak into the sentence stream.
    """
    out = _TAG_RE.sub(" ", text)
    dangling = out.find("<")
    if dangling != -1:
        logger.warning("unterminated '<' at position %d; dropping trailing fragment", dangling)
        out = out[:dangling]
    out = html.unescape(out)
    return _WS_RE.sub(" ", out).strip()


# Trailing-token exceptions that keep a '.' from ending a sentence.
_ABBREVIATIONS = frozenset({"e.g", "i.e", "etc", "vs", "cf", "al"})

_TERMINATORS = ".!?"


def _token_before(text: str, pos: int) -> str:
    start = pos
    while start > 0 and not text[start - 1].isspace():
        start -= 1
    return text[start:pos].lstrip("(\"'[")


def split_sentences(text: str) -> list[str]:
    """Split on ``. ! ?`` followed by whitespace and an uppercase/digit (or end).

    A '.' whose preceding token is a known abbreviation (e.g, i.e, etc, vs, ...)
    never splits.  Concatenating the result reproduces the input up to
    whitespace, and no split ever lands inside a token.
    """
    sentences: list[str] = []
    start = 0
    i = 0
    n = len(text)
    while i < n:
        if text[i] not in _TERMINATORS:
            i += 1
            continue
        j = i + 1
        while j < n and text[j] in _TERMINATORS:
            j += 1
        k = j
        while k < n and text[k].isspace():
            k += 1
        at_end = k >= n
        next_starts_sentence = k > j and k < n and (text[k].isupper() or text[k].isdigit())
        boundary = at_end or next_starts_sentence
        if boundary and text[i] == "." and j == i + 1:
            if _token_before(text, i).lower() in _ABBREVIATIONS:
                boundary = False
        if boundary:
            piece = text[start:j].strip()
            if piece:
                sentences.append(piece)
            start = k
            i = k
        else:
            i = j
    tail = text[start:].strip()
    if tail:
        sentences.append(tail)
    return sentences


def normalize(sentence: str, origin_id: str = "") -> CleanSentence:
    """Lowercase, map non-alphanumerics to spaces, drop digit-only tokens.

    Idempotent: normalizing the returned text reproduces the same tokens.
    """
    lowered = sentence.lower()
    cleaned = "".join(ch if ch.isalnum() else " " for ch in lowered)
    tokens = tuple(t for t in cleaned.split() if not t.isdigit())
    text = " ".join(tokens)
    return CleanSentence(text=text, tokens=tokens, char_len=len(text), origin_id=origin_id)


_URL_PREFIXES = ("http://", "https://", "www.")


def load_tweets(path: str | Path) -> list[CleanSentence]:
    """One tweet per line; URL tokens are removed before normalization.

    The line index (0-based, as a string) becomes the sentence's origin_id.
    """
    tweets: list[CleanSentence] = []
    with open(path, encoding="utf-8") as fh:
        for idx, line in enumerate(fh):
            kept = [w for w in line.split() if not w.lower().startswith(_URL_PREFIXES)]
            tweets.append(normalize(" ".join(kept), origin_id=str(idx)))
    return tweets


def load_labeled_comments(path: str | Path) -> list[tuple[CleanSentence, Label]]:
    """Read ``label<TAB>text`` lines; label must be 1 (informative) or 0."""
    out: list[tuple[CleanSentence, Label]] = []
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.rstrip("\n")
            if not line:
                continue
            label_token, sep, text = line.partition("\t")
            if not sep:
                raise DataError(f"line {lineno}: expected 'label<TAB>text'")
            if label_token == "1":
                label = Label.INFORMATIVE
            elif label_token == "0":
                label = Label.NON_INFORMATIVE
            else:
                raise DataError(f"line {lineno}: bad label {label_token!r} (expected 0 or 1)")
            out.append((normalize(text, origin_id=str(lineno)), label))
    return out
