"""Parsing of generated text into claim tokens, bare numbers, and plain text.

Verification status can never originate from the text itself: stale or
spoofed verification markup is stripped before segmentation, and only a
syntactically complete claim tag (strict grammar, fixed attribute order,
double quotes) can produce a ClaimToken. Anything else degrades to plain
text, with interior numbers still surfaced as bare spans.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from decimal import Decimal
from enum import Enum

from .claims import DEFAULT_UNIT_TABLE, MAX_DECIMAL_MAGNITUDE
from .policy import DEFAULT_QUALIFIERS, DEFAULT_SCALE_TABLE, NormalizedPayload

# Wire grammar, bit-exact: <claim id="ID"( policy="P")?>payload</claim>.
# The payload may not contain another opening tag (tags never nest).
_OPEN_TAG_RE = re.compile(r'<claim id="(?P<id>[A-Za-z0-9_.-]+)"(?: policy="(?P<policy>[^"]*)")?>')
_CLOSE_TAG = "</claim>"

# ASCII numeric span: optional sign, digits with optional comma/space
# thousands separators, optional fraction, optional exponent, optional %.
NUMBER_RE = re.compile(
    r"(?<![\w.])[+-]?(?:\d{1,3}(?:[ ,]\d{3})+|\d+)(?:\.\d+)?(?:[eE][+-]?\d+)?%?(?!\.?\d)"
)

# Ported verification-marker patterns; applied to a fixpoint so stripping
# is idempotent even when removals expose new matches.
_VERIFIED_SUP_RE = re.compile(r'<sup class="(?:verified-mark|verify-pending)".*?</sup>')
_NEEDS_VERIFY_RE = re.compile(r'<span class="needs-verify".*?>(.*?)</span>')

_WORD_RE = re.compile(r"[A-Za-z]+|~")

DEFAULT_QUALIFIER_WINDOW = 3

_DEFAULT_SCALE_FORMS = frozenset(
    form.casefold() for _, forms in DEFAULT_SCALE_TABLE for form in forms
)


class PayloadError(ValueError):
    """A claim payload could not be normalized into a single numeric value."""


class NoNumberError(PayloadError):
    pass


class MultipleNumbersError(PayloadError):
    pass


class SegmentKind(str, Enum):
    CLAIM_TOKEN = "claim_token"
    BARE_NUMBER = "bare_number"
    PLAIN_TEXT = "plain_text"


@dataclass(frozen=True)
class Segment:
    """One non-overlapping piece of the source; spans index the stripped text."""

    kind: SegmentKind
    text: str
    span: tuple[int, int]
    claim_id: str | None = None
    policy_hint: str | None = None
    payload_text: str | None = None


@dataclass(frozen=True)
class ParseReport:
    """Segmentation result; segment texts concatenate back to `text` exactly."""

    text: str
    segments: tuple[Segment, ...]
    malformed_tags: tuple[tuple[tuple[int, int], str], ...]
    stripped_markers: int


def _strip_markers_counted(text: str) -> tuple[str, int]:
    total = 0
    while True:
        text, removed_sup = _VERIFIED_SUP_RE.subn("", text)
        text, removed_span = _NEEDS_VERIFY_RE.subn(r"\1", text)
        if removed_sup + removed_span == 0:
            return text, total
        total += removed_sup + removed_span


def strip_verification_markers(text: str) -> str:
    """Remove verified/pending superscripts and unwrap needs-verify spans.

    Applying the function twice equals applying it once.
    """
    return _strip_markers_counted(text)[0]


def _scan_numbers(text: str, offset: int, out: list[Segment]) -> None:
    pos = 0
    for match in NUMBER_RE.finditer(text):
        if match.start() > pos:
            out.append(
                Segment(
                    kind=SegmentKind.PLAIN_TEXT,
                    text=text[pos : match.start()],
                    span=(offset + pos, offset + match.start()),
                )
            )
        out.append(
            Segment(
                kind=SegmentKind.BARE_NUMBER,
                text=match.group(0),
                span=(offset + match.start(), offset + match.end()),
                payload_text=match.group(0),
            )
        )
        pos = match.end()
    if pos < len(text):
        out.append(
            Segment(
                kind=SegmentKind.PLAIN_TEXT,
                text=text[pos:],
                span=(offset + pos, offset + len(text)),
            )
        )


def _close_positions(text: str) -> list[int]:
    positions = []
    at = text.find(_CLOSE_TAG)
    while at != -1:
        positions.append(at)
        at = text.find(_CLOSE_TAG, at + 1)
    return positions


def tokenize(text: str) -> ParseReport:
    """Strip verification markers, then segment into claim tokens, bare
    numbers, and plain text. Malformed tags degrade to plain text (their
    numbers are re-scanned) and are recorded, never raised."""
    stripped, marker_count = _strip_markers_counted(text)
    segments: list[Segment] = []
    malformed: list[tuple[tuple[int, int], str]] = []
    closes = _close_positions(stripped)
    next_close = 0  # index into closes of the first unconsumed close tag

    pos = 0  # next index whose text is not yet emitted
    search_from = 0
    while True:
        tag_at = stripped.find("<claim", search_from)
        if tag_at == -1:
            break
        opener = _OPEN_TAG_RE.match(stripped, tag_at)
        if opener is None:
            malformed.append(((tag_at, tag_at + len("<claim")), "malformed claim tag attributes"))
            search_from = tag_at + 1
            continue
        while next_close < len(closes) and closes[next_close] < opener.end():
            next_close += 1
        close_at = closes[next_close] if next_close < len(closes) else -1
        inner_open = stripped.find("<claim", opener.end())
        # A complete token needs a close tag with no opening tag before it
        # (tags never nest: an inner opener invalidates the outer tag).
        if close_at == -1 or (inner_open != -1 and inner_open < close_at):
            malformed.append(((tag_at, tag_at + len("<claim")), "unterminated or nested claim tag"))
            search_from = tag_at + 1
            continue
        end = close_at + len(_CLOSE_TAG)
        if tag_at > pos:
            _scan_numbers(stripped[pos:tag_at], pos, segments)
        segments.append(
            Segment(
                kind=SegmentKind.CLAIM_TOKEN,
                text=stripped[tag_at:end],
                span=(tag_at, end),
                claim_id=opener.group("id"),
                policy_hint=opener.group("policy"),
                payload_text=stripped[opener.end() : close_at],
            )
        )
        pos = end
        search_from = end
    if pos < len(stripped):
        _scan_numbers(stripped[pos:], pos, segments)

    return ParseReport(
        text=stripped,
        segments=tuple(segments),
        malformed_tags=tuple(malformed),
        stripped_markers=marker_count,
    )


def _last_words(text: str, count: int, before: int) -> list[str]:
    """The `count` words ending at offset `before`, scanning a bounded tail.

    The tail is grown until it holds strictly more than `count` words (the
    first may be clipped at the slice boundary and is never used) or reaches
    the start of the text, so results match a full scan at O(count) typical
    cost instead of O(before).
    """
    if count <= 0:
        return []
    size = 256
    while True:
        if size >= before:
            return _WORD_RE.findall(text[:before])[-count:]
        words = _WORD_RE.findall(text[before - size : before])
        if len(words) > count:
            return words[-count:]
        size *= 2


def detect_qualifier(
    context: str,
    span: tuple[int, int],
    qualifiers: frozenset[str],
    window: int = DEFAULT_QUALIFIER_WINDOW,
) -> bool:
    """True iff a qualifier word occurs within `window` words immediately
    before the span, or anywhere inside the span itself."""
    if window < 0:
        raise ValueError("window must be >= 0")
    if not qualifiers:
        return False
    lowered = {q.casefold() for q in qualifiers}
    start, end = span
    preceding = _last_words(context, window, before=start) if window else []
    inside = _WORD_RE.findall(context[start:end])
    return any(word.casefold() in lowered for word in preceding + inside)


_FOLLOWING_WORD_RE = re.compile(r"[A-Za-z%~]+")


def _following_words(context: str, end: int, count: int = 2) -> list[str]:
    words = []
    for match in _FOLLOWING_WORD_RE.finditer(context, end):
        words.append(match.group(0))
        if len(words) == count:
            break
    return words


def parse_numeric_payload(
    payload_text: str,
    context: str = "",
    claim_unit: str = "",
    *,
    span: tuple[int, int] | None = None,
    qualifiers: frozenset[str] = frozenset(DEFAULT_QUALIFIERS),
    scale_forms: frozenset[str] = _DEFAULT_SCALE_FORMS,
    units: frozenset[str] = DEFAULT_UNIT_TABLE,
    window: int = DEFAULT_QUALIFIER_WINDOW,
) -> NormalizedPayload:
    """Normalize a claim payload: exact decimal value, adjacent unit text and
    scale word (from the payload or the two words after the span), and
    qualifier presence.

    Raises NoNumberError/MultipleNumbersError when the payload does not
    contain exactly one numeric literal.
    """
    matches = NUMBER_RE.findall(payload_text)
    if not matches:
        raise NoNumberError(f"no numeric literal in payload {payload_text!r}")
    if len(matches) > 1:
        raise MultipleNumbersError(f"multiple numeric literals in payload {payload_text!r}")

    literal = matches[0]
    unit_text: str | None = None
    if literal.endswith("%"):
        unit_text = "%"
        literal = literal[:-1]
    value = Decimal(re.sub(r"[\s,]", "", literal))
    if value == 0:
        value = Decimal(0)  # normalize signed zero
    elif abs(value.adjusted()) > MAX_DECIMAL_MAGNITUDE:
        # keeps exact arithmetic in safe exponent ranges; labeled malformed
        raise PayloadError(f"numeric magnitude out of range in payload {payload_text!r}")

    if span is not None:
        segment_start, segment_end = span
    else:
        segment_start, segment_end = 0, 0
        context = payload_text

    # Unit and scale words may trail the number inside the payload or sit in
    # the two words right after the span.
    nearby = _WORD_RE.findall(payload_text) + _following_words(context, segment_end)
    unit_table = {u.casefold(): u for u in units}
    scale_word: str | None = None
    for word in nearby:
        folded = word.casefold()
        if unit_text is None and folded in unit_table:
            unit_text = unit_table[folded]
        if scale_word is None and folded in scale_forms:
            scale_word = word
    if unit_text is None and "%" in payload_text:
        unit_text = "%"

    # Hedges count when they sit within `window` words before the span or in
    # the payload itself; tag markup (id, policy hint) is never scanned.
    inside_payload = detect_qualifier(payload_text, (0, len(payload_text)), qualifiers, 0)
    if span is not None:
        before_span = detect_qualifier(
            context, (segment_start, segment_start), qualifiers, window
        )
        qualifier_present = before_span or inside_payload
    else:
        qualifier_present = inside_payload

    return NormalizedPayload(
        value=value,
        scale_word=scale_word,
        unit_text=unit_text,
        qualifier_present=qualifier_present,
    )
