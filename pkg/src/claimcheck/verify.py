"""Fail-closed labeling of numeric spans against an indexed claim set.

Every claim token and bare number receives exactly one label; the default
is always non-Verified, and nothing here raises on malformed or hostile
input -- every failure condition maps to a label.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field
from decimal import Decimal
from enum import Enum
from types import MappingProxyType
from typing import Any, Iterable, Iterator, Mapping

from .claims import Claim, ClaimIndex, claim_to_dict
from .crypto import TrustAnchor, filter_provenance_valid
from .policy import (
    PolicySpec,
    VerificationMode,
    evaluate,
    mode_name,
    policy_qualifiers,
    policy_scale_forms,
)
from .tokenizer import (
    MultipleNumbersError,
    ParseReport,
    PayloadError,
    Segment,
    SegmentKind,
    _DEFAULT_SCALE_FORMS,
    parse_numeric_payload,
    tokenize,
)


class LabelStatus(str, Enum):
    VERIFIED = "verified"
    BARE = "bare"
    FLAGGED = "flagged"


class FlagReason(str, Enum):
    UNKNOWN_CLAIM_ID = "unknown_claim_id"
    VALUE_MISMATCH = "value_mismatch"
    MALFORMED_TOKEN = "malformed_token"
    UNIT_MISMATCH = "unit_mismatch"
    MULTIPLE_NUMBERS = "multiple_numbers"


@dataclass(frozen=True)
class Label:
    """Verification outcome for one numeric span."""

    status: LabelStatus
    claim_id: str | None = None
    mode: VerificationMode | None = None
    reason: FlagReason | None = None
    expected: Decimal | None = None

    def __post_init__(self) -> None:
        if self.status is LabelStatus.VERIFIED and (self.claim_id is None or self.mode is None):
            raise ValueError("verified labels carry the claim_id and matched mode")
        if self.status is not LabelStatus.VERIFIED and self.mode is not None:
            raise ValueError("only verified labels carry a mode")
        if self.expected is not None and self.claim_id is None:
            raise ValueError("expected value requires a resolved claim")

    @classmethod
    def verified(cls, claim_id: str, mode: VerificationMode) -> Label:
        return cls(status=LabelStatus.VERIFIED, claim_id=claim_id, mode=mode)

    @classmethod
    def bare(cls) -> Label:
        return cls(status=LabelStatus.BARE)

    @classmethod
    def flagged(
        cls,
        reason: FlagReason,
        claim_id: str | None = None,
        expected: Decimal | None = None,
    ) -> Label:
        return cls(
            status=LabelStatus.FLAGGED, claim_id=claim_id, reason=reason, expected=expected
        )


@dataclass(frozen=True)
class AnnotatedDocument:
    """Ordered (segment, label) pairs plus the claims referenced by labels.

    The sole input to every renderer: labels attach to claim tokens and bare
    numbers only, and `claims` carries the resolved claims so renderers can
    populate provenance tooltips without a claim store of their own.
    """

    entries: tuple[tuple[Segment, Label | None], ...]
    policy_name: str
    claims_descriptor: str
    claims: Mapping[str, Claim] = field(default_factory=dict)
    malformed_tags: tuple[tuple[tuple[int, int], str], ...] = ()
    stripped_markers: int = 0
    elapsed_seconds: float = 0.0

    def __post_init__(self) -> None:
        for segment, label in self.entries:
            numeric = segment.kind in (SegmentKind.CLAIM_TOKEN, SegmentKind.BARE_NUMBER)
            if numeric != (label is not None):
                raise ValueError("exactly the numeric segments carry labels")
            if segment.kind is SegmentKind.BARE_NUMBER and label is not None:
                if label.status is not LabelStatus.BARE:
                    raise ValueError("bare numbers are always labeled Bare")
        object.__setattr__(self, "claims", MappingProxyType(dict(self.claims)))

    def labeled(self) -> Iterator[tuple[Segment, Label]]:
        for segment, label in self.entries:
            if label is not None:
                yield segment, label


@dataclass(frozen=True)
class VerificationReport:
    verified: int
    bare: int
    flagged: int
    by_reason: Mapping[str, int]
    elapsed_seconds: float

    def __post_init__(self) -> None:
        object.__setattr__(self, "by_reason", MappingProxyType(dict(self.by_reason)))

    @property
    def total_labeled(self) -> int:
        return self.verified + self.bare + self.flagged

    def to_dict(self) -> dict[str, Any]:
        return {
            "verified": self.verified,
            "bare": self.bare,
            "flagged": self.flagged,
            "by_reason": dict(self.by_reason),
            "elapsed_seconds": self.elapsed_seconds,
        }


def label_span(
    segment: Segment,
    index: ClaimIndex,
    policy: PolicySpec,
    context: str = "",
) -> Label:
    """Label one numeric span; every condition maps to a label, never a raise."""
    if segment.kind is SegmentKind.BARE_NUMBER:
        return Label.bare()
    if segment.kind is not SegmentKind.CLAIM_TOKEN:
        raise ValueError("label_span expects a claim token or bare number")

    claim_id = segment.claim_id or ""
    claim = index.get(claim_id)
    if claim is None:
        return Label.flagged(FlagReason.UNKNOWN_CLAIM_ID, claim_id=claim_id)
    try:
        payload = parse_numeric_payload(
            segment.payload_text or "",
            context,
            claim.unit,
            span=segment.span,
            qualifiers=policy_qualifiers(policy),
            scale_forms=policy_scale_forms(policy) or _DEFAULT_SCALE_FORMS,
        )
    except MultipleNumbersError:
        return Label.flagged(FlagReason.MULTIPLE_NUMBERS, claim_id=claim_id)
    except PayloadError:  # no number, or magnitude beyond safe arithmetic
        return Label.flagged(FlagReason.MALFORMED_TOKEN, claim_id=claim_id)
    if payload.unit_text and claim.unit and payload.unit_text.casefold() != claim.unit.casefold():
        return Label.flagged(FlagReason.UNIT_MISMATCH, claim_id=claim_id)
    result = evaluate(payload, claim, policy)
    if result.matched:
        assert result.mode is not None
        return Label.verified(claim_id, result.mode)
    return Label.flagged(FlagReason.VALUE_MISMATCH, claim_id=claim_id, expected=claim.value)


def verify_document(
    text: str,
    index: ClaimIndex,
    policy: PolicySpec,
    anchors: Iterable[TrustAnchor] = (),
) -> AnnotatedDocument:
    """Tokenize and label every numeric span: the acceptance function.

    Work is linear in the number of spans; each lookup is a hash access and
    each policy check touches a bounded number of modes. With
    require_provenance set, only provenance-valid claims are visible.
    """
    started = time.perf_counter()
    if policy.require_provenance:
        index = filter_provenance_valid(index, anchors)
    report: ParseReport = tokenize(text)
    entries: list[tuple[Segment, Label | None]] = []
    referenced: dict[str, Claim] = {}
    for segment in report.segments:
        if segment.kind is SegmentKind.PLAIN_TEXT:
            entries.append((segment, None))
            continue
        label = label_span(segment, index, policy, context=report.text)
        if label.claim_id:
            claim = index.get(label.claim_id)
            if claim is not None:
                referenced[label.claim_id] = claim
        entries.append((segment, label))
    elapsed = time.perf_counter() - started
    return AnnotatedDocument(
        entries=tuple(entries),
        policy_name=policy.name,
        claims_descriptor=index.source_descriptor,
        claims=referenced,
        malformed_tags=report.malformed_tags,
        stripped_markers=report.stripped_markers,
        elapsed_seconds=elapsed,
    )


def summarize(doc: AnnotatedDocument) -> VerificationReport:
    """Tally labels into a report; counts always sum to the labeled segments."""
    verified = bare = flagged = 0
    by_reason: dict[str, int] = {}
    for _, label in doc.labeled():
        if label.status is LabelStatus.VERIFIED:
            verified += 1
        elif label.status is LabelStatus.BARE:
            bare += 1
        else:
            flagged += 1
            assert label.reason is not None
            by_reason[label.reason.value] = by_reason.get(label.reason.value, 0) + 1
    return VerificationReport(
        verified=verified,
        bare=bare,
        flagged=flagged,
        by_reason=by_reason,
        elapsed_seconds=doc.elapsed_seconds,
    )


def label_to_dict(label: Label) -> dict[str, Any]:
    out: dict[str, Any] = {"status": label.status.value}
    if label.claim_id is not None:
        out["claim_id"] = label.claim_id
    if label.mode is not None:
        out["mode"] = mode_name(label.mode)
    if label.reason is not None:
        out["reason"] = label.reason.value
    if label.expected is not None:
        out["expected"] = str(label.expected)
    return out


def document_to_dict(doc: AnnotatedDocument) -> dict[str, Any]:
    """Canonical JSON-ready form of an annotated document.

    This is the contract renderers and the verification service consume:
    an ordered segment array, the referenced claims, and the summary report.
    """
    segments = []
    for segment, label in doc.entries:
        entry: dict[str, Any] = {
            "kind": segment.kind.value,
            "text": segment.text,
            "span": list(segment.span),
            "label": label_to_dict(label) if label is not None else None,
        }
        if segment.claim_id is not None:
            entry["claim_id"] = segment.claim_id
        if segment.policy_hint is not None:
            entry["policy_hint"] = segment.policy_hint
        segments.append(entry)
    # elapsed is wall-clock noise: identical inputs must yield identical
    # documents, so it lives only in the standalone report.
    counts = summarize(doc).to_dict()
    counts.pop("elapsed_seconds")
    return {
        "policy": doc.policy_name,
        "claims_descriptor": doc.claims_descriptor,
        "segments": segments,
        "claims": {claim_id: claim_to_dict(claim) for claim_id, claim in doc.claims.items()},
        "report": counts,
        "malformed_tags": [
            {"span": list(span), "reason": reason} for span, reason in doc.malformed_tags
        ],
        "stripped_markers": doc.stripped_markers,
    }
