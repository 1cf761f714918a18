"""Rendering of annotated documents; marks derive only from labels.

Source text is escaped before it reaches any output, so spoofed badges,
check glyphs, or claim-like markup in the generated text render as inert
literal text. A mark appears exactly where a label says it does.
"""

from __future__ import annotations

import html
import json
from dataclasses import dataclass

from .claims import Claim
from .tokenizer import Segment, SegmentKind
from .verify import AnnotatedDocument, Label, LabelStatus, document_to_dict

_GREEN = "\x1b[32m"
_YELLOW = "\x1b[33m"
_RESET = "\x1b[0m"


@dataclass(frozen=True)
class RenderOptions:
    format: str = "ansi"
    include_provenance_tooltips: bool = True
    badge_glyphs: tuple[str, str] = ("✓", "⚠")

    def __post_init__(self) -> None:
        if self.format not in ("html", "ansi", "json"):
            raise ValueError(f"unknown render format {self.format!r}")


def _provenance_lines(claim: Claim) -> str:
    lines = [
        f"Country: {claim.entity}",
        f"Date: {claim.time}",
        f"Value: {claim.value}",
    ]
    if claim.indicator:
        lines.append(f"Indicator: {claim.indicator}")
    return "\n".join(lines)


def _html_badge(label: Label, doc: AnnotatedDocument, opts: RenderOptions) -> str:
    verified_glyph, flagged_glyph = opts.badge_glyphs
    claim = doc.claims.get(label.claim_id) if label.claim_id else None
    if label.status is LabelStatus.VERIFIED:
        title = "Verified data"
        if opts.include_provenance_tooltips and claim is not None:
            title = f"Verified data\n{_provenance_lines(claim)}"
        return (
            f'<sup class="verified-mark" title="{html.escape(title)}" '
            f'role="img" aria-label="Verified data">{html.escape(verified_glyph)}</sup>'
        )
    title = "Needs verification"
    if opts.include_provenance_tooltips and claim is not None and label.expected is not None:
        title = _provenance_lines(claim)
    return (
        f'<sup class="verify-pending" title="{html.escape(title)}" '
        f'role="img" aria-label="Needs verification">{html.escape(flagged_glyph)}</sup>'
    )


def _html_claim_token(segment: Segment, label: Label, doc: AnnotatedDocument,
                      opts: RenderOptions) -> str:
    attrs = f'id="{html.escape(segment.claim_id or "", quote=True)}"'
    if segment.policy_hint is not None:
        attrs += f' policy="{html.escape(segment.policy_hint, quote=True)}"'
    payload = html.escape(segment.payload_text or "")
    return f"<claim {attrs}>{payload}{_html_badge(label, doc, opts)}</claim>"


def render_html(doc: AnnotatedDocument, opts: RenderOptions | None = None) -> str:
    """HTML with the verified-mark / verify-pending markup contract.

    Everything that came from the source text is escaped; badge elements are
    emitted only for labeled spans.
    """
    opts = opts or RenderOptions(format="html")
    parts: list[str] = []
    for segment, label in doc.entries:
        if segment.kind is SegmentKind.CLAIM_TOKEN and label is not None:
            parts.append(_html_claim_token(segment, label, doc, opts))
        else:
            parts.append(html.escape(segment.text))
    return "".join(parts)


def _ansi_sanitize(text: str) -> str:
    # Spoofed escape sequences in source text must render inert.
    return text.replace("\x1b", "\\x1b")


def render_ansi(doc: AnnotatedDocument, opts: RenderOptions | None = None) -> str:
    """Terminal rendering: payload text suffixed with a colored glyph per label."""
    opts = opts or RenderOptions(format="ansi")
    verified_glyph, flagged_glyph = opts.badge_glyphs
    parts: list[str] = []
    for segment, label in doc.entries:
        if segment.kind is SegmentKind.CLAIM_TOKEN and label is not None:
            payload = _ansi_sanitize(segment.payload_text or "")
            if label.status is LabelStatus.VERIFIED:
                parts.append(f"{payload}{_GREEN}{verified_glyph}{_RESET}")
            else:
                suffix = f" (expected {label.expected})" if label.expected is not None else ""
                parts.append(f"{payload}{_YELLOW}{flagged_glyph}{suffix}{_RESET}")
        else:
            parts.append(_ansi_sanitize(segment.text))
    return "".join(parts)


def render_json(doc: AnnotatedDocument) -> str:
    """Canonical machine-readable form: stable key order, compact separators."""
    return json.dumps(document_to_dict(doc), sort_keys=True, separators=(",", ":"))


def render(doc: AnnotatedDocument, opts: RenderOptions) -> str:
    if opts.format == "html":
        return render_html(doc, opts)
    if opts.format == "ansi":
        return render_ansi(doc, opts)
    return render_json(doc)
