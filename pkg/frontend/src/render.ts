// Message rendering. Badges are built exclusively from the annotated
// document's labels; every piece of message text enters the DOM through
// textContent, so spoofed markup, glyphs, or badge HTML in the generated
// text stays inert literal text.

import type { AnnotatedDocument, Label, SegmentEntry } from './types.js';

export const VERIFIED_BADGE_CLASS = 'badge-verified';
export const FLAGGED_BADGE_CLASS = 'badge-flagged';

export type BadgeClickHandler = (claimId: string) => void;

function tooltipFor(label: Label, doc: AnnotatedDocument): string {
  const claim = label.claim_id ? doc.claims[label.claim_id] : undefined;
  if (label.status === 'verified') {
    if (!claim) return 'Verified data';
    return `Verified data\nCountry: ${claim.entity}\nDate: ${claim.time}\nValue: ${claim.value}`;
  }
  if (claim && label.expected !== undefined) {
    return `Country: ${claim.entity}\nDate: ${claim.time}\nValue: ${claim.value}`;
  }
  return 'Needs verification';
}

function badgeFor(
  label: Label,
  doc: AnnotatedDocument,
  onBadgeClick?: BadgeClickHandler,
): HTMLElement | null {
  if (label.status === 'bare') return null;
  const badge = document.createElement('sup');
  badge.className = `badge ${label.status === 'verified' ? VERIFIED_BADGE_CLASS : FLAGGED_BADGE_CLASS}`;
  badge.textContent = label.status === 'verified' ? '✓' : '⚠';
  badge.title = tooltipFor(label, doc);
  badge.setAttribute('role', 'img');
  badge.setAttribute(
    'aria-label',
    label.status === 'verified' ? 'Verified data' : 'Needs verification',
  );
  if (label.claim_id && onBadgeClick) {
    const claimId = label.claim_id;
    badge.addEventListener('click', () => onBadgeClick(claimId));
    badge.classList.add('badge-clickable');
  }
  return badge;
}

function segmentNode(
  segment: SegmentEntry,
  doc: AnnotatedDocument,
  onBadgeClick?: BadgeClickHandler,
): Node {
  if (segment.kind === 'claim_token' && segment.label) {
    const wrapper = document.createElement('span');
    wrapper.className = 'claim-token';
    // display the payload, never the tag markup
    const payload = document.createElement('span');
    payload.textContent = payloadText(segment);
    wrapper.appendChild(payload);
    const badge = badgeFor(segment.label, doc, onBadgeClick);
    if (badge) wrapper.appendChild(badge);
    return wrapper;
  }
  return document.createTextNode(segment.text);
}

function payloadText(segment: SegmentEntry): string {
  const open = segment.text.indexOf('>');
  const close = segment.text.lastIndexOf('</claim>');
  if (open !== -1 && close > open) return segment.text.slice(open + 1, close);
  return segment.text;
}

/** Render a finished assistant message from its annotated document. */
export function renderAnnotated(
  doc: AnnotatedDocument,
  onBadgeClick?: BadgeClickHandler,
): HTMLElement {
  const container = document.createElement('div');
  container.className = 'message-body';
  for (const segment of doc.segments) {
    container.appendChild(segmentNode(segment, doc, onBadgeClick));
  }
  return container;
}

/** Render plain (streaming or user) text; no badges can come from here. */
export function renderPlain(text: string): HTMLElement {
  const container = document.createElement('div');
  container.className = 'message-body';
  container.textContent = text;
  return container;
}

export function countBadges(root: ParentNode): { verified: number; flagged: number } {
  return {
    verified: root.querySelectorAll(`.${VERIFIED_BADGE_CLASS}`).length,
    flagged: root.querySelectorAll(`.${FLAGGED_BADGE_CLASS}`).length,
  };
}
