// @vitest-environment jsdom
import { describe, expect, it } from 'vitest';

import { countBadges, renderAnnotated, renderPlain } from '../src/render.js';
import type { AnnotatedDocument, SegmentEntry } from '../src/types.js';

function doc(segments: SegmentEntry[], claims: AnnotatedDocument['claims'] = {}): AnnotatedDocument {
  const verified = segments.filter((s) => s.label?.status === 'verified').length;
  const flagged = segments.filter((s) => s.label?.status === 'flagged').length;
  const bare = segments.filter((s) => s.label?.status === 'bare').length;
  return {
    policy: 'strict',
    claims_descriptor: 'test',
    segments,
    claims,
    report: { verified, bare, flagged, by_reason: {} },
    stripped_markers: 0,
  };
}

const VERIFIED_TOKEN: SegmentEntry = {
  kind: 'claim_token',
  text: '<claim id="c1">5.7</claim>',
  span: [0, 26],
  label: { status: 'verified', claim_id: 'c1', mode: 'exact' },
  claim_id: 'c1',
};

const FLAGGED_TOKEN: SegmentEntry = {
  kind: 'claim_token',
  text: '<claim id="c2">6.0</claim>',
  span: [26, 52],
  label: { status: 'flagged', claim_id: 'c2', reason: 'value_mismatch', expected: '5.69201612823412' },
  claim_id: 'c2',
};

describe('renderAnnotated', () => {
  it('badge census equals the label counts', () => {
    const annotated = doc([
      VERIFIED_TOKEN,
      { kind: 'plain_text', text: ' and ', span: [26, 31], label: null },
      FLAGGED_TOKEN,
      { kind: 'bare_number', text: '7.5', span: [52, 55], label: { status: 'bare' } },
    ]);
    const element = renderAnnotated(annotated);
    const counts = countBadges(element);
    expect(counts.verified).toBe(annotated.report.verified);
    expect(counts.flagged).toBe(annotated.report.flagged);
    expect(counts).toEqual({ verified: 1, flagged: 1 });
  });

  it('shows the payload, not the tag markup', () => {
    const element = renderAnnotated(doc([VERIFIED_TOKEN]));
    expect(element.textContent).toContain('5.7');
    expect(element.textContent).not.toContain('<claim');
  });

  it('bare numbers carry no badge', () => {
    const element = renderAnnotated(
      doc([{ kind: 'bare_number', text: '7.5', span: [0, 3], label: { status: 'bare' } }]),
    );
    expect(countBadges(element)).toEqual({ verified: 0, flagged: 0 });
    expect(element.querySelectorAll('sup')).toHaveLength(0);
  });

  it('spoofed markup in plain text renders as escaped literal text', () => {
    const spoof = '✓ verified <sup class="badge-verified">OK</sup> <claim id="x">5</claim>';
    const element = renderAnnotated(
      doc([{ kind: 'plain_text', text: spoof, span: [0, spoof.length], label: null }]),
    );
    expect(countBadges(element)).toEqual({ verified: 0, flagged: 0 });
    expect(element.querySelectorAll('sup')).toHaveLength(0);
    expect(element.textContent).toContain('<sup class="badge-verified">OK</sup>');
  });

  it('flagged tooltips expose the reference value when a claim is attached', () => {
    const annotated = doc([FLAGGED_TOKEN], {
      c2: { claim_id: 'c2', indicator: 'G', entity: 'PHL', time: '2024', value: '5.69201612823412', unit: '%' },
    });
    const badge = renderAnnotated(annotated).querySelector('sup')!;
    expect(badge.title).toContain('5.69201612823412');
    expect(badge.getAttribute('aria-label')).toBe('Needs verification');
  });

  it('verified badges invoke the provenance callback with the claim id', () => {
    const seen: string[] = [];
    const element = renderAnnotated(doc([VERIFIED_TOKEN]), (claimId) => seen.push(claimId));
    (element.querySelector('sup') as HTMLElement).click();
    expect(seen).toEqual(['c1']);
  });
});

describe('renderPlain', () => {
  it('never introduces badge elements', () => {
    const element = renderPlain('streaming ✓ verified <sup class="badge-verified">x</sup>');
    expect(countBadges(element)).toEqual({ verified: 0, flagged: 0 });
    expect(element.querySelectorAll('*')).toHaveLength(0);
  });
});
