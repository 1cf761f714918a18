// Wire types for the verification service's annotated-document JSON.

export type LabelStatus = 'verified' | 'bare' | 'flagged';

export type Label = {
  status: LabelStatus;
  claim_id?: string;
  mode?: string;
  reason?: string;
  expected?: string;
};

export type SegmentEntry = {
  kind: 'claim_token' | 'bare_number' | 'plain_text';
  text: string;
  span: [number, number];
  label: Label | null;
  claim_id?: string;
  policy_hint?: string;
};

export type ClaimBody = {
  claim_id: string;
  indicator: string;
  entity: string;
  time: string;
  value: string;
  unit: string;
  provenance?: string;
  [key: string]: unknown;
};

export type ReportCounts = {
  verified: number;
  bare: number;
  flagged: number;
  by_reason: Record<string, number>;
};

export type AnnotatedDocument = {
  policy: string;
  claims_descriptor: string;
  segments: SegmentEntry[];
  claims: Record<string, ClaimBody>;
  report: ReportCounts;
  stripped_markers: number;
};

export type ChatFinal = {
  annotated_json: AnnotatedDocument;
  annotated_html: string;
  report: ReportCounts & { elapsed_seconds: number };
};

export type ChatMessage = {
  role: 'user' | 'assistant';
  text: string;
  doc?: AnnotatedDocument;
  pending?: boolean;
  error?: string;
};

export type ChatViewState = {
  messages: ChatMessage[];
  policies: string[];
  activePolicy: string;
  sessionId: string;
};
