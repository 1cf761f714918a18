// Thin client for the verification service endpoints.

import { readSse } from './sse.js';
import type { ChatFinal, ClaimBody } from './types.js';

export type ChatCallbacks = {
  onDelta: (text: string) => void;
  onFinal: (final: ChatFinal) => void;
};

export class ApiClient {
  constructor(private readonly baseUrl: string) {}

  async fetchPolicies(): Promise<{ presets: string[]; active: string }> {
    const response = await fetch(`${this.baseUrl}/policies`);
    if (!response.ok) throw new Error(`policies request failed: ${response.status}`);
    return response.json();
  }

  async fetchClaim(claimId: string): Promise<ClaimBody> {
    const response = await fetch(`${this.baseUrl}/claims/${encodeURIComponent(claimId)}`);
    if (!response.ok) throw new Error(`claim ${claimId} not found (${response.status})`);
    return response.json();
  }

  /** Stream one chat exchange; resolves after the terminal event. */
  async chat(
    message: string,
    sessionId: string,
    policy: string,
    callbacks: ChatCallbacks,
  ): Promise<void> {
    const response = await fetch(`${this.baseUrl}/chat`, {
      method: 'POST',
      headers: { 'Content-Type': 'application/json' },
      body: JSON.stringify({ message, session_id: sessionId, policy }),
    });
    if (!response.ok || !response.body) {
      throw new Error(`chat request failed: ${response.status}`);
    }
    let sawFinal = false;
    for await (const event of readSse(response.body)) {
      if (event.event === 'delta') {
        callbacks.onDelta(JSON.parse(event.data).text as string);
      } else if (event.event === 'final') {
        sawFinal = true;
        callbacks.onFinal(JSON.parse(event.data) as ChatFinal);
      }
    }
    if (!sawFinal) throw new Error('stream ended without a final event');
  }
}
