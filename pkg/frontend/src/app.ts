// Wiring: transcript, composer, policy selector, provenance panel.

import { ApiClient } from './api.js';
import { countBadges, renderAnnotated, renderPlain } from './render.js';
import {
  appendDelta,
  appendUserMessage,
  failMessage,
  finishMessage,
  initialState,
  switchPolicy,
} from './state.js';
import type { ChatViewState, ClaimBody } from './types.js';

export class ChatApp {
  state!: ChatViewState;
  private readonly api: ApiClient;

  constructor(
    private readonly root: HTMLElement,
    baseUrl: string,
  ) {
    this.api = new ApiClient(baseUrl);
  }

  async start(): Promise<void> {
    const { presets, active } = await this.api.fetchPolicies();
    this.state = initialState(presets, active);
    this.root.innerHTML = `
      <div class="layout">
        <main class="chat">
          <div class="banner" id="banner" hidden></div>
          <div class="transcript" id="transcript"></div>
          <form class="composer" id="composer">
            <select id="policy" title="Verification policy"></select>
            <input id="input" type="text" autocomplete="off"
                   placeholder="Ask about the data…" />
            <button type="submit">Send</button>
          </form>
        </main>
        <aside class="provenance" id="provenance" hidden></aside>
      </div>`;
    this.renderPolicySelect();
    this.composer().addEventListener('submit', (event) => {
      event.preventDefault();
      const input = this.input();
      const text = input.value.trim();
      if (!text) return;
      input.value = '';
      void this.sendMessage(text);
    });
    this.policySelect().addEventListener('change', () => {
      this.setPolicy(this.policySelect().value);
    });
  }

  setPolicy(preset: string): void {
    try {
      this.state = switchPolicy(this.state, preset);
    } catch {
      this.policySelect().value = this.state.activePolicy; // reject client-side
    }
  }

  async sendMessage(text: string): Promise<void> {
    this.state = appendUserMessage(this.state, text);
    this.renderTranscript();
    try {
      await this.api.chat(text, this.state.sessionId, this.state.activePolicy, {
        onDelta: (delta) => {
          this.state = appendDelta(this.state, delta);
          this.renderTranscript();
        },
        onFinal: (final) => {
          this.state = finishMessage(this.state, final.annotated_json);
          this.renderTranscript();
        },
      });
      this.hideBanner();
    } catch (error) {
      this.state = failMessage(this.state, String(error));
      this.showBanner(`Connection problem: ${String(error)}`);
      this.renderTranscript(); // transcript preserved on failure
    }
  }

  renderTranscript(): void {
    const transcript = this.transcript();
    transcript.innerHTML = '';
    for (const message of this.state.messages) {
      const row = document.createElement('div');
      row.className = `message message-${message.role}`;
      if (message.doc) {
        row.appendChild(
          renderAnnotated(message.doc, (claimId) => void this.openProvenance(claimId)),
        );
        const counts = countBadges(row);
        row.dataset['verified'] = String(counts.verified);
        row.dataset['flagged'] = String(counts.flagged);
      } else {
        row.appendChild(renderPlain(message.text));
        if (message.pending) row.classList.add('pending');
        if (message.error) row.classList.add('failed');
      }
      transcript.appendChild(row);
    }
    transcript.scrollTop = transcript.scrollHeight;
  }

  async openProvenance(claimId: string): Promise<void> {
    const panel = this.provenancePanel();
    panel.hidden = false;
    panel.textContent = 'Loading…';
    let claim: ClaimBody;
    try {
      claim = await this.api.fetchClaim(claimId);
    } catch (error) {
      panel.textContent = String(error);
      return;
    }
    panel.innerHTML = '';
    const heading = document.createElement('h3');
    heading.textContent = `Claim ${claim.claim_id}`;
    panel.appendChild(heading);
    const rows: Array<[string, string]> = [
      ['Indicator', claim.indicator],
      ['Entity', claim.entity],
      ['Period', claim.time],
      ['Value', `${claim.value}${claim.unit}`],
    ];
    if (claim.provenance) rows.push(['Provenance', claim.provenance]);
    const list = document.createElement('dl');
    for (const [term, value] of rows) {
      const dt = document.createElement('dt');
      dt.textContent = term;
      const dd = document.createElement('dd');
      dd.textContent = value;
      list.appendChild(dt);
      list.appendChild(dd);
    }
    panel.appendChild(list);
  }

  private renderPolicySelect(): void {
    const select = this.policySelect();
    select.innerHTML = '';
    for (const name of this.state.policies) {
      const option = document.createElement('option');
      option.value = name;
      option.textContent = name;
      option.selected = name === this.state.activePolicy;
      select.appendChild(option);
    }
  }

  private showBanner(text: string): void {
    const banner = this.root.querySelector<HTMLElement>('#banner')!;
    banner.hidden = false;
    banner.textContent = text;
  }

  private hideBanner(): void {
    this.root.querySelector<HTMLElement>('#banner')!.hidden = true;
  }

  private transcript(): HTMLElement {
    return this.root.querySelector<HTMLElement>('#transcript')!;
  }

  private composer(): HTMLFormElement {
    return this.root.querySelector<HTMLFormElement>('#composer')!;
  }

  private input(): HTMLInputElement {
    return this.root.querySelector<HTMLInputElement>('#input')!;
  }

  private policySelect(): HTMLSelectElement {
    return this.root.querySelector<HTMLSelectElement>('#policy')!;
  }

  private provenancePanel(): HTMLElement {
    return this.root.querySelector<HTMLElement>('#provenance')!;
  }
}

export function mount(selector = '#app', baseUrl = ''): ChatApp {
  const root = document.querySelector<HTMLElement>(selector);
  if (!root) throw new Error(`no element matches ${selector}`);
  const app = new ChatApp(root, baseUrl);
  void app.start();
  return app;
}
