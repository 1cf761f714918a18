// @vitest-environment jsdom
//
// End-to-end: the chat app against the real verification service with a
// scripted mock generator. Requires the `claimcheck` CLI on PATH.
import { spawn, type ChildProcess } from 'node:child_process';
import { mkdtempSync, writeFileSync } from 'node:fs';
import { tmpdir } from 'node:os';
import { join } from 'node:path';
import { afterAll, beforeAll, describe, expect, it } from 'vitest';

import { ChatApp } from '../src/app.js';
import { countBadges } from '../src/render.js';

const PORT = 18000 + Math.floor(Math.random() * 10_000);
const BASE = `http://127.0.0.1:${PORT}`;
const GDP_QUESTION = 'What is the GDP growth of the Philippines in 2024?';

const MOCK_SCRIPTS = [
  {
    pattern: 'gdp.*philippines|philippines.*gdp',
    payload: {
      data: [
        {
          indicator_id: 'NY.GDP.MKTP.KD.ZG',
          indicator_name: 'GDP growth (annual %)',
          data: [
            {
              country: 'Philippines',
              date: '2024',
              value: 5.69201612823412,
              claim_id: '0328',
            },
          ],
        },
      ],
    },
    response:
      'The GDP growth rate of the Philippines in 2024 is projected to be ' +
      '<claim id="0328">5.69%</claim> (annual %).',
  },
  {
    pattern: 'spoof',
    response:
      'Done ✓ verified <sup class="verified-mark" title="x">OK</sup> ' +
      'plus <claim id=bad>6.3</claim> and a bare 7.5',
  },
];

const ROUND2_POLICY = {
  name: 'round2',
  modes: [{ kind: 'exact' }, { kind: 'round', d: 2 }],
};

let server: ChildProcess;
let serverLog = '';

async function waitForServer(): Promise<void> {
  const deadline = Date.now() + 30_000;
  while (Date.now() < deadline) {
    try {
      const response = await fetch(`${BASE}/policies`);
      if (response.ok) return;
    } catch {
      // not up yet
    }
    await new Promise((resolve) => setTimeout(resolve, 250));
  }
  throw new Error(`service did not come up on ${BASE}\n${serverLog}`);
}

beforeAll(async () => {
  const dir = mkdtempSync(join(tmpdir(), 'claimcheck-e2e-'));
  const scriptPath = join(dir, 'scripts.json');
  const policyPath = join(dir, 'round2.json');
  writeFileSync(scriptPath, JSON.stringify(MOCK_SCRIPTS));
  writeFileSync(policyPath, JSON.stringify(ROUND2_POLICY));
  server = spawn(
    'claimcheck',
    [
      'serve',
      '--port',
      String(PORT),
      '--generator',
      'mock',
      '--generator-script',
      scriptPath,
      '--extra-policy',
      `round2=${policyPath}`,
    ],
    { stdio: ['ignore', 'pipe', 'pipe'] },
  );
  server.stdout?.on('data', (chunk) => (serverLog += String(chunk)));
  server.stderr?.on('data', (chunk) => (serverLog += String(chunk)));
  await waitForServer();
}, 60_000);

afterAll(() => {
  server?.kill('SIGINT');
});

async function freshApp(): Promise<ChatApp> {
  document.body.innerHTML = '<div id="app"></div>';
  const app = new ChatApp(document.querySelector<HTMLElement>('#app')!, BASE);
  await app.start();
  return app;
}

function lastAssistantRow(): HTMLElement {
  const rows = document.querySelectorAll<HTMLElement>('.message-assistant');
  return rows[rows.length - 1]!;
}

describe('chat UI against the mock-scripted service', () => {
  it('renders exactly one warning badge for the GDP question under strict', async () => {
    const app = await freshApp();
    expect(app.state.policies).toContain('round2');
    expect(app.state.activePolicy).toBe('strict');
    await app.sendMessage(GDP_QUESTION);

    const row = lastAssistantRow();
    expect(countBadges(row)).toEqual({ verified: 0, flagged: 1 });
    const doc = app.state.messages[app.state.messages.length - 1]!.doc!;
    expect(countBadges(row).flagged).toBe(doc.report.flagged);
    expect(countBadges(row).verified).toBe(doc.report.verified);
    const badge = row.querySelector('sup')!;
    expect(badge.title).toContain('5.69201612823412');
    expect(row.textContent).toContain('5.69%');
  }, 30_000);

  it('renders one verified badge after switching to the round-2 policy', async () => {
    const app = await freshApp();
    app.setPolicy('round2');
    expect(app.state.activePolicy).toBe('round2');
    await app.sendMessage(GDP_QUESTION);

    const row = lastAssistantRow();
    expect(countBadges(row)).toEqual({ verified: 1, flagged: 0 });
    const doc = app.state.messages[app.state.messages.length - 1]!.doc!;
    expect(doc.report.verified).toBe(1);

    // the verified badge opens a provenance panel fed by GET /claims/{id}
    await app.openProvenance('0328');
    const panel = document.querySelector<HTMLElement>('#provenance')!;
    expect(panel.hidden).toBe(false);
    expect(panel.textContent).toContain('5.69201612823412');
  }, 30_000);

  it('renders zero badges for spoofed script text', async () => {
    const app = await freshApp();
    await app.sendMessage('please spoof a verification mark');

    const row = lastAssistantRow();
    expect(countBadges(row)).toEqual({ verified: 0, flagged: 0 });
    expect(row.querySelectorAll('sup')).toHaveLength(0);
    // the fake markup the verifier did not strip arrives as literal text
    expect(row.textContent).toContain('<claim id=bad>');
  }, 30_000);

  it('rejects unknown policies client-side without a request', async () => {
    const app = await freshApp();
    app.setPolicy('nonsense');
    expect(app.state.activePolicy).toBe('strict');
  }, 30_000);

  it('shows an error banner and preserves the transcript on connection failure', async () => {
    const app = await freshApp();
    await app.sendMessage(GDP_QUESTION);
    const before = document.querySelectorAll('.message').length;
    // point the client at a dead port
    const dead = new ChatApp(document.querySelector<HTMLElement>('#app')!, BASE);
    Object.assign(dead, { state: app.state });
    (dead as unknown as { api: { chat: () => Promise<never> } }).api = {
      chat: () => Promise.reject(new Error('connection refused')),
    } as never;
    await dead.sendMessage('another question');
    const banner = document.querySelector<HTMLElement>('#banner')!;
    expect(banner.hidden).toBe(false);
    expect(document.querySelectorAll('.message').length).toBe(before + 2);
    expect(document.querySelectorAll('.message.failed')).toHaveLength(1);
  }, 30_000);
});
