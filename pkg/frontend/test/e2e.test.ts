/** Headless end-to-end: the session store drives a live service through
 * the full two-stage workflow and adjudication, exactly as the page does. */

import { spawn, type ChildProcess } from 'node:child_process';
import { mkdtempSync, readFileSync } from 'node:fs';
import { tmpdir } from 'node:os';
import { join } from 'node:path';

import { afterAll, beforeAll, describe, expect, it } from 'vitest';

import { ApiClient } from '../src/api.js';
import { Session } from '../src/session.js';

const PORT = 8874;
const BASE = `http://127.0.0.1:${PORT}`;

const CANONICAL = readFileSync(
  join(__dirname, '..', '..', 'fixtures', 'bulger_canonical.sgm'), 'utf-8');
const BASE_TEXT = CANONICAL.replace(/<\/?COREF[^>]*>/g, '');

let server: ChildProcess;
let wrongStageResponses = 0;

beforeAll(async () => {
  const root = mkdtempSync(join(tmpdir(), 'corefkit-e2e-'));
  server = spawn('coref', ['serve', '--root', root, '--port', String(PORT)],
    { stdio: 'ignore' });

  for (let i = 0; i < 100; i++) {
    try {
      const r = await fetch(`${BASE}/health`);
      if (r.ok) break;
    } catch {
      await new Promise((resolve) => setTimeout(resolve, 150));
    }
    if (i === 99) throw new Error('service never came up');
  }

  // every 409 WrongStage seen on the wire is a gating failure in the UI
  const realFetch = globalThis.fetch;
  globalThis.fetch = (async (input: RequestInfo | URL, init?: RequestInit) => {
    const response = await realFetch(input, init);
    if (response.status === 409) {
      const body = await response.clone().json().catch(() => ({}));
      if (body.error === 'WrongStage') wrongStageResponses++;
    }
    return response;
  }) as typeof fetch;
}, 30_000);

afterAll(() => {
  server?.kill();
});

describe('annotation workflow end to end', () => {
  const api = new ApiClient(BASE);

  it('runs markables -> linking -> done and exports the canonical SGML',
    async () => {
      await api.createProject('e2e', ['ann1']);
      await api.addDocument('e2e', 'bulger', BASE_TEXT);

      const session = new Session(api);
      await session.open('e2e', 'bulger', 'ann1');
      expect(session.stage).toBe('markables');

      // deliberately sloppy drags; snapping must land on clean spans
      const idx = (s: string) => BASE_TEXT.indexOf(s);
      session.select(idx('James') + 2, idx('Bulger') + 3);
      await session.markSelection();
      session.select(idx('his lottery') + 1, idx('winnings.') + 4);
      await session.markSelection({ min: 'winnings' });
      session.select(idx('his lottery'), idx('his lottery') + 3);
      await session.markSelection();
      session.select(idx('These') + 1, idx('These winnings') + 10);
      await session.markSelection();

      expect(session.doc.markables.map((m) => m.id)).toEqual(['1', '2', '3', '4']);
      expect(session.doc.markables.map((m) => [m.start, m.end])).toEqual([
        [idx('James'), idx('Bulger') + 6],
        [idx('his lottery'), idx('winnings.') + 8],
        [idx('his lottery'), idx('his lottery') + 3],
        [idx('These'), idx('These winnings') + 14],
      ]);

      // a crossing drag is refused locally, nothing changes
      session.view.selection = { start: idx('James') + 5, end: idx('Bulger') + 20 };
      expect(await session.markSelection()).toBeNull();
      expect(session.doc.markables).toHaveLength(4);

      expect(await session.advanceStage()).toBe('linking');
      await session.linkMentions('3', '1');
      await session.linkMentions('4', '2');
      const chains = session.doc.chains.map((c) => [...c.members].sort());
      expect(chains).toContainEqual(['1', '3']);
      expect(chains).toContainEqual(['2', '4']);

      expect(await session.advanceStage()).toBe('done');
      const exported = await api.exportSgml('e2e', 'bulger', 'ann1');
      expect(exported).toBe(CANONICAL);
    }, 30_000);

  it('reconciles the view to server truth after every mutation', async () => {
    const fresh = await api.getDoc('e2e', 'bulger', 'ann1');
    const session = new Session(api);
    await session.open('e2e', 'bulger', 'ann1');
    expect(session.doc).toEqual(fresh);
  });

  it('adjudicates a discrepancy to Hard and sees it in the tally', async () => {
    // second annotator: same markables, winnings chain never linked
    const second = new Session(api);
    await second.open('e2e', 'bulger', 'ann2');
    const idx = (s: string) => BASE_TEXT.indexOf(s);
    for (const [from, to, min] of [
      [idx('James'), idx('Bulger') + 6, undefined],
      [idx('his lottery'), idx('winnings.') + 8, 'winnings'],
      [idx('his lottery'), idx('his lottery') + 3, undefined],
      [idx('These'), idx('These winnings') + 14, undefined],
    ] as [number, number, string | undefined][]) {
      second.select(from, to);
      await second.markSelection(min ? { min } : {});
    }
    await second.advanceStage();
    await second.linkMentions('3', '1');
    await second.advanceStage();
    expect(second.stage).toBe('done');

    const adjudicator = new Session(api);
    await adjudicator.open('e2e', 'bulger', 'ann1');
    await adjudicator.openAdjudication('ann2');
    expect(adjudicator.view.mode).toBe('adjudication');
    const diff = adjudicator.view.agreement!.diff;
    expect(diff.discrepancies).toHaveLength(1);
    expect(diff.discrepancies[0].kind).toBe('ChainMissingInB');
    expect(diff.discrepancies[0].auto_category).toBe('Missing');
    expect(adjudicator.view.agreement!.score.recall).toBe(0.5);

    await adjudicator.adjudicate(diff.discrepancies[0].key, 'Hard');
    expect(adjudicator.view.tally!.sum.Hard).toBe(1);
    expect(adjudicator.view.tally!.grand_total).toBe(1);

    // the label survived on the server, not just in the view
    const tally = await api.getTally('e2e', 'ann1', 'ann2');
    expect(tally.sum.Hard).toBe(1);
  }, 30_000);

  it('never produced a 409 WrongStage during the whole run', () => {
    expect(wrongStageResponses).toBe(0);
  });
});
