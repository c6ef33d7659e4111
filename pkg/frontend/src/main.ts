/** Page bootstrap: wire the session store to the DOM.
 *
 * Keyboard-first flow: drag a selection and press M (or the Mark button)
 * in the markables pass; in the linking pass click the source mention,
 * then the target (U unlinks, Escape clears the pending source).
 */

import { ApiClient } from './api.js';
import { renderAdjudication, renderChainTable, renderStatus, renderText } from './render.js';
import { Session } from './session.js';

const api = new ApiClient('');
const session = new Session(api);

function el<T extends HTMLElement>(id: string): T {
  const node = document.getElementById(id);
  if (!node) throw new Error(`missing #${id}`);
  return node as T;
}

function absoluteOffset(node: Node, offset: number): number | null {
  const span = node instanceof HTMLElement ? node : node.parentElement;
  if (!span || !(span instanceof HTMLElement) || span.dataset.start === undefined) {
    return null;
  }
  return Number(span.dataset.start) + offset;
}

function currentSelection(): { start: number; end: number } | null {
  const sel = window.getSelection();
  if (!sel || sel.rangeCount === 0) return null;
  const range = sel.getRangeAt(0);
  const start = absoluteOffset(range.startContainer, range.startOffset);
  const end = absoluteOffset(range.endContainer, range.endOffset);
  if (start === null || end === null) return null;
  return { start, end };
}

async function refreshTable(): Promise<void> {
  const v = session.view;
  if (!v.doc) return;
  const table = await api.getChainTable(v.projectId, v.docId, v.annotator);
  renderChainTable(table, session, el('chain-table'));
}

function paint(): void {
  if (!session.view.doc) return;
  renderText(session, el('text'));
  renderStatus(session, el('status'));
  renderAdjudication(session, el('adjudication'));
  el<HTMLButtonElement>('advance').textContent =
    session.stage === 'markables' ? 'finish markables pass'
      : session.stage === 'linking' ? 'finish linking pass' : 'done';
}

async function markNow(): Promise<void> {
  const min = el<HTMLInputElement>('min-head').value.trim();
  await session.markSelection(min ? { min } : {});
  el<HTMLInputElement>('min-head').value = '';
}

function wire(): void {
  session.onChange(paint);

  el('text').addEventListener('mouseup', () => {
    if (session.view.mode === 'markables') {
      const raw = currentSelection();
      if (raw) session.select(raw.start, raw.end);
    }
  });

  el('text').addEventListener('click', (event) => {
    if (session.view.mode !== 'linking') return;
    const target = event.target as HTMLElement;
    const mention = target.dataset.mention;
    if (!mention) return;
    const source = session.view.linkSource;
    if (source === null) {
      session.pickLinkSource(mention);
    } else if (source === mention) {
      session.pickLinkSource(null);
    } else {
      void session.linkMentions(source, mention).then(refreshTable);
    }
  });

  document.addEventListener('keydown', (event) => {
    if (event.target instanceof HTMLInputElement) return;
    if (event.key === 'Escape') session.pickLinkSource(null);
    if (session.view.mode === 'markables' && (event.key === 'm' || event.key === 'M')) {
      void markNow();
    }
    if (session.view.mode === 'linking' && (event.key === 'u' || event.key === 'U')) {
      const source = session.view.linkSource;
      if (source) void session.unlink(source).then(refreshTable);
    }
  });

  el('mark').addEventListener('click', () => void markNow());
  el('advance').addEventListener('click', () => {
    void session.advanceStage().then(refreshTable);
  });
  el('adjudicate-open').addEventListener('click', () => {
    const partner = el<HTMLInputElement>('partner').value.trim();
    if (partner) void session.openAdjudication(partner);
  });

  el('open').addEventListener('click', async () => {
    const project = el<HTMLInputElement>('project').value.trim();
    const doc = el<HTMLInputElement>('doc').value.trim();
    const annotator = el<HTMLInputElement>('annotator').value.trim();
    if (project && doc && annotator) {
      await session.open(project, doc, annotator);
      await refreshTable();
    }
  });
}

wire();

const params = new URLSearchParams(window.location.search);
if (params.get('project') && params.get('doc') && params.get('annotator')) {
  el<HTMLInputElement>('project').value = params.get('project')!;
  el<HTMLInputElement>('doc').value = params.get('doc')!;
  el<HTMLInputElement>('annotator').value = params.get('annotator')!;
  void session.open(params.get('project')!, params.get('doc')!, params.get('annotator')!)
    .then(refreshTable);
}
