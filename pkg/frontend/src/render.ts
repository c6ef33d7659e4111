/** DOM rendering for the annotation view: highlighted text, chain table,
 * adjudication list.  All state lives in Session; this layer only paints. */

import { chainBorder, chainColor } from './colors.js';
import { Session } from './session.js';
import type { ChainTablePayload, DiffCategory, Markable } from './types.js';
import { ADJUDICATION_CATEGORIES } from './types.js';

interface Segment {
  start: number;
  end: number;
  mention: Markable | null;   // innermost mention covering the segment
}

function segments(text: string, markables: Markable[]): Segment[] {
  const cuts = new Set<number>([0, text.length]);
  for (const m of markables) {
    cuts.add(m.start);
    cuts.add(m.end);
  }
  const points = [...cuts].sort((x, y) => x - y);
  const out: Segment[] = [];
  for (let i = 0; i + 1 < points.length; i++) {
    const [s, e] = [points[i], points[i + 1]];
    if (s === e) continue;
    let innermost: Markable | null = null;
    for (const m of markables) {
      if (m.start <= s && e <= m.end) {
        if (!innermost || (m.end - m.start) < (innermost.end - innermost.start)) {
          innermost = m;
        }
      }
    }
    out.push({ start: s, end: e, mention: innermost });
  }
  return out;
}

export function renderText(session: Session, host: HTMLElement): void {
  const doc = session.doc;
  host.textContent = '';
  for (const seg of segments(doc.base_text, doc.markables)) {
    const span = document.createElement('span');
    span.textContent = doc.base_text.slice(seg.start, seg.end);
    span.dataset.start = String(seg.start);
    span.dataset.end = String(seg.end);
    if (seg.mention) {
      const chain = session.chainOf(seg.mention.id);
      span.classList.add('mention');
      span.dataset.mention = seg.mention.id;
      span.id = `mention-${seg.mention.id}`;
      span.title = seg.mention.id + (chain ? ` in ${chain}` : '');
      if (chain) {
        span.style.background = chainColor(chain);
        span.style.borderBottom = `2px solid ${chainBorder(chain)}`;
      } else {
        span.classList.add('singleton');
      }
      if (session.view.linkSource === seg.mention.id) {
        span.classList.add('link-source');
      }
    }
    host.appendChild(span);
  }
}

export function renderStatus(session: Session, host: HTMLElement): void {
  const v = session.view;
  const doc = v.doc;
  host.textContent = '';
  const stage = document.createElement('span');
  stage.className = 'stage';
  stage.textContent = doc
    ? `${v.docId} / ${v.annotator}: stage ${doc.stage}, revision ${doc.revision}`
    : 'no document';
  host.appendChild(stage);
  if (v.conflict) {
    const banner = document.createElement('span');
    banner.className = 'conflict';
    banner.textContent = 'revision conflict: showing the server version';
    host.appendChild(banner);
  }
  if (v.notice) {
    const note = document.createElement('span');
    note.className = 'notice';
    note.textContent = v.notice;
    host.appendChild(note);
  }
}

export function renderChainTable(table: ChainTablePayload, session: Session,
                                 host: HTMLElement): void {
  host.textContent = '';
  const el = document.createElement('table');
  const head = el.createTHead().insertRow();
  head.insertCell().textContent = 'chain';
  for (const col of table.columns) {
    head.insertCell().textContent = col.label;
  }
  const body = el.createTBody();
  for (const row of table.rows) {
    const tr = body.insertRow();
    const idCell = tr.insertCell();
    idCell.textContent = row.chain_id;
    idCell.style.background = chainColor(row.chain_id);
    for (const cell of row.cells) {
      const td = tr.insertCell();
      td.textContent = cell.join(' | ');
      td.className = 'chain-cell';
      td.addEventListener('click', () => {
        const chain = session.doc.chains.find((c) => c.chain_id === row.chain_id);
        const first = chain?.members[0];
        if (first) {
          document.getElementById(`mention-${first}`)
            ?.scrollIntoView({ behavior: 'smooth', block: 'center' });
        }
      });
    }
  }
  host.appendChild(el);
}

export function renderAdjudication(session: Session, host: HTMLElement): void {
  const agreement = session.view.agreement;
  host.textContent = '';
  if (!agreement) return;
  const score = agreement.score;
  const fmt = (x: number | null) => (x === null ? '-' : x.toFixed(3));
  const summary = document.createElement('p');
  summary.textContent =
    `R ${fmt(score.recall)} (${score.recall_num}/${score.recall_den})  ` +
    `P ${fmt(score.precision)} (${score.precision_num}/${score.precision_den})  ` +
    `F ${fmt(score.f_measure)}`;
  host.appendChild(summary);

  const list = document.createElement('ul');
  list.className = 'discrepancies';
  for (const d of agreement.diff.discrepancies) {
    const item = document.createElement('li');
    const desc = document.createElement('span');
    desc.textContent =
      `${d.kind} a=[${d.mentions_a.join(',')}] b=[${d.mentions_b.join(',')}] `;
    item.appendChild(desc);
    const select = document.createElement('select');
    for (const cat of ['Unclassified', ...ADJUDICATION_CATEGORIES]) {
      const opt = document.createElement('option');
      opt.value = cat;
      opt.textContent = cat;
      select.appendChild(opt);
    }
    // manual label wins; otherwise the automatic category is pre-filled
    select.value = session.view.labels[d.key] ?? d.auto_category;
    select.addEventListener('change', () => {
      void session.adjudicate(d.key, select.value as DiffCategory);
    });
    item.appendChild(select);
    list.appendChild(item);
  }
  host.appendChild(list);

  const tally = session.view.tally;
  if (tally) {
    const line = document.createElement('p');
    const pct = tally.percentages;
    line.textContent = pct
      ? `tally: ${tally.grand_total} differences, Easy ${pct.easy}% / ` +
        `Missing ${pct.missing}% / Hard ${pct.hard}%`
      : 'tally: empty';
    host.appendChild(line);
  }
}
