/** Annotation session state and the gated operations behind the UI.
 *
 * Every mutation is checked against the mirrored server stage before any
 * request goes out, so the UI can never trip the server's stage machine
 * in normal operation.  Mutations apply optimistically, then the view is
 * reconciled from a fresh GET; a revision conflict raises a banner and
 * reloads server truth instead of guessing.
 */

import { ApiClient, ApiError } from './api.js';
import { snapToTokens, violatesNesting } from './snap.js';
import type {
  AgreementPayload,
  DiffCategory,
  DocPayload,
  Markable,
  Mode,
  Stage,
  TallyPayload,
} from './types.js';

export interface SessionView {
  projectId: string;
  docId: string;
  annotator: string;
  mode: Mode;
  doc: DocPayload | null;
  selection: { start: number; end: number } | null;
  linkSource: string | null;
  conflict: boolean;
  notice: string | null;
  agreement: AgreementPayload | null;
  adjudicationPartner: string | null;
  labels: Record<string, string>;
  tally: TallyPayload | null;
}

const MODE_FOR_STAGE: Record<Stage, Mode> = {
  markables: 'markables',
  linking: 'linking',
  done: 'linking',
};

export class Session {
  view: SessionView;
  private listeners: (() => void)[] = [];

  constructor(private readonly api: ApiClient) {
    this.view = {
      projectId: '', docId: '', annotator: '',
      mode: 'markables', doc: null, selection: null, linkSource: null,
      conflict: false, notice: null,
      agreement: null, adjudicationPartner: null, labels: {}, tally: null,
    };
  }

  onChange(fn: () => void): void {
    this.listeners.push(fn);
  }

  private emit(): void {
    for (const fn of this.listeners) fn();
  }

  private fail(notice: string): void {
    this.view.notice = notice;
    this.emit();
  }

  get doc(): DocPayload {
    if (!this.view.doc) throw new Error('no document loaded');
    return this.view.doc;
  }

  get stage(): Stage {
    return this.doc.stage;
  }

  async open(projectId: string, docId: string, annotator: string): Promise<void> {
    this.view.projectId = projectId;
    this.view.docId = docId;
    this.view.annotator = annotator;
    await this.reload();
    this.view.mode = MODE_FOR_STAGE[this.doc.stage];
    this.view.conflict = false;
    this.view.notice = null;
    this.emit();
  }

  /** Replace local state with server truth. */
  async reload(): Promise<void> {
    const { projectId, docId, annotator } = this.view;
    this.view.doc = await this.api.getDoc(projectId, docId, annotator);
    if (this.view.mode !== 'adjudication') {
      this.view.mode = MODE_FOR_STAGE[this.view.doc.stage];
    }
    this.emit();
  }

  /** Snap a raw text selection; stores it or explains why not. */
  select(start: number, end: number): { start: number; end: number } | null {
    const snapped = snapToTokens(this.doc.base_text, start, end);
    this.view.selection = snapped;
    this.view.notice = snapped ? null : 'selection contains no token';
    this.emit();
    return snapped;
  }

  private nextMarkableId(): string {
    let max = 0;
    for (const m of this.doc.markables) {
      const n = Number(m.id);
      if (Number.isInteger(n) && n > max) max = n;
    }
    return String(max + 1);
  }

  /** Stage-gated: add the snapped selection as a markable. */
  async markSelection(opts: { min?: string; id?: string } = {}): Promise<Markable | null> {
    if (this.view.mode !== 'markables' || this.stage !== 'markables') {
      this.fail('marking is only available in the markables pass');
      return null;
    }
    const sel = this.view.selection;
    if (!sel) {
      this.fail('nothing selected');
      return null;
    }
    if (violatesNesting(this.doc.markables, sel.start, sel.end)) {
      // crossing selection never reaches the server
      this.fail('selection crosses or duplicates an existing markable');
      return null;
    }
    const markable: Markable = {
      id: opts.id ?? this.nextMarkableId(),
      start: sel.start,
      end: sel.end,
      ...(opts.min ? { min: opts.min } : {}),
    };
    const optimistic = [...this.doc.markables, markable];
    this.doc.markables = optimistic;   // optimistic paint
    this.emit();
    await this.pushMarkables(optimistic);
    this.view.selection = null;
    this.emit();
    return markable;
  }

  async removeMarkable(id: string): Promise<void> {
    if (this.view.mode !== 'markables' || this.stage !== 'markables') {
      this.fail('markables are frozen after the first pass');
      return;
    }
    const kept = this.doc.markables.filter((m) => m.id !== id);
    await this.pushMarkables(kept);
  }

  private async pushMarkables(markables: Markable[]): Promise<void> {
    try {
      await this.api.putMarkables(
        this.view.projectId, this.view.docId, this.view.annotator,
        markables, this.doc.revision);
      this.view.conflict = false;
      this.view.notice = null;
    } catch (err) {
      if (err instanceof ApiError && err.status === 409) {
        this.view.conflict = true;
        this.view.notice = 'someone else saved first; reloaded their version';
      } else if (err instanceof ApiError) {
        this.view.notice = err.message;
      } else {
        throw err;
      }
    }
    await this.reload();   // reconcile to server truth either way
  }

  /** Stage-gated: set or clear the pending link source. */
  pickLinkSource(id: string | null): void {
    this.view.linkSource = id;
    this.emit();
  }

  /** Stage-gated: link source -> target and refresh server-computed chains. */
  async linkMentions(sourceId: string, targetId: string): Promise<void> {
    if (this.view.mode !== 'linking' || this.stage !== 'linking') {
      this.fail('linking is only available in the linking pass');
      return;
    }
    if (sourceId === targetId) {
      this.fail('a mention cannot corefer with itself');   // blocked client-side
      return;
    }
    const links: [string, string][] = [
      ...this.doc.links.filter(([src]) => src !== sourceId),
      [sourceId, targetId],
    ];
    await this.pushLinks(links);
    this.view.linkSource = null;
    this.emit();
  }

  /** Stage-gated: drop the outgoing link of a mention (singleton again). */
  async unlink(sourceId: string): Promise<void> {
    if (this.view.mode !== 'linking' || this.stage !== 'linking') {
      this.fail('linking is only available in the linking pass');
      return;
    }
    await this.pushLinks(this.doc.links.filter(([src]) => src !== sourceId));
  }

  private async pushLinks(links: [string, string][]): Promise<void> {
    try {
      await this.api.putLinks(
        this.view.projectId, this.view.docId, this.view.annotator,
        links, this.doc.revision);
      this.view.conflict = false;
      this.view.notice = null;
    } catch (err) {
      if (err instanceof ApiError && err.status === 409) {
        this.view.conflict = true;
        this.view.notice = 'someone else saved first; reloaded their version';
      } else if (err instanceof ApiError) {
        this.view.notice = err.message;
      } else {
        throw err;
      }
    }
    await this.reload();
  }

  async advanceStage(): Promise<Stage | null> {
    if (this.stage === 'done') {
      this.fail('annotation is already done');
      return null;
    }
    const result = await this.api.advance(
      this.view.projectId, this.view.docId, this.view.annotator);
    await this.reload();
    return result.stage;
  }

  /** Chain id of a mention according to the server, or null. */
  chainOf(mentionId: string): string | null {
    for (const chain of this.doc.chains) {
      if (chain.members.includes(mentionId)) return chain.chain_id;
    }
    return null;
  }

  // ---- adjudication ----

  async openAdjudication(partner: string): Promise<void> {
    const { projectId, docId, annotator } = this.view;
    const agreement = await this.api.getAgreement(projectId, docId, annotator, partner);
    this.view.agreement = agreement;
    this.view.adjudicationPartner = partner;
    this.view.mode = 'adjudication';
    this.view.labels = {};
    for (const d of agreement.diff.discrepancies) {
      if (d.manual_category) this.view.labels[d.key] = d.manual_category;
    }
    this.emit();
  }

  /** Label one discrepancy; the full merged map is written every time. */
  async adjudicate(discrepancyKey: string, category: DiffCategory): Promise<void> {
    if (this.view.mode !== 'adjudication' || !this.view.adjudicationPartner) {
      this.fail('open the adjudication view first');
      return;
    }
    const labels = { ...this.view.labels, [discrepancyKey]: category };
    const { projectId, docId, annotator } = this.view;
    const partner = this.view.adjudicationPartner;
    await this.api.putDiffLabels(projectId, docId, annotator, partner, labels);
    this.view.labels = labels;
    this.view.agreement = await this.api.getAgreement(projectId, docId, annotator, partner);
    this.view.tally = await this.api.getTally(projectId, annotator, partner);
    this.emit();
  }
}
