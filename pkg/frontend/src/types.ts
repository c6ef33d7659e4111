/** JSON shapes exchanged with the annotation service. */

export type Stage = 'markables' | 'linking' | 'done';

export type Mode = 'markables' | 'linking' | 'adjudication';

export interface Markable {
  id: string;
  start: number;
  end: number;
  min?: string | null;
}

export interface ZoneInfo {
  kind: 'title' | 'paragraph';
  start: number;
  end: number;
  ordinal: number;
}

export interface ChainInfo {
  chain_id: string;
  members: string[];
  representative: string;
}

export interface DocPayload {
  doc_id: string;
  base_text: string;
  zones: ZoneInfo[];
  markables: Markable[];
  links: [string, string][];
  stage: Stage;
  revision: number;
  chains: ChainInfo[];
  shared_markables?: Markable[];
}

export interface ScorePayload {
  recall_num: number;
  recall_den: number;
  precision_num: number;
  precision_den: number;
  recall: number | null;
  precision: number | null;
  f_measure: number | null;
  per_chain: [string, number][];
}

export type DiffCategory =
  | 'Easy_Pron' | 'Easy_Bugs' | 'Easy_Zone' | 'Easy_Pred'
  | 'Missing' | 'Hard' | 'Unclassified';

export interface DiscrepancyPayload {
  key: string;
  kind: string;
  mentions_a: string[];
  mentions_b: string[];
  auto_category: DiffCategory;
  manual_category: DiffCategory | null;
  note: string;
}

export interface DiffPayload {
  doc_id: string;
  chain_pairs: [string, string][];
  discrepancies: DiscrepancyPayload[];
  tally: TallyPayload;
}

export interface AgreementPayload {
  score: ScorePayload;
  diff: DiffPayload;
}

export interface TallyRowPayload {
  doc_id: string;
  easy_total: number;
  [category: string]: number | string;
}

export interface TallyPayload {
  rows: TallyRowPayload[];
  sum: TallyRowPayload;
  grand_total: number;
  percentages: { easy: number; missing: number; hard: number } | null;
}

export interface ChainTablePayload {
  doc_id: string;
  columns: { ordinal: number; label: string }[];
  rows: { chain_id: string; cells: string[][] }[];
}

/** Categories offered in the adjudication dropdown, grouped as rendered. */
export const ADJUDICATION_CATEGORIES: DiffCategory[] = [
  'Easy_Pron', 'Easy_Bugs', 'Easy_Zone', 'Easy_Pred', 'Missing', 'Hard',
];
