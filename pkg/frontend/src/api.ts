/** Thin typed client over the service's JSON endpoints. */

import type {
  AgreementPayload,
  ChainInfo,
  ChainTablePayload,
  DocPayload,
  Markable,
  Stage,
  TallyPayload,
} from './types.js';

export class ApiError extends Error {
  constructor(
    public readonly status: number,
    public readonly code: string,
    detail: string,
  ) {
    super(detail);
  }
}

async function request<T>(url: string, init?: RequestInit): Promise<T> {
  const response = await fetch(url, {
    headers: { 'content-type': 'application/json' },
    ...init,
  });
  if (!response.ok) {
    let code = `http-${response.status}`;
    let detail = response.statusText;
    try {
      const body = await response.json();
      code = body.error ?? code;
      detail = body.detail ?? detail;
    } catch {
      // non-JSON error body; keep the status text
    }
    throw new ApiError(response.status, code, detail);
  }
  return response.json() as Promise<T>;
}

export class ApiClient {
  constructor(private readonly base: string = '') {}

  private url(path: string, params?: Record<string, string>): string {
    const query = params ? '?' + new URLSearchParams(params).toString() : '';
    return `${this.base}${path}${query}`;
  }

  createProject(name: string, annotators: string[] = []): Promise<{ project_id: string }> {
    return request(this.url('/projects'), {
      method: 'POST',
      body: JSON.stringify({ name, annotators }),
    });
  }

  addDocument(project: string, docId: string, text: string): Promise<{ doc_id: string }> {
    return request(this.url(`/projects/${project}/docs`), {
      method: 'POST',
      body: JSON.stringify({ doc_id: docId, text }),
    });
  }

  getDoc(project: string, docId: string, annotator: string): Promise<DocPayload> {
    return request(this.url(`/projects/${project}/docs/${docId}`, { annotator }));
  }

  putMarkables(
    project: string, docId: string, annotator: string,
    markables: Markable[], revision: number,
  ): Promise<{ revision: number }> {
    return request(this.url(`/projects/${project}/docs/${docId}/markables`, { annotator }), {
      method: 'PUT',
      body: JSON.stringify({ markables, revision }),
    });
  }

  putLinks(
    project: string, docId: string, annotator: string,
    links: [string, string][], revision: number,
  ): Promise<{ revision: number; chains: ChainInfo[] }> {
    return request(this.url(`/projects/${project}/docs/${docId}/links`, { annotator }), {
      method: 'PUT',
      body: JSON.stringify({ links, revision }),
    });
  }

  advance(project: string, docId: string, annotator: string):
      Promise<{ stage: Stage; revision: number }> {
    return request(this.url(`/projects/${project}/docs/${docId}/advance`, { annotator }), {
      method: 'POST',
    });
  }

  async exportSgml(project: string, docId: string, annotator: string): Promise<string> {
    const response = await fetch(
      this.url(`/projects/${project}/docs/${docId}/export`, { annotator }));
    if (!response.ok) throw new ApiError(response.status, `http-${response.status}`, 'export failed');
    return response.text();
  }

  getAgreement(project: string, docId: string, a: string, b: string): Promise<AgreementPayload> {
    return request(this.url(`/projects/${project}/docs/${docId}/agreement`, { a, b }));
  }

  putDiffLabels(
    project: string, docId: string, a: string, b: string,
    labels: Record<string, string>,
  ): Promise<{ labels: Record<string, string> }> {
    return request(this.url(`/projects/${project}/docs/${docId}/diff-labels`, { a, b }), {
      method: 'PUT',
      body: JSON.stringify(labels),
    });
  }

  getTally(project: string, a?: string, b?: string): Promise<TallyPayload> {
    const params = a && b ? { a, b } : undefined;
    return request(this.url(`/projects/${project}/tally`, params));
  }

  getChainTable(project: string, docId: string, annotator: string): Promise<ChainTablePayload> {
    return request(this.url(`/projects/${project}/docs/${docId}/table`, { annotator }));
  }

  getProject(project: string): Promise<{
    project_id: string; name: string; annotators: string[];
    documents: { doc_id: string; states: Record<string, { stage: Stage; revision: number }> }[];
  }> {
    return request(this.url(`/projects/${project}`));
  }
}
