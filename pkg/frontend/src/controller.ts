// View-model layer: owns async request ordering and tells the caller what to
// draw via plain callbacks, so it runs identically in tests and the browser.

import type { AnswerPayload, ApiClient } from "./api";
import { renderError, renderFaults, renderSearch } from "./render";

export interface View {
  setSearchHtml(html: string): void;
  setFaultsHtml(html: string): void;
}

export class Console {
  // monotonically increasing per panel; a response only renders if it still
  // carries the latest sequence number, so slow responses can't clobber
  // newer ones
  private searchSeq = 0;
  private faultsSeq = 0;

  constructor(
    private api: ApiClient,
    private view: View,
  ) {}

  async runSearch(query: string, lambda?: number): Promise<void> {
    const seq = ++this.searchSeq;
    try {
      const result = await this.api.search(query, lambda);
      if (seq === this.searchSeq) this.view.setSearchHtml(renderSearch(result));
    } catch (err) {
      if (seq === this.searchSeq) this.view.setSearchHtml(renderError(String(err)));
    }
  }

  async refreshFaults(student: string): Promise<void> {
    const seq = ++this.faultsSeq;
    try {
      const faults = await this.api.faults(student);
      if (seq === this.faultsSeq) this.view.setFaultsHtml(renderFaults(faults));
    } catch (err) {
      if (seq === this.faultsSeq) this.view.setFaultsHtml(renderError(String(err)));
    }
  }

  /** Submit one answer, then refresh the faults panel exactly once. */
  async submitAnswer(payload: AnswerPayload): Promise<void> {
    await this.api.submitAnswer(payload);
    await this.refreshFaults(payload.student_id);
  }
}
