// Query session state: the current query, the last completed result
// list, loading/error status, and the history of past queries.
//
// The session never reorders what the server returned, and it keeps a
// single logical request in flight: submitting a new query bumps a
// sequence number and any response from an older submission is dropped
// when it finally lands (latest wins). Error and result states are
// mutually exclusive by construction.

import { ApiError, queryApi, RankedResult, Transport } from './api.js';

export interface SessionState {
  query: string;
  results: RankedResult[] | null;
  loading: boolean;
  error: string | null;
  history: string[];
}

type Listener = (state: SessionState) => void;

export class QuerySession {
  private query = '';
  private results: RankedResult[] | null = null;
  private loading = false;
  private error: string | null = null;
  private history: string[] = [];
  private listeners: Listener[] = [];
  private requestSeq = 0;

  constructor(private transport: Transport) {}

  subscribe(listener: Listener): void {
    this.listeners.push(listener);
    listener(this.state());
  }

  state(): SessionState {
    return {
      query: this.query,
      results: this.results,
      loading: this.loading,
      error: this.error,
      history: [...this.history],
    };
  }

  setQuery(text: string): void {
    this.query = text;
    this.notify();
  }

  /** Restore a history entry into the query box without submitting. */
  selectHistory(entry: string): void {
    if (this.history.includes(entry)) {
      this.setQuery(entry);
    }
  }

  /**
   * Submit the query. Whitespace-only text is rejected client-side and
   * the transport is never touched. Returns once the session reflects
   * the outcome (or the response turned out to be stale).
   */
  async submit(text: string, k: number): Promise<void> {
    const trimmed = text.trim();
    if (!trimmed) {
      return;
    }
    const seq = ++this.requestSeq;
    this.query = text;
    this.loading = true;
    this.error = null;
    this.notify();

    let results: RankedResult[];
    try {
      results = await queryApi(this.transport, trimmed, k);
    } catch (err) {
      if (seq !== this.requestSeq) {
        return; // a newer submission took over
      }
      this.loading = false;
      this.results = null;
      this.error =
        err instanceof ApiError
          ? err.message
          : 'cannot reach the query service';
      this.notify();
      return;
    }
    if (seq !== this.requestSeq) {
      return;
    }
    this.loading = false;
    this.error = null;
    this.results = results;
    this.remember(trimmed);
    this.notify();
  }

  private remember(entry: string): void {
    this.history = [entry, ...this.history.filter((h) => h !== entry)];
  }

  private notify(): void {
    const snapshot = this.state();
    for (const listener of this.listeners) {
      listener(snapshot);
    }
  }
}
