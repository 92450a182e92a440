import { ApiClient, ApiRequestError } from "./api.js";
import type { SessionPayload } from "./types.js";

/**
 * Composer state: a mirror of the server session plus purely-local input
 * (pending star picks, unsynced draft text, toast). All review logic -
 * sentiment, validation flags, coverage - comes from API responses; the
 * store never recomputes any of it.
 */
export interface ComposerState {
  session: SessionPayload | null;
  pendingRatings: Record<string, number>;
  draft: string;
  draftSyncedSeq: number | null;
  busy: boolean;
  toast: string | null;
}

type Listener = (state: ComposerState) => void;

const SESSION_KEY = "reviewkit-session-id";

export class ComposerStore {
  private state: ComposerState = {
    session: null,
    pendingRatings: {},
    draft: "",
    draftSyncedSeq: null,
    busy: false,
    toast: null,
  };
  private listeners: Listener[] = [];
  private draftTimer: ReturnType<typeof setTimeout> | null = null;

  constructor(
    private readonly api: ApiClient,
    private readonly storage: Pick<Storage, "getItem" | "setItem" | "removeItem"> | null = null,
    private readonly draftDebounceMs = 400,
  ) {}

  getState(): ComposerState {
    return this.state;
  }

  subscribe(listener: Listener): () => void {
    this.listeners.push(listener);
    listener(this.state);
    return () => {
      this.listeners = this.listeners.filter((l) => l !== listener);
    };
  }

  private update(patch: Partial<ComposerState>): void {
    this.state = { ...this.state, ...patch };
    for (const listener of this.listeners) listener(this.state);
  }

  private absorb(session: SessionPayload): void {
    this.storage?.setItem(SESSION_KEY, session.id);
    this.update({ session, toast: null });
  }

  private async run<T>(label: string, action: () => Promise<T>): Promise<T | null> {
    this.update({ busy: true });
    try {
      return await action();
    } catch (error) {
      const message =
        error instanceof ApiRequestError
          ? `${label} failed: ${error.message} (${error.code})`
          : `${label} failed: ${String(error)}`;
      this.update({ toast: message });
      return null;
    } finally {
      this.update({ busy: false });
    }
  }

  /** Restore the session saved in storage, if any; true when restored. */
  async resume(): Promise<boolean> {
    const saved = this.storage?.getItem(SESSION_KEY);
    if (!saved) return false;
    const session = await this.run("reload", () => this.api.getSession(saved));
    if (!session) {
      this.storage?.removeItem(SESSION_KEY);
      return false;
    }
    this.absorb(session);
    this.update({ draft: session.draft, draftSyncedSeq: session.seq });
    return true;
  }

  async createSession(productType: string, productName?: string): Promise<void> {
    const session = await this.run("create session", () =>
      this.api.createSession(productType, productName, crypto.randomUUID()),
    );
    if (session) {
      this.absorb(session);
      this.update({ pendingRatings: {}, draft: "", draftSyncedSeq: null });
    }
  }

  /** Record a star pick locally; nothing is sent until submitRatings(). */
  setPendingRating(topic: string, stars: number): void {
    this.update({ pendingRatings: { ...this.state.pendingRatings, [topic]: stars } });
  }

  async submitRatings(): Promise<void> {
    const session = this.state.session;
    if (!session) return;
    const ratings = Object.entries(this.state.pendingRatings).map(([topic, stars]) => ({
      topic,
      stars,
    }));
    if (!ratings.length) {
      this.update({ toast: "rate at least one topic first" });
      return;
    }
    const updated = await this.run("rate topics", () => this.api.rateTopics(session.id, ratings));
    if (updated) this.absorb(updated);
  }

  async requestSuggestions(): Promise<void> {
    const session = this.state.session;
    if (!session) return;
    const updated = await this.run("suggest phrases", () => this.api.suggestPhrases(session.id));
    if (updated) this.absorb(updated);
  }

  /** Insert-on-click: append the card's text to the draft, then sync. */
  async insertSuggestion(topic: string): Promise<void> {
    const session = this.state.session;
    if (!session) return;
    const suggestion = session.suggestions.find((s) => s.topic === topic);
    if (!suggestion || !suggestion.text) return;
    const draft = this.state.draft ? `${this.state.draft} ${suggestion.text}` : suggestion.text;
    this.update({ draft });
    await this.flushDraft();
  }

  /** Debounced local edit; the PUT happens after the debounce window. */
  setDraft(text: string): void {
    this.update({ draft: text });
    if (this.draftTimer) clearTimeout(this.draftTimer);
    this.draftTimer = setTimeout(() => {
      void this.flushDraft();
    }, this.draftDebounceMs);
  }

  /** Push the current draft now (last write wins on our own session). */
  async flushDraft(): Promise<void> {
    const session = this.state.session;
    if (!session) return;
    if (this.draftTimer) {
      clearTimeout(this.draftTimer);
      this.draftTimer = null;
    }
    const text = this.state.draft;
    const updated = await this.run("sync draft", () => this.api.updateDraft(session.id, text));
    if (updated) {
      this.absorb(updated);
      this.update({ draftSyncedSeq: updated.seq });
    }
  }

  async finalize(): Promise<void> {
    const session = this.state.session;
    if (!session) return;
    await this.flushDraft();
    const updated = await this.run("finalize", () => this.api.finalize(session.id));
    if (updated) this.absorb(updated);
  }

  reset(): void {
    this.storage?.removeItem(SESSION_KEY);
    this.update({
      session: null,
      pendingRatings: {},
      draft: "",
      draftSyncedSeq: null,
      toast: null,
    });
  }
}
