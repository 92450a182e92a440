import { ApiClient } from "./api.js";
import { ComposerStore } from "./store.js";
import {
  coverageChips,
  finalizePanel,
  suggestionCards,
  toast,
  topicRatingList,
} from "./components.js";

declare global {
  interface Window {
    REVIEWKIT_API_BASE?: string;
  }
}

const base =
  window.REVIEWKIT_API_BASE ??
  localStorage.getItem("reviewkit-base") ??
  "http://127.0.0.1:8400";

const store = new ComposerStore(new ApiClient(base), localStorage);

function byId(id: string): HTMLElement {
  const el = document.getElementById(id);
  if (!el) throw new Error(`missing #${id}`);
  return el;
}

function render(): void {
  const state = store.getState();
  const session = state.session;

  byId("session-meta").textContent = session
    ? `${session.product_type} - ${session.state.toLowerCase().replace(/_/g, " ")}` +
      (session.provenance ? ` (topics via ${session.provenance})` : "")
    : "no session";

  const topics = byId("topics");
  topics.replaceChildren(
    topicRatingList(state, (topic, stars) => {
      store.setPendingRating(topic, stars);
      render();
    }),
  );

  const cards = byId("cards");
  cards.replaceChildren(suggestionCards(state, (topic) => void store.insertSuggestion(topic)));

  byId("coverage").replaceChildren(coverageChips(state));
  byId("final").replaceChildren(finalizePanel(state));
  byId("toast-slot").replaceChildren(
    toast(state, () => {
      store.reset();
      render();
    }),
  );

  const draft = byId("draft") as HTMLTextAreaElement;
  if (draft.value !== state.draft && document.activeElement !== draft) {
    draft.value = state.draft;
  }

  (byId("btn-rate") as HTMLButtonElement).disabled = !session || session.state === "FINALIZED";
  (byId("btn-suggest") as HTMLButtonElement).disabled =
    !session || session.state === "TOPICS_PRESENTED" || session.state === "FINALIZED";
  (byId("btn-finalize") as HTMLButtonElement).disabled =
    !session || session.state !== "DRAFTING";
}

function wire(): void {
  byId("btn-create").addEventListener("click", () => {
    const pt = (byId("product-type") as HTMLInputElement).value.trim();
    if (pt) void store.createSession(pt);
  });
  byId("btn-rate").addEventListener("click", () => void store.submitRatings());
  byId("btn-suggest").addEventListener("click", () => void store.requestSuggestions());
  byId("btn-finalize").addEventListener("click", () => void store.finalize());
  (byId("draft") as HTMLTextAreaElement).addEventListener("input", (event) => {
    store.setDraft((event.target as HTMLTextAreaElement).value);
  });
  store.subscribe(render);
  void store.resume();
}

wire();
