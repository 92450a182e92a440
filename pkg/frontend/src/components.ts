import type { ComposerState } from "./store.js";
import type { SuggestionPayload } from "./types.js";

/** DOM renderers; every value shown comes from the API or the user's input. */

export function starRow(topic: string, value: number, onPick: (stars: number) => void): HTMLElement {
  const row = document.createElement("span");
  row.className = "star-row";
  row.setAttribute("role", "radiogroup");
  row.dataset.topic = topic;
  for (let i = 1; i <= 5; i++) {
    const star = document.createElement("button");
    star.type = "button";
    star.className = "star" + (i <= value ? " star-on" : "");
    star.textContent = i <= value ? "★" : "☆";
    star.setAttribute("aria-label", `${i} stars for ${topic}`);
    star.addEventListener("click", () => onPick(i));
    row.appendChild(star);
  }
  return row;
}

export function topicRatingList(
  state: ComposerState,
  onPick: (topic: string, stars: number) => void,
): HTMLElement {
  const list = document.createElement("ul");
  list.className = "topic-list";
  const session = state.session;
  if (!session) return list;
  for (const topic of session.presented_topics) {
    const item = document.createElement("li");
    item.className = "topic-item";
    const label = document.createElement("span");
    label.className = "topic-label";
    label.textContent = topic.label;
    item.appendChild(label);
    const rated =
      state.pendingRatings[topic.label] ??
      session.ratings.find((r) => r.topic === topic.label)?.stars ??
      0;
    item.appendChild(starRow(topic.label, rated, (stars) => onPick(topic.label, stars)));
    list.appendChild(item);
  }
  return list;
}

function flagBadges(suggestion: SuggestionPayload): HTMLElement {
  const wrap = document.createElement("span");
  wrap.className = "flags";
  for (const flag of suggestion.flags) {
    const badge = document.createElement("span");
    badge.className = `flag flag-${flag.toLowerCase()}`;
    badge.textContent = flag.replace(/_/g, " ").toLowerCase();
    badge.title = flag === "RATING_MENTION" ? "mentions a rating; consider rewording" : flag;
    wrap.appendChild(badge);
  }
  return wrap;
}

function sentimentBadge(suggestion: SuggestionPayload): HTMLElement {
  const badge = document.createElement("span");
  const sentiment = suggestion.sentiment;
  badge.className = "sentiment";
  if (!sentiment) {
    badge.textContent = "-";
    return badge;
  }
  const tone = sentiment.compound < 0.4 ? "negative" : sentiment.compound > 0.6 ? "positive" : "neutral";
  badge.classList.add(`sentiment-${tone}`);
  badge.textContent = `${tone} (${sentiment.compound.toFixed(2)})`;
  return badge;
}

export function suggestionCards(
  state: ComposerState,
  onInsert: (topic: string) => void,
): HTMLElement {
  const deck = document.createElement("div");
  deck.className = "cards";
  const session = state.session;
  if (!session) return deck;
  for (const suggestion of session.suggestions) {
    const card = document.createElement("article");
    card.className = "card";
    card.dataset.topic = suggestion.topic;

    const head = document.createElement("header");
    const title = document.createElement("strong");
    title.textContent = suggestion.topic;
    head.appendChild(title);
    head.appendChild(sentimentBadge(suggestion));
    card.appendChild(head);

    const body = document.createElement("p");
    body.textContent = suggestion.text || "(no phrase returned)";
    card.appendChild(body);

    card.appendChild(flagBadges(suggestion));

    const insert = document.createElement("button");
    insert.type = "button";
    insert.className = "insert";
    insert.textContent = "Insert";
    insert.disabled = !suggestion.text || session.state === "FINALIZED";
    insert.addEventListener("click", () => onInsert(suggestion.topic));
    card.appendChild(insert);

    deck.appendChild(card);
  }
  return deck;
}

export function coverageChips(state: ComposerState): HTMLElement {
  const wrap = document.createElement("div");
  wrap.className = "coverage";
  const session = state.session;
  if (!session) return wrap;
  const add = (label: string, kind: "covered" | "unaddressed") => {
    const chip = document.createElement("span");
    chip.className = `chip chip-${kind}`;
    chip.textContent = label;
    wrap.appendChild(chip);
  };
  for (const label of session.coverage.covered) add(label, "covered");
  for (const label of session.coverage.unaddressed) add(label, "unaddressed");
  return wrap;
}

export function finalizePanel(state: ComposerState): HTMLElement {
  const panel = document.createElement("div");
  panel.className = "final-panel";
  const final = state.session?.final;
  if (!final) return panel;
  const stars = document.createElement("p");
  stars.className = "final-stars";
  stars.textContent =
    `Suggested rating: ${final.suggested_stars}★  ·  ` +
    `Topic average: ${final.topic_average_stars}★`;
  panel.appendChild(stars);
  const tone = document.createElement("p");
  tone.className = "final-tone";
  tone.textContent = `Review tone score: ${final.sentiment.compound.toFixed(2)}`;
  panel.appendChild(tone);
  return panel;
}

export function toast(state: ComposerState, onRetryDismiss: () => void): HTMLElement {
  const el = document.createElement("div");
  el.className = "toast";
  if (!state.toast) {
    el.hidden = true;
    return el;
  }
  el.textContent = state.toast;
  const dismiss = document.createElement("button");
  dismiss.type = "button";
  dismiss.textContent = "Dismiss";
  dismiss.addEventListener("click", onRetryDismiss);
  el.appendChild(dismiss);
  return el;
}
