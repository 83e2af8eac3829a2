/**
 * DOM wiring for the single-page chat client. All behavior lives in the
 * testable modules (api, session, state); this file only renders state
 * and forwards events.
 */

import { ChatApi } from "./api.js";
import { getSessionId } from "./session.js";
import { ChatState, ChatStore, UiTurn } from "./state.js";

function el<T extends HTMLElement>(id: string): T {
  const node = document.getElementById(id);
  if (!node) throw new Error(`missing #${id}`);
  return node as T;
}

function renderTurn(turn: UiTurn): HTMLElement {
  const bubble = document.createElement("div");
  bubble.className = `turn turn-${turn.direction}`;
  const text = document.createElement("span");
  text.className = "turn-text";
  text.textContent = turn.text;
  bubble.appendChild(text);
  if (turn.direction === "bot" && turn.source) {
    const badge = document.createElement("span");
    badge.className = `badge badge-${turn.source}`;
    badge.textContent =
      turn.confidence != null
        ? `${turn.source} ${(turn.confidence * 100).toFixed(0)}%`
        : turn.source;
    bubble.appendChild(badge);
  }
  return bubble;
}

function render(state: ChatState): void {
  const transcript = el<HTMLDivElement>("transcript");
  transcript.replaceChildren(...state.turns.map(renderTurn));
  transcript.scrollTop = transcript.scrollHeight;

  const input = el<HTMLInputElement>("composer");
  if (input.value !== state.composed) input.value = state.composed;
  input.disabled = state.inFlight;

  const send = el<HTMLButtonElement>("send");
  send.disabled = state.inFlight || state.composed.trim().length === 0;

  const banner = el<HTMLDivElement>("error-banner");
  banner.hidden = state.error === null;
  banner.textContent = state.error ?? "";
}

async function start(): Promise<void> {
  const api = new ChatApi("");
  const sessionId = getSessionId(window.localStorage);
  const store = new ChatStore(api, sessionId);
  store.subscribe(render);

  const input = el<HTMLInputElement>("composer");
  input.addEventListener("input", () => store.setComposed(input.value));
  input.addEventListener("keydown", (event) => {
    if (event.key === "Enter") void store.send();
  });
  el<HTMLButtonElement>("send").addEventListener("click", () => void store.send());

  const health = el<HTMLSpanElement>("health");
  const selector = el<HTMLSelectElement>("backend");
  try {
    const info = await api.info();
    health.textContent = "online";
    health.className = "health ok";
    if (info.backends.length > 1) {
      for (const kind of info.backends) {
        const option = document.createElement("option");
        option.value = kind;
        option.textContent = kind;
        option.selected = kind === info.default_backend;
        selector.appendChild(option);
      }
      selector.hidden = false;
      store.selectBackend(info.default_backend);
      selector.addEventListener("change", () => store.selectBackend(selector.value));
    }
  } catch {
    health.textContent = "offline";
    health.className = "health down";
  }
  render(store.getState());
}

void start();
