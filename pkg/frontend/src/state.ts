/**
 * Transcript state for the chat page, kept free of DOM concerns so the
 * invariants are unit-testable:
 *
 * - transcript order equals send order; a bot turn always follows its
 *   user turn;
 * - exactly one request in flight at a time;
 * - a failed send never loses the composed text.
 */

import { ApiError, ChatApi, ChatResponse } from "./api.js";

export interface UiTurn {
  direction: "user" | "bot";
  text: string;
  source?: ChatResponse["source"];
  verdict?: ChatResponse["verdict"];
  confidence?: number | null;
  timestamp: number;
}

export interface ChatState {
  turns: UiTurn[];
  composed: string;
  inFlight: boolean;
  error: string | null;
  backend: string | null;
}

export type Listener = (state: ChatState) => void;

export class ChatStore {
  private state: ChatState = {
    turns: [],
    composed: "",
    inFlight: false,
    error: null,
    backend: null,
  };
  private listeners: Listener[] = [];

  constructor(
    private readonly api: ChatApi,
    private readonly sessionId: string,
    private readonly now: () => number = Date.now,
  ) {}

  getState(): ChatState {
    return this.state;
  }

  subscribe(listener: Listener): () => void {
    this.listeners.push(listener);
    return () => {
      this.listeners = this.listeners.filter((l) => l !== listener);
    };
  }

  private update(patch: Partial<ChatState>): void {
    this.state = { ...this.state, ...patch };
    for (const listener of this.listeners) listener(this.state);
  }

  setComposed(text: string): void {
    this.update({ composed: text });
  }

  selectBackend(backend: string | null): void {
    this.update({ backend });
  }

  canSend(): boolean {
    return !this.state.inFlight && this.state.composed.trim().length > 0;
  }

  /** Send the composed message; resolves once the transcript settled. */
  async send(): Promise<void> {
    if (!this.canSend()) return;
    const text = this.state.composed;
    const userTurn: UiTurn = {
      direction: "user",
      text,
      timestamp: this.now(),
    };
    // the composed text is only cleared after a successful round trip
    this.update({
      inFlight: true,
      error: null,
      turns: [...this.state.turns, userTurn],
    });
    try {
      const response = await this.api.chat({
        message: text,
        session_id: this.sessionId,
        ...(this.state.backend ? { backend: this.state.backend } : {}),
      });
      const botTurn: UiTurn = {
        direction: "bot",
        text: response.reply,
        source: response.source,
        verdict: response.verdict,
        confidence: response.confidence,
        timestamp: this.now(),
      };
      this.update({
        inFlight: false,
        composed: "",
        turns: [...this.state.turns, botTurn],
      });
    } catch (err) {
      // drop the optimistic user turn and keep the composed text intact
      const message =
        err instanceof ApiError
          ? `service error (${err.status}): ${err.message}`
          : "service unreachable — message not sent";
      this.update({
        inFlight: false,
        error: message,
        turns: this.state.turns.filter((t) => t !== userTurn),
      });
    }
  }
}
