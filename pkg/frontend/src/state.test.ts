import { describe, expect, it } from "vitest";

import { ChatApi, ChatResponse, FetchLike } from "./api.js";
import { ChatStore } from "./state.js";

const GREETING: ChatResponse = {
  reply: "नमस्ते, म हजुरलाई कसरी सहयोग गर्न सक्छु?",
  source: "rule",
  verdict: "greeting",
  confidence: null,
  session_id: "s1",
};

function apiReturning(
  handler: (body: { message: string; backend?: string }) => ChatResponse | Error,
): { api: ChatApi; requests: Array<{ message: string; backend?: string }> } {
  const requests: Array<{ message: string; backend?: string }> = [];
  const fetchImpl: FetchLike = async (_input, init) => {
    const body = JSON.parse(init!.body as string);
    requests.push(body);
    const out = handler(body);
    if (out instanceof Error) throw out;
    return new Response(JSON.stringify(out), { status: 200 });
  };
  return { api: new ChatApi("", fetchImpl), requests };
}

describe("ChatStore.send", () => {
  it("appends the user turn then the bot turn, in order", async () => {
    const { api } = apiReturning(() => GREETING);
    const store = new ChatStore(api, "s1");
    store.setComposed("नमस्ते");
    await store.send();
    const { turns, composed, inFlight, error } = store.getState();
    expect(turns.map((t) => t.direction)).toEqual(["user", "bot"]);
    expect(turns[0]!.text).toBe("नमस्ते");
    expect(turns[1]!.text).toBe(GREETING.reply);
    expect(turns[1]!.source).toBe("rule");
    expect(composed).toBe("");
    expect(inFlight).toBe(false);
    expect(error).toBeNull();
  });

  it("refuses to send whitespace-only input", async () => {
    const { api, requests } = apiReturning(() => GREETING);
    const store = new ChatStore(api, "s1");
    store.setComposed("   ");
    expect(store.canSend()).toBe(false);
    await store.send();
    expect(requests).toHaveLength(0);
    expect(store.getState().turns).toHaveLength(0);
  });

  it("allows exactly one request in flight", async () => {
    let release: (value: Response) => void = () => {};
    const pending = new Promise<Response>((resolve) => (release = resolve));
    let calls = 0;
    const api = new ChatApi("", async () => {
      calls += 1;
      return pending;
    });
    const store = new ChatStore(api, "s1");
    store.setComposed("पहिलो");
    const first = store.send();
    expect(store.getState().inFlight).toBe(true);
    store.setComposed("दोस्रो");
    await store.send(); // rejected locally: a request is already in flight
    expect(calls).toBe(1);
    release(new Response(JSON.stringify(GREETING), { status: 200 }));
    await first;
    expect(store.getState().inFlight).toBe(false);
  });

  it("keeps the composed text and shows an error when the service is down", async () => {
    const { api } = apiReturning(() => new TypeError("fetch failed"));
    const store = new ChatStore(api, "s1");
    store.setComposed("जाँच कहिले");
    await store.send();
    const state = store.getState();
    expect(state.error).toContain("unreachable");
    expect(state.composed).toBe("जाँच कहिले"); // typed text never lost
    expect(state.turns).toHaveLength(0); // optimistic turn rolled back
    expect(state.inFlight).toBe(false);
  });

  it("surfaces HTTP error details and recovers on retry", async () => {
    let fail = true;
    const fetchImpl: FetchLike = async () =>
      fail
        ? new Response(JSON.stringify({ error: "internal failure" }), { status: 500 })
        : new Response(JSON.stringify(GREETING), { status: 200 });
    const store = new ChatStore(new ChatApi("", fetchImpl), "s1");
    store.setComposed("नमस्ते");
    await store.send();
    expect(store.getState().error).toContain("500");
    fail = false;
    await store.send(); // composed text survived, so retry just works
    expect(store.getState().error).toBeNull();
    expect(store.getState().turns).toHaveLength(2);
  });

  it("carries the selected backend on subsequent requests", async () => {
    const { api, requests } = apiReturning((body) => ({
      ...GREETING,
      source: body.backend === "generative" ? "generative" : "retrieval",
      verdict: "answered",
    }));
    const store = new ChatStore(api, "s1");
    store.setComposed("प्रश्न");
    await store.send();
    expect(requests[0]!.backend).toBeUndefined();
    store.selectBackend("generative");
    store.setComposed("अर्को प्रश्न");
    await store.send();
    expect(requests[1]!.backend).toBe("generative");
    expect(store.getState().turns[3]!.source).toBe("generative");
  });

  it("notifies subscribers and supports unsubscribe", async () => {
    const { api } = apiReturning(() => GREETING);
    const store = new ChatStore(api, "s1");
    let seen = 0;
    const unsubscribe = store.subscribe(() => (seen += 1));
    store.setComposed("क");
    expect(seen).toBe(1);
    unsubscribe();
    store.setComposed("ख");
    expect(seen).toBe(1);
  });

  it("timestamps turns with the injected clock, in send order", async () => {
    const { api } = apiReturning(() => GREETING);
    let tick = 0;
    const store = new ChatStore(api, "s1", () => ++tick);
    store.setComposed("नमस्ते");
    await store.send();
    const [user, bot] = store.getState().turns;
    expect(user!.timestamp).toBeLessThan(bot!.timestamp);
  });
});
