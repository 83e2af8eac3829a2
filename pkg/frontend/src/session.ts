/**
 * Client-generated session identity, persisted locally so a page reload
 * keeps the same session_id. The service itself is stateless.
 */

const STORAGE_KEY = "sambad.session_id";

export interface StorageLike {
  getItem(key: string): string | null;
  setItem(key: string, value: string): void;
}

export function randomSessionId(random: () => number = Math.random): string {
  let id = "";
  for (let i = 0; i < 16; i++) {
    id += Math.floor(random() * 16).toString(16);
  }
  return id;
}

export function getSessionId(storage: StorageLike, random: () => number = Math.random): string {
  const existing = storage.getItem(STORAGE_KEY);
  if (existing !== null && existing.length > 0) return existing;
  const id = randomSessionId(random);
  storage.setItem(STORAGE_KEY, id);
  return id;
}
