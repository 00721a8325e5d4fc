// Persists just enough to resume an interrupted session after a page
// reload: the session id and who started it. Answers, items, and
// scores all live on the server, so a refresh can never change them.

export interface ActiveSession {
  sessionId: string;
  userId: string;
  protocol: string;
}

const KEY = "liptrain.activeSession";

export function saveActive(store: Storage, active: ActiveSession): void {
  store.setItem(KEY, JSON.stringify(active));
}

export function loadActive(store: Storage): ActiveSession | null {
  const raw = store.getItem(KEY);
  if (!raw) {
    return null;
  }
  try {
    const parsed = JSON.parse(raw);
    if (
      typeof parsed.sessionId === "string" &&
      typeof parsed.userId === "string" &&
      typeof parsed.protocol === "string"
    ) {
      return parsed as ActiveSession;
    }
  } catch {
    // Corrupt entry; treat as absent.
  }
  store.removeItem(KEY);
  return null;
}

export function clearActive(store: Storage): void {
  store.removeItem(KEY);
}
