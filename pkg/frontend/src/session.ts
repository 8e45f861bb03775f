// Session store: the base URL is the single configuration setting, the
// token is whatever the zone admin issued out-of-band. localStorage keeps
// both across reloads when the browser allows it.

export interface Session {
    baseUrl: string;
    token: string;
}

const STORAGE_KEY = "caseconnect.session";

export function loadSession(): Session | null {
    try {
        const raw = window.localStorage.getItem(STORAGE_KEY);
        if (!raw) return null;
        const parsed = JSON.parse(raw);
        if (typeof parsed.baseUrl === "string" && typeof parsed.token === "string") {
            return { baseUrl: parsed.baseUrl, token: parsed.token };
        }
    } catch {
        // private mode or corrupted entry; treat as signed out
    }
    return null;
}

export function saveSession(session: Session): void {
    try {
        window.localStorage.setItem(STORAGE_KEY, JSON.stringify(session));
    } catch {
        // storage unavailable; the session lives for this page only
    }
}

export function clearSession(): void {
    try {
        window.localStorage.removeItem(STORAGE_KEY);
    } catch {
        // nothing to clear
    }
}
