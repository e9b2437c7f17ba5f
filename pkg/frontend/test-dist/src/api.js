/** Typed client for the live-session HTTP API. No client-side recomputation:
 * every number displayed comes straight from these payloads. */
export class ApiError extends Error {
    constructor(status, code, detail) {
        super(detail ? `${code}: ${detail}` : code);
        this.status = status;
        this.code = code;
    }
}
async function request(base, path, init) {
    const resp = await fetch(base + path, init);
    const body = await resp.json();
    if (!resp.ok) {
        throw new ApiError(resp.status, body.error ?? "UnknownError", body.detail);
    }
    return body;
}
export function metricsPath(fromEpisode) {
    return `/api/metrics?from=${fromEpisode}`;
}
export class Client {
    constructor(base = "") {
        this.base = base;
    }
    session() {
        return request(this.base, "/api/session");
    }
    next() {
        return request(this.base, "/api/next");
    }
    feedback(kind) {
        return request(this.base, "/api/feedback", {
            method: "POST",
            headers: { "Content-Type": "application/json" },
            body: JSON.stringify({ kind }),
        });
    }
    metrics(fromEpisode) {
        return request(this.base, metricsPath(fromEpisode));
    }
    reset() {
        return request(this.base, "/api/reset", { method: "POST", body: "{}" });
    }
}
