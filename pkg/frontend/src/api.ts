/**
 * Typed client for the case-service HTTP API.
 *
 * Every response body here is rendered as-is: clustering, visibility and
 * hidden-stub counts are computed server-side and the UI never second-
 * guesses them. Errors arrive as {"error": reason} with a conventional
 * status code and surface as ApiError.
 */

export interface CaseSummary {
    case_id: string;
    category: string;
    zone_id: string;
    created_at: number;
    annotation_count: number;
}

export interface Annotation {
    case_id: string;
    address: string;
    role: string;
    author: string;
    created_at: number;
}

export interface CaseDetail {
    case_id: string;
    category: string;
    zone_id: string;
    created_at: number;
    annotations: Annotation[];
}

export interface ClusterCard {
    size: number;
    case_ids: string[];
    hidden_count: number;
    inflow_satoshi: number;
    contains_service_evidence: boolean;
}

export interface ClusterResponse {
    level: string;
    clusters: ClusterCard[];
}

export interface NetworkNode {
    id: string;
    type: string;
    label: string;
}

export interface NetworkEdge {
    src: string;
    dst: string;
    kind: string;
}

export interface NetworkDoc {
    nodes: NetworkNode[];
    edges: NetworkEdge[];
}

export interface ExchangeRequest {
    request_id: number;
    address: string;
    exchange: string;
    zone_id: string;
    requested_at: number;
}

export interface RequestsResponse {
    address: string;
    requests: ExchangeRequest[];
    requested_elsewhere: boolean;
}

export class ApiError extends Error {
    constructor(public readonly status: number, message: string) {
        super(message);
        this.name = "ApiError";
    }
}

export class CaseServiceClient {
    constructor(private baseUrl: string, private token: string) {
        this.baseUrl = baseUrl.replace(/\/+$/, "");
    }

    private async request<T>(method: string, path: string, body?: unknown): Promise<T> {
        const response = await fetch(this.baseUrl + path, {
            method,
            headers: {
                "Authorization": `Bearer ${this.token}`,
                ...(body !== undefined ? { "Content-Type": "application/json" } : {}),
            },
            body: body !== undefined ? JSON.stringify(body) : undefined,
        });
        if (!response.ok) {
            let message = `${response.status}`;
            try {
                const payload = await response.json();
                if (payload && typeof payload.error === "string") message = payload.error;
            } catch {
                // non-JSON error body; keep the status code
            }
            throw new ApiError(response.status, message);
        }
        return response.json() as Promise<T>;
    }

    listCases(): Promise<{ cases: CaseSummary[] }> {
        return this.request("GET", "/cases");
    }

    createCase(caseId: string, category: string): Promise<CaseSummary> {
        return this.request("POST", "/cases", { case_id: caseId, category });
    }

    getCase(caseId: string): Promise<CaseDetail> {
        return this.request("GET", `/cases/${encodeCaseId(caseId)}`);
    }

    annotate(caseId: string, address: string, role: string): Promise<Annotation> {
        return this.request("POST", `/cases/${encodeCaseId(caseId)}/annotations`, { address, role });
    }

    clusters(level: string): Promise<ClusterResponse> {
        return this.request("GET", `/clusters?level=${encodeURIComponent(level)}`);
    }

    network(level: string): Promise<NetworkDoc> {
        return this.request("GET", `/network?level=${encodeURIComponent(level)}&format=json`);
    }

    requestsFor(address: string): Promise<RequestsResponse> {
        return this.request("GET", `/addresses/${encodeURIComponent(address)}/requests`);
    }

    logRequest(address: string, exchange: string): Promise<ExchangeRequest> {
        return this.request("POST", `/addresses/${encodeURIComponent(address)}/requests`, { exchange });
    }
}

// Case ids are police file numbers and contain a literal slash that must
// survive into the path (the server matches it with a path-type param).
export function encodeCaseId(caseId: string): string {
    return caseId.split("/").map(encodeURIComponent).join("/");
}
