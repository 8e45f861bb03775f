// Single-page wiring: hash routes, one delegated listener per event kind,
// server state refetched per view. The only client state is the session
// and the selected evidence level.

import { ApiError, CaseServiceClient } from "./api.js";
import { clearSession, loadSession, saveSession, type Session } from "./session.js";
import { renderLegend, renderNetworkSvg } from "./network.js";
import {
    renderCaseDetail,
    renderCaseList,
    renderClusterView,
    renderError,
    renderLevelSelector,
    renderLogin,
    renderNewCaseError,
    renderRequestsPanel,
    renderShell,
    renderStaleBanner,
    renderAnnotationRow,
} from "./views.js";

export class App {
    private client: CaseServiceClient | null = null;
    private level = "address";
    // Concurrent navigations race their fetches; only the latest route
    // may write the view, or a slow response would overwrite a newer page.
    private routeSeq = 0;

    constructor(private root: HTMLElement) {}

    start(): void {
        const session = loadSession();
        if (session) this.signIn(session);
        else this.root.innerHTML = renderLogin();

        window.addEventListener("hashchange", () => void this.route());
        this.root.addEventListener("submit", (event) => void this.onSubmit(event));
        this.root.addEventListener("click", (event) => void this.onClick(event));
        this.root.addEventListener("change", (event) => void this.onChange(event));
    }

    private signIn(session: Session): void {
        this.client = new CaseServiceClient(session.baseUrl, session.token);
        this.root.innerHTML = renderShell();
        void this.route();
    }

    private view(): HTMLElement {
        return this.root.querySelector("#view") as HTMLElement;
    }

    // -- routing -----------------------------------------------------------

    async route(): Promise<void> {
        if (!this.client) return;
        const hash = window.location.hash || "#/clusters";
        const seq = ++this.routeSeq;
        let html: string;
        try {
            if (hash.startsWith("#/cases/")) {
                html = await this.showCase(decodeURIComponent(hash.slice("#/cases/".length)));
            } else if (hash.startsWith("#/cases")) {
                html = await this.showCases();
            } else if (hash.startsWith("#/network")) {
                html = await this.showNetwork();
            } else if (hash.startsWith("#/requests")) {
                html = renderRequestsPanel();
            } else {
                html = await this.showClusters();
            }
        } catch (error) {
            html = renderError(messageOf(error));
        }
        if (seq === this.routeSeq) this.view().innerHTML = html;
    }

    private async showCases(): Promise<string> {
        const { cases } = await this.client!.listCases();
        return renderCaseList(cases);
    }

    private async showCase(caseId: string): Promise<string> {
        const detail = await this.client!.getCase(caseId);
        return renderCaseDetail(detail);
    }

    private async showClusters(): Promise<string> {
        const response = await this.client!.clusters(this.level);
        return renderClusterView(response);
    }

    private async showNetwork(): Promise<string> {
        const doc = await this.client!.network(this.level);
        return renderLevelSelector(this.level) + renderLegend() + renderNetworkSvg(doc);
    }

    // -- events -------------------------------------------------------------

    private async onSubmit(event: Event): Promise<void> {
        const form = event.target as HTMLFormElement;
        if (!form.matches("form")) return;
        event.preventDefault();
        const fields = new FormData(form);
        const value = (name: string) => String(fields.get(name) ?? "").trim();

        if (form.id === "login") {
            const session = { baseUrl: value("baseUrl"), token: value("token") };
            try {
                await new CaseServiceClient(session.baseUrl, session.token).listCases();
            } catch (error) {
                this.root.innerHTML = renderLogin(messageOf(error));
                return;
            }
            saveSession(session);
            this.signIn(session);
        } else if (form.id === "new-case") {
            try {
                const created = await this.client!.createCase(value("case_id"), value("category"));
                window.location.hash = `#/cases/${created.case_id}`;
            } catch (error) {
                showFormError(form, renderNewCaseError(messageOf(error)));
            }
        } else if (form.id === "annotate") {
            await this.annotate(form, value("address"), value("role"));
        } else if (form.id === "lookup-request") {
            await this.lookupRequests(value("address"));
        } else if (form.id === "log-request") {
            const address = form.dataset.address ?? "";
            try {
                await this.client!.logRequest(address, value("exchange"));
                await this.lookupRequests(address);
            } catch (error) {
                showFormError(form, renderNewCaseError(messageOf(error)));
            }
        }
    }

    /** POST the annotation, showing the row optimistically and rolling it
     *  back if the server rejects it (duplicate pair, bad address). */
    private async annotate(form: HTMLFormElement, address: string, role: string): Promise<void> {
        const caseId = (this.root.querySelector(".case-detail") as HTMLElement).dataset.caseId!;
        const rows = this.root.querySelector("#annotation-rows") as HTMLElement;
        const errorSlot = this.root.querySelector("#annotate-error") as HTMLElement;
        errorSlot.innerHTML = "";

        const optimistic = renderAnnotationRow({
            case_id: caseId,
            address,
            role,
            author: "…",
            created_at: 0,
        });
        rows.insertAdjacentHTML("beforeend", optimistic);
        try {
            const saved = await this.client!.annotate(caseId, address, role);
            rows.lastElementChild?.remove();
            rows.insertAdjacentHTML("beforeend", renderAnnotationRow(saved));
            form.reset();
            this.markStale();
        } catch (error) {
            rows.lastElementChild?.remove();
            errorSlot.innerHTML = renderNewCaseError(messageOf(error));
        }
    }

    private async lookupRequests(address: string): Promise<void> {
        try {
            const result = await this.client!.requestsFor(address);
            this.view().innerHTML = renderRequestsPanel(result);
        } catch (error) {
            this.view().innerHTML = renderRequestsPanel(undefined, messageOf(error));
        }
    }

    private async onClick(event: Event): Promise<void> {
        const target = event.target as HTMLElement;
        const action = target.closest("[data-action]") as HTMLElement | null;
        if (action?.dataset.action === "relink") {
            this.clearStale();
            window.location.hash = "#/clusters";
            await this.route();
        } else if (action?.dataset.action === "signout") {
            clearSession();
            this.client = null;
            this.root.innerHTML = renderLogin();
        }
        const caseNode = target.closest("[data-case-node]") as HTMLElement | null;
        if (caseNode) {
            window.location.hash = `#/cases/${caseNode.dataset.caseNode}`;
        }
    }

    private async onChange(event: Event): Promise<void> {
        const select = event.target as HTMLSelectElement;
        if (select.matches('select[data-action="level"]')) {
            this.level = select.value;
            await this.route();
        }
    }

    // -- stale banner ---------------------------------------------------------

    markStale(): void {
        const banner = this.root.querySelector("#banner");
        if (banner) banner.innerHTML = renderStaleBanner();
    }

    private clearStale(): void {
        const banner = this.root.querySelector("#banner");
        if (banner) banner.innerHTML = "";
    }
}

function messageOf(error: unknown): string {
    if (error instanceof ApiError) return error.message;
    return error instanceof Error ? error.message : String(error);
}

function showFormError(form: HTMLFormElement, html: string): void {
    form.querySelector(".form-error")?.remove();
    const button = form.querySelector("button[type=submit]");
    button?.insertAdjacentHTML("beforebegin", html);
}
