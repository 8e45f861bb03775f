// End-to-end against the real case service: a fixture server process,
// the real fetch, and the app driven through its own DOM events.

import { afterAll, beforeAll, describe, expect, it } from "vitest";

import { CaseServiceClient } from "../src/api.js";
import { App } from "../src/app.js";
import { NODE_FILLCOLORS } from "../src/network.js";
import { saveSession } from "../src/session.js";
import { startFixture, waitFor, type Fixture } from "./helpers.js";

const CASE_A = "BY9001-000010-22/1";
const CASE_B = "BY9002-000020-22/2";
const CASE_FOREIGN = "BY9003-000030-22/3";

let fixture: Fixture;
let app: App;

function el<T extends Element>(selector: string): T {
    const found = document.querySelector(selector);
    if (!found) throw new Error(`missing ${selector}`);
    return found as T;
}

function submit(form: HTMLFormElement): void {
    form.dispatchEvent(new window.Event("submit", { bubbles: true, cancelable: true }));
}

// Navigation goes through the hash like a browser would; jsdom fires the
// hashchange only when the value actually changes, so same-page calls
// route explicitly instead.
async function navigate(hash: string): Promise<void> {
    if (window.location.hash === hash) {
        await app.route();
    } else {
        window.location.hash = hash;
    }
}

async function openCase(caseId: string): Promise<void> {
    await navigate(`#/cases/${caseId}`);
    await waitFor(() => {
        const detail = el<HTMLElement>(".case-detail");
        expect(detail.dataset.caseId).toBe(caseId);
    });
}

async function annotatePerpetrator(caseId: string, address: string): Promise<void> {
    await openCase(caseId);
    el<HTMLInputElement>("#annotate input[name=address]").value = address;
    el<HTMLSelectElement>("#annotate select[name=role]").value = "perpetrator";
    submit(el<HTMLFormElement>("#annotate"));
    await waitFor(() => {
        const row = document.querySelector(`#annotation-rows tr[data-address="${address}"]`);
        expect(row).toBeTruthy();
        // the optimistic row carries a placeholder author; wait for the
        // server-confirmed one so the POST is done before moving on
        expect(row!.textContent).toContain("alice");
        expect(document.querySelector(".stale-banner")).toBeTruthy();
    });
}

beforeAll(async () => {
    fixture = await startFixture();
    const za = new CaseServiceClient(fixture.url, fixture.tokens.za);
    await za.createCase(CASE_A, "sextortion");
    await za.createCase(CASE_B, "sextortion");

    document.body.innerHTML = `<div id="app"></div>`;
    saveSession({ baseUrl: fixture.url, token: fixture.tokens.za });
    app = new App(el<HTMLElement>("#app"));
    app.start();
    await waitFor(() => expect(document.querySelector("#view")).toBeTruthy());
});

afterAll(() => fixture?.stop());

describe("annotate and relink", () => {
    it("renders two cases sharing a perpetrator address in one cluster card", async () => {
        await annotatePerpetrator(CASE_A, "P1");
        await annotatePerpetrator(CASE_B, "P1");

        el<HTMLButtonElement>("button[data-action=relink]").click();
        await waitFor(() => {
            const cards = [...document.querySelectorAll(".cluster-card")];
            const withA = cards.filter((card) => card.textContent!.includes(CASE_A));
            expect(withA).toHaveLength(1);
            expect(withA[0].textContent).toContain(CASE_B);
        });
        expect(document.querySelector(".stale-banner")).toBeNull();
    });

    it("exposes exactly two roles in the selector", async () => {
        await openCase(CASE_A);
        const options = [...el<HTMLSelectElement>("#annotate select[name=role]").options];
        expect(options.map((o) => o.value)).toEqual(["perpetrator", "victim"]);
    });

    it("shows a duplicate annotation inline without losing the page", async () => {
        await openCase(CASE_A);
        el<HTMLInputElement>("#annotate input[name=address]").value = "P1";
        submit(el<HTMLFormElement>("#annotate"));
        await waitFor(() => {
            expect(el<HTMLElement>("#annotate-error").textContent).toContain("already");
        });
        const rows = document.querySelectorAll('#annotation-rows tr[data-address="P1"]');
        expect(rows).toHaveLength(1);
    });
});

describe("network panel", () => {
    it("draws every payload node with legend colors", async () => {
        const payload = await new CaseServiceClient(fixture.url, fixture.tokens.za).network("address");
        window.location.hash = "#/network";
        await app.route();
        await waitFor(() => expect(document.querySelector("svg.network")).toBeTruthy());

        const circles = [...document.querySelectorAll("svg.network circle")];
        expect(circles).toHaveLength(payload.nodes.length);
        const legal = new Set(Object.values(NODE_FILLCOLORS));
        for (const circle of circles) {
            expect(legal.has(circle.getAttribute("fill")!)).toBe(true);
        }
        expect(document.querySelectorAll("svg.network [data-case-node]").length).toBeGreaterThanOrEqual(2);
    });

    it("navigates to the case when its node is clicked", async () => {
        window.location.hash = "#/network";
        await app.route();
        await waitFor(() => expect(document.querySelector("[data-case-node]")).toBeTruthy());
        const node = document.querySelector(`[data-case-node="${CASE_A}"]`) as HTMLElement;
        node.dispatchEvent(new window.MouseEvent("click", { bubbles: true }));
        await app.route();
        await waitFor(() => {
            expect(el<HTMLElement>(".case-detail").dataset.caseId).toBe(CASE_A);
        });
    });
});

describe("zone visibility", () => {
    it("shows a foreign linked case only as an anonymous stub", async () => {
        // ZB's case shares the perpetrator entity (P1b co-spends with P1 in
        // the corpus ledger) but ZA holds no grant, so entity-level linking
        // may count it and must not name it.
        const zb = new CaseServiceClient(fixture.url, fixture.tokens.zb);
        await zb.createCase(CASE_FOREIGN, "sextortion");
        await zb.annotate(CASE_FOREIGN, "P1b", "perpetrator");

        window.location.hash = "#/clusters";
        await app.route();
        await waitFor(() => expect(document.querySelector("select[data-action=level]")).toBeTruthy());
        const select = el<HTMLSelectElement>("select[data-action=level]");
        select.value = "entity";
        select.dispatchEvent(new window.Event("change", { bubbles: true }));

        await waitFor(() => {
            const cards = [...document.querySelectorAll(".cluster-card")];
            const joint = cards.filter((card) => card.textContent!.includes(CASE_A));
            expect(joint).toHaveLength(1);
            expect(joint[0].textContent).toContain(CASE_B);
            expect(joint[0].querySelector(".stub")!.textContent).toBe(
                "1 linked case not visible to your zone",
            );
            // entity P1 receives 250,000,000 sat across the corpus ledger
            expect(joint[0].textContent).toContain("2.5 BTC");
        });
        expect(document.body.innerHTML).not.toContain(CASE_FOREIGN);
    });
});
