import { App } from "./app.js";

window.onload = () => {
    const container = document.querySelector("#app");
    if (container) {
        new App(container as HTMLElement).start();
    }
};
