// Browser bootstrap: binds the controller to the page via delegated events.
// The gateway serves the console at /console and the API at the site root.

import { GatewayClient } from "./api.js";
import { Console } from "./console.js";

const root = document.querySelector<HTMLElement>("#app");
if (!root) throw new Error("missing #app element");

const client = new GatewayClient("");
const ui = new Console(client, (html) => { root.innerHTML = html; },
  { pollIntervalMs: 2000 });

function formValues(form: HTMLFormElement): Record<string, string> {
  const data = new FormData(form);
  const values: Record<string, string> = {};
  data.forEach((value, key) => { values[key] = String(value); });
  return values;
}

root.addEventListener("submit", (event) => {
  const form = event.target as HTMLFormElement;
  const action = form.dataset.action;
  if (!action) return;
  event.preventDefault();
  const values = formValues(form);
  if (action === "login") {
    void ui.login(values.participantId, values.credentialId)
      .then(() => ui.startPolling());
  } else if (action === "request-by-id") {
    void ui.submitRequest(values.targetPatientId);
  } else if (action === "add-reading") {
    void ui.addReading(values.parameter, Number(values.value), values.unit);
  } else if (action === "finalize") {
    void ui.authorPolicy(values.policy ?? "");
  }
});

root.addEventListener("click", (event) => {
  const target = (event.target as HTMLElement).closest<HTMLElement>("[data-action]");
  if (!target || target.tagName === "FORM") return;
  const action = target.dataset.action;
  if (action === "request") {
    void ui.submitRequest(target.dataset.patientId ?? "");
  } else if (action === "open-url") {
    void ui.openUrl(target.dataset.url ?? "");
  } else if (action === "copy-url") {
    void navigator.clipboard.writeText(target.dataset.url ?? "");
  } else if (action === "close-fetch") {
    ui.closeFetch();
  } else if (action === "logout") {
    ui.logout();
  }
});

ui.render();
