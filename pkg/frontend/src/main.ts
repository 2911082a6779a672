/** App shell: three operator panels against one demo-stack origin.
 *
 * The origin defaults to the page's own (the demo app serves this UI's
 * static build next to its APIs) and can be overridden with ?api=URL for
 * a stack running elsewhere.
 */

import { getJson, serviceBases } from "./api";
import { mountProofRequestBuilder } from "./proofRequest";
import { mountVaccinationForm } from "./vaccination";
import { mountWalletPanel } from "./wallet";
import "./styles.css";

function apiOrigin(): string {
  const override = new URLSearchParams(window.location.search).get("api");
  return override ?? window.location.origin;
}

function boot(): void {
  const bases = serviceBases(apiOrigin());
  const health = document.querySelector("#health") as HTMLElement;
  getJson<{ status: string; ledger_height: number }>(`${apiOrigin()}/health`)
    .then((h) => {
      health.textContent = `stack ${h.status}, ledger height ${h.ledger_height}`;
    })
    .catch(() => {
      health.textContent = `cannot reach ${apiOrigin()}; is \`vaxpass demo serve\` running?`;
      health.classList.add("unhealthy");
    });

  mountVaccinationForm(document.querySelector("#vaccinator") as HTMLElement, {
    issuerBase: bases.issuer,
  });
  mountProofRequestBuilder(document.querySelector("#verifier") as HTMLElement, {
    verifierBase: bases.verifier,
  });
  mountWalletPanel(document.querySelector("#wallet") as HTMLElement, {
    walletBase: bases.wallet,
  });
}

document.addEventListener("DOMContentLoaded", boot);
