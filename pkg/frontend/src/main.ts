/** Wiring: utterance picker, tuning sliders, export, error banner. */

import { annotate, audioUrl, fetchDefaults, fetchUtterance, fetchUtterances } from "./api.js";
import { badgeMismatches } from "./discretize.js";
import { drawScalogram, drawSignals, renderWordStrip } from "./render.js";
import { ConfigValidationError, UiState } from "./state.js";
import type { ConfigDelta } from "./state.js";
import { dumpConfig } from "./toml.js";
import type { UtterancePayload } from "./types.js";

function el<T extends HTMLElement>(id: string): T {
  const node = document.getElementById(id);
  if (!node) throw new Error(`missing #${id}`);
  return node as T;
}

function showBanner(message: string, retry: (() => void) | null): void {
  const banner = el<HTMLDivElement>("banner");
  banner.textContent = message;
  banner.classList.remove("hidden");
  if (retry) {
    const button = document.createElement("button");
    button.textContent = "retry";
    button.addEventListener("click", () => {
      banner.classList.add("hidden");
      retry();
    });
    banner.appendChild(button);
  }
}

function clearBanner(): void {
  el<HTMLDivElement>("banner").classList.add("hidden");
}

async function boot(): Promise<void> {
  const defaults = await fetchDefaults();
  const utterances = await fetchUtterances();
  const ui = new UiState(defaults.config);

  const picker = el<HTMLSelectElement>("utterance");
  for (const info of utterances) {
    const option = document.createElement("option");
    option.value = info.id;
    option.textContent =
      `${info.id} (${info.n_words} words, ${info.duration.toFixed(2)} s)`;
    picker.appendChild(option);
  }

  const render = (payload: UtterancePayload): void => {
    drawSignals(el<HTMLCanvasElement>("signals"), payload);
    drawScalogram(el<HTMLCanvasElement>("scalogram"), payload);
    renderWordStrip(el<HTMLDivElement>("words"), payload,
      ui.state.working.thresholds);
    el<HTMLSpanElement>("hash").textContent = payload.config_hash;
    const problems = badgeMismatches(payload.words,
      ui.state.working.thresholds);
    if (problems.length > 0) {
      showBanner(`badge check failed: ${problems[0]}`, null);
    }
  };

  const request = (work: () => Promise<UtterancePayload>,
    retry: () => void): void => {
    const seq = ui.sequencer.begin();
    work().then((payload) => {
      if (ui.accept(seq, payload)) {
        clearBanner();
        render(payload);
      }
    }).catch((err: unknown) => {
      if (!ui.sequencer.shouldRender(seq)) return;  // superseded anyway
      ui.fail(seq);                                 // keep the old view
      showBanner(err instanceof Error ? err.message : String(err), retry);
    });
  };

  const loadSelected = (): void => {
    const id = picker.value;
    if (!id) return;
    ui.select(id);
    el<HTMLAudioElement>("audio").src = audioUrl(id);
    if (ui.state.dirty) {
      request(() => annotate(id, ui.state.working), loadSelected);
    } else {
      request(() => fetchUtterance(id), loadSelected);
    }
  };

  const tune = (delta: ConfigDelta): void => {
    try {
      ui.tune(delta);
    } catch (err) {
      if (err instanceof ConfigValidationError) {
        showBanner(err.message, null);
        return;
      }
      throw err;
    }
    const id = ui.state.selectedId;
    if (id) request(() => annotate(id, ui.state.working), () => tune(delta));
  };

  const slider = (id: string, onValue: (v: number) => ConfigDelta): void => {
    const input = el<HTMLInputElement>(id);
    const label = el<HTMLSpanElement>(`${id}-value`);
    label.textContent = input.value;
    input.addEventListener("input", () => {
      label.textContent = input.value;
      tune(onValue(Number(input.value)));
    });
  };

  slider("w-f0", (v) => ({ weights: { f0: v } }));
  slider("w-energy", (v) => ({ weights: { energy: v } }));
  slider("w-duration", (v) => ({ weights: { duration: v } }));
  const pair = (lo: string, hi: string,
    key: "prominence_thresholds" | "boundary_thresholds") => {
    const read = (): [number, number] => [
      Number(el<HTMLInputElement>(lo).value),
      Number(el<HTMLInputElement>(hi).value),
    ];
    slider(lo, () => ({ [key]: read() }) as ConfigDelta);
    slider(hi, () => ({ [key]: read() }) as ConfigDelta);
  };
  pair("p-t1", "p-t2", "prominence_thresholds");
  pair("b-t1", "b-t2", "boundary_thresholds");

  el<HTMLButtonElement>("export").addEventListener("click", () => {
    const blob = new Blob([dumpConfig(ui.state.working)],
      { type: "application/toml" });
    const link = document.createElement("a");
    link.href = URL.createObjectURL(blob);
    link.download = "prosomark-config.toml";
    link.click();
    URL.revokeObjectURL(link.href);
  });

  picker.addEventListener("change", loadSelected);
  if (utterances.length > 0) {
    picker.value = (utterances[0] as { id: string }).id;
    loadSelected();
  }
}

boot().catch((err: unknown) => {
  showBanner(`startup failed: ${err instanceof Error ? err.message : err}`,
    () => window.location.reload());
});
