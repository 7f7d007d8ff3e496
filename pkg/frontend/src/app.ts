// DOM wiring: connects the composer state machine to the page and the
// session service WebSocket.

import { parseServerMessage, type SessionStartMsg } from "./protocol.js";
import { FeedbackComposer } from "./session.js";
import { barWidths, PM_LABELS, type PmView } from "./pmstrip.js";

const transcriptEl = document.getElementById("transcript") as HTMLUListElement;
const statusEl = document.getElementById("status") as HTMLDivElement;
const pmStripEl = document.getElementById("pm-strip") as HTMLDivElement;
const composerEl = document.getElementById("composer") as HTMLTextAreaElement;
const targetEl = document.getElementById("target") as HTMLSelectElement;
const qTypeEl = document.getElementById("question-type") as HTMLSelectElement;
const qPolarityEl = document.getElementById("question-polarity") as HTMLSelectElement;
const submitEl = document.getElementById("submit") as HTMLButtonElement;
const posBtn = document.getElementById("smiley-positive") as HTMLButtonElement;
const negBtn = document.getElementById("smiley-negative") as HTMLButtonElement;

const labels = new Map<string, string>();

const proto = location.protocol === "https:" ? "wss" : "ws";
const ws = new WebSocket(`${proto}://${location.host}/ws`);
const composer = new FeedbackComposer({
  send: (msg) => ws.send(JSON.stringify(msg)),
});

function addLine(kind: string, text: string): void {
  const li = document.createElement("li");
  li.className = kind;
  li.textContent = text;
  transcriptEl.appendChild(li);
  li.scrollIntoView({ block: "end" });
}

function renderPm(pm: PmView): void {
  const widths = barWidths(pm);
  pmStripEl.innerHTML = "";
  (Object.keys(PM_LABELS) as (keyof PmView)[]).forEach((key) => {
    const row = document.createElement("div");
    row.className = "pm-row";
    const label = document.createElement("span");
    label.textContent = `${PM_LABELS[key]} ${(pm[key] ?? 0).toFixed(2)}`;
    const bar = document.createElement("div");
    bar.className = "pm-bar";
    const fill = document.createElement("div");
    fill.className = `pm-fill pm-${key}`;
    fill.style.width = widths[key];
    bar.appendChild(fill);
    row.append(label, bar);
    pmStripEl.appendChild(row);
  });
}

function refreshPicker(targets: string[]): void {
  targetEl.innerHTML = "";
  targets.forEach((id) => {
    const option = document.createElement("option");
    option.value = id;
    option.textContent = labels.get(id) ?? id;
    targetEl.appendChild(option);
  });
}

function setButtonsEnabled(enabled: boolean): void {
  posBtn.disabled = !enabled;
  negBtn.disabled = !enabled;
  submitEl.disabled = !enabled;
  composerEl.disabled = !enabled;
}

async function loadLabels(graphId: string): Promise<void> {
  const resp = await fetch(`/graphs/${graphId}/triples`);
  if (!resp.ok) return;
  for (const t of await resp.json()) labels.set(t.id, t.label);
}

ws.onopen = () => {
  const start: SessionStartMsg = { type: "session_start", graph_id: "quarto" };
  ws.send(JSON.stringify(start));
  statusEl.textContent = "session running";
  void loadLabels("quarto");
};

ws.onmessage = (event) => {
  const msg = parseServerMessage(String(event.data));
  if (msg === null) return;
  composer.onServerMessage(msg);
  if (msg.type === "agent_turn") {
    msg.payload.texts.forEach((text) => addLine("agent", text));
    refreshPicker(composer.discussionTargets);
    setButtonsEnabled(true);
  } else if (msg.type === "pm_snapshot") {
    renderPm(msg.payload);
  } else if (msg.type === "session_end") {
    addLine("meta", `explanation finished after ${msg.payload.length} turns`);
    statusEl.textContent = "session finished";
    setButtonsEnabled(false);
  } else if (msg.type === "error") {
    addLine("meta", `error: ${msg.payload.message}`);
  }
};

ws.onclose = () => {
  statusEl.textContent = "disconnected";
  setButtonsEnabled(false);
};

posBtn.onclick = () => {
  if (composer.sendBackchannel("positive")) addLine("you", "🙂");
};
negBtn.onclick = () => {
  if (composer.sendBackchannel("negative")) addLine("you", "🙁");
};

composerEl.onfocus = () => composer.focusComposer();
composerEl.onkeydown = (event) => composer.keystroke(event.key, performance.now());
composerEl.onblur = (event) => {
  // blur caused by pressing submit must not cancel the composition
  if ((event as FocusEvent).relatedTarget === submitEl) return;
  composer.cancel();
};

submitEl.onclick = () => {
  const ok = composer.submit(
    composerEl.value,
    qTypeEl.value as "polar" | "open",
    targetEl.value,
    qPolarityEl.value as "positive" | "negative",
  );
  if (ok) {
    addLine("you", composerEl.value);
    composerEl.value = "";
  }
};
