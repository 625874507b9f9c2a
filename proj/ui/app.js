"use strict";

const statusLine = document.getElementById("status");
const picker = document.getElementById("picker");
const worker = document.getElementById("worker");
const host = document.getElementById("questionnaire");
let jobId = null;

function el(tag, attrs = {}, ...children) {
  const node = document.createElement(tag);
  for (const [k, v] of Object.entries(attrs)) {
    if (k === "text") node.textContent = v;
    else node.setAttribute(k, v);
  }
  for (const c of children) node.append(c);
  return node;
}

async function getJson(url, options) {
  const res = await fetch(url, options);
  const body = await res.json();
  if (!res.ok) throw new Error(body.error || res.statusText);
  return body;
}

// Same rules the server applies; the server stays the authority.
function check(raw, constraint) {
  const text = raw.trim();
  if (constraint.kind === "numeric_range") {
    if (text === "" || !/^[+-]?(\d+\.?\d*|\.\d+)([eE][+-]?\d+)?$/.test(text)) return "not a number";
    const x = Number(text);
    if (x < constraint.lo || x > constraint.hi) return `out of range ${constraint.lo}–${constraint.hi}`;
    return null;
  }
  return constraint.choices.includes(text) ? null : `not one of ${constraint.choices.join(", ")}`;
}

function plotTable(plot) {
  const caption = el("p", { class: "hint", text: plot.caption });
  if (plot.kind === "box") {
    const head = el("tr", {}, ...["", "n", "min", "p25", "median", "p75", "max"].map((h) => el("th", { text: h })));
    const rows = plot.groups.map((g) =>
      el("tr", {}, ...[g.label, g.count, g.min, g.p25, g.median, g.p75, g.max].map((v) => el("td", { text: v }))));
    return el("div", {}, caption, el("table", { class: "plot" }, head, ...rows));
  }
  // Scatter plots are summarized by their point count; the caption carries the relation.
  return el("div", {}, caption, el("p", { class: "hint", text: `${plot.points.length} points of ${plot.y} against ${plot.x}` }));
}

function questionField(q) {
  const c = q.constraint;
  let input;
  if (c.kind === "categorical_choice") {
    input = el("select", { name: q.id }, el("option", { value: "", text: "choose…" }),
      ...c.choices.map((ch) => el("option", { value: ch, text: ch })));
  } else {
    input = el("input", { name: q.id, type: "text", inputmode: "decimal", placeholder: `${c.lo} to ${c.hi}` });
  }
  const message = el("span", { class: "error" });
  input.addEventListener("input", () => {
    message.textContent = "";
  });
  const box = el("fieldset", {}, el("legend", { text: q.id }), el("p", { text: q.prompt }), input, " ", message);
  if (c.hint) box.append(el("p", { class: "hint", text: c.hint }));
  return { id: q.id, constraint: c, input, message, box };
}

async function show(id) {
  host.replaceChildren();
  const qn = await getJson(`/api/questionnaires/${encodeURIComponent(id)}`);
  host.append(el("pre", { class: "intro", text: qn.intro }));
  if (qn.prior_blurb) host.append(el("p", { text: qn.prior_blurb }));
  for (const p of qn.plots) host.append(plotTable(p));

  const fields = qn.questions.map(questionField);
  const form = el("form", {}, ...fields.map((f) => f.box), el("button", { type: "submit", text: "Submit" }));
  const result = el("p");
  form.addEventListener("submit", async (ev) => {
    ev.preventDefault();
    result.textContent = "";
    if (!worker.value.trim()) {
      result.className = "error";
      result.textContent = "Enter a worker id first.";
      return;
    }
    const answers = {};
    let blocked = false;
    for (const f of fields) {
      if (f.input.value.trim() === "") continue;
      const problem = check(f.input.value, f.constraint);
      if (problem) {
        f.message.textContent = problem;
        blocked = true;
      } else {
        answers[f.id] = f.input.value.trim();
      }
    }
    if (blocked || Object.keys(answers).length === 0) return;
    try {
      const body = await getJson(`/api/questionnaires/${encodeURIComponent(id)}/submissions`, {
        method: "POST",
        headers: { "Content-Type": "application/json" },
        body: JSON.stringify({ worker_id: worker.value.trim(), answers }),
      });
      let accepted = 0;
      for (const o of body.outcomes) {
        const f = fields.find((x) => x.id === o.question_id);
        if (o.status === "accepted") {
          accepted += 1;
          if (f) f.message.textContent = "";
        } else if (f) {
          f.message.textContent = o.reason;
        }
      }
      result.className = "ok";
      result.textContent = `${accepted} of ${body.outcomes.length} answers accepted.`;
    } catch (err) {
      result.className = "error";
      result.textContent = err.message;
    }
    refreshStatus();
  });
  host.append(form, result);
}

async function refreshStatus() {
  if (!jobId) return;
  try {
    const s = await getJson(`/api/jobs/${encodeURIComponent(jobId)}`);
    statusLine.textContent = `Job ${s.job_id}: ${s.accepted_total} of ${s.required_total} judgments collected.`;
  } catch (err) {
    statusLine.textContent = err.message;
  }
}

async function start() {
  const list = await getJson("/api/questionnaires");
  jobId = list.job_id;
  picker.replaceChildren(...list.questionnaires.map((id) => el("option", { value: id, text: id })));
  picker.addEventListener("change", () => show(picker.value));
  if (list.questionnaires.length) await show(list.questionnaires[0]);
  await refreshStatus();
}

start().catch((err) => {
  statusLine.textContent = `Cannot reach the survey service: ${err.message}`;
});
