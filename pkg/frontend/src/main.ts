import { ApiClient } from "./api";
import { Console } from "./controller";

function el<T extends HTMLElement>(id: string): T {
  const node = document.getElementById(id);
  if (!node) throw new Error(`missing #${id}`);
  return node as T;
}

export function boot(): void {
  const api = new ApiClient("");
  const app = new Console(api, {
    setSearchHtml: (html) => {
      el("search-view").innerHTML = html;
    },
    setFaultsHtml: (html) => {
      el("faults-view").innerHTML = html;
    },
  });

  el<HTMLFormElement>("search-form").addEventListener("submit", (ev) => {
    ev.preventDefault();
    const q = el<HTMLInputElement>("search-query").value.trim();
    const lambda = parseFloat(el<HTMLInputElement>("search-lambda").value);
    if (q) void app.runSearch(q, Number.isNaN(lambda) ? undefined : lambda);
  });

  el<HTMLFormElement>("answer-form").addEventListener("submit", (ev) => {
    ev.preventDefault();
    const student = el<HTMLInputElement>("answer-student").value.trim();
    const question = el<HTMLInputElement>("answer-question").value.trim();
    const points = el<HTMLInputElement>("answer-points")
      .value.split(",")
      .map((p) => p.trim())
      .filter(Boolean);
    const correct = el<HTMLInputElement>("answer-correct").checked;
    if (student && question && points.length) {
      void app.submitAnswer({
        student_id: student,
        question_id: question,
        knowledge_points: points,
        correct,
      });
    }
  });

  el<HTMLFormElement>("faults-form").addEventListener("submit", (ev) => {
    ev.preventDefault();
    const student = el<HTMLInputElement>("faults-student").value.trim();
    if (student) void app.refreshFaults(student);
  });
}

if (typeof document !== "undefined" && document.getElementById("search-form")) {
  boot();
}
