// View rendering as pure HTML-string functions, which keeps them trivially
// snapshot-testable without a DOM.

import type {
  FaultTree,
  FaultTreeNode,
  FaultsResponse,
  SearchResponse,
} from "./api";

export function escapeHtml(text: string): string {
  return text
    .replace(/&/g, "&amp;")
    .replace(/</g, "&lt;")
    .replace(/>/g, "&gt;")
    .replace(/"/g, "&quot;");
}

function pct(x: number): string {
  return `${(100 * x).toFixed(0)}%`;
}

function renderTreeNode(node: FaultTreeNode): string {
  const label =
    `<span class="node-id">${escapeHtml(node.id)}</span> ` +
    `<span class="node-score">score ${node.score.toFixed(3)}</span> ` +
    `<span class="node-rate">fail ${pct(node.failure_rate)}</span>`;
  if (node.children.length === 0) {
    return `<li class="leaf">${label}</li>`;
  }
  const children = node.children.map(renderTreeNode).join("");
  // <details> gives collapse/expand for free, open at shallow depths
  const open = node.depth < 1 ? " open" : "";
  return `<li><details${open}><summary>${label}</summary><ul>${children}</ul></details></li>`;
}

export function renderFaultTree(tree: FaultTree): string {
  return `<ul class="fault-tree">${renderTreeNode(tree.root)}</ul>`;
}

export function renderFaults(faults: FaultsResponse): string {
  const parts: string[] = [`<section class="faults">`];
  parts.push(`<h2>Faults for ${escapeHtml(faults.student)}</h2>`);

  const points = Object.keys(faults.mastery).sort();
  if (points.length > 0) {
    const rows = points
      .map((p) => {
        const m = faults.mastery[p];
        return (
          `<tr class="status-${m.status}"><td>${escapeHtml(p)}</td>` +
          `<td>${m.correct}</td><td>${m.incorrect}</td><td>${m.status}</td></tr>`
        );
      })
      .join("");
    parts.push(
      `<table class="mastery"><thead><tr><th>knowledge point</th>` +
        `<th>correct</th><th>incorrect</th><th>status</th></tr></thead>` +
        `<tbody>${rows}</tbody></table>`,
    );
  }

  if (faults.message) {
    parts.push(`<p class="message">${escapeHtml(faults.message)}</p>`);
  }
  for (const tree of faults.trees) {
    parts.push(renderFaultTree(tree));
  }
  if (faults.ranking.length > 0) {
    const items = faults.ranking
      .map(
        (r) =>
          `<li>${escapeHtml(r.entity)} <span class="rank-score">${r.score.toFixed(3)}</span></li>`,
      )
      .join("");
    parts.push(`<ol class="ranking">${items}</ol>`);
  }
  parts.push(`</section>`);
  return parts.join("\n");
}

export function renderSearch(search: SearchResponse): string {
  const parts: string[] = [`<section class="search">`];
  parts.push(`<h2>Topic: ${escapeHtml(search.topic)}</h2>`);
  if (search.results.length === 0) {
    parts.push(`<p class="message">no results</p>`);
  } else {
    const rows = search.results
      .map((r) => {
        const path = [search.topic]
          .concat(r.path.map((s) => `${s.relation}${s.direction} ${s.entity}`))
          .map(escapeHtml)
          .join(" &rarr; ");
        return (
          `<tr><td>${escapeHtml(r.entity)}</td><td>${r.score.toFixed(3)}</td>` +
          `<td>${r.lexical_score.toFixed(3)}</td><td>${r.embedding_score.toFixed(3)}</td>` +
          `<td class="path">${path}</td></tr>`
        );
      })
      .join("");
    parts.push(
      `<table class="results"><thead><tr><th>entity</th><th>score</th>` +
        `<th>lexical</th><th>embedding</th><th>path</th></tr></thead>` +
        `<tbody>${rows}</tbody></table>`,
    );
  }
  parts.push(`</section>`);
  return parts.join("\n");
}

export function renderError(message: string): string {
  return `<section class="error"><p>${escapeHtml(message)}</p></section>`;
}
