// DOM layer: renders session state and wires user input back into the
// session. Rendering is a pure projection of SessionState; the list
// order on screen is exactly the order the server returned.

import { healthApi, Transport } from './api.js';
import { QuerySession, SessionState } from './session.js';

const K_CHOICES = [5, 10, 25];
const DEFAULT_K = 10;

function el<K extends keyof HTMLElementTagNameMap>(
  tag: K,
  className?: string,
  text?: string,
): HTMLElementTagNameMap[K] {
  const node = document.createElement(tag);
  if (className) node.className = className;
  if (text !== undefined) node.textContent = text;
  return node;
}

export function createApp(
  root: HTMLElement,
  session: QuerySession,
  transport: Transport,
): void {
  const header = el('header');
  const title = el('h1', undefined, 'Function Assistant');
  const projectInfo = el('span', 'project-info');
  header.append(title, projectInfo);

  const form = el('form');
  form.id = 'query-form';
  const input = el('input');
  input.id = 'query-input';
  input.type = 'text';
  input.placeholder = 'Describe the function you are looking for';
  input.setAttribute('aria-label', 'query');
  const kSelect = el('select');
  kSelect.id = 'k-select';
  kSelect.setAttribute('aria-label', 'results to show');
  for (const k of K_CHOICES) {
    const option = el('option', undefined, String(k));
    option.value = String(k);
    if (k === DEFAULT_K) option.selected = true;
    kSelect.append(option);
  }
  const button = el('button', undefined, 'Search');
  button.type = 'submit';
  form.append(input, kSelect, button);

  const banner = el('div', 'error-banner');
  banner.id = 'error-banner';
  banner.setAttribute('role', 'alert');
  banner.hidden = true;

  const status = el('p', 'status');
  status.id = 'status';
  status.hidden = true;

  const results = el('ol');
  results.id = 'results';

  const historySection = el('section', 'history');
  historySection.id = 'history';
  historySection.hidden = true;
  const historyTitle = el('h2', undefined, 'Earlier queries');
  const historyList = el('ul');
  historyList.id = 'history-list';
  historySection.append(historyTitle, historyList);

  root.append(header, form, banner, status, results, historySection);

  input.addEventListener('input', () => session.setQuery(input.value));
  form.addEventListener('submit', (event) => {
    event.preventDefault();
    void session.submit(input.value, Number(kSelect.value));
  });

  session.subscribe((state) => render(state));

  // fill the header from /api/health; stay quiet if the service is down
  healthApi(transport)
    .then((info) => {
      projectInfo.textContent = `${info.project} · ${info.pairs} pairs`;
    })
    .catch(() => {
      projectInfo.textContent = '';
    });

  function render(state: SessionState): void {
    if (input.value !== state.query) {
      input.value = state.query;
    }
    status.hidden = !state.loading;
    status.textContent = state.loading ? 'Searching…' : '';

    banner.hidden = state.error === null;
    banner.textContent = state.error ?? '';

    results.replaceChildren();
    if (state.results !== null && state.error === null) {
      for (const result of state.results) {
        const row = el('li', 'result');
        const rank = el('span', 'rank', `${result.rank}.`);
        const signature = el('code', 'signature', result.signature);
        row.append(rank, signature);
        if (result.description) {
          row.append(el('p', 'description', result.description));
        }
        if (result.source_url) {
          const link = el('a', 'source-link', 'source');
          link.setAttribute('href', result.source_url);
          link.target = '_blank';
          link.rel = 'noopener';
          row.append(link);
        }
        results.append(row);
      }
    }

    historySection.hidden = state.history.length === 0;
    historyList.replaceChildren();
    for (const entry of state.history) {
      const item = el('li');
      const pick = el('button', 'history-entry', entry);
      pick.type = 'button';
      pick.addEventListener('click', () => session.selectHistory(entry));
      item.append(pick);
      historyList.append(item);
    }
  }
}
