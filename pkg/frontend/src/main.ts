import { fetchTransport } from './api.js';
import { QuerySession } from './session.js';
import { createApp } from './view.js';

document.addEventListener('DOMContentLoaded', () => {
  const root = document.getElementById('app');
  if (!root) {
    throw new Error('missing #app mount point');
  }
  createApp(root, new QuerySession(fetchTransport), fetchTransport);
});
