// Browser wiring: reads the page's form controls, drives a ScorePanel, and
// swaps the rendered state into #results after every action. Click handling
// is delegated so re-rendering never drops listeners.

import { ServiceClient } from "./api.js";
import { ScorePanel } from "./panel.js";
import { render } from "./render.js";

const URL_KEY = "retweetguard.serviceUrl";
const DEFAULT_URL = "http://127.0.0.1:8000";

function el<T extends HTMLElement>(id: string): T {
  const node = document.getElementById(id);
  if (node === null) throw new Error(`missing #${id}`);
  return node as T;
}

function start(): void {
  const urlInput = el<HTMLInputElement>("service-url");
  const queryInput = el<HTMLTextAreaElement>("query");
  const scoreButton = el<HTMLButtonElement>("score");
  const results = el<HTMLDivElement>("results");

  urlInput.value = localStorage.getItem(URL_KEY) ?? DEFAULT_URL;

  let panel = new ScorePanel(new ServiceClient(urlInput.value));
  const repaint = () => {
    results.innerHTML = render(panel.state);
  };

  urlInput.addEventListener("change", () => {
    localStorage.setItem(URL_KEY, urlInput.value);
    panel = new ScorePanel(new ServiceClient(urlInput.value));
    repaint();
  });

  scoreButton.addEventListener("click", async () => {
    const pending = panel.submitScore(queryInput.value);
    repaint(); // show the busy marker while the request runs
    await pending;
    repaint();
  });

  results.addEventListener("click", async (event) => {
    const target = event.target as HTMLElement;
    const button = target.closest<HTMLButtonElement>("button.flag");
    if (button === null) return;
    const userId = button.dataset.user;
    if (userId === undefined) return;
    const pending = panel.thumbsDown(userId);
    repaint();
    await pending;
    repaint();
  });

  repaint();
}

document.addEventListener("DOMContentLoaded", start);
