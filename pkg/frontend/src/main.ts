// Browser entry point. The API origin defaults to the page origin so
// the bundle can be served by any static file server next to the API;
// set data-api-base on the root element to point elsewhere.

import { QuizApi } from "./api.js";
import { QuizApp } from "./quiz.js";

const root = document.getElementById("quiz-root");
if (root) {
  const base = root.dataset.apiBase ?? "";
  const app = new QuizApp(root, new QuizApi(base), window.localStorage);
  void app.init();
}
