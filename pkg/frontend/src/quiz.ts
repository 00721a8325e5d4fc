// Quiz controller: one session at a time, one item on screen, all
// state of record on the server. The client only remembers which
// session it is in (see storage.ts), so reloading the page resumes at
// the server's cursor and can never alter a score.

import type { Attempt, Progress, QuizItemView, Score } from "./api.js";
import { ApiError, QuizApi } from "./api.js";
import type { ActiveSession } from "./storage.js";
import { clearActive, loadActive, saveActive } from "./storage.js";
import { createMutedVideo, replay } from "./player.js";

const PROTOCOLS = ["WL", "SL", "MWIS"] as const;

function elt(tag: string, className?: string, text?: string): HTMLElement {
  const node = document.createElement(tag);
  if (className) {
    node.className = className;
  }
  if (text !== undefined) {
    node.textContent = text;
  }
  return node;
}

export class QuizApp {
  private root: HTMLElement;
  private api: QuizApi;
  private store: Storage;
  private active: ActiveSession | null = null;
  private lastAttempt: Attempt | null = null;
  // True while an answer POST is outstanding; submit() is a no-op
  // until the response lands, so there is never more than one
  // submission in flight.
  private inFlight = false;

  constructor(root: HTMLElement, api: QuizApi, store: Storage) {
    this.root = root;
    this.api = api;
    this.store = store;
  }

  async init(): Promise<void> {
    const active = loadActive(this.store);
    if (active) {
      try {
        await this.resume(active);
        return;
      } catch (err) {
        if (err instanceof ApiError && err.status === 404) {
          // Stale session id (server store was reset); start over.
          clearActive(this.store);
          this.active = null;
        } else {
          this.renderError(err);
          return;
        }
      }
    }
    this.renderSetup();
  }

  private async resume(active: ActiveSession): Promise<void> {
    this.active = active;
    // Validates the id before we trust it; 404 falls through to setup.
    await this.api.getSession(active.sessionId);
    await this.advance();
  }

  private async startSession(
    userId: string,
    protocol: string,
    datasetTag: string,
  ): Promise<void> {
    const created = await this.api.createSession({
      user_id: userId,
      protocol,
      dataset_tag: datasetTag,
    });
    this.active = {
      sessionId: created.session.session_id,
      userId,
      protocol,
    };
    saveActive(this.store, this.active);
    this.lastAttempt = null;
    await this.advance();
  }

  // Ask the server what comes next and render it: either the item at
  // the cursor or, once every item is answered, the final score.
  private async advance(): Promise<void> {
    if (!this.active) {
      this.renderSetup();
      return;
    }
    const next = await this.api.nextItem(this.active.sessionId);
    if (next.complete) {
      this.renderScore(next.score);
    } else {
      this.renderItem(next.item, next.progress);
    }
  }

  private async submit(item: QuizItemView, answer: string): Promise<void> {
    if (this.inFlight || !this.active) {
      return;
    }
    this.inFlight = true;
    try {
      const res = await this.api.submitAnswer(
        this.active.sessionId,
        item.item_id,
        answer,
      );
      this.lastAttempt = res.attempt;
      await this.advance();
    } catch (err) {
      if (
        err instanceof ApiError &&
        (err.code === "DuplicateSubmission" ||
          err.code === "OutOfOrderSubmission" ||
          err.code === "SessionComplete")
      ) {
        // The server is ahead of us (already has this answer, e.g.
        // from another tab). Its state wins; re-sync.
        await this.advance();
      } else {
        this.renderError(err);
      }
    } finally {
      this.inFlight = false;
    }
  }

  // --- views ---------------------------------------------------------

  private clear(): void {
    this.root.textContent = "";
  }

  private renderSetup(): void {
    this.clear();
    const panel = elt("div", "setup-panel");
    panel.appendChild(elt("h2", undefined, "Start a quiz"));

    const userInput = document.createElement("input");
    userInput.id = "user-input";
    userInput.placeholder = "your name";
    const userLabel = elt("label", undefined, "User ");
    userLabel.appendChild(userInput);
    panel.appendChild(userLabel);

    const protocolSelect = document.createElement("select");
    protocolSelect.id = "protocol-select";
    for (const p of PROTOCOLS) {
      const option = document.createElement("option");
      option.value = p;
      option.textContent = p;
      protocolSelect.appendChild(option);
    }
    const protocolLabel = elt("label", undefined, "Protocol ");
    protocolLabel.appendChild(protocolSelect);
    panel.appendChild(protocolLabel);

    const tagInput = document.createElement("input");
    tagInput.id = "tag-input";
    tagInput.value = "SynthAE";
    const tagLabel = elt("label", undefined, "Dataset ");
    tagLabel.appendChild(tagInput);
    panel.appendChild(tagLabel);

    const startButton = document.createElement("button");
    startButton.id = "start-button";
    startButton.textContent = "Start";
    startButton.addEventListener("click", () => {
      const userId = userInput.value.trim();
      const datasetTag = tagInput.value.trim();
      if (!userId || !datasetTag) {
        return;
      }
      startButton.disabled = true;
      this.startSession(userId, protocolSelect.value, datasetTag).catch(
        (err) => this.renderError(err),
      );
    });
    panel.appendChild(startButton);

    this.root.appendChild(panel);
  }

  private renderItem(item: QuizItemView, progress: Progress): void {
    this.clear();
    const panel = elt("div", "item-panel");

    const header = elt(
      "div",
      "item-progress",
      `Item ${progress.answered + 1} of ${progress.total}`,
    );
    header.id = "item-progress";
    panel.appendChild(header);

    if (this.lastAttempt) {
      const feedback = elt(
        "div",
        this.lastAttempt.correct ? "feedback correct" : "feedback incorrect",
        this.lastAttempt.correct ? "Previous answer: correct" : "Previous answer: incorrect",
      );
      feedback.id = "feedback";
      panel.appendChild(feedback);
    }

    const video = createMutedVideo(this.api.videoUrl(item));
    video.id = "clip";
    panel.appendChild(video);

    const replayButton = document.createElement("button");
    replayButton.id = "replay-button";
    replayButton.textContent = "Replay";
    replayButton.addEventListener("click", () => replay(video));
    panel.appendChild(replayButton);

    const submitButton = document.createElement("button");
    submitButton.id = "submit-button";
    submitButton.textContent = "Submit";
    submitButton.disabled = true;

    let getAnswer: () => string;
    if (item.protocol === "MWIS") {
      panel.appendChild(
        elt("p", "masked-text", item.masked_text ?? ""),
      );
      panel.appendChild(elt("p", "prompt", "Type the missing word:"));
      const answerInput = document.createElement("input");
      answerInput.id = "answer-input";
      answerInput.autocomplete = "off";
      answerInput.addEventListener("input", () => {
        submitButton.disabled = answerInput.value.trim() === "";
      });
      answerInput.addEventListener("keydown", (event) => {
        if (event.key === "Enter" && !submitButton.disabled) {
          void this.submit(item, answerInput.value.trim());
        }
      });
      panel.appendChild(answerInput);
      getAnswer = () => answerInput.value.trim();
    } else {
      if (item.protocol === "SL" && item.context_tag) {
        panel.appendChild(elt("p", "context-tag", `Context: ${item.context_tag}`));
      }
      panel.appendChild(
        elt(
          "p",
          "prompt",
          item.protocol === "SL"
            ? "Which sentence was spoken?"
            : "Which word was spoken?",
        ),
      );
      let selected = "";
      const optionList = elt("div", "options");
      for (const option of item.options ?? []) {
        const button = document.createElement("button");
        button.className = "option-button";
        button.textContent = option;
        button.addEventListener("click", () => {
          selected = option;
          for (const other of Array.from(
            optionList.querySelectorAll(".option-button"),
          )) {
            other.classList.toggle("selected", other === button);
          }
          submitButton.disabled = false;
        });
        optionList.appendChild(button);
      }
      panel.appendChild(optionList);
      getAnswer = () => selected;
    }

    submitButton.addEventListener("click", () => {
      const answer = getAnswer();
      if (answer === "") {
        return;
      }
      void this.submit(item, answer);
    });
    panel.appendChild(submitButton);

    this.root.appendChild(panel);
  }

  private renderScore(score: Score): void {
    this.clear();
    const panel = elt("div", "score-panel");
    panel.appendChild(elt("h2", undefined, "Session complete"));

    if (this.lastAttempt) {
      const feedback = elt(
        "div",
        this.lastAttempt.correct ? "feedback correct" : "feedback incorrect",
        this.lastAttempt.correct ? "Last answer: correct" : "Last answer: incorrect",
      );
      feedback.id = "feedback";
      panel.appendChild(feedback);
    }

    const line = elt("p", "score-line", `Score: ${score.score}/${score.total}`);
    line.id = "score-line";
    panel.appendChild(line);

    const newButton = document.createElement("button");
    newButton.id = "new-quiz-button";
    newButton.textContent = "Start a new quiz";
    newButton.addEventListener("click", () => {
      clearActive(this.store);
      this.active = null;
      this.lastAttempt = null;
      this.renderSetup();
    });
    panel.appendChild(newButton);

    this.root.appendChild(panel);
  }

  private renderError(err: unknown): void {
    this.clear();
    const panel = elt("div", "error-panel");
    const message =
      err instanceof ApiError
        ? `${err.code}: ${err.message}`
        : String(err);
    const text = elt("p", "error-message", message);
    text.id = "error-message";
    panel.appendChild(text);

    const backButton = document.createElement("button");
    backButton.id = "error-back-button";
    backButton.textContent = "Back";
    backButton.addEventListener("click", () => {
      void this.init();
    });
    panel.appendChild(backButton);

    this.root.appendChild(panel);
  }
}
