/**
 * Survey quiz view: one image at a time, a forced real/fake choice, no going
 * back, then a score screen once the backend confirms all answers are in.
 *
 * State rules:
 * - exactly one image is visible at a time; progression is forward-only
 * - the progress counter mirrors the backend's accepted-answer count, never
 *   a locally incremented guess
 * - one request in flight at a time; the buttons are disabled while waiting
 * - a 409 means this tab is out of sync with the session; the only offered
 *   recovery is a refresh
 */

import { ApiError, Choice, QuizItemRef, SessionResult, SurveyClient } from "./api.js";

export type ViewState =
  | { kind: "loading" }
  | { kind: "error"; message: string }
  | { kind: "quiz"; index: number; answered: number }
  | { kind: "desync"; message: string }
  | { kind: "result"; result: SessionResult };

export class QuizApp {
  private state: ViewState = { kind: "loading" };
  private sessionId = "";
  private items: QuizItemRef[] = [];
  private busy = false;
  private pending: Promise<void> = Promise.resolve();

  constructor(
    private readonly root: HTMLElement,
    private readonly api: SurveyClient,
  ) {}

  /** The currently shown view, for tests and debugging. */
  get view(): ViewState {
    return this.state;
  }

  get session(): string {
    return this.sessionId;
  }

  /** Resolves when the current in-flight request (if any) has settled. */
  settle(): Promise<void> {
    return this.pending;
  }

  async start(): Promise<void> {
    this.setState({ kind: "loading" });
    try {
      const session = await this.api.startSession();
      this.sessionId = session.session_id;
      this.items = session.items;
      this.setState({ kind: "quiz", index: 0, answered: 0 });
    } catch (err) {
      this.setState({ kind: "error", message: describe(err) });
    }
  }

  /** Submit a verdict for the image on screen and advance. */
  answerCurrent(choice: Choice): Promise<void> {
    if (this.busy || this.state.kind !== "quiz") {
      return this.pending;
    }
    const { index, answered } = this.state;
    const item = this.items[index];
    if (!item) {
      return this.pending;
    }
    this.busy = true;
    this.render(); // repaint with disabled buttons
    this.pending = (async () => {
      try {
        const ack = await this.api.submitAnswer(this.sessionId, item.item_id, choice);
        if (ack.remaining === 0) {
          const result = await this.api.fetchResult(this.sessionId);
          this.setState({ kind: "result", result });
        } else {
          this.setState({ kind: "quiz", index: index + 1, answered: ack.answered });
        }
      } catch (err) {
        if (err instanceof ApiError && err.status === 409) {
          this.setState({
            kind: "desync",
            message: "This session is out of sync with the server - refresh the page to continue.",
          });
        } else {
          this.setState({ kind: "error", message: describe(err) });
        }
      } finally {
        this.busy = false;
        if (this.state.kind === "quiz") {
          this.render();
        }
      }
    })();
    return this.pending;
  }

  private setState(state: ViewState): void {
    this.state = state;
    this.render();
  }

  private render(): void {
    const root = this.root;
    root.textContent = "";
    switch (this.state.kind) {
      case "loading":
        root.append(el("p", { "data-testid": "loading" }, "Loading quiz..."));
        break;
      case "error":
        root.append(
          el("div", { class: "banner error", "data-testid": "error-banner" }, this.state.message),
          button("Retry", "retry", () => void this.start()),
        );
        break;
      case "desync":
        root.append(
          el("div", { class: "banner error", "data-testid": "desync-banner" }, this.state.message),
        );
        break;
      case "quiz": {
        const { index, answered } = this.state;
        const item = this.items[index];
        if (!item) return;
        root.append(
          el(
            "p",
            { class: "progress", "data-testid": "progress" },
            `Image ${index + 1} of ${this.items.length} - ${answered} answered`,
          ),
          el("img", {
            class: "stimulus",
            "data-testid": "stimulus",
            src: this.api.resolve(item.image_url),
            alt: "street scene - decide whether the rain is real or fake",
          }),
          el("p", {}, "Is the rain in this image real or fake?"),
          el(
            "div",
            { class: "choices" },
            button("Real", "choose-real", () => void this.answerCurrent("real"), this.busy),
            button("Fake", "choose-fake", () => void this.answerCurrent("fake"), this.busy),
          ),
        );
        break;
      }
      case "result": {
        const { result } = this.state;
        const pct = (result.accuracy * 100).toFixed(1);
        const list = el("ul", { class: "result-list" });
        for (const item of result.items) {
          list.append(
            el(
              "li",
              { "data-testid": "result-item", "data-correct": String(item.correct) },
              el("img", { class: "thumb", src: this.api.resolve(item.image_url), alt: "" }),
              el(
                "span",
                {},
                `you said ${item.chosen}, it was ${item.truth} - ${item.correct ? "correct" : "wrong"}`,
              ),
            ),
          );
        }
        root.append(
          el("h2", {}, "Your score"),
          el("p", { "data-testid": "accuracy" }, `${pct}%`),
          list,
        );
        break;
      }
    }
  }
}

function describe(err: unknown): string {
  if (err instanceof ApiError && err.status === 0) {
    return "Cannot reach the survey backend. Check your connection and retry.";
  }
  return err instanceof Error ? err.message : String(err);
}

function el(
  tag: string,
  attrs: Record<string, string> = {},
  ...children: (Node | string)[]
): HTMLElement {
  const node = document.createElement(tag);
  for (const [key, value] of Object.entries(attrs)) {
    node.setAttribute(key, value);
  }
  node.append(...children);
  return node;
}

function button(
  label: string,
  testId: string,
  onClick: () => void,
  disabled = false,
): HTMLButtonElement {
  const node = el("button", { "data-testid": testId }, label) as HTMLButtonElement;
  node.disabled = disabled;
  node.addEventListener("click", onClick);
  return node;
}
