/** DOM rendering for the three screens.  Plain elements, no framework:
 * every state change re-renders from the view models, and every number on
 * screen is a server response field.
 */
import { QuizModel } from "./quiz";
import type { CohortReport, KbReport } from "./types";
import { WorkspaceModel } from "./workspace";

function el<K extends keyof HTMLElementTagNameMap>(
  tag: K,
  className?: string,
  text?: string,
): HTMLElementTagNameMap[K] {
  const node = document.createElement(tag);
  if (className) {
    node.className = className;
  }
  if (text !== undefined) {
    node.textContent = text;
  }
  return node;
}

export interface WorkspaceHandlers {
  onAddBlock(template: string, parentId: string | null): void;
  onSelect(blockId: string): void;
  onAttrChange(blockId: string, attr: string, value: string): void;
  onRemove(blockId: string): void;
  onCompile(): void;
  onToggleRuntime(): void;
}

export function renderWorkspace(
  root: HTMLElement,
  model: WorkspaceModel,
  handlers: WorkspaceHandlers,
): void {
  root.textContent = "";
  const highlighted = model.highlightedBlockIds();

  const problem = el("section", "problem-panel");
  problem.append(el("h2", undefined, "Problem"));
  problem.append(el("p", "problem-text", model.exercise.problem_text));
  root.append(problem);

  const workspace = el("section", "workspace-panel");
  workspace.append(el("h2", undefined, "Workspace"));

  const tree = el("div", "block-tree");
  tree.setAttribute("data-testid", "block-tree");
  const renderBlock = (blockId: string): HTMLElement | null => {
    const block = model.find(blockId);
    if (!block) {
      return null;
    }
    const entry = model.paletteEntry(block.template);
    const node = el("div", "block");
    node.setAttribute("data-block-id", block.id);
    if (highlighted.has(block.id)) {
      node.classList.add("highlight");
    }
    if (model.selectedId === block.id) {
      node.classList.add("selected");
    }
    const head = el("div", "block-head", entry.label);
    head.addEventListener("click", () => handlers.onSelect(block.id));
    node.append(head);
    const summary = Object.entries(block.attrs)
      .filter(([, value]) => typeof value === "string")
      .map(([attr, value]) => `${attr}=${String(value)}`)
      .join(" ");
    if (summary) {
      node.append(el("div", "block-summary", summary));
    }
    if (entry.container) {
      const children = el("div", "block-children");
      for (const child of block.children) {
        const childNode = renderBlock(child.id);
        if (childNode) {
          children.append(childNode);
        }
      }
      const adder = el("div", "block-adder");
      for (const paletteEntry of model.palette()) {
        const button = el("button", "add-child", `+ ${paletteEntry.label}`);
        button.setAttribute("data-template", paletteEntry.template);
        button.addEventListener("click", () =>
          handlers.onAddBlock(paletteEntry.template, block.id));
        adder.append(button);
      }
      children.append(adder);
      node.append(children);
    }
    const remove = el("button", "remove-block", "remove");
    remove.addEventListener("click", () => handlers.onRemove(block.id));
    node.append(remove);
    return node;
  };
  for (const block of model.blocks) {
    const node = renderBlock(block.id);
    if (node) {
      tree.append(node);
    }
  }
  workspace.append(tree);

  const compile = el("button", "compile-button", "Compile");
  compile.setAttribute("data-testid", "compile");
  compile.addEventListener("click", handlers.onCompile);
  workspace.append(compile);

  const runtimeToggle = el("button", "runtime-button", "Runtime Screen");
  runtimeToggle.setAttribute("data-testid", "runtime-toggle");
  runtimeToggle.addEventListener("click", handlers.onToggleRuntime);
  workspace.append(runtimeToggle);

  const status = el("div", "session-status");
  status.setAttribute("data-testid", "session-status");
  status.textContent =
    `elapsed ${model.elapsedSeconds()}s, feedback shown ${model.feedbackShown}`;
  workspace.append(status);
  root.append(workspace);

  if (model.selectedId) {
    const block = model.find(model.selectedId);
    if (block) {
      const entry = model.paletteEntry(block.template);
      const form = el("form", "attribute-form");
      form.setAttribute("data-testid", "attribute-form");
      form.append(el("h3", undefined, `${entry.label} (${block.id})`));
      for (const field of entry.fields) {
        const label = el("label", undefined, field.label);
        const input = el("input");
        input.name = field.attr;
        input.value = typeof block.attrs[field.attr] === "string"
          ? String(block.attrs[field.attr])
          : "";
        input.addEventListener("change", () =>
          handlers.onAttrChange(block.id, field.attr, input.value));
        label.append(input);
        form.append(label);
      }
      workspace.append(form);
    }
  }

  const toolbar = el("section", "tool-bar");
  toolbar.append(el("h2", undefined, "Tool Bar"));
  toolbar.setAttribute("data-testid", "palette");
  for (const entry of model.palette()) {
    const button = el("button", `palette-item ${entry.layerClass}`, entry.label);
    button.setAttribute("data-template", entry.template);
    button.addEventListener("click", () => handlers.onAddBlock(entry.template, null));
    toolbar.append(button);
  }
  root.append(toolbar);

  const feedback = el("section", "feedback-panel");
  feedback.setAttribute("data-testid", "feedback-panel");
  feedback.append(el("h2", undefined, "Feedback"));
  for (const [category, messages] of model.groupedFeedback()) {
    const group = el("div", "feedback-group");
    group.setAttribute("data-category", category);
    group.append(el("h3", undefined, category));
    for (const message of messages) {
      const item = el("div", "feedback-message", message.text);
      if (message.target_block_ids.length) {
        item.setAttribute("data-targets", message.target_block_ids.join(","));
      }
      group.append(item);
    }
    feedback.append(group);
  }
  const submission = model.lastSubmission;
  if (submission?.completed && submission.learning_score !== null) {
    const toast = el("div", "score-toast",
      `Completed! Learning score ${submission.learning_score}`);
    toast.setAttribute("data-testid", "score-toast");
    feedback.append(toast);
  }
  root.append(feedback);

  if (model.runtimeScreenOpen && submission?.runtime) {
    const runtime = el("section", "runtime-screen");
    runtime.setAttribute("data-testid", "runtime-screen");
    runtime.append(el("h2", undefined, "Runtime Screen"));
    const stdout = el("pre", "stdout", submission.runtime.stdout);
    runtime.append(stdout);
    if (submission.runtime.error_message) {
      runtime.append(el("div", "runtime-error", submission.runtime.error_message));
    }
    root.append(runtime);
  }
}

// ---------------------------------------------------------------------------
// Quiz screen
// ---------------------------------------------------------------------------

export interface QuizHandlers {
  onChoose(questionId: string, choiceIndex: number): void;
  onNavigate(index: number): void;
  onSubmit(): void;
}

export function renderQuiz(root: HTMLElement, model: QuizModel, handlers: QuizHandlers): void {
  root.textContent = "";

  if (model.submitted && model.result) {
    const results = el("section", "quiz-results");
    results.setAttribute("data-testid", "quiz-results");
    const score = el("div", "quiz-score", `Score: ${model.result.score.toFixed(2)}`);
    score.setAttribute("data-testid", "quiz-score");
    score.setAttribute("data-score", String(model.result.score));
    results.append(score);
    for (const row of model.resultRows()) {
      const item = el("div", `result-row ${row.correct ? "correct" : "incorrect"}`);
      item.setAttribute("data-question", row.question.id);
      item.append(el("div", "stem", row.question.stem));
      item.append(el("div", "verdict",
        row.correct
          ? "correct"
          : `incorrect (answer: ${row.question.choices[row.correctIndex ?? 0]})`));
      results.append(item);
    }
    root.append(results);
    return;
  }

  const navigation = el("nav", "quiz-nav");
  navigation.setAttribute("data-testid", "quiz-nav");
  model.quiz.questions.forEach((question, index) => {
    const button = el("button",
      `nav-item${model.answered.has(question.id) ? " answered" : ""}` +
      `${index === model.current ? " current" : ""}`,
      String(index + 1));
    button.addEventListener("click", () => handlers.onNavigate(index));
    navigation.append(button);
  });
  root.append(navigation);

  const question = model.currentQuestion();
  const panel = el("section", "question-panel");
  panel.setAttribute("data-testid", "question-panel");
  panel.append(el("h2", undefined, `Question ${model.current + 1} of ${model.questionCount}`));
  panel.append(el("p", "stem", question.stem));
  const choices = el("div", "choices");
  question.choices.forEach((choice, index) => {
    const label = el("label", "choice");
    const radio = el("input");
    radio.type = "radio";
    radio.name = question.id;
    radio.value = String(index);
    radio.checked = model.answered.get(question.id) === index;
    radio.addEventListener("change", () => handlers.onChoose(question.id, index));
    label.append(radio, el("span", undefined, choice));
    choices.append(label);
  });
  panel.append(choices);
  root.append(panel);

  const submit = el("button", "submit-quiz", "Submit answers");
  submit.setAttribute("data-testid", "submit-quiz");
  submit.addEventListener("click", handlers.onSubmit);
  root.append(submit);
}

// ---------------------------------------------------------------------------
// Teacher dashboard
// ---------------------------------------------------------------------------

export function renderKbStats(root: HTMLElement, report: KbReport): void {
  root.textContent = "";
  const table = el("table", "kb-stats");
  table.setAttribute("data-testid", "kb-stats");
  const head = el("tr");
  head.append(el("th", undefined, "Category"), el("th", undefined, "Rules"));
  table.append(head);
  for (const [category, count] of Object.entries(report.by_category)) {
    const row = el("tr");
    row.setAttribute("data-category", category);
    row.append(el("td", undefined, category), el("td", undefined, String(count)));
    table.append(row);
  }
  const total = el("tr", "total-row");
  total.append(el("td", undefined, "total"), el("td", undefined, String(report.total)));
  table.append(total);
  root.append(table);
}

const COHORT_COLUMNS = [
  "Variant", "t", "df", "Sig. (2-tailed)", "Mean Difference",
  "Std. Error Difference", "95% CI Lower", "95% CI Upper",
];

export function renderCohortReport(root: HTMLElement, report: CohortReport): void {
  root.textContent = "";

  const summary = el("table", "cohort-summary");
  summary.setAttribute("data-testid", "cohort-summary");
  const summaryHead = el("tr");
  for (const column of ["Group", "N", "Passed %", "Mean", "Stdev", "Median"]) {
    summaryHead.append(el("th", undefined, column));
  }
  summary.append(summaryHead);
  for (const group of report.groups) {
    const row = el("tr");
    row.setAttribute("data-group", group.name);
    row.append(
      el("td", undefined, group.name),
      el("td", undefined, String(group.n)),
      el("td", undefined, group.passed_percent.toFixed(1)),
      el("td", undefined, group.mean.toFixed(2)),
      el("td", undefined, group.stdev.toFixed(2)),
      el("td", undefined, group.median.toFixed(2)),
    );
    summary.append(row);
  }
  root.append(summary);

  const tests = el("table", "cohort-tests");
  tests.setAttribute("data-testid", "cohort-tests");
  const testsHead = el("tr");
  for (const column of COHORT_COLUMNS) {
    testsHead.append(el("th", undefined, column));
  }
  tests.append(testsHead);
  for (const test of report.tests) {
    const row = el("tr");
    row.setAttribute("data-variant", test.variant);
    const sig = test.p_two_tailed >= 0.0005 ? test.p_two_tailed.toFixed(3) : "<.001";
    row.append(
      el("td", undefined, test.variant),
      el("td", undefined, test.t.toFixed(3)),
      el("td", undefined, test.df.toFixed(3)),
      el("td", undefined, sig),
      el("td", undefined, test.mean_difference.toFixed(5)),
      el("td", undefined, test.std_error_difference.toFixed(5)),
      el("td", undefined, test.ci95_lower.toFixed(5)),
      el("td", undefined, test.ci95_upper.toFixed(5)),
    );
    tests.append(row);
  }
  root.append(tests);
}

export function renderFieldErrors(form: HTMLFormElement, message: string): void {
  let banner = form.querySelector<HTMLElement>(".field-error");
  if (!banner) {
    banner = el("div", "field-error");
    form.prepend(banner);
  }
  banner.textContent = message;
}
