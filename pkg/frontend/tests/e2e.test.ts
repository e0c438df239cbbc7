/** End-to-end flows against a real running service instance.
 *
 * The suite spawns the Python service on a scratch data directory, then
 * drives the browser view models and DOM exactly as the app does: build
 * blocks, compile, read feedback, revise, take a quiz, inspect reports.
 */
import { spawn, type ChildProcess } from "node:child_process";
import { mkdtempSync, writeFileSync } from "node:fs";
import { tmpdir } from "node:os";
import { join } from "node:path";
import { afterAll, beforeAll, describe, expect, it, vi } from "vitest";

import { ApiClient, ApiRequestError } from "../src/api";
import { ExerciseSession, QuizSession, TeacherDashboard } from "../src/app";
import { QuizModel } from "../src/quiz";

const PORT = 8479;
const BASE = `http://127.0.0.1:${PORT}`;
const TEACHER = "e2e-teacher";
const STUDENT = "e2e-alice";

let server: ChildProcess;

async function waitForHealth(): Promise<void> {
  for (let attempt = 0; attempt < 120; attempt += 1) {
    try {
      const response = await fetch(`${BASE}/api/health`);
      if (response.ok) {
        return;
      }
    } catch {
      // not up yet
    }
    await new Promise((resolve) => setTimeout(resolve, 250));
  }
  throw new Error("service did not become healthy");
}

beforeAll(async () => {
  const dir = mkdtempSync(join(tmpdir(), "blocktutor-e2e-"));
  const configPath = join(dir, "config.json");
  writeFileSync(configPath, JSON.stringify({
    listen: `127.0.0.1:${PORT}`,
    data_dir: join(dir, "data"),
    tokens: { teacher: TEACHER, students: { [STUDENT]: "alice" } },
  }));
  server = spawn("blocktutor", ["serve", "--config", configPath],
    { stdio: "ignore" });
  await waitForHealth();
});

afterAll(() => {
  server?.kill();
});

function studentApi(): ApiClient {
  return new ApiClient(BASE, STUDENT);
}

function freshRoot(): HTMLElement {
  document.body.innerHTML = "<div id='root'></div>";
  return document.getElementById("root") as HTMLElement;
}

describe("exercise session flow", () => {
  it("submit -> grouped feedback -> revise -> clean compile auto-opens runtime", async () => {
    const root = freshRoot();
    const session = new ExerciseSession(studentApi(), root);
    await session.open("sum-range");
    const model = session.model!;

    // First attempt: an int variable assigned a float, no loop, no output.
    const main = model.addBlock("function_def");
    model.setAttr(main.id, "name", "main");
    model.setAttr(main.id, "return_type", "int");
    const decl = model.addBlock("declaration", main.id);
    model.setAttr(decl.id, "name", "x");
    model.setAttr(decl.id, "data_type", "int");
    const bad = model.addBlock("assignment", main.id);
    model.setAttr(bad.id, "target", "x");
    model.setAttr(bad.id, "value", "3.5");

    await session.compile();
    const submission = model.lastSubmission!;
    expect(submission.completed).toBe(false);
    const categories = submission.violations.map((violation) => violation.category);
    expect(categories).toContain("data_types");
    const group = root.querySelector(".feedback-group[data-category='data_types']");
    expect(group).not.toBeNull();
    const highlighted = root.querySelector(`[data-block-id='${bad.id}']`);
    expect(highlighted?.classList.contains("highlight")).toBe(true);
    expect(root.querySelector("[data-testid='runtime-screen']")).toBeNull();

    // Revise: replace the bad assignment with the summing loop.
    model.removeBlock(bad.id);
    model.setAttr(decl.id, "name", "i");
    const sum = model.addBlock("declaration", main.id);
    model.setAttr(sum.id, "name", "sum");
    model.setAttr(sum.id, "data_type", "int");
    model.setAttr(sum.id, "init", "0");
    const loop = model.addBlock("for_loop", main.id);
    model.setAttr(loop.id, "var", "i");
    model.setAttr(loop.id, "init", "1");
    model.setAttr(loop.id, "cond", "i <= 5");
    model.setAttr(loop.id, "step", "i + 1");
    const acc = model.addBlock("assignment", loop.id);
    model.setAttr(acc.id, "target", "sum");
    model.setAttr(acc.id, "value", "sum + i");
    const print = model.addBlock("printf_call", main.id);
    model.setAttr(print.id, "format", "%d");
    model.setAttr(print.id, "args", "sum");

    const sent = model.serialize();
    await session.compile();
    const clean = model.lastSubmission!;
    expect(clean.violations).toEqual([]);
    expect(clean.completed).toBe(true);
    expect(clean.learning_score).not.toBeNull();

    // The posted document round-trips through the service codec unchanged.
    expect(clean.solution).toEqual(sent);

    // Runtime screen auto-opened with the program output and score toast.
    const screen = root.querySelector("[data-testid='runtime-screen'] pre");
    expect(screen?.textContent).toBe("15");
    expect(root.querySelector("[data-testid='score-toast']")).not.toBeNull();
  });

  it("resubmitting a completed exercise surfaces the conflict inline", async () => {
    const root = freshRoot();
    const session = new ExerciseSession(studentApi(), root);
    await session.open("sum-range");
    const model = session.model!;
    const main = model.addBlock("function_def");
    model.setAttr(main.id, "name", "main");
    model.setAttr(main.id, "return_type", "int");
    await session.compile();
    expect(session.banner).toContain("SessionCompleted");
    expect(root.querySelector("[data-testid='error-banner']")).not.toBeNull();
  });
});

describe("quiz flow", () => {
  it("five choices per question; displayed score equals the server score", async () => {
    const root = freshRoot();
    const session = new QuizSession(studentApi(), root);
    const confirm = vi.fn(() => true);
    session.confirmUnanswered = confirm;
    await session.start("t1-10");
    const model = session.model!;
    expect(model.questionCount).toBe(10);
    for (const question of model.quiz.questions) {
      expect(question.choices.length).toBe(5);
    }
    expect(root.querySelectorAll("input[type='radio']").length).toBe(5);

    // Answer all but one, confirming the unanswered dialog.
    for (const question of model.quiz.questions.slice(1)) {
      model.choose(question.id, 1);
    }
    await session.submit();
    expect(confirm).toHaveBeenCalledWith(1);
    const result = model.result!;
    const scoreNode = root.querySelector("[data-testid='quiz-score']");
    expect(scoreNode?.getAttribute("data-score")).toBe(String(result.score));
    const rows = model.resultRows();
    expect(rows[0].chosen).toBeNull();
    expect(rows[0].correct).toBe(false);

    // A stale tab grading the same quiz again sees the conflict notice.
    const staleRoot = freshRoot();
    const stale = new QuizSession(studentApi(), staleRoot);
    stale.model = new QuizModel(
      { ...model.quiz, questions: [...model.quiz.questions] });
    await stale.submit();
    expect(stale.alreadyGraded).toBe(true);
    expect(staleRoot.querySelector("[data-testid='already-graded']")).not.toBeNull();
  });

  it("declining the unanswered confirm keeps the quiz open", async () => {
    const root = freshRoot();
    const session = new QuizSession(studentApi(), root);
    session.confirmUnanswered = () => false;
    await session.start("t1-03");
    await session.submit();
    expect(session.model?.submitted).toBe(false);
  });

  it("a lesson without questions shows the empty state", async () => {
    const root = freshRoot();
    const session = new QuizSession(studentApi(), root);
    await session.start("t2-14");
    expect(root.querySelector("[data-testid='quiz-empty']")).not.toBeNull();
  });
});

describe("teacher dashboard", () => {
  it("renders kb stats and the cohort comparison tables", async () => {
    const api = new ApiClient(BASE, TEACHER);
    const records = [] as unknown[];
    for (let index = 0; index < 8; index += 1) {
      records.push({ student_id: `c${index}`, group: "control",
                     midterm: 40 + index, final_exam: 52 + index });
      records.push({ student_id: `e${index}`, group: "experimental",
                     midterm: 62 + index, final_exam: 74 + index });
    }
    await api.storeGrades(records);

    const root = freshRoot();
    const dashboard = new TeacherDashboard(api, root);
    await dashboard.open();
    expect(root.querySelectorAll("[data-testid='kb-stats'] tr[data-category]")
      .length).toBe(8);
    const headers = [...root.querySelectorAll("[data-testid='cohort-tests'] th")]
      .map((node) => node.textContent);
    expect(headers).toContain("Sig. (2-tailed)");
    expect(headers).toContain("Mean Difference");
    expect(root.querySelectorAll(
      "[data-testid='cohort-tests'] tr[data-variant]").length).toBe(2);
  });

  it("server-side validation lands as a form error outcome", async () => {
    const api = new ApiClient(BASE, TEACHER);
    const root = freshRoot();
    const dashboard = new TeacherDashboard(api, root);
    const outcome = await dashboard.model.submitQuestion({
      id: "bad-question", lesson_id: "t1-10", stem: "?",
      choices: ["a", "b", "c", "d"], correct_index: 0,
      difficulty: 3, choice_priority: 50, answering_time_seconds: 30,
    });
    expect(outcome.ok).toBe(false);
    expect(outcome.errorType).toBe("InvalidQuestion");
    expect(outcome.error).toMatch(/5 choices/);
  });

  it("a wrong token produces the login prompt", async () => {
    const api = new ApiClient(BASE, "not-a-token");
    const root = freshRoot();
    const dashboard = new TeacherDashboard(api, root);
    await dashboard.open();
    expect(root.querySelector("[data-testid='login-prompt']")).not.toBeNull();
  });
});

describe("server as the single source of truth", () => {
  it("student model numbers come straight from the service", async () => {
    const api = studentApi();
    for (const lesson of ["t1-01", "t1-02", "t1-03", "t1-04", "t1-05", "t1-06",
                           "t1-07"]) {
      await api.recordPageView(lesson);
    }
    const model = await api.getStudentModel("alice");
    // 7 of 28 taxonomy lessons; the UI displays, never derives.
    expect(model.averages.page_view_score).toBe(25);
    expect(typeof model.learning_level).toBe("number");
  });

  it("typed errors carry the server's structure", async () => {
    const api = studentApi();
    try {
      await api.getExercise("missing-exercise");
      expect.unreachable();
    } catch (error) {
      expect(error).toBeInstanceOf(ApiRequestError);
      expect((error as ApiRequestError).status).toBe(404);
      expect((error as ApiRequestError).errorType).toBe("UnknownExercise");
    }
  });
});
