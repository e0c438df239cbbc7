/** Entry point: wires the API client and the three screens together.
 *
 * Student flow: pick an exercise, build blocks, Compile, read grouped
 * feedback, revise; a clean compile opens the Runtime Screen by itself.
 * The quiz flow and the teacher dashboard hang off the same client.
 */
import { ApiClient, ApiRequestError } from "./api";
import { DashboardModel } from "./dashboard";
import { QuizModel } from "./quiz";
import {
  renderCohortReport,
  renderKbStats,
  renderQuiz,
  renderWorkspace,
} from "./render";
import { WorkspaceModel } from "./workspace";

export class ExerciseSession {
  model: WorkspaceModel | null = null;
  banner: string | null = null;

  constructor(
    private readonly api: ApiClient,
    private readonly root: HTMLElement,
  ) {}

  async open(exerciseId: string): Promise<void> {
    const exercise = await this.api.getExercise(exerciseId);
    this.model = new WorkspaceModel(exercise);
    this.render();
  }

  render(): void {
    if (!this.model) {
      return;
    }
    renderWorkspace(this.root, this.model, {
      onAddBlock: (template, parentId) => {
        this.model?.addBlock(template, parentId);
        this.render();
      },
      onSelect: (blockId) => {
        this.model?.select(blockId);
        this.render();
      },
      onAttrChange: (blockId, attr, value) => {
        this.model?.setAttr(blockId, attr, value);
        this.render();
      },
      onRemove: (blockId) => {
        this.model?.removeBlock(blockId);
        this.render();
      },
      onCompile: () => {
        void this.compile();
      },
      onToggleRuntime: () => {
        if (this.model) {
          this.model.runtimeScreenOpen = !this.model.runtimeScreenOpen;
          this.render();
        }
      },
    });
    if (this.banner) {
      const node = document.createElement("div");
      node.className = "error-banner";
      node.setAttribute("data-testid", "error-banner");
      node.textContent = this.banner;
      const retry = document.createElement("button");
      retry.textContent = "retry";
      retry.addEventListener("click", () => void this.compile());
      node.append(retry);
      this.root.prepend(node);
    }
  }

  async compile(): Promise<void> {
    if (!this.model) {
      return;
    }
    try {
      const submission = await this.api.submitSolution(
        this.model.exercise.id, this.model.serialize());
      this.model.applySubmission(submission);
      this.banner = null;
    } catch (error) {
      if (error instanceof ApiRequestError) {
        this.banner = `${error.errorType}: ${error.message}`;
      } else {
        this.banner = "server unreachable; check the connection and retry";
      }
    }
    this.render();
  }
}

export class QuizSession {
  model: QuizModel | null = null;
  emptyState: string | null = null;
  alreadyGraded = false;
  confirmUnanswered: (count: number) => boolean = () => true;

  constructor(
    private readonly api: ApiClient,
    private readonly root: HTMLElement,
  ) {}

  async start(lessonId: string): Promise<void> {
    try {
      const quiz = await this.api.startQuiz(lessonId);
      this.model = new QuizModel(quiz);
      this.emptyState = null;
    } catch (error) {
      if (error instanceof ApiRequestError && error.status === 404) {
        this.emptyState = "No questions are available for this lesson yet.";
      } else {
        throw error;
      }
    }
    this.render();
  }

  render(): void {
    if (this.emptyState) {
      this.root.textContent = "";
      const empty = document.createElement("div");
      empty.className = "quiz-empty";
      empty.setAttribute("data-testid", "quiz-empty");
      empty.textContent = this.emptyState;
      this.root.append(empty);
      return;
    }
    if (!this.model) {
      return;
    }
    renderQuiz(this.root, this.model, {
      onChoose: (questionId, index) => {
        this.model?.choose(questionId, index);
        this.render();
      },
      onNavigate: (index) => {
        this.model?.goTo(index);
        this.render();
      },
      onSubmit: () => {
        void this.submit();
      },
    });
    if (this.alreadyGraded) {
      const note = document.createElement("div");
      note.className = "already-graded";
      note.setAttribute("data-testid", "already-graded");
      note.textContent = "This quiz was already graded.";
      this.root.prepend(note);
    }
  }

  async submit(): Promise<void> {
    if (!this.model || this.model.submitted) {
      return;
    }
    const unanswered = this.model.unansweredCount();
    if (unanswered > 0 && !this.confirmUnanswered(unanswered)) {
      return;
    }
    try {
      const result = await this.api.submitAnswers(
        this.model.quiz.quiz_id, this.model.answersPayload());
      this.model.applyResult(result);
    } catch (error) {
      if (error instanceof ApiRequestError && error.status === 409) {
        this.alreadyGraded = true;
      } else {
        throw error;
      }
    }
    this.render();
  }
}

export class TeacherDashboard {
  readonly model: DashboardModel;

  constructor(api: ApiClient, private readonly root: HTMLElement) {
    this.model = new DashboardModel(api);
  }

  async open(): Promise<void> {
    await this.model.loadReports();
    this.render();
  }

  render(): void {
    this.root.textContent = "";
    if (this.model.needsLogin) {
      const prompt = document.createElement("div");
      prompt.className = "login-prompt";
      prompt.setAttribute("data-testid", "login-prompt");
      prompt.textContent = "Teacher token required. Enter it to continue.";
      this.root.append(prompt);
      return;
    }
    const kbSection = document.createElement("section");
    kbSection.setAttribute("data-testid", "kb-section");
    if (this.model.kbReport) {
      renderKbStats(kbSection, this.model.kbReport);
    }
    this.root.append(kbSection);

    const cohortSection = document.createElement("section");
    cohortSection.setAttribute("data-testid", "cohort-section");
    if (this.model.cohortReport) {
      renderCohortReport(cohortSection, this.model.cohortReport);
    } else if (this.model.cohortError) {
      const note = document.createElement("div");
      note.className = "cohort-empty";
      note.textContent = this.model.cohortError;
      cohortSection.append(note);
    }
    this.root.append(cohortSection);
  }
}

export function createApp(baseUrl: string, token: string, root: HTMLElement) {
  const api = new ApiClient(baseUrl, token);
  return {
    api,
    exercise: new ExerciseSession(api, root),
    quiz: new QuizSession(api, root),
    dashboard: new TeacherDashboard(api, root),
  };
}

declare global {
  interface Window {
    blocktutor?: ReturnType<typeof createApp>;
  }
}

if (typeof document !== "undefined" && document.getElementById("blocktutor-root")) {
  const root = document.getElementById("blocktutor-root") as HTMLElement;
  const params = new URLSearchParams(window.location.search);
  const base = params.get("api") ?? "";
  const token = params.get("token") ?? "";
  window.blocktutor = createApp(base, token, root);
}
