/** Thin typed client for the tutoring service HTTP API.
 *
 * The client never derives scores, violations or levels; every number the
 * UI shows comes out of these responses untouched.
 */
import type {
  CohortReport,
  ExerciseView,
  KbReport,
  QuizResultView,
  QuizView,
  SolutionDoc,
  StudentModelView,
  SubmissionView,
} from "./types";

export class ApiRequestError extends Error {
  readonly status: number;
  readonly errorType: string;

  constructor(status: number, errorType: string, detail: string) {
    super(detail);
    this.status = status;
    this.errorType = errorType;
  }
}

export class ApiClient {
  constructor(
    private readonly baseUrl: string,
    private token: string,
    // Wrapped so the global fetch keeps its expected receiver in browsers.
    private readonly fetchFn: typeof fetch = (input, init) => fetch(input, init),
  ) {}

  setToken(token: string): void {
    this.token = token;
  }

  private async request<T>(method: string, path: string, body?: unknown): Promise<T> {
    const response = await this.fetchFn(`${this.baseUrl}${path}`, {
      method,
      headers: {
        Authorization: `Bearer ${this.token}`,
        ...(body === undefined ? {} : { "Content-Type": "application/json" }),
      },
      body: body === undefined ? undefined : JSON.stringify(body),
    });
    const text = await response.text();
    const payload = text ? JSON.parse(text) : {};
    if (!response.ok) {
      const error = payload?.error ?? {};
      throw new ApiRequestError(
        response.status,
        error.type ?? "Unknown",
        error.detail ?? `request failed with status ${response.status}`,
      );
    }
    return payload as T;
  }

  health(): Promise<{ status: string; rules: number; questions: number }> {
    return this.request("GET", "/api/health");
  }

  getExercise(id: string): Promise<ExerciseView> {
    return this.request("GET", `/api/exercises/${id}`);
  }

  listExercises(): Promise<{ exercises: { id: string; lesson_id: string; problem_text: string }[] }> {
    return this.request("GET", "/api/exercises");
  }

  submitSolution(exerciseId: string, solution: SolutionDoc, stdin?: string[]): Promise<SubmissionView> {
    return this.request("POST", `/api/exercises/${exerciseId}/submissions`, {
      solution,
      ...(stdin ? { stdin } : {}),
    });
  }

  recordPageView(lessonId: string): Promise<{ recorded: boolean }> {
    return this.request("POST", `/api/lessons/${lessonId}/views`);
  }

  startQuiz(lessonId: string): Promise<QuizView> {
    return this.request("POST", `/api/lessons/${lessonId}/quizzes`);
  }

  submitAnswers(quizId: string, answers: Record<string, number>): Promise<QuizResultView> {
    return this.request("POST", `/api/quizzes/${quizId}/answers`, { answers });
  }

  getStudentModel(studentId: string): Promise<StudentModelView> {
    return this.request("GET", `/api/students/${studentId}/model`);
  }

  createExercise(doc: unknown): Promise<{ id: string; created: boolean }> {
    return this.request("POST", "/api/admin/exercises", doc);
  }

  createQuestion(doc: unknown): Promise<{ id: string; created: boolean }> {
    return this.request("POST", "/api/admin/questions", doc);
  }

  createRules(doc: unknown): Promise<{ rules: number; created: boolean }> {
    return this.request("POST", "/api/admin/rules", doc);
  }

  kbReport(): Promise<KbReport> {
    return this.request("GET", "/api/admin/reports/kb");
  }

  averagesReport(): Promise<{ students: Record<string, unknown>[] }> {
    return this.request("GET", "/api/admin/reports/averages");
  }

  cohortReport(): Promise<CohortReport> {
    return this.request("GET", "/api/admin/reports/cohort");
  }

  storeGrades(records: unknown[]): Promise<{ records: unknown[] }> {
    return this.request("POST", "/api/admin/grades", { records });
  }

  assembleExam(termLessons: string[]): Promise<{ question_ids: string[] }> {
    return this.request("POST", "/api/exams", { term_lessons: termLessons });
  }
}
