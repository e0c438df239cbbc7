/** Wire types exchanged with the tutoring service. */

export interface BlockNode {
  id: string;
  kind: string;
  attrs: Record<string, unknown>;
  children: BlockNode[];
}

export interface SolutionDoc {
  blocks: BlockNode[];
}

export interface ExerciseView {
  id: string;
  lesson_id: string;
  problem_text: string;
  allowed_layers: string[];
  problem_tags: string[];
  scoring_limits: { time_limit_seconds: number; feedback_limit: number };
}

export interface ViolationView {
  constraint_id: string;
  category: string;
  bindings: Record<string, string>;
  explanation_data: Record<string, unknown>;
}

export interface FeedbackView {
  constraint_id: string | null;
  category: string | null;
  kind: string;
  text: string;
  target_block_ids: string[];
}

export interface RuntimeView {
  status: string;
  stdout: string;
  steps_used: number;
  virtual_files: Record<string, string>;
  error_message: string | null;
  error_block_id: string | null;
}

export interface SubmissionView {
  id: string;
  student_id: string;
  exercise_id: string;
  solution: SolutionDoc;
  violations: ViolationView[];
  violation_summary: Record<string, number>;
  feedback: FeedbackView[];
  runtime: RuntimeView | null;
  completed: boolean;
  learning_score: number | null;
}

export interface QuizQuestionView {
  id: string;
  stem: string;
  choices: string[];
  answering_time_seconds: number;
}

export interface QuizView {
  quiz_id: string;
  lesson_id: string;
  total_time_seconds: number;
  questions: QuizQuestionView[];
}

export interface QuizResultEntry {
  question_id: string;
  chosen: number | null;
  correct_index: number;
  correct: boolean;
}

export interface QuizResultView {
  quiz_id: string;
  score: number;
  correct_count: number;
  per_question: QuizResultEntry[];
}

export interface StudentModelView {
  student_id: string;
  averages: {
    page_view_score: number | null;
    avg_quiz_score: number | null;
    avg_exercise_score: number | null;
  };
  learning_level: number;
  completed_exercises: number;
  quiz_history: { quiz_id: string; score: number }[];
}

export interface KbReport {
  total: number;
  by_category: Record<string, number>;
}

export interface CohortTest {
  variant: string;
  t: number;
  df: number;
  p_two_tailed: number;
  mean_difference: number;
  std_error_difference: number;
  ci95_lower: number;
  ci95_upper: number;
}

export interface CohortGroup {
  name: string;
  n: number;
  passed_percent: number;
  mean: number;
  stdev: number;
  median: number;
}

export interface CohortReport {
  groups: CohortGroup[];
  tests: CohortTest[];
  histograms: Record<string, [string, number][]>;
}

export interface ApiError {
  status: number;
  type: string;
  detail: string;
}
