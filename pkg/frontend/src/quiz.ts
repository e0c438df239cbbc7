/** Quiz view model: navigation, answer capture, server-graded results. */
import type { QuizResultView, QuizView } from "./types";

export class QuizModel {
  readonly quiz: QuizView;
  current = 0;
  answered = new Map<string, number>();
  submitted = false;
  result: QuizResultView | null = null;

  constructor(quiz: QuizView) {
    for (const question of quiz.questions) {
      if (question.choices.length !== 5) {
        throw new Error(`question ${question.id} must offer exactly five choices`);
      }
    }
    this.quiz = quiz;
  }

  get questionCount(): number {
    return this.quiz.questions.length;
  }

  currentQuestion() {
    return this.quiz.questions[this.current];
  }

  goTo(index: number): void {
    if (index < 0 || index >= this.questionCount) {
      throw new Error(`question index ${index} out of range`);
    }
    this.current = index;
  }

  next(): void {
    if (this.current < this.questionCount - 1) {
      this.current += 1;
    }
  }

  previous(): void {
    if (this.current > 0) {
      this.current -= 1;
    }
  }

  choose(questionId: string, choiceIndex: number): void {
    if (this.submitted) {
      throw new Error("quiz already submitted");
    }
    if (choiceIndex < 0 || choiceIndex > 4) {
      throw new Error("choice index must be 0..4");
    }
    // One selectable answer per question: later picks replace earlier ones.
    this.answered.set(questionId, choiceIndex);
  }

  unansweredCount(): number {
    return this.questionCount - this.answered.size;
  }

  /** Payload for the grading endpoint; unanswered questions stay absent. */
  answersPayload(): Record<string, number> {
    return Object.fromEntries(this.answered);
  }

  applyResult(result: QuizResultView): void {
    this.submitted = true;
    this.result = result;
  }

  /** Per-question correctness for the result view, straight off the server. */
  resultRows() {
    if (!this.result) {
      return [];
    }
    const byId = new Map(this.result.per_question.map((row) => [row.question_id, row]));
    return this.quiz.questions.map((question) => {
      const row = byId.get(question.id);
      return {
        question,
        chosen: row?.chosen ?? null,
        correctIndex: row?.correct_index ?? null,
        correct: row?.correct ?? false,
      };
    });
  }
}
