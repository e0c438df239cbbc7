/** Teacher dashboard controller: authoring forms plus report loading.
 * Server-side validation errors surface per form; reports render verbatim.
 */
import { ApiClient, ApiRequestError } from "./api";
import type { CohortReport, KbReport } from "./types";

export interface FormOutcome {
  ok: boolean;
  error?: string;
  errorType?: string;
}

export class DashboardModel {
  kbReport: KbReport | null = null;
  cohortReport: CohortReport | null = null;
  cohortError: string | null = null;
  needsLogin = false;

  constructor(private readonly api: ApiClient) {}

  private async guard<T>(action: () => Promise<T>): Promise<T | null> {
    try {
      const result = await action();
      this.needsLogin = false;
      return result;
    } catch (error) {
      if (error instanceof ApiRequestError && error.status === 401) {
        this.needsLogin = true;
        return null;
      }
      throw error;
    }
  }

  async loadReports(): Promise<void> {
    const kb = await this.guard(() => this.api.kbReport());
    if (kb) {
      this.kbReport = kb;
    }
    try {
      const cohort = await this.guard(() => this.api.cohortReport());
      if (cohort) {
        this.cohortReport = cohort;
        this.cohortError = null;
      }
    } catch (error) {
      // Fewer than two grade groups stored yet: show the reason, keep going.
      if (error instanceof ApiRequestError && error.status === 422) {
        this.cohortError = error.message;
      } else {
        throw error;
      }
    }
  }

  async submitQuestion(doc: unknown): Promise<FormOutcome> {
    return this.submitForm(() => this.api.createQuestion(doc));
  }

  async submitExercise(doc: unknown): Promise<FormOutcome> {
    return this.submitForm(() => this.api.createExercise(doc));
  }

  async submitRules(doc: unknown): Promise<FormOutcome> {
    return this.submitForm(() => this.api.createRules(doc));
  }

  private async submitForm(action: () => Promise<unknown>): Promise<FormOutcome> {
    try {
      await action();
      return { ok: true };
    } catch (error) {
      if (error instanceof ApiRequestError) {
        if (error.status === 401) {
          this.needsLogin = true;
        }
        return { ok: false, error: error.message, errorType: error.errorType };
      }
      throw error;
    }
  }
}
