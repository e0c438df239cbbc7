/** Workspace view model: the structured block editor behind the exercise screen.
 *
 * Students build a solution as a tree of typed blocks picked from a palette
 * that only offers the exercise's allowed layers; each block's details are
 * edited through a small attribute form.  Compiling serializes the tree into
 * the service's solution document format verbatim -- the model never grades
 * anything itself.
 */
import type {
  BlockNode,
  ExerciseView,
  FeedbackView,
  SolutionDoc,
  SubmissionView,
} from "./types";

export type FieldKind = "identifier" | "type" | "expression" | "text" | "expression-list";

export interface PaletteEntry {
  template: string;
  kind: string;
  label: string;
  layerClass: "basic" | "advanced";
  container: boolean;
  fields: { attr: string; label: string; field: FieldKind }[];
}

/** Mirrors the service's built-in template catalog. */
export const PALETTE: PaletteEntry[] = [
  { template: "declaration", kind: "declaration", label: "Declare variable",
    layerClass: "basic", container: false,
    fields: [
      { attr: "name", label: "Name", field: "identifier" },
      { attr: "data_type", label: "Type", field: "type" },
      { attr: "init", label: "Initial value", field: "expression" },
    ] },
  { template: "assignment", kind: "assignment", label: "Assign",
    layerClass: "basic", container: false,
    fields: [
      { attr: "target", label: "Target", field: "expression" },
      { attr: "value", label: "Value", field: "expression" },
    ] },
  { template: "printf_call", kind: "output", label: "Print",
    layerClass: "basic", container: false,
    fields: [
      { attr: "format", label: "Format", field: "text" },
      { attr: "args", label: "Arguments", field: "expression-list" },
    ] },
  { template: "scanf_call", kind: "input", label: "Read input",
    layerClass: "basic", container: false,
    fields: [{ attr: "target", label: "Into", field: "expression" }] },
  { template: "function_call", kind: "function_call", label: "Call function",
    layerClass: "basic", container: false,
    fields: [
      { attr: "callee", label: "Function", field: "identifier" },
      { attr: "args", label: "Arguments", field: "expression-list" },
    ] },
  { template: "return_statement", kind: "return", label: "Return",
    layerClass: "basic", container: false,
    fields: [{ attr: "value", label: "Value", field: "expression" }] },
  { template: "break_statement", kind: "break", label: "Break",
    layerClass: "basic", container: false, fields: [] },
  { template: "continue_statement", kind: "continue", label: "Continue",
    layerClass: "basic", container: false, fields: [] },
  { template: "preprocessor", kind: "preprocessor", label: "Preprocessor",
    layerClass: "basic", container: false,
    fields: [{ attr: "directive", label: "Directive", field: "text" }] },
  { template: "if_statement", kind: "if", label: "If",
    layerClass: "advanced", container: true,
    fields: [{ attr: "cond", label: "Condition", field: "expression" }] },
  { template: "for_loop", kind: "for_loop", label: "For loop",
    layerClass: "advanced", container: true,
    fields: [
      { attr: "var", label: "Variable", field: "identifier" },
      { attr: "init", label: "From", field: "expression" },
      { attr: "cond", label: "While", field: "expression" },
      { attr: "step", label: "Step", field: "expression" },
    ] },
  { template: "while_loop", kind: "while_loop", label: "While loop",
    layerClass: "advanced", container: true,
    fields: [{ attr: "cond", label: "Condition", field: "expression" }] },
  { template: "do_while_loop", kind: "do_while_loop", label: "Do-while loop",
    layerClass: "advanced", container: true,
    fields: [{ attr: "cond", label: "Condition", field: "expression" }] },
  { template: "function_def", kind: "function_def", label: "Define function",
    layerClass: "advanced", container: true,
    fields: [
      { attr: "name", label: "Name", field: "identifier" },
      { attr: "return_type", label: "Returns", field: "type" },
    ] },
  { template: "mem_alloc", kind: "mem_alloc", label: "Allocate memory",
    layerClass: "advanced", container: false,
    fields: [
      { attr: "target", label: "Pointer", field: "expression" },
      { attr: "count", label: "Elements", field: "expression" },
    ] },
  { template: "mem_free", kind: "mem_free", label: "Free memory",
    layerClass: "advanced", container: false,
    fields: [{ attr: "target", label: "Pointer", field: "expression" }] },
  { template: "file_op", kind: "file_op", label: "File operation",
    layerClass: "advanced", container: false,
    fields: [
      { attr: "op", label: "Operation", field: "text" },
      { attr: "handle", label: "Handle", field: "identifier" },
      { attr: "filename", label: "File name", field: "expression" },
      { attr: "mode", label: "Mode", field: "text" },
      { attr: "value", label: "Value", field: "expression" },
      { attr: "target", label: "Into", field: "expression" },
    ] },
];

export interface EditorBlock {
  id: string;
  template: string;
  kind: string;
  attrs: Record<string, unknown>;
  children: EditorBlock[];
}

export class WorkspaceModel {
  exercise: ExerciseView;
  blocks: EditorBlock[] = [];
  selectedId: string | null = null;
  lastSubmission: SubmissionView | null = null;
  runtimeScreenOpen = false;
  feedbackShown = 0;
  readonly startedAt: number;
  private counter = 0;

  constructor(exercise: ExerciseView, now: () => number = Date.now) {
    this.exercise = exercise;
    this.startedAt = now();
  }

  /** Palette restricted to the exercise's allowed layers. */
  palette(): PaletteEntry[] {
    const allowed = new Set(this.exercise.allowed_layers);
    return PALETTE.filter((entry) => allowed.has(entry.template));
  }

  paletteEntry(template: string): PaletteEntry {
    const entry = PALETTE.find((candidate) => candidate.template === template);
    if (!entry) {
      throw new Error(`unknown palette template ${template}`);
    }
    return entry;
  }

  addBlock(template: string, parentId: string | null = null): EditorBlock {
    const entry = this.paletteEntry(template);
    if (!new Set(this.exercise.allowed_layers).has(template)) {
      throw new Error(`layer ${template} is not allowed for this exercise`);
    }
    this.counter += 1;
    const blockId = `b${this.counter}`;
    const block: EditorBlock = {
      id: blockId, template, kind: entry.kind, attrs: {}, children: [],
    };
    if (entry.kind === "function_def") {
      block.attrs["params"] = [];
    }
    if (parentId === null) {
      this.blocks.push(block);
    } else {
      const parent = this.find(parentId);
      if (!parent) {
        throw new Error(`no block ${parentId}`);
      }
      if (!this.paletteEntry(parent.template).container) {
        throw new Error(`${parent.template} blocks cannot contain children`);
      }
      parent.children.push(block);
    }
    this.selectedId = blockId;
    return block;
  }

  find(blockId: string, within: EditorBlock[] = this.blocks): EditorBlock | null {
    for (const block of within) {
      if (block.id === blockId) {
        return block;
      }
      const inner = this.find(blockId, block.children);
      if (inner) {
        return inner;
      }
    }
    return null;
  }

  /** Activating a block pre-fills its attribute form (edit affordance). */
  select(blockId: string): EditorBlock {
    const block = this.find(blockId);
    if (!block) {
      throw new Error(`no block ${blockId}`);
    }
    this.selectedId = blockId;
    return block;
  }

  setAttr(blockId: string, attr: string, value: unknown): void {
    const block = this.find(blockId);
    if (!block) {
      throw new Error(`no block ${blockId}`);
    }
    if (value === "" || value === undefined || value === null) {
      delete block.attrs[attr];
      return;
    }
    const field = this.paletteEntry(block.template)
      .fields.find((candidate) => candidate.attr === attr);
    if (field?.field === "expression-list" && typeof value === "string") {
      // The form edits expression lists as one comma-separated line.
      const items = value.split(",").map((item) => item.trim()).filter(Boolean);
      if (items.length === 0) {
        delete block.attrs[attr];
      } else {
        block.attrs[attr] = items;
      }
      return;
    }
    block.attrs[attr] = value;
  }

  removeBlock(blockId: string, within: EditorBlock[] = this.blocks): boolean {
    const index = within.findIndex((block) => block.id === blockId);
    if (index >= 0) {
      within.splice(index, 1);
      if (this.selectedId === blockId) {
        this.selectedId = null;
      }
      return true;
    }
    return within.some((block) => this.removeBlock(blockId, block.children));
  }

  /** Exactly the document format the service's codec accepts. */
  serialize(): SolutionDoc {
    const toNode = (block: EditorBlock): BlockNode => ({
      id: block.id,
      kind: block.kind,
      attrs: { ...block.attrs },
      children: block.children.map(toNode),
    });
    return { blocks: this.blocks.map(toNode) };
  }

  /** Record a compile response; auto-opens the runtime screen when clean. */
  applySubmission(submission: SubmissionView): void {
    this.lastSubmission = submission;
    const clean = submission.violations.length === 0 && submission.runtime !== null;
    this.runtimeScreenOpen = clean;
    if (submission.violations.length > 0) {
      this.feedbackShown += submission.feedback.length;
    }
  }

  /** Feedback grouped by rule category for the side panel. */
  groupedFeedback(): Map<string, FeedbackView[]> {
    const groups = new Map<string, FeedbackView[]>();
    if (!this.lastSubmission) {
      return groups;
    }
    for (const message of this.lastSubmission.feedback) {
      const key = message.category ?? "general";
      const bucket = groups.get(key) ?? [];
      bucket.push(message);
      groups.set(key, bucket);
    }
    return groups;
  }

  /** Block ids the feedback panel should highlight; all must exist. */
  highlightedBlockIds(): Set<string> {
    const ids = new Set<string>();
    if (!this.lastSubmission) {
      return ids;
    }
    for (const message of this.lastSubmission.feedback) {
      for (const blockId of message.target_block_ids) {
        if (this.find(blockId)) {
          ids.add(blockId);
        }
      }
    }
    return ids;
  }

  elapsedSeconds(now: () => number = Date.now): number {
    return Math.floor((now() - this.startedAt) / 1000);
  }
}
