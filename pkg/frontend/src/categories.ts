// Client-side category selection rules: 1 to 3 distinct categories.
// The server re-validates on every save; this logic only drives the UI.

import { CATEGORIES, MAX_CATEGORIES, type Category } from './types.js';

export interface ToggleResult {
  selection: Category[];
  changed: boolean;
  blockedReason?: string;
}

export function isCategory(value: string): value is Category {
  return (CATEGORIES as readonly string[]).includes(value);
}

/** Toggle a category in/out of the selection, refusing a fourth pick. */
export function toggleCategory(selection: Category[], category: Category): ToggleResult {
  if (selection.includes(category)) {
    return {
      selection: selection.filter((c) => c !== category),
      changed: true,
    };
  }
  if (selection.length >= MAX_CATEGORIES) {
    return {
      selection,
      changed: false,
      blockedReason: `at most ${MAX_CATEGORIES} categories per family`,
    };
  }
  return { selection: [...selection, category], changed: true };
}

/** A selection is saveable when it has 1..3 distinct known categories. */
export function isSaveable(selection: string[]): boolean {
  if (selection.length < 1 || selection.length > MAX_CATEGORIES) {
    return false;
  }
  if (new Set(selection).size !== selection.length) {
    return false;
  }
  return selection.every(isCategory);
}
