/** Client-side mirror of the condition grammar for the sub-query editor:
 * the operator menu only offers what the property's range kind supports.
 * The server remains authoritative and re-validates every edit. */

export type RangeKind = "numeric" | "text" | "date" | "boolean" | "iri";

export const ALL_OPERATORS = [
  "eq", "neq", "lt", "leq", "gt", "geq", "contains", "regex",
] as const;

export type Operator = (typeof ALL_OPERATORS)[number];

const ORDER_OPERATORS: Operator[] = ["lt", "leq", "gt", "geq"];
const TEXT_OPERATORS: Operator[] = ["contains", "regex"];

export function operatorsFor(kind: RangeKind): Operator[] {
  return ALL_OPERATORS.filter((op) => {
    if (ORDER_OPERATORS.includes(op)) return kind === "numeric" || kind === "date";
    if (TEXT_OPERATORS.includes(op)) return kind === "text";
    return true;
  });
}

export function operandInputType(kind: RangeKind): "number" | "text" | "date" | "checkbox" {
  switch (kind) {
    case "numeric":
      return "number";
    case "date":
      return "date";
    case "boolean":
      return "checkbox";
    default:
      return "text";
  }
}

/** Parse the editor's raw input into the operand the API expects. */
export function parseOperand(kind: RangeKind, raw: string | boolean): string | number | boolean {
  if (kind === "boolean") return typeof raw === "boolean" ? raw : raw === "true";
  if (kind === "numeric") {
    const parsed = Number(raw);
    if (Number.isNaN(parsed)) throw new Error(`not a number: ${raw}`);
    return parsed;
  }
  return String(raw);
}
