/** Debug recorder: a client-side mirror of every event this UI caused.
 *
 * The serialized log is the same JSON array the service's /script
 * endpoint returns, so either file can be handed to the offline replay
 * command and must land on the state the UI is showing. Keeping both
 * is deliberate: a mismatch between the two logs is itself a bug
 * signal.
 */

import type { EventDto } from "./types.js";

export class EventRecorder {
  private events: EventDto[] = [];

  record(event: EventDto): void {
    // Structured clone so later UI mutations cannot rewrite history.
    this.events.push(JSON.parse(JSON.stringify(event)) as EventDto);
  }

  get length(): number {
    return this.events.length;
  }

  clear(): void {
    this.events = [];
  }

  serialize(): string {
    return JSON.stringify(this.events, null, 1);
  }
}

export function downloadName(kind: "script" | "report", sessionId: string): string {
  return `meshlens-${kind}-${sessionId}.json`;
}

/** JSON payload -> object URL for an <a download> link. */
export function jsonObjectUrl(payload: string): string {
  return URL.createObjectURL(new Blob([payload], { type: "application/json" }));
}
