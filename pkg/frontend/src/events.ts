/** The 1:1 mapping from visible controls to session events.
 *
 * Every control produces exactly one event and nothing else; category
 * selection is the only parameterized control. Keeping this a literal
 * table lets the tests assert the mapping is total and injective.
 */

import type { EventDto } from "./types.js";

export const CONTROL_EVENTS = {
  "grant-camera": { type: "grant_camera" },
  "rotate-x-plus": { type: "rotate_x", sign: 1 },
  "rotate-x-minus": { type: "rotate_x", sign: -1 },
  "rotate-z-plus": { type: "rotate_z", sign: 1 },
  "rotate-z-minus": { type: "rotate_z", sign: -1 },
  "zoom-in": { type: "zoom_in" },
  "zoom-out": { type: "zoom_out" },
  "next-model": { type: "next_model" },
  "prev-model": { type: "prev_model" },
  "open-folder": { type: "open_folder" },
  "enter-ar": { type: "enter_ar" },
  "enter-edit": { type: "enter_edit" },
} as const satisfies Record<string, EventDto>;

export type ControlId = keyof typeof CONTROL_EVENTS;

export function eventForControl(control: ControlId): EventDto {
  // Copy so callers can never mutate the table through the result.
  return { ...CONTROL_EVENTS[control] };
}

export function selectCategoryEvent(name: string): EventDto {
  return { type: "select_category", name };
}

export function markerUpdateEvent(yawRad: number | null): EventDto {
  return {
    type: "marker_update",
    detection: yawRad === null ? null : { yaw_rad: yawRad },
  };
}

export function uploadModelEvent(name: string, category?: string): EventDto {
  return category === undefined
    ? { type: "upload_model", name }
    : { type: "upload_model", name, category };
}
