import { describe, expect, it } from "vitest";

import { EventRecorder, downloadName } from "../src/recorder.js";
import { markerUpdateEvent } from "../src/events.js";
import type { EventDto } from "../src/types.js";

describe("EventRecorder", () => {
  it("serializes to the same JSON array the service's script endpoint returns", () => {
    const rec = new EventRecorder();
    rec.record({ type: "grant_camera" });
    rec.record({ type: "select_category", name: "bar" });
    rec.record({ type: "rotate_x", sign: -1 });
    rec.record(markerUpdateEvent(0.5));
    rec.record(markerUpdateEvent(null));

    expect(rec.length).toBe(5);
    const parsed = JSON.parse(rec.serialize()) as EventDto[];
    expect(parsed).toEqual([
      { type: "grant_camera" },
      { type: "select_category", name: "bar" },
      { type: "rotate_x", sign: -1 },
      { type: "marker_update", detection: { yaw_rad: 0.5 } },
      { type: "marker_update", detection: null },
    ]);
  });

  it("deep-copies on record so later mutation cannot rewrite history", () => {
    const rec = new EventRecorder();
    const event: EventDto = { type: "select_category", name: "bar" };
    rec.record(event);
    event.name = "mesh";
    expect(JSON.parse(rec.serialize())).toEqual([
      { type: "select_category", name: "bar" },
    ]);
  });

  it("clears back to an empty array", () => {
    const rec = new EventRecorder();
    rec.record({ type: "zoom_in" });
    rec.clear();
    expect(rec.length).toBe(0);
    expect(rec.serialize()).toBe("[]");
  });

  it("keeps null detections explicit in the serialized form", () => {
    const rec = new EventRecorder();
    rec.record(markerUpdateEvent(null));
    expect(rec.serialize()).toContain('"detection": null');
  });
});

describe("downloadName", () => {
  it("names files after the artifact and session", () => {
    expect(downloadName("script", "ab12cd34ef56")).toBe(
      "meshlens-script-ab12cd34ef56.json",
    );
    expect(downloadName("report", "s1")).toBe("meshlens-report-s1.json");
  });
});
