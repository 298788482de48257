/** Pure projection of core state onto what the DOM shows.
 *
 * The view model is derived solely from the latest SessionState,
 * Detection, PrintabilityReport and fps estimate; it holds nothing of
 * its own, so rebuilding it from a fresh GET of the session reproduces
 * the identical screen.
 */

import type { DetectionDto, ReportDto, SessionStateDto } from "./types.js";

export type MarkerIndicator = "tracking" | "searching" | "off";

export interface ViewModel {
  screen: SessionStateDto["screen"];
  catalog: string[];
  selectedName: string | null;
  categoryFilter: string | null;
  note: string | null;
  zoomText: string;
  scaleModeText: string;
  canPose: boolean;
  watertightBadge: "watertight" | "not watertight" | null;
  reportLines: string[];
  markerIndicator: MarkerIndicator;
  confidenceText: string;
  fpsText: string;
}

function formatVolume(mm3: number): string {
  const cm3 = mm3 / 1000;
  return Math.abs(cm3) >= 0.1 ? `${cm3.toFixed(2)} cm³` : `${mm3.toFixed(1)} mm³`;
}

export function reportSummary(report: ReportDto): string[] {
  const lines = [
    `${report.component_count} component${report.component_count === 1 ? "" : "s"}`,
    `${report.boundary_loop_count} boundary loop${report.boundary_loop_count === 1 ? "" : "s"}`,
    `volume ${formatVolume(report.signed_volume_mm3)}`,
  ];
  if (report.component_separation_mm !== null) {
    lines.push(`shell gap ${report.component_separation_mm.toFixed(2)} mm`);
  }
  if (report.nonmanifold_edge_count > 0) {
    lines.push(`${report.nonmanifold_edge_count} non-manifold edges`);
  }
  if (report.degenerate_face_indices.length > 0) {
    lines.push(`${report.degenerate_face_indices.length} degenerate faces`);
  }
  if (report.orientation_inverted) {
    lines.push("orientation inverted (inside out)");
  }
  return lines;
}

export function buildViewModel(
  state: SessionStateDto,
  report: ReportDto | null,
  detection: DetectionDto | null,
  fps: number,
): ViewModel {
  const inAr = state.screen === "ar_view";
  return {
    screen: state.screen,
    catalog: state.catalog,
    selectedName: state.selected,
    categoryFilter: state.category_filter,
    note: state.note,
    zoomText: `${Math.round(state.zoom * 100)}%`,
    scaleModeText: state.scale_mode === "true_size" ? "true size" : "fit to target",
    canPose: state.selected !== null,
    watertightBadge:
      report === null ? null : report.watertight ? "watertight" : "not watertight",
    reportLines: report === null ? [] : reportSummary(report),
    markerIndicator: !inAr ? "off" : state.marker_visible ? "tracking" : "searching",
    confidenceText:
      inAr && state.marker_visible && detection !== null
        ? `${Math.round(detection.confidence * 100)}%`
        : "n/a",
    fpsText: fps > 0 ? `${fps.toFixed(1)} fps` : "n/a",
  };
}
