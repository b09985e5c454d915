/** Presentation geometry for field grids.
 *
 * Turns backend samples into unit-sphere positions and tangent arrow
 * directions.  This is display math only: the numbers a user reads (angle
 * rates, constraint values, energies) always come verbatim from the backend
 * response.  Non-finite samples are rejected here so nothing NaN reaches
 * the renderer.
 */

import { FieldGrid, FieldSample } from "./types.js";

export interface Glyph {
  position: [number, number, number];
  direction: [number, number, number];
  magnitude: number;
  sample: FieldSample;
}

export interface GlyphSet {
  glyphs: Glyph[];
  maskedPositions: [number, number, number][];
  maxMagnitude: number;
}

function spherePoint(theta: number, phi: number): [number, number, number] {
  return [
    Math.sin(theta) * Math.cos(phi),
    Math.sin(theta) * Math.sin(phi),
    Math.cos(theta),
  ];
}

function tangentArrow(sample: FieldSample): [number, number, number] {
  // unit tangent frame on the sphere: e_theta and e_phi at the node
  const { theta, phi, theta_dot, phi_dot } = sample;
  const eTheta = [
    Math.cos(theta) * Math.cos(phi),
    Math.cos(theta) * Math.sin(phi),
    -Math.sin(theta),
  ];
  const ePhi = [-Math.sin(phi), Math.cos(phi), 0];
  // physical components: (theta_dot, sin(theta) * phi_dot)
  const vPhi = Math.sin(theta) * phi_dot;
  return [
    theta_dot * eTheta[0] + vPhi * ePhi[0],
    theta_dot * eTheta[1] + vPhi * ePhi[1],
    theta_dot * eTheta[2] + vPhi * ePhi[2],
  ];
}

export function buildGlyphs(grid: FieldGrid): GlyphSet {
  const glyphs: Glyph[] = [];
  let maxMagnitude = 0;
  for (const sample of grid.samples) {
    const values = [sample.theta, sample.phi, sample.theta_dot, sample.phi_dot];
    if (!values.every(Number.isFinite)) {
      throw new Error(`non-finite sample in grid for ${grid.model}`);
    }
    const direction = tangentArrow(sample);
    const magnitude = Math.hypot(...direction);
    maxMagnitude = Math.max(maxMagnitude, magnitude);
    glyphs.push({
      position: spherePoint(sample.theta, sample.phi),
      direction,
      magnitude,
      sample,
    });
  }
  const { theta_min, theta_max, theta_count, phi_count } = gridAxes(grid);
  const maskedPositions = grid.singular_mask.map(([i, j]) => {
    const theta = theta_count > 1
      ? theta_min + (i * (theta_max - theta_min)) / (theta_count - 1)
      : theta_min;
    const phi = (j * 2 * Math.PI) / phi_count;
    return spherePoint(theta, phi);
  });
  return { glyphs, maskedPositions, maxMagnitude };
}

function gridAxes(grid: FieldGrid) {
  return {
    theta_min: grid.grid.theta_min,
    theta_max: grid.grid.theta_max,
    theta_count: grid.grid.theta_count,
    phi_count: grid.grid.phi_count,
  };
}
