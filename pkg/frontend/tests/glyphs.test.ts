import { readFileSync } from "node:fs";
import { join } from "node:path";

import { describe, expect, it } from "vitest";

import { buildGlyphs } from "../src/glyphs.js";
import { FieldGrid } from "../src/types.js";

const grid: FieldGrid = JSON.parse(readFileSync(
  join(__dirname, "fixtures", "coupled_pair_grid24_partner_eq_090.json"),
  "utf-8",
));

describe("glyph construction", () => {
  it("produces one finite glyph per unmasked node", () => {
    const set = buildGlyphs(grid);
    expect(set.glyphs.length).toBe(grid.samples.length);
    for (const glyph of set.glyphs) {
      expect(glyph.position.every(Number.isFinite)).toBe(true);
      expect(glyph.direction.every(Number.isFinite)).toBe(true);
      expect(Number.isFinite(glyph.magnitude)).toBe(true);
      // positions live on the unit sphere
      const r = Math.hypot(...glyph.position);
      expect(r).toBeCloseTo(1.0, 12);
      // arrows are tangent: orthogonal to the radial direction
      const dot = glyph.position[0] * glyph.direction[0]
        + glyph.position[1] * glyph.direction[1]
        + glyph.position[2] * glyph.direction[2];
      expect(Math.abs(dot)).toBeLessThan(1e-12);
    }
  });

  it("keeps backend numbers verbatim on each glyph", () => {
    const set = buildGlyphs(grid);
    for (let i = 0; i < set.glyphs.length; i++) {
      expect(set.glyphs[i].sample).toBe(grid.samples[i]);
    }
  });

  it("flags masked nodes separately and never as NaN", () => {
    const masked: FieldGrid = {
      ...grid,
      samples: grid.samples.slice(0, 8),
      singular_mask: [[0, 3], [5, 11]],
    };
    const set = buildGlyphs(masked);
    expect(set.maskedPositions.length).toBe(2);
    for (const pos of set.maskedPositions) {
      expect(pos.every(Number.isFinite)).toBe(true);
    }
  });

  it("rejects grids containing non-finite samples before they reach a renderer", () => {
    const poisoned: FieldGrid = {
      ...grid,
      samples: [{ theta: 1.0, phi: 1.0, theta_dot: Number.NaN, phi_dot: 0 }],
    };
    expect(() => buildGlyphs(poisoned)).toThrow(/non-finite/);
  });

  it("handles an empty grid without glyphs", () => {
    const empty: FieldGrid = { ...grid, samples: [], singular_mask: [] };
    const set = buildGlyphs(empty);
    expect(set.glyphs).toEqual([]);
    expect(set.maxMagnitude).toBe(0);
  });
});
