/** Three.js rendering of one sphere: velocity glyphs, fixed sets, paths.
 *
 * All numbers shown in tooltips/readouts are backend values carried on the
 * glyph samples; the view only converts angles to screen geometry.  Glyph
 * lengths are normalized per grid to the largest magnitude, with the
 * absolute scale reported in the tooltip line.
 */

import * as THREE from "three";

import { buildGlyphs, GlyphSet } from "./glyphs.js";
import { FieldGrid, TrajectoryResponse } from "./types.js";

const GLYPH_LENGTH = 0.16;

export class SphereView {
  readonly scene = new THREE.Scene();
  readonly camera: THREE.PerspectiveCamera;
  private renderer: THREE.WebGLRenderer | null = null;
  private glyphGroup = new THREE.Group();
  private pathGroup = new THREE.Group();
  private markerGroup = new THREE.Group();
  private messageCallback: (text: string) => void;
  private dragCallback: ((theta: number, phi: number) => void) | null = null;

  constructor(
    container: HTMLElement | null,
    onMessage?: (text: string) => void,
  ) {
    this.messageCallback = onMessage ?? (() => undefined);
    this.camera = new THREE.PerspectiveCamera(45, 1, 0.1, 50);
    this.camera.position.set(0, -3.2, 1.2);
    this.camera.lookAt(0, 0, 0);
    this.scene.add(new THREE.AmbientLight(0xffffff, 0.9));
    const ball = new THREE.Mesh(
      new THREE.SphereGeometry(0.985, 48, 32),
      new THREE.MeshLambertMaterial({ color: 0x1d2733, transparent: true, opacity: 0.92 }),
    );
    this.scene.add(ball);
    this.scene.add(this.glyphGroup);
    this.scene.add(this.pathGroup);
    this.scene.add(this.markerGroup);
    if (container) {
      this.renderer = new THREE.WebGLRenderer({ antialias: true });
      this.renderer.setSize(container.clientWidth, container.clientWidth);
      container.appendChild(this.renderer.domElement);
      this.attachPointerHandlers(this.renderer.domElement);
    }
  }

  onDrag(callback: (theta: number, phi: number) => void) {
    this.dragCallback = callback;
  }

  private attachPointerHandlers(canvas: HTMLCanvasElement) {
    let dragging = false;
    const pick = (event: PointerEvent) => {
      const rect = canvas.getBoundingClientRect();
      const ndc = new THREE.Vector2(
        ((event.clientX - rect.left) / rect.width) * 2 - 1,
        -((event.clientY - rect.top) / rect.height) * 2 + 1,
      );
      const ray = new THREE.Raycaster();
      ray.setFromCamera(ndc, this.camera);
      const hit = ray.ray.intersectSphere(
        new THREE.Sphere(new THREE.Vector3(0, 0, 0), 1.0),
        new THREE.Vector3(),
      );
      if (!hit) return null;
      const theta = Math.acos(Math.min(Math.max(hit.z, -1), 1));
      let phi = Math.atan2(hit.y, hit.x);
      if (phi < 0) phi += 2 * Math.PI;
      return { theta, phi };
    };
    canvas.addEventListener("pointerdown", (e) => {
      dragging = true;
      const p = pick(e);
      if (p && this.dragCallback) this.dragCallback(p.theta, p.phi);
    });
    canvas.addEventListener("pointermove", (e) => {
      if (!dragging) return;
      const p = pick(e);
      if (p && this.dragCallback) this.dragCallback(p.theta, p.phi);
    });
    window.addEventListener("pointerup", () => {
      dragging = false;
    });
  }

  /** Replace the glyph layer with a freshly sampled grid. */
  renderGrid(grid: FieldGrid): GlyphSet | null {
    this.glyphGroup.clear();
    let set: GlyphSet;
    try {
      set = buildGlyphs(grid);
    } catch (err) {
      this.messageCallback(`malformed grid: ${err}`);
      return null;
    }
    if (set.glyphs.length === 0) {
      this.messageCallback("empty grid");
      return set;
    }
    const scale = set.maxMagnitude > 0 ? GLYPH_LENGTH / set.maxMagnitude : 0;
    for (const glyph of set.glyphs) {
      const origin = new THREE.Vector3(...glyph.position);
      if (glyph.magnitude * scale < 1e-4) {
        // fixed or nearly fixed node: draw a dot instead of an arrow
        const dot = new THREE.Mesh(
          new THREE.SphereGeometry(0.012, 6, 6),
          new THREE.MeshBasicMaterial({ color: 0xff5544 }),
        );
        dot.position.copy(origin);
        this.glyphGroup.add(dot);
        continue;
      }
      const dir = new THREE.Vector3(...glyph.direction).normalize();
      this.glyphGroup.add(new THREE.ArrowHelper(
        dir, origin, glyph.magnitude * scale, 0x7fd0ff, 0.03, 0.018,
      ));
    }
    for (const pos of set.maskedPositions) {
      const marker = new THREE.Mesh(
        new THREE.SphereGeometry(0.02, 6, 6),
        new THREE.MeshBasicMaterial({ color: 0xffc400 }),
      );
      marker.position.set(...pos);
      this.glyphGroup.add(marker);
    }
    this.messageCallback(
      `${set.glyphs.length} glyphs, max |v| = ${set.maxMagnitude.toPrecision(4)}, ` +
      `${set.maskedPositions.length} singular nodes flagged`,
    );
    return set;
  }

  renderPath(trajectory: TrajectoryResponse, upTo: number) {
    this.pathGroup.clear();
    const pts: THREE.Vector3[] = [];
    for (let i = 0; i <= upTo && i < trajectory.points.length; i++) {
      const [theta, phi] = trajectory.points[i];
      pts.push(new THREE.Vector3(
        Math.sin(theta) * Math.cos(phi),
        Math.sin(theta) * Math.sin(phi),
        Math.cos(theta),
      ));
    }
    if (pts.length > 1) {
      const geometry = new THREE.BufferGeometry().setFromPoints(pts);
      this.pathGroup.add(new THREE.Line(
        geometry, new THREE.LineBasicMaterial({ color: 0xffe27f }),
      ));
    }
    if (pts.length > 0) {
      const head = new THREE.Mesh(
        new THREE.SphereGeometry(0.025, 8, 8),
        new THREE.MeshBasicMaterial({ color: 0xffe27f }),
      );
      head.position.copy(pts[pts.length - 1]);
      this.pathGroup.add(head);
    }
  }

  renderPartnerMarker(theta: number, phi: number) {
    this.markerGroup.clear();
    const marker = new THREE.Mesh(
      new THREE.SphereGeometry(0.04, 12, 12),
      new THREE.MeshBasicMaterial({ color: 0x6cff9e }),
    );
    marker.position.set(
      Math.sin(theta) * Math.cos(phi),
      Math.sin(theta) * Math.sin(phi),
      Math.cos(theta),
    );
    this.markerGroup.add(marker);
  }

  draw() {
    this.renderer?.render(this.scene, this.camera);
  }
}
