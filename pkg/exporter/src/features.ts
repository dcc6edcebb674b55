/**
 * Simple audio front end: framed log band powers.
 *
 * Frames of 25 ms with a 10 ms hop; per frame, one Goertzel-style probe per
 * band at evenly spaced center frequencies, log-compressed with a floor.
 * Traces are self-contained, so this front end does not need to match the
 * consumer's feature pipeline; it only needs to be deterministic.
 */

import { SAMPLE_RATE } from './wav';

export interface FeatureConfig {
  window: number;
  hop: number;
  bands: number;
}

export const DEFAULT_FEATURES: Omit<FeatureConfig, 'bands'> = {
  window: 400, // 25 ms at 16 kHz
  hop: 160, // 10 ms
};

const POWER_FLOOR = 1e-12;

export function frameCount(nSamples: number, cfg: FeatureConfig): number {
  if (nSamples < cfg.window) {
    throw new Error(`clip too short: ${nSamples} samples < one ${cfg.window}-sample window`);
  }
  return Math.floor((nSamples - cfg.window) / cfg.hop) + 1;
}

export function bandCenters(bands: number): Float64Array {
  const centers = new Float64Array(bands);
  for (let b = 0; b < bands; b++) {
    centers[b] = ((b + 1) * (SAMPLE_RATE / 2)) / (bands + 1);
  }
  return centers;
}

export function extractFeatures(samples: Float64Array, cfg: FeatureConfig): Float64Array[] {
  const nFrames = frameCount(samples.length, cfg);
  const centers = bandCenters(cfg.bands);
  const frames: Float64Array[] = [];
  for (let f = 0; f < nFrames; f++) {
    const start = f * cfg.hop;
    const feature = new Float64Array(cfg.bands);
    for (let b = 0; b < cfg.bands; b++) {
      const omega = (2 * Math.PI * centers[b]) / SAMPLE_RATE;
      let re = 0;
      let im = 0;
      for (let t = 0; t < cfg.window; t++) {
        const v = samples[start + t];
        re += v * Math.cos(omega * t);
        im -= v * Math.sin(omega * t);
      }
      const power = (re * re + im * im) / (cfg.window * cfg.window);
      feature[b] = Math.log(Math.max(power, POWER_FLOOR));
    }
    frames.push(feature);
  }
  return frames;
}
