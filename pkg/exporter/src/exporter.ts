/**
 * Drive audio through a recurrent model and emit canonical trace files.
 *
 * Every audio file becomes one trace block: step i records the hidden state
 * BEFORE consuming feature frame i (so step 0 carries the zero vector), and
 * the final state is the state after the last frame.  Deterministic given
 * fixed weights and inputs.
 */

import * as fs from 'node:fs';
import * as path from 'node:path';

import { DEFAULT_FEATURES, FeatureConfig, extractFeatures } from './features';
import { TraceBlock, TraceFileBuilder, TraceStep } from './format';
import { RecurrentModel, resolveCapturePoint } from './model';
import { readWav } from './wav';

export interface ExportConfig {
  modelPath: string;
  layer: string;
  outPath: string;
  featureBands?: number; // defaults to the model's input dimension
}

/** Run one frame sequence through the model, collecting the trace block. */
export function runModel(model: RecurrentModel, id: string, frames: Float64Array[]): TraceBlock {
  const steps: TraceStep[] = [];
  let state = model.initialState();
  for (const frame of frames) {
    if (frame.length !== model.inputDim) {
      throw new Error(`${id}: feature dimension ${frame.length} != model input ${model.inputDim}`);
    }
    const result = model.step(state, frame);
    steps.push({ state, input: frame, token: result.token });
    state = result.state;
  }
  return { id, steps, finalState: state };
}

export function exportTraces(
  model: RecurrentModel,
  layer: string,
  audioFiles: string[],
  featureBands?: number,
): string {
  resolveCapturePoint(model, layer);
  const cfg: FeatureConfig = {
    ...DEFAULT_FEATURES,
    bands: featureBands ?? model.inputDim,
  };
  if (cfg.bands !== model.inputDim) {
    throw new Error(`feature bands ${cfg.bands} != model input dimension ${model.inputDim}`);
  }
  const builder = new TraceFileBuilder(model.stateDim, model.inputDim);
  for (const file of audioFiles) {
    const { samples } = readWav(file);
    const frames = extractFeatures(samples, cfg);
    const id = path.basename(file).replace(/\.wav$/i, '');
    builder.addTrace(runModel(model, id, frames));
  }
  return builder.toString();
}

export function writeTraceFile(text: string, outPath: string): void {
  fs.writeFileSync(outPath, text, { encoding: 'utf-8' });
}

export function listWavFiles(dir: string): string[] {
  return fs
    .readdirSync(dir)
    .filter((name) => name.toLowerCase().endsWith('.wav'))
    .sort()
    .map((name) => path.join(dir, name));
}
