/**
 * Recurrent model loading and the state-capture contract.
 *
 * A model exposes named capture points (layer -> state tensors).  The
 * built-in Elman stub reads the `RNNW 1` weights format and exposes one
 * recurrent layer, `rnn`, whose hidden state `h` is the capture target.
 * (For gated cells the hidden state, not the cell state, is what this tool
 * exports by default; a model wrapper can expose additional tensors.)
 */

import * as fs from 'node:fs';

export interface StepResult {
  state: Float64Array;
  token: number;
}

export interface RecurrentModel {
  readonly inputDim: number;
  readonly stateDim: number;
  /** Capture points: layer name -> state tensors available there. */
  readonly layers: Record<string, string[]>;
  initialState(): Float64Array;
  step(state: Float64Array, input: Float64Array): StepResult;
}

export function resolveCapturePoint(model: RecurrentModel, layer: string): void {
  if (!(layer in model.layers)) {
    const available = Object.keys(model.layers)
      .map((name) => `${name} (${model.layers[name].join(', ')})`)
      .join('; ');
    throw new Error(`capture point '${layer}' not found; available layers: ${available}`);
  }
}

export class ElmanStub implements RecurrentModel {
  readonly layers = { rnn: ['h'] };
  readonly inputDim: number;
  readonly stateDim: number;
  private readonly vocabSize: number;

  constructor(
    private readonly wXh: Float64Array[], // hidden x input
    private readonly wHh: Float64Array[], // hidden x hidden
    private readonly bH: Float64Array,
    private readonly wHy: Float64Array[], // vocab x hidden
    private readonly bY: Float64Array,
  ) {
    this.stateDim = wXh.length;
    this.inputDim = this.stateDim > 0 ? wXh[0].length : 0;
    this.vocabSize = wHy.length;
    if (wHh.length !== this.stateDim || bH.length !== this.stateDim || bY.length !== this.vocabSize) {
      throw new Error('inconsistent weight dimensions');
    }
  }

  initialState(): Float64Array {
    return new Float64Array(this.stateDim);
  }

  step(state: Float64Array, input: Float64Array): StepResult {
    const next = new Float64Array(this.stateDim);
    for (let i = 0; i < this.stateDim; i++) {
      let acc = this.bH[i];
      for (let j = 0; j < this.inputDim; j++) {
        acc += this.wXh[i][j] * input[j];
      }
      for (let j = 0; j < this.stateDim; j++) {
        acc += this.wHh[i][j] * state[j];
      }
      next[i] = Math.tanh(acc);
    }
    let best = 0;
    let bestLogit = -Infinity;
    for (let v = 0; v < this.vocabSize; v++) {
      let logit = this.bY[v];
      for (let j = 0; j < this.stateDim; j++) {
        logit += this.wHy[v][j] * next[j];
      }
      if (logit > bestLogit) {
        bestLogit = logit;
        best = v;
      }
    }
    return { state: next, token: best };
  }
}

function parseRow(line: string, width: number, lineno: number): Float64Array {
  const parts = line.split(' ');
  if (parts.length !== width) {
    throw new Error(`line ${lineno}: expected ${width} values, got ${parts.length}`);
  }
  const row = new Float64Array(width);
  for (let i = 0; i < width; i++) {
    const v = Number(parts[i]);
    if (!Number.isFinite(v)) {
      throw new Error(`line ${lineno}: bad number ${JSON.stringify(parts[i])}`);
    }
    row[i] = v;
  }
  return row;
}

/** Parse the `RNNW 1 <input> <hidden> <vocab>` text weights format. */
export function loadElmanWeights(path: string): ElmanStub {
  const lines = fs.readFileSync(path, 'utf-8').split('\n');
  if (lines.length && lines[lines.length - 1] === '') {
    lines.pop();
  }
  const header = (lines[0] ?? '').split(' ');
  if (header.length !== 5 || header[0] !== 'RNNW' || header[1] !== '1') {
    throw new Error(`${path}: expected 'RNNW 1 <input> <hidden> <vocab>' header`);
  }
  const [inputDim, hiddenDim, vocabSize] = header.slice(2).map((v) => parseInt(v, 10));
  const expected = hiddenDim + hiddenDim + 1 + vocabSize + 1;
  if (lines.length - 1 !== expected) {
    throw new Error(`${path}: expected ${expected} matrix rows, found ${lines.length - 1}`);
  }
  let pos = 1;
  const take = (count: number, width: number): Float64Array[] => {
    const rows: Float64Array[] = [];
    for (let i = 0; i < count; i++, pos++) {
      rows.push(parseRow(lines[pos], width, pos + 1));
    }
    return rows;
  };
  const wXh = take(hiddenDim, inputDim);
  const wHh = take(hiddenDim, hiddenDim);
  const bH = take(1, hiddenDim)[0];
  const wHy = take(vocabSize, hiddenDim);
  const bY = take(1, vocabSize)[0];
  return new ElmanStub(wXh, wHh, bH, wHy, bY);
}
