/**
 * Canonical trace file writing.
 *
 * Grammar (UTF-8, \n line endings):
 *
 *   RNNTRACE 1 <state_dim> <input_dim>
 *   T <trace_id>
 *   S <token> | <x_0> ... | <s_0> ...
 *   F <s_0> ...
 *
 * Floats carry 9 significant digits, enough to reconstruct float32-scale
 * values exactly on the consuming side.
 */

export function formatFloat9(value: number): string {
  if (!Number.isFinite(value)) {
    throw new Error(`non-finite value in trace: ${value}`);
  }
  if (value === 0) {
    return '0'; // normalizes -0 as well
  }
  let s = value.toPrecision(9);
  if (s.includes('e')) {
    const [mantissaRaw, expRaw] = s.split('e');
    let mantissa = mantissaRaw;
    if (mantissa.includes('.')) {
      mantissa = mantissa.replace(/0+$/, '').replace(/\.$/, '');
    }
    const exp = parseInt(expRaw, 10);
    const expStr = (exp < 0 ? '-' : '+') + String(Math.abs(exp)).padStart(2, '0');
    return `${mantissa}e${expStr}`;
  }
  if (s.includes('.')) {
    s = s.replace(/0+$/, '').replace(/\.$/, '');
  }
  return s;
}

export function formatVector(values: Float64Array | number[]): string {
  return Array.from(values, formatFloat9).join(' ');
}

export interface TraceStep {
  /** Hidden state before this step (step 0 carries the zero vector). */
  state: Float64Array;
  input: Float64Array;
  token: number;
}

export interface TraceBlock {
  id: string;
  steps: TraceStep[];
  finalState: Float64Array;
}

export class TraceFileBuilder {
  private readonly lines: string[];

  constructor(
    readonly stateDim: number,
    readonly inputDim: number,
  ) {
    this.lines = [`RNNTRACE 1 ${stateDim} ${inputDim}`];
  }

  addTrace(block: TraceBlock): void {
    if (!block.id || /\s/.test(block.id)) {
      throw new Error(`bad trace id: ${JSON.stringify(block.id)}`);
    }
    if (block.steps.length === 0) {
      throw new Error(`trace ${block.id}: needs at least one step`);
    }
    for (const step of block.steps) {
      if (step.state.length !== this.stateDim || step.input.length !== this.inputDim) {
        throw new Error(`trace ${block.id}: dimension mismatch in a step`);
      }
    }
    if (block.steps[0].state.some((v) => v !== 0)) {
      throw new Error(`trace ${block.id}: first state must be the zero vector`);
    }
    this.lines.push(`T ${block.id}`);
    for (const step of block.steps) {
      this.lines.push(`S ${step.token} | ${formatVector(step.input)} | ${formatVector(step.state)}`);
    }
    this.lines.push(`F ${formatVector(block.finalState)}`);
  }

  toString(): string {
    return this.lines.join('\n') + '\n';
  }
}
