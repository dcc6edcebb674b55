#!/usr/bin/env node
/**
 * export-traces --model <weights> --layer <name> --audio-dir <dir> --out <file>
 *
 * Runs every WAV in the directory through the model and writes one
 * canonical trace file, byte-compatible with the analysis toolchain.
 */

import { exportTraces, listWavFiles, writeTraceFile } from './exporter';
import { loadElmanWeights } from './model';

interface CliArgs {
  model: string;
  layer: string;
  audioDir: string;
  out: string;
}

function parseArgs(argv: string[]): CliArgs {
  const args: Partial<CliArgs> = { layer: 'rnn' };
  for (let i = 0; i < argv.length; i += 2) {
    const flag = argv[i];
    const value = argv[i + 1];
    if (value === undefined) {
      throw new Error(`missing value for ${flag}`);
    }
    switch (flag) {
      case '--model':
        args.model = value;
        break;
      case '--layer':
        args.layer = value;
        break;
      case '--audio-dir':
        args.audioDir = value;
        break;
      case '--out':
        args.out = value;
        break;
      default:
        throw new Error(`unknown flag ${flag}`);
    }
  }
  for (const key of ['model', 'audioDir', 'out'] as const) {
    if (!args[key]) {
      throw new Error(`--${key === 'audioDir' ? 'audio-dir' : key} is required`);
    }
  }
  return args as CliArgs;
}

function main(): number {
  let args: CliArgs;
  try {
    args = parseArgs(process.argv.slice(2));
  } catch (err) {
    console.error(`usage: export-traces --model M --layer L --audio-dir D --out traces.trc`);
    console.error(String(err instanceof Error ? err.message : err));
    return 2;
  }
  try {
    const model = loadElmanWeights(args.model);
    const files = listWavFiles(args.audioDir);
    const text = exportTraces(model, args.layer, files);
    writeTraceFile(text, args.out);
    console.log(`exported ${files.length} traces -> ${args.out}`);
    return 0;
  } catch (err) {
    console.error(String(err instanceof Error ? err.message : err));
    return 1;
  }
}

process.exit(main());
