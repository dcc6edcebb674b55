/** Minimal reader for canonical WAV input: RIFF PCM16, mono, 16 kHz. */

import * as fs from 'node:fs';

export const SAMPLE_RATE = 16000;

export interface WavAudio {
  samples: Float64Array;
  sampleRate: number;
}

export function readWav(path: string): WavAudio {
  const buf = fs.readFileSync(path);
  if (buf.length < 44 || buf.toString('ascii', 0, 4) !== 'RIFF' || buf.toString('ascii', 8, 12) !== 'WAVE') {
    throw new Error(`${path}: not a RIFF/WAVE file`);
  }
  let offset = 12;
  let fmtSeen = false;
  let dataStart = -1;
  let dataLength = 0;
  while (offset + 8 <= buf.length) {
    const chunkId = buf.toString('ascii', offset, offset + 4);
    const chunkSize = buf.readUInt32LE(offset + 4);
    const body = offset + 8;
    if (chunkId === 'fmt ') {
      const audioFormat = buf.readUInt16LE(body);
      const channels = buf.readUInt16LE(body + 2);
      const rate = buf.readUInt32LE(body + 4);
      const bits = buf.readUInt16LE(body + 14);
      if (audioFormat !== 1) throw new Error(`${path}: compression: expected PCM, got format ${audioFormat}`);
      if (channels !== 1) throw new Error(`${path}: channels: expected mono, got ${channels}`);
      if (bits !== 16) throw new Error(`${path}: sample_width: expected 16-bit, got ${bits}`);
      if (rate !== SAMPLE_RATE) throw new Error(`${path}: sample_rate: expected ${SAMPLE_RATE}, got ${rate}`);
      fmtSeen = true;
    } else if (chunkId === 'data') {
      dataStart = body;
      dataLength = chunkSize;
    }
    offset = body + chunkSize + (chunkSize % 2);
  }
  if (!fmtSeen || dataStart < 0) {
    throw new Error(`${path}: missing fmt or data chunk`);
  }
  const n = Math.floor(dataLength / 2);
  if (n < 1) {
    throw new Error(`${path}: frames: empty audio stream`);
  }
  const samples = new Float64Array(n);
  for (let i = 0; i < n; i++) {
    samples[i] = buf.readInt16LE(dataStart + 2 * i) / 32767;
  }
  return { samples, sampleRate: SAMPLE_RATE };
}
