import assert from 'node:assert/strict';
import { test } from 'node:test';

import { TraceFileBuilder, formatFloat9 } from '../src/format';

test('formatFloat9 renders 9 significant digits', () => {
  assert.equal(formatFloat9(0), '0');
  assert.equal(formatFloat9(-0), '0');
  assert.equal(formatFloat9(0.5), '0.5');
  assert.equal(formatFloat9(1 / 3), '0.333333333');
  assert.equal(formatFloat9(-1.25), '-1.25');
  assert.equal(formatFloat9(1e10), '1e+10');
  assert.equal(formatFloat9(1.23456789e-7), '1.23456789e-07');
  assert.equal(formatFloat9(123456789.4), '123456789');
});

test('formatted values reparse to within 9 significant digits', () => {
  let state = 12345.6789;
  for (let i = 0; i < 500; i++) {
    state = Math.sin(state) * 10 ** ((i % 13) - 6);
    const back = Number(formatFloat9(state));
    const tol = Math.max(Math.abs(state) * 1e-8, 1e-300);
    assert.ok(Math.abs(back - state) <= tol, `${state} -> ${formatFloat9(state)}`);
  }
});

test('empty trace list yields a header-only file', () => {
  const builder = new TraceFileBuilder(3, 2);
  assert.equal(builder.toString(), 'RNNTRACE 1 3 2\n');
});

test('trace blocks serialize in grammar order', () => {
  const builder = new TraceFileBuilder(2, 1);
  builder.addTrace({
    id: 'clip0',
    steps: [
      { state: new Float64Array([0, 0]), input: new Float64Array([0.5]), token: 3 },
      { state: new Float64Array([0.1, -0.25]), input: new Float64Array([1]), token: 0 },
    ],
    finalState: new Float64Array([0.75, 0.5]),
  });
  assert.equal(
    builder.toString(),
    'RNNTRACE 1 2 1\n' +
      'T clip0\n' +
      'S 3 | 0.5 | 0 0\n' +
      'S 0 | 1 | 0.1 -0.25\n' +
      'F 0.75 0.5\n',
  );
});

test('first state must be the zero vector', () => {
  const builder = new TraceFileBuilder(1, 1);
  assert.throws(
    () =>
      builder.addTrace({
        id: 'bad',
        steps: [{ state: new Float64Array([0.1]), input: new Float64Array([0]), token: 0 }],
        finalState: new Float64Array([0]),
      }),
    /zero vector/,
  );
});
