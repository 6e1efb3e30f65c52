import { afterEach, beforeEach, describe, expect, it, vi } from 'vitest';

import { StudioApi } from '../src/api';
import { RetargetSliders, SLIDER_DEBOUNCE_MS } from '../src/sliders';
import { RecordedServiceStub } from './stub';

describe('RetargetSliders', () => {
  beforeEach(() => {
    vi.useFakeTimers();
  });
  afterEach(() => {
    vi.useRealTimers();
  });

  it('debounces a slider drag into a single submission', () => {
    const submits: Array<[number | null, number | null]> = [];
    const sliders = new RetargetSliders((eye, lip) => submits.push([eye, lip]));
    sliders.setEye(0.2);
    sliders.setEye(0.35);
    sliders.setEye(0.6);
    vi.advanceTimersByTime(SLIDER_DEBOUNCE_MS - 1);
    expect(submits).toEqual([]);
    vi.advanceTimersByTime(1);
    expect(submits).toEqual([[0.6, null]]);
  });

  it('issues exactly one params request through the service', async () => {
    const stub = new RecordedServiceStub();
    const api = new StudioApi('', stub.fetch);
    const sliders = new RetargetSliders((eye, lip) => {
      void api.setParams('session-001', eye, lip);
    });
    sliders.setEye(0.4);
    sliders.setEye(0.6);
    await vi.advanceTimersByTimeAsync(SLIDER_DEBOUNCE_MS);
    expect(stub.countCalls('POST', '/sessions/session-001/params')).toBe(1);
    const call = stub.calls.find((c) => c.path === '/sessions/session-001/params');
    expect(call?.body).toEqual({ eye: 0.6, lip: null, mode: null });
  });

  it('maps slider endpoints to exactly 0 and 1', () => {
    const submits: Array<[number | null, number | null]> = [];
    const sliders = new RetargetSliders((eye, lip) => submits.push([eye, lip]));
    sliders.setEye(0);
    sliders.setLip(1);
    vi.advanceTimersByTime(SLIDER_DEBOUNCE_MS);
    expect(submits).toEqual([[0, 1]]);
    sliders.setEye(1.7); // out-of-range input clamps, never leaves [0, 1]
    vi.advanceTimersByTime(SLIDER_DEBOUNCE_MS);
    expect(submits.at(-1)).toEqual([1, 1]);
  });

  it('reset returns both sliders to the engine-default sentinel', () => {
    const submits: Array<[number | null, number | null]> = [];
    const sliders = new RetargetSliders((eye, lip) => submits.push([eye, lip]));
    sliders.setEye(0.8);
    vi.advanceTimersByTime(SLIDER_DEBOUNCE_MS);
    sliders.reset();
    vi.advanceTimersByTime(SLIDER_DEBOUNCE_MS);
    expect(submits).toEqual([
      [0.8, null],
      [null, null],
    ]);
  });

  it('flush fires a pending submission immediately', () => {
    const submits: Array<[number | null, number | null]> = [];
    const sliders = new RetargetSliders((eye, lip) => submits.push([eye, lip]));
    sliders.setLip(0.9);
    sliders.flush();
    expect(submits).toEqual([[null, 0.9]]);
    sliders.flush(); // nothing pending, nothing sent
    expect(submits).toHaveLength(1);
  });
});
