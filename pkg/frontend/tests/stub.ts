// Replays recorded service responses.  Exchanges with the same method+path
// are served in recorded order (the last one is sticky), which reproduces
// the service's stateful progression without a live backend.

import type { FetchLike } from '../src/api';
import recordedExchanges from './fixtures/recorded.json';

export interface RecordedExchange {
  method: string;
  path: string;
  status: number;
  content_type: string;
  json?: unknown;
  body_b64?: string;
}

export interface StubCall {
  method: string;
  path: string;
  body: unknown;
}

export const RECORDING = recordedExchanges as RecordedExchange[];

export function recordedBody(method: string, path: string, skip = 0): RecordedExchange {
  const matches = RECORDING.filter((e) => e.method === method && e.path === path);
  const entry = matches[skip];
  if (!entry) throw new Error(`no recording for ${method} ${path} (#${skip})`);
  return entry;
}

export class RecordedServiceStub {
  readonly calls: StubCall[] = [];
  private readonly queues = new Map<string, RecordedExchange[]>();

  constructor(exchanges: RecordedExchange[] = RECORDING) {
    for (const exchange of exchanges) {
      const key = `${exchange.method} ${exchange.path}`;
      const queue = this.queues.get(key);
      if (queue) queue.push(exchange);
      else this.queues.set(key, [exchange]);
    }
  }

  countCalls(method: string, path: string): number {
    return this.calls.filter((c) => c.method === method && c.path === path).length;
  }

  readonly fetch: FetchLike = async (url, init) => {
    const method = init?.method ?? 'GET';
    let body: unknown = null;
    if (typeof init?.body === 'string') {
      try {
        body = JSON.parse(init.body);
      } catch {
        body = init.body;
      }
    } else if (init?.body) {
      body = init.body;
    }
    this.calls.push({ method, path: url, body });

    const queue = this.queues.get(`${method} ${url}`);
    if (!queue || queue.length === 0) {
      return new Response(
        JSON.stringify({ code: 'NotFound', message: `no recording for ${method} ${url}`, retryable: false }),
        { status: 404, headers: { 'content-type': 'application/json' } },
      );
    }
    const exchange = queue.length > 1 ? queue.shift()! : queue[0];
    if (exchange.body_b64 !== undefined) {
      const bytes = Uint8Array.from(Buffer.from(exchange.body_b64, 'base64'));
      return new Response(bytes, {
        status: exchange.status,
        headers: { 'content-type': exchange.content_type },
      });
    }
    return new Response(JSON.stringify(exchange.json), {
      status: exchange.status,
      headers: { 'content-type': exchange.content_type },
    });
  };
}
