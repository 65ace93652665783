/** Server-sent-events handling: a chunk reassembler plus a reconnecting
 * subscription that falls back to nothing (callers poll anyway). */

import type { StreamEvent } from "./types.js";

/**
 * Incremental SSE parser. Feed it raw text chunks in any split; it emits a
 * StreamEvent per complete `data:` block and ignores comments/keepalives.
 */
export class SseParser {
  private buffer = "";
  private dataLines: string[] = [];

  push(chunk: string): StreamEvent[] {
    this.buffer += chunk;
    const events: StreamEvent[] = [];
    for (;;) {
      const nl = this.buffer.indexOf("\n");
      if (nl < 0) break;
      let line = this.buffer.slice(0, nl);
      this.buffer = this.buffer.slice(nl + 1);
      if (line.endsWith("\r")) line = line.slice(0, -1);

      if (line === "") {
        // blank line terminates the event
        if (this.dataLines.length > 0) {
          const raw = this.dataLines.join("\n");
          this.dataLines = [];
          try {
            events.push(JSON.parse(raw) as StreamEvent);
          } catch {
            // a malformed event must not kill the stream
          }
        }
        continue;
      }
      if (line.startsWith(":")) continue; // comment / keepalive
      if (line.startsWith("data:")) {
        this.dataLines.push(line.slice(5).replace(/^ /, ""));
      }
      // other fields (event:, id:, retry:) are not used by the gateway
    }
    return events;
  }
}

export interface EventStreamHandle {
  close(): void;
}

/**
 * Subscribe to the gateway event stream with automatic reconnect.
 * Uses EventSource when the environment provides one.
 */
export function openEventStream(
  url: string,
  onEvent: (ev: StreamEvent) => void,
  onStatus?: (connected: boolean) => void,
): EventStreamHandle {
  let closed = false;
  let source: EventSource | null = null;
  let retry: ReturnType<typeof setTimeout> | null = null;

  const connect = () => {
    if (closed || typeof EventSource === "undefined") return;
    source = new EventSource(url);
    source.onopen = () => onStatus?.(true);
    source.onmessage = (msg) => {
      try {
        onEvent(JSON.parse(msg.data) as StreamEvent);
      } catch {
        /* ignore malformed frames */
      }
    };
    source.onerror = () => {
      onStatus?.(false);
      source?.close();
      if (!closed) retry = setTimeout(connect, 2000);
    };
  };
  connect();

  return {
    close() {
      closed = true;
      if (retry) clearTimeout(retry);
      source?.close();
    },
  };
}
