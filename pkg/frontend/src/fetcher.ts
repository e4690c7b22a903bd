// Debounced projection fetching with a monotone sequence guard: each
// issued request gets a sequence number, and a response is applied only if
// no newer request has been issued since. A slow early response can never
// overwrite the state of a later slider position.

import { Api, ApiError, FetchedProjection } from "./api.js";
import { debounce, Debounced } from "./debounce.js";

export interface Applied {
  lambda: number;
  payload: FetchedProjection["payload"];
  rawText: string;
}

export class ProjectionFetcher {
  private seq = 0;
  private appliedSeq = 0;
  private readonly debounced: Debounced<number>;
  requestCount = 0;
  lastApplied: Applied | null = null;

  constructor(private readonly api: Api,
              private readonly sessionId: string,
              private readonly onApply: (a: Applied) => void,
              private readonly onError: (e: ApiError | Error) => void =
                () => undefined,
              debounceMs = 80) {
    this.debounced = debounce((lambda: number) => {
      void this.issue(lambda);
    }, debounceMs);
  }

  /** Debounced entry point for slider movement. */
  request(lambda: number): void {
    this.debounced(lambda);
  }

  /** Fire any pending debounced request immediately. */
  flush(): void {
    this.debounced.flush();
  }

  /** Immediate fetch (deep links, trace clicks). Still sequence-guarded. */
  async issue(lambda: number): Promise<void> {
    const mySeq = ++this.seq;
    this.requestCount += 1;
    try {
      const fetched = await this.api.getProjection(this.sessionId, lambda);
      if (mySeq <= this.appliedSeq || mySeq < this.seq) {
        return; // stale: a newer request was issued or already applied
      }
      this.appliedSeq = mySeq;
      this.lastApplied = { lambda, payload: fetched.payload,
                           rawText: fetched.rawText };
      this.onApply(this.lastApplied);
    } catch (err) {
      if (mySeq === this.seq) {
        this.onError(err as Error);
      }
    }
  }
}
