/** Last-write-wins resolution for overlapping fetches, per view. */

export class RequestSequencer {
  private current = new Map<string, number>();

  /** Reserve the next sequence number for a view. */
  begin(view: string): number {
    const seq = (this.current.get(view) ?? 0) + 1;
    this.current.set(view, seq);
    return seq;
  }

  /** A response may apply only if no newer request has started since. */
  isCurrent(view: string, seq: number): boolean {
    return this.current.get(view) === seq;
  }
}
