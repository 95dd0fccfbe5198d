// Countdown math, kept pure so it can be tested without timers.

/** Whole seconds left before a deadline; floors at 0 on/after it. */
export function secondsRemaining(
  deadlineMs: number | null,
  localNowMs: number,
  clockOffsetMs: number,
): number {
  if (deadlineMs === null) return 0;
  const serverNow = localNowMs + clockOffsetMs;
  return Math.max(0, Math.ceil((deadlineMs - serverNow) / 1000));
}

/**
 * Offset estimate made at join time: the first round's deadline minus the
 * configured round length approximates "server now" at arrival.
 */
export function estimateClockOffset(
  deadlineMs: number,
  roundSeconds: number,
  localNowMs: number,
): number {
  return deadlineMs - roundSeconds * 1000 - localNowMs;
}
