import type { SessionView, StepEvent, StepReport } from './types'

export interface Toast {
  kind: 'accept' | 'death'
  text: string
}

export interface TimelineEntry {
  fnum: number
  feature: string
  // demons whose confidence moved this step, with the applied delta
  changes: { demon: string; delta: number }[]
  events: StepEvent[]
  unknown: boolean
}

export interface ConsoleState {
  view: SessionView | null
  timeline: TimelineEntry[]
  toasts: Toast[]
  busy: boolean
  inputError: string | null
}

export function initialState(): ConsoleState {
  return { view: null, timeline: [], toasts: [], busy: false, inputError: null }
}

export function toastsFor(events: StepEvent[]): Toast[] {
  const toasts: Toast[] = []
  for (const event of events) {
    if (event.type === 'ACCEPT') {
      toasts.push({
        kind: 'accept',
        text: `output from demon ${event.demon}: ${event.output_text}`,
      })
    } else if (event.type === 'DEATH') {
      toasts.push({ kind: 'death', text: `demon ${event.demon} removed` })
    }
  }
  return toasts
}

export function timelineEntry(report: StepReport): TimelineEntry {
  const changes = report.rows
    .filter(r => r.react !== 0 || r.or_bns !== 0)
    .map(r => ({ demon: r.demon, delta: r.react + r.or_bns }))
  return {
    fnum: report.fnum,
    feature: report.feature,
    changes,
    events: report.events,
    unknown: report.events.some(e => e.type === 'UNKNOWN_FEATURE'),
  }
}

/** Fold one submitted step into the state; the refreshed view arrives separately. */
export function applyReport(state: ConsoleState, report: StepReport): ConsoleState {
  return {
    ...state,
    timeline: [...state.timeline, timelineEntry(report)],
    toasts: [...state.toasts, ...toastsFor(report.events)],
  }
}

export function setView(state: ConsoleState, view: SessionView): ConsoleState {
  return { ...state, view }
}
