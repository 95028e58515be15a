// Wire types mirroring the service JSON. The console never recomputes
// engine math; every number on screen comes from these payloads.

export interface TraceRow {
  demon: string
  state: 'ALIVE' | 'ACCEPTED' | 'REJECTED' | 'DEAD'
  conf: number
  old: number
  death: number
  accp: number
  rejct: number
  fnum: number
  react: number
  or_bns: number
}

export interface StepEvent {
  type: 'ACCEPT' | 'DEATH' | 'REJECT' | 'UNKNOWN_FEATURE'
  demon?: string
  output_text?: string
  feature?: string
}

export interface StepReport {
  fnum: number
  feature: string
  rows: TraceRow[]
  events: StepEvent[]
}

export interface Suggestion {
  demon: string
  feature: string
  potential: number
}

// Flattened session event: a step event tagged with the step it fired on.
export interface SessionEvent extends StepEvent {
  fnum: number
}

export interface SessionView {
  session_id: string
  kb_id: string
  step: number
  rows: TraceRow[]
  events: SessionEvent[]
  suggestion: Suggestion | null
  reachability: Record<string, 'ACCEPTED' | 'POSSIBLE' | 'IMPOSSIBLE'>
  vocabulary: string[]
}

export interface Diagnostic {
  severity: 'ERROR' | 'WARNING'
  line: number
  column: number
  code: string
  message: string
}
