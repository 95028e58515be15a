import { DuneApi } from './api'
import { applyReport, initialState, setView, type ConsoleState } from './state'
import { featureError } from './validate'

export type Listener = (state: ConsoleState) => void

/**
 * Headless session driver shared by the page and the tests: owns the state,
 * serializes submits (one in flight), and polls the view after every step.
 */
export class ConsoleSession {
  state: ConsoleState = initialState()
  private listeners: Listener[] = []

  constructor(
    readonly api: DuneApi,
    readonly sessionId: string,
  ) {}

  onChange(listener: Listener): void {
    this.listeners.push(listener)
  }

  private push(state: ConsoleState): void {
    this.state = state
    for (const listener of this.listeners) listener(state)
  }

  async refresh(): Promise<void> {
    const view = await this.api.getView(this.sessionId)
    this.push(setView(this.state, view))
  }

  /**
   * Validate, submit, and re-poll. Returns false when the input never left
   * the client (validation error or a submit already in flight).
   */
  async submit(input: string): Promise<boolean> {
    if (this.state.busy) return false
    const error = featureError(input)
    if (error !== null) {
      this.push({ ...this.state, inputError: error })
      return false
    }
    this.push({ ...this.state, busy: true, inputError: null })
    try {
      const report = await this.api.submitFeature(this.sessionId, input.trim())
      this.push(applyReport(this.state, report))
      const view = await this.api.getView(this.sessionId)
      this.push(setView({ ...this.state, busy: false }, view))
      return true
    } catch (err) {
      this.push({
        ...this.state,
        busy: false,
        inputError: err instanceof Error ? err.message : String(err),
      })
      return false
    }
  }
}

/** Register the KB text (if given), open a session, and load the first view. */
export async function openSession(
  api: DuneApi,
  source: { kbText: string } | { kbId: string },
): Promise<ConsoleSession> {
  const kbId = 'kbText' in source ? (await api.registerKb(source.kbText)).kbId : source.kbId
  const sessionId = await api.createSession(kbId)
  const session = new ConsoleSession(api, sessionId)
  await session.refresh()
  return session
}
