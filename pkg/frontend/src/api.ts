import type { Diagnostic, SessionView, StepReport, Suggestion } from './types'

export class ApiError extends Error {
  status: number
  diagnostics: Diagnostic[]

  constructor(status: number, message: string, diagnostics: Diagnostic[] = []) {
    super(message)
    this.status = status
    this.diagnostics = diagnostics
  }
}

async function fail(resp: Response): Promise<never> {
  let message = `${resp.status}`
  let diagnostics: Diagnostic[] = []
  try {
    const body = await resp.json()
    if (typeof body.error === 'string') message = body.error
    if (Array.isArray(body.diagnostics)) {
      diagnostics = body.diagnostics
      message = diagnostics
        .map(d => `${d.line}:${d.column}: ${d.code}: ${d.message}`)
        .join('\n')
    }
  } catch {
    // non-JSON body, keep the status text
  }
  throw new ApiError(resp.status, message, diagnostics)
}

/** Thin client over the session service routes. */
export class DuneApi {
  constructor(private baseUrl: string) {
    this.baseUrl = baseUrl.replace(/\/+$/, '')
  }

  async health(): Promise<boolean> {
    try {
      const resp = await fetch(`${this.baseUrl}/healthz`)
      return resp.ok && (await resp.text()) === 'ok'
    } catch {
      return false
    }
  }

  async registerKb(text: string): Promise<{ kbId: string; warnings: Diagnostic[] }> {
    const resp = await fetch(`${this.baseUrl}/kb`, { method: 'POST', body: text })
    if (!resp.ok) await fail(resp)
    const body = await resp.json()
    return { kbId: body.kb_id, warnings: body.warnings ?? [] }
  }

  async createSession(kbId: string): Promise<string> {
    const resp = await fetch(`${this.baseUrl}/sessions`, {
      method: 'POST',
      headers: { 'content-type': 'application/json' },
      body: JSON.stringify({ kb_id: kbId }),
    })
    if (!resp.ok) await fail(resp)
    return (await resp.json()).session_id
  }

  async submitFeature(sessionId: string, feature: string): Promise<StepReport> {
    const resp = await fetch(`${this.baseUrl}/sessions/${sessionId}/features`, {
      method: 'POST',
      headers: { 'content-type': 'application/json' },
      body: JSON.stringify({ feature }),
    })
    if (!resp.ok) await fail(resp)
    return resp.json()
  }

  async getView(sessionId: string): Promise<SessionView> {
    const resp = await fetch(`${this.baseUrl}/sessions/${sessionId}`)
    if (!resp.ok) await fail(resp)
    return resp.json()
  }

  async getTrace(sessionId: string): Promise<StepReport[]> {
    const resp = await fetch(`${this.baseUrl}/sessions/${sessionId}/trace`)
    if (!resp.ok) await fail(resp)
    return resp.json()
  }

  async getQuestion(sessionId: string): Promise<Suggestion | null> {
    const resp = await fetch(`${this.baseUrl}/sessions/${sessionId}/question`)
    if (!resp.ok) await fail(resp)
    return (await resp.json()).suggestion
  }
}
