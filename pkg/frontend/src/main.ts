import { DuneApi } from './api'
import { renderBoard } from './board'
import { openSession, type ConsoleSession } from './controller'
import { renderQuestion, renderTimeline, renderToasts } from './view'

function el<T extends HTMLElement>(id: string): T {
  const node = document.getElementById(id)
  if (node === null) throw new Error(`missing #${id}`)
  return node as T
}

let session: ConsoleSession | null = null

function paint(): void {
  if (session === null) return
  const state = session.state
  if (state.view !== null) {
    el('board-host').innerHTML = renderBoard(state.view)
    el('question-host').innerHTML = renderQuestion(state.view.suggestion)
    el('step-counter').textContent = `step ${state.view.step}`
    const list = el<HTMLDataListElement>('vocab')
    list.innerHTML = state.view.vocabulary
      .map(f => `<option value="${f}"></option>`)
      .join('')
  }
  el('toast-host').innerHTML = renderToasts(state.toasts)
  el('timeline-host').innerHTML = renderTimeline(state.timeline)
  const input = el<HTMLInputElement>('feature-input')
  const button = el<HTMLButtonElement>('feature-submit')
  input.disabled = state.busy
  button.disabled = state.busy
  el('input-error').textContent = state.inputError ?? ''

  const pick = el('question-host').querySelector<HTMLButtonElement>('.question-pick')
  if (pick !== null) {
    pick.addEventListener('click', () => {
      input.value = pick.textContent ?? ''
      input.focus()
    })
  }
}

async function connect(): Promise<void> {
  const url = el<HTMLInputElement>('server-url').value
  const api = new DuneApi(url)
  if (!(await api.health())) {
    el('connect-error').textContent = `no service at ${url}`
    return
  }
  el('connect-error').textContent = ''

  const kbText = el<HTMLTextAreaElement>('kb-text').value
  const kbId = el<HTMLInputElement>('kb-id').value.trim()
  try {
    session = await openSession(api, kbText.trim() !== '' ? { kbText } : { kbId })
  } catch (err) {
    el('connect-error').textContent = err instanceof Error ? err.message : String(err)
    return
  }
  session.onChange(paint)
  el('setup-panel').hidden = true
  el('session-panel').hidden = false
  paint()
}

async function submit(): Promise<void> {
  if (session === null) return
  const input = el<HTMLInputElement>('feature-input')
  const ok = await session.submit(input.value)
  if (ok) input.value = ''
}

document.addEventListener('DOMContentLoaded', () => {
  el('connect-button').addEventListener('click', () => void connect())
  el<HTMLFormElement>('feature-form').addEventListener('submit', event => {
    event.preventDefault()
    void submit()
  })
})
