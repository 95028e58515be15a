import { escapeHtml } from './board'
import type { Toast, TimelineEntry } from './state'
import type { Suggestion } from './types'

/** "Ask about: ..." panel; empty string hides it. */
export function renderQuestion(suggestion: Suggestion | null): string {
  if (suggestion === null) return ''
  return [
    `<div class="question" data-feature="${escapeHtml(suggestion.feature)}">`,
    `Ask about: <button class="question-pick">${escapeHtml(suggestion.feature)}</button>`,
    ` (${escapeHtml(suggestion.demon)})`,
    `<span class="question-pot">potential +${suggestion.potential}</span>`,
    `</div>`,
  ].join('')
}

export function renderToasts(toasts: Toast[]): string {
  return toasts
    .map(t => `<div class="toast toast-${t.kind}">${escapeHtml(t.text)}</div>`)
    .join('')
}

function describeEntry(entry: TimelineEntry): string {
  if (entry.changes.length === 0) return 'no demon moved'
  return entry.changes
    .map(c => `${escapeHtml(c.demon)} ${c.delta > 0 ? '+' : ''}${c.delta}`)
    .join(', ')
}

export function renderTimeline(timeline: TimelineEntry[]): string {
  const items = timeline
    .map(entry => {
      const flag = entry.unknown ? `<span class="flag-unknown">unknown feature</span>` : ''
      return [
        `<li class="timeline-entry">`,
        `<span class="timeline-step">input${entry.fnum}:</span> `,
        `<span class="timeline-feature">${escapeHtml(entry.feature)}</span> `,
        flag,
        `<span class="timeline-deltas">${describeEntry(entry)}</span>`,
        `</li>`,
      ].join('')
    })
    .join('')
  return `<ol class="timeline">${items}</ol>`
}
