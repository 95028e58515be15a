import type { SessionView, TraceRow } from './types'

export function escapeHtml(text: string): string {
  return text
    .replace(/&/g, '&amp;')
    .replace(/</g, '&lt;')
    .replace(/>/g, '&gt;')
    .replace(/"/g, '&quot;')
}

export function barWidth(row: TraceRow): number {
  if (row.state === 'DEAD') return 0
  return Math.max(0, Math.min(100, row.conf))
}

export function confLabel(row: TraceRow): string {
  // dead demons read -1 everywhere, matching the trace tables
  return row.state === 'DEAD' ? '-1' : String(row.conf)
}

function badge(label: string, value: number): string {
  if (value === 0) return ''
  const sign = value > 0 ? '+' : ''
  return `<span class="badge badge-${label.toLowerCase()}">${label} ${sign}${value}</span>`
}

export function renderBar(row: TraceRow, reachability?: string): string {
  const cls = `demon-${row.state.toLowerCase()}`
  const reach =
    reachability && row.state !== 'DEAD'
      ? `<span class="reach reach-${reachability.toLowerCase()}">${reachability}</span>`
      : ''
  return [
    `<div class="demon-row ${cls}" data-demon="${escapeHtml(row.demon)}">`,
    `<div class="demon-head">`,
    `<span class="demon-name">${escapeHtml(row.demon)}</span>`,
    `<span class="demon-state">${row.state}</span>`,
    reach,
    badge('REACT', row.react),
    badge('OR-BNS', row.or_bns),
    `</div>`,
    `<div class="bar-track">`,
    `<div class="bar-fill" style="width: ${barWidth(row)}%"></div>`,
    row.state === 'DEAD' ? `<div class="bar-dead-marker"></div>` : '',
    `</div>`,
    `<div class="demon-nums">conf ${confLabel(row)} <span class="old">old ${row.old}</span></div>`,
    `</div>`,
  ].join('')
}

export function renderBoard(view: SessionView): string {
  const bars = view.rows.map(r => renderBar(r, view.reachability[r.demon])).join('')
  return `<div class="board">${bars}</div>`
}
