import { describe, expect, it } from 'vitest'
import { barWidth, confLabel, escapeHtml, renderBar, renderBoard } from '../src/board'
import { renderQuestion, renderTimeline, renderToasts } from '../src/view'
import type { SessionView, TraceRow } from '../src/types'
import type { TimelineEntry } from '../src/state'

function row(demon: string, over: Partial<TraceRow> = {}): TraceRow {
  return {
    demon,
    state: 'ALIVE',
    conf: 0,
    old: 0,
    death: 0,
    accp: 90,
    rejct: 0,
    fnum: 1,
    react: 0,
    or_bns: 0,
    ...over,
  }
}

describe('escapeHtml', () => {
  it('escapes the four html metacharacters', () => {
    expect(escapeHtml(`<a href="x">&</a>`)).toBe('&lt;a href=&quot;x&quot;&gt;&amp;&lt;/a&gt;')
  })
})

describe('bar geometry', () => {
  it('clamps negative confidence to an empty bar', () => {
    expect(barWidth(row('d', { conf: -40 }))).toBe(0)
  })

  it('caps at 100 even if a row somehow exceeds it', () => {
    expect(barWidth(row('d', { conf: 100 }))).toBe(100)
  })

  it('pins dead demons to zero width and a -1 label', () => {
    const dead = row('d', { state: 'DEAD', conf: 77 })
    expect(barWidth(dead)).toBe(0)
    expect(confLabel(dead)).toBe('-1')
  })

  it('labels living demons with their confidence', () => {
    expect(confLabel(row('d', { conf: 59 }))).toBe('59')
  })
})

describe('renderBar', () => {
  it('includes name, state class, and both numbers', () => {
    const html = renderBar(row('depressive_ep', { conf: 59, old: 56 }))
    expect(html).toContain('data-demon="depressive_ep"')
    expect(html).toContain('demon-alive')
    expect(html).toContain('conf 59')
    expect(html).toContain('old 56')
    expect(html).toContain('width: 59%')
  })

  it('omits badges for zero react and or-bonus', () => {
    const html = renderBar(row('d'))
    expect(html).not.toContain('badge')
  })

  it('shows signed badges when the step moved the demon', () => {
    const html = renderBar(row('d', { react: 3, or_bns: 38 }))
    expect(html).toContain('REACT +3')
    expect(html).toContain('OR-BNS +38')
    const negative = renderBar(row('d', { react: -25 }))
    expect(negative).toContain('REACT -25')
  })

  it('marks dead rows and drops their reachability tag', () => {
    const html = renderBar(row('d', { state: 'DEAD' }), 'IMPOSSIBLE')
    expect(html).toContain('demon-dead')
    expect(html).toContain('bar-dead-marker')
    expect(html).not.toContain('IMPOSSIBLE')
  })

  it('tags living rows with their reachability', () => {
    const html = renderBar(row('d', { conf: 95, state: 'ACCEPTED' }), 'ACCEPTED')
    expect(html).toContain('reach-accepted')
  })

  it('escapes demon names', () => {
    const html = renderBar(row('<script>'))
    expect(html).not.toContain('<script>')
    expect(html).toContain('&lt;script&gt;')
  })
})

describe('renderBoard', () => {
  it('renders one bar per row in order', () => {
    const view: SessionView = {
      session_id: 's',
      kb_id: 'k',
      step: 1,
      rows: [row('a'), row('b')],
      events: [],
      suggestion: null,
      reachability: { a: 'POSSIBLE', b: 'IMPOSSIBLE' },
      vocabulary: [],
    }
    const html = renderBoard(view)
    expect(html.indexOf('data-demon="a"')).toBeGreaterThan(-1)
    expect(html.indexOf('data-demon="a"')).toBeLessThan(html.indexOf('data-demon="b"'))
    expect(html).toContain('reach-impossible')
  })
})

describe('renderQuestion', () => {
  it('hides when there is no suggestion', () => {
    expect(renderQuestion(null)).toBe('')
  })

  it('names the feature, the demon, and the potential', () => {
    const html = renderQuestion({ demon: 'dysthymic_ep', feature: 'sleep_disorder', potential: 4 })
    expect(html).toContain('Ask about:')
    expect(html).toContain('>sleep_disorder</button>')
    expect(html).toContain('(dysthymic_ep)')
    expect(html).toContain('potential +4')
    expect(html).toContain('data-feature="sleep_disorder"')
  })
})

describe('renderToasts', () => {
  it('renders kind-specific classes and escapes text', () => {
    const html = renderToasts([
      { kind: 'accept', text: 'output from demon a: a' },
      { kind: 'death', text: 'demon <b> removed' },
    ])
    expect(html).toContain('toast-accept')
    expect(html).toContain('toast-death')
    expect(html).toContain('demon &lt;b&gt; removed')
  })
})

describe('renderTimeline', () => {
  const entry = (over: Partial<TimelineEntry>): TimelineEntry => ({
    fnum: 1,
    feature: 'guilt',
    changes: [],
    events: [],
    unknown: false,
    ...over,
  })

  it('lists steps with their deltas', () => {
    const html = renderTimeline([
      entry({ fnum: 1, changes: [{ demon: 'a', delta: 50 }, { demon: 'b', delta: -3 }] }),
      entry({ fnum: 2, feature: 'zz', unknown: true }),
    ])
    expect(html).toContain('input1:')
    expect(html).toContain('a +50, b -3')
    expect(html).toContain('unknown feature')
    expect(html).toContain('no demon moved')
  })

  it('is an empty list before the first step', () => {
    expect(renderTimeline([])).toBe('<ol class="timeline"></ol>')
  })
})
