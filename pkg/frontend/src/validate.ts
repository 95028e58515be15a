// Client-side mirror of the server's feature identifier rule. The server
// still enforces it; this only catches typos before a request goes out.

export const FEATURE_PATTERN = /^[a-z_][a-z0-9_]*$/

export function featureError(input: string): string | null {
  const word = input.trim()
  if (word.length === 0) return 'enter a feature name'
  if (!FEATURE_PATTERN.test(word)) {
    return 'feature names are lowercase identifiers, e.g. sleep_disorder'
  }
  return null
}
