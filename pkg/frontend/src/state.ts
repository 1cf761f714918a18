// Chat view state and its transitions. Labels are immutable history:
// finished messages keep the annotated document they were verified with,
// and a policy switch only affects subsequent requests.

import type { AnnotatedDocument, ChatMessage, ChatViewState } from './types.js';

export function initialState(policies: string[], active: string): ChatViewState {
  return {
    messages: [],
    policies,
    activePolicy: active,
    sessionId: `s-${Date.now().toString(36)}-${Math.random().toString(36).slice(2, 8)}`,
  };
}

export function switchPolicy(state: ChatViewState, preset: string): ChatViewState {
  if (preset === state.activePolicy) return state;
  if (!state.policies.includes(preset)) {
    throw new Error(`unknown policy ${preset}`);
  }
  return { ...state, activePolicy: preset };
}

export function appendUserMessage(state: ChatViewState, text: string): ChatViewState {
  const user: ChatMessage = { role: 'user', text };
  const pending: ChatMessage = { role: 'assistant', text: '', pending: true };
  return { ...state, messages: [...state.messages, user, pending] };
}

function replaceLast(state: ChatViewState, message: ChatMessage): ChatViewState {
  const messages = state.messages.slice(0, -1);
  messages.push(message);
  return { ...state, messages };
}

export function appendDelta(state: ChatViewState, delta: string): ChatViewState {
  const last = state.messages[state.messages.length - 1];
  if (!last || last.role !== 'assistant' || !last.pending) return state;
  return replaceLast(state, { ...last, text: last.text + delta });
}

export function finishMessage(
  state: ChatViewState,
  doc: AnnotatedDocument,
): ChatViewState {
  const last = state.messages[state.messages.length - 1];
  if (!last || last.role !== 'assistant') return state;
  return replaceLast(state, { role: 'assistant', text: last.text, doc });
}

export function failMessage(state: ChatViewState, error: string): ChatViewState {
  const last = state.messages[state.messages.length - 1];
  if (!last || last.role !== 'assistant' || !last.pending) return state;
  return replaceLast(state, { ...last, pending: false, error });
}
