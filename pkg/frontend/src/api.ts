/** Thin fetch wrappers; every response passes schema validation. */

import { validateConfig, validatePayload, validateUtteranceList } from "./schema.js";
import type { ConfigData, UtteranceInfo, UtterancePayload } from "./types.js";

export class ApiError extends Error {
  constructor(readonly status: number, detail: string) {
    super(detail);
    this.name = "ApiError";
  }
}

async function getJson(url: string): Promise<unknown> {
  const resp = await fetch(url);
  if (!resp.ok) {
    throw new ApiError(resp.status, `${url} failed (${resp.status})`);
  }
  return resp.json();
}

export async function fetchUtterances(): Promise<UtteranceInfo[]> {
  return validateUtteranceList(await getJson("/api/utterances"));
}

export async function fetchDefaults(): Promise<{ config: ConfigData; hash: string }> {
  const data = (await getJson("/api/config")) as { config?: unknown; hash?: unknown };
  return {
    config: validateConfig(data.config),
    hash: String(data.hash ?? ""),
  };
}

export async function fetchUtterance(id: string): Promise<UtterancePayload> {
  return validatePayload(await getJson(`/api/utterance/${encodeURIComponent(id)}`));
}

export async function annotate(
  id: string,
  config: ConfigData,
): Promise<UtterancePayload> {
  const resp = await fetch("/api/annotate", {
    method: "POST",
    headers: { "content-type": "application/json" },
    body: JSON.stringify({ id, config }),
  });
  if (!resp.ok) {
    let detail = `annotate failed (${resp.status})`;
    try {
      const body = (await resp.json()) as { detail?: string };
      if (body.detail) detail = body.detail;
    } catch {
      // keep the generic message
    }
    throw new ApiError(resp.status, detail);
  }
  return validatePayload(await resp.json());
}

export function audioUrl(id: string): string {
  return `/api/audio/${encodeURIComponent(id)}`;
}
