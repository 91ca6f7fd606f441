// REST client for the trading service. The fetch function is injectable so
// tests can drive the full flow without a server.

import type {
	ApiErrorBody,
	FeedRow,
	OptionView,
	StatusInfo,
	SweepResult,
} from "./types.js";

export class ApiError extends Error {
	constructor(
		readonly status: number,
		readonly body: ApiErrorBody,
	) {
		super(body.message);
	}
}

export type FetchLike = (url: string, init?: RequestInit) => Promise<Response>;

export class ApiClient {
	constructor(
		private readonly base: string = "",
		private readonly fetchFn: FetchLike = (url, init) => fetch(url, init),
	) {}

	private async request<T>(path: string, init?: RequestInit): Promise<T> {
		const response = await this.fetchFn(this.base + path, init);
		const text = await response.text();
		const body = text ? JSON.parse(text) : null;
		if (!response.ok) {
			const error: ApiErrorBody =
				body && typeof body === "object" && "message" in body
					? (body as ApiErrorBody)
					: { code: `HTTP_${response.status}`, message: text || response.statusText };
			throw new ApiError(response.status, error);
		}
		return body as T;
	}

	status(): Promise<StatusInfo> {
		return this.request<StatusInfo>("/status");
	}

	accounts(): Promise<Record<string, string>> {
		return this.request<Record<string, string>>("/accounts");
	}

	prices(from: number, to: number): Promise<FeedRow[]> {
		return this.request<FeedRow[]>(`/prices?from=${from}&to=${to}`);
	}

	options(): Promise<OptionView[]> {
		return this.request<OptionView[]>("/options");
	}

	option(id: number): Promise<OptionView> {
		return this.request<OptionView>(`/options/${id}`);
	}

	placePosition(account: string, side: "Long" | "Short", deposit: string) {
		return this.request<{ optionId: number; block: number }>("/positions", {
			method: "POST",
			headers: { "content-type": "application/json" },
			body: JSON.stringify({ account, side, deposit }),
		});
	}

	step(blocks: number): Promise<{ height: number }> {
		return this.request<{ height: number }>("/admin/step", {
			method: "POST",
			headers: { "content-type": "application/json" },
			body: JSON.stringify({ blocks }),
		});
	}

	sweep(): Promise<SweepResult> {
		return this.request<SweepResult>("/admin/sweep", { method: "POST" });
	}
}
