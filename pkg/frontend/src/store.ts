// Application state and the controller around it. No DOM here: main.ts
// subscribes to change notifications and renders. State changes only after
// receipt-backed API responses or server-sent events (no optimistic updates).

import { ApiClient, ApiError } from "./api.js";
import type { OptionView, PricePoint, StatusInfo } from "./types.js";

export interface Toast {
	kind: "error" | "info";
	text: string;
}

export interface StreamMessage {
	name: string;
	payload: Record<string, unknown>;
}

export interface AppState {
	status: StatusInfo | null;
	balances: Record<string, string>;
	options: OptionView[];
	prices: PricePoint[];
	account: string;
	toasts: Toast[];
	connection: "connecting" | "live" | "stale" | "lost";
	lastEventAt: number;
}

const MAX_POINTS = 400;

export class Store {
	state: AppState = {
		status: null,
		balances: {},
		options: [],
		prices: [],
		account: "",
		toasts: [],
		connection: "connecting",
		lastEventAt: 0,
	};

	private listeners: (() => void)[] = [];

	constructor(
		readonly api: ApiClient,
		private readonly now: () => number = () => Date.now(),
	) {}

	onChange(listener: () => void): void {
		this.listeners.push(listener);
	}

	private notify(): void {
		for (const listener of this.listeners) listener();
	}

	toast(kind: Toast["kind"], text: string): void {
		this.state.toasts = [...this.state.toasts.slice(-4), { kind, text }];
		this.notify();
	}

	/** Initial load: status, balances, price history, open options. */
	async bootstrap(): Promise<void> {
		const status = await this.api.status();
		this.state.status = status;
		if (!this.state.account) {
			this.state.account =
				status.accounts.find((a) => !["miner", "oracle", "pricefeed-owner",
					"sweeper", "treasury"].includes(a)) ?? status.accounts[0] ?? "";
		}
		this.state.balances = await this.api.accounts();
		if (status.lastBlock >= status.firstBlock && status.firstBlock > 0) {
			const from = Math.max(status.firstBlock, status.lastBlock - MAX_POINTS + 1);
			const feeds = await this.api.prices(from, status.lastBlock);
			this.state.prices = feeds.map((f) => ({
				block: f.blockNumber,
				price: f[status.pair as keyof typeof f] as string,
			}));
		}
		this.state.options = await this.api.options();
		this.notify();
	}

	async refresh(): Promise<void> {
		const status = await this.api.status();
		this.state.status = status;
		this.state.balances = await this.api.accounts();
		this.state.options = await this.api.options();
		this.notify();
	}

	async placePosition(side: "Long" | "Short", deposit?: string): Promise<void> {
		const account = this.state.account;
		const amount = deposit ?? this.state.status?.entryDeposit ?? "0";
		try {
			const result = await this.api.placePosition(account, side, amount);
			this.toast("info", `option #${result.optionId} opened in block ${result.block}`);
			await this.refresh();
		} catch (err) {
			this.surface(err);
		}
	}

	async step(blocks: number): Promise<void> {
		try {
			await this.api.step(blocks);
			await this.refresh();
		} catch (err) {
			this.surface(err);
		}
	}

	async sweep(): Promise<void> {
		try {
			const report = await this.api.sweep();
			this.toast("info", `sweep: settled ${report.settled} of ${report.scanned} open`);
			await this.refresh();
		} catch (err) {
			this.surface(err);
		}
	}

	/** API and network failures are surfaced, never swallowed. */
	private surface(err: unknown): void {
		if (err instanceof ApiError) {
			this.toast("error", err.body.message);
		} else {
			this.toast("error", `request failed: ${String(err)}`);
		}
	}

	/** Handle one server-sent event. */
	async handleStream(message: StreamMessage): Promise<void> {
		this.state.lastEventAt = this.now();
		this.state.connection = "live";
		switch (message.name) {
			case "price": {
				const block = Number(message.payload.blockNumber);
				const pair = this.state.status?.pair ?? "btceth";
				const price = String(message.payload[pair] ?? "");
				if (price) {
					const points = this.state.prices.filter((p) => p.block !== block);
					points.push({ block, price });
					points.sort((a, b) => a.block - b.block);
					this.state.prices = points.slice(-MAX_POINTS);
				}
				this.notify();
				break;
			}
			case "block": {
				if (this.state.status) {
					this.state.status = {
						...this.state.status,
						height: Number(message.payload.number),
					};
				}
				this.state.options = this.state.options.map((o) =>
					o.closed
						? o
						: {
								...o,
								blocksRemaining: Math.max(
									0,
									o.expiryBlock - Number(message.payload.number),
								),
							},
				);
				this.notify();
				break;
			}
			case "option":
			case "settlement":
				// Re-fetch: cards render only receipt-backed server data.
				await this.refresh();
				break;
			default:
				break;
		}
	}

	markStale(): void {
		if (this.state.connection === "live") {
			this.state.connection = "stale";
			this.notify();
		}
	}

	markLost(): void {
		this.state.connection = "lost";
		this.notify();
	}

	setAccount(account: string): void {
		this.state.account = account;
		this.notify();
	}
}
