// Wire types mirroring the service API. Money is always a wei decimal string
// and prices are fixed-point strings with 2 decimal places; the dashboard
// never does business math on them, only formatting.

export interface StatusInfo {
	height: number;
	timestamp: number;
	mode: "manual" | "auto";
	firstBlock: number;
	lastBlock: number;
	entryDeposit: string;
	marginPoints: number;
	expiryBlocks: number;
	pair: string;
	accounts: string[];
}

export interface FeedRow {
	blockNumber: number;
	timestamp: number;
	usdbtc: string;
	btceth: string;
	btcetc: string;
	btcdoge: string;
}

export interface PayoutPreview {
	payLong: string;
	payShort: string;
	price: string;
	asOfBlock: number;
	binding: false;
}

export interface PayoutLeg {
	to: string;
	amount: string;
	block: number;
}

export interface OptionView {
	optionId: number;
	side: "Long" | "Short";
	owner: string;
	amount: string;
	startBlock: number;
	expiryBlock: number;
	blocksRemaining: number;
	startPrice: string;
	marginPoints: number;
	closed: boolean;
	preview?: PayoutPreview;
	final?: { payouts: PayoutLeg[]; endPrice?: string };
}

export interface ApiErrorBody {
	code: string;
	message: string;
	firstBlock?: number;
	lastBlock?: number;
}

export interface SweepResult {
	scanned: number;
	settled: number;
	failed: { optionId: number; error: string }[];
}

export interface PricePoint {
	block: number;
	price: string;
}
