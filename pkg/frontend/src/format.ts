// Display-only formatting. All numbers round-trip from API strings; the only
// arithmetic here is unit placement for readability.

const WEI_PER_ETH = 10n ** 18n;

/** Render a wei decimal string as an ETH amount with up to 4 fractional digits. */
export function weiToEth(wei: string): string {
	const negative = wei.startsWith("-");
	const digits = negative ? wei.slice(1) : wei;
	if (!/^\d+$/.test(digits)) return wei;
	const value = BigInt(digits);
	const whole = value / WEI_PER_ETH;
	const frac = value % WEI_PER_ETH;
	const frac4 = (frac * 10000n) / WEI_PER_ETH;
	const base = frac4 === 0n
		? `${whole}`
		: `${whole}.${frac4.toString().padStart(4, "0").replace(/0+$/, "")}`;
	return `${negative ? "-" : ""}${base} ETH`;
}

/** Countdown label for an option card. */
export function blocksRemainingLabel(remaining: number): string {
	if (remaining <= 0) return "expired";
	return remaining === 1 ? "1 block left" : `${remaining} blocks left`;
}

/** Parse a 2dp price string into a float strictly for chart geometry. */
export function priceToNumber(price: string): number {
	const value = Number(price);
	return Number.isFinite(value) ? value : 0;
}

export function formatTimestamp(seconds: number): string {
	return new Date(seconds * 1000).toISOString().replace("T", " ").slice(0, 19);
}
