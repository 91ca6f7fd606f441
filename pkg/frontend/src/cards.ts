// Option cards: every number shown comes from the API verbatim (or through
// display formatting); payouts render only what the service reported.

import { blocksRemainingLabel, weiToEth } from "./format.js";
import type { OptionView } from "./types.js";

function esc(text: string): string {
	return text.replace(/&/g, "&amp;").replace(/</g, "&lt;").replace(/>/g, "&gt;");
}

export function renderOptionCard(option: OptionView): string {
	const rows: string[] = [
		`<div class="card-title">#${option.optionId} ${option.side} <span class="owner">${esc(option.owner)}</span></div>`,
		`<div class="card-row">entry price K1: <b>${esc(option.startPrice)}</b> (collar &plusmn;${(option.marginPoints / 100).toFixed(2)})</div>`,
		`<div class="card-row">deposit: ${weiToEth(option.amount)}</div>`,
		`<div class="card-row">blocks ${option.startBlock} &rarr; ${option.expiryBlock}</div>`,
	];
	if (option.closed) {
		const legs = option.final?.payouts ?? [];
		const endPrice = option.final?.endPrice;
		rows.push(`<div class="card-row settled">settled${endPrice ? ` at ${esc(endPrice)}` : ""}</div>`);
		if (legs.length === 0) {
			rows.push(`<div class="card-row">no payouts recorded</div>`);
		}
		for (const leg of legs) {
			rows.push(
				`<div class="card-row payout">&rarr; ${esc(leg.to)}: <b>${weiToEth(leg.amount)}</b> (block ${leg.block})</div>`,
			);
		}
	} else {
		rows.push(`<div class="card-row countdown">${blocksRemainingLabel(option.blocksRemaining)}</div>`);
		if (option.preview) {
			rows.push(
				`<div class="card-row preview">preview at ${esc(option.preview.price)} (block ${option.preview.asOfBlock}, non-binding):</div>`,
				`<div class="card-row preview">long ${weiToEth(option.preview.payLong)} / short ${weiToEth(option.preview.payShort)}</div>`,
			);
		}
	}
	const state = option.closed ? "closed" : "open";
	return `<div class="option-card ${state}" data-option="${option.optionId}">${rows.join("")}</div>`;
}

export function renderCards(options: OptionView[]): string {
	if (options.length === 0) {
		return `<div class="empty">no positions yet</div>`;
	}
	return options
		.slice()
		.sort((a, b) => b.optionId - a.optionId)
		.map(renderOptionCard)
		.join("");
}
