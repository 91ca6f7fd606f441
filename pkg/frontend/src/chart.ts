// SVG price chart: one point per block, a collar band of +/- R around each
// open option's entry price spanning entry to expiry, and expiry tick marks.
// Pure string rendering so the chart is trivially testable.

import { priceToNumber } from "./format.js";
import type { OptionView, PricePoint } from "./types.js";

export interface ChartGeometry {
	width: number;
	height: number;
	padding: number;
}

const DEFAULT_GEOMETRY: ChartGeometry = { width: 860, height: 300, padding: 36 };

interface Scale {
	x(block: number): number;
	y(price: number): number;
}

function makeScale(
	points: PricePoint[],
	bandEdges: number[],
	geometry: ChartGeometry,
): Scale {
	const blocks = points.map((p) => p.block);
	const prices = points.map((p) => priceToNumber(p.price)).concat(bandEdges);
	const minBlock = Math.min(...blocks);
	const maxBlock = Math.max(...blocks);
	const minPrice = Math.min(...prices);
	const maxPrice = Math.max(...prices);
	const blockSpan = Math.max(1, maxBlock - minBlock);
	const priceSpan = Math.max(0.01, maxPrice - minPrice);
	const { width, height, padding } = geometry;
	return {
		x: (block) => padding + ((block - minBlock) / blockSpan) * (width - 2 * padding),
		y: (price) => height - padding - ((price - minPrice) / priceSpan) * (height - 2 * padding),
	};
}

export function collarBand(option: OptionView): { low: number; high: number } {
	const k1 = priceToNumber(option.startPrice);
	const r = option.marginPoints / 100;
	return { low: k1 - r, high: k1 + r };
}

export function renderPriceChart(
	points: PricePoint[],
	options: OptionView[],
	geometry: ChartGeometry = DEFAULT_GEOMETRY,
): string {
	const { width, height } = geometry;
	if (points.length === 0) {
		return `<svg class="chart" viewBox="0 0 ${width} ${height}"><text x="${width / 2}" y="${height / 2}" text-anchor="middle" class="chart-empty">waiting for prices</text></svg>`;
	}

	const open = options.filter((o) => !o.closed);
	const edges = open.flatMap((o) => {
		const band = collarBand(o);
		return [band.low, band.high];
	});
	const scale = makeScale(points, edges, geometry);

	const parts: string[] = [];
	for (const option of open) {
		const band = collarBand(option);
		const x1 = scale.x(option.startBlock);
		const x2 = scale.x(option.expiryBlock);
		const yTop = scale.y(band.high);
		const yBottom = scale.y(band.low);
		parts.push(
			`<rect class="collar" data-option="${option.optionId}" x="${x1.toFixed(1)}" y="${yTop.toFixed(1)}" width="${(x2 - x1).toFixed(1)}" height="${(yBottom - yTop).toFixed(1)}"/>`,
			`<line class="entry-price" x1="${x1.toFixed(1)}" y1="${scale.y(priceToNumber(option.startPrice)).toFixed(1)}" x2="${x2.toFixed(1)}" y2="${scale.y(priceToNumber(option.startPrice)).toFixed(1)}"/>`,
			`<line class="expiry-marker" data-option="${option.optionId}" x1="${x2.toFixed(1)}" y1="${scale.y(band.high).toFixed(1)}" x2="${x2.toFixed(1)}" y2="${scale.y(band.low).toFixed(1)}"/>`,
		);
	}

	const path = points
		.map((p) => `${scale.x(p.block).toFixed(1)},${scale.y(priceToNumber(p.price)).toFixed(1)}`)
		.join(" ");
	parts.push(`<polyline class="price-line" fill="none" points="${path}"/>`);

	const last = points[points.length - 1];
	parts.push(
		`<text class="chart-label" x="${width - 8}" y="16" text-anchor="end">block ${last.block}: ${last.price}</text>`,
	);
	return `<svg class="chart" viewBox="0 0 ${width} ${height}">${parts.join("")}</svg>`;
}
