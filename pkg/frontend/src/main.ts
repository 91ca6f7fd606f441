// DOM wiring: render loop, controls, and the SSE subscription.

import { ApiClient } from "./api.js";
import { renderCards } from "./cards.js";
import { renderPriceChart } from "./chart.js";
import { weiToEth } from "./format.js";
import { Store } from "./store.js";

const api = new ApiClient("");
const store = new Store(api);

const app = document.querySelector<HTMLDivElement>("#app")!;
app.innerHTML = `
	<header>
		<h1>velocity</h1>
		<span id="connection" class="connection connecting">connecting</span>
		<span id="height"></span>
	</header>
	<div id="toasts"></div>
	<section id="chart-box"></section>
	<section id="controls">
		<label>account
			<select id="account"></select>
		</label>
		<span id="balance"></span>
		<label>deposit (wei)
			<input id="deposit" size="22" title="advanced: anything but the entry margin is rejected"/>
		</label>
		<button id="go-long">place long</button>
		<button id="go-short">place short</button>
		<span id="manual-controls" hidden>
			<button id="step-1">step 1 block</button>
			<button id="step-5">step 5 blocks</button>
			<button id="sweep">sweep</button>
		</span>
	</section>
	<section id="cards"></section>
`;

const els = {
	connection: document.querySelector<HTMLSpanElement>("#connection")!,
	height: document.querySelector<HTMLSpanElement>("#height")!,
	toasts: document.querySelector<HTMLDivElement>("#toasts")!,
	chart: document.querySelector<HTMLElement>("#chart-box")!,
	account: document.querySelector<HTMLSelectElement>("#account")!,
	balance: document.querySelector<HTMLSpanElement>("#balance")!,
	deposit: document.querySelector<HTMLInputElement>("#deposit")!,
	manual: document.querySelector<HTMLSpanElement>("#manual-controls")!,
	cards: document.querySelector<HTMLElement>("#cards")!,
};

function render(): void {
	const { status, balances, options, prices, account, toasts, connection } =
		store.state;
	els.connection.textContent = connection;
	els.connection.className = `connection ${connection}`;
	if (status) {
		els.height.textContent = `block ${status.height} (${status.mode} mode)`;
		els.manual.hidden = status.mode !== "manual";
		if (!els.deposit.value) els.deposit.value = status.entryDeposit;
		if (els.account.options.length !== status.accounts.length) {
			els.account.innerHTML = status.accounts
				.map((a) => `<option value="${a}">${a}</option>`)
				.join("");
		}
		els.account.value = account;
	}
	els.balance.textContent = balances[account] ? weiToEth(balances[account]) : "";
	els.toasts.innerHTML = toasts
		.map((t) => `<div class="toast ${t.kind}">${t.text}</div>`)
		.join("");
	els.chart.innerHTML = renderPriceChart(prices, options);
	els.cards.innerHTML = renderCards(options);
}

store.onChange(render);

els.account.addEventListener("change", () => store.setAccount(els.account.value));
document.querySelector("#go-long")!.addEventListener("click", () =>
	store.placePosition("Long", els.deposit.value || undefined));
document.querySelector("#go-short")!.addEventListener("click", () =>
	store.placePosition("Short", els.deposit.value || undefined));
document.querySelector("#step-1")!.addEventListener("click", () => store.step(1));
document.querySelector("#step-5")!.addEventListener("click", () => store.step(5));
document.querySelector("#sweep")!.addEventListener("click", () => store.sweep());

function connectStream(): void {
	const source = new EventSource("/events");
	for (const name of ["hello", "block", "price", "option", "settlement"]) {
		source.addEventListener(name, (event) => {
			void store.handleStream({
				name,
				payload: JSON.parse((event as MessageEvent).data),
			});
		});
	}
	source.onerror = () => {
		store.markLost();
		source.close();
		// Reconnect and refetch: the stream only pushes deltas.
		setTimeout(() => {
			void store.refresh().catch(() => undefined);
			connectStream();
		}, 1500);
	};
}

setInterval(() => {
	const { status, lastEventAt, connection } = store.state;
	if (status?.mode === "auto" && connection === "live" &&
		Date.now() - lastEventAt > 10_000) {
		store.markStale();
	}
}, 2_000);

void store.bootstrap().then(
	() => connectStream(),
	(err) => store.toast("error", `failed to load session: ${String(err)}`),
);
