from .attacks import FIXTURES, AttackOutcome, rising_ticks, run_attack
from .checks import (CheckResult, check_cap, check_conservation, check_escrow,
                     check_fidelity)
from .fixtures import (CallbackExerciser, GasHog, MarketEntrant,
                       ReentrantReceiver, ThrowingReceiver)
from .scenario import (DEFAULT_CHECKS, RunResult, Scenario, load_scenario,
                       parse_fault, run_scenario, scenario_from_dict)
from .sim import (ENTRY_GAS_LIMIT, EXERCISE_GAS_LIMIT, MARKET_CONTRACT,
                  ORACLE_ACCOUNT, PRICEFEED_CONTRACT, PRICEFEED_OWNER,
                  SWEEPER_ACCOUNT, TREASURY_ACCOUNT, Sim, SimConfig,
                  contract_address, replay_log)
from .sweeper import SweepReport, collect_sweep, plan_sweep, run_sweep

__all__ = [
    "AttackOutcome", "CallbackExerciser", "CheckResult", "DEFAULT_CHECKS",
    "ENTRY_GAS_LIMIT", "EXERCISE_GAS_LIMIT", "FIXTURES", "GasHog",
    "MARKET_CONTRACT", "MarketEntrant", "ORACLE_ACCOUNT", "PRICEFEED_CONTRACT",
    "PRICEFEED_OWNER", "ReentrantReceiver", "RunResult", "SWEEPER_ACCOUNT",
    "Scenario", "Sim", "SimConfig", "SweepReport", "TREASURY_ACCOUNT",
    "ThrowingReceiver", "check_cap", "check_conservation", "check_escrow",
    "check_fidelity", "collect_sweep", "contract_address", "load_scenario",
    "parse_fault", "plan_sweep", "replay_log", "rising_ticks", "run_attack",
    "run_scenario", "run_sweep", "scenario_from_dict",
]
