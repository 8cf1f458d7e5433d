"""Migration-timing game between a VM-migrating defender and a co-location attacker."""
from .errors import (BadDistribution, InvalidConfig, InvalidInterval, MaxItersExceeded,
                     MTDError, NegativeCost, NegativeInput, NoEquilibriumFound,
                     NonMonotoneReward, OutOfDomain, QuadratureNotConverged,
                     RequiresZeroLambdaMin, WrongInstantiation)
from .model import (CustomCollocation, CustomReward, ExponentialCollocation, Game,
                    GameConfig, PolynomialReward, config_from_dict, load_config,
                    validate_config)
from .payoff import (PayoffPoint, collocation_probability, expected_attacker_payoff,
                     expected_defender_payoff, expected_payoffs, realized_attacker_payoff,
                     realized_defender_payoff)
from .response import (BestResponse, ReactionCurve, attacker_best_response,
                       best_response, defender_best_response, reaction_curve)
from .analysis import (attacker_cost_threshold, attacker_second_derivative,
                       backoff_equilibrium_check, corollary_check, defender_cost_threshold,
                       defender_second_derivative, general_concavity_report,
                       general_monotonicity_thresholds, theorem2_certificate)
from .nash import Equilibrium, EquilibriumReport, br_iteration, find_equilibria, verify_epsilon_ne
from .montecarlo import SimulationReport, simulate_strategy_pair, strategy_table

__version__ = "0.1.0"
