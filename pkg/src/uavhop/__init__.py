"""Power, rate and hop-count planning for multi-hop ground relays observed
by a UAV, under either a secrecy outage or a covertness constraint."""
from .channel import (
    HopChannel,
    NetworkScenario,
    connection_probability,
    hop_channels,
    los_probability,
    secrecy_outage_probability,
)
from .config import ConfigError, RunConfig, dump_config, load_config, parse_config
from .covert import (
    CovertConstraints,
    CovertSolution,
    allocate_covert_power,
    equal_power_covert,
    evaluate_covert,
    kkt_residuals,
    search_hops_covert,
)
from .errors import ConvergenceError, InfeasibleError
from .estimators import CovertHopPlanner, SecrecyHopPlanner
from .numerics import RootBracket, bisect, lambert_w0, positive_cubic_root
from .secrecy import (
    SecrecyConstraints,
    SecrecySolution,
    allocate_secrecy_power,
    equal_power_secrecy,
    evaluate_secrecy,
    search_hops_secrecy,
)

__version__ = "0.1.0"

__all__ = [
    "ConfigError", "ConvergenceError", "CovertConstraints", "CovertHopPlanner",
    "CovertSolution", "HopChannel", "InfeasibleError", "NetworkScenario", "RootBracket",
    "RunConfig", "SecrecyConstraints", "SecrecyHopPlanner", "SecrecySolution",
    "allocate_covert_power", "allocate_secrecy_power", "bisect", "connection_probability",
    "dump_config", "equal_power_covert", "equal_power_secrecy", "evaluate_covert",
    "evaluate_secrecy", "hop_channels", "kkt_residuals", "lambert_w0", "load_config",
    "los_probability", "parse_config", "positive_cubic_root", "search_hops_covert",
    "search_hops_secrecy", "secrecy_outage_probability",
]
