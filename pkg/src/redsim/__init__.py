"""Rejection-based event-driven simulation of non-Markovian agents on networks."""

from .bounds import ConstantBound, TimeVaryingBound
from .engine import (
    COMPILED_AVAILABLE,
    Trajectory,
    baseline_run,
    naive_run,
    redsim_run,
    run,
    run_replications,
)
from .errors import BoundViolationError, EdgeListError
from .models import (
    AgentModel,
    FadingSIS,
    MarkovianSIS,
    NeighborView,
    WeibullVoter,
    make_model,
    sis_fading,
    sis_markovian,
    voter_weibull,
)
from .network import (
    ContactNetwork,
    build_network,
    configuration_model,
    read_edge_list,
    sample_powerlaw_degrees,
    write_edge_list,
)
from .sampling import RngStream

__version__ = "0.1.0"
