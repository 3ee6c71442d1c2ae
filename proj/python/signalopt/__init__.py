"""Signal timing optimisation with equilibrium traffic assignment."""

import json

from . import _core
from ._core import InputError, Network, PreconditionError, link_travel_time

__version__ = _core.__version__

TESTBED_INCIDENT = "I4-I2:T"
TESTBED_ROUTE_PAIR = ("7", "3")

__all__ = [
    "InputError",
    "Network",
    "PreconditionError",
    "assign",
    "link_travel_time",
    "optimize",
    "run_scenarios",
]


def _plan_text(plan):
    if plan is None or isinstance(plan, str):
        return plan
    return json.dumps(plan)


def assign(network, plan=None, gap=1e-4, max_iterations=500):
    """Equilibrium flows for a fixed plan (list of {junction, durations_s})."""
    return json.loads(_core.assign(network, _plan_text(plan), gap, max_iterations))


def optimize(network, population=75, generations=20, p_crossover=0.8, p_mutation=0.1,
             seed=42, gap=1e-4, threads=1):
    return json.loads(_core.optimize(network, population, generations, p_crossover,
                                     p_mutation, seed, gap, threads))


def run_scenarios(network=None, incident_link=None, lanes_blocked=1, population=75,
                  generations=20, seed=42, route_pair=None, threads=1):
    """All three scenarios. Defaults to the built-in testbed and its incident."""
    if network is None:
        network = Network.testbed()
        incident_link = incident_link or TESTBED_INCIDENT
        route_pair = route_pair or TESTBED_ROUTE_PAIR
    if incident_link is None:
        raise ValueError("incident_link is required for a custom network")
    return json.loads(_core.run_scenarios(network, incident_link, lanes_blocked, population,
                                          generations, seed, route_pair, threads))
