"""Planning and scheduling optimizer for a community energy storage unit
in a radial low-voltage network.

The package is organised around a pure computation core (netmodel, scenario,
qpcore, cesopt, planner, validator), a FastAPI service exposing it, and a
thin CLI client on top of the service layer.
"""

__version__ = "0.1.0"
