"""latcirc: gate circuits over finite lattices, with a brute-force
discretized metric-space oracle for their families of definable sets."""

from . import circuit, finspace, gate, order_core, tower  # noqa: F401

__version__ = "0.1.0"
