"""Two-layer (path, then velocity) receding-horizon planner for on-road driving."""

__version__ = "0.1.0"
