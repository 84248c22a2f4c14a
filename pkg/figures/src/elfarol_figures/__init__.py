"""Publication-style figure rendering for the market-entrance simulator.

Consumes only the nine documented plot-data CSV schemas; never
recomputes statistics.
"""
from .render import KINDS, RENDERERS, render_all
from .schemas import SCHEMAS, SchemaError, load_validated

__all__ = [
    "KINDS",
    "RENDERERS",
    "SCHEMAS",
    "SchemaError",
    "load_validated",
    "render_all",
]
