"""Figure rendering for the experiment CSV contract."""

from .figures import AXIS_LABELS, FigureSpec, StyleError, render
from .schema import SCHEMAS, SchemaError, load_table, scenario_columns

__version__ = "0.1.0"

__all__ = [
    "AXIS_LABELS",
    "FigureSpec",
    "SCHEMAS",
    "SchemaError",
    "StyleError",
    "load_table",
    "render",
    "scenario_columns",
    "__version__",
]
