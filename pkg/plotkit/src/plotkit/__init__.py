"""Figure rendering for pedbrake CSV logs."""

__version__ = "0.1.0"

from .csvio import SchemaError, read_columns  # noqa: F401
from .figures import KINDS, FigureSpec, RenderResult, render  # noqa: F401
