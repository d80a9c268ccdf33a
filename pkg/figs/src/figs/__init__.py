"""Figure rendering for scenario outputs: CSV/JSON tables in, images out."""

__version__ = "0.1.0"

from .render import RENDERERS, render  # noqa: F401
from .spec import FigureSpec, SchemaError  # noqa: F401
