"""SVG figure rendering for embedded-dynamics simulation artifacts."""

from .render import (
    KINDS,
    InputError,
    read_csv,
    render,
    render_speckle_overlay,
    render_squeezing_stack,
    render_variance_vs_dim,
)

__version__ = "0.1.0"
