"""``example4``: print the canonical worked-example config"""

from __future__ import annotations

from ..models.config import example4_config
from ..models.reports import render_json
from .check import OutOption
from .common import handle_exceptions, write_output


@handle_exceptions("writing the example config")
def example4(out: OutOption = None) -> None:
    """Emit the two-dimensional worked example as a system config."""
    write_output(render_json(example4_config()), out)
