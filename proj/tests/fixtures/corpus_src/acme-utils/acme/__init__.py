"""Small helpers shared across acme services."""

from .strings import slugify, truncate
from .timing import Timer

__all__ = ["slugify", "truncate", "Timer"]
__version__ = "0.4.1"
