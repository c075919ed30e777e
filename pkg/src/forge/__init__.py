"""Job management front-end: define, submit, monitor, split, and merge
computational jobs across interchangeable execution backends.

The public surface is the Forge facade plus the error taxonomy; the CLI
(`forge`) and the HTTP service are thin adapters over the same facade.
"""

from .api import Forge, store_root_from
from .errors import ForgeError

__version__ = "0.1.0"

__all__ = ["Forge", "ForgeError", "store_root_from", "__version__"]
