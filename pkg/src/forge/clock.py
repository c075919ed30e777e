"""Time source used for every persisted timestamp.

FORGE_FAKE_TIME (a unix epoch, float) freezes the clock, which makes
metadata files reproducible across runs; session replay relies on it.
"""

import os
import time


def now() -> int:
    fake = os.environ.get("FORGE_FAKE_TIME")
    if fake is not None:
        return int(float(fake))
    return int(time.time())
