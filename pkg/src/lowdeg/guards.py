"""Size guards for enumeration-heavy operations.

Every enumeration in this package is exponential in some parameter; the
guards keep default runs at desk scale.  Setting the environment variable
``LOWDEG_GUARD_OVERRIDE=1`` lifts all guards (documented footgun).
"""

import os


class GuardError(RuntimeError):
    """A desk-scale size guard would be exceeded."""


def override_active() -> bool:
    return os.environ.get("LOWDEG_GUARD_OVERRIDE") == "1"


def guard(condition: bool, message: str) -> None:
    """Raise GuardError unless `condition` holds or the override is set."""
    if not condition and not override_active():
        raise GuardError(f"{message} (set LOWDEG_GUARD_OVERRIDE=1 to lift)")
