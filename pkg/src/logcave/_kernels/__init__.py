"""Edge-weight kernel selection.

The compiled extension is preferred when it built; the numpy implementation
is the fallback and the reference.  Set ``LOGCAVE_KERNEL=pure`` (or
``compiled``) to force a backend.
"""

import os

_choice = os.environ.get("LOGCAVE_KERNEL", "").strip().lower()

if _choice == "pure":
    from . import _pure as _backend
elif _choice == "compiled":
    from . import _core as _backend          # ImportError here is deliberate
else:
    try:
        from . import _core as _backend
    except ImportError:
        from . import _pure as _backend

BACKEND = _backend.BACKEND
layer_weights_real = _backend.layer_weights_real
layer_weights_int = _backend.layer_weights_int
layer_step_real = _backend.layer_step_real
layer_step_int = _backend.layer_step_int


def available_backends():
    names = ["pure"]
    try:
        from . import _core  # noqa: F401
        names.append("compiled")
    except ImportError:
        pass
    return names
