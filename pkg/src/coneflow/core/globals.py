"""Process-wide flags and counters."""

from threading import Lock

from .types import *

global_vars = Namespace()
global_vars.lock = Lock()
global_vars.initialized = False
global_vars.run_count = 0
"""Flow runs started in this process."""
global_vars.step_count = 0
"""Time steps taken by all flow runs in this process."""


def inc_global(name: str, delta: Union[int, float] = 1) -> Any:
    """Increment a counter under the lock and return the new value."""
    with global_vars.lock:
        value = getattr(global_vars, name, 0) + delta
        setattr(global_vars, name, value)
    return value


def next_run_id(prefix: str = "run") -> str:
    """A process-unique label such as `run-0003` for trace metadata."""
    return f"{prefix}-{inc_global('run_count'):04d}"
