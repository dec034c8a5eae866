from threading import Lock

import numpy as np

from ..core.config import configs
from ..core.io import dump_csv
from ..core.trace import EXTRA_COLUMNS, TRACE_COLUMNS, FlowEvent, TraceRow
from ..core.types import *


class FlowTrace:
    """Append-only record of a flow run.

    Holds the diagnostic rows, the events, node snapshots taken at rows, and
    a light per-step series of (t, sup |II|^2, min r^2) used to estimate the
    blow-up time.
    """

    def __init__(self, m: int, meta: Optional[Dict[str, Any]] = None) -> None:
        """Initialize an empty trace.

        Args:
            m: Dimension of the evolving manifold.
            meta: Free-form metadata stored with the trace.
        """
        self.m = m
        self.meta: Dict[str, Any] = dict(meta or {})
        self._rows: List[TraceRow] = []
        self._events: List[FlowEvent] = []
        self._snapshots: Dict[int, Any] = {}
        self._steps: List[Tuple[float, float, float]] = []
        self._lock = Lock()

    @property
    def rows(self) -> List[TraceRow]:
        """The diagnostic rows in time order."""
        return self._rows

    @property
    def events(self) -> List[FlowEvent]:
        """The events in time order."""
        return self._events

    @property
    def snapshots(self) -> Dict[int, Any]:
        """Immersions stored at trace rows, keyed by row index."""
        return self._snapshots

    def append_row(self, row: TraceRow, snapshot: Any = None) -> None:
        """Append a row, with the immersion at that row if given."""
        with self._lock:
            if self._rows and row.t <= self._rows[-1].t:
                raise ValueError(f"trace rows must advance in time, got t = {row.t}")
            if snapshot is not None:
                self._snapshots[len(self._rows)] = snapshot
            self._rows.append(row)
        logger.debug(f"trace row {row}")

    def append_event(self, event: FlowEvent) -> None:
        """Append an event."""
        with self._lock:
            self._events.append(event)
        logger.info(f"flow event '{event.name}' at t = {event.t:.6g} {event.data}")

    def record_step(self, t: float, sup_II2: float, min_r2: float) -> None:
        """Record the per-step series."""
        self._steps.append((t, sup_II2, min_r2))

    def step_series(self) -> FloatArray:
        """Per-step series as an array with columns (t, sup |II|^2, min r^2)."""
        return np.asarray(self._steps, dtype=float).reshape(-1, 3)

    def column(self, name: str) -> FloatArray:
        """One column of the rows as an array; missing values are NaN."""
        return np.array(
            [np.nan if (v := getattr(row, name)) is None else v for row in self._rows],
            dtype=float,
        )

    def find_event(self, name: str) -> Optional[FlowEvent]:
        """The last event with the given name, if any."""
        for event in reversed(self._events):
            if event.name == name:
                return event
        return None

    def set_theta(self, index: int, theta: float) -> None:
        """Fill the Huisken functional of a row after the fact."""
        with self._lock:
            self._rows[index] = self._rows[index].model_copy(update={"theta": theta})

    def to_csv(self, file: str, extra: bool = False) -> None:
        """Write the trace CSV.

        Args:
            file: Output path.
            extra: Whether to append the diagnostic columns
                `step, dt, max_f, area_rate_resid`.
        """
        columns = TRACE_COLUMNS + (EXTRA_COLUMNS if extra else [])
        dump_csv(
            columns,
            (row.values(columns) for row in self._rows),
            file,
            float_format=configs.getattrs("settings.output.float_format"),
        )

    def __len__(self) -> int:
        return len(self._rows)
