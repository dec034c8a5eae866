import time

from .types import *

TRACE_COLUMNS = [
    "t",
    "volume",
    "sup_II2",
    "min_r2",
    "max_r2",
    "theta",
    "lemma1_resid",
    "lemma2_resid",
]
"""Columns of the trace CSV, in order."""

EXTRA_COLUMNS = ["step", "dt", "max_f", "area_rate_resid"]
"""Diagnostic columns appended after the standard ones."""


class TraceEventBase(BaseModel):
    """A base class for trace events."""

    name: str
    """The name of the event."""
    time_stamp: float = None  # type: ignore
    """The wall-clock time stamp of the event."""

    @model_validator(mode="after")
    def _check_time_stamp(self) -> "TraceEventBase":
        if self.time_stamp is None:
            # Set the time stamp to the current time if it is not set
            self.time_stamp = time.time()  # type: ignore
        return self


class FlowEvent(TraceEventBase):
    """An event along a flow run, e.g. start, stop or blow-up."""

    t: float
    """Flow time of the event."""
    data: Dict[str, Any] = Field(default_factory=dict)
    """Event payload."""


class TraceRow(BaseModel):
    """One row of flow diagnostics."""

    step: int
    """Step index at which the row was recorded."""
    t: float
    """Flow time."""
    dt: float = 0.0
    """Step size used to reach this row."""
    volume: float
    """Volume of M_t."""
    sup_II2: float
    """Maximum of |II|^2 over the nodes."""
    min_r2: float
    """Minimum of r^2 over the nodes."""
    max_r2: float
    """Maximum of r^2 over the nodes."""
    max_f: float
    """Maximum of r^2 + 2 m t over the nodes."""
    theta: Optional[float] = None
    """Huisken functional, when a blow-up time is available."""
    lemma1_resid: float
    """Maximum of |Lap r^2 - 2(g(H, F) + m)|."""
    lemma2_resid: Optional[float] = None
    """Maximum of |d_t r^2 - 2 g(V, F)| over the last step."""
    area_rate_resid: Optional[float] = None
    """Relative mismatch of dVol/dt against -int |H|^2 over the last step."""

    def values(self, columns: Sequence[str]) -> List[Any]:
        """Row values in the given column order."""
        return [getattr(self, c) for c in columns]
