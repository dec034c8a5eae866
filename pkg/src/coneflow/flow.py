"""Mean curvature flow dF/dt = H on structured meshes.

The flow is integrated explicitly with a parabolic step bound. Diagnostics
go into a `FlowTrace`; once the run stops in the singular regime the blow-up
time is extrapolated from sup |II|^-2 and the singularity is classified.
"""

import numpy as np
from tqdm import tqdm

from .core.config import Configs, configs
from .core.errors import (
    ApexError,
    DomainError,
    InconclusiveClassificationError,
    NonConvergenceError,
    StabilityError,
)
from .core.globals import inc_global, next_run_id
from .core.trace import FlowEvent, TraceRow
from .core.types import *
from .geometry.immersion import (
    DiscreteImmersion,
    first_variation_rate,
    lemma_one_residual,
    volume,
)
from .monotone import huisken_functional, theta_sensitivity
from .tracing import FlowTrace


class FlowSettings(BaseModel):
    """Numerical settings of a flow run. Defaults come from the `flow` configs."""

    model_config = ConfigDict(extra="forbid")

    scheme: Literal["euler", "rk4"] = "euler"
    """Time integrator."""
    c_stab: Optional[float] = None
    """Parabolic CFL constant; the per-scheme default when unset."""
    stop_min_r2: float = 1e-4
    """Stop once min r^2 falls below this."""
    stop_sup_II2: float = 1e8
    """Stop once sup |II|^2 exceeds this."""
    t_max: float = 10.0
    """Hard stop in time."""
    dt_max: float = 1e-2
    """Largest allowed step."""
    dt_min: float = 1e-14
    """Steps below this are a non-convergence."""
    trace_every: int = Field(10, ge=1)
    """Emit a trace row every this many steps."""
    keep_snapshots: bool = True
    """Store immersions at trace rows."""
    apex_margin: float = 10.0
    """Reject initial data with min r below apex_margin * r_min."""
    progress: bool = False
    """Show a progress bar."""
    horizon: Optional[float] = None
    """Known blow-up time, used for the Theta column when given."""
    window_fraction: float = 0.25
    """Fraction of the steps used by the blow-up time fit."""
    drift_tolerance: float = 0.01
    """Allowed relative drift between fit windows."""
    min_rows: int = 50
    """Rows required in the final decade of T_est - t."""
    typeI_growth: float = 1.5
    """Allowed growth of sup |II|^2 (T - t) across the final decade."""
    band_ratio: float = 1.5
    """Allowed K2 / K1 ratio of the type I_c band."""
    apex_fraction: float = 1e-2
    """min r^2 must fall below this fraction of its initial value for I_c."""

    @classmethod
    def from_configs(cls, settings: Optional[Configs] = None, **overrides: Any) -> "FlowSettings":
        """Build settings from the `flow` section of the configs."""
        settings = settings or configs
        flow = settings.getattrs("flow")
        values = dict(
            scheme=flow.scheme,
            stop_min_r2=flow.stop_min_r2,
            stop_sup_II2=flow.stop_sup_II2,
            t_max=flow.t_max,
            dt_max=flow.dt_max,
            dt_min=flow.dt_min,
            trace_every=flow.trace_every,
            keep_snapshots=flow.keep_snapshots,
            apex_margin=flow.apex_margin,
            progress=flow.progress,
            window_fraction=flow.estimate.window_fraction,
            drift_tolerance=flow.estimate.drift_tolerance,
            min_rows=flow.classify.min_rows,
            typeI_growth=flow.classify.typeI_growth,
            band_ratio=flow.classify.band_ratio,
            apex_fraction=flow.classify.apex_fraction,
        )
        values.update(overrides)
        return cls(**values)

    def stability_constant(self) -> float:
        """The CFL constant for the configured scheme."""
        if self.c_stab is not None:
            return self.c_stab
        return float(configs.getattrs(f"flow.c_stab.{self.scheme}"))


@dataclass(frozen=True, eq=False)
class FlowState:
    """An immersion at a flow time."""

    t: float
    """Flow time."""
    immersion: DiscreteImmersion
    """The immersion at time t."""

    @property
    def cache(self) -> Any:
        """The geometry cache of the immersion."""
        return self.immersion.geometry


class SingularityReport(BaseModel):
    """Blow-up time estimate and singularity type of a run."""

    blowup: bool = False
    """Whether the run stopped in the singular regime."""
    T_est: Optional[float] = None
    """Estimated blow-up time from sup |II|^-2."""
    T_radial: Optional[float] = None
    """Cross-check from min r^2 under the type I_c ansatz."""
    T_drift: Optional[float] = None
    """Relative drift of T_est between the two fit windows."""
    typeI: bool = False
    """sup |II|^2 (T - t) stays bounded over the final decade."""
    C_est: Optional[float] = None
    """Largest observed sup |II|^2 (T - t) in the final decade."""
    typeIc: bool = False
    """Type I and min r^2 / (T - t) stays in a positive band while r -> 0."""
    K1_est: Optional[float] = None
    """Smallest min r^2 / (T - t) over the final decade."""
    K2_est: Optional[float] = None
    """Largest min r^2 / (T - t) over the final decade."""
    r_min_trend: List[Tuple[float, float]] = Field(default_factory=list)
    """(t, min r^2) over the final decade."""

    @model_validator(mode="after")
    def _typeIc_implies_typeI(self) -> "SingularityReport":
        if self.typeIc and not self.typeI:
            raise ValueError("a type I_c singularity is also of type I")
        return self


def velocity(im: DiscreteImmersion) -> FloatArray:
    """Node velocity of the flow in cone coordinates.

    Generic immersions move by H. Graphical immersions keep their base
    coordinates and move r by H^{n+1} - sum_i dr/dx^i H^i, the same normal
    motion written on the fixed grid. Interval end nodes stay fixed.
    """
    H = im.geometry.mean_curvature
    if im.mode == "graphical":
        n = im.cone.base.dim
        V = np.zeros_like(H)
        V[..., -1] = H[..., -1] - np.einsum("...i,...i->...", im.gradient(im.r), H[..., :n])
        return V
    V = H.copy()
    if not im.mesh.periodic:
        V[0] = 0.0
        V[-1] = 0.0
    return V


def stability_bound(im: DiscreteImmersion, c_stab: float) -> float:
    """Largest stable step c h_min^2 / max(1, sup |II|^2, max eig g^ij)."""
    cache = im.geometry
    h_min = min(im.mesh.spacing)
    inverse_scale = 1.0 / float(np.linalg.eigvalsh(cache.metric)[..., 0].min())
    return c_stab * h_min**2 / max(1.0, float(cache.II2.max()), inverse_scale)


def _advance(im: DiscreteImmersion, delta: FloatArray) -> DiscreteImmersion:
    n = im.cone.base.dim
    base = im.base if im.mode == "graphical" else im.base + delta[..., :n]
    return im.with_values(base=base, r=im.r + delta[..., -1])


def step(
    state: FlowState,
    dt: float,
    scheme: Literal["euler", "rk4"] = "euler",
    c_stab: Optional[float] = None,
) -> FlowState:
    """Advance the flow by one explicit step.

    Raises:
        StabilityError: If dt exceeds the parabolic bound.
        ApexError: If a radius falls below r_min.
        DegenerateMetricError: If the new immersion degenerates.
    """
    if not dt > 0:
        raise StabilityError(f"time steps must be positive, got {dt}", module="flow")
    if c_stab is None:
        c_stab = float(configs.getattrs(f"flow.c_stab.{scheme}"))
    im = state.immersion
    bound = stability_bound(im, c_stab)
    if dt > bound * (1 + 1e-12):
        raise StabilityError(
            f"dt = {dt:.3e} exceeds the stability bound {bound:.3e}", module="flow"
        )
    if scheme == "euler":
        new = _advance(im, dt * velocity(im))
    elif scheme == "rk4":
        k1 = velocity(im)
        k2 = velocity(_advance(im, 0.5 * dt * k1))
        k3 = velocity(_advance(im, 0.5 * dt * k2))
        k4 = velocity(_advance(im, dt * k3))
        new = _advance(im, dt / 6 * (k1 + 2 * k2 + 2 * k3 + k4))
    else:
        raise ValueError(f"Unknown scheme {scheme!r}")
    return FlowState(t=state.t + dt, immersion=new)


def blowup_bound(initial: DiscreteImmersion) -> float:
    """Upper bound C0 / (2m) on the maximal time, C0 = max r^2 at t = 0."""
    return float(np.max(initial.r**2)) / (2 * initial.m)


def _row(
    index: int,
    state: FlowState,
    dt: float,
    previous: Optional[FlowState],
    horizon: Optional[float],
) -> TraceRow:
    im, t = state.immersion, state.t
    m = im.m
    r2 = im.r**2
    lemma2 = area_rate = None
    if previous is not None and dt > 0:
        old = previous.immersion
        # d/dt r^2 against 2 g(V, F) with V the velocity actually used
        rate = (r2 - old.r**2) / dt
        lemma2 = float(np.max(np.abs(rate - 2 * old.r * velocity(old)[..., -1])))
        area_rate = first_variation_rate(old, im, dt)
    theta = None
    if horizon is not None and t < horizon:
        theta = huisken_functional(im, t, horizon)
    return TraceRow(
        step=index,
        t=t,
        dt=dt,
        volume=volume(im),
        sup_II2=float(im.geometry.II2.max()),
        min_r2=float(r2.min()),
        max_r2=float(r2.max()),
        max_f=float(np.max(r2 + 2 * m * t)),
        theta=theta,
        lemma1_resid=float(np.max(np.abs(lemma_one_residual(im)))),
        lemma2_resid=lemma2,
        area_rate_resid=area_rate,
    )


def _check_initial(initial: DiscreteImmersion, settings: FlowSettings) -> None:
    min_nodes = int(configs.getattrs("geometry.min_flow_nodes"))
    if initial.mesh.periodic and min(initial.mesh.shape) < min_nodes:
        raise DomainError(
            f"flow meshes need at least {min_nodes} nodes per axis, got {initial.mesh.shape}",
            module="flow",
        )
    floor = settings.apex_margin * initial.cone.r_min
    if initial.r.min() < floor:
        index = int(np.argmin(initial.r.ravel()))
        raise ApexError(
            f"initial radius {initial.r.min():.3e} is too close to the apex (< {floor:.1e})",
            module="flow",
            index=index,
        )


def run(
    initial: DiscreteImmersion,
    settings: Optional[FlowSettings] = None,
    t0: float = 0.0,
    trace: Optional[FlowTrace] = None,
) -> FlowTrace:
    """Integrate the flow until blow-up is resolved or t_max is reached.

    The run stops when min r^2 < `stop_min_r2`, sup |II|^2 > `stop_sup_II2`
    or t reaches `t_max`. In the first two cases a `blowup` event carrying the
    estimated blow-up time is emitted, and when no horizon is known the Theta
    column is filled from the stored snapshots with that estimate.

    A caller-provided `trace` keeps the rows recorded before a failure.

    Raises:
        NonConvergenceError: If the adaptive step underflows; the error
            carries the last state.
    """
    settings = settings or FlowSettings.from_configs()
    _check_initial(initial, settings)
    run_id = next_run_id()
    c_stab = settings.stability_constant()
    meta = {"run": run_id, "scheme": settings.scheme, "c_stab": c_stab, "t0": t0}
    if trace is None:
        trace = FlowTrace(m=initial.m, meta=meta)
    else:
        trace.meta.update(meta)
    state = FlowState(t=t0, immersion=initial)
    trace.append_event(
        FlowEvent(name="start", t=t0, data={"nodes": initial.mesh.size, "mode": initial.mode})
    )

    index, dt, previous = 0, 0.0, None
    reason = "t_max"
    last_volume = None
    bar = tqdm(total=settings.t_max - t0, disable=not settings.progress, desc="flow")
    while True:
        cache = state.cache
        sup_II2 = float(cache.II2.max())
        min_r2 = float((state.immersion.r**2).min())
        trace.record_step(state.t, sup_II2, min_r2)
        stopping = min_r2 < settings.stop_min_r2 or sup_II2 > settings.stop_sup_II2
        stopping = stopping or state.t >= settings.t_max
        if index % settings.trace_every == 0 or stopping:
            row = _row(index, state, dt, previous, settings.horizon)
            if last_volume is not None and row.volume > last_volume * (1 + 1e-9):
                logger.warning(f"volume increased at t = {row.t:.6g}: {last_volume} -> {row.volume}")
            last_volume = row.volume
            snapshot = state.immersion.with_values() if settings.keep_snapshots else None
            trace.append_row(row, snapshot)
        if min_r2 < settings.stop_min_r2:
            reason = "min_r2"
        elif sup_II2 > settings.stop_sup_II2:
            reason = "sup_II2"
        if stopping:
            break

        dt = min(settings.dt_max, stability_bound(state.immersion, c_stab), settings.t_max - state.t)
        if dt < settings.dt_min:
            raise NonConvergenceError(
                f"time step underflow dt = {dt:.3e} at t = {state.t:.9g}",
                module="flow",
                state=state,
            )
        previous = state
        state = step(state, dt, scheme=settings.scheme, c_stab=c_stab)
        index += 1
        bar.update(dt)
    bar.close()
    inc_global("step_count", index)

    trace.append_event(FlowEvent(name="stop", t=state.t, data={"reason": reason, "steps": index}))
    if reason != "t_max":
        estimate = estimate_blowup_time(trace, settings.window_fraction)
        trace.append_event(FlowEvent(name="blowup", t=state.t, data=estimate))
        horizon = settings.horizon or estimate["T_est"]
        if settings.horizon is None and settings.keep_snapshots and horizon is not None:
            for row_index, snapshot in trace.snapshots.items():
                t = trace.rows[row_index].t
                if t < horizon:
                    trace.set_theta(row_index, huisken_functional(snapshot, t, horizon))
        if horizon is not None and state.t < horizon:
            sensitivity = theta_sensitivity(state.immersion, state.t, horizon)
            trace.meta["theta_sensitivity"] = sensitivity
    return trace


def _fit_zero(t: FloatArray, y: FloatArray) -> Optional[float]:
    """Zero crossing of the least-squares line through (t, y)."""
    if len(t) < 2:
        return None
    slope, intercept = np.polyfit(t, y, 1)
    if not slope < 0:
        return None
    return float(-intercept / slope)


def estimate_blowup_time(trace: FlowTrace, window_fraction: float = 0.25) -> Dict[str, Any]:
    """Extrapolate the blow-up time from the per-step series.

    sup |II|^-2 is fitted by a line over the last `window_fraction` of the
    steps and over the last half of that window; the zero crossing of the
    first fit is T_est and the relative difference between the two is the
    drift. The same fit of min r^2 gives the radial cross-check.
    """
    series = trace.step_series()
    count = len(series)
    window = max(int(np.ceil(window_fraction * count)), 4)
    half = max(window // 2, 2)
    t, inv_II2, min_r2 = series[-window:, 0], 1.0 / series[-window:, 1], series[-window:, 2]
    T_est = _fit_zero(t, inv_II2)
    T_half = _fit_zero(series[-half:, 0], 1.0 / series[-half:, 1])
    drift = None
    if T_est is not None and T_half is not None:
        drift = abs(T_est - T_half) / abs(T_est)
    return {"T_est": T_est, "T_half": T_half, "T_drift": drift, "T_radial": _fit_zero(t, min_r2)}


def classify_singularity(trace: FlowTrace, settings: Optional[FlowSettings] = None) -> SingularityReport:
    """Classify the singularity of a finished run.

    Raises:
        InconclusiveClassificationError: If the blow-up time drifts by more
            than the tolerance between fit windows, or the final decade of
            T_est - t holds fewer rows than required.
    """
    settings = settings or FlowSettings.from_configs()
    event = trace.find_event("blowup")
    if event is None:
        return SingularityReport()
    T_est, drift = event.data.get("T_est"), event.data.get("T_drift")
    if T_est is None or drift is None or drift > settings.drift_tolerance:
        raise InconclusiveClassificationError(
            f"blow-up time estimate is unstable (T_est = {T_est}, drift = {drift})",
            module="flow",
        )
    t = trace.column("t")
    before = t < T_est
    tau = T_est - t[before]
    sup_II2 = trace.column("sup_II2")[before]
    min_r2 = trace.column("min_r2")[before]
    decade = tau <= 10 * tau.min()
    if decade.sum() < settings.min_rows:
        raise InconclusiveClassificationError(
            f"only {int(decade.sum())} rows in the final decade of T_est - t, "
            f"need {settings.min_rows}",
            module="flow",
        )
    tau, sup_II2, min_r2, times = tau[decade], sup_II2[decade], min_r2[decade], t[before][decade]
    product = sup_II2 * tau
    third = max(len(product) // 3, 1)
    typeI = bool(np.all(np.isfinite(product))) and (
        product[-third:].max() <= settings.typeI_growth * product[:third].max()
    )
    ratio = min_r2 / tau
    apex = min_r2[-1] <= settings.apex_fraction * trace.rows[0].min_r2
    K1, K2 = float(ratio.min()), float(ratio.max())
    typeIc = typeI and apex and K1 > 0 and K2 <= settings.band_ratio * K1
    report = SingularityReport(
        blowup=True,
        T_est=T_est,
        T_radial=event.data.get("T_radial"),
        T_drift=drift,
        typeI=typeI,
        C_est=float(product.max()),
        typeIc=typeIc,
        K1_est=K1,
        K2_est=K2,
        r_min_trend=list(zip(times.tolist(), min_r2.tolist())),
    )
    logger.info(
        f"singularity: T_est = {T_est:.6g}, typeI = {typeI} (C = {report.C_est:.4g}), "
        f"typeIc = {typeIc}"
    )
    return report


def run_summary(initial: DiscreteImmersion, trace: FlowTrace, report: SingularityReport) -> Dict[str, Any]:
    """Summary JSON payload of a run."""
    return {
        "T_est": report.T_est,
        "blowup_bound": blowup_bound(initial),
        "typeI": report.typeI,
        "C_est": report.C_est,
        "typeIc": report.typeIc,
        "K1_est": report.K1_est,
        "K2_est": report.K2_est,
        "T_radial": report.T_radial,
        "rows": len(trace),
        "theta_sensitivity": trace.meta.get("theta_sensitivity"),
    }
