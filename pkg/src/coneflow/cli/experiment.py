"""Experiment files and the pipelines they drive.

An experiment is a TOML file naming a pipeline, an optional exemplar case,
per-pipeline sections and `settings` overrides of the packaged configs.
Every section is a pydantic model with `extra="forbid"`.
"""

import json
import os

import numpy as np
import toml
import yaml

from ..core.config import configs, load_config, using_settings
from ..core.errors import ConfigValidationError, ConeflowError
from ..core.io import dump_csv, dump_plot_data, dump_summary
from ..core.types import *
from ..exemplars import EXEMPLARS, build_exemplar, exemplar_horizon
from ..flow import FlowSettings, FlowState, classify_singularity, run, run_summary
from ..monotone import MONOTONE_COLUMNS, dissipation_check, monotone_samples, monotone_table
from ..plots import dump_flow_plots
from ..rescale import parabolic_rescale, verify_rescale_identities
from ..slag import dump_samples, max_residuals, sample_level_set
from ..spectra import deformation_dimension, parse_sigma, reeb_exclusion_check
from ..tracing import FlowTrace
from ..utils import make_rng, output_dir
from .cases import VERIFY_CASES, run_case

Pipeline = Literal["flow", "rescale-verify", "monotone", "slag", "spectrum", "verify-all"]


class _Section(BaseModel):
    model_config = ConfigDict(extra="forbid")


class CaseConfig(_Section):
    """The exemplar an experiment starts from."""

    name: str
    """Exemplar selector, see `coneflow list-cases`."""
    params: Dict[str, Any] = Field(default_factory=dict)
    """Keyword parameters of the exemplar."""

    @model_validator(mode="after")
    def _check_name(self) -> "CaseConfig":
        if self.name not in EXEMPLARS:
            raise ValueError(f"unknown exemplar {self.name!r}, choose from {sorted(EXEMPLARS)}")
        return self


class RescaleConfig(_Section):
    """Parabolic rescaling checks on the stored snapshots."""

    lambdas: List[float] = Field(default_factory=lambda: [2.0, 3.0, 10.0])
    """Scale factors to test."""
    tolerance: float = 1e-10
    """Largest allowed relative deviation of any identity."""


class MonotoneConfig(_Section):
    """Monotonicity of the Huisken functional along a run."""

    horizon: Optional[float] = None
    """Blow-up time for the kernel; the exact or estimated one when unset."""


class SlagConfig(_Section):
    """Level set sampling in C^n."""

    n: int = Field(2, ge=2)
    """Complex dimension."""
    c: List[float] = Field(default_factory=lambda: [0.0])
    """Moment map values, one per circle factor or a single broadcast value."""
    c_prime: float = 1.0
    """Value of the angle function."""
    count: int = Field(1000, ge=1)
    """Number of samples."""
    part: Literal["auto", "re", "im"] = "auto"
    """Real or imaginary part of w^1 ... w^n; by parity when auto."""
    phase: float = 0.0
    """Special Lagrangian phase in the Im Omega check."""


class SpectrumConfig(_Section):
    """Deformation dimension of a Legendrian link."""

    sigma: str = "circle:L=6.2831853:nodes=512"
    """`circle:L=<value>:nodes=<count>`, `icosphere:<k>` or an OFF path."""
    n: int = Field(2, ge=2)
    """Complex dimension of the ambient space."""
    tolerance: Optional[float] = None
    """Relative cluster tolerance; the mesh-kind default when unset."""
    lumped: Optional[bool] = None
    """Use the lumped mass matrix for triangulations."""


class VerifyConfig(_Section):
    """Which verification cases `verify-all` runs."""

    cases: List[str] = Field(default_factory=lambda: list(VERIFY_CASES))
    """Case selectors."""
    lam: float = 3.0
    """Scale factor for cases that take one."""

    @model_validator(mode="after")
    def _check_cases(self) -> "VerifyConfig":
        unknown = sorted(set(self.cases) - set(VERIFY_CASES))
        if unknown:
            raise ValueError(f"unknown cases {unknown}")
        return self


class ExperimentConfig(_Section):
    """A complete experiment file."""

    pipeline: Pipeline
    """The pipeline to run."""
    seed: Optional[int] = None
    """Global RNG seed; the configured one when unset."""
    output: Optional[str] = None
    """Artifact directory; the environment variable still takes precedence."""
    case: Optional[CaseConfig] = None
    """Initial immersion for the flow-based pipelines."""
    flow: Dict[str, Any] = Field(default_factory=dict)
    """Overrides of the flow settings."""
    rescale: RescaleConfig = Field(default_factory=RescaleConfig)
    monotone: MonotoneConfig = Field(default_factory=MonotoneConfig)
    slag: SlagConfig = Field(default_factory=SlagConfig)
    spectrum: SpectrumConfig = Field(default_factory=SpectrumConfig)
    verify: VerifyConfig = Field(default_factory=VerifyConfig)
    settings: Dict[str, Any] = Field(default_factory=dict)
    """Overrides of the packaged configs, checked against the known keys."""

    @model_validator(mode="after")
    def _check_sections(self) -> "ExperimentConfig":
        FlowSettings(**self.flow)
        if self.pipeline in ("flow", "rescale-verify", "monotone") and self.case is None:
            raise ValueError(f"pipeline {self.pipeline!r} needs a [case] section")
        return self

    def overrides(self) -> Dict[str, Any]:
        """The configs overrides implied by the file."""
        overrides = dict(self.settings)
        if self.seed is not None:
            overrides["seed"] = self.seed
        if self.output is not None:
            output = dict(overrides.get("settings", {}).get("output", {}))
            output["directory"] = self.output
            overrides["settings"] = {**overrides.get("settings", {}), "output": output}
        return overrides


def load_experiment(path: str) -> ExperimentConfig:
    """Read and validate an experiment file.

    Raises:
        ConfigValidationError: If the file is missing or has the wrong type.
        ValidationError: If a section has unknown keys or bad values.
    """
    try:
        content = load_config(path)
    except (toml.TomlDecodeError, yaml.YAMLError, json.JSONDecodeError) as e:
        raise ConfigValidationError(f"cannot parse {path}: {e}", module="cli") from e
    return ExperimentConfig(**content.to_dict())


class Artifacts:
    """Collects the files written by a pipeline under one folder."""

    def __init__(self, folder: str) -> None:
        """Create the folder if needed."""
        self.folder = folder
        self.files: List[str] = []
        os.makedirs(folder, exist_ok=True)

    def path(self, name: str) -> str:
        """Register and return the path of an artifact."""
        file = os.path.join(self.folder, name)
        self.files.append(file)
        return file

    def summary(self, payload: Dict[str, Any]) -> str:
        """Write `summary.json`."""
        file = self.path("summary.json")
        dump_summary(payload, file)
        return file


def _flow(exp: ExperimentConfig, out: Artifacts) -> Tuple[Dict[str, Any], FlowTrace, Optional[float]]:
    assert exp.case is not None
    initial = build_exemplar(exp.case.name, **exp.case.params)
    settings = FlowSettings.from_configs(configs, **exp.flow)
    trace = FlowTrace(m=initial.m)
    try:
        run(initial, settings, trace=trace)
    finally:
        trace.to_csv(out.path("trace.csv"), extra=True)
    known = exemplar_horizon(exp.case.name, **exp.case.params)
    try:
        report = classify_singularity(trace, settings)
    finally:
        event = trace.find_event("blowup")
        estimate = event.data.get("T_est") if event is not None else None
        horizon = settings.horizon or estimate or known
        for file in dump_flow_plots(trace, horizon, out.folder):
            out.files.append(file)
    summary = run_summary(initial, trace, report)
    summary["case"] = exp.case.name
    summary["T_exact"] = known
    return summary, trace, horizon


def flow_pipeline(exp: ExperimentConfig, out: Artifacts) -> Dict[str, Any]:
    """Run the flow, classify the singularity and write trace and plot data."""
    summary, _, _ = _flow(exp, out)
    return summary


def rescale_pipeline(exp: ExperimentConfig, out: Artifacts) -> Dict[str, Any]:
    """Run the flow and check the rescaling identities on every stored snapshot."""
    summary, trace, horizon = _flow(exp, out)
    if horizon is None:
        raise ConfigValidationError("rescaling needs a blow-up time", module="cli")
    deviations: Dict[str, float] = {}
    for lam in exp.rescale.lambdas:
        worst, s_values, scaled = 0.0, [], []
        for index, snapshot in sorted(trace.snapshots.items()):
            t = trace.rows[index].t
            if t >= horizon:
                continue
            rescaled = parabolic_rescale(snapshot, lam, t, horizon)
            report = verify_rescale_identities(FlowState(t=t, immersion=snapshot), rescaled, lam, horizon)
            worst = max(worst, report.max_deviation())
            s_values.append(rescaled[1])
            scaled.append(-rescaled[1] * float(rescaled[0].geometry.II2.max()))
        deviations[f"{lam:g}"] = worst
        dump_plot_data(s_values, scaled, ("s", "sup_II2_times_minus_s"), out.path(f"plot_rescaled_{lam:g}.csv"))
    summary["rescale_deviation"] = deviations
    summary["rescale_passed"] = max(deviations.values(), default=0.0) <= exp.rescale.tolerance
    return summary


def monotone_pipeline(exp: ExperimentConfig, out: Artifacts) -> Dict[str, Any]:
    """Run the flow and compare dTheta/dt with minus the dissipation."""
    summary, trace, horizon = _flow(exp, out)
    T = exp.monotone.horizon or horizon
    if T is None:
        raise ConfigValidationError("monotonicity needs a blow-up time", module="cli")
    samples = monotone_samples(trace, T)
    report = dissipation_check(samples)
    dump_csv(
        MONOTONE_COLUMNS,
        monotone_table(samples, report),
        out.path("monotone.csv"),
        float_format=configs.getattrs("settings.output.float_format"),
    )
    summary["monotone"] = {
        "T": T,
        "max_mismatch": report.max_mismatch,
        "max_theta_increase": report.max_theta_increase,
    }
    return summary


def slag_pipeline(exp: ExperimentConfig, out: Artifacts) -> Dict[str, Any]:
    """Sample a level set and certify every sample."""
    cfg = exp.slag
    samples = sample_level_set(cfg.n, cfg.c, cfg.c_prime, cfg.count, rng=make_rng("slag"), part=cfg.part, phase=cfg.phase)
    dump_samples(samples, out.path("slag_samples.csv"))
    res_omega, res_im = max_residuals(samples)
    return {
        "n": cfg.n,
        "c": cfg.c,
        "c_prime": cfg.c_prime,
        "count": len(samples),
        "max_residual_omega": res_omega,
        "max_residual_imOmega": res_im,
    }


def spectrum_pipeline(exp: ExperimentConfig, out: Artifacts) -> Dict[str, Any]:
    """Cluster the low spectrum of Sigma and report Ker(Lap - 2n)."""
    cfg = exp.spectrum
    mesh = parse_sigma(cfg.sigma)
    result = deformation_dimension(mesh, cfg.n, tol=cfg.tolerance, lumped=cfg.lumped)
    values = np.asarray(result.eigenvalues)
    dump_plot_data(np.arange(len(values)), values, ("index", "eigenvalue"), out.path("plot_spectrum.csv"))
    summary = result.to_summary()
    summary["sigma"] = cfg.sigma
    summary["reeb_violation"] = reeb_exclusion_check(mesh, cfg.n)
    return summary


def verify_pipeline(exp: ExperimentConfig, out: Artifacts) -> Dict[str, Any]:
    """Run the selected verification cases."""
    results = {name: run_case(name, exp.verify.lam) for name in exp.verify.cases}
    return {
        "cases": {name: r.model_dump() for name, r in results.items()},
        "passed": all(r.passed for r in results.values()),
    }


PIPELINES: Dict[str, Callable[[ExperimentConfig, Artifacts], Dict[str, Any]]] = {
    "flow": flow_pipeline,
    "rescale-verify": rescale_pipeline,
    "monotone": monotone_pipeline,
    "slag": slag_pipeline,
    "spectrum": spectrum_pipeline,
    "verify-all": verify_pipeline,
}


def run_experiment(exp: ExperimentConfig, output: Optional[str] = None) -> Tuple[Dict[str, Any], Artifacts]:
    """Run an experiment with its settings applied and write its summary.

    On a numerical failure the summary records the error, then the error is
    re-raised; artifacts written before the failure stay in place.
    """
    with using_settings(exp.overrides()):
        out = Artifacts(output_dir(output))
        logger.info(f"running pipeline '{exp.pipeline}' into {out.folder}")
        try:
            summary = PIPELINES[exp.pipeline](exp, out)
        except ConeflowError as e:
            out.summary({"pipeline": exp.pipeline, "error": str(e), "module": e.module, "index": e.index})
            raise
        summary["pipeline"] = exp.pipeline
        out.summary(summary)
    return summary, out
