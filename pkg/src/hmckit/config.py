"""Flat key=value experiment configuration.

The grammar is line oriented: `key = value`, blank lines and `#` comments.
Dotted keys group options; unknown keys are rejected with their line number.
Every key has an explicit documented default (or is required), and the
resolved configuration can be echoed as a banner so a run's inputs are never
implicit.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .dynamics import HamiltonianSystem, IntegratorSpec
from .errors import ConfigError
from .fibers import DenseMetric, IdentityMetric, KineticEnergy, Metric, SoftAbsMetric
from .kernels import (
    FixedTime,
    GibbsConfig,
    HMCConfig,
    MALAConfig,
    RWMConfig,
    ULAConfig,
    UniformTime,
)
from .targets import TargetDensity, gaussian, iid_gaussian, warped_gaussian


def _positive(x) -> bool:
    return x > 0


def _int_list(text: str):
    return [int(part.strip()) for part in text.split(",") if part.strip()]


def _float_list(text: str):
    return [float(part.strip()) for part in text.split(",") if part.strip()]


def _str_list(text: str):
    return [part.strip() for part in text.split(",") if part.strip()]


@dataclass(frozen=True)
class _Key:
    convert: object
    default: object = None
    required: bool = False
    choices: tuple = ()
    check: object = None
    check_msg: str = ""


KEYS = {
    "target": _Key(str, required=True,
                   choices=("iid_gaussian", "gaussian", "warped_gaussian")),
    "target.dim": _Key(int, default=2, check=lambda v: v >= 1,
                       check_msg="must be >= 1"),
    "target.sigma2": _Key(float, default=100.0, check=_positive,
                          check_msg="must be positive"),
    "target.b": _Key(float, default=0.1),
    "target.cov": _Key(str, default=None),
    "metric": _Key(str, default="identity", choices=("identity", "dense", "softabs")),
    "metric.alpha": _Key(float, default=1e6, check=_positive,
                         check_msg="must be positive"),
    "metric.matrix": _Key(str, default=None),
    "kinetic": _Key(str, default="gaussian", choices=("gaussian", "student_t")),
    "kinetic.nu": _Key(float, default=None, check=lambda v: v > 2,
                       check_msg="must exceed 2 so the momentum variance exists"),
    "integrator": _Key(str, default="leapfrog",
                       choices=("leapfrog", "glf", "euler", "exact")),
    "step_size": _Key(float, default=0.1, check=_positive,
                      check_msg="must be positive"),
    "glf.tol": _Key(float, default=1e-10, check=_positive, check_msg="must be positive"),
    "glf.max_iters": _Key(int, default=100, check=lambda v: v >= 1,
                          check_msg="must be >= 1"),
    "kernel": _Key(str, required=True, choices=("hmc", "rwm", "gibbs", "mala")),
    "hmc.t_max": _Key(float, default=6.3, check=_positive, check_msg="must be positive"),
    "hmc.t_fixed": _Key(float, default=None, check=_positive,
                        check_msg="must be positive"),
    "rwm.sigma": _Key(float, default=1.0, check=_positive, check_msg="must be positive"),
    "gibbs.tol": _Key(float, default=1e-8, check=_positive, check_msg="must be positive"),
    "gibbs.bracket": _Key(float, default=50.0, check=_positive,
                          check_msg="must be positive"),
    "mala.eps": _Key(float, default=0.1, check=_positive, check_msg="must be positive"),
    "ula.eps": _Key(float, default=0.1, check=_positive, check_msg="must be positive"),
    "chains": _Key(int, default=1, check=lambda v: v >= 1, check_msg="must be >= 1"),
    "iterations": _Key(int, required=True, check=lambda v: v >= 1,
                       check_msg="must be >= 1"),
    "seed": _Key(int, required=True),
    "init": _Key(_float_list, default=None),
    "steps": _Key(int, default=100, check=lambda v: v >= 1, check_msg="must be >= 1"),
    "trajectory.kind": _Key(str, default="integrator", choices=("integrator", "langevin")),
    "scaling.dims": _Key(_int_list, default=(1, 10, 100)),
    "scaling.transitions": _Key(int, default=1000, check=lambda v: v >= 1,
                                check_msg="must be >= 1"),
    "bench.kernels": _Key(_str_list, default=("hmc", "rwm")),
    "bench.budget": _Key(int, default=100000, check=lambda v: v >= 1,
                         check_msg="must be >= 1"),
    "bench.f": _Key(_str_list, default=("q2",)),
}

INTEGRATOR_SCHEMES = {
    "leapfrog": "leapfrog",
    "glf": "generalized_leapfrog",
    "euler": "euler",
    "exact": "exact_gaussian",
}


@dataclass
class RunConfig:
    """Validated configuration: every known key resolved to a value."""

    values: dict
    provided: set

    def __getitem__(self, key):
        return self.values[key]

    def banner(self) -> str:
        lines = ["# resolved configuration"]
        for key in sorted(self.values):
            value = self.values[key]
            shown = "-" if value is None else value
            if isinstance(shown, (list, tuple)):
                shown = ",".join(str(v) for v in shown)
            origin = "" if key in self.provided else "   (default)"
            lines.append(f"{key} = {shown}{origin}")
        return "\n".join(lines)


def parse_config(text: str) -> RunConfig:
    """Parse and fully validate a configuration document."""
    values = {}
    provided = set()
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"expected 'key = value', got {raw.strip()!r}", line=lineno)
        key, _, value = line.partition("=")
        key = key.strip()
        value = value.strip()
        if key not in KEYS:
            raise ConfigError(f"unknown key '{key}'", line=lineno)
        if key in provided:
            raise ConfigError(f"duplicate key '{key}'", line=lineno)
        spec = KEYS[key]
        try:
            converted = spec.convert(value)
        except ValueError:
            raise ConfigError(
                f"key '{key}': cannot parse {value!r} as {spec.convert.__name__}",
                line=lineno,
            ) from None
        if spec.choices and converted not in spec.choices:
            raise ConfigError(
                f"key '{key}': {converted!r} not one of {spec.choices}", line=lineno
            )
        if spec.check is not None and not spec.check(converted):
            raise ConfigError(f"key '{key}': {spec.check_msg}", line=lineno)
        values[key] = converted
        provided.add(key)

    for key, spec in KEYS.items():
        if key in values:
            continue
        if spec.required:
            raise ConfigError(f"missing required key '{key}'")
        values[key] = spec.default

    _cross_validate(values)
    return RunConfig(values, provided)


def _cross_validate(values: dict):
    if values["target"] == "gaussian" and values["target.cov"] is None:
        raise ConfigError("target = gaussian requires target.cov = <matrix file>")
    if values["target"] == "warped_gaussian" and values["target.dim"] < 2:
        raise ConfigError("key 'target.dim': warped_gaussian needs dim >= 2")
    if values["metric"] == "dense" and values["metric.matrix"] is None:
        raise ConfigError("metric = dense requires metric.matrix = <matrix file>")
    if values["kinetic"] == "student_t" and values["kinetic.nu"] is None:
        raise ConfigError("kinetic = student_t requires kinetic.nu")


def load_matrix(path: str) -> np.ndarray:
    try:
        matrix = np.loadtxt(path, dtype=float)
    except OSError as exc:
        raise ConfigError(f"cannot read matrix file {path}: {exc}") from None
    except ValueError as exc:
        raise ConfigError(f"cannot parse matrix file {path}: {exc}") from None
    return np.atleast_2d(matrix)


def build_target(cfg: RunConfig) -> TargetDensity:
    name = cfg["target"]
    if name == "iid_gaussian":
        return iid_gaussian(cfg["target.dim"])
    if name == "warped_gaussian":
        return warped_gaussian(cfg["target.dim"], cfg["target.sigma2"], cfg["target.b"])
    cov = load_matrix(cfg["target.cov"])
    try:
        return gaussian(np.zeros(cov.shape[0]), cov)
    except ValueError as exc:
        raise ConfigError(f"target.cov: {exc}") from None


def build_metric(cfg: RunConfig, target: TargetDensity) -> Metric:
    name = cfg["metric"]
    if name == "identity":
        return IdentityMetric(target.dim)
    if name == "softabs":
        return SoftAbsMetric(target, cfg["metric.alpha"])
    matrix = load_matrix(cfg["metric.matrix"])
    try:
        metric = DenseMetric(matrix)
    except ValueError as exc:
        raise ConfigError(f"metric.matrix: {exc}") from None
    if metric.dim != target.dim:
        raise ConfigError(
            f"metric.matrix is {metric.dim}x{metric.dim} but target dim is {target.dim}"
        )
    return metric


def build_kinetic(cfg: RunConfig, metric: Metric) -> KineticEnergy:
    if cfg["kinetic"] == "gaussian":
        return KineticEnergy(metric, "gaussian")
    return KineticEnergy(metric, "student_t", nu=cfg["kinetic.nu"])


def build_system(cfg: RunConfig) -> HamiltonianSystem:
    target = build_target(cfg)
    metric = build_metric(cfg, target)
    return HamiltonianSystem(target, build_kinetic(cfg, metric))


def build_integrator_spec(cfg: RunConfig, steps: int = 1) -> IntegratorSpec:
    return IntegratorSpec(
        scheme=INTEGRATOR_SCHEMES[cfg["integrator"]],
        step_size=cfg["step_size"],
        steps=steps,
        fixed_point_tol=cfg["glf.tol"],
        max_iters=cfg["glf.max_iters"],
    )


def build_kernel(cfg: RunConfig, dim: int):
    name = cfg["kernel"]
    if name == "hmc":
        if cfg["hmc.t_fixed"] is not None:
            time_dist = FixedTime(cfg["hmc.t_fixed"])
        else:
            time_dist = UniformTime(cfg["hmc.t_max"])
        return HMCConfig(build_integrator_spec(cfg), time_dist)
    if name == "rwm":
        return RWMConfig(cfg["rwm.sigma"] ** 2 * np.eye(dim))
    if name == "gibbs":
        return GibbsConfig(cfg["gibbs.tol"], cfg["gibbs.bracket"])
    if name == "mala":
        return MALAConfig(cfg["mala.eps"])
    return ULAConfig(cfg["ula.eps"])


def default_init(target: TargetDensity, cfg: RunConfig) -> np.ndarray:
    if cfg["init"] is not None:
        init = np.asarray(cfg["init"], dtype=float)
        if init.shape != (target.dim,):
            raise ConfigError(
                f"init has {init.shape[0]} entries but target dim is {target.dim}"
            )
        return init
    q0 = np.zeros(target.dim)
    if target.kind == "warped_gaussian":
        q0[1] = cfg["target.sigma2"] * cfg["target.b"]
    return q0
