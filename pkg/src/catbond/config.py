"""Flat ``key = value`` scenario files for the command-line front end."""
from __future__ import annotations

import dataclasses
from dataclasses import dataclass, field, fields

from .contracts import CatBondContract
from .loss_process import ShotNoiseSpec
from .mc_oracle import McConfig
from .model1 import DeterministicTimes, Model1Spec, PoissonArrivals
from .model2 import Model2State
from .rates import CirParams
from .severity import from_params


class ConfigError(ValueError):
    pass


@dataclass
class ScenarioConfig:
    model: str = "model2"
    seed: int = 20240101
    out: str = "out"
    # loss process
    lambda_n: float = 0.5
    alpha: float = 0.8
    severity: str = "lognormal"
    severity_mu: float = 6.387
    severity_sigma: float = 0.153
    severity_rate: float = 1.0
    severity_a: float = 3.0
    severity_b: float = 2.0
    # short rate (CIR for model2, constant for model1)
    r0: float = 0.0204
    gamma_r: float = 0.0884
    theta_cir: float = 0.0204
    sigma: float = 0.0477
    rate: float = 0.0
    # contract
    principal: float = 1.0
    recovery: float = 0.0
    threshold: float = 10000.0
    maturity: float = 3.0
    # monte carlo
    n_paths: int = 100_000
    steps_per_year: int = 256
    antithetic: bool = False
    # model1 monitoring times
    arrival: str = "poisson"
    arrival_rate: float = 1.0
    monitoring_times: list = field(default_factory=lambda: [1.0, 2.0, 3.0])
    # sweeps and outputs
    grid_step: float = 1.0 / 365.0
    thresholds: list = field(default_factory=lambda: [5000.0, 9000.0, 15000.0, 20000.0])
    surface_maturities: list = field(default_factory=lambda: [0.5 * k for k in range(1, 11)])
    surface_thresholds: list = field(default_factory=lambda: [2000.0 * k for k in range(1, 11)])
    survival_grid: list = field(default_factory=lambda: [0.5, 1.0, 1.5, 2.0, 2.5, 3.0])
    n_scenarios: int = 6
    continuity_paths: int = 1000
    tolerance_sigma: float = 3.0

    def validate(self):
        if self.model not in ("model1", "model2"):
            raise ConfigError(f"model must be 'model1' or 'model2', got {self.model!r}")
        if self.arrival not in ("poisson", "deterministic"):
            raise ConfigError(f"arrival must be 'poisson' or 'deterministic', got {self.arrival!r}")
        if not self.grid_step > 0:
            raise ConfigError("grid_step must be positive")
        if self.n_scenarios < 1:
            raise ConfigError("n_scenarios must be at least 1")
        if self.tolerance_sigma < 0:
            raise ConfigError("tolerance_sigma must be non-negative")
        try:
            self.severity_model()
            self.contract()
            self.mc()
            if self.model == "model2":
                self.model2_state()
            else:
                self.model1_spec()
        except ValueError as exc:
            raise ConfigError(str(exc)) from exc
        return self

    def severity_model(self):
        name = self.severity.lower()
        params = {
            "exponential": {"rate": self.severity_rate},
            "lognormal": {"mu": self.severity_mu, "sigma": self.severity_sigma},
            "pareto": {"a": self.severity_a, "b": self.severity_b},
        }
        if name not in params:
            raise ConfigError(f"unknown severity family {self.severity!r}")
        return from_params(name, **params[name])

    def shot_noise(self, alpha: float | None = None) -> ShotNoiseSpec:
        return ShotNoiseSpec(self.lambda_n, self.alpha if alpha is None else alpha, self.severity_model())

    def cir(self) -> CirParams:
        return CirParams(self.r0, self.gamma_r, self.theta_cir, self.sigma)

    def contract(self, threshold: float | None = None, maturity: float | None = None) -> CatBondContract:
        return CatBondContract(self.principal, self.recovery,
                               self.threshold if threshold is None else threshold,
                               self.maturity if maturity is None else maturity)

    def mc(self) -> McConfig:
        return McConfig(self.n_paths, self.steps_per_year, self.seed, self.antithetic)

    def model2_state(self, threshold=None, maturity=None, alpha=None) -> Model2State:
        return Model2State(self.shot_noise(alpha), self.contract(threshold, maturity), self.cir())

    def model1_spec(self) -> Model1Spec:
        if self.arrival == "poisson":
            arr = PoissonArrivals(self.arrival_rate)
        else:
            arr = DeterministicTimes(tuple(self.monitoring_times))
        return Model1Spec(arr, self.shot_noise(), self.contract(), self.rate)

    def to_text(self) -> str:
        lines = []
        for f in fields(self):
            v = getattr(self, f.name)
            if isinstance(v, list):
                v = ", ".join(repr(float(x)) for x in v)
            elif isinstance(v, bool):
                v = "true" if v else "false"
            elif isinstance(v, float):
                v = repr(v)
            lines.append(f"{f.name} = {v}")
        return "\n".join(lines) + "\n"


def _convert(name: str, default, raw: str):
    raw = raw.strip()
    try:
        if isinstance(default, bool):
            low = raw.lower()
            if low in ("true", "yes", "1", "on"):
                return True
            if low in ("false", "no", "0", "off"):
                return False
            raise ValueError(raw)
        if isinstance(default, int):
            return int(raw.replace("_", ""))
        if isinstance(default, float):
            return _number(raw)
        if isinstance(default, list):
            return [_number(x) for x in raw.split(",") if x.strip()]
        return raw
    except ValueError:
        raise ConfigError(f"bad value for {name}: {raw!r}") from None


def _number(raw: str) -> float:
    raw = raw.strip()
    if "/" in raw:
        num, den = raw.split("/", 1)
        return float(num) / float(den)
    return float(raw)


def parse_config(text: str, **overrides) -> ScenarioConfig:
    """Parse ``key = value`` lines (``#`` starts a comment); unknown keys raise."""
    cfg = ScenarioConfig()
    known = {f.name: f for f in fields(cfg)}
    values = {}
    for lineno, line in enumerate(text.splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}: expected 'key = value'")
        key, raw = (s.strip() for s in line.split("=", 1))
        if key not in known:
            raise ConfigError(f"line {lineno}: unknown key {key!r}")
        values[key] = _convert(key, getattr(cfg, key), raw)
    values.update({k: v for k, v in overrides.items() if v is not None})
    return dataclasses.replace(cfg, **values).validate()


def load_config(path: str | None, **overrides) -> ScenarioConfig:
    text = ""
    if path is not None:
        try:
            with open(path, encoding="utf-8") as fh:
                text = fh.read()
        except OSError as exc:
            raise ConfigError(f"cannot read config {path}: {exc}") from exc
    return parse_config(text, **overrides)
