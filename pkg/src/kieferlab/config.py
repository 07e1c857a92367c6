"""Run configuration: a documented key=value schema with strict validation.

The format is deliberately plain text so that every acceptance run is one
command against a checked-in file::

    # comment lines start with '#'
    seed = 20260809
    outdir = runs/demo
    process = lsv          # iid | lsv | linear
    gamma = 0.3            # lsv only
    burn_in = 10000
    grid_r = 3
    epsilon = 0.02
    calibration_n = 1048576
    parallelism = 1
    experiments = clt,lil  # executed in order with derived seeds
    clt.n = 16384
    clt.replicates = 2000

Unknown keys are rejected (the error names the offending key), and
``parse(render(config)) == config`` holds exactly.  ``parallelism`` is a
declared degree for replicate generation; results never depend on it
because all replicate seeds are derived statelessly.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .dynamics import DEFAULT_BURN_IN, KINDS, ProcessSpec
from .errors import ConfigError

__all__ = ["ExperimentConfig", "RunConfig", "parse_config", "render_config", "preset"]

EXPERIMENT_PARAMS = {
    "clt": {"n": int, "replicates": int, "lambda_n": int, "max_lag": int},
    "lil": {"n_max": int, "lambda_n": int, "max_lag": int},
    "rates": {"s": float, "n_values": "int_list", "replicates": int},
    "boundary": {"n_values": "int_list", "replicates": int},
}

_TOP_KEYS = {
    "seed": int,
    "outdir": str,
    "process": str,
    "gamma": float,
    "rho": float,
    "burn_in": int,
    "grid_r": int,
    "epsilon": float,
    "calibration_n": int,
    "parallelism": int,
    "experiments": "name_list",
}


@dataclass(frozen=True)
class ExperimentConfig:
    name: str
    params: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.name not in EXPERIMENT_PARAMS:
            raise ConfigError(f"unknown experiment {self.name!r}")
        allowed = EXPERIMENT_PARAMS[self.name]
        for key in self.params:
            if key not in allowed:
                raise ConfigError(f"unknown key {self.name}.{key!r}")

    def __eq__(self, other):
        return (
            isinstance(other, ExperimentConfig)
            and self.name == other.name
            and self.params == other.params
        )


@dataclass(frozen=True)
class RunConfig:
    master_seed: int = 0
    output_dir: str = "kieferlab-out"
    process: str = "iid"
    gamma: float | None = None
    rho: float | None = None
    burn_in: int = DEFAULT_BURN_IN
    grid_r: int = 3
    epsilon: float = 0.02
    calibration_n: int = 2**20
    parallelism: int = 1
    experiments: tuple[ExperimentConfig, ...] = ()

    def __post_init__(self):
        if self.process not in KINDS:
            raise ConfigError(f"key 'process' must be one of {KINDS}, got {self.process!r}")
        if self.process == "lsv" and (self.gamma is None or not 0 < self.gamma < 1):
            raise ConfigError("key 'gamma' must lie in (0,1) for process = lsv")
        if self.process == "linear" and (self.rho is None or not 0 < self.rho < 1):
            raise ConfigError("key 'rho' must lie in (0,1) for process = linear")
        if self.burn_in < 0:
            raise ConfigError("key 'burn_in' must be nonnegative")
        if self.grid_r < 1:
            raise ConfigError("key 'grid_r' must be a positive integer")
        if not (0.0 < self.epsilon < 0.1):
            raise ConfigError("key 'epsilon' must lie in (0, 1/10)")
        if self.calibration_n < 1:
            raise ConfigError("key 'calibration_n' must be positive")
        if self.parallelism < 1:
            raise ConfigError("key 'parallelism' must be a positive integer")
        if not (0 <= self.master_seed < 2**64):
            raise ConfigError("key 'seed' must fit in 64 unsigned bits")
        names = [e.name for e in self.experiments]
        if len(set(names)) != len(names):
            raise ConfigError("key 'experiments' must not repeat a name")

    def process_spec(self, seed: int) -> ProcessSpec:
        return ProcessSpec(
            kind=self.process,
            gamma=self.gamma,
            rho=self.rho,
            burn_in=self.burn_in,
            seed=seed,
        )


def _parse_value(key: str, raw: str, typ):
    try:
        if typ is int:
            return int(raw)
        if typ is float:
            return float(raw)
        if typ is str:
            return raw
        if typ == "int_list":
            return [int(tok) for tok in raw.split(",") if tok.strip() != ""]
        if typ == "name_list":
            return [tok.strip() for tok in raw.split(",") if tok.strip() != ""]
    except ValueError:
        pass
    raise ConfigError(f"key {key!r} has malformed value {raw!r}")


def parse_config(text: str) -> RunConfig:
    """Parse the key=value schema; rejects unknown keys by name."""
    top: dict = {}
    exp_params: dict[str, dict] = {}
    for lineno, line in enumerate(text.splitlines(), start=1):
        stripped = line.split("#", 1)[0].strip()
        if not stripped:
            continue
        if "=" not in stripped:
            raise ConfigError(f"line {lineno}: expected 'key = value', got {line!r}")
        key, raw = (part.strip() for part in stripped.split("=", 1))
        if "." in key:
            exp_name, param = key.split(".", 1)
            if exp_name not in EXPERIMENT_PARAMS:
                raise ConfigError(f"unknown key {key!r}")
            allowed = EXPERIMENT_PARAMS[exp_name]
            if param not in allowed:
                raise ConfigError(f"unknown key {key!r}")
            exp_params.setdefault(exp_name, {})[param] = _parse_value(
                key, raw, allowed[param]
            )
        else:
            if key not in _TOP_KEYS:
                raise ConfigError(f"unknown key {key!r}")
            if key in top:
                raise ConfigError(f"duplicate key {key!r}")
            top[key] = _parse_value(key, raw, _TOP_KEYS[key])

    names = top.pop("experiments", [])
    for name in exp_params:
        if name not in names:
            raise ConfigError(
                f"parameters given for experiment {name!r} which is not listed "
                "under 'experiments'"
            )
    experiments = tuple(
        ExperimentConfig(name=n, params=exp_params.get(n, {})) for n in names
    )
    kwargs = {
        "master_seed": top.pop("seed", 0),
        "output_dir": top.pop("outdir", "kieferlab-out"),
        "process": top.pop("process", "iid"),
        "gamma": top.pop("gamma", None),
        "rho": top.pop("rho", None),
        "burn_in": top.pop("burn_in", DEFAULT_BURN_IN),
        "grid_r": top.pop("grid_r", 3),
        "epsilon": top.pop("epsilon", 0.02),
        "calibration_n": top.pop("calibration_n", 2**20),
        "parallelism": top.pop("parallelism", 1),
    }
    return RunConfig(experiments=experiments, **kwargs)


def _render_value(value) -> str:
    if isinstance(value, bool):
        raise ConfigError("boolean config values are not part of the schema")
    if isinstance(value, float):
        return repr(value)
    if isinstance(value, (list, tuple)):
        return ",".join(str(v) for v in value)
    return str(value)


def render_config(config: RunConfig) -> str:
    """Canonical text for a config; parse(render(c)) == c."""
    lines = [
        f"seed = {config.master_seed}",
        f"outdir = {config.output_dir}",
        f"process = {config.process}",
    ]
    if config.gamma is not None:
        lines.append(f"gamma = {_render_value(config.gamma)}")
    if config.rho is not None:
        lines.append(f"rho = {_render_value(config.rho)}")
    lines += [
        f"burn_in = {config.burn_in}",
        f"grid_r = {config.grid_r}",
        f"epsilon = {_render_value(config.epsilon)}",
        f"calibration_n = {config.calibration_n}",
        f"parallelism = {config.parallelism}",
        f"experiments = {','.join(e.name for e in config.experiments)}",
    ]
    for exp in config.experiments:
        for param in EXPERIMENT_PARAMS[exp.name]:
            if param in exp.params:
                lines.append(f"{exp.name}.{param} = {_render_value(exp.params[param])}")
    return "\n".join(lines) + "\n"


PRESETS = {
    # Fast anchors on the i.i.d. baseline: every check is an exactly-known
    # target (uniform-order-statistics covariance, slope-1 variance growth,
    # the iterated-logarithm band).
    "iid-anchors": """
seed = 20260809
process = iid
grid_r = 3
epsilon = 0.02
calibration_n = 1048576
experiments = clt,lil,rates
clt.n = 16384
clt.replicates = 2000
lil.n_max = 4194304
rates.s = 0.5
rates.n_values = 16384,65536,262144,1048576
rates.replicates = 600
""",
}


def preset(name: str) -> RunConfig:
    if name not in PRESETS:
        raise ConfigError(
            f"unknown preset {name!r}; available: {sorted(PRESETS)}"
        )
    return parse_config(PRESETS[name])
