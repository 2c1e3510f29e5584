"""Flat key-value experiment configuration with dotted keys.

The on-disk format is one ``key = value`` assignment per line; blank lines
and ``#`` comments are ignored.  Parsing and formatting round-trip exactly,
and unknown keys are rejected so a typo cannot silently fall back to a
default.  See the README for the full key table.
"""

from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .learn import LearnerConfig, RgExtension
from .observe import Schedule

__all__ = ["parse_config_text", "format_config_mapping", "ExperimentConfig"]


def parse_config_text(text: str) -> dict:
    """Parse ``key = value`` lines into an ordered mapping."""
    mapping = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ValueError(f"config line {lineno}: expected 'key = value', got {raw!r}")
        key, value = line.split("=", 1)
        key = key.strip()
        value = value.strip()
        if not key:
            raise ValueError(f"config line {lineno}: empty key")
        if key in mapping:
            raise ValueError(f"config line {lineno}: duplicate key {key!r}")
        mapping[key] = value
    return mapping


def format_config_mapping(mapping: dict) -> str:
    return "".join(f"{k} = {v}\n" for k, v in mapping.items())


def _parse_bool(value: str, key: str) -> bool:
    v = value.strip().lower()
    if v in ("on", "true", "yes", "1"):
        return True
    if v in ("off", "false", "no", "0"):
        return False
    raise ValueError(f"config: {key} must be on/off, got {value!r}")


def _parse_vector(value: str) -> np.ndarray:
    return np.array([float(p) for p in value.split(",")], dtype=float)


_KNOWN_KEYS = {
    "model.rho", "model.sigma2", "features", "mode", "n_sub", "burn_in",
    "dt.family", "dt.c", "dt.a", "lr.family", "lr.c", "lr.a",
    "algorithm", "variant", "mu", "M", "averaging", "theta0",
    "rg.extension", "rg.c", "rg.a",
    "metric", "theta_ref", "k_max", "seeds", "master_seed", "log_every",
    "fit.k_lo", "fit.k_hi", "out.csv",
}

_EXT_DEFAULT_A = {"multistep": 0.5, "minibatch": 0.5, "sigma": 0.125}


@dataclass(frozen=True)
class ExperimentConfig:
    """Typed view of one experiment: model, features, learner, run shape."""

    rho: float = 1.0
    sigma2: float = 0.1
    features: str = "fourier3"
    mode: str = "simulator"
    n_sub: int = 32
    burn_in: int = 20000
    dt: Schedule = field(default_factory=lambda: Schedule.power(1.0, 0.5))
    lr: Schedule = field(default_factory=lambda: Schedule.power(2.0, 1.0))
    algorithm: str = "td0"
    variant: str = "stochastic"
    mu: float = 0.0
    ball_radius: Optional[float] = None
    averaging: bool = False
    theta0: str = "zeros"               # zeros | star | comma-separated floats
    rg_extension: Optional[str] = None  # multistep | minibatch | sigma | rademacher
    rg_c: Optional[float] = None
    rg_a: Optional[float] = None
    metric: str = "param_mse"
    theta_ref: str = "auto"             # auto | comma-separated floats
    k_max: int = 10000
    seeds: int = 8
    master_seed: int = 0
    log_every: str = "geometric"        # geometric | integer stride
    fit_k_lo: Optional[float] = None
    fit_k_hi: Optional[float] = None
    out_csv: Optional[str] = None

    @staticmethod
    def from_mapping(mapping: dict) -> "ExperimentConfig":
        unknown = set(mapping) - _KNOWN_KEYS
        if unknown:
            raise ValueError(f"config: unknown keys {sorted(unknown)}")
        g = mapping.get

        def sched(prefix: str, default: Schedule) -> Schedule:
            family = g(f"{prefix}.family", default.family)
            c = float(g(f"{prefix}.c", default.c))
            a = float(g(f"{prefix}.a", default.a))
            return Schedule(family=family, c=c, a=a)

        m_raw = g("M", "none").strip().lower() if "M" in mapping else "none"
        cfg = ExperimentConfig(
            rho=float(g("model.rho", 1.0)),
            sigma2=float(g("model.sigma2", 0.1)),
            features=g("features", "fourier3"),
            mode=g("mode", "simulator"),
            n_sub=int(g("n_sub", 32)),
            burn_in=int(g("burn_in", 20000)),
            dt=sched("dt", Schedule.power(1.0, 0.5)),
            lr=sched("lr", Schedule.power(2.0, 1.0)),
            algorithm=g("algorithm", "td0"),
            variant=g("variant", "stochastic"),
            mu=float(g("mu", 0.0)),
            ball_radius=None if m_raw == "none" else float(mapping["M"]),
            averaging=_parse_bool(g("averaging", "off"), "averaging"),
            theta0=g("theta0", "zeros"),
            rg_extension=(None if g("rg.extension", "none") == "none"
                          else mapping["rg.extension"]),
            rg_c=float(mapping["rg.c"]) if "rg.c" in mapping else None,
            rg_a=float(mapping["rg.a"]) if "rg.a" in mapping else None,
            metric=g("metric", "param_mse"),
            theta_ref=g("theta_ref", "auto"),
            k_max=int(g("k_max", 10000)),
            seeds=int(g("seeds", 8)),
            master_seed=int(g("master_seed", 0)),
            log_every=g("log_every", "geometric"),
            fit_k_lo=float(mapping["fit.k_lo"]) if "fit.k_lo" in mapping else None,
            fit_k_hi=float(mapping["fit.k_hi"]) if "fit.k_hi" in mapping else None,
            out_csv=g("out.csv", None),
        )
        cfg.validate()
        return cfg

    @staticmethod
    def from_text(text: str) -> "ExperimentConfig":
        return ExperimentConfig.from_mapping(parse_config_text(text))

    def validate(self) -> None:
        from .features import feature_map_from_key

        feature_map_from_key(self.features)  # raises on unknown family
        if self.mode not in ("simulator", "realworld"):
            raise ValueError(f"config: unknown mode {self.mode!r}")
        if self.metric not in ("param_mse", "ell_loss"):
            raise ValueError(f"config: unknown metric {self.metric!r}")
        if self.k_max < 1 or self.seeds < 1:
            raise ValueError("config: k_max and seeds must be >= 1")
        if self.log_every != "geometric":
            int(self.log_every)
        if self.theta0 not in ("zeros", "star"):
            _parse_vector(self.theta0)
        if self.theta_ref != "auto":
            _parse_vector(self.theta_ref)
        self.learner_config()  # validates algorithm/variant/mu/extension

    def learner_config(self) -> LearnerConfig:
        ext = None
        if self.rg_extension is not None:
            a = self.rg_a if self.rg_a is not None else \
                _EXT_DEFAULT_A.get(self.rg_extension, 0.5)
            c = self.rg_c
            if c is None:
                c = float(np.sqrt(self.sigma2)) if self.rg_extension == "sigma" else 1.0
            ext = RgExtension(kind=self.rg_extension, c=c, a=a)
        return LearnerConfig(algorithm=self.algorithm, variant=self.variant,
                             mu=self.mu, ball_radius=self.ball_radius,
                             averaging=self.averaging, lr=self.lr,
                             rg_extension=ext)

    def to_mapping(self) -> dict:
        m = {
            "model.rho": repr(self.rho),
            "model.sigma2": repr(self.sigma2),
            "features": self.features,
            "mode": self.mode,
            "n_sub": str(self.n_sub),
            "burn_in": str(self.burn_in),
            "dt.family": self.dt.family,
            "dt.c": repr(self.dt.c),
            "dt.a": repr(self.dt.a),
            "lr.family": self.lr.family,
            "lr.c": repr(self.lr.c),
            "lr.a": repr(self.lr.a),
            "algorithm": self.algorithm,
            "variant": self.variant,
            "mu": repr(self.mu),
            "M": "none" if self.ball_radius is None else repr(self.ball_radius),
            "averaging": "on" if self.averaging else "off",
            "theta0": self.theta0,
            "rg.extension": self.rg_extension or "none",
            "metric": self.metric,
            "theta_ref": self.theta_ref,
            "k_max": str(self.k_max),
            "seeds": str(self.seeds),
            "master_seed": str(self.master_seed),
            "log_every": str(self.log_every),
        }
        if self.rg_c is not None:
            m["rg.c"] = repr(self.rg_c)
        if self.rg_a is not None:
            m["rg.a"] = repr(self.rg_a)
        if self.fit_k_lo is not None:
            m["fit.k_lo"] = repr(self.fit_k_lo)
        if self.fit_k_hi is not None:
            m["fit.k_hi"] = repr(self.fit_k_hi)
        if self.out_csv is not None:
            m["out.csv"] = self.out_csv
        return m

    def to_text(self) -> str:
        return format_config_mapping(self.to_mapping())
