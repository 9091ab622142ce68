"""Strict JSON experiment configuration."""

from __future__ import annotations

import json
from dataclasses import asdict, dataclass
from importlib import resources
from pathlib import Path

import numpy as np

from .conjugate import NIGParams, RegressionData
from .densities import ErrorDensity, LogPareto, ScaledBetaTails
from .robustness import InverseGamma


class ConfigError(ValueError):
    """Malformed or inconsistent configuration."""


_TOP = {"y", "X", "outliers", "omegas", "prior", "s", "error", "mc_samples", "seed",
        "quantile_levels", "xt_grid"}
_OUTLIERS = {"indices", "a", "b"}
_PRIOR = {"A", "B", "C"}
_ERROR_REQUIRED = {"type"}
_ERROR_OPTIONAL = {"alpha", "gamma"}


def _keys(obj, where, required, optional=frozenset()):
    if not isinstance(obj, dict):
        raise ConfigError(f"{where}: expected an object")
    unknown = set(obj) - required - optional
    if unknown:
        raise ConfigError(f"{where}: unknown field(s) {sorted(unknown)}")
    missing = required - set(obj)
    if missing:
        raise ConfigError(f"{where}: missing field(s) {sorted(missing)}")


def _num(value, where):
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ConfigError(f"{where}: expected a number, got {value!r}")
    return float(value)


def _nums(values, where):
    if not isinstance(values, list):
        raise ConfigError(f"{where}: expected a list")
    return [_num(v, f"{where}[{k}]") for k, v in enumerate(values)]


def _int(value, where):
    if isinstance(value, bool) or not isinstance(value, int):
        raise ConfigError(f"{where}: expected an integer, got {value!r}")
    return value


@dataclass(frozen=True)
class ExperimentConfig:
    """Field names mirror the JSON document. Outlier indices are 1-based."""

    y: list
    X: list
    outliers: dict
    omegas: list
    prior: dict
    s: float
    error: dict
    mc_samples: int
    seed: int
    quantile_levels: list
    xt_grid: list

    @classmethod
    def from_dict(cls, doc) -> "ExperimentConfig":
        _keys(doc, "config", _TOP)
        y = _nums(doc["y"], "y")
        n = len(y)
        if not isinstance(doc["X"], list) or len(doc["X"]) != n:
            raise ConfigError(f"X: expected {n} rows to match y")
        X = [_nums(row, f"X[{k}]") for k, row in enumerate(doc["X"])]
        p = len(X[0]) if X else 0
        if p == 0 or any(len(row) != p for row in X):
            raise ConfigError("X: rows must be nonempty and of equal length")

        out = doc["outliers"]
        _keys(out, "outliers", _OUTLIERS)
        idx = [_int(v, f"outliers.indices[{k}]") for k, v in enumerate(out["indices"])]
        if any(not 1 <= i <= n for i in idx) or len(set(idx)) != len(idx):
            raise ConfigError(f"outliers.indices: must be distinct values in 1..{n}")
        a, b = _nums(out["a"], "outliers.a"), _nums(out["b"], "outliers.b")
        if len(a) != len(idx) or len(b) != len(idx):
            raise ConfigError("outliers: a and b must have one entry per index")
        if any(v == 0 for v in b):
            raise ConfigError("outliers.b: slopes must be nonzero")

        omegas = _nums(doc["omegas"], "omegas")
        if any(w <= 0 for w in omegas) or any(q <= p_ for p_, q in zip(omegas, omegas[1:])):
            raise ConfigError("omegas: must be positive and increasing")

        prior = doc["prior"]
        _keys(prior, "prior", _PRIOR)
        prior = {k: _num(prior[k], f"prior.{k}") for k in ("A", "B", "C")}
        if any(v <= 0 for v in prior.values()):
            raise ConfigError("prior: A, B, C must be positive")

        s = _num(doc["s"], "s")
        if not 0 < s < 1:
            raise ConfigError("s: must lie in (0, 1)")

        err = doc["error"]
        _keys(err, "error", _ERROR_REQUIRED, _ERROR_OPTIONAL)
        kind = err["type"]
        need = {"light": "alpha", "heavy": "gamma"}.get(kind)
        if need is None:
            raise ConfigError(f"error.type: expected 'light' or 'heavy', got {kind!r}")
        if need not in err:
            raise ConfigError(f"error.{need}: required for type {kind!r}")
        err = {"type": kind, **{k: _num(err[k], f"error.{k}") for k in _ERROR_OPTIONAL if k in err}}
        if err[need] <= 0:
            raise ConfigError(f"error.{need}: must be positive")

        mc = _int(doc["mc_samples"], "mc_samples")
        if mc < 2:
            raise ConfigError("mc_samples: must be at least 2")
        seed = _int(doc["seed"], "seed")
        if seed < 0:
            raise ConfigError("seed: must be non-negative")
        levels = _nums(doc["quantile_levels"], "quantile_levels")
        if any(not 0 < q < 1 for q in levels):
            raise ConfigError("quantile_levels: must lie in (0, 1)")
        if not isinstance(doc["xt_grid"], list):
            raise ConfigError("xt_grid: expected a list")
        xt = [_nums(v, f"xt_grid[{k}]") for k, v in enumerate(doc["xt_grid"])]
        if any(len(v) != p for v in xt):
            raise ConfigError(f"xt_grid: each covariate vector needs {p} entries")

        return cls(y, X, {"indices": idx, "a": a, "b": b}, omegas, prior, s, err,
                   mc, seed, levels, xt)

    @classmethod
    def from_json(cls, text) -> "ExperimentConfig":
        try:
            doc = json.loads(text)
        except json.JSONDecodeError as exc:
            raise ConfigError(f"line {exc.lineno}, column {exc.colno}: {exc.msg}") from None
        return cls.from_dict(doc)

    @classmethod
    def load(cls, path) -> "ExperimentConfig":
        return cls.from_json(Path(path).read_text())

    def to_dict(self):
        return asdict(self)

    def to_json(self):
        return json.dumps(self.to_dict(), indent=2, ensure_ascii=False) + "\n"

    def with_seed(self, seed):
        return ExperimentConfig(**{**self.to_dict(), "seed": seed})

    # engine objects

    def data(self) -> RegressionData:
        o = self.outliers
        return RegressionData(np.array(self.y), np.array(self.X),
                              tuple(i - 1 for i in o["indices"]), np.array(o["a"]), np.array(o["b"]))

    def nig_prior(self) -> NIGParams:
        return NIGParams.prior(self.prior["A"], self.prior["B"], self.prior["C"], len(self.X[0]))

    def error_density(self) -> ErrorDensity:
        if self.error["type"] == "light":
            return ScaledBetaTails(self.error["alpha"])
        return LogPareto(self.error["gamma"])

    def sigma_prior(self) -> InverseGamma:
        return InverseGamma(self.prior["A"], self.prior["B"])


def bundled_config_path(name="contaminated_line.json"):
    """Path of a configuration shipped with the package."""
    return resources.files("contam") / "configs" / name


def load_bundled(name="contaminated_line.json") -> ExperimentConfig:
    return ExperimentConfig.from_json(bundled_config_path(name).read_text())
