"""Build a problem instance and run parameters from a YAML or JSON config.

Example::

    set: {kind: cube, n: 2}
    operator: {kind: affine, M: [[1, 0], [0, 1]], b: [-0.5, -0.5]}
    objective: {kind: quadratic, Q: [[1, 0], [0, 1]], u: [1, 1]}
    epsilon: 0.01
    algorithm: 3
    params: {max_outer_iterations: 200}
    seed: 0

Instead of ``set``/``operator``/``objective`` a ``generator`` block may name a
random family: ``{problem1: {n: 20, set_kind: sphere, ...}}`` or
``{cournot: {...}}``.
"""

from __future__ import annotations

import json
from dataclasses import fields
from pathlib import Path

import numpy as np
import yaml

from .algorithms import AlgoParams
from .geometry import make_set
from .linesearch import LineSearchBudget
from .penalty import InnerSolverConfig
from .problem import (
    AffineOperator,
    CournotOperator,
    CournotWelfareObjective,
    LinearExpOperator,
    ProblemInstance,
    QuadraticObjective,
    quadratic_pair_operator,
)


class ConfigError(ValueError):
    pass


def load_config(path):
    text = Path(path).read_text()
    if str(path).endswith(".json"):
        cfg = json.loads(text)
    else:
        cfg = yaml.safe_load(text)
    if not isinstance(cfg, dict):
        raise ConfigError("config must be a mapping")
    return cfg


def _take(d, cls):
    names = {f.name for f in fields(cls)}
    unknown = set(d) - names
    if unknown:
        raise ConfigError(f"unknown {cls.__name__} keys: {sorted(unknown)}")
    return d


def build_params(d=None) -> AlgoParams:
    d = dict(d or {})
    inner = InnerSolverConfig(**_take(d.pop("inner", {}), InnerSolverConfig))
    ls = LineSearchBudget(**_take(d.pop("linesearch", {}), LineSearchBudget))
    return AlgoParams(inner=inner, linesearch=ls, **_take(d, AlgoParams))


def _operator(d, n):
    kind = d.get("kind")
    if kind == "affine":
        return AffineOperator(d["M"], d["b"], d.get("lipschitz"))
    if kind == "linexp":
        return LinearExpOperator(d["M"], d["b"], d["alpha"], d["beta"], d.get("tail", 0),
                                 d.get("lipschitz"))
    if kind == "quadratic_pair":
        return quadratic_pair_operator(d.get("a", 1.0), d.get("b", 1.0))
    if kind == "cournot":
        return CournotOperator(d["n_firms"], d["n_locations"], d["a"], d["b"], d["sigma"], d["costs"])
    raise ConfigError(f"unknown operator kind {kind!r}")


def _objective(d, op, n):
    kind = d.get("kind")
    if kind == "quadratic":
        Q = d.get("Q")
        Q = np.eye(n) if Q is None else Q
        return QuadraticObjective(Q, d["u"])
    if kind == "welfare":
        if not isinstance(op, CournotOperator):
            raise ConfigError("welfare objective needs a cournot operator")
        return CournotWelfareObjective(op)
    raise ConfigError(f"unknown objective kind {kind!r}")


def build_instance(cfg) -> ProblemInstance:
    # imported here: bench imports the algorithms, which import nothing from here
    from .bench import CournotConfig, Problem1Config, gen_cournot, gen_problem1

    gen = cfg.get("generator")
    if gen is not None:
        if len(gen) != 1:
            raise ConfigError("generator must name exactly one family")
        (family, kw), = gen.items()
        kw = dict(kw or {})
        kw.setdefault("seed", cfg.get("seed", 0))
        if family == "problem1":
            return gen_problem1(Problem1Config(**_take(kw, Problem1Config)))
        if family == "cournot":
            return gen_cournot(CournotConfig(**_take(kw, CournotConfig)))
        raise ConfigError(f"unknown generator {family!r}")

    for key in ("set", "operator", "objective", "epsilon"):
        if key not in cfg:
            raise ConfigError(f"missing {key!r}")
    sd = dict(cfg["set"])
    kind = sd.pop("kind")
    fset = make_set(kind, sd.pop("n", None), **sd)
    op = _operator(cfg["operator"], fset.dim)
    obj = _objective(cfg["objective"], op, fset.dim)
    return ProblemInstance(op, obj, fset, float(cfg["epsilon"]), cfg.get("lipschitz"))
