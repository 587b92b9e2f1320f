"""Experiment config files (JSON): schema validation, plan construction, dumping.

A config names an instance (built-in tag or inline environment + action set),
the policies to compare, and run sizes::

    {
      "instance": "q7m4",
      "policies": [{"kind": "LLR"}, {"kind": "NaiveUCB1"}],
      "horizon": 2000000,
      "runs": 20,
      "seed": 0,
      "output_dir": "results/q7m4"
    }

Validation errors are reported with the line of the offending value.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

import jsonschema
import yaml

from .core import (ActionSet, ActionVector, BipartiteMatching, ExplicitArms, SourceDestPaths,
                   SpanningTrees)
from .environments import PAPER_MEANS, Bernoulli, EnvironmentSpec, Fixed, Uniform
from .errors import BanditError, ConfigurationError
from .policies import INIT_MODES, KINDS, PolicyConfig
from .simulation import ExperimentPlan

_PROB = {"type": "number", "minimum": 0, "maximum": 1}
_EDGES = {"type": "array", "minItems": 1,
          "items": {"type": "array", "items": {"type": "integer", "minimum": 0},
                    "minItems": 2, "maxItems": 2}}
_POS_INT = {"type": "integer", "minimum": 1}

_DISTRIBUTION = {
    "oneOf": [
        {"type": "object", "additionalProperties": False, "required": ["type", "mean"],
         "properties": {"type": {"const": "bernoulli"}, "mean": _PROB}},
        {"type": "object", "additionalProperties": False, "required": ["type", "low", "high"],
         "properties": {"type": {"const": "uniform"}, "low": _PROB, "high": _PROB}},
        {"type": "object", "additionalProperties": False, "required": ["type", "value"],
         "properties": {"type": {"const": "fixed"}, "value": _PROB}},
    ]
}

ENVIRONMENT_SCHEMA = {
    "type": "object", "additionalProperties": False,
    "properties": {
        "bernoulli": {"type": "array", "minItems": 1, "items": _PROB},
        "distributions": {"type": "array", "minItems": 1, "items": _DISTRIBUTION},
    },
    "oneOf": [{"required": ["bernoulli"]}, {"required": ["distributions"]}],
}

ACTION_SET_SCHEMA = {
    "type": "object",
    "required": ["type"],
    "properties": {"type": {"enum": ["explicit", "matching", "paths", "trees"]}},
    "allOf": [
        {"if": {"properties": {"type": {"const": "explicit"}}},
         "then": {"additionalProperties": False, "required": ["arms"],
                  "properties": {
                      "type": {}, "n_vars": _POS_INT,
                      "arms": {"type": "array", "minItems": 1, "items": {"oneOf": [
                          {"type": "array", "items": {"type": "integer", "minimum": 0}},
                          {"type": "object", "patternProperties": {
                              "^[0-9]+$": {"type": "number", "exclusiveMinimum": 0}},
                           "additionalProperties": False},
                      ]}}}}},
        {"if": {"properties": {"type": {"const": "matching"}}},
         "then": {"additionalProperties": False, "required": ["users", "channels"],
                  "properties": {"type": {}, "users": _POS_INT, "channels": _POS_INT}}},
        {"if": {"properties": {"type": {"const": "paths"}}},
         "then": {"additionalProperties": False,
                  "required": ["n_nodes", "edges", "source", "dest"],
                  "properties": {"type": {}, "n_nodes": _POS_INT, "edges": _EDGES,
                                 "source": {"type": "integer", "minimum": 0},
                                 "dest": {"type": "integer", "minimum": 0},
                                 "algorithm": {"enum": ["dijkstra", "bellman-ford"]},
                                 "max_support": _POS_INT}}},
        {"if": {"properties": {"type": {"const": "trees"}}},
         "then": {"additionalProperties": False, "required": ["n_nodes", "edges"],
                  "properties": {"type": {}, "n_nodes": _POS_INT, "edges": _EDGES,
                                 "algorithm": {"enum": ["kruskal", "prim"]},
                                 "max_support": _POS_INT}}},
    ],
}

POLICY_SCHEMA = {
    "type": "object", "additionalProperties": False, "required": ["kind"],
    "properties": {
        "kind": {"enum": list(KINDS)},
        "K": _POS_INT,
        "exploration_L": _POS_INT,
        "init_mode": {"enum": list(INIT_MODES)},
    },
}

CONFIG_SCHEMA = {
    "type": "object", "additionalProperties": False,
    "required": ["instance", "policies", "horizon"],
    "properties": {
        "instance": {"oneOf": [
            {"type": "string", "enum": sorted(PAPER_MEANS)},
            {"type": "object", "additionalProperties": False,
             "required": ["environment", "action_set"],
             "properties": {"name": {"type": "string"},
                            "environment": ENVIRONMENT_SCHEMA,
                            "action_set": ACTION_SET_SCHEMA}},
        ]},
        "policies": {"type": "array", "minItems": 1, "items": POLICY_SCHEMA},
        "horizon": _POS_INT,
        "runs": _POS_INT,
        "seed": {"type": "integer", "minimum": 0, "maximum": 2**64 - 1},
        "checkpoints": {"type": "array", "minItems": 1, "items": _POS_INT},
        "output_dir": {"type": "string", "minLength": 1},
    },
}


def _line_of(text: str, path) -> int | None:
    """1-based line of the JSON value at ``path`` (keys and list indices)."""
    try:
        node = yaml.compose(text)
    except yaml.YAMLError:
        return None
    line = node.start_mark.line + 1 if node is not None else None
    for key in path:
        if isinstance(node, yaml.MappingNode):
            for k, v in node.value:
                if k.value == key:
                    node = v
                    line = k.start_mark.line + 1
                    break
            else:
                break
        elif isinstance(node, yaml.SequenceNode) and isinstance(key, int) and key < len(node.value):
            node = node.value[key]
            line = node.start_mark.line + 1
        else:
            break
    return line


def _where(source: str, line: int | None) -> str:
    return f"{source}:{line}" if line is not None else source


def _describe(err: jsonschema.ValidationError) -> str:
    path = "/".join(str(p) for p in err.absolute_path) or "<root>"
    if err.validator == "required":
        return f"{path}: {err.message}"
    if err.validator == "additionalProperties":
        return f"{path}: unknown key ({err.message})"
    if err.validator == "oneOf" and err.context:
        best = jsonschema.exceptions.best_match(err.context)
        return f"{path}: {best.message}"
    return f"{path}: {err.message}"


def validate_text(text: str, source: str = "<config>", schema=CONFIG_SCHEMA) -> dict:
    """Parse and schema-check a JSON document, raising ConfigurationError with a line."""
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigurationError(f"{source}:{exc.lineno}: invalid JSON: {exc.msg}") from None
    errors = sorted(jsonschema.Draft202012Validator(schema).iter_errors(doc),
                    key=lambda e: (len(e.absolute_path), list(map(str, e.absolute_path))))
    if errors:
        err = errors[0]
        where = list(err.absolute_path)
        if err.validator == "additionalProperties" and isinstance(err.instance, dict):
            extra = [k for k in err.instance if k not in err.schema.get("properties", {})]
            where += extra[:1]
        line = _line_of(text, where)
        raise ConfigurationError(f"{_where(source, line)}: {_describe(err)}")
    return doc


# ---------------------------------------------------------------------------
# Document -> objects
# ---------------------------------------------------------------------------

def build_environment(doc: dict, seed: int = 0) -> EnvironmentSpec:
    if "bernoulli" in doc:
        return EnvironmentSpec.bernoulli(doc["bernoulli"], seed)
    dists = []
    for d in doc["distributions"]:
        if d["type"] == "bernoulli":
            dists.append(Bernoulli(float(d["mean"])))
        elif d["type"] == "uniform":
            dists.append(Uniform(float(d["low"]), float(d["high"])))
        else:
            dists.append(Fixed(float(d["value"])))
    return EnvironmentSpec(tuple(dists), seed)


def build_action_set(doc: dict) -> ActionSet:
    kind = doc["type"]
    if kind == "matching":
        return BipartiteMatching(doc["users"], doc["channels"])
    if kind == "paths":
        return SourceDestPaths(doc["n_nodes"], tuple(map(tuple, doc["edges"])), doc["source"],
                               doc["dest"], doc.get("algorithm", "dijkstra"),
                               doc.get("max_support"))
    if kind == "trees":
        return SpanningTrees(doc["n_nodes"], tuple(map(tuple, doc["edges"])),
                             doc.get("algorithm", "kruskal"), doc.get("max_support"))
    arms_doc = doc["arms"]
    n_vars = doc.get("n_vars")
    if n_vars is None:
        top = 0
        for a in arms_doc:
            keys = [int(k) for k in a] if isinstance(a, dict) else a
            top = max([top] + [k + 1 for k in keys])
        n_vars = top
    arms = []
    for a in arms_doc:
        if isinstance(a, dict):
            arms.append(ActionVector.from_mapping({int(k): float(v) for k, v in a.items()}, n_vars))
        else:
            arms.append(ActionVector.from_support(a, n_vars))
    return ExplicitArms(tuple(arms), n_vars)


@dataclass(frozen=True)
class RunConfig:
    """A validated config: the plan plus where to write results."""

    plan: ExperimentPlan
    output_dir: str
    document: dict


def plan_from_document(doc: dict, seed: int | None = None, horizon: int | None = None,
                       runs: int | None = None) -> RunConfig:
    """Build the plan, applying command-line overrides."""
    doc = json.loads(json.dumps(doc))
    if seed is not None:
        doc["seed"] = seed
    if horizon is not None:
        doc["horizon"] = horizon
    if runs is not None:
        doc["runs"] = runs
    master = int(doc.get("seed", 0))
    policies = []
    for k, p in enumerate(doc["policies"]):
        try:
            policies.append(PolicyConfig(p["kind"], p.get("K"), p.get("exploration_L"),
                                         p.get("init_mode", "literal")))
        except ConfigurationError as exc:
            exc.path = ["policies", k]
            raise
    inst = doc["instance"]
    checkpoints = doc.get("checkpoints")
    n_runs = int(doc.get("runs", 20))
    if checkpoints is not None:
        checkpoints = [c for c in checkpoints if c <= doc["horizon"]]
        if not checkpoints or checkpoints[-1] != doc["horizon"]:
            checkpoints.append(doc["horizon"])
    if isinstance(inst, str):
        plan = ExperimentPlan.paper(inst, policies, doc["horizon"], n_runs, master, checkpoints)
    else:
        try:
            env = build_environment(inst["environment"], master)
            problem = build_action_set(inst["action_set"])
        except BanditError as exc:
            exc.path = ["instance"]
            raise
        plan = ExperimentPlan(env, problem, tuple(policies), doc["horizon"], n_runs,
                              None if checkpoints is None else tuple(checkpoints), master,
                              inst.get("name", "custom"))
    return RunConfig(plan, doc.get("output_dir", "results"), doc)


def load_config(path, seed=None, horizon=None, runs=None) -> RunConfig:
    """Read, validate and build a config file."""
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise ConfigurationError(f"{path}: cannot read config ({exc.strerror})") from None
    doc = validate_text(text, str(path))
    try:
        return plan_from_document(doc, seed, horizon, runs)
    except BanditError as exc:
        line = _line_of(text, getattr(exc, "path", []))
        raise ConfigurationError(f"{_where(str(path), line)}: {exc}") from None


# ---------------------------------------------------------------------------
# Objects -> document
# ---------------------------------------------------------------------------

def _distribution_doc(d) -> dict:
    if isinstance(d, Bernoulli):
        return {"type": "bernoulli", "mean": d.mean}
    if isinstance(d, Uniform):
        return {"type": "uniform", "low": d.low, "high": d.high}
    return {"type": "fixed", "value": d.value}


def action_set_document(problem: ActionSet) -> dict:
    if isinstance(problem, BipartiteMatching):
        return {"type": "matching", "users": problem.users, "channels": problem.channels}
    if isinstance(problem, SourceDestPaths):
        doc = {"type": "paths", "n_nodes": problem.n_nodes,
               "edges": [list(e) for e in problem.edges], "source": problem.source,
               "dest": problem.dest, "algorithm": problem.algorithm}
    elif isinstance(problem, SpanningTrees):
        doc = {"type": "trees", "n_nodes": problem.n_nodes,
               "edges": [list(e) for e in problem.edges], "algorithm": problem.algorithm}
    else:
        return {"type": "explicit", "n_vars": problem.n_vars,
                "arms": [{str(i): a for i, a in zip(arm.indices, arm.weights)}
                         for arm in problem.arms]}
    if problem.max_support is not None:
        doc["max_support"] = problem.max_support
    return doc


def plan_document(plan: ExperimentPlan, output_dir: str = "results") -> dict:
    """Config document that rebuilds an equivalent plan."""
    if plan.instance in PAPER_MEANS:
        instance = plan.instance
    else:
        dists = plan.environment.distributions
        env = ({"bernoulli": [d.mean for d in dists]} if all(isinstance(d, Bernoulli) for d in dists)
               else {"distributions": [_distribution_doc(d) for d in dists]})
        instance = {"name": plan.instance, "environment": env,
                    "action_set": action_set_document(plan.action_set)}
    policies = []
    for p in plan.policies:
        entry = {"kind": p.kind}
        if p.K is not None:
            entry["K"] = p.K
        if p.exploration_L is not None:
            entry["exploration_L"] = p.exploration_L
        if p.init_mode != "literal":
            entry["init_mode"] = p.init_mode
        policies.append(entry)
    doc = {"instance": instance, "policies": policies, "horizon": plan.horizon,
           "runs": plan.n_runs, "seed": plan.master_seed}
    if plan.checkpoints is not None:
        doc["checkpoints"] = list(plan.checkpoints)
    doc["output_dir"] = output_dir
    return doc


def dump_config(plan: ExperimentPlan, output_dir: str = "results") -> str:
    return json.dumps(plan_document(plan, output_dir), indent=2) + "\n"
