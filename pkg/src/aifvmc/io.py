"""JSON file formats.  Every exact number is a ``"num/den"`` string, never a JSON number."""
from __future__ import annotations

import json
from pathlib import Path

from .codec import AifvCode, SourceDistribution
from .core import ProblemSpec, StateSpec, format_rational, to_rational
from .errors import InputError


def _load_json(text: str, what: str):
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise InputError(f"{what} is not valid JSON: {exc}") from None


def _exact(value, where: str):
    if not isinstance(value, str):
        raise InputError(f"{where}: exact values must be fraction strings, got {value!r}")
    return to_rational(value)


def _dump(doc) -> str:
    return json.dumps(doc, indent=1, sort_keys=True) + "\n"


def problem_to_dict(problem: ProblemSpec) -> dict:
    return {
        "m": problem.m,
        "types": [
            [{"reward": format_rational(s.reward), "q": [format_rational(v) for v in s.q]} for s in states]
            for states in problem.state_sets
        ],
    }


def problem_from_dict(doc) -> ProblemSpec:
    if not isinstance(doc, dict):
        raise InputError("problem file must hold a JSON object")
    m, types = doc.get("m"), doc.get("types")
    if not isinstance(m, int) or isinstance(m, bool):
        raise InputError("problem file needs an integer 'm'")
    if not isinstance(types, list):
        raise InputError("problem file needs a 'types' list")
    sets = []
    for k, states in enumerate(types):
        if not isinstance(states, list):
            raise InputError(f"types[{k}] must be a list of states")
        row = []
        for i, s in enumerate(states):
            where = f"types[{k}][{i}]"
            if not isinstance(s, dict) or not isinstance(s.get("q"), list):
                raise InputError(f"{where}: state needs 'reward' and a 'q' list")
            reward = _exact(s.get("reward"), where + ".reward")
            q = tuple(_exact(v, f"{where}.q") for v in s["q"])
            try:
                row.append(StateSpec(reward, q))
            except InputError as exc:
                raise InputError(f"{where}: {exc}") from None
        sets.append(tuple(row))
    return ProblemSpec(m, tuple(sets))


def dumps_problem(problem: ProblemSpec) -> str:
    return _dump(problem_to_dict(problem))


def loads_problem(text: str) -> ProblemSpec:
    return problem_from_dict(_load_json(text, "problem file"))


def source_to_dict(source: SourceDistribution) -> dict:
    return {
        "b": source.b,
        "symbols": list(source.symbols),
        "probs": [format_rational(p) for p in source.probs],
    }


def source_from_dict(doc) -> SourceDistribution:
    if not isinstance(doc, dict):
        raise InputError("source file must hold a JSON object")
    b, symbols, probs = doc.get("b"), doc.get("symbols"), doc.get("probs")
    if not isinstance(b, int) or isinstance(b, bool):
        raise InputError("source file needs an integer 'b'")
    if not isinstance(symbols, list) or not isinstance(probs, list):
        raise InputError("source file needs 'symbols' and 'probs' lists")
    return SourceDistribution(tuple(symbols), tuple(_exact(p, "probs") for p in probs), b)


def dumps_source(source: SourceDistribution) -> str:
    return _dump(source_to_dict(source))


def loads_source(text: str) -> SourceDistribution:
    return source_from_dict(_load_json(text, "source file"))


def _read(path) -> str:
    try:
        return Path(path).read_text()
    except OSError as exc:
        raise InputError(f"cannot read {path}: {exc.strerror}") from None


def read_problem(path) -> ProblemSpec:
    return loads_problem(_read(path))


def read_source(path) -> SourceDistribution:
    return loads_source(_read(path))


def read_code(path, validate: bool = True) -> AifvCode:
    return AifvCode.from_json(_read(path), validate=validate)
