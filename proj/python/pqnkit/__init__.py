"""Symbolic tensor fields and sampled checks of Poisson quasi-Nijenhuis and Haantjes identities."""

import json
from dataclasses import dataclass, field
from os import PathLike
from typing import Dict, List, Optional, Sequence, Union

from . import _core
from ._core import ExpressionError, InputError, catalog_names, derivative, evaluate, normalize, suite_names

__all__ = [
    "ExpressionError",
    "InputError",
    "Result",
    "catalog",
    "catalog_names",
    "derivative",
    "evaluate",
    "load",
    "normalize",
    "suite_names",
    "table",
    "verify",
]


@dataclass
class Result:
    passed: bool
    report: dict
    failed: List[str] = field(default_factory=list)
    text: str = ""

    def check(self, name: str) -> dict:
        for c in self.report["checks"]:
            if c["name"] == name:
                return c
        raise KeyError(name)

    @property
    def exit_code(self) -> int:
        return 0 if self.passed else 1


def catalog(name: str, **params) -> str:
    """Structure file text for a catalog entry, e.g. catalog("closed-toda", n=3)."""
    return _core.catalog(name, {k: str(v) for k, v in params.items()})


def load(path: Union[str, PathLike]) -> str:
    with open(path, encoding="utf-8") as f:
        return f.read()


def _run(text: str, table: bool, suites: Optional[Sequence[str]], **opts) -> Result:
    ok, report, failed = _core.verify(text, list(suites or []), table=table, **opts)
    return Result(ok, json.loads(report), list(failed), report)


def verify(text: str, suites: Optional[Sequence[str]] = None, **opts) -> Result:
    """Runs suites (all by default) on structure file text.

    Keyword options: seed, samples, tol, box ("lo:hi" or per-coordinate), kmax, resample_limit.
    """
    return _run(text, False, suites, **opts)


def table(text: str, **opts) -> Result:
    """Involutivity table of the trace invariants; see Result.report["table"]."""
    return _run(text, True, None, **opts)
