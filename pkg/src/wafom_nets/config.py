"""Run configuration for the wafom-nets CLI."""

import logging
import os
from dataclasses import dataclass, field, fields
from typing import Optional, Tuple

import numpy as np

from .integrate import FLOAT_FLOOR
from .nets import ENUMERATION_LIMIT

logger = logging.getLogger(__name__)

JOBS_ENV = 'WAFOM_NETS_JOBS'


def _kind(name: str) -> dict:
    return {'kind': name}


@dataclass
class RunConfig:
    """Every setting of one CLI run, serialisable as ``key=value;...``."""

    command: str = field(default='', metadata=_kind('str'))
    base: int = field(default=2, metadata=_kind('int'))
    s: int = field(default=1, metadata=_kind('int'))
    d: int = field(default=4, metadata=_kind('int'))
    l: Optional[int] = field(default=None, metadata=_kind('int?'))
    weights: str = field(default='power:a=0,r=1,c=0', metadata=_kind('str'))
    target: str = field(default='min_wafom', metadata=_kind('str'))
    trials: int = field(default=16, metadata=_kind('int'))
    seed: Optional[int] = field(default=None, metadata=_kind('int?'))
    jobs: Optional[int] = field(default=None, metadata=_kind('int?'))
    matrix: Optional[str] = field(default=None, metadata=_kind('str?'))
    output: Optional[str] = field(default=None, metadata=_kind('str?'))
    enumeration_cap: int = field(default=ENUMERATION_LIMIT, metadata=_kind('int'))
    float_floor: float = field(default=FLOAT_FLOOR, metadata=_kind('float'))
    s_list: Tuple[int, ...] = field(default=(1, 2), metadata=_kind('ints'))
    d_list: Tuple[int, ...] = field(default=tuple(range(2, 9)), metadata=_kind('ints'))
    family: str = field(default='exp-linear', metadata=_kind('str'))
    regime: str = field(default='conv', metadata=_kind('str'))
    n: Optional[int] = field(default=None, metadata=_kind('int?'))
    M: Optional[float] = field(default=None, metadata=_kind('float?'))
    epsilon: Optional[float] = field(default=None, metadata=_kind('float?'))
    json_output: bool = field(default=False, metadata=_kind('bool'))
    table: bool = field(default=False, metadata=_kind('bool'))

    def to_string(self) -> str:
        """Canonical form: sorted keys, lists comma-joined, None as empty."""
        parts = []
        for f in sorted(fields(self), key=lambda f: f.name):
            text = _render(getattr(self, f.name))
            if ';' in text:
                raise ValueError(f"Value of {f.name} may not contain ';': {text}")
            parts.append(f"{f.name}={text}")
        return ';'.join(parts)

    @classmethod
    def from_string(cls, text: str) -> 'RunConfig':
        kinds = {f.name: f.metadata['kind'] for f in fields(cls)}
        values = {}
        for item in text.split(';'):
            if not item:
                continue
            key, eq, value = item.partition('=')
            if not eq:
                raise ValueError(f"Expected key=value, got '{item}'")
            if key not in kinds:
                raise ValueError(f"Unknown config key '{key}'")
            values[key] = _parse(kinds[key], value)
        return cls(**values)


def _render(value) -> str:
    if value is None:
        return ''
    if isinstance(value, bool):
        return 'true' if value else 'false'
    if isinstance(value, tuple):
        return ','.join(str(v) for v in value)
    if isinstance(value, float):
        return repr(value)
    return str(value)


def _parse(kind: str, text: str):
    if kind.endswith('?'):
        if text == '':
            return None
        kind = kind[:-1]
    if kind == 'int':
        return int(text)
    if kind == 'float':
        return float(text)
    if kind == 'bool':
        if text not in ('true', 'false'):
            raise ValueError(f"Expected true or false, got '{text}'")
        return text == 'true'
    if kind == 'ints':
        return tuple(int(v) for v in text.split(',') if v)
    return text


def resolve_jobs(jobs: Optional[int] = None) -> int:
    """--jobs, else WAFOM_NETS_JOBS, else the number of logical cores."""
    if jobs is None:
        env = os.environ.get(JOBS_ENV)
        if env:
            try:
                jobs = int(env)
            except ValueError:
                raise ValueError(f"{JOBS_ENV} must be an integer, got '{env}'")
        else:
            jobs = os.cpu_count() or 1
    if jobs < 1:
        raise ValueError(f"Worker count must be at least 1, got {jobs}")
    return jobs


def resolve_seed(seed: Optional[int] = None) -> Tuple[int, bool]:
    """The given seed, or one drawn from OS entropy; second item tells which."""
    if seed is not None:
        if seed < 0:
            raise ValueError(f"Seed must be non-negative, got {seed}")
        return seed, False
    drawn = int(np.random.SeedSequence().entropy) % 2 ** 63
    logger.debug("drew seed %d from entropy", drawn)
    return drawn, True
