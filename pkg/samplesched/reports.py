"""
Tabular experiment reports. Rows are plain dicts; CSV goes through a pandas
DataFrame, JSON carries the rows plus the pass flag and notes.
"""
import json
import logging
import sys
from dataclasses import dataclass, field
from typing import List, Optional

import numpy as np
import pandas as pd

log = logging.getLogger(__name__)

METHODS = ('exact-pairwise', 'exact-enumeration', 'monte-carlo')
FORMATS = ('csv', 'json')


@dataclass
class Report:
    command : str
    rows : List[dict] = field(default_factory=list)
    passed : bool = True
    notes : List[str] = field(default_factory=list)

    def add(self, **row):
        self.rows.append(row)

    def note(self, text : str):
        log.info("%s: %s", self.command, text)
        self.notes.append(text)

    def frame(self) -> pd.DataFrame:
        return pd.DataFrame(self.rows)


def _plain(x):
    "numpy scalars and arrays to JSON-native values"
    if isinstance(x, np.generic):
        return x.item()
    if isinstance(x, np.ndarray):
        return x.tolist()
    raise TypeError(f"{type(x).__name__} is not JSON serializable")


def write_report(report : Report, path : Optional[str] = None, fmt : str = 'csv') -> None:
    """
    Write to path, or stdout when path is None. Infinite alphas go out as
    inf in CSV and Infinity in JSON; a missing bound is an empty CSV cell
    and null in JSON.
    """
    if fmt not in FORMATS:
        raise ValueError(f"unknown report format {fmt!r}; expected one of {', '.join(FORMATS)}")
    if fmt == 'csv':
        text = report.frame().to_csv(index=False)
    else:
        doc = {'command': report.command, 'passed': report.passed,
               'notes': report.notes, 'rows': report.rows}
        text = json.dumps(doc, indent=2, default=_plain) + '\n'
    if path is None:
        sys.stdout.write(text)
    else:
        with open(path, 'w') as f:
            f.write(text)
        log.info("wrote %d rows to %s", len(report.rows), path)


def agree(value : float, stderr : float, exact : float, width : float = 4.0) -> bool:
    "Monte Carlo value within width standard errors of the exact one (plus rounding slack)"
    return abs(value - exact) <= width * stderr + 1e-9 * max(1.0, abs(exact))


def rel_error(value : float, target : float) -> float:
    if target == 0:
        return abs(value)
    return abs(value - target) / abs(target)
