"""Tabular scenario outputs."""

from dataclasses import dataclass, field
from typing import Any, Dict, List, Optional, Sequence

import numpy as np

from dipolesim.observables import ObservableRecord


@dataclass
class Table:
    """One output table; `columns` is the fixed schema written as the CSV header."""

    name: str
    columns: Sequence[str]
    rows: List[Dict[str, Any]] = field(default_factory=list)

    def append(self, **row):
        unknown = set(row) - set(self.columns)
        if unknown:
            raise KeyError(f"table '{self.name}' has no columns {sorted(unknown)}")
        self.rows.append(row)

    def column(self, name: str) -> np.ndarray:
        return np.array([row.get(name, np.nan) for row in self.rows], dtype=float)

    def __len__(self):
        return len(self.rows)


@dataclass
class ScenarioResult:
    preset: str
    tables: List[Table] = field(default_factory=list)
    summary: Dict[str, Any] = field(default_factory=dict)
    records: List[ObservableRecord] = field(default_factory=list)
    seeds: List[int] = field(default_factory=list)

    def add_table(self, name: str, columns: Sequence[str]) -> Table:
        table = Table(name, tuple(columns))
        self.tables.append(table)
        return table

    def table(self, name: str) -> Optional[Table]:
        for table in self.tables:
            if table.name == name:
                return table
        return None


def manifold_columns(n_max: int, prefix: str = "p") -> List[str]:
    return [f"{prefix}{n}" for n in range(n_max + 1)]


def manifold_values(manifolds: np.ndarray, n_max: int, prefix: str = "p") -> Dict[str, float]:
    """Manifold populations keyed p0..p<n_max>, zero-padded for smaller bases."""
    values = {}
    for n in range(n_max + 1):
        values[f"{prefix}{n}"] = float(manifolds[n]) if n < len(manifolds) else 0.0
    return values
