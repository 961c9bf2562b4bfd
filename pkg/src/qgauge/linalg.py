"""Incremental sparse Gauss-Jordan elimination over exact rationals.

Rows are dicts ``column -> mpq`` and represent ``sum a_k c_k + b = 0`` with
the constant ``b`` stored under the column index ``ncols``.  The stored
basis is kept in reduced row-echelon form, pivots at the smallest column.
"""

from __future__ import annotations

from gmpy2 import mpq

__all__ = ["RowReducer"]


class RowReducer:
    def __init__(self, ncols: int):
        self.ncols = ncols
        self.const = ncols
        self.rows: dict[int, dict[int, mpq]] = {}
        self.inconsistent: dict | None = None

    @property
    def rank(self) -> int:
        return len(self.rows)

    def reduce(self, row: dict) -> dict:
        row = {k: mpq(v) for k, v in row.items() if v}
        for p in [k for k in row if k in self.rows]:
            f = row.get(p)
            if not f:
                continue
            for k, v in self.rows[p].items():
                w = row.get(k, 0) - f * v
                if w:
                    row[k] = w
                else:
                    row.pop(k, None)
        return row

    def add(self, row: dict, tag=None) -> bool:
        """Insert a row; True if the rank grew."""
        row = self.reduce(row)
        if not row:
            return False
        piv = min(row)
        if piv == self.const:
            if self.inconsistent is None:
                self.inconsistent = {"tag": tag, "value": row[piv]}
            return False
        inv = 1 / row[piv]
        row = {k: v * inv for k, v in row.items()}
        for p, other in self.rows.items():
            f = other.get(piv)
            if f:
                for k, v in row.items():
                    w = other.get(k, 0) - f * v
                    if w:
                        other[k] = w
                    else:
                        other.pop(k, None)
        self.rows[piv] = row
        return True

    @property
    def consistent(self) -> bool:
        return self.inconsistent is None

    def pivots(self) -> list[int]:
        return sorted(self.rows)

    def free_columns(self) -> list[int]:
        return [k for k in range(self.ncols) if k not in self.rows]

    def particular(self) -> dict[int, mpq]:
        """Solution with all free unknowns set to zero."""
        out = {}
        for p, row in self.rows.items():
            b = row.get(self.const)
            if b:
                out[p] = -b
        return out

    def nullspace(self) -> list[dict[int, mpq]]:
        """Basis of the homogeneous solutions, one vector per free column."""
        basis = []
        free = self.free_columns()
        for f in free:
            vec = {f: mpq(1)}
            for p, row in self.rows.items():
                v = row.get(f)
                if v:
                    vec[p] = -v
            basis.append(vec)
        return basis
