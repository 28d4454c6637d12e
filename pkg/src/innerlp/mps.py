"""MPS reading and writing, and conversion to ``min c^T x, A x = b, x >= 0``.

The reader accepts free-format files (whitespace-separated fields) and falls
back to the classic fixed column positions for lines whose names contain
blanks. Integer markers are ignored, so integer programs are read as their
continuous relaxation.
"""

from __future__ import annotations

import enum
import gzip
import io
import math
import os
from dataclasses import dataclass, field

import numpy as np

from .errors import DimensionError, InfeasibleError, MpsParseError
from .sparse import CsrMatrix, matvec

__all__ = [
    "RowType",
    "LpProblem",
    "Transform",
    "TransformRecord",
    "StandardFormLp",
    "parse_mps",
    "read_mps",
    "write_mps",
    "to_standard_form",
    "recover_solution",
]

INF = math.inf


class RowType(str, enum.Enum):
    E = "E"
    L = "L"
    G = "G"


@dataclass(eq=False)
class LpProblem:
    """``min/max c^T x + objective_constant`` over rows ``a_i x (rel) b_i``.

    ``ranges`` holds the raw RANGES value of each row (NaN where absent);
    :meth:`row_bounds` gives the resulting two-sided row bounds.
    """

    A: CsrMatrix
    b: np.ndarray
    c: np.ndarray
    row_types: list
    lower: np.ndarray = None
    upper: np.ndarray = None
    row_names: list = None
    col_names: list = None
    objective_constant: float = 0.0
    ranges: np.ndarray = None
    maximize: bool = False
    name: str = ""

    def __post_init__(self):
        m, n = self.A.shape
        self.b = np.asarray(self.b, dtype=np.float64)
        self.c = np.asarray(self.c, dtype=np.float64)
        self.row_types = [RowType(t) for t in self.row_types]
        self.lower = np.zeros(n) if self.lower is None else np.asarray(self.lower, dtype=np.float64)
        self.upper = np.full(n, INF) if self.upper is None else np.asarray(self.upper, dtype=np.float64)
        self.ranges = np.full(m, np.nan) if self.ranges is None else np.asarray(self.ranges, dtype=np.float64)
        if self.row_names is None:
            self.row_names = [f"R{i}" for i in range(m)]
        if self.col_names is None:
            self.col_names = [f"C{j}" for j in range(n)]
        shapes = {
            "b": (self.b.shape, (m,)),
            "c": (self.c.shape, (n,)),
            "lower": (self.lower.shape, (n,)),
            "upper": (self.upper.shape, (n,)),
            "ranges": (self.ranges.shape, (m,)),
        }
        for what, (got, want) in shapes.items():
            if got != want:
                raise DimensionError(f"{what}: expected shape {want}, got {got}")
        if len(self.row_types) != m or len(self.row_names) != m or len(self.col_names) != n:
            raise DimensionError("row/column labels do not match A")
        bad = np.flatnonzero(self.lower > self.upper)
        if bad.size:
            j = int(bad[0])
            raise InfeasibleError(
                f"column {self.col_names[j]}: lower bound {self.lower[j]} exceeds upper bound {self.upper[j]}"
            )

    @property
    def shape(self):
        return self.A.shape

    def row_bounds(self):
        """Two-sided row bounds ``(lo, hi)`` after applying RANGES."""
        m = self.A.nrows
        lo = np.empty(m)
        hi = np.empty(m)
        for i, t in enumerate(self.row_types):
            b, r = self.b[i], self.ranges[i]
            if t is RowType.E:
                lo[i] = hi[i] = b
                if not np.isnan(r):
                    if r >= 0:
                        hi[i] = b + r
                    else:
                        lo[i] = b + r
            elif t is RowType.L:
                lo[i], hi[i] = (-INF if np.isnan(r) else b - abs(r)), b
            else:
                lo[i], hi[i] = b, (INF if np.isnan(r) else b + abs(r))
        return lo, hi

    def objective(self, x):
        return float(self.c @ x) + self.objective_constant


# --------------------------------------------------------------------------- parsing

_SECTIONS = {"NAME", "OBJSENSE", "OBJSENCE", "OBJNAME", "ROWS", "COLUMNS", "RHS", "RANGES", "BOUNDS", "ENDATA"}
_BOUND_TYPES = {"UP", "LO", "FX", "FR", "MI", "PL", "BV", "LI", "UI"}
_VALUELESS = {"FR", "MI", "PL", "BV"}


def _fixed_fields(line):
    cuts = ((1, 3), (4, 12), (14, 22), (24, 36), (39, 47), (49, 61))
    return [line[a:b].strip() for a, b in cuts]


class _Builder:
    def __init__(self):
        self.name = ""
        self.maximize = False
        self.obj_row = None
        self.obj_name_hint = None
        self.row_index = {}
        self.row_names = []
        self.row_types = []
        self.free_rows = set()
        self.col_index = {}
        self.col_names = []
        self.entries = {}  # (row, col) -> value
        self.obj = {}
        self.rhs = {}
        self.obj_constant = 0.0
        self.ranges = {}
        self.lower = {}
        self.upper = {}
        self.bound_seen = {}
        self.rhs_set = None
        self.range_set = None
        self.bound_set = None
        self.section = None
        self.ended = False

    # each handler raises MpsParseError on a bad line
    def row_line(self, tok, ln):
        if len(tok) != 2:
            raise MpsParseError(f"ROWS line needs 2 fields, got {len(tok)}", ln)
        kind, name = tok[0].upper(), tok[1]
        if name in self.row_index or name == self.obj_row or name in self.free_rows:
            raise MpsParseError(f"duplicate row name {name!r}", ln)
        if kind == "N":
            if self.obj_row is None and (self.obj_name_hint is None or self.obj_name_hint == name):
                self.obj_row = name
            else:
                self.free_rows.add(name)
        elif kind in ("E", "L", "G"):
            self.row_index[name] = len(self.row_names)
            self.row_names.append(name)
            self.row_types.append(kind)
        else:
            raise MpsParseError(f"unknown row type {tok[0]!r}", ln)

    def _number(self, s, ln):
        try:
            v = float(s)
        except ValueError:
            raise MpsParseError(f"bad number {s!r}", ln) from None
        if math.isnan(v):
            raise MpsParseError(f"bad number {s!r}", ln)
        return v

    def _pairs(self, tok, ln, what):
        if len(tok) not in (2, 4):
            raise MpsParseError(f"{what} line has {len(tok)} fields", ln)
        return [(tok[k], self._number(tok[k + 1], ln)) for k in range(0, len(tok), 2)]

    def column_line(self, tok, ln):
        if len(tok) >= 3 and tok[1].strip("'\"").upper() == "MARKER":
            return
        if len(tok) not in (3, 5):
            raise MpsParseError(f"COLUMNS line needs 3 or 5 fields, got {len(tok)}", ln)
        col = tok[0]
        j = self.col_index.get(col)
        if j is None:
            j = self.col_index[col] = len(self.col_names)
            self.col_names.append(col)
        for row, val in self._pairs(tok[1:], ln, "COLUMNS"):
            if row == self.obj_row:
                self.obj[j] = self.obj.get(j, 0.0) + val
            elif row in self.free_rows:
                continue
            elif row in self.row_index:
                key = (self.row_index[row], j)
                self.entries[key] = self.entries.get(key, 0.0) + val
            else:
                raise MpsParseError(f"unknown row name {row!r}", ln)

    def _set_name(self, tok, attr):
        # odd field count means a leading set name
        if len(tok) % 2 == 1:
            name, tok = tok[0], tok[1:]
        else:
            name = ""
        cur = getattr(self, attr)
        if cur is None:
            setattr(self, attr, name)
            cur = name
        return tok if cur == name else None

    def rhs_line(self, tok, ln):
        if len(tok) not in (2, 3, 4, 5):
            raise MpsParseError(f"RHS line has {len(tok)} fields", ln)
        tok = self._set_name(tok, "rhs_set")
        if tok is None:
            return
        for row, val in self._pairs(tok, ln, "RHS"):
            if row == self.obj_row:
                self.obj_constant = -val
            elif row in self.free_rows:
                continue
            elif row in self.row_index:
                self.rhs[self.row_index[row]] = val
            else:
                raise MpsParseError(f"unknown row name {row!r}", ln)

    def range_line(self, tok, ln):
        if len(tok) not in (2, 3, 4, 5):
            raise MpsParseError(f"RANGES line has {len(tok)} fields", ln)
        tok = self._set_name(tok, "range_set")
        if tok is None:
            return
        for row, val in self._pairs(tok, ln, "RANGES"):
            if row not in self.row_index:
                raise MpsParseError(f"unknown row name {row!r} in RANGES", ln)
            self.ranges[self.row_index[row]] = val

    def bound_line(self, tok, ln):
        if not tok:
            raise MpsParseError("empty BOUNDS line", ln)
        kind = tok[0].upper()
        if kind not in _BOUND_TYPES:
            raise MpsParseError(f"unknown or unsupported bound type {tok[0]!r}", ln)
        rest = tok[1:]
        want = 1 if kind in _VALUELESS else 2
        if kind == "BV" and len(rest) == 3:
            want = 2  # some writers attach a value to BV
        if len(rest) == want + 1:
            setname, rest = rest[0], rest[1:]
        elif len(rest) == want:
            setname = ""
        else:
            raise MpsParseError(f"BOUNDS {kind} line has {len(tok)} fields", ln)
        if self.bound_set is None:
            self.bound_set = setname
        if setname != self.bound_set:
            return
        col = rest[0]
        if col not in self.col_index:
            raise MpsParseError(f"unknown column name {col!r} in BOUNDS", ln)
        j = self.col_index[col]
        val = self._number(rest[1], ln) if len(rest) > 1 else None
        prev = self.bound_seen.get((j, kind))
        if prev is not None and prev != val:
            raise MpsParseError(f"conflicting duplicate {kind} bound on column {col!r}", ln)
        self.bound_seen[(j, kind)] = val
        if kind in ("UP", "UI"):
            if val < 0 and self.lower.get(j, 0.0) == 0.0 and (j, "LO") not in self.bound_seen:
                self.lower[j] = -INF
            self.upper[j] = val
        elif kind in ("LO", "LI"):
            self.lower[j] = val
        elif kind == "FX":
            self.lower[j] = self.upper[j] = val
        elif kind == "FR":
            self.lower[j], self.upper[j] = -INF, INF
        elif kind == "MI":
            self.lower[j] = -INF
        elif kind == "PL":
            self.upper[j] = INF
        elif kind == "BV":
            self.lower[j], self.upper[j] = 0.0, 1.0

    def finish(self, ln):
        if not self.ended:
            raise MpsParseError("missing ENDATA", ln)
        m, n = len(self.row_names), len(self.col_names)
        if self.entries:
            keys = np.array(list(self.entries.keys()), dtype=np.int64)
            vals = np.array(list(self.entries.values()))
            A = CsrMatrix.from_coo(m, n, keys[:, 0], keys[:, 1], vals)
        else:
            A = CsrMatrix.from_coo(m, n, [], [], [])
        b = np.zeros(m)
        for i, v in self.rhs.items():
            b[i] = v
        c = np.zeros(n)
        for j, v in self.obj.items():
            c[j] = v
        ranges = np.full(m, np.nan)
        for i, v in self.ranges.items():
            ranges[i] = v
        lower = np.zeros(n)
        upper = np.full(n, INF)
        for j, v in self.lower.items():
            lower[j] = v
        for j, v in self.upper.items():
            upper[j] = v
        return LpProblem(
            A, b, c, self.row_types, lower, upper, list(self.row_names), list(self.col_names),
            self.obj_constant, ranges, self.maximize, self.name,
        )


def _section_tokens(section, line):
    """Fixed-column fields for a data line, shaped like the free-format split."""
    f = _fixed_fields(line)
    if section == "ROWS":
        return [t for t in f[:2] if t]
    if section == "BOUNDS":
        out = [f[0]] + ([f[1]] if f[1] else []) + [f[2]] + ([f[3]] if f[3] else [])
        return [t for t in out if t or t == ""]
    out = ([f[1]] if f[1] else []) + [f[2], f[3]] + ([f[4], f[5]] if f[4] else [])
    return out


def parse_mps(source, *, fmt="auto") -> LpProblem:
    """Parse MPS text from a string or a text stream.

    ``fmt`` is ``"free"``, ``"fixed"`` or ``"auto"`` (free splitting with a
    per-line fixed-column retry). Every failure is an ``MpsParseError`` that
    carries the 1-based line number, or an ``InfeasibleError`` when the bounds
    of a column cross.
    """
    if fmt not in ("auto", "free", "fixed"):
        raise ValueError(f"unknown MPS format {fmt!r}")
    if isinstance(source, str):
        source = io.StringIO(source)
    bld = _Builder()
    handlers = {
        "ROWS": bld.row_line,
        "COLUMNS": bld.column_line,
        "RHS": bld.rhs_line,
        "RANGES": bld.range_line,
        "BOUNDS": bld.bound_line,
    }
    ln = 0
    try:
        for ln, raw in enumerate(source, start=1):
            line = raw.rstrip("\r\n")
            if not line.strip() or line.lstrip().startswith("*"):
                continue
            if bld.ended:
                raise MpsParseError("data after ENDATA", ln)
            if not line[0].isspace():
                tok = line.split()
                head = tok[0].upper()
                if head not in _SECTIONS:
                    raise MpsParseError(f"unknown section {tok[0]!r}", ln)
                if head == "ENDATA":
                    bld.ended = True
                    continue
                if head == "NAME":
                    bld.name = " ".join(tok[1:])
                elif head in ("OBJSENSE", "OBJSENCE", "OBJNAME"):
                    if len(tok) > 2:
                        raise MpsParseError(f"malformed {head} header", ln)
                    if len(tok) == 2:
                        bld.section = None
                        _objsection(bld, head, tok[1], ln)
                        continue
                elif head == "COLUMNS" and bld.section != "ROWS":
                    raise MpsParseError("COLUMNS section must follow ROWS", ln)
                elif head in ("RHS", "RANGES", "BOUNDS") and not bld.row_names and bld.obj_row is None:
                    raise MpsParseError(f"{head} section before ROWS", ln)
                elif head == "ROWS" and bld.row_names:
                    raise MpsParseError("repeated ROWS section", ln)
                bld.section = head
                continue
            sec = bld.section
            if sec in ("OBJSENSE", "OBJSENCE", "OBJNAME"):
                tok = line.split()
                if len(tok) != 1:
                    raise MpsParseError(f"malformed {sec} entry", ln)
                _objsection(bld, sec, tok[0], ln)
                continue
            if sec not in handlers:
                raise MpsParseError("data line outside of a section", ln)
            handler = handlers[sec]
            if fmt == "fixed":
                handler(_section_tokens(sec, line), ln)
                continue
            try:
                handler(line.split(), ln)
            except MpsParseError:
                if fmt == "free":
                    raise
                try:
                    alt = _section_tokens(sec, line)
                except Exception:
                    alt = None
                if not alt or alt == line.split():
                    raise
                handler(alt, ln)
        return bld.finish(ln)
    except (MpsParseError, InfeasibleError):
        raise
    except UnicodeDecodeError as exc:
        raise MpsParseError(f"input is not text: {exc}", ln) from None
    except (ValueError, IndexError, KeyError, TypeError, OverflowError) as exc:
        raise MpsParseError(f"malformed input: {exc}", ln) from None


def _objsection(bld, head, value, ln):
    if head == "OBJNAME":
        bld.obj_name_hint = value
        return
    v = value.upper()
    if v in ("MAX", "MAXIMIZE"):
        bld.maximize = True
    elif v in ("MIN", "MINIMIZE"):
        bld.maximize = False
    else:
        raise MpsParseError(f"unknown objective sense {value!r}", ln)


def read_mps(path, *, fmt="auto") -> LpProblem:
    """Parse an MPS file; names ending in ``.gz`` are decompressed."""
    path = os.fspath(path)
    opener = gzip.open if path.endswith(".gz") else open
    with opener(path, "rt", encoding="ascii", errors="strict") as fh:
        prob = parse_mps(fh, fmt=fmt)
    if not prob.name:
        prob.name = os.path.basename(path).split(".")[0]
    return prob


def _num(v):
    return repr(float(v))


def write_mps(p: LpProblem, fh) -> None:
    """Write free-format MPS. Names must not contain whitespace."""
    for nm in list(p.row_names) + list(p.col_names):
        if not nm or any(ch.isspace() for ch in nm):
            raise ValueError(f"name {nm!r} cannot be written in free MPS")
    obj = "OBJ"
    while obj in p.row_names:
        obj += "_"
    w = fh.write
    w(f"NAME {p.name or 'UNNAMED'}\n")
    if p.maximize:
        w("OBJSENSE\n    MAX\n")
    w("ROWS\n")
    w(f" N  {obj}\n")
    for t, nm in zip(p.row_types, p.row_names):
        w(f" {t.value}  {nm}\n")
    w("COLUMNS\n")
    At = _transpose(p.A)
    for j, cn in enumerate(p.col_names):
        lo, hi = At.row_starts[j], At.row_starts[j + 1]
        if p.c[j] != 0.0:
            w(f"    {cn}  {obj}  {_num(p.c[j])}\n")
        for i, v in zip(At.col_indices[lo:hi], At.values[lo:hi]):
            w(f"    {cn}  {p.row_names[i]}  {_num(v)}\n")
        if lo == hi and p.c[j] == 0.0:
            w(f"    {cn}  {obj}  0.0\n")
    w("RHS\n")
    for i, v in enumerate(p.b):
        if v != 0.0:
            w(f"    RHS  {p.row_names[i]}  {_num(v)}\n")
    if p.objective_constant != 0.0:
        w(f"    RHS  {obj}  {_num(-p.objective_constant)}\n")
    rows = np.flatnonzero(~np.isnan(p.ranges))
    if rows.size:
        w("RANGES\n")
        for i in rows:
            w(f"    RNG  {p.row_names[i]}  {_num(p.ranges[i])}\n")
    lines = []
    for j, cn in enumerate(p.col_names):
        lo, hi = p.lower[j], p.upper[j]
        if lo == hi:
            lines.append(f" FX BND  {cn}  {_num(lo)}")
            continue
        if lo == -INF and hi == INF:
            lines.append(f" FR BND  {cn}")
            continue
        if lo == -INF:
            lines.append(f" MI BND  {cn}")
        elif lo != 0.0:
            lines.append(f" LO BND  {cn}  {_num(lo)}")
        if hi != INF:
            lines.append(f" UP BND  {cn}  {_num(hi)}")
    if lines:
        w("BOUNDS\n")
        w("\n".join(lines) + "\n")
    w("ENDATA\n")


def _transpose(A: CsrMatrix) -> CsrMatrix:
    r, c, v = A.to_coo()
    return CsrMatrix.from_coo(A.ncols, A.nrows, c, r, v)


# --------------------------------------------------------------------------- standard form


class TransformKind(str, enum.Enum):
    SHIFT_BY_LOWER = "shift-by-lower"
    NEGATE_COLUMN = "negate-column"
    SPLIT_FREE = "split-free-variable"
    UPPER_BOUND_ROW = "upper-bound-row-added"
    SLACK_COLUMN = "slack-column-added"
    ROW_NEGATED = "row-negated"


@dataclass(frozen=True)
class Transform:
    """One atomic step. ``index`` is an original column or row; ``target`` and
    ``extra`` are standard-form column or row indices; ``value`` a constant."""

    kind: TransformKind
    index: int
    target: int = -1
    extra: int = -1
    value: float = 0.0


@dataclass
class TransformRecord:
    n_original: int
    m_original: int
    n_standard: int
    m_standard: int
    steps: list = field(default_factory=list)
    objective_constant: float = 0.0
    objective_sign: float = 1.0

    @property
    def is_identity(self):
        return (
            not self.steps
            and self.n_original == self.n_standard
            and self.m_original == self.m_standard
            and self.objective_constant == 0.0
            and self.objective_sign == 1.0
        )

    def of_kind(self, kind):
        return [t for t in self.steps if t.kind == TransformKind(kind)]


@dataclass(eq=False)
class StandardFormLp:
    A: CsrMatrix
    b: np.ndarray
    c: np.ndarray
    transform: TransformRecord = None
    name: str = ""

    def __post_init__(self):
        m, n = self.A.shape
        self.b = np.asarray(self.b, dtype=np.float64)
        self.c = np.asarray(self.c, dtype=np.float64)
        if self.b.shape != (m,) or self.c.shape != (n,):
            raise DimensionError(f"b and c must have lengths {m} and {n}")
        if self.transform is None:
            self.transform = TransformRecord(n, m, n, m)

    @property
    def shape(self):
        return self.A.shape

    def original_objective(self, x_std):
        """Objective of the original problem (sense included) at a standard-form point."""
        rec = self.transform
        return rec.objective_sign * (float(self.c @ x_std) + rec.objective_constant)


def to_standard_form(p: LpProblem) -> StandardFormLp:
    """Slack columns for inequality rows, lower-bound shifts, free splits and
    upper-bound rows ``x_j + t_j = u_j - l_j``. Columns keep their original
    positions; split parts, row slacks and bound slacks are appended in that
    order, and bound rows follow the original rows."""
    m, n = p.A.shape
    bad = np.flatnonzero(p.lower > p.upper)
    if bad.size:
        raise InfeasibleError(f"column {p.col_names[int(bad[0])]}: lower bound exceeds upper bound")
    sign = -1.0 if p.maximize else 1.0
    rows, cols, vals = (list(a) for a in p.A.to_coo())
    c = list(sign * p.c)
    const = sign * p.objective_constant
    steps = []
    col_sign = np.ones(n)
    offset = np.zeros(n)
    ub_cols = []  # (standard column, bound width)
    ncols = n

    for j in range(n):
        lo, hi = p.lower[j], p.upper[j]
        if np.isfinite(lo):
            if lo != 0.0:
                steps.append(Transform(TransformKind.SHIFT_BY_LOWER, j, j, value=lo))
                offset[j] = lo
            if np.isfinite(hi):
                ub_cols.append((j, hi - lo))
        elif np.isfinite(hi):
            steps.append(Transform(TransformKind.NEGATE_COLUMN, j, j, value=hi))
            col_sign[j] = -1.0
            offset[j] = hi
        else:
            steps.append(Transform(TransformKind.SPLIT_FREE, j, j, ncols))
            ncols += 1

    # column transforms on the matrix and objective
    shift = matvec(p.A, offset)
    new_rows, new_cols, new_vals = [], [], []
    for r_, c_, v_ in zip(rows, cols, vals):
        new_rows.append(r_)
        new_cols.append(c_)
        new_vals.append(v_ * col_sign[c_])
    split_of = {t.index: t.extra for t in steps if t.kind is TransformKind.SPLIT_FREE}
    if split_of:
        for r_, c_, v_ in zip(rows, cols, vals):
            if c_ in split_of:
                new_rows.append(r_)
                new_cols.append(split_of[c_])
                new_vals.append(-v_)
    for j in range(n):
        const += c[j] * offset[j]
        c[j] *= col_sign[j]
    c.extend(-c[j] for j in sorted(split_of, key=split_of.get))

    lo_rows, hi_rows = p.row_bounds()
    lo_rows = lo_rows - shift
    hi_rows = hi_rows - shift
    b_out = np.zeros(m)
    slack_ub = []
    negated = np.zeros(m, dtype=bool)
    n_struct = len(new_rows)
    for i, t in enumerate(p.row_types):
        lo_i, hi_i = lo_rows[i], hi_rows[i]
        if lo_i == hi_i:
            b_out[i] = lo_i
            continue
        if np.isfinite(hi_i):
            # a x + t = hi, t >= 0, and t <= hi - lo when the row is ranged
            b_out[i] = hi_i
            steps.append(Transform(TransformKind.SLACK_COLUMN, i, ncols, value=1.0))
            new_rows.append(i)
            new_cols.append(ncols)
            new_vals.append(1.0)
            if np.isfinite(lo_i):
                slack_ub.append((ncols, hi_i - lo_i))
        else:
            # a x >= lo becomes -a x + t = -lo
            steps.append(Transform(TransformKind.ROW_NEGATED, i, i))
            negated[i] = True
            b_out[i] = -lo_i
            steps.append(Transform(TransformKind.SLACK_COLUMN, i, ncols, value=1.0))
            new_rows.append(i)
            new_cols.append(ncols)
            new_vals.append(1.0)
        c.append(0.0)
        ncols += 1
    if negated.any():
        for k in range(n_struct):
            if negated[new_rows[k]]:
                new_vals[k] = -new_vals[k]

    nrows = m
    b_list = list(b_out)
    for col, width in ub_cols + slack_ub:
        steps.append(Transform(TransformKind.UPPER_BOUND_ROW, col, nrows, ncols, value=width))
        new_rows += [nrows, nrows]
        new_cols += [col, ncols]
        new_vals += [1.0, 1.0]
        b_list.append(width)
        c.append(0.0)
        nrows += 1
        ncols += 1

    A = CsrMatrix.from_coo(nrows, ncols, new_rows, new_cols, new_vals)
    rec = TransformRecord(n, m, ncols, nrows, steps, const, sign)
    return StandardFormLp(A, np.array(b_list), np.array(c), rec, p.name)


def recover_solution(x_std, rec: TransformRecord) -> np.ndarray:
    """Map a standard-form point back to the original variables."""
    x_std = np.asarray(x_std, dtype=np.float64)
    if x_std.shape != (rec.n_standard,):
        raise DimensionError(f"x_std must have length {rec.n_standard}, got {x_std.shape}")
    x = x_std[: rec.n_original].copy()
    for t in rec.steps:
        if t.kind is TransformKind.SHIFT_BY_LOWER:
            x[t.index] += t.value
        elif t.kind is TransformKind.NEGATE_COLUMN:
            x[t.index] = t.value - x_std[t.target]
        elif t.kind is TransformKind.SPLIT_FREE:
            x[t.index] = x_std[t.target] - x_std[t.extra]
    return x
