"""Dense multi-dimensional feasibility tables and their algebra.

A FeasTable maps every assignment of its scope to an entry.  Entries are
non-negative ints for violation-count propagation, bools for the cleartext
boolean pipeline, and cyphertexts for the encrypted pipeline; the structural
operations (join, project, relabel, diagonal merge) are entry-agnostic.

Axes are labelled either by a real variable name (str) or by a codename
(int); each axis carries the ordered tuple of values it ranges over, which
for coded axes are value-codes in an arbitrary (permuted) order.  Layout is
row-major over the scope list: the last axis varies fastest.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass


class TableError(ValueError):
    pass


class CodenameClash(TableError):
    """Two distinct axes in one scope carry the same label."""


@dataclass(frozen=True)
class Axis:
    label: "str | int"
    values: tuple

    def __post_init__(self):
        object.__setattr__(self, "values", tuple(self.values))
        if len(set(self.values)) != len(self.values):
            raise TableError(f"axis {self.label} has duplicate values")


@dataclass
class FeasTable:
    scope: list[Axis]
    entries: list

    def __post_init__(self):
        labels = [a.label for a in self.scope]
        if len(set(labels)) != len(labels):
            raise CodenameClash(f"duplicate axis labels in scope {labels}")
        if len(self.entries) != self.size():
            raise TableError("entry count does not match scope product")

    def size(self) -> int:
        n = 1
        for a in self.scope:
            n *= len(a.values)
        return n

    def labels(self) -> list:
        return [a.label for a in self.scope]

    def axis(self, label) -> int:
        for i, a in enumerate(self.scope):
            if a.label == label:
                return i
        raise TableError(f"label {label!r} not in scope {self.labels()}")

    def shape(self) -> tuple[int, ...]:
        return tuple(len(a.values) for a in self.scope)

    def index_of(self, positions) -> int:
        idx = 0
        for a, p in zip(self.scope, positions):
            idx = idx * len(a.values) + p
        return idx

    def get(self, assignment: dict):
        """Entry for {label: value} covering the whole scope."""
        pos = []
        for a in self.scope:
            try:
                pos.append(a.values.index(assignment[a.label]))
            except (KeyError, ValueError):
                raise TableError(f"no value for axis {a.label!r}") from None
        return self.entries[self.index_of(pos)]

    def iter_cells(self):
        """Yield (positions tuple, entry)."""
        ranges = [range(len(a.values)) for a in self.scope]
        for i, pos in enumerate(itertools.product(*ranges)):
            yield pos, self.entries[i]

    def copy(self) -> "FeasTable":
        return FeasTable(list(self.scope), list(self.entries))

    def canonical(self):
        """JSON-able structure used for wire encoding and audits."""
        return {
            "scope": [{"label": a.label, "values": list(a.values)} for a in self.scope],
            "entries": list(self.entries),
        }


def zero_table(label, values) -> FeasTable:
    return FeasTable([Axis(label, tuple(values))], [0] * len(tuple(values)))


def const_table(label, values, entry) -> FeasTable:
    return FeasTable([Axis(label, tuple(values))], [entry] * len(tuple(values)))


def from_cost_fn(axes: list[Axis], fn) -> FeasTable:
    """Tabulate fn(*values) over the axes' Cartesian product."""
    entries = [fn(*vals) for vals in itertools.product(*(a.values for a in axes))]
    return FeasTable(list(axes), entries)


def join(t1: FeasTable, t2: FeasTable, combine=None) -> FeasTable:
    """Pointwise combination over the union scope (default: integer sum).

    Shared labels must range over the same value set; t2's axis order is
    aligned to t1's by value identity.
    """
    if combine is None:
        combine = lambda a, b: a + b
    t1_labels = set(t1.labels())
    out_scope = list(t1.scope) + [a for a in t2.scope if a.label not in t1_labels]
    # Position maps from output cell positions into t1 and t2.
    t2_axis_for_out = []
    for a in out_scope:
        try:
            j = t2.axis(a.label)
        except TableError:
            t2_axis_for_out.append(None)
            continue
        b = t2.scope[j]
        if set(b.values) != set(a.values):
            raise TableError(f"domain mismatch on shared label {a.label!r}")
        remap = tuple(b.values.index(v) for v in a.values)
        t2_axis_for_out.append((j, remap))
    n1 = len(t1.scope)
    out_entries = []
    ranges = [range(len(a.values)) for a in out_scope]
    for pos in itertools.product(*ranges):
        i1 = t1.index_of(pos[:n1])
        pos2 = [0] * len(t2.scope)
        for k, m in enumerate(t2_axis_for_out):
            if m is not None:
                j, remap = m
                pos2[j] = remap[pos[k]]
        out_entries.append(combine(t1.entries[i1], t2.entries[t2.index_of(pos2)]))
    return FeasTable(out_scope, out_entries)


def project(t: FeasTable, label, reduce_fn) -> FeasTable:
    """Eliminate one axis by reducing entries along it."""
    k = t.axis(label)
    out_scope = t.scope[:k] + t.scope[k + 1:]
    axis_vals = t.scope[k].values
    out_entries = []
    ranges = [range(len(a.values)) for a in out_scope]
    for pos in itertools.product(*ranges):
        cells = []
        for j in range(len(axis_vals)):
            full = list(pos[:k]) + [j] + list(pos[k:])
            cells.append(t.entries[t.index_of(full)])
        out_entries.append(reduce_fn(cells))
    if not out_scope:
        # Fully reduced: represent as a single-cell table over a unit axis.
        return FeasTable([Axis("__unit__", ("*",))], out_entries)
    return FeasTable(out_scope, out_entries)


@dataclass
class BestResponse:
    """Argmin record: for each assignment of the post-projection scope, a
    minimizing value of the projected variable."""

    variable: str
    scope: list[Axis]
    choices: list  # values of `variable`, row-major over `scope`

    def lookup(self, assignment: dict):
        dummy = FeasTable(list(self.scope), list(self.choices))
        try:
            return dummy.get(assignment)
        except TableError as e:
            raise TableError(f"decision lookup miss for {self.variable}: {e}") from e


def project_min(t: FeasTable, label) -> tuple[FeasTable, BestResponse]:
    """Minimize out `label`, recording a minimizing value per remaining cell.

    Ties break toward the lowest domain index.
    """
    k = t.axis(label)
    axis = t.scope[k]
    out_scope = t.scope[:k] + t.scope[k + 1:]
    mins, choices = [], []
    ranges = [range(len(a.values)) for a in out_scope]
    for pos in itertools.product(*ranges):
        best_v, best_c = None, None
        for j, v in enumerate(axis.values):
            full = list(pos[:k]) + [j] + list(pos[k:])
            c = t.entries[t.index_of(full)]
            if best_c is None or c < best_c:
                best_c, best_v = c, v
        mins.append(best_c)
        choices.append(best_v)
    if not out_scope:
        out_scope = [Axis("__unit__", ("*",))]
    return (FeasTable(list(out_scope), mins),
            BestResponse(str(label), list(out_scope), choices))


def relabel_axis(t: FeasTable, old_label, new_label, new_values) -> FeasTable:
    """Rename an axis and substitute its value tokens positionally.

    new_values[i] replaces the value at position i; used to swap a real
    variable/domain for its codename/value-codes (in permuted order the
    caller chose) and back.
    """
    k = t.axis(old_label)
    new_values = tuple(new_values)
    if len(new_values) != len(t.scope[k].values):
        raise TableError("relabel value count mismatch")
    scope = list(t.scope)
    scope[k] = Axis(new_label, new_values)
    return FeasTable(scope, list(t.entries))


def reorder_axis_values(t: FeasTable, label, new_order) -> FeasTable:
    """Permute the listed order of one axis's values (entries follow)."""
    k = t.axis(label)
    axis = t.scope[k]
    new_order = tuple(new_order)
    if set(new_order) != set(axis.values):
        raise TableError("reorder must permute the existing values")
    remap = [axis.values.index(v) for v in new_order]
    scope = list(t.scope)
    scope[k] = Axis(label, new_order)
    out = [None] * len(t.entries)
    ranges = [range(len(a.values)) for a in scope]
    for pos in itertools.product(*ranges):
        src = list(pos)
        src[k] = remap[pos[k]]
        dst_idx = 0
        for a, p in zip(scope, pos):
            dst_idx = dst_idx * len(a.values) + p
        out[dst_idx] = t.entries[t.index_of(src)]
    return FeasTable(scope, out)


def diagonal_merge(t: FeasTable, label_a, label_b) -> FeasTable:
    """Collapse two axes known to denote the same variable.

    Keeps axis `label_a`; selects entries where both axes carry the same
    value.  Both axes must range over the same value set.
    """
    ka, kb = t.axis(label_a), t.axis(label_b)
    a, b = t.scope[ka], t.scope[kb]
    if set(a.values) != set(b.values):
        raise TableError("diagonal merge on mismatched value sets")
    out_scope = [ax for i, ax in enumerate(t.scope) if i != kb]
    ka_out = ka if ka < kb else ka - 1
    pos_b_for_a = [b.values.index(v) for v in a.values]
    out_entries = []
    ranges = [range(len(ax.values)) for ax in out_scope]
    for pos in itertools.product(*ranges):
        full = list(pos)
        full.insert(kb, pos_b_for_a[pos[ka_out]])
        out_entries.append(t.entries[t.index_of(full)])
    return FeasTable(out_scope, out_entries)


def resolve_codename(t: FeasTable, code_label, variable, code_to_value,
                     domain) -> FeasTable:
    """Turn a coded axis back into its real variable.

    `code_to_value` maps each value-code to the real domain value.  The axis
    is relabelled, decoded, and reordered to the real domain order; if the
    table already has an axis for `variable`, the two are diagonal-merged.
    """
    k = t.axis(code_label)
    decoded = tuple(code_to_value[c] for c in t.scope[k].values)
    if set(decoded) != set(domain):
        raise TableError(f"codename {code_label} does not decode onto {variable}'s domain")
    tmp_label = (variable, "__resolving__")
    out = relabel_axis(t, code_label, tmp_label, decoded)
    out = reorder_axis_values(out, tmp_label, tuple(domain))
    if variable in [a.label for a in out.scope]:
        out = relabel_axis(out, tmp_label, (variable, "__dup__"),
                           out.scope[out.axis(tmp_label)].values)
        out = diagonal_merge(out, variable, (variable, "__dup__"))
    else:
        out = relabel_axis(out, tmp_label, variable,
                           out.scope[out.axis(tmp_label)].values)
    return out


def map_entries(t: FeasTable, fn) -> FeasTable:
    return FeasTable(list(t.scope), [fn(e) for e in t.entries])


def add_along_axis(t: FeasTable, label, amounts: dict, sign=1) -> FeasTable:
    """Add (or subtract) a per-value amount along one axis.

    `amounts` maps each of the axis's listed values to an integer; every
    entry in that value's slice is shifted by sign * amount.
    """
    k = t.axis(label)
    axis = t.scope[k]
    out = list(t.entries)
    ranges = [range(len(a.values)) for a in t.scope]
    for i, pos in enumerate(itertools.product(*ranges)):
        out[i] = out[i] + sign * amounts[axis.values[pos[k]]]
    return FeasTable(list(t.scope), out)


def tables_equal(t1: FeasTable, t2: FeasTable) -> bool:
    """Equality up to axis order (value orders must agree per label)."""
    if set(t1.labels()) != set(t2.labels()):
        return False
    try:
        aligned = align_to(t2, t1)
    except TableError:
        return False
    return aligned.entries == t1.entries


def align_to(t: FeasTable, ref: FeasTable) -> FeasTable:
    """Reorder t's axes (and value orders) to match ref's scope."""
    out = t
    for a in ref.scope:
        out = reorder_axis_values(out, a.label, a.values)
    perm = [out.axis(a.label) for a in ref.scope]
    scope = [out.scope[i] for i in perm]
    entries = [None] * len(out.entries)
    ranges = [range(len(a.values)) for a in scope]
    for pos in itertools.product(*ranges):
        src = [0] * len(perm)
        for dst_axis, src_axis in enumerate(perm):
            src[src_axis] = pos[dst_axis]
        dst_idx = 0
        for a, p in zip(scope, pos):
            dst_idx = dst_idx * len(a.values) + p
        entries[dst_idx] = out.entries[out.index_of(src)]
    return FeasTable(scope, entries)
