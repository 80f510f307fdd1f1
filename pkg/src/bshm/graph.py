"""Forest over machine types ordered by cost rate per capacity unit.

Each type points to the lowest higher-indexed type with a strictly smaller
cost per capacity unit.  The resulting parent links form a forest whose
subtrees cover consecutive index ranges.  For sibling queries all roots are
treated as children of one virtual super-root, so that roots below a type
count among its "younger siblings"; the partition and covering facts used
by the schedulers need exactly this convention.
"""

from __future__ import annotations

from typing import Optional

from .model import MachineTypeTable, ValidationError


class CostCapacityForest:
    """Parent/child structure over type indices 1..n.

    Construct via :func:`build_forest`; direct construction from a parent
    vector is possible (and deliberately unvalidated) so that corrupted
    forests can be fed to the verification suite.
    """

    def __init__(self, parents: tuple[Optional[int], ...]):
        self.parents = tuple(parents)
        n = len(self.parents)
        self._children: tuple[tuple[int, ...], ...] = tuple(
            tuple(z for z in range(1, n + 1) if self.parents[z - 1] == i)
            for i in range(1, n + 1)
        )
        self.roots: tuple[int, ...] = tuple(
            i for i in range(1, n + 1) if self.parents[i - 1] is None
        )
        self._ancestors = tuple(self._walk_up(i) for i in range(1, n + 1))
        self._subtree = tuple(self._collect_subtree(i) for i in range(1, n + 1))

    def __len__(self) -> int:
        return len(self.parents)

    def _check_index(self, i: int) -> None:
        if not 1 <= i <= len(self.parents):
            raise ValidationError(f"type index {i} out of range 1..{len(self)}")

    def _walk_up(self, i: int) -> tuple[int, ...]:
        chain = [i]
        cur = i
        for _ in range(len(self.parents)):
            p = self.parents[cur - 1]
            if p is None:
                return tuple(chain)
            chain.append(p)
            cur = p
        raise ValidationError(f"parent links from {i} do not reach a root")

    def _collect_subtree(self, i: int) -> tuple[int, ...]:
        out = []
        stack = [i]
        while stack:
            z = stack.pop()
            out.append(z)
            stack.extend(self._children[z - 1])
        return tuple(sorted(out))

    def parent(self, i: int) -> Optional[int]:
        self._check_index(i)
        return self.parents[i - 1]

    def children(self, i: int) -> tuple[int, ...]:
        self._check_index(i)
        return self._children[i - 1]

    def ancestors(self, i: int) -> tuple[int, ...]:
        """The type itself followed by its chain of parents."""
        self._check_index(i)
        return self._ancestors[i - 1]

    def subtree(self, i: int) -> tuple[int, ...]:
        self._check_index(i)
        return self._subtree[i - 1]

    def lowest(self, i: int) -> int:
        """Smallest index inside the subtree rooted at i."""
        self._check_index(i)
        return self._subtree[i - 1][0]

    def _siblings(self, i: int) -> tuple[int, ...]:
        p = self.parents[i - 1]
        if p is None:
            return self.roots
        return self._children[p - 1]

    def younger_siblings(self, i: int) -> tuple[int, ...]:
        self._check_index(i)
        return tuple(z for z in self._siblings(i) if z < i)

    def elder_siblings(self, i: int) -> tuple[int, ...]:
        self._check_index(i)
        return tuple(z for z in self._siblings(i) if z > i)

    def t_set(self, i: int) -> tuple[int, ...]:
        """i together with the younger siblings of every type on its ancestor
        chain; the subtrees rooted here partition the index prefix 1..i."""
        self._check_index(i)
        members = {i}
        for z in self._ancestors[i - 1]:
            members.update(self.younger_siblings(z))
        return tuple(sorted(members))


def build_forest(table: MachineTypeTable) -> CostCapacityForest:
    """Link every type to the lowest higher-indexed type that is cheaper
    per capacity unit."""
    n = len(table)
    parents: list[Optional[int]] = []
    for i in range(1, n + 1):
        parent = None
        for j in range(i + 1, n + 1):
            if table.unit_cost(j) < table.unit_cost(i):
                parent = j
                break
        parents.append(parent)
    return CostCapacityForest(tuple(parents))


def to_dot(forest: CostCapacityForest, table: MachineTypeTable) -> str:
    """Render the forest in DOT format, one node per type."""
    lines = ["digraph cost_capacity {", "  rankdir=BT;"]
    for z in table.indices:
        g, r = table.entries[z - 1]
        lines.append(
            f'  t{z} [label="{z}\\nrate={r}\\ncap={g}\\nper-unit={r / g}"];'
        )
    for z in table.indices:
        p = forest.parent(z)
        if p is not None:
            lines.append(f"  t{z} -> t{p};")
    lines.append("}")
    return "\n".join(lines) + "\n"
