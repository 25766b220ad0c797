# models/tree_decomposition.py
from typing import Dict, Iterable, List, Optional, Set, Tuple

from models.data_models import ValidationReport


class TreeDecomposition:
    """
    Rooted tree of bags. Bags are mutable while an embedding is assembled;
    ids are assigned sequentially by add_bag.
    """
    def __init__(self):
        self.bags: Dict[int, Set[int]] = {}
        self.parent: Dict[int, Optional[int]] = {}
        self.children: Dict[int, List[int]] = {}
        self.level: Dict[int, Optional[int]] = {}
        self.root: Optional[int] = None
        self._next_id = 0

    @classmethod
    def single_bag(cls, vertices: Iterable[int], level: Optional[int] = None) -> "TreeDecomposition":
        td = cls()
        td.add_bag(vertices, parent=None, level=level)
        return td

    def add_bag(self,
                vertices: Iterable[int],
                parent: Optional[int] = None,
                level: Optional[int] = None,
                bag_id: Optional[int] = None) -> int:
        if bag_id is None:
            bag_id = self._next_id
        elif bag_id in self.bags:
            raise ValueError(f"Bag id {bag_id} is already taken.")
        self._next_id = max(self._next_id, bag_id + 1)
        self.bags[bag_id] = set(vertices)
        self.parent[bag_id] = parent
        self.children[bag_id] = []
        self.level[bag_id] = level
        if parent is None:
            if self.root is not None:
                raise ValueError(f"Bag {bag_id} would be a second root (root is {self.root}).")
            self.root = bag_id
        else:
            if parent not in self.bags:
                raise ValueError(f"Parent bag {parent} does not exist.")
            self.children[parent].append(bag_id)
        return bag_id

    def graft(self, other: "TreeDecomposition", parent_bag: int) -> Dict[int, int]:
        """ Copy `other` into this tree with its root hung below parent_bag. Returns old -> new ids. """
        if parent_bag not in self.bags:
            raise ValueError(f"Parent bag {parent_bag} does not exist.")
        id_map: Dict[int, int] = {}
        for old_id in other.top_down():
            old_parent = other.parent[old_id]
            new_parent = parent_bag if old_parent is None else id_map[old_parent]
            id_map[old_id] = self.add_bag(other.bags[old_id], parent=new_parent, level=other.level[old_id])
        return id_map

    def top_down(self) -> List[int]:
        if self.root is None:
            return []
        order: List[int] = []
        stack = [self.root]
        while stack:
            bag_id = stack.pop()
            order.append(bag_id)
            stack.extend(reversed(self.children[bag_id]))
        return order

    def subtree(self, bag_id: int) -> List[int]:
        """ bag_id and all of its descendants. """
        out: List[int] = []
        stack = [bag_id]
        while stack:
            current = stack.pop()
            out.append(current)
            stack.extend(self.children[current])
        return out

    def vertices(self) -> Set[int]:
        out: Set[int] = set()
        for bag in self.bags.values():
            out |= bag
        return out

    @property
    def width(self) -> int:
        if not self.bags:
            return -1
        return max(len(bag) for bag in self.bags.values()) - 1

    def __len__(self) -> int:
        return len(self.bags)

    def compressed(self) -> "TreeDecomposition":
        """ Copy with every bag that is a subset of its parent contracted into the parent. """
        keep_parent: Dict[int, Optional[int]] = {}
        new_ids: Dict[int, int] = {}
        out = TreeDecomposition()
        for bag_id in self.top_down():
            parent = self.parent[bag_id]
            if parent is None:
                new_ids[bag_id] = out.add_bag(self.bags[bag_id], None, self.level[bag_id])
                continue
            anchor = keep_parent.get(parent, parent)
            if self.bags[bag_id] <= self.bags[parent]:
                keep_parent[bag_id] = anchor
                new_ids[bag_id] = new_ids[anchor]
            else:
                new_ids[bag_id] = out.add_bag(self.bags[bag_id], new_ids[anchor], self.level[bag_id])
        return out

    def validate(self, vertices: Iterable[int], edges: Iterable[Tuple[int, int]]) -> ValidationReport:
        """ Checks vertex coverage, edge coverage and the connected-subtree property. """
        report = ValidationReport("tree decomposition")
        vertex_set = set(vertices)
        if self.root is None:
            if vertex_set:
                report.add("vertex coverage", "decomposition has no bags")
            return report

        holders: Dict[int, List[int]] = {}
        for bag_id, bag in self.bags.items():
            for v in bag:
                holders.setdefault(v, []).append(bag_id)

        missing = sorted(vertex_set - set(holders))
        if missing:
            report.add("vertex coverage", f"vertices {missing[:10]} appear in no bag")
        stray = sorted(set(holders) - vertex_set)
        if stray:
            report.add("vertex coverage", f"bags mention unknown vertices {stray[:10]}")

        for u, v in edges:
            hu = holders.get(u, [])
            if not any(v in self.bags[b] for b in hu):
                report.add("edge coverage", f"edge ({u}, {v}) is inside no bag")

        for v, bag_ids in holders.items():
            linked = sum(1 for b in bag_ids
                         if self.parent[b] is not None and v in self.bags[self.parent[b]])
            if len(bag_ids) - linked != 1:
                report.add("connectivity", f"bags holding vertex {v} do not form a connected subtree")

        report.details["width"] = self.width
        report.details["n_bags"] = len(self.bags)
        return report

    def __repr__(self) -> str:
        return f"TreeDecomposition(bags={len(self.bags)}, width={self.width}, root={self.root})"
