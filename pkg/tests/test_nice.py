# tests/test_nice.py
from solvers.nice import FORGET, INTRODUCE, JOIN, LEAF, make_nice
from solvers.treewidth_dp import tree_decomposition_of_graph
from models.tree_decomposition import TreeDecomposition
from utils.fixtures import grid, star


def _edges(graph):
    return {(u, v): w for u, v, w in graph.edges}


def _carried(nice):
    return sorted((min(v, x), max(v, x)) for node in nice.nodes if node.kind == FORGET for v, x, _ in node.edges)


def test_triangle_in_one_bag():
    edges = {(0, 1): 1.0, (1, 2): 2.0, (0, 2): 3.0}
    nice = make_nice(TreeDecomposition.single_bag({0, 1, 2}), edges)
    kinds = [node.kind for node in nice.nodes]
    assert kinds == [LEAF, INTRODUCE, INTRODUCE, INTRODUCE, FORGET, FORGET, FORGET]
    assert nice.width == 2
    assert nice.nodes[nice.root].bag == ()
    assert nice.nodes[4].edges == ((0, 1, 1.0), (0, 2, 3.0))
    assert _carried(nice) == sorted(edges)


def test_every_edge_is_carried_once_on_a_grid():
    g = grid(3, 3)
    edges = _edges(g)
    td = tree_decomposition_of_graph(range(g.n), edges.keys())
    nice = make_nice(td, edges)
    assert _carried(nice) == sorted(edges)
    assert nice.width == td.width
    forgotten = [node.vertex for node in nice.nodes if node.kind == FORGET]
    assert sorted(forgotten) == list(range(g.n))


def test_joins_are_binary():
    td = TreeDecomposition()
    root = td.add_bag({0})
    for leaf in range(1, 6):
        td.add_bag({0, leaf}, parent=root)
    edges = _edges(star(6))
    nice = make_nice(td, edges)
    joins = [node for node in nice.nodes if node.kind == JOIN]
    assert len(joins) == 4
    for node in joins:
        assert len(node.children) == 2
        left, right = (nice.nodes[c] for c in node.children)
        assert left.bag == right.bag == node.bag
    assert _carried(nice) == sorted(edges)


def test_children_come_before_parents():
    g = grid(2, 3)
    edges = _edges(g)
    nice = make_nice(tree_decomposition_of_graph(range(g.n), edges.keys()), edges)
    for node in nice.nodes:
        assert all(child < node.id for child in node.children)


def test_empty_decomposition_is_a_single_leaf():
    nice = make_nice(TreeDecomposition(), {})
    assert len(nice) == 1
    assert nice.nodes[0].kind == LEAF
