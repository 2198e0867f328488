"""Tests for CFG construction, post-dominance, control dependence and pre-paths."""

import random

from exlife.constraints import Literal, normalize_literal
from exlife.exir import MethodId, StatementKind, parse_program
from exlife.graphs import ENTRY, build_cfg, cdg_to_dot, cfg_to_dot, control_dependence, enumerate_prepaths
from exlife.summary import PathEnvironment, extract_constraints

from .conftest import CORPUS, load_program

MOVE = MethodId("FileUtils", "moveFile", ("File", "File"))


def _method(text):
    return parse_program(text, "1.0").methods[0]


def _move_file(name="1.4"):
    return load_program(CORPUS / "fileutils" / f"{name}.exir").method(MOVE)


def _refined(method, paths, raw_clauses):
    result = set()
    for path, raw in zip(paths.paths, raw_clauses, strict=True):
        environment = PathEnvironment(method, path)
        for literal in raw:
            refined = normalize_literal(environment.refine(literal.atom, literal.position), literal.polarity)
            assert isinstance(refined, Literal)
            result.add(refined.key)
    return result


def test_move_file_condition_nodes():
    method = _move_file()
    cfg = build_cfg(method)
    assert cfg.condition_nodes() == (2, 4, 7, 10, 13)
    for node in cfg.condition_nodes():
        kinds = {method.body[target].kind for target, _ in cfg.successors[node]}
        assert StatementKind.THROW in kinds
    assert not cfg.synthetic
    assert cfg.successors[ENTRY] == ((0, None),)
    assert cfg.successors[14] == ((cfg.exit, None),)


def test_move_file_throw_control_dependence():
    method = _move_file()
    cfg = build_cfg(method)
    cdg = control_dependence(cfg)
    assert cdg.ancestors(14) == {2, 4, 7, 10, 13}
    assert cdg.parents(14) == {13}
    assert cdg.branch(13, 14) is False

    paths = enumerate_prepaths(cfg, 14)
    assert len(paths.paths) == 1
    raw = extract_constraints(cdg, 14, paths)
    assert [(literal.stmt, literal.polarity) for literal in raw[0]] == [
        (2, True),
        (4, True),
        (7, True),
        (10, True),
        (13, False),
    ]
    assert _refined(method, paths, raw) == {
        ("parameter0 == null", False),
        ("parameter1 == null", False),
        ("parameter0.exists()", True),
        ("parameter0.isDirectory()", False),
        ("parameter1.exists()", True),
    }


def test_non_terminating_guards_are_not_control_dependences():
    method = _move_file("1.4-nonterminating")
    cfg = build_cfg(method)
    cdg = control_dependence(cfg)
    assert cdg.ancestors(14) == {13}

    paths = enumerate_prepaths(cfg, 14)
    assert len(paths.paths) == 16
    raw = extract_constraints(cdg, 14, paths)
    assert {(literal.stmt, literal.polarity) for clause in raw for literal in clause} == {(13, False)}
    assert _refined(method, paths, raw) == {("parameter1.exists()", True)}


def test_post_dominators():
    method = _method(
        """
        method D::f(boolean) {
          b := param 0
          if b goto Else
          x := 1
          goto Join
        Else: x := 2
        Join: return x
        }
        """,
    )
    cfg = build_cfg(method)
    assert cfg.ipdom[1] == 5
    assert cfg.ipdom[2] == 3
    assert cfg.ipdom[5] == cfg.exit
    assert cfg.post_dominates(5, 1)
    assert cfg.post_dominates(1, 1)
    assert not cfg.post_dominates(2, 1)
    cdg = control_dependence(cfg)
    assert cdg.edge_set() == {(1, 2), (1, 3), (1, 4)}
    assert cdg.branch(1, 4) is True
    assert cdg.branch(1, 2) is False


def test_jump_to_fallthrough_keeps_both_edges():
    method = _method("method J::f(boolean) {\n  if b goto Next\nNext: return\n}\n")
    cfg = build_cfg(method)
    assert cfg.successors[0] == ((1, False), (1, True))
    assert not control_dependence(cfg).edge_set()


def test_synthetic_exit_edge():
    method = _method("method I::spin() {\n  x := 1\nLoop: goto Loop\n}\n")
    cfg = build_cfg(method)
    assert cfg.synthetic == {1}
    assert (1, cfg.exit, None) in cfg.edges()
    assert (1, cfg.exit, None) not in cfg.edges(include_synthetic=False)
    assert cfg.post_dominates(cfg.exit, 0)


def test_synthetic_edge_prefers_plain_statement():
    method = _method(
        """
        method I::spin(boolean) {
          b := param 0
        Top: if b goto Top
          goto Top
        }
        """,
    )
    cfg = build_cfg(method)
    assert cfg.synthetic == {2}


def test_loop_paths():
    method = _method(
        """
        method L::f(int) {
          i := param 0
        Head: if i > 10 goto Out
          i := i + 1
          goto Head
        Out: throw IllegalStateException "done"
        }
        """,
    )
    cfg = build_cfg(method)
    once = enumerate_prepaths(cfg, 4, loop_unroll=1)
    assert [path.nodes for path in once.paths] == [(0, 1, 2, 3, 1, 4), (0, 1, 4)]
    assert once.paths[0].taken == (None, False, None, None, True, None)
    never = enumerate_prepaths(cfg, 4, loop_unroll=0)
    assert [path.nodes for path in never.paths] == [(0, 1, 4)]
    assert not once.truncated


def test_path_cap_truncates():
    lines = ["method P::f(boolean, boolean, boolean, boolean) {"]
    for index in range(4):
        lines += [f"  b{index} := param {index}", f"  if b{index} goto J{index}", "  x := 1", f"J{index}: y := 2"]
    lines += ['  throw IllegalStateException "end"', "}"]
    method = _method("\n".join(lines))
    cfg = build_cfg(method)
    site = len(method.body) - 1
    assert len(enumerate_prepaths(cfg, site).paths) == 16
    capped = enumerate_prepaths(cfg, site, path_cap=5)
    assert len(capped.paths) == 5
    assert capped.truncated


def test_unreachable_site():
    method = _method('method U::f() {\n  return\n  throw IllegalStateException "dead"\n}\n')
    paths = enumerate_prepaths(build_cfg(method), 1)
    assert paths.unreachable
    assert not paths.truncated


def test_dot_output():
    cfg = build_cfg(_move_file())
    cfg_text = cfg_to_dot(cfg)
    assert cfg_text.startswith('digraph "FileUtils::moveFile(File,File)" {')
    assert 'label="ENTRY"' in cfg_text
    assert 'label="EXIT"' in cfg_text
    assert '[label="true"]' in cfg_text
    assert 'throw IOException \\"Destination \\" ++ r1' in cfg_text
    cdg_text = cdg_to_dot(control_dependence(cfg))
    assert "n14 -> n15 [label=\"false\"];" in cdg_text


# --- control dependence against a brute-force oracle -------------------------------


def _random_method(rng: random.Random):
    size = rng.randint(1, 9)
    lines = ["method G::f(boolean) {"]
    for index in range(size):
        roll = rng.random()
        target = f"S{rng.randrange(size)}"
        if roll < 0.35:
            statement = f"if b goto {target}"
        elif roll < 0.5:
            statement = f"goto {target}"
        elif roll < 0.6:
            statement = "return"
        elif roll < 0.7:
            statement = 'throw IllegalStateException "x"'
        else:
            statement = f"x{index} := {index}"
        lines.append(f"S{index}: {statement}")
    lines.append("}")
    return _method("\n".join(lines))


def _oracle(cfg):
    graph = cfg.graph
    nodes = list(graph.nodes)
    pdom = {node: set(nodes) for node in nodes}
    pdom[cfg.exit] = {cfg.exit}
    changed = True
    while changed:
        changed = False
        for node in nodes:
            if node == cfg.exit:
                continue
            meet = set.intersection(*(pdom[successor] for successor in graph.successors(node)))
            update = meet | {node}
            if update != pdom[node]:
                pdom[node] = update
                changed = True
    expected = {}
    for source, target, branch in cfg.edges():
        if source == ENTRY:
            continue
        for node in pdom[target]:
            if node != source and node not in pdom[source]:
                expected.setdefault((source, node), branch)
    return expected


def test_control_dependence_matches_oracle():
    rng = random.Random(20240501)
    for case in range(1200):
        method = _random_method(rng)
        cfg = build_cfg(method)
        cdg = control_dependence(cfg)
        expected = _oracle(cfg)
        assert cdg.edge_set() == set(expected), case
        for (source, node), branch in expected.items():
            assert cdg.branch(source, node) == branch, case
