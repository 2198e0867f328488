"""Tests for exception summary extraction."""

import random

import pytest

from exlife.const import FLAG_IMPRECISE, FLAG_INFEASIBLE, FLAG_RECURSIVE, FLAG_UNREACHABLE, MODE_INTER, MODE_INTRA
from exlife.exceptions import ReportFormatError
from exlife.exir import MethodId, parse_program
from exlife.expr import is_parameter_rooted
from exlife.summary import (
    SummaryExtractor,
    VersionReport,
    extract_summaries,
    format_summary,
    locate_throws,
    propagate_interprocedural,
    reconstruct_message,
    render_summary_report,
)

from .conftest import CORPUS, HISTORY_VERSIONS, history_path, load_program

MOVE = MethodId("FileUtils", "moveFile", ("File", "File"))
MOVE3 = MethodId("FileUtils", "moveFile", ("File", "File", "CopyOption..."))
REQUIRE_ABSENT = MethodId("FileUtils", "requireAbsent", ("File", "String"))
BENCH = sorted((CORPUS / "bench").glob("*.exir"))

EXISTS_PRECONDITION = (
    "!(parameter0 == null) && parameter0.exists() && parameter0.isFile() "
    "&& !(parameter1 == null) && parameter1.exists()"
)


def _message(text):
    program = parse_program(text, "1.0")
    method = program.methods[-1]
    (site,) = locate_throws(method)
    return reconstruct_message(method, site, program)


def _lines(report, method_id):
    return [format_summary(summary) for summary in report.api(method_id).summaries]


@pytest.mark.parametrize(
    ("body", "expected"),
    [
        ('throw IllegalArgumentException "a.b (c) [d] * ok?"', r"a\.b \(c\) \[d\] \* ok\?"),
        ('throw IllegalArgumentException "value: " ++ r0', "value: .*"),
        ("throw IllegalArgumentException r0 ++ r1", ".*"),
        ('f := field r0.name\n  throw IllegalArgumentException "name " ++ f', "name .*"),
        ('s := "first"\n  s := "second"\n  throw IllegalArgumentException s', ".*"),
        ('s := "x+y"\n  t := s\n  throw IllegalArgumentException t ++ "!"', r"x\+y!"),
        (
            'm := call String::format("%d of %s%% done", r0, r1)\n  throw IllegalArgumentException m',
            ".* of .*% done",
        ),
        ("m := call String::format(r1, r0)\n  throw IllegalArgumentException m", ".*"),
        ("m := call r1.toString()\n  throw IllegalArgumentException m", ".*"),
    ],
)
def test_message_patterns(body, expected):
    text = f"method M::f(int, String) {{\n  r0 := param 0\n  r1 := param 1\n  {body}\n}}\n"
    assert _message(text) == expected


def test_message_statics():
    text = """
    static Messages::PREFIX = "bad: "
    static Limits::MAX = 10
    static mutable Messages::current
    method S::f(int) {
      r0 := param 0
      p := field Messages::PREFIX
      m := field Limits::MAX
      c := field Messages::current
      throw IllegalStateException p ++ m ++ "/" ++ c ++ "!"
    }
    """
    assert _message(text) == "bad: .*/.*!"


def test_intra_refinement_fileutils_v14():
    report = extract_summaries(load_program(history_path("1.4")), MODE_INTRA)
    assert _lines(report, MOVE) == [
        "NullPointerException | Source must not be null | parameter0 == null",
        "NullPointerException | Destination must not be null | !(parameter0 == null) && parameter1 == null",
        "FileNotFoundException | Source .* does not exist | "
        "!(parameter0 == null) && !(parameter0.exists()) && !(parameter1 == null)",
        "IOException | Source .* is a directory | "
        "!(parameter0 == null) && parameter0.exists() && parameter0.isDirectory() && !(parameter1 == null)",
        "IOException | Destination .* already exists | "
        "!(parameter0 == null) && parameter0.exists() && !(parameter0.isDirectory()) && !(parameter1 == null) "
        "&& parameter1.exists()",
    ]
    assert [summary.origin.stmt for summary in report.api(MOVE).summaries] == [3, 5, 8, 11, 14]
    inter = extract_summaries(load_program(history_path("1.4")), MODE_INTER)
    assert render_summary_report(inter).splitlines()[1:] == render_summary_report(report).splitlines()[1:]


def test_non_terminating_guard_only_keeps_direct_condition():
    report = extract_summaries(load_program(history_path("1.4-nonterminating")), MODE_INTRA)
    (summary,) = report.api(MOVE).summaries
    assert str(summary.precondition) == "parameter1.exists()"
    assert summary.exception == "IOException"


def test_inter_lifting_fileutils_v29():
    program = load_program(history_path("2.9"))
    report = extract_summaries(program, MODE_INTER)
    for method_id in (MOVE, MOVE3):
        summaries = report.api(method_id).summaries
        assert len(summaries) == 5
        (exists,) = [summary for summary in summaries if summary.exception == "FileExistsException"]
        assert str(exists.precondition) == EXISTS_PRECONDITION
        assert str(exists.key_precondition) == "parameter1.exists()"
        assert exists.message_pattern == "File element in parameter '.*' already exists: '.*'"
        assert exists.origin.method == REQUIRE_ABSENT
        assert exists.origin.stmt == 5
    chain = next(s for s in report.api(MOVE).summaries if s.exception == "FileExistsException").call_chain
    assert chain == (MOVE, MOVE3, REQUIRE_ABSENT)
    assert extract_summaries(program, MODE_INTRA).summary_count == 0


def test_private_summaries_are_kept_internally():
    summaries = propagate_interprocedural(load_program(history_path("2.9")))
    assert [str(summary.precondition) for summary in summaries[REQUIRE_ABSENT]] == ["parameter0.exists()"]
    assert len(summaries[MethodId("FileUtils", "requireFile", ("File", "String"))]) == 2


LOOP = """
method L::f(int) {
  i := param 0
Body: if i == 5 goto Boom
  i := i + 1
  if i < 10 goto Body
  return
Boom: throw IllegalStateException "five"
}
"""


def test_loop_paths_refine_per_path():
    (summary,) = extract_summaries(parse_program(LOOP, "1.0")).apis[0].summaries
    assert str(summary.precondition) == (
        "(parameter0 + 1 < 10 && parameter0 + 1 == 5 && !(parameter0 == 5)) || (parameter0 == 5)"
    )
    assert not summary.flags

    (summary,) = extract_summaries(parse_program(LOOP, "1.0"), loop_unroll=0).apis[0].summaries
    assert str(summary.precondition) == "parameter0 == 5"


def test_unrelated_unknowns_keep_the_exception():
    program = parse_program(
        """
        static mutable P::a
        static mutable P::b
        method P::check() {
          x := field P::a
          y := field P::b
          if x == null goto L1
          if y != null goto L1
          throw IllegalStateException "state"
        L1: return
        }
        method P::f() {
          call P::check()
          return
        }
        """,
        "1.0",
    )
    expected = "!(unknown == null) && unknown == null"
    for mode in (MODE_INTRA, MODE_INTER):
        (own,) = extract_summaries(program, mode).api(MethodId("P", "check")).summaries
        assert str(own.precondition) == expected
        assert own.flags == (FLAG_IMPRECISE,)
    (lifted,) = extract_summaries(program).api(MethodId("P", "f")).summaries
    assert lifted.exception == "IllegalStateException"
    assert str(lifted.precondition) == expected
    assert FLAG_IMPRECISE in lifted.flags


@pytest.mark.parametrize("path", [*(history_path(version) for version in HISTORY_VERSIONS), *BENCH])
@pytest.mark.parametrize("mode", [MODE_INTRA, MODE_INTER])
def test_preconditions_are_parameter_rooted(path, mode):
    report = extract_summaries(load_program(path), mode)
    for api in report.apis:
        for summary in api.summaries:
            for precondition in (summary.precondition, summary.key_precondition):
                for clause in precondition.clauses:
                    assert all(is_parameter_rooted(literal.atom) for literal in clause), format_summary(summary)


def test_infeasible_and_unreachable_flags():
    program = parse_program(
        """
        method F::twice(int) {
          r0 := param 0
          if r0 > 5 goto L1
          return
        L1: if r0 > 5 goto L2
          throw IllegalStateException "never"
        L2: return
        }
        method F::dead() {
          return
          throw IllegalStateException "dead"
        }
        method F::always() {
          throw UnsupportedOperationException
        }
        """,
        "1.0",
    )
    report = extract_summaries(program)
    (twice,) = report.api(MethodId("F", "twice", ("int",))).summaries
    assert twice.precondition.is_false
    assert twice.flags == (FLAG_INFEASIBLE,)
    assert format_summary(twice) == "IllegalStateException | never | FALSE [infeasible]"
    (dead,) = report.api(MethodId("F", "dead")).summaries
    assert dead.flags == (FLAG_UNREACHABLE,)
    (always,) = report.api(MethodId("F", "always")).summaries
    assert format_summary(always) == "UnsupportedOperationException |  | TRUE [unconditional]"


def test_infeasible_lifted_summary_is_dropped():
    program = parse_program(
        """
        private method C::check(Object) {
          r0 := param 0
          if r0 != null goto L1
          throw NullPointerException "o"
        L1: return
        }
        public method C::guarded(Object) {
          r0 := param 0
          if r0 != null goto L1
          return
        L1: call C::check(r0)
          return
        }
        public method C::passthrough(Object) {
          r0 := param 0
          call C::check(r0)
          return
        }
        """,
        "1.0",
    )
    report = extract_summaries(program)
    assert report.api(MethodId("C", "guarded", ("Object",))).summaries == ()
    passthrough = MethodId("C", "passthrough", ("Object",))
    assert _lines(report, passthrough) == ["NullPointerException | o | parameter0 == null"]


def test_recursion_is_approximated():
    program = parse_program(
        """
        method R::a(int) {
          r0 := param 0
          if r0 > 0 goto L1
          throw IllegalArgumentException "a"
        L1: call R::b(r0)
          return
        }
        method R::b(int) {
          r0 := param 0
          call R::a(r0)
          return
        }
        """,
        "1.0",
    )
    extractor = SummaryExtractor(program, MODE_INTER)
    report = extractor.run()
    (own,) = report.api(MethodId("R", "a", ("int",))).summaries
    assert FLAG_RECURSIVE in own.flags
    (lifted,) = report.api(MethodId("R", "b", ("int",))).summaries
    assert str(lifted.precondition) == "!(parameter0 > 0)"
    assert FLAG_RECURSIVE in lifted.flags
    assert set(extractor.visits.values()) == {1}


@pytest.mark.parametrize("path", [history_path("2.9"), CORPUS / "bench" / "multiple_call.exir"])
def test_every_method_visited_once(path):
    program = load_program(path)
    extractor = SummaryExtractor(program, MODE_INTER)
    extractor.run()
    assert set(extractor.visits) == {method.id for method in program.methods}
    assert set(extractor.visits.values()) == {1}


def test_method_order_does_not_change_report():
    path = history_path("2.9")
    text = path.read_text(encoding="utf-8")
    reordered = "\n\n".join(reversed(text.strip().split("\n\n"))) + "\n"
    first = render_summary_report(extract_summaries(parse_program(text, "2.9")))
    second = render_summary_report(extract_summaries(parse_program(reordered, "2.9")))
    assert first == second
    assert extract_summaries(load_program(path)).to_json() == extract_summaries(load_program(path)).to_json()


def test_report_json_round_trip():
    report = extract_summaries(load_program(history_path("2.9")))
    restored = VersionReport.from_json(report.to_json())
    assert restored == report
    assert restored.limits == report.limits


def test_report_json_errors():
    data = extract_summaries(load_program(history_path("2.9"))).to_json()
    with pytest.raises(ReportFormatError):
        VersionReport.from_json({**data, "mode": "both"})
    with pytest.raises(ReportFormatError):
        VersionReport.from_json({**data, "apis": data["apis"] + data["apis"][:1]})


# --- inter-procedural lifting against manual inlining ------------------------------


class _Body:
    def __init__(self) -> None:
        self.lines: list[str] = []
        self.pending: list[str] = []

    def add(self, text):
        prefix = "".join(f"{label}: " for label in self.pending)
        self.pending = []
        self.lines.append(f"  {prefix}{text}")

    def guard(self, variable, receiver, atom, jump_if_true, label):
        self.add(f"{variable} := call {receiver}.{atom}()")
        self.add(f"if {variable} goto {label}" if jump_if_true else f"if {variable} == false goto {label}")
        self.add(f'throw IllegalStateException "{atom}"')
        self.pending.append(label)


def _random_shape(rng):
    helpers = []
    for _ in range(rng.randint(1, 3)):
        arity = rng.randint(1, 2)
        guards = [(rng.randrange(arity), rng.random() < 0.5) for _ in range(rng.randint(1, 3))]
        helpers.append((arity, guards))
    order = rng.sample(range(len(helpers)), rng.randint(1, len(helpers)))
    calls = [(index, [rng.randrange(3) for _ in range(helpers[index][0])]) for index in order]
    before = [(rng.randrange(3), rng.random() < 0.5) for _ in range(rng.randint(0, 2))]
    after = [(rng.randrange(3), rng.random() < 0.5) for _ in range(rng.randint(0, 2))]
    return helpers, calls, before, after


def _caller_prologue(body, before):
    for index in range(3):
        body.add(f"r{index} := param {index}")
    for position, (receiver, jump) in enumerate(before):
        body.guard(f"y{position}", f"r{receiver}", f"own_b{position}", jump, f"B{position}")


def _caller_epilogue(body, after):
    for position, (receiver, jump) in enumerate(after):
        body.guard(f"w{position}", f"r{receiver}", f"own_a{position}", jump, f"A{position}")
    body.add("return")


def _original(shape):
    helpers, calls, before, after = shape
    text = []
    for index, (arity, guards) in enumerate(helpers):
        body = _Body()
        for param in range(arity):
            body.add(f"r{param} := param {param}")
        for position, (receiver, jump) in enumerate(guards):
            body.guard(f"z{position}", f"r{receiver}", f"h{index}_g{position}", jump, f"N{position}")
        body.add("return")
        params = ", ".join(["Object"] * arity)
        text += [f"private method M::h{index}({params}) {{", *body.lines, "}"]
    body = _Body()
    _caller_prologue(body, before)
    for index, arguments in calls:
        body.add(f"call M::h{index}({', '.join(f'r{argument}' for argument in arguments)})")
    _caller_epilogue(body, after)
    text += ["public method M::f(Object, Object, Object) {", *body.lines, "}"]
    return "\n".join(text) + "\n"


def _inlined(shape):
    helpers, calls, before, after = shape
    body = _Body()
    _caller_prologue(body, before)
    for index, arguments in calls:
        _, guards = helpers[index]
        for param, argument in enumerate(arguments):
            body.add(f"a{index}_{param} := r{argument}")
        for position, (receiver, jump) in enumerate(guards):
            variable, receiver_name = f"h{index}z{position}", f"a{index}_{receiver}"
            body.guard(variable, receiver_name, f"h{index}_g{position}", jump, f"H{index}N{position}")
    _caller_epilogue(body, after)
    return "\n".join(["public method M::f(Object, Object, Object) {", *body.lines, "}"]) + "\n"


def _by_message(report):
    (api,) = report.apis
    return {
        summary.message_pattern: summary.precondition.canonical_key()
        for summary in api.summaries
        if not summary.precondition.is_false
    }


def test_lifting_matches_inlining():
    rng = random.Random(1337)
    for case in range(250):
        shape = _random_shape(rng)
        inter = extract_summaries(parse_program(_original(shape), "1.0"), MODE_INTER)
        intra = extract_summaries(parse_program(_inlined(shape), "1.0"), MODE_INTRA)
        expected = _by_message(intra)
        assert _by_message(inter) == expected, (case, _original(shape))
        called = sum(len(shape[0][index][1]) for index, _ in shape[1])
        assert len(expected) == called + len(shape[2]) + len(shape[3])
