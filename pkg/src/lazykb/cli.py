"""Command-line front end: run block scripts and print completed symbols.

A script holds four kinds of blocks (define is optional, names are free):

    vocabulary V {
        type Color
        type Area
        Border(Area, Area)
        Coloring(Area) : Color
    }
    structure S : V {
        Color = { Red; Green; Blue }
        Area = { Belgium; Holland; Germany }
        Border = { (Belgium, Holland); (Belgium, Germany); (Holland, Germany) }
    }
    theory T : V {
        all(Coloring(a) != Coloring(b) for (a,b) in Border)
    }
    define D : V {
        Path(Node, Node) <- lambda x, y: Edge(x, y)
    }

Structure values: bare identifiers and quoted strings are string values,
integers are integers, `0..80` is the inclusive integer range, `(a, b)` a
tuple, `a -> b` a function table entry.  `//` starts a comment.  Entries may
span lines while brackets are open.

The tool prints one line per previously-uninterpreted symbol per model:

    Coloring = {"Belgium"->"Blue";"Germany"->"Green";"Holland"->"Red"}

Models are separated by a blank line.  Exit status: 0 with models, 1 when
the theory is unsatisfiable, 2 on errors (including --check violations).
"""

from __future__ import annotations

import argparse
import random
import re
import sys

from .errors import KBError
from .kbcore import KnowledgeBase
from .vocabulary import Structure, format_interpretation

_BLOCK_RE = re.compile(
    r"^\s*(vocabulary|structure|theory|define)\s+(\w+)\s*(?::\s*(\w+))?\s*\{",
    re.M)


def _chars(text: str):
    """(index, char, structural) triples; characters inside quoted strings
    (including the quotes) are not structural, so separators, brackets and
    arrows inside string values never count."""
    in_str = False
    quote = ""
    esc = False
    for i, c in enumerate(text):
        if in_str:
            yield i, c, False
            if esc:
                esc = False
            elif c == "\\":
                esc = True
            elif c == quote:
                in_str = False
        elif c in "\"'":
            in_str = True
            quote = c
            yield i, c, False
        else:
            yield i, c, True


def _strip_comments(text: str) -> str:
    out = []
    for line in text.splitlines():
        in_str = False
        quote = ""
        i = 0
        while i < len(line):
            c = line[i]
            if in_str:
                if c == "\\":
                    i += 2
                    continue
                if c == quote:
                    in_str = False
            elif c in "\"'":
                in_str = True
                quote = c
            elif c == "/" and line[i:i + 2] == "//":
                line = line[:i]
                break
            i += 1
        out.append(line)
    return "\n".join(out)


def _find_blocks(text: str) -> list[tuple[str, str, str]]:
    """(kind, name, body) per block, in file order."""
    blocks = []
    pos = 0
    while True:
        m = _BLOCK_RE.search(text, pos)
        if m is None:
            leftover = text[pos:].strip()
            if leftover:
                raise KBError(f"unexpected text outside blocks: {leftover[:40]!r}")
            return blocks
        between = text[pos:m.start()].strip()
        if between:
            raise KBError(f"unexpected text outside blocks: {between[:40]!r}")
        depth = 1
        end = None
        for i, c, structural in _chars(text[m.end():]):
            if not structural:
                continue
            if c == "{":
                depth += 1
            elif c == "}":
                depth -= 1
                if depth == 0:
                    end = m.end() + i
                    break
        if end is None:
            raise KBError(f"unterminated block {m.group(2)!r}")
        blocks.append((m.group(1), m.group(2), text[m.end():end]))
        pos = end + 1


def _split_entries(body: str) -> list[str]:
    """Top-level entries: newline-separated, but lines with open brackets
    continue onto the next line."""
    entries = []
    depth = 0
    buf: list[str] = []
    for line in body.splitlines():
        buf.append(line)
        for _i, c, structural in _chars(line):
            if not structural:
                continue
            if c in "({[":
                depth += 1
            elif c in ")}]":
                depth -= 1
        if depth == 0:
            entry = "\n".join(buf).strip()
            buf = []
            if entry:
                entries.append(entry)
    tail = "\n".join(buf).strip()
    if tail:
        if depth != 0:
            raise KBError(f"unbalanced brackets in entry: {tail[:40]!r}")
        entries.append(tail)
    return entries


_INT_RE = re.compile(r"^-?\d+$")
_RANGE_RE = re.compile(r"^(-?\d+)\s*\.\.\s*(-?\d+)$")
_STRING_RE = re.compile(r'^"((?:[^"\\]|\\.)*)"$|' + r"^'((?:[^'\\]|\\.)*)'$")
_IDENT_RE = re.compile(r"^[A-Za-z_]\w*$")


def _parse_scalar(text: str):
    text = text.strip()
    if _INT_RE.match(text):
        return int(text)
    m = _STRING_RE.match(text)
    if m:
        raw = m.group(1) if m.group(1) is not None else m.group(2)
        return re.sub(r"\\(.)", r"\1", raw)
    if _IDENT_RE.match(text):
        return text
    raise KBError(f"cannot parse value {text!r}")


def _split_top(text: str, sep: str) -> list[str]:
    parts = []
    depth = 0
    buf = []
    for _i, c, structural in _chars(text):
        if structural:
            if c in "({[":
                depth += 1
            elif c in ")}]":
                depth -= 1
            if c == sep and depth == 0:
                parts.append("".join(buf))
                buf = []
                continue
        buf.append(c)
    parts.append("".join(buf))
    return [p.strip() for p in parts]


def _parse_element(text: str):
    """One set element: scalar, range, tuple, or `key -> value` maplet."""
    text = text.strip()
    arrow = None
    depth = 0
    for i, c, structural in _chars(text):
        if not structural:
            continue
        if c in "({[":
            depth += 1
        elif c in ")}]":
            depth -= 1
        elif depth == 0 and c == "-" and text[i:i + 2] == "->":
            arrow = i
            break
    if arrow is not None:
        key = _parse_item(text[:arrow])
        val = _parse_scalar(text[arrow + 2:])
        return ("maplet", key, val)
    m = _RANGE_RE.match(text)
    if m:
        lo, hi = int(m.group(1)), int(m.group(2))
        return ("range", lo, hi)
    return ("item", _parse_item(text), None)


def _parse_item(text: str):
    text = text.strip()
    if text.startswith("(") and text.endswith(")"):
        return tuple(_parse_scalar(p) for p in _split_top(text[1:-1], ","))
    return _parse_scalar(text)


def _parse_set(text: str) -> list:
    inner = text.strip()
    if not (inner.startswith("{") and inner.endswith("}")):
        raise KBError(f"expected {{...}} value, got {text[:40]!r}")
    inner = inner[1:-1].strip()
    if not inner:
        return []
    out = []
    for part in _split_top(inner, ";"):
        if not part:
            continue  # tolerate a trailing semicolon
        out.append(_parse_element(part))
    return out


def load_script(text: str, **kb_options) -> KnowledgeBase:
    """Build a KnowledgeBase from block-script source."""
    kb = KnowledgeBase(**kb_options)
    text = _strip_comments(text)
    for kind, _name, body in _find_blocks(text):
        if kind == "vocabulary":
            for entry in _split_entries(body):
                if entry.startswith("type "):
                    kb.add_type(entry[5:].strip())
                else:
                    kb.declare(entry)
        elif kind == "structure":
            for entry in _split_entries(body):
                if "=" not in entry:
                    raise KBError(f"expected 'Name = value', got {entry!r}")
                name, _, value = entry.partition("=")
                _assign_from_source(kb, name.strip(), value.strip())
        elif kind == "theory":
            for entry in _split_entries(body):
                kb.constraint(" ".join(entry.split()))
        else:  # define
            for entry in _split_entries(body):
                if "<-" not in entry:
                    raise KBError(f"expected 'Head(...) <- lambda ...', got {entry!r}")
                head, _, rule = entry.partition("<-")
                kb.define(" ".join(head.split()), " ".join(rule.split()))
    return kb


def _assign_from_source(kb: KnowledgeBase, name: str, value: str) -> None:
    decl = kb.vocab.decl(name)
    if not value.startswith("{"):
        if decl.kind != "constant":
            raise KBError(f"{name} needs a {{...}} extension")
        kb.assign(name, _parse_scalar(value))
        return
    elements = _parse_set(value)
    if decl.kind == "type":
        values: list = []
        for tag, a, b in elements:
            if tag == "range":
                values.extend(range(a, b + 1))
            elif tag == "item" and not isinstance(a, tuple):
                values.append(a)
            else:
                raise KBError(f"type {name}: expected plain values")
        kb.assign(name, values)
    elif decl.kind == "predicate":
        tuples = []
        for tag, a, _b in elements:
            if tag != "item":
                raise KBError(f"relation {name}: expected tuples or values")
            tuples.append(a)
        kb.assign(name, tuples)
    else:
        table = {}
        for tag, k, v in elements:
            if tag != "maplet":
                raise KBError(f"function {name}: expected 'key -> value' entries")
            if not isinstance(k, tuple):
                k = (k,)
            table[k] = v
        kb.assign(name, table)


def format_model(kb: KnowledgeBase, completed: Structure,
                 symbols: list[str]) -> str:
    lines = [format_interpretation(kb.vocab.decl(s), completed) for s in symbols]
    return "\n".join(lines)


def run(path: str, models: int = 1, debug: bool = False, check: bool = False,
        out=None) -> int:
    out = out if out is not None else sys.stdout
    try:
        with open(path, "r", encoding="utf-8") as f:
            source = f.read()
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2

    try:
        kb = load_script(source, name=path.rsplit("/", 1)[-1], debug=debug)
        symbols = kb.absent_user_symbols()
        if models == 1:
            result = kb.expand()
            structures = [result.completed] if result.satisfiable else []
        else:
            structures = kb.enumerate_models(models)
    except KBError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2

    if debug:
        dimacs, amap = kb.last_ground_texts()
        with open(path + ".cnf", "w", encoding="utf-8") as f:
            f.write(dimacs)
        with open(path + ".ground.txt", "w", encoding="utf-8") as f:
            f.write(kb.dump())
            f.write("\n")
            f.write(amap)

    if not structures:
        print("UNSATISFIABLE", file=out)
        return 1

    failed = False
    for i, st in enumerate(structures):
        if i:
            print(file=out)
        print(format_model(kb, st, symbols), file=out)
        if check:
            bad = kb.violations(st)
            if bad:
                failed = True
                for src in bad:
                    print(f"check: VIOLATED {src}", file=out)
            else:
                print(f"check: {len(kb.constraints)} constraints satisfied",
                      file=out)
    return 2 if failed else 0


def main(argv=None) -> int:
    ap = argparse.ArgumentParser(
        prog="lazykb",
        description="Solve a block script and print completed interpretations.")
    ap.add_argument("script", help="path to the .kb script")
    ap.add_argument("--models", type=int, default=1, metavar="N",
                    help="number of models to print (0 = all, default 1)")
    ap.add_argument("--debug", action="store_true",
                    help="dump blocks to stdout and write .cnf/.ground.txt")
    ap.add_argument("--check", action="store_true",
                    help="re-verify each model with the reference evaluator")
    ap.add_argument("--seed", type=int, default=0, metavar="S",
                    help="seed for randomized options (the default engine "
                         "configuration is deterministic)")
    args = ap.parse_args(argv)
    random.seed(args.seed)
    if args.models < 0:
        print("error: --models must be >= 0", file=sys.stderr)
        return 2
    return run(args.script, models=args.models, debug=args.debug,
               check=args.check)


if __name__ == "__main__":
    sys.exit(main())
