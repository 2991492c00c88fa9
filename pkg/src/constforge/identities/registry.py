"""Identity declarations: the manifest format and the built-in registry.

Manifest blocks look like::

    # comment
    identity A21
      kind real
      lhs = encode_A(2, 1)
      rhs = sqrt(2*pi*e)*erf(1/sqrt(2)) + 1
      note optional free text
      grid x = 1/2, 1, 2        # optional; x may then appear in lhs/rhs
    end
"""

from __future__ import annotations

import os
from dataclasses import dataclass, field

from ..numkern import ConstforgeError
from .expr import Expression, ParseError, parse_expr


class ManifestError(ConstforgeError, ValueError):
    reason = "manifest"

    def __init__(self, message, line, column=1, source="<manifest>"):
        self.line = line
        self.column = column
        self.source = source
        super().__init__(f"{source}:{line}:{column}: {message}")


@dataclass(frozen=True)
class Identity:
    name: str
    lhs: Expression
    rhs: Expression
    domain_note: str = ""
    numeric_kind: str = "real"
    lhs_text: str = ""
    rhs_text: str = ""
    grid_var: str = ""
    grid: tuple = field(default=())

    def points(self):
        """Variable bindings to verify at: one empty binding when there is no grid."""
        if not self.grid_var:
            return [({}, "")]
        return [({self.grid_var: value}, text) for value, text in self.grid]


def _expression(text, line_no, column, source, variables):
    try:
        return parse_expr(text, variables)
    except ParseError as exc:
        # offsets are bytes; columns are characters within the line
        prefix = text.encode("utf-8")[:exc.offset].decode("utf-8", errors="ignore")
        raise ManifestError(exc.message, line_no, column + len(prefix), source) from exc


def _finish(block, source):
    name, start = block["name"], block["line"]
    for key in ("lhs", "rhs"):
        if key not in block:
            raise ManifestError(f"identity {name!r} has no {key}", start, 1, source)
    variables = (block["grid_var"],) if block.get("grid_var") else ()
    lhs = _expression(*block["lhs"], source, variables)
    rhs = _expression(*block["rhs"], source, variables)
    grid = tuple(
        (_expression(text, ln, col, source, ()), text.strip())
        for text, ln, col in block.get("grid", ())
    )
    return Identity(
        name=name,
        lhs=lhs,
        rhs=rhs,
        domain_note=block.get("note", ""),
        numeric_kind=block.get("kind", "real"),
        lhs_text=block["lhs"][0].strip(),
        rhs_text=block["rhs"][0].strip(),
        grid_var=block.get("grid_var", ""),
        grid=grid,
    )


def _split_grid(value, line_no, column):
    parts, offset = [], 0
    for piece in value.split(","):
        lead = len(piece) - len(piece.lstrip())
        parts.append((piece, line_no, column + offset + lead))
        offset += len(piece) + 1
    return parts


def parse_manifest(text: str, source: str = "<manifest>") -> list:
    identities = []
    seen = {}
    block = None
    for line_no, raw in enumerate(text.splitlines(), start=1):
        stripped = raw.strip()
        if not stripped or stripped.startswith("#"):
            continue
        indent = len(raw) - len(raw.lstrip())
        keyword, _, rest = stripped.partition(" ")
        rest_col = indent + len(keyword) + 2 + (len(rest) - len(rest.lstrip()))
        rest = rest.strip()
        if block is None:
            if keyword != "identity" or not rest:
                raise ManifestError("expected 'identity <name>'", line_no, indent + 1, source)
            if rest in seen:
                raise ManifestError(
                    f"duplicate identity {rest!r} (first defined on line {seen[rest]})",
                    line_no, rest_col, source)
            seen[rest] = line_no
            block = {"name": rest, "line": line_no}
            continue
        if keyword == "end" and not rest:
            identities.append(_finish(block, source))
            block = None
        elif keyword == "kind":
            if rest not in ("real", "complex"):
                raise ManifestError(f"kind must be real or complex, got {rest!r}",
                                    line_no, rest_col, source)
            block["kind"] = rest
        elif keyword == "note":
            block["note"] = rest
        elif keyword in ("lhs", "rhs", "grid"):
            head, eq, expr_text = rest.partition("=")
            if keyword == "grid":
                var = head.strip()
                if not eq or not var.isidentifier():
                    raise ManifestError("expected 'grid <name> = v1, v2, ...'",
                                        line_no, rest_col, source)
                column = rest_col + len(head) + 1
                block["grid_var"] = var
                block["grid"] = _split_grid(expr_text, line_no, column)
                continue
            if not eq or head.strip():
                raise ManifestError(f"expected '{keyword} = <expression>'",
                                    line_no, rest_col, source)
            if keyword in block:
                raise ManifestError(f"{keyword} given twice", line_no, indent + 1, source)
            block[keyword] = (expr_text, line_no, rest_col + len(head) + 1)
        else:
            raise ManifestError(f"unknown directive {keyword!r}", line_no, indent + 1, source)
    if block is not None:
        raise ManifestError(f"identity {block['name']!r} is missing 'end'", block["line"], 1,
                            source)
    return identities


def load_manifest(path) -> list:
    with open(path, encoding="utf-8") as fh:
        text = fh.read()
    return parse_manifest(text, source=os.fspath(path))


BUILTIN_MANIFEST = """\
identity A21
  kind real
  note A(2,1): odd numbers 1, 3, 5, ...
  lhs = encode_A(2, 1)
  rhs = sqrt(2*pi*e)*erf(1/sqrt(2))+1
end

identity A31
  kind real
  lhs = encode_A(3, 1)
  rhs = 1+(3*e)^(1/3)*gamma(1/3)-(3*e)^(1/3)*gamma(1/3,1/3)
end

identity A42
  kind real
  note printed as A(4,1) but summing the terms 4k+2
  lhs = encode_A(4, 2)
  rhs = 2*e^(1/4)*sqrt(pi)*erf(1/2)+2
end

identity A53
  kind real
  lhs = encode_A(5, 3)
  rhs = 1-4*e^(1/5)*gamma(-2/5)/(5*5^(2/5))+3*e^(1/5)*gamma(3/5)/5^(2/5)+4*e^(1/5)*gamma(-2/5,1/5)/(5*5^(2/5))-3*e^(1/5)*gamma(3/5,1/5)/5^(2/5)
end

identity Ai1
  kind complex
  note s_n = i(n-1) + 1
  lhs = encode_A(i, 1)
  rhs = -i*gamma(-i)/gamma(1-i)-i*(-i/e)^i*gamma(-i)^2/gamma(1-i)+i*(-i/e)^i*gamma(-i)*gamma(-i,-i)/gamma(1-i)
end

identity dblfact_erf
  kind real
  note sum 1/(2n+1)!! at x = 1
  lhs = dblfact_series(1)
  rhs = sqrt(e*pi/2)*erf(1/sqrt(2))
end

identity cf_erfc
  kind real
  lhs = ramanujan_cf(1)
  rhs = sqrt(e*pi/2)*erfc(1/sqrt(2))
end

identity ramanujan_formula(x)
  kind real
  lhs = ramanujan_cf(x)+dblfact_series(x)
  rhs = sqrt(pi*exp(x)/(2*x))
  grid x = 1/2, 1, 2, 5
end
"""


def builtin_registry() -> list:
    return parse_manifest(BUILTIN_MANIFEST, source="<builtin>")
