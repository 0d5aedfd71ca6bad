"""Model-description files: parsing, validation, serialization, and report
emission.

File format (1-based indices, matching the tensor notation of the docs;
see doc/model_format.md for the full reference):

    # comment
    n = 2
    r = 4
    model = standard            # optional: TM + T*M model, k/rho/f derived
    k = offdiag_identity(2)     # block-level builtin
    rho[1][2] = x1^2 + 3*x2     # entry assignment, polynomial in x1..xn
    f[1][2][3]! = 1             # '!': assign all signed permutations
    V = 1/2*x1^2                # scalar block

Entries are polynomials with exact rational coefficients; float literals are
rejected with their position.  Undeclared blocks default to zero.  Either
`beta` (with `g_inv`) or `A` may be given, not both; `mu` may be given
directly or derived from `alpha`/`beta` by the change of variables.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction

from .basecoeff import BaseCoeff
from .courant import CourantData, standard_courant
from .geometry import ConnectionData, MetricData, PresymplecticData
from .mechanics import MechanicsData
from . import tensors


class SpecError(ValueError):
    """Parse or validation error with a deterministic position."""

    def __init__(self, message: str, line: int, col: int):
        super().__init__(f"line {line}, column {col}: {message}")
        self.line = line
        self.col = col


# block name -> (shape in ('n'|'r') symbols, symmetry)
#   symmetry: None, "sym" (first two indices), "antisym" (totally)
_BLOCKS = {
    "k": (("r", "r"), "sym"),
    "rho": (("n", "r"), None),
    "f": (("r", "r", "r"), "antisym"),
    "h": (("n", "n", "n"), "antisym"),
    "Gamma": (("r", "r", "n"), None),
    "g": (("n", "n"), "sym"),
    "g_inv": (("n", "n"), "sym"),
    "A": (("n",), None),
    "beta": (("n",), None),
    "alpha": (("r",), None),
    "mu": (("r",), None),
    "V": ((), None),
    "U": (("r", "r", "r", "r"), "antisym"),
}
_BLOCK_ORDER = list(_BLOCKS)


@dataclass
class ModelSpec:
    n: int
    r: int
    standard: bool = False
    blocks: dict = field(default_factory=dict)

    def has(self, name: str) -> bool:
        return name in self.blocks

    def block(self, name: str):
        """The named block, or its documented default (zero) when absent."""
        if name in self.blocks:
            return self.blocks[name]
        shape = tuple(self.n if s == "n" else self.r for s in _BLOCKS[name][0])
        if not shape:
            return BaseCoeff.zero(self.n)
        return tensors.zeros(self.n, *shape)

    # -- typed views -------------------------------------------------------

    def courant(self) -> CourantData:
        if self.standard:
            return standard_courant(self.n, self.block("h"))
        if "k" not in self.blocks:
            raise ValueError("the fiber metric k is required "
                             "(or declare `model = standard`)")
        return CourantData(self.n, self.r, self.blocks["k"],
                           self.block("rho"), self.block("f"))

    def connection(self) -> ConnectionData:
        return ConnectionData(self.n, self.r, self.block("Gamma"))

    def metric(self) -> MetricData:
        return MetricData(self.n, self.block("g"),
                          self.blocks.get("g_inv"))

    def presymplectic(self) -> PresymplecticData:
        return PresymplecticData(self.n, self.block("A"))

    def mechanics(self) -> MechanicsData:
        alpha = self.blocks.get("alpha", self.blocks.get("mu"))
        if alpha is None:
            alpha = self.block("alpha")
        return MechanicsData(self.metric(), alpha,
                             beta=self.blocks.get("beta"),
                             V=self.blocks.get("V"))

    def momentum_data(self):
        """(mu, presymp) in the primed chart: direct mu + A, or absorbed."""
        from .mechanics import absorb_beta
        if "beta" in self.blocks:
            absorbed = absorb_beta(self.courant(), self.mechanics())
            return absorbed.mu, absorbed.presymp
        return self.block("mu"), self.presymplectic()


# ---------------------------------------------------------------------------
# tokenizer

_SYMBOLS = "[]()^*/+-=!,"


def _tokenize(text: str, line_no: int):
    """[(kind, value, col)] with kind in {'int', 'ident', 'sym'}."""
    out = []
    i = 0
    while i < len(text):
        c = text[i]
        if c == "#":
            break
        if c.isspace():
            i += 1
            continue
        col = i + 1
        if c.isdigit():
            j = i
            while j < len(text) and text[j].isdigit():
                j += 1
            if j < len(text) and text[j] == ".":
                raise SpecError("float literal (use exact rationals like 1/2)",
                                line_no, col)
            out.append(("int", int(text[i:j]), col))
            i = j
            continue
        if c.isalpha() or c == "_":
            j = i
            while j < len(text) and (text[j].isalnum() or text[j] == "_"):
                j += 1
            out.append(("ident", text[i:j], col))
            i = j
            continue
        if c in _SYMBOLS:
            out.append(("sym", c, col))
            i += 1
            continue
        raise SpecError(f"unexpected character {c!r}", line_no, col)
    return out


class _ExprParser:
    """Recursive-descent parser for polynomial expressions in x1..xn."""

    def __init__(self, tokens, pos, n, line_no):
        self.toks = tokens
        self.i = pos
        self.n = n
        self.line = line_no

    def _peek(self):
        return self.toks[self.i] if self.i < len(self.toks) else None

    def _error(self, message):
        tok = self._peek()
        col = tok[2] if tok else (self.toks[-1][2] + 1 if self.toks else 1)
        raise SpecError(message, self.line, col)

    def _take_sym(self, *symbols):
        tok = self._peek()
        if tok and tok[0] == "sym" and tok[1] in symbols:
            self.i += 1
            return tok[1]
        return None

    def parse(self) -> BaseCoeff:
        v = self._sum()
        if self._peek() is not None:
            self._error("unexpected trailing token in expression")
        return v

    def _sum(self):
        sign = -1 if self._take_sym("-") else 1
        if sign == 1:
            self._take_sym("+")
        v = self._term().scale(sign)
        while True:
            op = self._take_sym("+", "-")
            if op is None:
                return v
            t = self._term()
            v = v + (t if op == "+" else -t)

    def _term(self):
        v = self._factor()
        while True:
            op = self._take_sym("*", "/")
            if op is None:
                return v
            rhs_pos = self.i
            rhs = self._factor()
            if op == "*":
                v = v * rhs
            else:
                if not rhs.is_constant():
                    self.i = rhs_pos
                    self._error("division by a non-constant expression")
                c = rhs.constant_value()
                if c == 0:
                    self.i = rhs_pos
                    self._error("division by zero")
                v = v.scale(Fraction(1, 1) / c)

    def _factor(self):
        if self._take_sym("-"):
            return -self._factor()
        v = self._atom()
        if self._take_sym("^"):
            tok = self._peek()
            if tok is None or tok[0] != "int":
                self._error("exponent must be a nonnegative integer literal")
            self.i += 1
            return v ** tok[1]
        return v

    def _atom(self):
        tok = self._peek()
        if tok is None:
            self._error("expected an expression")
        kind, val, col = tok
        if kind == "int":
            self.i += 1
            return BaseCoeff.const(self.n, val)
        if kind == "ident":
            if val.startswith("x") and val[1:].isdigit():
                idx = int(val[1:])
                if not 1 <= idx <= self.n:
                    raise SpecError(f"variable {val} out of range (n = {self.n})",
                                    self.line, col)
                self.i += 1
                return BaseCoeff.var(self.n, idx - 1)
            raise SpecError(f"unknown identifier {val!r} in expression "
                            "(only x1..xn are allowed)", self.line, col)
        if kind == "sym" and val == "(":
            self.i += 1
            v = self._sum()
            if not self._take_sym(")"):
                self._error("expected ')'")
            return v
        self._error(f"unexpected token {val!r} in expression")


# ---------------------------------------------------------------------------
# builtins (block-level right-hand sides)

def _builtin_offdiag_identity(n_base, m):
    r = 2 * m
    out = tensors.zeros(n_base, r, r)
    one = BaseCoeff.one(n_base)
    for i in range(m):
        out[i][m + i] = one
        out[m + i][i] = one
    return out


def _builtin_identity(n_base, m):
    return tensors.identity_matrix(n_base, m)


def _builtin_epsilon(n_base, m):
    if m != 3:
        raise ValueError("epsilon is only defined for 3 indices")
    from itertools import permutations
    out = tensors.zeros(n_base, 3, 3, 3)
    for perm in permutations((0, 1, 2)):
        out[perm[0]][perm[1]][perm[2]] = BaseCoeff.const(
            n_base, tensors.perm_sign_of_map((0, 1, 2), perm))
    return out


_BUILTINS = {
    "offdiag_identity": _builtin_offdiag_identity,
    "identity": _builtin_identity,
    "epsilon": _builtin_epsilon,
}


# ---------------------------------------------------------------------------
# parser

def parse_coeff(n: int, text: str) -> BaseCoeff:
    """Parse a single polynomial expression in x1..xn (exact rationals)."""
    toks = _tokenize(text, 1)
    parser = _ExprParser(toks, 0, n, 1)
    return parser.parse()


def parse_spec(text: str) -> ModelSpec:
    n = None
    r = None
    standard = False
    model_line = 1
    # block -> {index-tuple: (value, line, col)}
    entries: dict[str, dict] = {}
    whole: dict[str, tuple] = {}     # block -> (tensor, line, col)
    block_lines: dict[str, int] = {}  # block -> last assignment line

    def require_dims(line_no, col):
        if n is None:
            raise SpecError("n must be declared before this statement",
                            line_no, col)
        if r is None:
            raise SpecError("r must be declared before this statement",
                            line_no, col)

    for line_no, raw in enumerate(text.splitlines(), start=1):
        toks = _tokenize(raw, line_no)
        if not toks:
            continue
        kind, name, col = toks[0]
        if kind != "ident":
            raise SpecError("statement must start with a name", line_no, col)
        pos = 1

        # n / r / model declarations
        if name in ("n", "r", "model"):
            if not (pos < len(toks) and toks[pos][:2] == ("sym", "=")):
                raise SpecError("expected '='", line_no,
                                toks[pos][2] if pos < len(toks) else col + len(name))
            pos += 1
            if name == "model":
                if pos < len(toks) and toks[pos][:2] == ("ident", "standard") \
                        and pos + 1 == len(toks):
                    standard = True
                    model_line = line_no
                    continue
                raise SpecError("the only supported model directive is "
                                "`model = standard`", line_no, toks[pos - 1][2])
            if not (pos < len(toks) and toks[pos][0] == "int"
                    and pos + 1 == len(toks)):
                raise SpecError(f"{name} must be a positive integer literal",
                                line_no, toks[pos][2] if pos < len(toks) else col)
            val = toks[pos][1]
            if val <= 0:
                raise SpecError(f"{name} must be positive", line_no, toks[pos][2])
            if name == "n":
                if n is not None:
                    raise SpecError("n declared twice", line_no, col)
                n = val
            else:
                if r is not None:
                    raise SpecError("r declared twice", line_no, col)
                r = val
            continue

        if name not in _BLOCKS:
            raise SpecError(f"unknown block {name!r}", line_no, col)
        require_dims(line_no, col)
        shape = tuple(n if s == "n" else r for s in _BLOCKS[name][0])

        # indexed assignment?
        idx = []
        while pos < len(toks) and toks[pos][:2] == ("sym", "["):
            pos += 1
            if not (pos < len(toks) and toks[pos][0] == "int"):
                raise SpecError("expected an index", line_no,
                                toks[pos][2] if pos < len(toks) else col)
            idx.append((toks[pos][1], toks[pos][2]))
            pos += 1
            if not (pos < len(toks) and toks[pos][:2] == ("sym", "]")):
                raise SpecError("expected ']'", line_no,
                                toks[pos][2] if pos < len(toks) else col)
            pos += 1
        antisym_mark = False
        if pos < len(toks) and toks[pos][:2] == ("sym", "!"):
            antisym_mark = True
            pos += 1
        if not (pos < len(toks) and toks[pos][:2] == ("sym", "=")):
            raise SpecError("expected '='", line_no,
                            toks[pos][2] if pos < len(toks) else col)
        pos += 1

        if idx:
            if len(idx) != len(shape):
                raise SpecError(
                    f"{name} takes {len(shape)} indices, got {len(idx)}",
                    line_no, idx[0][1])
            for (v, c), dim in zip(idx, shape):
                if not 1 <= v <= dim:
                    raise SpecError(f"index {v} out of range 1..{dim}",
                                    line_no, c)
            if antisym_mark and _BLOCKS[name][1] != "antisym":
                raise SpecError(f"'!' is only meaningful on antisymmetric "
                                f"blocks, not {name!r}", line_no, col)
            value = _ExprParser(toks, pos, n, line_no).parse()
            tgt = entries.setdefault(name, {})
            block_lines[name] = line_no
            key = tuple(v - 1 for v, _ in idx)
            if antisym_mark:
                from itertools import permutations
                if len(set(key)) < len(key):
                    raise SpecError("repeated index in an antisymmetric "
                                    "assignment", line_no, idx[0][1])
                for perm in permutations(range(len(key))):
                    pk = tuple(key[p] for p in perm)
                    sgn = tensors.perm_sign(perm)
                    _set_entry(tgt, pk, value.scale(sgn), line_no, idx[0][1])
            else:
                _set_entry(tgt, key, value, line_no, idx[0][1])
            continue

        # whole-block assignment: builtin call or scalar expression
        if name in whole:
            raise SpecError(f"{name} is already assigned "
                            f"(line {whole[name][1]})", line_no, col)
        if shape == ():
            value = _ExprParser(toks, pos, n, line_no).parse()
            whole[name] = (value, line_no, col)
            block_lines[name] = line_no
            continue
        if (pos + 3 < len(toks) and toks[pos][0] == "ident"
                and toks[pos + 1][:2] == ("sym", "(")
                and toks[pos + 2][0] == "int"
                and toks[pos + 3][:2] == ("sym", ")")
                and pos + 4 == len(toks)):
            fn_name = toks[pos][1]
            if fn_name not in _BUILTINS:
                raise SpecError(f"unknown builtin {fn_name!r}", line_no,
                                toks[pos][2])
            try:
                t = _BUILTINS[fn_name](n, toks[pos + 2][1])
            except ValueError as exc:
                raise SpecError(str(exc), line_no, toks[pos][2]) from exc
            if tensors.shape_of(t) != shape:
                raise SpecError(
                    f"builtin produced shape {tensors.shape_of(t)}, "
                    f"{name} needs {shape}", line_no, toks[pos][2])
            whole[name] = (t, line_no, col)
            block_lines[name] = line_no
            continue
        raise SpecError(f"{name} needs {len(shape)} indices or a builtin "
                        "right-hand side", line_no, col)

    if n is None:
        raise SpecError("n is not declared", 1, 1)
    if r is None:
        raise SpecError("r is not declared", 1, 1)

    blocks = {}
    for name, (tensor, line_no, col) in whole.items():
        if name in entries:
            raise SpecError(f"{name} assigned both as a whole and entrywise",
                            line_no, col)
        blocks[name] = tensor
    for name, tgt in entries.items():
        shape = tuple(n if s == "n" else r for s in _BLOCKS[name][0])
        t = tensors.zeros(n, *shape)
        for key, (value, _, _) in tgt.items():
            cur = t
            for i in key[:-1]:
                cur = cur[i]
            cur[key[-1]] = value
        blocks[name] = t

    _validate(n, r, standard, blocks, block_lines, model_line)
    return ModelSpec(n=n, r=r, standard=standard, blocks=blocks)


def _set_entry(tgt, key, value, line_no, col):
    if key in tgt:
        old, oline, _ = tgt[key]
        if old != value:
            raise SpecError(
                f"conflicting assignment for index {tuple(i + 1 for i in key)}"
                f" (first set on line {oline})", line_no, col)
        return
    tgt[key] = (value, line_no, col)


def _validate(n, r, standard, blocks, block_lines, model_line):
    def fail(msg, line):
        raise SpecError(msg, line, 1)

    def line_of(*names):
        return max(block_lines.get(name, 1) for name in names)

    if standard:
        if r != 2 * n:
            fail(f"model = standard requires r = 2n, got r = {r}", model_line)
        for forbidden in ("k", "rho", "f"):
            if forbidden in blocks:
                fail(f"{forbidden} may not be given with model = standard "
                     "(it is derived)", line_of(forbidden))
    for name, t in blocks.items():
        _, symmetry = _BLOCKS[name]
        if symmetry == "sym" and not tensors.is_symmetric(t):
            fail(f"{name} must be symmetric", line_of(name))
        if symmetry == "antisym":
            try:
                tensors.check_total_antisymmetry(t, name)
            except ValueError as exc:
                fail(str(exc), line_of(name))
    if "A" in blocks and "beta" in blocks:
        fail("give either A or beta, not both", line_of("A", "beta"))
    if "alpha" in blocks and "mu" in blocks:
        fail("give either alpha or mu, not both", line_of("alpha", "mu"))
    if "beta" in blocks and "g_inv" not in blocks:
        fail("beta requires g_inv (the change of variables needs exact "
             "g_{ij})", line_of("beta"))


# ---------------------------------------------------------------------------
# serialization

def print_spec(spec: ModelSpec) -> str:
    """Canonical text form; parse(print_spec(s)) == s."""
    lines = [f"n = {spec.n}", f"r = {spec.r}"]
    if spec.standard:
        lines.append("model = standard")
    for name in _BLOCK_ORDER:
        if name not in spec.blocks:
            continue
        t = spec.blocks[name]
        if isinstance(t, BaseCoeff):
            lines.append(f"{name} = {t}")
            continue

        def walk(v, idx):
            if isinstance(v, list):
                for pos, u in enumerate(v):
                    walk(u, idx + (pos,))
                return
            if not v.is_zero():
                suffix = "".join(f"[{i + 1}]" for i in idx)
                lines.append(f"{name}{suffix} = {v}")

        walk(t, ())
    return "\n".join(lines) + "\n"


# ---------------------------------------------------------------------------
# report emission

def emit_report(report, format: str = "human") -> str:
    """Render a Report; the machine format is byte-stable across runs."""
    if format == "machine":
        lines = [f"report {report.title}"]
        for rec in report.records:
            lines.append(f"check {rec.name} {'pass' if rec.passed else 'fail'}")
            lines.append(f"  subject {rec.subject}")
            for label, text in rec.entries:
                lines.append(f"  residual {label} = {text}")
        failed = sum(1 for rec in report.records if not rec.passed)
        lines.append(f"end {len(report.records)} {failed}")
        return "\n".join(lines) + "\n"
    if format != "human":
        raise ValueError(f"unknown report format {format!r}")
    lines = [f"== {report.title} =="]
    for rec in report.records:
        mark = "PASS" if rec.passed else "FAIL"
        lines.append(f"{mark}  {rec.name}: {rec.subject}")
        for label, text in rec.entries:
            lines.append(f"      {label} = {text}")
    failed = sum(1 for rec in report.records if not rec.passed)
    verdict = "all passed" if failed == 0 else f"{failed} failed"
    lines.append(f"{len(report.records)} checks, {verdict}")
    return "\n".join(lines) + "\n"
