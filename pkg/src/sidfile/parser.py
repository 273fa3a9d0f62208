from __future__ import annotations

import re

from loguru import logger

from ..formula.atoms import Atom, Diseq, Eq, PointsTo, Pred
from ..formula.heaps import SID, Problem, Rule, Sequent, SymbolicHeap
from ..formula.terms import Term, const, var
from ..sl_entail.exceptions import (
    ProblemFormatError,
    SidArityError,
    SidFieldCountError,
    SidShadowingError,
    SidSyntaxError,
    SidUndeclaredError,
)
from .reader import SExpr, SList, Token, read_sexprs

KEYWORDS = {"fields", "const", "pred", "exists", "star", "pto", "eq", "distinct", "emp", "entail"}
DECLARATIONS = ["fields", "const", "pred", "entail"]
_IDENT = re.compile(r"[A-Za-z_][A-Za-z0-9_'.!#-]*")
_NAT = re.compile(r"[0-9]+")

Scope = dict[str, Term]


def _where(expr: SExpr) -> tuple[int, int]:
    return expr.line, expr.column


def _ident(expr: SExpr, what: str) -> str:
    if not isinstance(expr, Token) or not _IDENT.fullmatch(expr.text) or expr.text in KEYWORDS:
        raise SidSyntaxError(f"bad {what}", *_where(expr), expected=[what])
    return expr.text


def _list(expr: SExpr, what: str) -> SList:
    if not isinstance(expr, SList):
        raise SidSyntaxError(f"expected a parenthesized {what}", *_where(expr), expected=["'('"])
    return expr


def _local_names(pred_forms: list[SList]) -> set[str]:
    """parameter and bound variable names of the rules"""
    names: set[str] = set()
    stack: list[SExpr] = []
    for form in pred_forms:
        head = form.items[1]
        if isinstance(head, SList):
            names.update(item.text for item in head.items[1:] if isinstance(item, Token))
        stack.extend(form.items[2:])
    while stack:
        expr = stack.pop()
        if not isinstance(expr, SList):
            continue
        if expr.head == "exists" and len(expr.items) > 1 and isinstance(expr.items[1], SList):
            names.update(item.text for item in expr.items[1].items if isinstance(item, Token))
        stack.extend(expr.items)
    return names


class _ProblemParser:
    def __init__(self, text: str) -> None:
        self.forms = read_sexprs(text)
        self.fields: int | None = None
        self.constants: dict[str, Term] = {}
        self.lifted: dict[str, Term] = {}
        self.locals: set[str] = set()
        self.arities: dict[str, int] = {}
        self.pred_forms: list[SList] = []
        self.entail_forms: list[SList] = []

    def parse(self) -> Problem:
        for form in self.forms:
            self._declaration(form)
        if self.fields is None:
            self.fields = self._infer_fields()
        self.locals = _local_names(self.pred_forms)
        sequents = tuple(self._sequent(form) for form in self.entail_forms)
        rules: dict[str, tuple[Rule, ...]] = {}
        for form in self.pred_forms:
            name, params = self._head(form)
            rules[name] = tuple(self._rule(name, params, body) for body in form.items[2:])
        sid = SID(dict(self.arities), rules)
        constants = frozenset([*self.constants.values(), *self.lifted.values()])
        return Problem(constants, self.fields, sid, sequents)

    def _declaration(self, form: SExpr) -> None:
        if not isinstance(form, SList) or form.head not in DECLARATIONS:
            raise SidSyntaxError("unknown declaration", *_where(form), expected=DECLARATIONS)
        match form.head:
            case "fields":
                count = form.items[1] if len(form.items) == 2 else None
                if not isinstance(count, Token) or not _NAT.fullmatch(count.text):
                    raise SidSyntaxError("bad field count", *_where(form), expected=["NAT"])
                self.fields = int(count.text)
                if self.fields < 1:
                    raise SidFieldCountError("the field count must be at least 1", *_where(form))
            case "const":
                for item in form.items[1:]:
                    name = _ident(item, "constant name")
                    self.constants[name] = const(name)
            case "pred":
                if len(form.items) < 2:
                    raise SidSyntaxError("missing predicate head", *_where(form), expected=["(IDENT IDENT*)"])
                head = _list(form.items[1], "predicate head")
                if not head.items:
                    raise SidSyntaxError("empty predicate head", *_where(head), expected=["IDENT"])
                name = _ident(head.items[0], "predicate name")
                if name in self.arities:
                    raise ProblemFormatError(f"predicate {name} declared twice", *_where(form))
                self.arities[name] = len(head.items) - 1
                self.pred_forms.append(form)
            case "entail":
                self.entail_forms.append(form)
        for name in self.constants:
            if name in self.arities:
                raise ProblemFormatError(f"{name} is both a constant and a predicate", *_where(form))

    def _infer_fields(self) -> int:
        stack: list[SExpr] = list(self.forms)
        while stack:
            expr = stack.pop(0)
            if isinstance(expr, SList):
                if expr.head == "pto" and len(expr.items) == 3 and isinstance(expr.items[2], SList):
                    return len(expr.items[2].items)
                stack = list(expr.items) + stack
        return 1

    def _head(self, form: SList) -> tuple[str, tuple[Term, ...]]:
        head = _list(form.items[1], "predicate head")
        name = _ident(head.items[0], "predicate name")
        params: list[Term] = []
        for item in head.items[1:]:
            pname = _ident(item, "parameter")
            if pname in self.constants:
                raise SidShadowingError(f"parameter {pname} shadows a constant", *_where(item))
            if var(pname) in params:
                raise SidShadowingError(f"parameter {pname} repeated", *_where(item))
            params.append(var(pname))
        return name, tuple(params)

    def _rule(self, name: str, params: tuple[Term, ...], body: SExpr) -> Rule:
        scope = {p.name: p for p in params}
        return Rule(name, params, self._heap(body, scope, lift=False))

    def _sequent(self, form: SList) -> Sequent:
        if len(form.items) != 3:
            raise SidSyntaxError("malformed entailment", *_where(form), expected=["(entail sh (sh*))"])
        lhs = self._heap(form.items[1], {}, lift=True)
        rhs_list = _list(form.items[2], "right-hand side list")
        rhs = tuple(self._heap(item, {}, lift=True) for item in rhs_list.items)
        return Sequent(lhs, rhs)

    def _heap(self, expr: SExpr, scope: Scope, lift: bool) -> SymbolicHeap:
        if isinstance(expr, SList) and expr.head == "exists":
            if len(expr.items) != 3:
                raise SidSyntaxError("malformed exists", *_where(expr), expected=["(exists (IDENT*) sh)"])
            binders = _list(expr.items[1], "binder list")
            inner = dict(scope)
            exists: list[Term] = []
            for item in binders.items:
                bname = _ident(item, "bound variable")
                if bname in inner or bname in self.constants:
                    raise SidShadowingError(f"bound variable {bname} shadows an outer name", *_where(item))
                inner[bname] = var(bname)
                exists.append(var(bname))
            return SymbolicHeap(tuple(exists), tuple(self._star(expr.items[2], inner, lift)))
        return SymbolicHeap((), tuple(self._star(expr, scope, lift)))

    def _star(self, expr: SExpr, scope: Scope, lift: bool) -> list[Atom]:
        if isinstance(expr, SList) and expr.head == "star":
            if len(expr.items) < 2:
                raise SidSyntaxError("empty star", *_where(expr), expected=["atom"])
            return [a for item in expr.items[1:] for a in self._star(item, scope, lift)]
        atom = self._atom(expr, scope, lift)
        return [] if atom is None else [atom]

    def _atom(self, expr: SExpr, scope: Scope, lift: bool) -> Atom | None:
        if isinstance(expr, Token):
            if expr.text == "emp":
                return None
            raise SidSyntaxError(f"unexpected token {expr.text!r}", *_where(expr), expected=["emp", "'('"])
        head = expr.head
        if head is None:
            raise SidSyntaxError("expected an atom", *_where(expr), expected=["pto", "eq", "distinct", "IDENT"])
        args = expr.items[1:]
        match head:
            case "pto":
                if len(args) != 2:
                    raise SidSyntaxError("malformed points-to", *_where(expr), expected=["(pto t (t*))"])
                dests = _list(args[1], "destination list")
                if len(dests.items) != self.fields:
                    raise SidFieldCountError(
                        f"points-to with {len(dests.items)} fields, {self.fields} declared", *_where(expr)
                    )
                src = self._term(args[0], scope, lift)
                return PointsTo(src, tuple(self._term(d, scope, lift) for d in dests.items))
            case "eq" | "distinct":
                if len(args) != 2:
                    raise SidSyntaxError(f"malformed {head}", *_where(expr), expected=["two terms"])
                lhs, rhs = (self._term(a, scope, lift) for a in args)
                return Eq(lhs, rhs) if head == "eq" else Diseq(lhs, rhs)
            case _:
                if head not in self.arities:
                    raise SidUndeclaredError(f"undeclared predicate {head}", *_where(expr))
                if len(args) != self.arities[head]:
                    raise SidArityError(
                        f"{head} takes {self.arities[head]} arguments, {len(args)} given", *_where(expr)
                    )
                return Pred(head, tuple(self._term(a, scope, lift) for a in args))

    def _term(self, expr: SExpr, scope: Scope, lift: bool) -> Term:
        name = _ident(expr, "term")
        if name in scope:
            return scope[name]
        if name in self.constants:
            return self.constants[name]
        if name in self.lifted:
            return self.lifted[name]
        if name in self.arities:
            raise ProblemFormatError(f"predicate {name} used as a term", *_where(expr))
        if not lift:
            raise SidUndeclaredError(f"free variable {name} in a rule body", *_where(expr))
        lifted = self.lifted[name] = const(self._fresh_constant(name))
        logger.info(f"Free variable {name!r} at {expr.line}:{expr.column} lifted to the constant {lifted}")
        return lifted

    def _fresh_constant(self, name: str) -> str:
        """name, or name_k when a rule-local name, predicate or constant already uses it"""
        taken = self.locals | set(self.arities) | set(self.constants) | {c.name for c in self.lifted.values()}
        fresh, k = name, 0
        while fresh in taken:
            k += 1
            fresh = f"{name}_{k}"
        return fresh


def parse_problem(text: str) -> Problem:
    """parse a .sid problem; free variables of sequents become fresh constants"""
    return _ProblemParser(text).parse()
