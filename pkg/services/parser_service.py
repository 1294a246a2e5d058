"""
Formula text syntax: Lark grammars, tree builders and printers

One-step formulas
    bot | top | lift NAME(t, ...) | A sub B | empty(A) | disjoint(A, B, ...)
    | A = union(B, ...) | not F | F and F | F or F | F -> F
    | exists A . F | forall A . F | dual(F)
  lattice terms t use `|` (join) and `&` (meet).

Mu-calculus
    p | not p | bot | top | lift NAME(F, ...) | F and F | F or F
    | mu p . F | nu p . F | [all] F | [some] F

MSO
    bot | top | sr(p) | p sub q | p = q | em(p) | sing(p) | lift NAME(p, q, ...)
    | box(p, q) | not F | F and F | F or F | F -> F | exists p . F | forall p . F

Binders and `->` reach as far right as possible.  The LALR tables resolve the
dangling-body conflicts as shifts, which gives exactly that reading.
"""

import re
import logging

from lark import Lark, Transformer, v_args
from lark.exceptions import UnexpectedCharacters, UnexpectedInput, UnexpectedToken

from models.errors import FormulaSyntaxError
from models.functor import label
from models import logic as L
from models import one_step as O

logger = logging.getLogger(__name__)

FRESH = re.compile(r'^_z(\d+)$')

LEXICON = r"""
NAME: /[A-Za-z_][A-Za-z0-9_]*/

%import common.WS
%ignore WS
"""

CONNECTIVES = r"""
?start: formula

?formula: disjunction
        | disjunction "->" formula                       -> implies

?disjunction: conjunction
            | disjunction "or" conjunction               -> or_

?conjunction: unary
            | conjunction "and" unary                    -> and_

?unary: "not" unary                                      -> not_
      | "exists" var "." formula                         -> exists
      | "forall" var "." formula                         -> forall
      | atom

var: NAME
"""

ONE_STEP_GRAMMAR = CONNECTIVES + r"""
?atom: "bot"                                             -> bot
     | "top"                                             -> top
     | "(" formula ")"
     | "dual" "(" formula ")"                            -> dual
     | "lift" lift_name "(" (term ("," term)*)? ")"      -> lift
     | "empty" "(" var ")"                               -> empty
     | "disjoint" "(" var ("," var)* ")"                 -> disjoint
     | var "sub" var                                     -> sub
     | var "=" "union" "(" (var ("," var)*)? ")"         -> union_eq

?term: meet
     | term "|" meet                                     -> join

?meet: term_atom
     | meet "&" term_atom                                -> meet_

?term_atom: "(" term ")"
          | var                                          -> term_var

lift_name: NAME ("." NAME)*
""" + LEXICON

MSO_GRAMMAR = CONNECTIVES + r"""
?atom: "bot"                                             -> bot
     | "top"                                             -> top
     | "(" formula ")"
     | "sr" "(" var ")"                                  -> sr
     | "em" "(" var ")"                                  -> em
     | "sing" "(" var ")"                                -> sing
     | BOX "(" var "," var ")"                           -> nbhd_box
     | "lift" lift_name "(" var ("," var)* ")"           -> lift
     | var "sub" var                                     -> incl
     | var "=" var                                       -> eq

lift_name: (NAME | BOX) ("." (NAME | BOX))*

BOX: "box"
""" + LEXICON

MU_GRAMMAR = r"""
?start: disjunction

?disjunction: conjunction
            | disjunction "or" conjunction               -> or_

?conjunction: unary
            | conjunction "and" unary                    -> and_

?unary: "not" NAME                                       -> neg_var
      | "bot"                                            -> bot
      | "top"                                            -> top
      | "mu" NAME "." disjunction                        -> least
      | "nu" NAME "." disjunction                        -> greatest
      | "[" "all" "]" unary                              -> always
      | "[" "some" "]" unary                             -> somewhere
      | "lift" lift_name "(" (disjunction ("," disjunction)*)? ")"  -> modal
      | "(" disjunction ")"
      | NAME                                             -> var

lift_name: NAME ("." NAME)*
""" + LEXICON


@v_args(inline=True)
class OneStepBuilder(Transformer):
    """Builds one-step formula nodes; `_zN` names become fresh variables"""

    def lift_name(self, *parts):
        return '.'.join(parts)

    def var(self, name):
        match = FRESH.match(name)
        return O.FreshVar(int(match.group(1))) if match else str(name)

    def implies(self, left, right):
        return O.implies(left, right)

    def or_(self, left, right):
        return O.Or(left, right)

    def and_(self, left, right):
        return O.And(left, right)

    def not_(self, body):
        return O.Not(body)

    def exists(self, var, body):
        return O.Exists(var, body)

    def forall(self, var, body):
        return O.Forall(var, body)

    def bot(self):
        return O.Bot()

    def top(self):
        return O.Top()

    def dual(self, body):
        return O.Dual(body)

    def lift(self, name, *args):
        return O.Lift(name, args)

    def empty(self, var):
        return O.Empty(var)

    def disjoint(self, *names):
        return O.Disjoint(names)

    def sub(self, left, right):
        return O.Sub(left, right)

    def union_eq(self, var, *parts):
        return O.UnionEq(var, parts)

    def join(self, left, right):
        return O.Join(left, right)

    def meet_(self, left, right):
        return O.Meet(left, right)

    def term_var(self, var):
        return O.Var(var)


@v_args(inline=True)
class MsoBuilder(Transformer):

    def lift_name(self, *parts):
        return '.'.join(parts)

    def var(self, name):
        return str(name)

    def implies(self, left, right):
        return L.mso_implies(left, right)

    def or_(self, left, right):
        return L.MsoOr(left, right)

    def and_(self, left, right):
        return L.MsoAnd(left, right)

    def not_(self, body):
        return L.MsoNot(body)

    def exists(self, var, body):
        return L.MsoExists(var, body)

    def forall(self, var, body):
        return L.MsoForall(var, body)

    def bot(self):
        return L.MsoBot()

    def top(self):
        return L.MsoTop()

    def sr(self, var):
        return L.Sr(var)

    def em(self, var):
        return L.MsoEm(var)

    def sing(self, var):
        return L.MsoSing(var)

    def nbhd_box(self, _keyword, point, target):
        return L.NbhdBox(point, target)

    def lift(self, name, point, *args):
        return L.MsoLift(name, point, args)

    def incl(self, left, right):
        return L.Incl(left, right)

    def eq(self, left, right):
        return L.MsoEq(left, right)


@v_args(inline=True)
class MuBuilder(Transformer):

    def lift_name(self, *parts):
        return '.'.join(parts)

    def var(self, name):
        return L.MuVar(str(name))

    def neg_var(self, name):
        return L.MuNegVar(str(name))

    def or_(self, left, right):
        return L.MuOr(left, right)

    def and_(self, left, right):
        return L.MuAnd(left, right)

    def bot(self):
        return L.MuBot()

    def top(self):
        return L.MuTop()

    def least(self, var, body):
        return L.MuFix('mu', str(var), body)

    def greatest(self, var, body):
        return L.MuFix('nu', str(var), body)

    def always(self, body):
        return L.MuGlobal('all', body)

    def somewhere(self, body):
        return L.MuGlobal('some', body)

    def modal(self, name, *args):
        return L.MuModal(name, args)


ONE_STEP_PARSER = Lark(ONE_STEP_GRAMMAR, parser='lalr', lexer='basic')
MU_PARSER = Lark(MU_GRAMMAR, parser='lalr', lexer='basic')
MSO_PARSER = Lark(MSO_GRAMMAR, parser='lalr', lexer='basic')


def _end_position(text):
    line = text.count('\n') + 1
    return line, len(text) - (text.rfind('\n') + 1) + 1


def syntax_error(error, text):
    """Positioned FormulaSyntaxError for a Lark parse failure"""
    line, column = getattr(error, 'line', -1), getattr(error, 'column', -1)
    if isinstance(error, UnexpectedCharacters):
        message = f"Unexpected character '{error.char}'"
    elif isinstance(error, UnexpectedToken) and error.token.type != '$END':
        message = f"Unexpected '{error.token}'"
    else:
        message = 'Unexpected end of input'
        line, column = _end_position(text)
    if not line or line < 1:
        line, column = _end_position(text)
    return FormulaSyntaxError(message, line, column)


def _parse(parser, builder, text):
    try:
        tree = parser.parse(text)
    except UnexpectedInput as e:
        error = syntax_error(e, text)
        logger.debug(f"Rejected formula text: {error}")
        raise error from None
    return builder.transform(tree)


def parse_one_step(text):
    return _parse(ONE_STEP_PARSER, OneStepBuilder(), text)


def parse_mu(text):
    return _parse(MU_PARSER, MuBuilder(), text)


def parse_mso(text):
    return _parse(MSO_PARSER, MsoBuilder(), text)


PARSERS = {'one-step': parse_one_step, 'mu': parse_mu, 'mso': parse_mso}


def parse_formula(text, flavor):
    """Parse formula text of the given flavor ('mu', 'mso' or 'one-step')"""
    if flavor not in PARSERS:
        raise ValueError(f"Unknown formula flavor: {flavor}")
    return PARSERS[flavor](text)


# Printers

def print_term(term, names=label):
    if isinstance(term, O.Var):
        return names(term.name)
    symbol = '|' if isinstance(term, O.Join) else '&'
    return f'({print_term(term.left, names)} {symbol} {print_term(term.right, names)})'


def print_one_step(node, names=label):
    """Text of a one-step formula; `names` renders variables"""
    def p(inner):
        return print_one_step(inner, names)

    if isinstance(node, O.Bot):
        return 'bot'
    if isinstance(node, O.Top):
        return 'top'
    if isinstance(node, O.Lift):
        return f"lift {node.name}({', '.join(print_term(t, names) for t in node.args)})"
    if isinstance(node, O.Sub):
        return f'{names(node.left)} sub {names(node.right)}'
    if isinstance(node, O.Or):
        return f'({p(node.left)} or {p(node.right)})'
    if isinstance(node, O.And):
        return f'({p(node.left)} and {p(node.right)})'
    if isinstance(node, O.Not):
        return f'not {p(node.body)}'
    if isinstance(node, O.Exists):
        return f'(exists {names(node.var)} . {p(node.body)})'
    if isinstance(node, O.Forall):
        return f'(forall {names(node.var)} . {p(node.body)})'
    if isinstance(node, O.Dual):
        return f'dual({p(node.body)})'
    if isinstance(node, O.Empty):
        return f'empty({names(node.var)})'
    if isinstance(node, O.Disjoint):
        return f"disjoint({', '.join(names(v) for v in node.vars)})"
    if isinstance(node, O.UnionEq):
        return f"{names(node.var)} = union({', '.join(names(v) for v in node.parts)})"
    raise TypeError(f"Unknown one-step node {type(node).__name__}")


def print_mu(node):
    if isinstance(node, L.MuVar):
        return node.name
    if isinstance(node, L.MuNegVar):
        return f'not {node.name}'
    if isinstance(node, L.MuBot):
        return 'bot'
    if isinstance(node, L.MuTop):
        return 'top'
    if isinstance(node, L.MuModal):
        return f"lift {node.name}({', '.join(print_mu(a) for a in node.args)})"
    if isinstance(node, L.MuOr):
        return f'({print_mu(node.left)} or {print_mu(node.right)})'
    if isinstance(node, L.MuAnd):
        return f'({print_mu(node.left)} and {print_mu(node.right)})'
    if isinstance(node, L.MuFix):
        return f'({node.kind} {node.var} . {print_mu(node.body)})'
    if isinstance(node, L.MuGlobal):
        return f'[{node.kind}] {print_mu(node.body)}'
    raise TypeError(f"Unknown mu-calculus node {type(node).__name__}")


def print_mso(node):
    if isinstance(node, L.MsoBot):
        return 'bot'
    if isinstance(node, L.MsoTop):
        return 'top'
    if isinstance(node, L.Sr):
        return f'sr({node.var})'
    if isinstance(node, L.Incl):
        return f'{node.left} sub {node.right}'
    if isinstance(node, L.MsoEq):
        return f'{node.left} = {node.right}'
    if isinstance(node, L.MsoEm):
        return f'em({node.var})'
    if isinstance(node, L.MsoSing):
        return f'sing({node.var})'
    if isinstance(node, L.NbhdBox):
        return f'box({node.point}, {node.target})'
    if isinstance(node, L.MsoLift):
        return f"lift {node.name}({', '.join((node.point,) + tuple(node.args))})"
    if isinstance(node, L.MsoOr):
        return f'({print_mso(node.left)} or {print_mso(node.right)})'
    if isinstance(node, L.MsoAnd):
        return f'({print_mso(node.left)} and {print_mso(node.right)})'
    if isinstance(node, L.MsoNot):
        return f'not {print_mso(node.body)}'
    if isinstance(node, L.MsoExists):
        return f'(exists {node.var} . {print_mso(node.body)})'
    if isinstance(node, L.MsoForall):
        return f'(forall {node.var} . {print_mso(node.body)})'
    raise TypeError(f"Unknown MSO node {type(node).__name__}")

