"""
Automaton Constructions and Formula Compilers
"""

import logging
from dataclasses import dataclass

from config.settings import current_caps
from models import logic as L
from models.automaton import Automaton, MacroState, all_colors, state_vars
from models.errors import CapExceeded, DomainError, exit_code_for
from models.functor import label, sort_labels
from models.lifting import LiftingSet
from models.one_step import (
    And, Bot, Disjoint, Forall, FreshVar, Lift, Or, Sub, Top, UnionEq, Var,
    all_vars, conjunction, exists_block, fresh_vars, rename_free
)
from services.functor_service import subsets
from services.logic_service import binders, expand_mso, guarded_form
from services.one_step_service import dual_formula, is_special_basic_bruteforce
from services.parser_service import print_mu
from services.trace_service import bad_trace_automaton

logger = logging.getLogger(__name__)

UNION_INIT = 'init'


def _derive(automaton, **changes):
    """New lazy automaton sharing everything with `automaton` except `changes`"""
    settings = {
        'initial': automaton.initial,
        'chromatic': automaton.chromatic,
        'flavor': automaton.flavor,
        'liftings': automaton.liftings,
        'transition_fn': automaton.transition,
        'priority_fn': automaton.priority,
        'special_basic': automaton.special_basic,
        'monotone': automaton.monotone,
        'name': automaton.name,
        'max_states': automaton.max_states
    }
    settings.update(changes)
    return Automaton(**settings)


def _tag(formula, tag):
    return rename_free(formula, {a: (tag, a) for a in state_vars(formula)})


def _or(left, right):
    if isinstance(left, Top) or isinstance(right, Top):
        return Top()
    if isinstance(left, Bot):
        return right
    if isinstance(right, Bot):
        return left
    return Or(left, right)


def _and(left, right):
    if isinstance(left, Bot) or isinstance(right, Bot):
        return Bot()
    if isinstance(left, Top):
        return right
    if isinstance(right, Top):
        return left
    return And(left, right)


def merge_liftings(first, second):
    """Liftings of both sets; a name bound to different liftings is an error"""
    if first is second:
        return first
    if first.spec != second.spec:
        raise DomainError(f"Automata over different functors: {first.spec.name} and {second.spec.name}")
    merged = LiftingSet(first.spec, factory=first.factory or second.factory)
    for source in (first, second):
        for name, lifting in source.liftings.items():
            known = merged.liftings.get(name)
            if known is not None and known is not lifting and known.table != lifting.table:
                raise DomainError(f"Lifting {name} means different things in the two automata")
            merged.liftings[name] = lifting
        merged.dual_names.update(source.dual_names)
    return merged


# Closure constructions

def with_chromatic(automaton, extra):
    """The same automaton read over a larger set of chromatic variables"""
    return _derive(automaton, chromatic=automaton.chromatic | frozenset(extra))


def compress_priorities(automaton):
    """Renumber priorities densely from 0 or 1, keeping order and parity"""
    used = sorted({automaton.priority(a) for a in automaton.states})
    mapping = {}
    current = None
    for p in used:
        if current is None:
            current = p % 2
        elif p % 2 != current % 2:
            current += 1
        mapping[p] = current
    compressed = _derive(automaton, priority_fn=lambda a: mapping[automaton.priority(a)])
    compressed._states = automaton.states
    return compressed


def materialize(automaton):
    """Explicit-table copy over the reachable states"""
    states = automaton.states
    delta = {a: {c: automaton.transition(a, c) for c in automaton.colors()} for a in states}
    priority = {a: automaton.priority(a) for a in states}
    return Automaton.from_table(
        states, automaton.initial, priority, automaton.chromatic, automaton.flavor,
        automaton.liftings, delta, special_basic=automaton.special_basic,
        monotone=automaton.monotone, name=automaton.name
    )


def union_aut(first, second):
    """Automaton accepting what either automaton accepts"""
    liftings = merge_liftings(first.liftings, second.liftings)
    parts = {1: first, 2: second}

    def transition(state, color):
        if state == UNION_INIT:
            return _or(_tag(first.transition(first.initial, color), 1),
                       _tag(second.transition(second.initial, color), 2))
        tag, inner = state
        return _tag(parts[tag].transition(inner, color), tag)

    def priority(state):
        if state == UNION_INIT:
            return 0
        tag, inner = state
        return parts[tag].priority(inner)

    return Automaton(
        initial=UNION_INIT,
        chromatic=first.chromatic | second.chromatic,
        flavor='ml1' if first.is_ml and second.is_ml else 'so1',
        liftings=liftings,
        transition_fn=transition,
        priority_fn=priority,
        special_basic=first.special_basic and second.special_basic,
        monotone=first.monotone and second.monotone,
        name=f'or({first.name},{second.name})'
    )


def monotonize(automaton):
    """Replace every transition by: some subsets of the chosen successor sets satisfy it"""
    if automaton.is_ml:
        return _derive(automaton, monotone=True)

    def transition(state, color):
        formula = automaton.transition(state, color)
        targets = sort_labels(state_vars(formula))
        if not targets:
            return formula
        shadows = fresh_vars(all_vars(formula), len(targets))
        body = rename_free(formula, dict(zip(targets, shadows)))
        bounds = [Sub(z, a) for z, a in zip(shadows, targets)]
        return exists_block(shadows, conjunction(bounds + [body]))

    return _derive(automaton, transition_fn=transition, monotone=True, name=f'mon({automaton.name})')


def complement_aut(automaton):
    """Dual transitions with priorities shifted by one"""
    if not automaton.monotone:
        raise DomainError(f"Automaton {automaton.name} is not monotone; monotonize it before complementing")
    return _derive(
        automaton,
        transition_fn=lambda a, c: dual_formula(automaton.transition(a, c), automaton.liftings),
        priority_fn=lambda a: automaton.priority(a) + 1,
        special_basic=False,
        name=f'not({automaton.name})'
    )


def project_aut(automaton, var):
    """Existential projection of a chromatic variable"""
    if var not in automaton.chromatic:
        raise DomainError(f"{var} is not a chromatic variable of {automaton.name}")
    if not automaton.special_basic:
        logger.warning(f"Projecting {var} out of {automaton.name}, which is not special basic; "
                       "the result may accept models the projection does not describe")

    def transition(state, color):
        return _or(automaton.transition(state, color), automaton.transition(state, color | {var}))

    return _derive(
        automaton,
        chromatic=automaton.chromatic - {var},
        transition_fn=transition,
        name=f'exists {var}.{automaton.name}'
    )


def simulate(automaton, caps=None):
    """
    Special basic automaton equivalent to a monotone automaton on trees.

    States pair a macro-state (a relation recording which automaton state
    moved to which) with the state of a deterministic detector of bad traces
    through the stream of macro-states seen so far.
    """
    caps = caps or current_caps()
    if not automaton.monotone:
        raise DomainError(f"Automaton {automaton.name} is not monotone; simulation needs a monotone automaton")
    states = automaton.states
    detector = bad_trace_automaton(automaton.priority, automaton.max_priority(), len(states))

    def transition(state, color):
        macro, tracker = state
        after = detector.step(tracker, macro.pairs)
        sources = sort_labels(macro.range)
        pairs = sort_labels({(b, a) for b in sources for a in state_vars(automaton.transition(b, color))})
        if len(pairs) > caps.support:
            raise CapExceeded(f"{len(pairs)} state pairs exceed the support cap {caps.support} during simulation")
        targets = {MacroState(s): (MacroState(s), after) for s in subsets(pairs) if s}
        parts = [Disjoint(tuple(targets.values()))]
        for b in sources:
            formula = automaton.transition(b, color)
            successors = sort_labels(state_vars(formula))
            shadows = fresh_vars(all_vars(formula), len(successors))
            body = rename_free(formula, dict(zip(successors, shadows)))
            links = [UnionEq(z, tuple(target for m, target in targets.items() if (b, a) in m.pairs))
                     for z, a in zip(shadows, successors)]
            parts.append(exists_block(shadows, conjunction(links + [body])))
        return conjunction(parts)

    initial = (MacroState(frozenset([(automaton.initial, automaton.initial)])), detector.initial)
    logger.debug(f"Simulating {automaton.name} with {len(states)} states")
    return Automaton(
        initial=initial,
        chromatic=automaton.chromatic,
        flavor='so1',
        liftings=automaton.liftings,
        transition_fn=transition,
        priority_fn=lambda state: detector.priority(state[1]),
        special_basic=True,
        monotone=False,
        name=f'sim({automaton.name})',
        max_states=automaton.max_states
    )


def _conjuncts(formula):
    if isinstance(formula, And):
        return _conjuncts(formula.left) + _conjuncts(formula.right)
    return [formula]


def guarded_by_disjoint(formula):
    """True when a top-level conjunct already makes every free variable pairwise disjoint"""
    return any(isinstance(part, Disjoint) and formula.free_vars <= frozenset(part.vars)
               for part in _conjuncts(formula))


def special_basic_violations(automaton, spec, carrier_cap=2, caps=None):
    """
    Every (state, color) whose transition is not special basic, with a
    counter-model. Transitions guarded by a covering Disjoint conjunct are
    accepted without search; the rest go through the brute-force check.
    """
    caps = caps or current_caps()
    violations = []
    for state in automaton.states:
        for color in automaton.colors():
            formula = automaton.transition(state, color)
            if guarded_by_disjoint(formula):
                continue
            ok, witness = is_special_basic_bruteforce(formula, spec, automaton.liftings, carrier_cap, caps=caps)
            if not ok:
                violations.append({'state': label(state), 'color': label(color), 'witness': witness})
    logger.debug(f"{len(violations)} non special basic transitions in {automaton.name}")
    return violations


# Compilers

@dataclass(frozen=True)
class MuState:
    """Subformula reached through a modal step, with the largest regeneration priority on the way"""
    formula: object
    mark: int

    @property
    def label(self):
        return f'{print_mu(self.formula)} @{self.mark}'


def compile_mu(formula, liftings, name='mu'):
    """Modal one-step parity automaton equivalent to a mu-calculus formula"""
    if any(isinstance(n, L.MuGlobal) for n in L.mu_subformulas(formula)):
        raise DomainError("Global modalities are not compiled; translate them with globalize first")
    if L.fixpoint_violations(formula):
        raise DomainError("A bound variable occurs negated inside its fixpoint")
    guarded = guarded_form(formula)
    bound = binders(guarded)
    rank = {var: 2 * node.size + (1 if node.is_least else 0) for var, node in bound.items()}

    def inline(node, color, mark):
        if isinstance(node, L.MuVar):
            if node.name in bound:
                return inline(bound[node.name].body, color, max(mark, rank[node.name]))
            return Top() if node.name in color else Bot()
        if isinstance(node, L.MuNegVar):
            return Bot() if node.name in color else Top()
        if isinstance(node, L.MuBot):
            return Bot()
        if isinstance(node, L.MuTop):
            return Top()
        if isinstance(node, L.MuOr):
            return _or(inline(node.left, color, mark), inline(node.right, color, mark))
        if isinstance(node, L.MuAnd):
            return _and(inline(node.left, color, mark), inline(node.right, color, mark))
        if isinstance(node, L.MuFix):
            return inline(node.body, color, mark)
        if isinstance(node, L.MuModal):
            liftings.resolve(node.name)
            return Lift(node.name, tuple(Var(MuState(arg, mark)) for arg in node.args))
        raise DomainError(f"Unknown mu-calculus node {type(node).__name__}")

    automaton = Automaton(
        initial=MuState(guarded, 0),
        chromatic=guarded.free_vars,
        flavor='ml1',
        liftings=liftings,
        transition_fn=lambda state, color: inline(state.formula, color, 0),
        priority_fn=lambda state: state.mark,
        monotone=True,
        name=name
    )
    return compress_priorities(automaton)


def _everything(state):
    """The state covers the whole one-step carrier"""
    z = FreshVar(0)
    return Forall(z, Sub(z, state))


def _atom(states, chromatic, rule, liftings, name, special_basic=True):
    chromatic = frozenset(chromatic)
    delta = {a: {c: rule(a, c) for c in all_colors(chromatic)} for a in states}
    return Automaton.from_table(
        states, states[0], {a: 0 for a in states}, chromatic, 'so1', liftings, delta,
        special_basic=special_basic, monotone=True, name=name
    )


def _compile_mso(node, liftings):
    if isinstance(node, L.MsoBot):
        return _atom(['dead'], (), lambda a, c: Bot(), liftings, 'false')
    if isinstance(node, L.Incl):
        p, q = node.left, node.right

        def rule(a, c):
            return Bot() if p in c and q not in c else _everything('all')
        return _atom(['all'], {p, q}, rule, liftings, f'{p}<={q}')
    if isinstance(node, L.Sr):
        p = node.var

        def rule(a, c):
            if (a == 'root') != (p in c):
                return Bot()
            return _everything('rest')
        return _atom(['root', 'rest'], {p}, rule, liftings, f'sr({p})')
    if isinstance(node, L.MsoLift):
        liftings.resolve(node.name)
        witnesses = list(dict.fromkeys(node.args))
        holds = Lift(node.name, tuple(Var(('has', q)) for q in node.args))

        def rule(a, c):
            if a == 'scan':
                scan = _everything('scan')
                return And(scan, holds) if node.point in c else scan
            return Top() if a[1] in c else Bot()
        states = ['scan'] + [('has', q) for q in witnesses]
        return _atom(states, {node.point, *witnesses}, rule, liftings, f'{node.name}({node.point})',
                     special_basic=False)
    if isinstance(node, L.MsoOr):
        return union_aut(_compile_mso(node.left, liftings), _compile_mso(node.right, liftings))
    if isinstance(node, L.MsoNot):
        return complement_aut(monotonize(_compile_mso(node.body, liftings)))
    if isinstance(node, L.MsoExists):
        body = with_chromatic(_compile_mso(node.body, liftings), {node.var})
        return project_aut(simulate(monotonize(body)), node.var)
    raise DomainError(f"MSO node {type(node).__name__} has no automaton")


def compile_mso(formula, liftings, name='mso'):
    """Second-order one-step parity automaton equivalent to an MSO formula on trees"""
    automaton = _compile_mso(expand_mso(formula), liftings)
    automaton.name = name
    return compress_priorities(automaton)


class AutomataService:
    """Compiles formulas into automata and applies closure constructions"""

    def __init__(self, liftings, caps=None):
        self.liftings = liftings
        self.caps = caps or current_caps()

    def compile(self, formula, flavor):
        """Automaton for a parsed formula of flavor `mu` or `mso`"""
        try:
            if flavor == 'mu':
                automaton = compile_mu(formula, self.liftings)
            elif flavor == 'mso':
                automaton = compile_mso(formula, self.liftings)
            else:
                raise DomainError(f"Cannot compile formulas of flavor {flavor}")
            logger.info(f"Compiled {flavor} formula into automaton {automaton.name}")
            return {'success': True, 'automaton': automaton}
        except (DomainError, CapExceeded) as e:
            logger.error(f"Error compiling {flavor} formula: {str(e)}")
            return {'success': False, 'error': str(e), 'exit_code': exit_code_for(e)}

    def construct(self, operation, automata, var=None):
        """Apply `operation` to one automaton (two for union)"""
        try:
            if operation == 'union':
                first, second = automata
                result = union_aut(first, second)
            elif operation == 'complement':
                result = complement_aut(automata[0])
            elif operation == 'monotonize':
                result = monotonize(automata[0])
            elif operation == 'project':
                if var is None:
                    raise DomainError("Projection needs a variable")
                result = project_aut(automata[0], var)
            elif operation == 'simulate':
                result = simulate(automata[0], self.caps)
            elif operation == 'compress':
                result = compress_priorities(automata[0])
            else:
                raise DomainError(f"Unknown construction: {operation}")
            logger.info(f"Built {result.name} from {', '.join(a.name for a in automata)}")
            return {'success': True, 'automaton': result}
        except (DomainError, CapExceeded) as e:
            logger.error(f"Error in construction {operation}: {str(e)}")
            return {'success': False, 'error': str(e), 'exit_code': exit_code_for(e)}

    def describe(self, automaton):
        """Summary of an automaton with its materialised states"""
        try:
            summary = automaton.to_dict()
            summary['priorities'] = {label(a): automaton.priority(a) for a in automaton.states}
            return {'success': True, 'automaton': summary}
        except CapExceeded as e:
            logger.error(f"Error describing automaton {automaton.name}: {str(e)}")
            return {'success': False, 'error': str(e), 'exit_code': exit_code_for(e)}
