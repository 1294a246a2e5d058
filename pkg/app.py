"""
Coalgebraic Automata Kit
Command-line entry point

Every invocation prints one JSON run report on stdout; log messages go to
stderr. Exit codes: 0 success, 1 domain error, 2 cap exceeded or unstable
truncation.

Formula grammars
  one-step: bot | top | lift NAME(t, ...) | A sub B | empty(A) | disjoint(A, ...)
            | A = union(B, ...) | not F | F and F | F or F | F -> F
            | exists A . F | forall A . F | dual(F)      terms t: A | t '|' t | t & t
  mu:       p | not p | bot | top | lift NAME(F, ...) | F and F | F or F
            | mu x . F | nu x . F | [all] F | [some] F
  mso/mmso: bot | top | sr(p) | p sub q | p = q | em(p) | sing(p) | lift NAME(p, q, ...)
            | box(p, q) | not F | F and F | F or F | F -> F | exists p . F | forall p . F
"""

import argparse
import logging
import sys
import time

from dotenv import load_dotenv

from config.settings import get_config
from models.automaton import EXISTS
from models.errors import EXIT_CAP, EXIT_DOMAIN, EXIT_OK, CapExceeded, DomainError
from models.functor import label, sort_labels
from models.tmodel import OneStepModel
from services.construction_service import AutomataService
from services.game_service import MODES, build_acceptance_game, game_to_dot, solve_parity
from services.io_service import (
    automaton_to_json, dumps, model_to_json, read_automaton, read_model, sha256_of, spec_from_json, write_json
)
from services.lifting_service import builtin_liftings
from services.logic_service import eval_mso, eval_mu
from services.neighborhood_service import (
    counterexample_demo, eval_mmso, eval_mu_global, largest_nbhd_bisim, parse_mmso
)
from services.one_step_service import eval_one_step
from services.parser_service import parse_formula
from services.uniform_service import CONSTRUCTIONS, get_construction, translate_automaton, unravel
from startup import run_self_checks

logger = logging.getLogger(__name__)

LOGICS = ('mu', 'mu-global', 'mso', 'mmso', 'one-step')
OPERATIONS = ('union', 'complement', 'monotonize', 'project', 'simulate', 'compress')


class WarningCollector(logging.Handler):
    """Keeps the text of warnings for the run report"""

    def __init__(self):
        super().__init__(level=logging.WARNING)
        self.messages = []

    def emit(self, record):
        self.messages.append(record.getMessage())


class CliParser(argparse.ArgumentParser):
    """Usage errors exit like other domain errors"""

    def error(self, message):
        raise DomainError(f"usage: {message}")


class RunReport:
    """One structured document per invocation"""

    def __init__(self, subcommand, timings=False):
        self.subcommand = subcommand
        self.inputs = {}
        self.verdicts = {}
        self.warnings = []
        self.timings = {} if timings else None
        self.error = None

    def add_input(self, path):
        self.inputs[path] = sha256_of(path)

    def timed(self, name, func, *args, **kwargs):
        start = time.perf_counter()
        try:
            return func(*args, **kwargs)
        finally:
            if self.timings is not None:
                self.timings[name] = round(time.perf_counter() - start, 6)

    def to_dict(self):
        data = {
            'subcommand': self.subcommand,
            'inputs': self.inputs,
            'verdicts': self.verdicts,
            'warnings': self.warnings,
            'success': self.error is None
        }
        if self.timings is not None:
            data['timings'] = self.timings
        if self.error is not None:
            data['error'] = self.error
        return data


def _formula_text(args):
    if args.formula_file:
        with open(args.formula_file) as handle:
            return handle.read()
    if args.formula is None:
        raise DomainError("Give a formula with --formula or --formula-file")
    return args.formula


def _liftings(name):
    return builtin_liftings(spec_from_json(name))


def _unwrap(result):
    if not result['success']:
        raise (CapExceeded if result['exit_code'] == EXIT_CAP else DomainError)(result['error'])
    return result['automaton']


# Subcommands

def cmd_eval(args, report):
    report.add_input(args.model)
    model, _ = read_model(args.model)
    point = args.point
    text = _formula_text(args)
    liftings = builtin_liftings(model.spec)
    if args.logic == 'mmso':
        formula = parse_mmso(text)
        verdict = report.timed('eval', eval_mmso, formula, model, point)
    elif args.logic in ('mu', 'mu-global'):
        formula = parse_formula(text, 'mu')
        evaluate = eval_mu_global if args.logic == 'mu-global' else eval_mu
        verdict = report.timed('eval', evaluate, formula, model, point, liftings)
    elif args.logic == 'mso':
        formula = parse_formula(text, 'mso')
        verdict = report.timed('eval', eval_mso, formula, model, point, liftings)
    else:
        formula = parse_formula(text, 'one-step')
        if point not in model.carrier:
            raise DomainError(f"{point} is not a state of the model")
        window = OneStepModel(model.carrier, model.sigma[point], model.valuation)
        verdict = report.timed('eval', eval_one_step, formula, window, liftings)
    report.verdicts = {'logic': args.logic, 'point': point, 'holds': verdict}


def cmd_compile(args, report):
    service = AutomataService(_liftings(args.functor))
    formula = parse_formula(_formula_text(args), args.logic)
    automaton = _unwrap(report.timed('compile', service.compile, formula, args.logic))
    data = automaton_to_json(automaton)
    if args.output:
        write_json(args.output, data)
    report.verdicts = {'automaton': automaton.to_dict(), 'output': args.output}


def cmd_accept(args, report):
    report.add_input(args.automaton)
    report.add_input(args.model)
    automaton = read_automaton(args.automaton)
    model, tree = read_model(args.model)
    subject = tree if args.mode == 'tree' else model
    if subject is None:
        raise DomainError("Tree mode needs a model file with a root and a frame")
    game = report.timed('game', build_acceptance_game, automaton, subject, args.point, args.mode)
    result = report.timed('solve', solve_parity, game)
    if args.dump_game:
        with open(args.dump_game, 'w') as handle:
            handle.write(game_to_dot(game, result))
    report.verdicts = {
        'accepts': game.start in result.winning[EXISTS],
        'mode': args.mode,
        'positions': len(game),
        'dump_game': args.dump_game
    }


def cmd_construct(args, report):
    for path in args.automaton:
        report.add_input(path)
    automata = [read_automaton(path) for path in args.automaton]
    service = AutomataService(automata[0].liftings, get_config().caps())
    result = _unwrap(report.timed('construct', service.construct, args.operation, automata, args.var))
    summary = _unwrap(report.timed('materialize', service.describe, result))
    if args.output:
        write_json(args.output, automaton_to_json(result))
    report.verdicts = {'automaton': summary, 'output': args.output}


def cmd_translate(args, report):
    report.add_input(args.automaton)
    automaton = read_automaton(args.automaton)
    construction = get_construction(args.construction, automaton.liftings.spec, m=args.m, k=args.k)
    translated = translate_automaton(automaton, construction)
    report.verdicts = {'construction': construction.name, 'm': construction.m, 'k': construction.k}
    if args.model:
        report.add_input(args.model)
        model, _ = read_model(args.model)
        game = report.timed('game', build_acceptance_game, translated, model, args.point, 'full')
        result = report.timed('solve', solve_parity, game)
        report.verdicts['accepts'] = game.start in result.winning[EXISTS]
    report.verdicts['automaton'] = translated.to_dict()


def cmd_unravel(args, report):
    report.add_input(args.model)
    model, _ = read_model(args.model)
    construction = get_construction(args.construction, model.spec, m=args.m, k=args.k)
    unravelling = report.timed('unravel', unravel, model, args.point, construction, args.depth)
    if args.output:
        write_json(args.output, model_to_json(unravelling.tree.model, unravelling.tree))
    report.verdicts = {
        'nodes': len(unravelling.tree.carrier),
        'frontier': len(unravelling.frontier),
        'homomorphism_failures': [label(v) for v in unravelling.homomorphism_failures()],
        'image': sort_labels(unravelling.image()),
        'output': args.output
    }


def cmd_bisim(args, report):
    report.add_input(args.left)
    report.add_input(args.right)
    left, _ = read_model(args.left)
    right, _ = read_model(args.right)
    bisim = report.timed('bisim', largest_nbhd_bisim, left, right, args.is_global)
    report.verdicts = bisim.to_dict()


def cmd_demo(args, report):
    if args.name == 'counterexample':
        report.verdicts = report.timed('demo', counterexample_demo, k=args.k, m=args.m)
        if not report.verdicts['success']:
            raise DomainError("Counterexample replay did not confirm every step")


def cmd_selftest(args, report):
    outcome = report.timed('selftest', run_self_checks, args.level, args.seed, args.jobs, args.check)
    report.verdicts = outcome
    if not outcome['passed']:
        raise DomainError(f"Self-checks failed: {', '.join(n for n, c in outcome['checks'].items() if not c['passed'])}")


COMMANDS = {
    'eval': cmd_eval,
    'compile': cmd_compile,
    'accept': cmd_accept,
    'construct': cmd_construct,
    'translate': cmd_translate,
    'unravel': cmd_unravel,
    'bisim': cmd_bisim,
    'demo': cmd_demo,
    'selftest': cmd_selftest,
}


def build_parser():
    settings = get_config()
    parser = CliParser(
        prog='cak', description=__doc__, formatter_class=argparse.RawDescriptionHelpFormatter
    )
    parser.add_argument('--seed', type=int, default=settings.SEED)
    parser.add_argument('--jobs', type=int, default=settings.JOBS)
    parser.add_argument('--timings', action='store_true', help='include wall-clock timings in the report')
    parser.add_argument('--log-level', default=settings.LOG_LEVEL)
    commands = parser.add_subparsers(dest='command', required=True)

    def formula_options(sub):
        sub.add_argument('--formula')
        sub.add_argument('--formula-file')

    sub = commands.add_parser('eval', help='evaluate a formula at a point of a model')
    sub.add_argument('--logic', choices=LOGICS, default='mu')
    formula_options(sub)
    sub.add_argument('--model', required=True)
    sub.add_argument('--point', required=True)

    sub = commands.add_parser('compile', help='compile a formula into an automaton file')
    sub.add_argument('--logic', choices=('mu', 'mso'), default='mu')
    sub.add_argument('--functor', default='powerset')
    formula_options(sub)
    sub.add_argument('--output')

    sub = commands.add_parser('accept', help='decide acceptance through the parity game')
    sub.add_argument('--automaton', required=True)
    sub.add_argument('--model', required=True)
    sub.add_argument('--point', required=True)
    sub.add_argument('--mode', choices=MODES, default='tree')
    sub.add_argument('--dump-game')

    sub = commands.add_parser('construct', help='apply a closure construction')
    sub.add_argument('--operation', choices=OPERATIONS, required=True)
    sub.add_argument('--automaton', nargs='+', required=True)
    sub.add_argument('--var')
    sub.add_argument('--output')

    sub = commands.add_parser('translate', help='replace transitions by their star liftings')
    sub.add_argument('--automaton', required=True)
    sub.add_argument('--construction', choices=sorted(CONSTRUCTIONS), required=True)
    sub.add_argument('--m', type=int, default=settings.DEFAULT_TRUNCATION)
    sub.add_argument('--k', type=int, default=settings.DEFAULT_DEPTH_K)
    sub.add_argument('--model')
    sub.add_argument('--point')

    sub = commands.add_parser('unravel', help='unravel a pointed model along a construction')
    sub.add_argument('--model', required=True)
    sub.add_argument('--point', required=True)
    sub.add_argument('--construction', choices=sorted(CONSTRUCTIONS), required=True)
    sub.add_argument('--depth', type=int, default=settings.UNRAVEL_DEPTH)
    sub.add_argument('--m', type=int, default=settings.DEFAULT_TRUNCATION)
    sub.add_argument('--k', type=int, default=settings.DEFAULT_DEPTH_K)
    sub.add_argument('--output')

    sub = commands.add_parser('bisim', help='largest neighbourhood bisimulation between two models')
    sub.add_argument('--left', required=True)
    sub.add_argument('--right', required=True)
    sub.add_argument('--global', dest='is_global', action='store_true')

    sub = commands.add_parser('demo', help='replay a worked example')
    sub.add_argument('name', choices=('counterexample',))
    sub.add_argument('--m', type=int, default=settings.DEFAULT_TRUNCATION)
    sub.add_argument('--k', type=int, default=settings.DEFAULT_DEPTH_K)

    sub = commands.add_parser('selftest', help='run the self-check suite')
    sub.add_argument('--level', choices=('quick', 'full'), default='quick')
    sub.add_argument('--check', action='append')

    return parser


def dispatch(argv=None):
    """Run one subcommand; returns (exit code, report dict)"""
    collector = WarningCollector()
    logging.getLogger().addHandler(collector)
    report = RunReport(None)
    code = EXIT_OK
    try:
        args = build_parser().parse_args(argv)
        logging.getLogger().setLevel(args.log_level.upper())
        report = RunReport(args.command, timings=args.timings)
        COMMANDS[args.command](args, report)
    except CapExceeded as e:
        logger.error(f"Cap exceeded in {report.subcommand}: {str(e)}")
        report.error = f"cap: {str(e)}"
        code = EXIT_CAP
    except DomainError as e:
        logger.error(f"Error in {report.subcommand}: {str(e)}")
        report.error = f"domain: {str(e)}"
        code = EXIT_DOMAIN
    finally:
        logging.getLogger().removeHandler(collector)
    report.warnings = collector.messages
    return code, report.to_dict()


def main(argv=None):
    load_dotenv()
    logging.basicConfig(
        level=get_config().LOG_LEVEL.upper(),
        format='%(asctime)s - %(levelname)s - %(message)s',
        stream=sys.stderr
    )
    code, report = dispatch(argv)
    print(dumps(report))
    return code


if __name__ == '__main__':
    sys.exit(main())
