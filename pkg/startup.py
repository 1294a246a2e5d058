#!/usr/bin/env python3
"""
Coalgebraic Automata Kit
Self-Check Script

Each check cross-validates one pipeline against an independent oracle on
enumerated or seeded samples and returns a result dict with `passed`.
"""

import sys
import logging
from datetime import datetime

import numpy as np
from joblib import Parallel, delayed

from config.settings import current_caps, get_config
from generate_sample_data import (
    BAG_AUTOMATA, MMSO_CORPUS, MSO_CORPUS, MU_CORPUS, SO_AUTOMATA, enumerate_models, enumerate_powerset_trees,
    lasso_words, random_acyclic_model, random_game, random_lasso, random_relation, random_tree_model
)
from models.errors import CapExceeded
from models.functor import BAG, MON, MONSTAR, POWERSET, Coproduct, Const, Exp, Id, Product, label
from models.tmodel import TreeModel
from services.construction_service import (
    compile_mso, compile_mu, complement_aut, monotonize, project_aut, simulate, special_basic_violations, union_aut,
    with_chromatic
)
from services.functor_service import apply_map, enumerate_tobjects, random_map, random_tobject, subsets
from services.game_service import accepts, solve_parity, solve_parity_bruteforce, strategy_is_sound
from services.io_service import automaton_from_json
from services.lifting_service import builtin_liftings
from services.logic_service import eval_mso, eval_mu, mu_to_mso
from services.neighborhood_service import (
    atomic_profile, counterexample_demo, eval_mmso, mmso_to_mso, models_match, pointed_star
)
from services.parser_service import parse_mso, parse_mu
from services.trace_service import bad_trace_automaton, lasso_has_bad_trace
from services.uniform_service import (
    BagConstruction, MonStarConstruction, PolynomialConstruction, PowersetConstruction, check_adequacy,
    translate_automaton, unravel
)

logger = logging.getLogger(__name__)

LEVELS = {
    'quick': {'mu_size': 2, 'mon_size': 2, 'mso_nodes': 4, 'samples': 10, 'lasso_length': 3, 'lasso_random': 50,
              'star_size': 2, 'games': 50, 'cross_size': 2, 'sim_nodes': 5},
    'full': {'mso_nodes': 5, 'samples': 30, 'lasso_length': 4, 'lasso_random': 500,
             'star_size': 3, 'games': 200, 'cross_size': 3, 'sim_nodes': 6},
}


def level_settings(level):
    """Budgets of a self-check level; the full level takes its model corpus sizes from the configuration"""
    if level not in LEVELS:
        raise ValueError(f"Unknown self-check level: {level}")
    settings = dict(LEVELS[level])
    if level == 'full':
        cfg = get_config()
        settings.update(mu_size=cfg.MU_MODEL_SIZE, mon_size=cfg.MON_MODEL_SIZE)
    return settings


POLYNOMIAL_SPECS = [
    Product(Id(), Const(frozenset({'0', '1'}))),
    Coproduct((Const(frozenset({'stop'})), Product(Id(), Id()))),
    Exp(Id(), frozenset({'l', 'r'})),
]

# (automaton source, variable projected out)
PROJECTION_CORPUS = [
    (('mso', 'p sub q and not q sub p'), 'q'),
    (('mso', 'exists x . sr(x) and x sub q and lift dia(x, p)'), 'q'),
    (('mu', 'nu x . lift dia(top) and lift box(x)'), 'q'),
    (('so', SO_AUTOMATA[0]), 'p'),
    (('so', SO_AUTOMATA[1]), 'p'),
]


def _result(passed, **details):
    return {'passed': passed, **details}


# Per-sample workers

def _mu_formula_mismatches(text, spec, models):
    formula = parse_mu(text)
    liftings = builtin_liftings(spec)
    automaton = compile_mu(formula, liftings)
    mismatches = 0
    for model in models:
        for point in model.carrier:
            if accepts(automaton, model, point, mode='full') != eval_mu(formula, model, point, liftings):
                mismatches += 1
    return mismatches


def model_corpus(spec, max_size):
    """Every model with one to `max_size` states, built once and shared by all formulas"""
    return [model for size in range(1, max_size + 1) for model in enumerate_models(spec, size)]


def _mso_formula_mismatches(text, trees):
    formula = parse_mso(text)
    liftings = builtin_liftings(POWERSET)
    automaton = compile_mso(formula, liftings)
    mismatches = 0
    for tree in trees:
        if accepts(automaton, tree, tree.root) != eval_mso(formula, tree.model, tree.root, liftings):
            mismatches += 1
    return mismatches


def _simulation_mismatches(data, trees):
    automaton = automaton_from_json(data)
    simulated = simulate(automaton)
    mismatches = sum(1 for tree in trees if accepts(automaton, tree, tree.root) != accepts(simulated, tree, tree.root))
    witnesses = [str(v) for v in special_basic_violations(simulated, POWERSET)]
    return mismatches, witnesses


def closure_corpus():
    """Seeded automata for the closure checks, with and without chromatic variables"""
    return ([('mu', text) for text in MU_CORPUS] + [('mso', text) for text in MSO_CORPUS]
            + [('so', data) for data in SO_AUTOMATA])


def corpus_automaton(source):
    kind, item = source
    liftings = builtin_liftings(POWERSET)
    if kind == 'mu':
        return compile_mu(parse_mu(item), liftings)
    if kind == 'mso':
        return compile_mso(parse_mso(item), liftings)
    return automaton_from_json(item)


def _source_name(source):
    kind, item = source
    return item['name'] if kind == 'so' else f'{kind}: {item}'


def _recoloured(tree, var):
    for points in subsets(tree.carrier):
        model = tree.model.with_valuation({**tree.model.valuation, var: points})
        yield TreeModel(model, tree.frame, tree.root)


def _complement_failures(source, trees):
    automaton = corpus_automaton(source)
    complement = complement_aut(monotonize(automaton))
    return sum(1 for tree in trees if accepts(complement, tree, tree.root) == accepts(automaton, tree, tree.root))


def _union_failures(first_source, second_source, trees):
    first, second = corpus_automaton(first_source), corpus_automaton(second_source)
    union = union_aut(first, second)
    failures = 0
    for tree in trees:
        expected = accepts(first, tree, tree.root) or accepts(second, tree, tree.root)
        if accepts(union, tree, tree.root) != expected:
            failures += 1
    return failures


def _projection_failures(source, var, trees):
    automaton = with_chromatic(corpus_automaton(source), {var})
    projected = project_aut(simulate(monotonize(automaton)), var)
    failures = 0
    for tree in trees:
        expected = any(accepts(automaton, coloured, tree.root) for coloured in _recoloured(tree, var))
        if accepts(projected, tree, tree.root) != expected:
            failures += 1
    return failures


def _game_agrees(seed):
    rng = np.random.default_rng(seed)
    game = random_game(rng, size=int(rng.integers(2, 11)), max_priority=int(rng.integers(1, 5)))
    result = solve_parity(game)
    oracle = solve_parity_bruteforce(game)
    return result.winning == oracle.winning and strategy_is_sound(game, result)


# Checks

def check_parity_solver(level, seed, jobs):
    """Zielonka against the positional-strategy oracle"""
    outcomes = Parallel(n_jobs=jobs)(delayed(_game_agrees)(seed + i) for i in range(level['games']))
    failures = [i for i, ok in enumerate(outcomes) if not ok]
    return _result(not failures, games=len(outcomes), failures=failures)


def check_mu_automata(level, seed, jobs):
    """compile_mu acceptance equals direct mu-calculus semantics on all small models"""
    caps = current_caps()
    sizes = {POWERSET: level['mu_size'], MON: min(level['mon_size'], caps.monotone_carrier)}
    counts = []
    for spec, size in sizes.items():
        models = model_corpus(spec, size)
        logger.debug(f"Mu automata corpus over {spec.name}: {len(models)} models up to {size} states")
        counts += Parallel(n_jobs=jobs)(delayed(_mu_formula_mismatches)(text, spec, models) for text in MU_CORPUS)
    return _result(sum(counts) == 0, formulas=len(counts), mismatches=sum(counts),
                   sizes={spec.name: size for spec, size in sizes.items()})


def check_mso_automata(level, seed, jobs):
    """compile_mso tree acceptance equals MSO semantics on enumerated powerset trees"""
    trees = enumerate_powerset_trees(level['mso_nodes'], 2)
    counts = Parallel(n_jobs=jobs)(delayed(_mso_formula_mismatches)(text, trees) for text in MSO_CORPUS)
    failing = [MSO_CORPUS[i] for i, n in enumerate(counts) if n]
    return _result(not failing, trees=len(trees), formulas=len(MSO_CORPUS), failing=failing)


def check_closure(level, seed, jobs):
    """Complement, union and projection against their set-theoretic meaning over the automaton corpus"""
    rng = np.random.default_rng(seed)
    trees = [random_tree_model(POWERSET, rng, max_nodes=5, depth=3) for _ in range(level['samples'])]
    corpus = closure_corpus()
    pairs = list(zip(corpus, corpus[1:]))

    complements = Parallel(n_jobs=jobs)(delayed(_complement_failures)(source, trees) for source in corpus)
    unions = Parallel(n_jobs=jobs)(delayed(_union_failures)(first, second, trees) for first, second in pairs)
    projections = Parallel(n_jobs=jobs)(delayed(_projection_failures)(source, var, trees)
                                        for source, var in PROJECTION_CORPUS)

    failures = [('complement', _source_name(s)) for s, n in zip(corpus, complements) if n]
    failures += [('union', _source_name(a), _source_name(b)) for (a, b), n in zip(pairs, unions) if n]
    failures += [('project', _source_name(s), var) for (s, var), n in zip(PROJECTION_CORPUS, projections) if n]
    return _result(not failures, automata=len(corpus), samples=len(trees), failures=failures)


def check_simulation(level, seed, jobs):
    """simulate preserves the language and yields special basic transitions"""
    rng = np.random.default_rng(seed)
    trees = [random_tree_model(POWERSET, rng, max_nodes=level['sim_nodes'], depth=3) for _ in range(level['samples'])]
    outcomes = Parallel(n_jobs=jobs)(delayed(_simulation_mismatches)(data, trees) for data in SO_AUTOMATA)
    mismatches = sum(n for n, _ in outcomes)
    witnesses = [w for _, ws in outcomes for w in ws]
    return _result(mismatches == 0 and not witnesses, automata=len(SO_AUTOMATA), mismatches=mismatches,
                   not_special_basic=witnesses)


def check_bad_trace(level, seed, jobs):
    """Safra detector against the lasso graph oracle"""
    rng = np.random.default_rng(seed)
    failures = 0
    checked = 0
    for states, priorities in ((['a'], {'a': 1}), (['a', 'b'], {'a': 1, 'b': 2}), (['a', 'b'], {'a': 2, 'b': 3})):
        alphabet = [random_relation(states, rng) for _ in range(6)]
        detector = bad_trace_automaton(priorities.get, max(priorities.values()), len(states))
        for prefix, cycle in lasso_words(alphabet, level['lasso_length']):
            checked += 1
            if detector.accepts_lasso(prefix, cycle) == lasso_has_bad_trace(prefix, cycle, priorities.get):
                failures += 1
    states = ['a', 'b', 'c']
    for _ in range(level['lasso_random']):
        priorities = {s: int(rng.integers(0, 4)) for s in states}
        alphabet = [random_relation(states, rng) for _ in range(6)]
        detector = bad_trace_automaton(priorities.get, max(priorities.values()), len(states))
        prefix, cycle = random_lasso(alphabet, rng)
        checked += 1
        if detector.accepts_lasso(prefix, cycle) == lasso_has_bad_trace(prefix, cycle, priorities.get):
            failures += 1
    return _result(failures == 0, lassos=checked, failures=failures)


def check_uniform_laws(level, seed, jobs):
    """T h(alpha_*) = alpha on every enumerated value, and strong adequacy for bags"""
    constructions = [PowersetConstruction(), BagConstruction(), MonStarConstruction()]
    constructions += [PolynomialConstruction(spec) for spec in POLYNOMIAL_SPECS]
    built = 0
    broken = []
    for construction in constructions:
        for size in range(1, level['star_size'] + 1):
            carrier = frozenset(f'x{i}' for i in range(size))
            for alpha in enumerate_tobjects(construction.spec, carrier):
                try:
                    construction.star(alpha)
                    built += 1
                except RuntimeError as e:
                    broken.append(str(e))
    report = check_adequacy(BagConstruction(), sample_budget=level['samples'], seed=seed, strong=True)
    passed = not broken and report['adequate'] and not report['strong_failures']
    return _result(passed, stars=built, broken=broken, bag_violations=len(report['violations']),
                   bag_strong_failures=len(report['strong_failures']))


def check_counterexample(level, seed, jobs):
    """Replay of the missing adequate construction for plain neighbourhoods"""
    report = counterexample_demo()
    return _result(report['success'], steps={s['step']: s['holds'] for s in report['steps']})


def check_matching(level, seed, jobs):
    """M* star models along f match, and matched pairs agree on atomic formulas"""
    rng = np.random.default_rng(seed)
    construction = MonStarConstruction(m=2, k=1)
    failures = []
    for i in range(level['samples']):
        domain = frozenset(f'x{j}' for j in range(int(rng.integers(1, 4))))
        codomain = frozenset(f'y{j}' for j in range(int(rng.integers(1, 4))))
        f = random_map(domain, codomain, rng)
        alpha = random_tobject(MONSTAR, domain, rng)
        valuation = {v: frozenset(y for y in sorted(codomain) if rng.random() < 0.5) for v in ('a', 'b')}
        pulled = {v: frozenset(x for x in domain if f[x] in z) for v, z in valuation.items()}
        beta = apply_map(MONSTAR, f, alpha, codomain)
        left = pointed_star(construction, alpha, pulled)
        right = pointed_star(construction, beta, valuation)
        if not models_match(left, right, 2, cap=2):
            failures.append(('match', i, alpha.text))
        elif atomic_profile(left) != atomic_profile(right):
            failures.append(('atomic', i, alpha.text))
    return _result(not failures, samples=level['samples'], failures=failures)


def check_unravelling(level, seed, jobs):
    """An automaton accepts the unravelled tree iff its star translation accepts the model"""
    rng = np.random.default_rng(seed)
    construction = BagConstruction()
    failures = []
    checked = 0
    for data in BAG_AUTOMATA:
        automaton = automaton_from_json(data)
        translated = translate_automaton(automaton, construction)
        for i in range(level['samples']):
            model = random_acyclic_model(BAG, rng, size=int(rng.integers(1, 4)))
            point = 's0'
            unravelled = unravel(model, point, construction, depth=6)
            if unravelled.frontier or unravelled.homomorphism_failures():
                failures.append((data['name'], i, 'unravelling'))
                continue
            checked += 1
            tree = unravelled.tree
            if accepts(automaton, tree, tree.root) != accepts(translated, model, point, mode='full'):
                failures.append((data['name'], i, 'acceptance'))
    return _result(not failures, checked=checked, failures=failures)


def check_cross_translations(level, seed, jobs):
    """mu to MSO, and MMSO against its MSO rendering, on all small models"""
    mismatches = []
    powerset = builtin_liftings(POWERSET)
    for text in MU_CORPUS:
        formula = parse_mu(text)
        translated = mu_to_mso(formula)
        for size in range(1, level['cross_size'] + 1):
            for model in enumerate_models(POWERSET, size):
                for point in model.carrier:
                    try:
                        same = eval_mu(formula, model, point, powerset) == eval_mso(translated, model, point, powerset)
                    except CapExceeded:
                        continue
                    if not same:
                        mismatches.append(('mu', text, label(point)))
    mon = builtin_liftings(MON)
    for text in MMSO_CORPUS:
        formula = parse_mso(text)
        rendered = mmso_to_mso(formula)
        for size in range(1, level['cross_size'] + 1):
            for model in enumerate_models(MON, size):
                for point in model.carrier:
                    if eval_mmso(formula, model, point) != eval_mso(rendered, model, point, mon):
                        mismatches.append(('mmso', text, label(point)))
    return _result(not mismatches, mismatches=mismatches[:20])


CHECKS = [
    ("Parity Solver", check_parity_solver),
    ("Mu Automata", check_mu_automata),
    ("MSO Automata", check_mso_automata),
    ("Closure Operations", check_closure),
    ("Simulation", check_simulation),
    ("Bad-Trace Detector", check_bad_trace),
    ("Uniform Constructions", check_uniform_laws),
    ("Neighbourhood Counterexample", check_counterexample),
    ("M* Matching", check_matching),
    ("Unravelling", check_unravelling),
    ("Cross Translations", check_cross_translations),
]


def run_self_checks(level='quick', seed=None, jobs=1, only=None):
    """Run the check suite; returns a report dict with one entry per check"""
    settings = level_settings(level)
    seed = get_config().SEED if seed is None else seed
    logger.info(f"Starting {level} self-checks with seed {seed}...")

    report = {'level': level, 'seed': seed, 'checks': {}}
    failed_checks = []
    for check_name, check_func in CHECKS:
        if only and check_name not in only:
            continue
        logger.info(f"Running {check_name} check...")
        try:
            outcome = check_func(settings, seed, jobs)
        except Exception as e:
            logger.error(f"{check_name} check crashed: {str(e)}")
            outcome = _result(False, error=str(e))
        report['checks'][check_name] = outcome
        if not outcome['passed']:
            failed_checks.append(check_name)

    if failed_checks:
        logger.error(f"Self-checks failed: {', '.join(failed_checks)}")
    else:
        logger.info("All self-checks passed!")
    report['passed'] = not failed_checks
    return report


def main():
    logging.basicConfig(level=logging.INFO, format='%(asctime)s - %(levelname)s - %(message)s')
    level = sys.argv[1] if len(sys.argv) > 1 else 'quick'
    logger.info("=" * 60)
    logger.info("Coalgebraic Automata Kit")
    logger.info("Self-Check Script")
    logger.info(f"Started at: {datetime.now()}")
    logger.info("=" * 60)

    report = run_self_checks(level)
    if not report['passed']:
        logger.error("Self-checks failed. See the messages above.")
        sys.exit(1)


if __name__ == '__main__':
    main()
