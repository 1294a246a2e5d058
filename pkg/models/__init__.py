"""
Data models for functors, models, formulas and automata
"""

from models.errors import DomainError, FormulaSyntaxError, CapExceeded, InstabilityError, exit_code_for
from models.functor import (
    Const, Id, Product, Coproduct, Exp, Powerset, Bag, MonNbhd, MonNbhdStar,
    POWERSET, BAG, MON, MONSTAR, IDENTITY, TObject, label, sort_labels
)
from models.tmodel import TModel, TreeModel, OneStepModel
from models.lifting import Lifting, LiftingSet
from models.automaton import Automaton, ParityGame, SolveResult, MacroState, StreamAutomaton

__all__ = [
    'DomainError', 'FormulaSyntaxError', 'CapExceeded', 'InstabilityError', 'exit_code_for',
    'Const', 'Id', 'Product', 'Coproduct', 'Exp', 'Powerset', 'Bag', 'MonNbhd', 'MonNbhdStar',
    'POWERSET', 'BAG', 'MON', 'MONSTAR', 'IDENTITY', 'TObject', 'label', 'sort_labels',
    'TModel', 'TreeModel', 'OneStepModel', 'Lifting', 'LiftingSet',
    'Automaton', 'ParityGame', 'SolveResult', 'MacroState', 'StreamAutomaton'
]
