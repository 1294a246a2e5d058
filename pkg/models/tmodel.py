"""
T-models, tree models and one-step models
"""

from dataclasses import dataclass, field

import networkx as nx

from models.errors import DomainError
from models.functor import label, sort_labels


def _frozen_valuation(valuation):
    return {var: frozenset(points) for var, points in (valuation or {}).items()}


@dataclass(frozen=True, eq=False)
class TModel:
    """Finite T-model (S, sigma, V)"""
    spec: object
    carrier: frozenset
    sigma: dict
    valuation: dict = field(default_factory=dict)

    def __post_init__(self):
        object.__setattr__(self, 'carrier', frozenset(self.carrier))
        object.__setattr__(self, 'valuation', _frozen_valuation(self.valuation))
        missing = [s for s in self.carrier if s not in self.sigma]
        if missing:
            raise DomainError(f"Structure map not total, missing {sort_labels(missing)}")
        for s, alpha in self.sigma.items():
            if alpha.carrier != self.carrier:
                raise DomainError(f"Structure at {label(s)} lives over a different carrier")
            if alpha.spec != self.spec:
                raise DomainError(f"Structure at {label(s)} has functor {alpha.spec.name}")
        for var, points in self.valuation.items():
            if not points <= self.carrier:
                raise DomainError(f"Valuation of {var} leaves the carrier")

    def colors(self, s, variables=None):
        """Conjugate coloring V-dagger(s), optionally restricted"""
        names = self.valuation if variables is None else variables
        return frozenset(v for v in names if s in self.valuation.get(v, frozenset()))

    def with_valuation(self, valuation):
        return TModel(self.spec, self.carrier, self.sigma, valuation)

    def to_dict(self):
        return {
            'functor': self.spec.name,
            'carrier': sort_labels(self.carrier),
            'valuation': {v: sort_labels(p) for v, p in sorted(self.valuation.items())}
        }

    def __repr__(self):
        return f'<TModel {self.spec.name} |S|={len(self.carrier)}>'


@dataclass(frozen=True, eq=False)
class TreeModel:
    """T-model with a supporting frame that forms a tree from its root"""
    model: TModel
    frame: dict
    root: object

    def __post_init__(self):
        frame = {s: frozenset(self.frame.get(s, ())) for s in self.model.carrier}
        object.__setattr__(self, 'frame', frame)
        if self.root not in self.model.carrier:
            raise DomainError(f"Root {label(self.root)} is not a state")

    @property
    def carrier(self):
        return self.model.carrier

    def successors(self, s):
        return self.frame[s]

    def graph(self):
        graph = nx.DiGraph()
        graph.add_nodes_from(self.model.carrier)
        graph.add_edges_from((s, t) for s, ts in self.frame.items() for t in ts)
        return graph

    def is_tree(self):
        """Unique frame path from the root to every state"""
        graph = self.graph()
        if graph.in_degree(self.root) != 0:
            return False
        return nx.is_arborescence(graph)

    def depth(self):
        lengths = nx.single_source_shortest_path_length(self.graph(), self.root)
        return max(lengths.values())

    def __repr__(self):
        return f'<TreeModel root={label(self.root)} |S|={len(self.model.carrier)}>'


@dataclass(frozen=True, eq=False)
class OneStepModel:
    """One-step model (X, alpha, V)"""
    carrier: frozenset
    alpha: object
    valuation: dict = field(default_factory=dict)

    def __post_init__(self):
        object.__setattr__(self, 'carrier', frozenset(self.carrier))
        object.__setattr__(self, 'valuation', _frozen_valuation(self.valuation))
        if self.alpha.carrier != self.carrier:
            raise DomainError("One-step structure lives over a different carrier")

    def with_valuation(self, valuation):
        return OneStepModel(self.carrier, self.alpha, valuation)

    def to_dict(self):
        return {
            'carrier': sort_labels(self.carrier),
            'alpha': self.alpha.text,
            'valuation': {label(v): sort_labels(p) for v, p in self.valuation.items()}
        }

    def __repr__(self):
        return f'<OneStepModel |X|={len(self.carrier)} alpha={self.alpha.text}>'
