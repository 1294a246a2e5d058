"""
Predicate liftings and named lifting sets
"""

from dataclasses import dataclass, field

from models.errors import DomainError


@dataclass(frozen=True, eq=False)
class Lifting:
    """n-place predicate lifting decided by `evaluator(alpha, args)`"""
    name: str
    arity: int
    spec: object
    evaluator: object
    table: frozenset = None
    dual: bool = False

    def member(self, alpha, args):
        """Decide alpha in lambda_X(args)"""
        args = tuple(frozenset(a) for a in args)
        if len(args) != self.arity:
            raise DomainError(f"Lifting {self.name} expects {self.arity} arguments, got {len(args)}")
        for arg in args:
            if not arg <= alpha.carrier:
                raise DomainError(f"Argument of {self.name} leaves the carrier")
        if self.dual:
            complemented = tuple(alpha.carrier - a for a in args)
            return not self.evaluator(alpha, complemented)
        return bool(self.evaluator(alpha, args))

    def boolean_dual(self, name=None):
        return Lifting(
            name=name or dual_name(self.name),
            arity=self.arity,
            spec=self.spec,
            evaluator=self.evaluator,
            table=self.table,
            dual=not self.dual
        )

    def to_dict(self):
        return {'name': self.name, 'arity': self.arity, 'functor': self.spec.name, 'dual': self.dual}

    def __repr__(self):
        return f'<Lifting {self.name}/{self.arity}>'


def dual_name(name):
    if name.endswith('_d'):
        return name[:-2]
    return name + '_d'


@dataclass
class LiftingSet:
    """Liftings available for one functor, resolving `_d` names to Boolean duals"""
    spec: object
    liftings: dict = field(default_factory=dict)
    dual_names: dict = field(default_factory=dict)
    factory: object = None
    _derived: dict = field(default_factory=dict, init=False, repr=False, compare=False)

    def register(self, lifting, dual_of=None):
        if lifting.spec != self.spec:
            raise DomainError(f"Lifting {lifting.name} is for functor {lifting.spec.name}, not {self.spec.name}")
        self.liftings[lifting.name] = lifting
        if dual_of is not None:
            self.dual_names[lifting.name] = dual_of
            self.dual_names[dual_of] = lifting.name
        return lifting

    def resolve(self, name):
        if name in self.liftings:
            return self.liftings[name]
        if name in self._derived:
            return self._derived[name]
        made = None
        if name.endswith('_d') and len(name) > 2:
            made = self.resolve(name[:-2]).boolean_dual(name)
        elif self.factory is not None:
            made = self.factory(name)
        if made is None:
            raise DomainError(f"Unregistered lifting '{name}' for functor {self.spec.name}")
        self._derived[name] = made
        return made

    def dual_of(self, name):
        """Name of the Boolean dual of a registered lifting"""
        if name in self.dual_names:
            return self.dual_names[name]
        self.resolve(name)
        return dual_name(name)

    def __contains__(self, name):
        try:
            self.resolve(name)
            return True
        except DomainError:
            return False

    def names(self):
        """Registered lifting names; duals and factory-made liftings are not listed"""
        return sorted(self.liftings)

    def subset(self, names):
        """Restriction to the given names (duals resolved)"""
        result = LiftingSet(self.spec, factory=self.factory)
        for name in names:
            result.liftings[name] = self.resolve(name)
            partner = self.dual_names.get(name)
            if partner is not None and partner in names:
                result.dual_names[name] = partner
                result.dual_names[partner] = name
        return result
