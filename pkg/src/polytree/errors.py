"""Exception hierarchy shared by all modules."""


class PolytreeError(Exception):
    """Base class for all errors raised by this package."""


class NonCommuting(PolytreeError):
    """A square of finite-set maps fails to commute."""


class SquareNotCommuting(NonCommuting):
    """A named square of a candidate endofunctor morphism fails to commute."""

    def __init__(self, which, witness=None):
        self.which = which
        self.witness = witness
        super().__init__(f"square {which!r} does not commute (witness: {witness!r})")


class MiddleNotCartesian(PolytreeError):
    """The middle square of a candidate morphism is not a pullback."""

    def __init__(self, witness):
        self.witness = witness
        super().__init__(f"middle square not cartesian at node {witness!r}")


class ColourMismatch(PolytreeError):
    """Two endofunctors meant to share a colour set do not."""


class BoundExceeded(PolytreeError):
    """An operation needed data beyond the configured truncation bound."""


class TreeAxiomError(PolytreeError):
    """A polynomial endofunctor fails one of the four tree axioms."""

    axiom = None


class TNotInjective(TreeAxiomError):
    """Axiom 2: the map t must be injective."""

    axiom = 2

    def __init__(self, witness_pair):
        self.witness = witness_pair
        super().__init__(f"axiom 2 fails: t identifies nodes {witness_pair!r}")


class SBadComplement(TreeAxiomError):
    """Axiom 3: s must be injective with singleton complement (the root)."""

    axiom = 3

    def __init__(self, complement_size, detail=""):
        self.complement_size = complement_size
        msg = f"axiom 3 fails: complement of s has size {complement_size}"
        if detail:
            msg += f" ({detail})"
        super().__init__(msg)


class SigmaDiverges(TreeAxiomError):
    """Axiom 4: every edge must reach the root by iterating sigma."""

    axiom = 4

    def __init__(self, witness_cycle):
        self.witness = witness_cycle
        super().__init__(f"axiom 4 fails: sigma cycles through {witness_cycle!r}")


class NotALeaf(PolytreeError):
    """Grafting point is not a leaf of the lower tree."""


class NotInnerEdge(PolytreeError):
    """Contraction requires an edge in the image of both s and t."""


class TrivialTreeError(PolytreeError):
    """Operation undefined on the trivial tree."""


class ArityUnsupported(PolytreeError):
    """A node arity lies beyond the arity bound of a truncated base."""


class NotFlat(PolytreeError):
    """A collection has an operation with a nontrivial colour-tuple stabiliser."""

    def __init__(self, arity, element, permutation):
        self.arity = arity
        self.element = element
        self.permutation = permutation
        super().__init__(
            f"not flat: arity-{arity} element {element!r} fixed by {permutation!r}"
        )


class DistanceUndefined(PolytreeError):
    """Tree-order distance requested for an incomparable pair."""


class ParseError(PolytreeError):
    """Syntax or semantic error in a CLI document, with position."""

    def __init__(self, message, line, column):
        self.line = line
        self.column = column
        super().__init__(f"{line}:{column}: {message}")
