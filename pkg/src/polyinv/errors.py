"""Exception types shared across the package."""


class InputError(ValueError):
    """Malformed or inconsistent input (bad text, mismatched spaces, violated preconditions)."""


class NoRationalWitness(Exception):
    """The bounded rational point search failed; the set is not proven empty."""


class UnsupportedEigenvalues(Exception):
    """An eigenvalue relation problem outside the rational / root-of-unity scope."""


class ComponentSplitIncomplete(Exception):
    """Factorization-based splitting could not certify irreducible components."""


class ProgramSyntaxError(InputError):
    """A syntax or semantic error in affine-program text, with its position."""

    def __init__(self, message: str, line: int, column: int):
        super().__init__(f"line {line}, column {column}: {message}")
        self.line = line
        self.column = column
