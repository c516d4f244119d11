"""Exception hierarchy.

Every error carries a short machine-readable ``code`` so that loaders and the
command line can report one stable identifier per invariant violation.
"""


class CinError(ValueError):
    code = "E_INVALID"

    def __init__(self, message, code=None):
        super().__init__(message)
        if code is not None:
            self.code = code

    def __str__(self):
        return f"{self.code}: {super().__str__()}"


class InputError(CinError):
    """Malformed or inconsistent input data."""

    code = "E_INPUT"


class TopologyError(CinError):
    """The network graph violates a structural requirement (e.g. connectivity)."""

    code = "E_DISCONNECTED"


class ParameterError(CinError):
    """A numeric parameter is out of its admissible range."""

    code = "E_PARAM"


# Documented codes, one per invariant violation.
ERROR_CODES = {
    "E_JSON": "file is not valid JSON",
    "E_MISSING_FIELD": "a required field is absent",
    "E_BAD_FIELD": "a field has the wrong type or an invalid value",
    "E_BAD_SITE": "an element location is not a valid site id",
    "E_DUP_SITE": "two elements occupy the same site",
    "E_DUP_EDGE": "the edge list repeats an edge or contains a self loop",
    "E_DISCONNECTED": "the topology graph is not connected",
    "E_NEG_DISTANCE": "a public edge distance is negative",
    "E_NEG_VALUE": "a cost or public attribute that must be nonnegative is negative",
    "E_PARAM": "a privacy or solver parameter is out of range",
    "E_INPUT": "inputs are inconsistent with each other",
}
