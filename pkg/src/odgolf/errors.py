class GraphError(Exception):
    """Base class for every error raised by odgolf."""


class ParseError(GraphError):
    def __init__(self, message: str, line: int | None = None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


class ValidationError(GraphError):
    """Input is well-formed but violates a graph or parameter constraint."""


class SelfLoopError(ValidationError):
    pass


class NodeRangeError(ValidationError):
    pass


class DuplicateEdgeError(ValidationError):
    pass


class MissingEdgeError(ValidationError):
    pass


class DisconnectedGraphError(ValidationError):
    pass
