"""Exception types shared across the toolkit.

Every error carries a short machine-readable ``code`` so the HTTP layer can
map failures to JSON error responses without string matching.
"""


class CrowdEvalError(Exception):
    code = "Error"


class ParallelLines(CrowdEvalError):
    code = "ParallelLines"


class DegenerateCalibration(CrowdEvalError):
    code = "DegenerateCalibration"


class OutOfBounds(CrowdEvalError):
    code = "OutOfBounds"


class InvalidScene(CrowdEvalError):
    code = "InvalidScene"


class NoPath(CrowdEvalError):
    code = "NoPath"


class MixedResolutions(CrowdEvalError):
    code = "MixedResolutions"


class EmptyDirectory(CrowdEvalError):
    code = "EmptyDirectory"


class UnreadableFile(CrowdEvalError):
    code = "UnreadableFile"


class DimensionMismatch(CrowdEvalError):
    code = "DimensionMismatch"


class LengthMismatch(CrowdEvalError):
    code = "LengthMismatch"


class GeometryMismatch(CrowdEvalError):
    code = "GeometryMismatch"


class ShapeMismatch(CrowdEvalError):
    code = "ShapeMismatch"


class DegenerateVariance(CrowdEvalError):
    code = "DegenerateVariance"


class ParseError(CrowdEvalError):
    code = "ParseError"
