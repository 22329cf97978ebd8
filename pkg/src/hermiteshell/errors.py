"""Exception types shared across the package."""


class DomainError(ValueError):
    """A parameter lies outside its admissible domain."""


class SingularFrameError(RuntimeError):
    """Tangent vectors are (nearly) parallel; no surface frame exists."""


class DegenerateSplitError(ValueError):
    """A subdivision parameter coincides with the patch boundary."""


class StepFailureError(RuntimeError):
    """Newton did not reach the requested residual tolerance."""

    def __init__(self, message, residual=None, iterations=None):
        super().__init__(message)
        self.residual = residual
        self.iterations = iterations


class ConstraintConflictError(ValueError):
    """A degree of freedom carries more than one prescription."""


class SceneError(ValueError):
    """A scene configuration failed validation."""

    def __init__(self, issues):
        if isinstance(issues, str):
            issues = [issues]
        self.issues = list(issues)
        super().__init__("; ".join(self.issues))
