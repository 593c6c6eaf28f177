"""Error types shared across the geometry and verification layers."""


class GeometryError(Exception):
    """Base class for chart/structure errors."""


class DegenerateMetricError(GeometryError):
    """Metric determinant vanishes (|det g| <= 1e-10) at a sample point."""


class NearNullVectorError(GeometryError):
    """Gram-Schmidt hit a vector of near-zero squared norm (indefinite
    metrics only; the frame construction cannot continue)."""


class RequiresRiemannianError(GeometryError):
    """Identity is only asserted for positive-definite metrics."""


class DiscriminantSignError(GeometryError):
    """Operation requires a specific sign of p^2 + 4q."""


class UnsupportedDegreeError(GeometryError):
    """Operator applied to a form degree it is not defined for."""


class SingularJacobianError(GeometryError):
    """Map Jacobian is not invertible at the requested point."""


class PreconditionError(GeometryError):
    """A conditional identity was requested outside its hypothesis
    (e.g. an isometry-only identity on a non-isometric map)."""


class ManifestError(Exception):
    """Manifest file cannot be parsed or fails semantic validation."""
