"""Natural connections on Riemannian almost product manifolds."""

from ._papm import (
    DomainError,
    Error,
    Expr,
    GeometryError,
    Manifold,
    ParseError,
    StructuredPoint,
    build_F,
    class_flags,
    classify_connection,
    classify_parallel_torsion,
    conformal_manifold,
    discriminant,
    explicit_manifold,
    named_connection,
    parse,
    q_tensor,
    run_cli,
    sample_points,
    torsion,
    validate,
    w_bilinear,
)

__all__ = [name for name in dir() if not name.startswith("_")]
