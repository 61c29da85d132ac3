use alloc::string::String;

/// Errors raised by the core library.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("the two rectangles do not share a full horizontal edge")]
    RectanglesNotAdjacent,
    #[error("triangle {0} has non-positive area")]
    DegenerateTriangle(usize),
    #[error("edge ({0}, {1}) is shared by more than two triangles")]
    NonManifoldEdge(usize, usize),
    #[error("interface edge ({0}, {1}) has no matching triangle on the other subdomain")]
    NonMatchingInterface(usize, usize),
    #[error("vertex index {index} out of range ({len} vertices)")]
    VertexOutOfRange { index: usize, len: usize },
    #[error("quadrature of degree {0} is not tabulated")]
    UnsupportedDegree(usize),
    #[error("polynomial degree k = {0} is not supported (k must be 2 or 3)")]
    UnsupportedOrder(usize),
    #[error("the mesh has no interface edges")]
    EmptyInterface,
    #[error("singular local matrix on triangle {0}")]
    SingularLocalMatrix(usize),
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
}

pub type Result<T> = core::result::Result<T, Error>;
