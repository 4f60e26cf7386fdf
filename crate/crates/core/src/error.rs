// Copyright 2026 The stokescell authors
//
// Licensed under the Apache license, version 2.0 (the "license");
// you may not use this file except in compliance with the license.
// You may obtain a copy of the license at
//
//     http://www.apache.org/licenses/license-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the license is distributed on an "as is" basis,
// without warranties or conditions of any kind, either express or implied.
// See the license for the specific language governing permissions and
// limitations under the license.

use thiserror::Error;

/// Errors raised by the library.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid shape: {0}")]
    InvalidShape(String),
    #[error("shape violates B(1/16) ⊂ T ⊂ B(3/8): min radius {min_radius:.6}, max radius {max_radius:.6}")]
    Containment { min_radius: f64, max_radius: f64 },
    #[error("mesh size {0}")]
    MeshSize(String),
    #[error("kernel evaluated at coincident points")]
    Singular,
    #[error("{tag} matrix is numerically singular (condition estimate {cond:.3e})")]
    SingularMatrix { tag: String, cond: f64 },
    #[error("dimension mismatch: {0}")]
    Dimension(String),
    #[error("consistency check failed: {0}")]
    Consistency(String),
    #[error("invalid parameter: {0}")]
    Parameter(String),
}

pub type Result<T> = std::result::Result<T, Error>;
