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


//! Boundary integral computations for Stokes flow past periodic arrays of holes.

pub mod capacity;
pub mod cell;
pub mod error;
pub mod geometry;
pub mod kernels;
pub mod nystrom;
pub mod periodic;
pub mod quad;
pub mod rescale;
pub mod special;

pub use error::{Error, Result};
pub use geometry::{build_mesh, BoundaryMesh, MeshSize, Point, ShapeKind, ShapeSpec};
