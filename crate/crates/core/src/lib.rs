//! Exact q-flux polynomials of quadriculated annuli.
//!
//! Regions are parsed from ASCII grids, tiled by dominoes, weighted with
//! signed monomials in `p` (flux) and `q` (volume), and their generating
//! polynomial is computed as a Kasteleyn determinant. The connection
//! (transfer) matrix of the cut-open annulus gives a second route to the
//! same polynomial and to that of every finite cover. The `spectral`
//! module turns the structural statements about the roots into exact,
//! checkable certificates.

pub mod algebra;
pub mod analysis;
pub mod cert;
pub mod region;
pub mod surface;
pub mod tiling;
pub mod kasteleyn;
pub mod transfer;
pub mod spectral;
