//! A small reverse-mode autodiff tape over `ArrayD<f64>`.
//!
//! Ops execute eagerly and append nodes to a [`Graph`]; calling
//! [`Graph::backward`] sweeps the tape in reverse and returns gradients
//! for every node that needs them. One graph is built per forward pass
//! and dropped afterwards, so there is no node reuse across iterations.

mod conv;
mod graph;
mod linalg;
mod ops;


pub use graph::{BackCtx, Gradients, Graph, Tensor};
