//! Rate / error-exponent / distortion trade-offs for two-node distributed
//! hypothesis testing with lossy reconstruction, plus desk-scale Monte-Carlo
//! simulation of the corresponding coding schemes.

pub mod general;
pub mod iproject;
pub mod prob;
pub mod sim;
pub mod tai;

pub use prob::{
    binary_convolve, binary_entropy, binary_entropy_inv, binary_kl, compose, Alphabet, Channel,
    Dist, Joint, ProbError, Role,
};
