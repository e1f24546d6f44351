//! Exact decision procedures for bilinear balance equations on weighted graphs.
//!
//! A weighted graph over a field `F` assigns a weight `d_{i,j} ∈ F` to each
//! edge `(i, j)` with `i < j`.  A *consistent labeling* attaches a pair
//! `(a_k, b_k) ∈ F²` to every vertex so that `a_i·b_j − a_j·b_i = d_{i,j}`
//! holds on every edge.  Whether such a labeling exists is exactly the
//! question of whether a given central element of a class-2 algebra or group
//! is a single commutator, which is where the [`bridge`] module comes in.
//!
//! The crate is organised as independent layers:
//!
//! * [`field`] — exact scalars over `F_p` (p prime) and `Q`;
//! * [`graph`] — weighted graphs, labelings, permutations, the verifier;
//! * [`defect`] — detection of the `(m)_A`, `(4)_B`, `(4)_C` defect families
//!   that certify unsolvability;
//! * [`engine`] — constructive labeling for trees, cycles and all graphs on
//!   at most four vertices, plus the top-level [`engine::decide`] pipeline;
//! * [`oracle`] — brute-force reference implementations used to cross-check
//!   the engine (deliberately sharing no solver code with it);
//! * [`bridge`] — alternating bilinear structures, presentations of a target
//!   element, image membership, and the class-2 group reduction;
//! * [`io`] — serde front ends for the JSON wire formats.

pub mod defect;
pub mod engine;
pub mod field;
pub mod graph;
pub mod io;
pub mod oracle;

pub mod bridge;

mod linalg;
