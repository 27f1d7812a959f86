//! Co-clustering of dynamic bipartite count networks with a non-stationary
//! Poisson latent block model.
//!
//! Rows, columns and time intervals are each partitioned. Counts in a cell
//! are Poisson with a rate shared by the cell's (row cluster, column
//! cluster, time cluster) block. Rates and cluster proportions are
//! integrated out against conjugate Gamma and Dirichlet priors, which
//! gives the exact integrated completed likelihood (ICL) of a labelling
//! ([`icl::icl_exact`]). A greedy search ([`search::multi_restart`]) then
//! maximises it over labels and cluster counts together.
//!
//! ```
//! use dynlbm::search::{multi_restart, SearchConfig};
//! use dynlbm::simulate::{partition_ari, sample, GenSpec};
//!
//! let spec = GenSpec::additive(20, 20, 8, vec![0.5, 4.0], vec![0.5, 3.0], vec![1.0], 1);
//! let (tensor, truth) = sample(&spec).unwrap();
//! let mut cfg = SearchConfig::for_tensor(&tensor);
//! cfg.restarts = 4;
//! let fit = multi_restart(&tensor, &cfg).unwrap();
//! assert_eq!(partition_ari(&fit.partition, &truth).unwrap(), [1.0; 3]);
//! ```
//!
//! Modules, bottom up: [`tensor`] (sparse counts), [`partition`],
//! [`stats`] (block sufficient statistics), [`icl`], [`search`],
//! [`simulate`] (generator and ARI), [`ingest`] (contact logs and tensor
//! dumps), [`report`] and [`cli`].

pub mod cli;
pub mod error;
pub mod hyper;
pub mod icl;
pub mod ingest;
pub mod partition;
pub mod report;
pub mod search;
pub mod simulate;
pub mod stats;
pub mod tensor;
