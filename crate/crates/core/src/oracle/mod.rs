//! Independent ground truth for small instances.

mod brute;
mod dp;
mod numeric;

pub use brute::{all_free_trees, all_rooted_trees, brute_bs, brute_cw, count_free_trees, for_each_free_tree, MAX_BRUTE_N};
pub use dp::{exact_min_ct, exact_min_ct_budget, ExactCt, MAX_DP_N};
pub use numeric::{
    contract_pair, execute, full_contraction_reference, ones_tensors, random_tensors, DenseTensor,
    REFERENCE_LIMIT,
};
